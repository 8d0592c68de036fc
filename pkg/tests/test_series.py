import numpy as np
import pytest

from piezoblow.series import (
    SERIES_COLUMNS,
    DiagnosticSample,
    TimeSeries,
    read_csv,
    write_csv,
)


def make_series(count=5):
    samples = [
        DiagnosticSample(*(float(index + offset) for offset in range(16)))
        for index in range(count)
    ]
    return TimeSeries.from_samples(samples)


def test_from_samples_stacks_columns():
    series = make_series(3)

    assert len(series) == 3
    np.testing.assert_array_equal(series.t, [0.0, 1.0, 2.0])
    np.testing.assert_array_equal(series.l2_p, [15.0, 16.0, 17.0])
    assert series.sample(1) == DiagnosticSample(*(float(1 + i) for i in range(16)))


def test_columns_are_read_only():
    series = make_series()

    with pytest.raises(ValueError):
        series.energy[0] = 1.0


def test_head_keeps_leading_samples():
    series = make_series(5).head(2)

    assert len(series) == 2
    np.testing.assert_array_equal(series.t, [0.0, 1.0])


def test_mismatched_columns_are_rejected():
    columns = [np.zeros(3)] * 15 + [np.zeros(4)]

    with pytest.raises(ValueError, match="l2_p has 4 samples"):
        TimeSeries(*columns)


def test_repr_shows_the_time_span():
    assert repr(make_series(3)) == "TimeSeries(samples=3, t=[0, 2])"
    assert repr(make_series(0)) == "TimeSeries(samples=0)"


class TestCsv:
    def test_header_and_values(self, tmp_path):
        path = tmp_path / "series.csv"
        series = make_series(3)

        write_csv(path, series, diss_residual=0.0, F=np.ones(3))

        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(SERIES_COLUMNS)
        assert lines[1] == "0,1,0,12,13,14,15,1,nan,nan,3"
        columns = read_csv(path)
        np.testing.assert_array_equal(columns["linf_v"], [12.0, 13.0, 14.0])
        assert np.all(np.isnan(columns["G"]))

    def test_stride_keeps_the_last_sample(self, tmp_path):
        path = tmp_path / "series.csv"

        write_csv(path, make_series(6), diss_residual=np.zeros(6), stride=4)

        np.testing.assert_array_equal(read_csv(path)["t"], [0.0, 4.0, 5.0])

    def test_existing_file_is_not_overwritten(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("keep")

        with pytest.raises(FileExistsError):
            write_csv(path, make_series(), diss_residual=0.0)

        assert path.read_text() == "keep"

    def test_output_uses_line_feeds_and_full_precision(self, tmp_path):
        path = tmp_path / "series.csv"
        series = TimeSeries.from_samples([DiagnosticSample(*([0.1] * 16))])

        write_csv(path, series, diss_residual=0.0)

        data = path.read_bytes()
        assert b"\r" not in data
        assert b"0.10000000000000001" in data

    def test_foreign_tables_are_rejected(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")

        with pytest.raises(ValueError, match="not a series table"):
            read_csv(path)
