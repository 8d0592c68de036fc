import numpy as np
import pytest

from piezoblow.grid_ops import Grid, sine_mode
from piezoblow.model import (
    InitialData,
    PhysicalParams,
    check_g2,
    check_g2_scale,
    ensure_valid,
    eval_sources,
    is_preset,
    parse_field_spec,
    validate_params,
)
from piezoblow.sources import NullSource, PowerDifferenceSource


class TestValidateParams:
    def test_defaults_are_valid(self):
        verdict = validate_params(PhysicalParams(), PowerDifferenceSource())

        assert verdict.ok
        assert bool(verdict)
        assert list(verdict) == []

    def test_strong_coupling_breaks_alpha1(self):
        verdict = validate_params(PhysicalParams(gamma=1.1), PowerDifferenceSource())

        assert not verdict
        assert any("alpha1" in message for message in verdict)

    @pytest.mark.parametrize(
        ("params", "source", "name"),
        [
            (PhysicalParams(alpha=0.0), PowerDifferenceSource(), "alpha"),
            (PhysicalParams(beta=-1.0), PowerDifferenceSource(), "beta"),
            (PhysicalParams(lambda1=-0.1), PowerDifferenceSource(), "lambda1"),
            (PhysicalParams(lambda2=-0.1), PowerDifferenceSource(), "lambda2"),
            (PhysicalParams(), PowerDifferenceSource(a=-1.0), "a must"),
            (PhysicalParams(), PowerDifferenceSource(eta=2.0), "eta"),
            (PhysicalParams(alpha=float("nan")), NullSource(), "finite"),
        ],
        ids=["alpha", "beta", "lambda1", "lambda2", "a", "eta", "nan"],
    )
    def test_each_violation_is_named(self, params, source, name):
        verdict = validate_params(params, source)

        assert not verdict.ok
        assert any(name in message for message in verdict.violations)

    def test_all_violations_are_reported_together(self):
        verdict = validate_params(
            PhysicalParams(lambda1=-1.0, lambda2=-1.0),
            PowerDifferenceSource(eta=1.5),
        )

        assert len(verdict.violations) >= 3

    def test_ensure_valid_raises_with_every_message(self):
        with pytest.raises(ValueError, match="lambda1.*lambda2"):
            ensure_valid(PhysicalParams(lambda1=-1.0, lambda2=-1.0), NullSource())


def test_alpha1_and_wave_speed():
    params = PhysicalParams(alpha=1.0, beta=1.0, gamma=0.5)

    assert params.alpha1 == pytest.approx(0.75)
    assert params.max_wave_speed() == pytest.approx(np.sqrt(1.5))
    np.testing.assert_allclose(params.stiffness_matrix(), [[1.0, -0.5], [-0.5, 1.0]])


def test_eval_sources_broadcasts_scalars():
    f1, f2, potential = eval_sources(PowerDifferenceSource(eta=4.0), np.zeros(3), 1.0)

    assert f1.shape == (3,)
    np.testing.assert_allclose(f1, -1.0)
    np.testing.assert_allclose(f2, 1.0)
    np.testing.assert_allclose(potential, 0.25)


@pytest.mark.parametrize("eta", [3.0, 4.0, 8.0], ids=["eta3", "eta4", "eta8"])
def test_eval_sources_is_odd(eta):
    rng = np.random.default_rng(11)
    v, p = rng.normal(size=(2, 50))
    source = PowerDifferenceSource(a=1.5, eta=eta)

    f1, f2, potential = eval_sources(source, v, p)
    g1, g2, mirrored = eval_sources(source, -v, -p)

    np.testing.assert_allclose(g1, -f1, rtol=1e-14)
    np.testing.assert_allclose(g2, -f2, rtol=1e-14)
    np.testing.assert_allclose(mirrored, potential, rtol=1e-14)


def test_g2_identity_holds_for_power_difference(grid):
    rng = np.random.default_rng(7)
    source = PowerDifferenceSource(a=2.0, eta=6.0)
    v = rng.normal(size=grid.size)
    p = rng.normal(size=grid.size)

    residual = check_g2(source, v, p, grid)

    assert abs(residual) <= 1e-12 * check_g2_scale(source, v, p, grid)


def test_g2_is_zero_for_null_source(grid):
    assert check_g2(NullSource(), sine_mode(grid), grid.zeros(), grid) == 0.0


class TestFieldSpecs:
    def test_zero_preset(self, grid):
        assert not np.any(parse_field_spec("zero", grid))

    def test_sine_presets(self, grid):
        np.testing.assert_allclose(parse_field_spec("sine", grid), sine_mode(grid))
        np.testing.assert_allclose(
            parse_field_spec("sine:0.5:3", grid),
            sine_mode(grid, 3, 0.5),
        )
        np.testing.assert_allclose(
            parse_field_spec("SINE:2", grid),
            sine_mode(grid, 1, 2.0),
        )

    @pytest.mark.parametrize(
        "spec",
        ["cosine", "sine:x", "sine:1:0", "sine:1:2:3", "sine:inf"],
        ids=["unknown", "amplitude", "mode", "too-long", "infinite"],
    )
    def test_malformed_presets_are_rejected(self, grid, spec):
        with pytest.raises(ValueError, match="v0"):
            parse_field_spec(spec, grid, "v0")

    def test_arrays_must_fit_the_grid(self, grid):
        with pytest.raises(ValueError, match="65 nodal values"):
            parse_field_spec(np.zeros(10), grid, "p1")

    def test_arrays_must_be_finite(self, grid):
        values = grid.zeros()
        values[3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            parse_field_spec(values, grid)

    def test_is_preset(self):
        assert is_preset("zero")
        assert is_preset("sine:1:2")
        assert not is_preset("data/v0.txt")


class TestInitialData:
    def test_resolve_returns_fields_in_order(self, grid):
        v0, v1, p0, p1 = InitialData(v0="sine", v1="sine:0.5").resolve(grid)

        np.testing.assert_allclose(v0, sine_mode(grid))
        np.testing.assert_allclose(v1, sine_mode(grid, 1, 0.5))
        assert not np.any(p0) and not np.any(p1)

    def test_nonzero_at_left_end_is_rejected(self, grid):
        values = sine_mode(grid)
        values[0] = 0.1

        with pytest.raises(ValueError, match="v1 must vanish at x = 0"):
            InitialData(v1=values).resolve(grid)

    def test_slope_at_right_end_is_rejected_for_displacements(self, grid):
        with pytest.raises(ValueError, match="p0 must have zero slope"):
            InitialData(p0=grid.nodes.copy()).resolve(grid)

    def test_slope_is_rejected_on_long_coarse_domains(self):
        grid = Grid(100.0, 8)
        ramp = (grid.nodes / grid.length) ** 2

        with pytest.raises(ValueError, match="v0 must have zero slope"):
            InitialData(v0=ramp).resolve(grid)

    def test_sampled_quarter_wave_passes_on_long_coarse_domains(self):
        grid = Grid(100.0, 8)
        wave = np.sin(0.5 * np.pi * grid.nodes / grid.length)

        v0, _, _, _ = InitialData(v0=wave).resolve(grid)

        np.testing.assert_array_equal(v0, wave)

    def test_velocities_may_have_a_slope_at_the_right_end(self, grid):
        _, v1, _, _ = InitialData(v1=grid.nodes.copy()).resolve(grid)

        np.testing.assert_allclose(v1, grid.nodes)

    def test_describe_summarizes_arrays(self):
        described = InitialData(p1=np.zeros(5)).describe()

        assert described == {
            "v0": "sine",
            "v1": "zero",
            "p0": "zero",
            "p1": "<array of 5 values>",
        }

    def test_modes_are_compatible_on_coarse_grids(self):
        grid = Grid(1.0, 16)

        InitialData(v0="sine:1:2", p0="sine:2:2").resolve(grid)
