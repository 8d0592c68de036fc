import logging
from io import StringIO
from types import SimpleNamespace

import pytest

from piezoblow.cli import main
from piezoblow.logger import (
    ColoredFormatter,
    configure_worker_logging,
    console_level,
    setup_cli_logging,
)


def test_verbose_includes_debug(capsys, damped_config, output_dir):
    main(["simulate", "-c", str(damped_config), "--verbose", "-o", str(output_dir)])

    captured = capsys.readouterr()

    assert "Loading configuration" in captured.err
    assert "DEBUG:" in captured.err
    assert "piezoblow.core" in captured.err
    assert (output_dir / "series.csv").exists()


def test_quiet_suppresses_info(capsys, damped_config, output_dir):
    main(["simulate", "-c", str(damped_config), "--quiet", "-o", str(output_dir)])

    captured = capsys.readouterr()

    assert "Loading configuration" not in captured.err
    assert "Integrating" not in captured.err
    assert (output_dir / "series.csv").exists()


def test_quiet_keeps_warnings(capsys, damped_config, output_dir):
    with pytest.raises(SystemExit):
        main(["certify", "-c", str(damped_config), "-q", "-o", str(output_dir)])

    captured = capsys.readouterr()

    assert "Integrating" not in captured.err
    assert "No certificate (negative_energy)" in captured.err
    assert "No blow-up certificate exists" in captured.err


def test_file_receives_messages(capsys, damped_config, output_dir, tmp_path):
    log_path = tmp_path / "piezoblow.log"

    main(
        [
            "simulate",
            "-c",
            str(damped_config),
            "--log-file",
            str(log_path),
            "-o",
            str(output_dir),
        ]
    )

    contents = log_path.read_text()

    assert "Loading configuration" in contents
    assert "Completed simulate in" in contents
    assert f"Report written to {output_dir / 'report.json'}" in contents
    assert "[DEBUG] piezoblow" in contents


def test_setup_preserves_root_and_replaces_cli_handlers(tmp_path):
    root_logger = logging.getLogger()
    root_level = root_logger.level
    root_stream = StringIO()
    root_handler = logging.StreamHandler(root_stream)
    root_logger.addHandler(root_handler)

    try:
        logger = setup_cli_logging(log_file=str(tmp_path / "first.log"), color=False)
        old_handlers = logger.handlers[:]
        old_file_handler = next(
            handler
            for handler in old_handlers
            if isinstance(handler, logging.FileHandler)
        )

        logger = setup_cli_logging(color=False)
        logging.getLogger("piezoblow.integrator").warning("library message")

        assert root_logger.level == root_level
        assert root_handler in root_logger.handlers
        assert root_stream.getvalue() == ""
        assert len(logger.handlers) == 1
        assert all(handler not in logger.handlers for handler in old_handlers)
        assert old_file_handler.stream is None
    finally:
        root_logger.removeHandler(root_handler)


def test_colored_formatter_does_not_mutate_record(monkeypatch):
    fake_sys = SimpleNamespace(stderr=SimpleNamespace(isatty=lambda: True))
    monkeypatch.setattr("piezoblow.logger.sys", fake_sys)
    record = logging.LogRecord(
        "piezoblow.core", logging.WARNING, "core.py", 1, "failure", (), None
    )

    rendered = ColoredFormatter("%(levelname)s").format(record)

    assert rendered == "\033[93mWARNING\033[0m"
    assert record.levelname == "WARNING"


@pytest.mark.parametrize(
    ("options", "expected"),
    [
        ({}, logging.INFO),
        ({"verbose": True}, logging.DEBUG),
        ({"quiet": True}, logging.WARNING),
    ],
    ids=["default", "verbose", "quiet"],
)
def test_console_level_follows_setup(options, expected):
    setup_cli_logging(color=False, **options)

    assert console_level() == expected


def test_console_level_ignores_the_log_file(tmp_path):
    setup_cli_logging(quiet=True, log_file=str(tmp_path / "run.log"), color=False)

    assert console_level() == logging.WARNING


def test_worker_logging_replaces_inherited_handlers(tmp_path, capsys):
    parent = setup_cli_logging(log_file=str(tmp_path / "run.log"), color=False)
    inherited = parent.handlers[:]

    logger = configure_worker_logging(logging.INFO)
    logging.getLogger("piezoblow.core").info("point done")
    logging.getLogger("piezoblow.core").debug("hidden")

    assert all(handler not in logger.handlers for handler in inherited)
    assert len(logger.handlers) == 1
    assert not logger.propagate
    assert capsys.readouterr().err == "MainProcess: point done\n"
    assert "point done" not in (tmp_path / "run.log").read_text()
