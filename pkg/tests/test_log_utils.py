import logging

from log_utils import configure_logging, verbosity_to_level


def test_verbosity_levels():
    assert verbosity_to_level(0) == logging.WARNING
    assert verbosity_to_level(1) == logging.INFO
    assert verbosity_to_level(3) == logging.DEBUG


def test_log_file_receives_records(tmp_path):
    path = tmp_path / "lab.log"
    root = configure_logging("info", log_file=str(path))
    logging.getLogger("lattice").info("enumerated %d points", 9)
    for handler in root.handlers:
        handler.flush()
    text = path.read_text(encoding="utf-8")
    assert "lattice - INFO - enumerated 9 points" in text
    configure_logging()
