import json
import logging

import pytest

from socialnav.config import get_settings
from socialnav.utils.logger import episode_context, get_logger, setup_logging


@pytest.fixture
def json_logs(monkeypatch):
    monkeypatch.setenv("SOCIALNAV_LOG_JSON", "true")
    get_settings.cache_clear()
    setup_logging()
    yield
    monkeypatch.delenv("SOCIALNAV_LOG_JSON")
    get_settings.cache_clear()
    setup_logging()


def read_events(capsys):
    return [json.loads(line) for line in capsys.readouterr().err.splitlines()]


def test_episode_id_only_inside_context(json_logs, capsys):
    log = get_logger("tests")
    with episode_context("circular-3-0-MPC-EDC"):
        log.info("dentro", step=1)
    log.info("fora")
    inside, outside = read_events(capsys)
    assert inside["episode_id"] == "circular-3-0-MPC-EDC"
    assert inside["step"] == 1
    assert inside["level"] == "info"
    assert "episode_id" not in outside


def test_stdout_stays_clean(json_logs, capsys):
    get_logger("tests").warning("aviso")
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "aviso" in captured.err


def test_explicit_level_filters(capsys):
    setup_logging(logging.WARNING)
    get_logger("tests").info("escondido")
    assert "escondido" not in capsys.readouterr().err
    setup_logging()
