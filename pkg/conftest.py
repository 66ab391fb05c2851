import math

import pytest

from src.models.failure_data import FailureLog

ENV_VARS = ("RELGROWTH_SEED", "RELGROWTH_LOG_LEVEL", "RELGROWTH_WORKERS")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def write_file(tmp_path):
    def write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def go_grouped_log():
    """Noiseless Goel-Okumoto data, a=100, g=0.1: nine bins holding ten expected errors each"""
    edges = [0.0] + [-math.log(1.0 - j / 10.0) / 0.1 for j in range(1, 10)]
    return FailureLog.from_bins((hi - lo, 10) for lo, hi in zip(edges[:-1], edges[1:]))


@pytest.fixture
def jm_log():
    """Expected JM dwell times for N=20, phi=0.05: t_i = 1 / (phi (N - i + 1)), first 15 errors"""
    return FailureLog.from_intervals([20.0 / (21 - i) for i in range(1, 16)])
