"""
Fixtures compartilhadas pelos testes.
"""

import pytest

from socialnav.config import BenchConfig, CovarianceGrowth, SafetyGeometry, SensorConfig


@pytest.fixture(autouse=True)
def _no_bench_seed(monkeypatch):
    monkeypatch.delenv("BENCH_SEED", raising=False)


@pytest.fixture
def config() -> BenchConfig:
    return BenchConfig()


@pytest.fixture
def geometry() -> SafetyGeometry:
    return SafetyGeometry()


@pytest.fixture
def growth() -> CovarianceGrowth:
    return CovarianceGrowth()


@pytest.fixture
def sensor() -> SensorConfig:
    return SensorConfig()
