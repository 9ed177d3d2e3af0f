import dataclasses

import numpy as np
import pytest

from socialnav.config import BenchConfig
from socialnav.models.state import RobotState
from socialnav.services.controllers import (
    ConstraintKind,
    CostComponent,
    build_custom,
    build_named,
    known_controller_names,
    list_benchmark_controllers,
)
from socialnav.services.nmpc import transcribe
from socialnav.services.socialcost import Weights
from socialnav.utils.exceptions import ConfigurationError, UnknownControllerError
from tests.helpers import static_track

BENCHMARK_ORDER = [
    "ED-MPC", "ED-MPC-EDC", "ED-MPC-MDC", "MD-MPC-MDC", "MD-MPC-EDC",
    "ED-MPC-AEDC", "MD-MPC-AEDC", "MPC-AEDC", "MPC-AMDC",
    "MPC-ELC-2", "MPC-ELC-3", "MPC-AELC-2", "MPC-AELC-3",
]


def test_catalog_order():
    assert list_benchmark_controllers() == BENCHMARK_ORDER


def test_extra_controllers_are_buildable():
    assert set(known_controller_names()) == set(BENCHMARK_ORDER) | {"MPC", "MD-MPC", "MPC-EDC"}
    assert not build_named("MD-MPC").benchmark
    assert not build_named("MPC-EDC").benchmark
    assert build_named("MPC").constraint is ConstraintKind.NONE


@pytest.mark.parametrize("name", BENCHMARK_ORDER)
def test_name_round_trip(name):
    spec = build_named(name)
    assert spec.name == name
    assert spec.benchmark


@pytest.mark.parametrize(
    "name, cost, constraint, gamma",
    [
        ("ED-MPC", CostComponent.EUCLIDEAN, ConstraintKind.NONE, None),
        ("MD-MPC-EDC", CostComponent.MAHALANOBIS, ConstraintKind.EDC, None),
        ("MPC-AMDC", CostComponent.NONE, ConstraintKind.AMDC, None),
        ("MPC-ELC-3", CostComponent.NONE, ConstraintKind.ELC, 3.0),
        ("MPC-AELC-2", CostComponent.NONE, ConstraintKind.AELC, 2.0),
    ],
)
def test_table_rows(name, cost, constraint, gamma):
    spec = build_named(name)
    assert (spec.cost_component, spec.constraint, spec.gamma) == (cost, constraint, gamma)


@pytest.mark.parametrize("name", BENCHMARK_ORDER)
def test_position_weight_follows_cost_component(name):
    spec = build_named(name)
    expected = 100.0 if spec.cost_component is CostComponent.EUCLIDEAN else 1000.0
    assert spec.weights.q_r == expected


@pytest.mark.parametrize("name", BENCHMARK_ORDER)
def test_adaptive_uses_augmented_cost(name):
    spec = build_named(name)
    assert spec.uses_augmented_cost == spec.is_adaptive
    assert (spec.delta_bounds() is not None) == spec.is_adaptive


def test_unknown_name_lists_valid_names():
    with pytest.raises(UnknownControllerError) as exc:
        build_named("MPC-XYZ")
    assert exc.value.name == "MPC-XYZ"
    assert "MPC-AELC-3" in exc.value.valid_names
    assert isinstance(exc.value, ConfigurationError)


def test_custom_combination():
    spec = build_custom(CostComponent.MAHALANOBIS, ConstraintKind.AELC, gamma=2.0)
    assert not spec.benchmark
    assert spec.name == "custom-mahalanobis-aelc-2"
    assert spec.weights.q_r == 1000.0
    assert spec.delta_bounds() == (0.0, 0.5)


def test_elliptic_requires_gamma():
    with pytest.raises(ConfigurationError):
        build_custom(CostComponent.NONE, ConstraintKind.ELC)


def test_weights_come_from_config():
    config = BenchConfig().with_overrides(weights={"q_ed": 250.0, "q_r_euclidean": 50.0})
    spec = build_named("ED-MPC-EDC", config)
    assert spec.weights.q_ed == 250.0
    assert spec.weights.q_r == 50.0


def test_mahalanobis_cost_matches_euclidean_with_identity_covariance():
    config = BenchConfig()
    shared = Weights(
        q_u=np.eye(2), q_ubar=np.diag([0.005, 0.005, 1e5]), q_r=1000.0, q_ed=500.0, q_md=500.0,
    )
    ed = dataclasses.replace(build_named("ED-MPC", config), weights=shared)
    md = dataclasses.replace(build_named("MD-MPC", config), weights=shared)
    tracks = [static_track(0, (1.5, 0.4), variance=1.0), static_track(1, (2.5, -0.8), variance=1.0)]
    state = RobotState(0, 0, 0.2)
    ed_problem = transcribe(ed, state, tracks, (4, 0), config)
    md_problem = transcribe(md, state, tracks, (4, 0), config)

    rng = np.random.default_rng(1)
    for _ in range(20):
        z = np.column_stack((rng.uniform(0, 2, 25), rng.uniform(-2, 2, 25))).ravel()
        ed_value, ed_grad = ed_problem.objective(z)
        md_value, md_grad = md_problem.objective(z)
        assert md_value == pytest.approx(ed_value, rel=1e-12)
        np.testing.assert_allclose(md_grad, ed_grad, rtol=1e-9, atol=1e-9)
