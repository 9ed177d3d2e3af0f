import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from socialnav.config import CovarianceGrowth, SensorConfig
from socialnav.models.state import PedestrianState, RobotState
from socialnav.services.perception import (
    covariance_growth,
    ghost_update,
    growth_covariances,
    predict_cv,
    predict_track,
    sense,
)
from socialnav.utils.exceptions import ConfigurationError


def ped(x, y, vx=0.0, vy=0.0, id=0):
    return PedestrianState(position=(x, y), velocity=(vx, vy), id=id)


class TestSense:
    def test_range_limit(self, sensor):
        robot = RobotState(0, 0, 0)
        visible = sense(robot, [ped(1, 0, id=0), ped(6, 0, id=1), ped(0, 4.9, id=2)], sensor)
        assert [p.id for p in visible] == [0, 2]

    def test_field_of_view(self):
        robot = RobotState(0, 0, 0)
        front = SensorConfig(vis_angle=math.pi)
        visible = sense(robot, [ped(-1, 0, id=0), ped(1, 0.5, id=1), ped(0.1, -1, id=2)], front)
        assert [p.id for p in visible] == [1, 2]

    def test_preserves_input_order(self, sensor):
        peds = [ped(1, 0, id=5), ped(0, 1, id=2), ped(-1, 0, id=9)]
        assert [p.id for p in sense(RobotState(0, 0, 0), peds, sensor)] == [5, 2, 9]


class TestPredictCv:
    def test_constant_velocity(self):
        means = predict_cv(ped(1, 1, -1, 2), 25, 0.1)
        assert means.shape == (25, 2)
        np.testing.assert_allclose(means[0], (0.9, 1.2))
        np.testing.assert_allclose(means[-1], (-1.5, 6.0))

    def test_static_pedestrian(self):
        np.testing.assert_allclose(predict_cv(ped(2, 3), 5, 0.1), np.tile((2, 3), (5, 1)))


class TestCovarianceGrowth:
    def test_no_growth(self):
        cov = covariance_growth(ped(0, 0, 1, 0), 10, 0.1, CovarianceGrowth(sigma0=0.1, alpha_long=0, alpha_lat=0))
        assert (cov.sxx, cov.sxy, cov.syy) == pytest.approx((0.01, 0.0, 0.01))

    def test_aligned_with_velocity(self):
        params = CovarianceGrowth(sigma0=0.1, alpha_long=0.5, alpha_lat=0.1)
        cov = covariance_growth(ped(0, 0, 1, 0), 10, 0.1, params)
        assert (cov.sxx, cov.sxy, cov.syy) == pytest.approx((0.36, 0.0, 0.04))

    def test_rotates_with_velocity(self):
        params = CovarianceGrowth(sigma0=0.1, alpha_long=0.5, alpha_lat=0.1)
        cov = covariance_growth(ped(0, 0, 0, 1), 10, 0.1, params)
        assert cov.sxx == pytest.approx(0.04)
        assert cov.syy == pytest.approx(0.36)
        assert cov.sxy == pytest.approx(0.0, abs=1e-12)

    def test_slow_pedestrian_uses_world_axes(self):
        params = CovarianceGrowth(sigma0=0.1, alpha_long=0.5, alpha_lat=0.1)
        cov = covariance_growth(ped(0, 0, 0.001, 0.004), 10, 0.1, params)
        assert (cov.sxx, cov.sxy, cov.syy) == pytest.approx((0.36, 0.0, 0.04))

    def test_non_positive_sigma0(self):
        with pytest.raises(ConfigurationError):
            covariance_growth(ped(0, 0, 1, 0), 1, 0.1, CovarianceGrowth(sigma0=0.0))

    def test_step_index_starts_at_one(self, growth):
        with pytest.raises(ConfigurationError):
            covariance_growth(ped(0, 0, 1, 0), 0, 0.1, growth)

    def test_batch_matches_single(self, growth):
        p = ped(0, 0, 0.6, -0.8)
        covs = growth_covariances(p, 25, 0.1, growth)
        for k in (1, 7, 25):
            np.testing.assert_allclose(covs[k - 1], covariance_growth(p, k, 0.1, growth).as_matrix())

    @given(
        st.floats(-3, 3), st.floats(-3, 3),
        st.floats(0.01, 1.0), st.floats(0, 2), st.floats(0, 2),
        st.integers(1, 10_000),
    )
    def test_always_positive_definite(self, vx, vy, sigma0, alpha_long, alpha_lat, k):
        params = CovarianceGrowth(sigma0=sigma0, alpha_long=alpha_long, alpha_lat=alpha_lat)
        cov = covariance_growth(ped(0, 0, vx, vy), k, 0.1, params)
        assert cov.sxx > 0
        assert cov.det > 0
        assert cov.is_positive_definite()

    def test_two_sigma_coverage(self, growth):
        # fração de amostras gaussianas com d_MD <= 2 é 1 - exp(-2)
        cov = covariance_growth(ped(0, 0, 1.2, 0.4), 8, 0.1, growth).as_matrix()
        rng = np.random.default_rng(11)
        samples = rng.multivariate_normal(np.zeros(2), cov, size=100_000)
        d2 = np.einsum("ni,ij,nj->n", samples, np.linalg.inv(cov), samples)
        assert np.mean(d2 <= 4.0) == pytest.approx(1 - math.exp(-2), abs=0.02)


class TestGhostUpdate:
    H = 25
    H_GHOST = 20

    def update(self, tracks, visible, growth):
        return ghost_update(tracks, visible, self.H, self.H_GHOST, 0.1, growth)

    def test_visible_tracks_are_fresh(self, growth):
        tracks = self.update([], [ped(1, 0, 1, 0, id=3), ped(0, 1, id=1)], growth)
        assert [t.ped_id for t in tracks] == [1, 3]
        assert not any(t.is_ghost for t in tracks)
        np.testing.assert_allclose(tracks[1].means, predict_cv(ped(1, 0, 1, 0, id=3), self.H, 0.1))

    def test_never_seen_has_no_track(self, growth):
        assert self.update([], [], growth) == []

    def test_ghost_shifts_and_repeats_last(self, growth):
        original = predict_track(ped(0, 0, 1, 0, id=4), self.H, 0.1, growth)
        (ghost,) = self.update([original], [], growth)
        assert ghost.ghost_age == 1
        assert ghost.is_ghost
        assert ghost.covariances[-1] == original.covariances[-1]
        np.testing.assert_allclose(ghost.means[:-1], original.means[1:])
        np.testing.assert_allclose(ghost.means[-1], original.means[-1])
        np.testing.assert_allclose(ghost.covs[-1], original.covs[-1])

    def test_ghost_retention_window(self, growth):
        tracks = self.update([], [ped(0, 0, 1, 0, id=0)], growth)
        for age in range(1, self.H_GHOST + 1):
            tracks = self.update(tracks, [], growth)
            assert len(tracks) == 1
            assert tracks[0].ghost_age == age
        assert self.update(tracks, [], growth) == []

    def test_reobserved_ghost_resets(self, growth):
        tracks = self.update([], [ped(0, 0, 1, 0, id=0)], growth)
        for _ in range(5):
            tracks = self.update(tracks, [], growth)
        tracks = self.update(tracks, [ped(2, 0, 1, 0, id=0)], growth)
        assert tracks[0].ghost_age == 0
        np.testing.assert_allclose(tracks[0].means[0], (2.1, 0.0))

    def test_ghost_uncertainty_never_shrinks(self, growth):
        tracks = self.update([], [ped(0, 0, 1, 0, id=0)], growth)
        traces = [np.trace(tracks[0].covs[0])]
        for _ in range(self.H_GHOST):
            tracks = self.update(tracks, [], growth)
            traces.append(np.trace(tracks[0].covs[0]))
        assert all(b >= a for a, b in zip(traces, traces[1:]))

    def test_negative_ghost_horizon(self, growth):
        with pytest.raises(ConfigurationError):
            ghost_update([], [], self.H, -1, 0.1, growth)
