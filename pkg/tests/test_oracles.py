import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catchup.geometry import Ball, Box, Sublevel, affine_fn, ball_fn, max_fn, residual
from catchup.oracles import (
    ProjectorConfig,
    approx_project,
    cutting_plane_project,
    frank_wolfe_project,
    lmo_ball,
    lmo_box,
    separation_oracle,
    feasibility_tolerance,
)

UNIT_BALL = Ball([0.0, 0.0], 1.0)
DISK = Sublevel(ball_fn([0.0, 0.0], 1.0), 0.0, slater=[0.0, 0.0])


class TestLinearMinimizationOracles:
    def test_ball_points_against_direction(self):
        s = lmo_ball(UNIT_BALL.center, UNIT_BALL.radius)(np.array([1.0, 0.0]))
        assert np.allclose(s, [-1.0, 0.0])

    def test_ball_zero_direction_returns_center(self):
        assert np.allclose(lmo_ball(UNIT_BALL.center, UNIT_BALL.radius)(np.zeros(2)), UNIT_BALL.center)

    def test_box_vertex(self):
        box = Box([0.0, 0.0], [2.0, 3.0])
        s = lmo_box(box.lo, box.hi)(np.array([-1.0, 1.0]))
        assert np.allclose(s, [2.0, 0.0])

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=2))
    @settings(max_examples=100, deadline=None)
    def test_lmo_optimality_on_ball(self, d):
        d = np.asarray(d, float)
        s = lmo_ball(UNIT_BALL.center, UNIT_BALL.radius)(d)
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.normal(size=2)
            v = UNIT_BALL.center + UNIT_BALL.radius * v / np.linalg.norm(v)
            assert float(np.dot(d, s)) <= float(np.dot(d, v)) + 1e-9


class TestFrankWolfe:
    def test_exterior_point_on_ball(self):
        cfg = ProjectorConfig(eps=1e-10)
        res = frank_wolfe_project(lmo_ball(UNIT_BALL.center, UNIT_BALL.radius),
                                  np.array([2.0, 0.0]), cfg)
        assert res.converged
        assert np.linalg.norm(res.point - [1.0, 0.0]) <= 1e-5
        assert res.certified_eps <= 1e-10

    def test_certificate_sound_against_true_value(self):
        # certified_eps bounds ||x-z||^2 - d(x)^2 from above
        rng = np.random.default_rng(3)
        cfg = ProjectorConfig(eps=1e-8)
        for _ in range(25):
            x = rng.uniform(-3, 3, size=2)
            res = frank_wolfe_project(lmo_ball(UNIT_BALL.center, UNIT_BALL.radius), x, cfg)
            d_true = max(np.linalg.norm(x - UNIT_BALL.center) - UNIT_BALL.radius, 0.0)
            gap = float(np.dot(x - res.point, x - res.point)) - d_true * d_true
            assert gap <= res.certified_eps + 1e-12

    def test_result_is_feasible(self):
        cfg = ProjectorConfig(eps=1e-8)
        res = frank_wolfe_project(lmo_ball(UNIT_BALL.center, UNIT_BALL.radius),
                                  np.array([5.0, -4.0]), cfg)
        assert residual(UNIT_BALL, res.point) <= feasibility_tolerance(UNIT_BALL)

    def test_iteration_cap_reported(self):
        cfg = ProjectorConfig(eps=1e-16, max_iter=2)
        res = frank_wolfe_project(lmo_ball(UNIT_BALL.center, UNIT_BALL.radius),
                                  np.array([2.0, 1.0]), cfg)
        assert not res.converged
        assert res.iterations == 2


class TestSeparationOracle:
    def test_member_returns_none(self):
        assert separation_oracle(DISK, np.array([0.3, 0.4])) is None

    def test_cut_values_for_disk(self):
        # g(x) = x1^2 + x2^2 - 1 at x = (0, 2): g = 3, g' = (0, 4)
        # cut: <g', y> <= <g', x> - g(x)  =>  4 y2 <= 8 - 3 = 5
        h = separation_oracle(DISK, np.array([0.0, 2.0]))
        assert h is not None
        assert np.allclose(h.normal, [0.0, 4.0])
        assert h.offset == pytest.approx(5.0)

    def test_cut_separates(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = rng.uniform(-3, 3, size=2)
            h = separation_oracle(DISK, x)
            if h is None:
                assert residual(DISK, x) <= feasibility_tolerance(DISK)
                continue
            # x violates its own cut; every member satisfies it
            assert float(np.dot(h.normal, x)) > h.offset
            for _ in range(10):
                v = rng.normal(size=2)
                v = v / max(np.linalg.norm(v), 1.0)
                assert float(np.dot(h.normal, v)) <= h.offset + 1e-9


class TestCuttingPlane:
    def test_disk_exterior_point(self):
        cfg = ProjectorConfig(eps=1e-8)
        res = cutting_plane_project(DISK, np.array([0.0, 2.0]), cfg)
        assert res.converged
        assert res.certified_eps <= 1e-8
        assert np.linalg.norm(res.point - [0.0, 1.0]) <= 1e-4
        assert residual(DISK, res.point) <= feasibility_tolerance(DISK)

    def test_box_as_sublevel_of_piecewise_affine(self):
        fns = [affine_fn([1.0, 0.0], 1.0), affine_fn([-1.0, 0.0], 1.0),
               affine_fn([0.0, 1.0], 1.0), affine_fn([0.0, -1.0], 1.0)]
        square = Sublevel(max_fn(fns), 0.0, slater=[0.0, 0.0])
        cfg = ProjectorConfig(eps=1e-10)
        res = cutting_plane_project(square, np.array([3.0, 0.0]), cfg)
        assert res.converged
        assert np.linalg.norm(res.point - [1.0, 0.0]) <= 1e-5

    def test_certificate_upper_bounds_excess(self):
        rng = np.random.default_rng(11)
        cfg = ProjectorConfig(eps=1e-6)
        for _ in range(30):
            x = rng.uniform(-3, 3, size=2)
            res = cutting_plane_project(DISK, x, cfg)
            d_true = max(np.linalg.norm(x) - 1.0, 0.0)
            gap = float(np.dot(x - res.point, x - res.point)) - d_true * d_true
            assert gap <= res.certified_eps + 1e-10

    def test_member_short_circuit(self):
        cfg = ProjectorConfig(eps=1e-8)
        x = np.array([0.1, -0.2])
        res = approx_project(DISK, x, cfg)
        assert np.array_equal(res.point, x)
        assert res.certified_eps == 0.0
        assert res.iterations == 0


class TestApproxProject:
    def test_auto_routes_closed_form(self):
        res = approx_project(UNIT_BALL, np.array([2.0, 0.0]), ProjectorConfig(eps=1e-8))
        assert np.allclose(res.point, [1.0, 0.0])
        assert res.certified_eps == 0.0

    def test_auto_routes_sublevel(self):
        res = approx_project(DISK, np.array([0.0, 2.0]), ProjectorConfig(eps=1e-8))
        assert res.certified_eps <= 1e-8
        assert np.linalg.norm(res.point - [0.0, 1.0]) <= 1e-4

    def test_fw_method_on_ball(self):
        res = approx_project(UNIT_BALL, np.array([2.0, 0.0]), ProjectorConfig(eps=1e-8, method="fw"))
        assert res.certified_eps <= 1e-8
        assert residual(UNIT_BALL, res.point) <= feasibility_tolerance(UNIT_BALL)

    def test_shrinking_eps_realizes_exact_projection(self):
        # with eps_n = 4^-n and x_n = x + 4^-n u, the approximate projections
        # converge to the exact projection of x
        x = np.array([0.0, 2.0])
        u = np.array([1.0, 0.0])
        dists = []
        for n in range(1, 17):
            eps = 4.0 ** (-n)
            res = approx_project(DISK, x + eps * u, ProjectorConfig(eps=eps))
            dists.append(np.linalg.norm(res.point - [0.0, 1.0]))
        for n in range(5, len(dists)):
            assert dists[n] <= dists[n - 5] + 1e-12
        assert dists[-1] <= 1e-4
