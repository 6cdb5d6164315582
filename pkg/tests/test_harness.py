import numpy as np
import pytest

from catchup.geometry import Ball
from catchup.harness import (
    CATALOG,
    UnknownProblem,
    fine_grid_reference,
    make_problem,
    rate_study,
    reference_solution,
    self_consistency_gate,
    stability_study,
    sup_error,
)
from catchup.solver import solve


class TestCatalog:
    def test_all_problems_construct_and_validate(self):
        for pid in CATALOG:
            prob = make_problem(pid)
            assert prob.horizon > 0.0

    def test_unknown_problem(self):
        with pytest.raises(UnknownProblem):
            make_problem("does_not_exist")
        with pytest.raises(UnknownProblem):
            reference_solution("does_not_exist", 0.0)

    def test_reference_values(self):
        assert np.allclose(reference_solution("dragging_interval", 0.7), [0.7])
        assert np.allclose(reference_solution("translating_halfspace", 0.3), [0.3, 0.0])
        assert np.allclose(reference_solution("interior_ode", 0.0), [1.0, 0.0])
        assert np.allclose(reference_solution("translating_disk", 1.0), [0.0, 0.0])

    def test_references_stay_feasible(self):
        from catchup.geometry import residual
        from catchup.oracles import feasibility_tolerance
        for pid in CATALOG:
            prob = make_problem(pid)
            for t in np.linspace(0.0, prob.horizon, 9):
                s = prob.moving_set.at(float(t))
                assert residual(s, reference_solution(pid, float(t))) \
                    <= feasibility_tolerance(s)


class TestSupError:
    def test_zero_against_self(self):
        traj = solve(make_problem("dragging_interval"), 16)
        assert sup_error(traj, traj, grid_size=50) == 0.0

    def test_against_closed_form(self):
        traj = solve(make_problem("dragging_interval"), 16)
        err = sup_error(traj, lambda t: reference_solution("dragging_interval", t),
                        grid_size=100)
        assert err <= 1e-12

    def test_fine_grid_reference_usable(self):
        coarse = solve(make_problem("interior_ode"), 16)
        ref = fine_grid_reference("interior_ode", 256)
        err = sup_error(coarse, ref, grid_size=50)
        assert 0.0 < err < 0.1


class TestRateStudy:
    def test_halfspace_small_ladder(self):
        rs = rate_study("translating_halfspace", [8, 16, 32], grid_size=100)
        assert len(rs.errors) == 3
        # exact projections track the closed form to rounding error
        assert max(rs.errors) <= 1e-10

    def test_disk_errors_shrink(self):
        rs = rate_study("translating_disk", [16, 32, 64], grid_size=100)
        assert rs.errors[-1] < rs.errors[0]
        assert rs.slope > 0.25

    def test_ladder_validation(self):
        with pytest.raises(ValueError):
            rate_study("dragging_interval", [16, 16])
        with pytest.raises(ValueError):
            rate_study("dragging_interval", [])

    def test_serialization(self):
        rs = rate_study("translating_halfspace", [8, 16], grid_size=50)
        assert rs.to_csv().startswith("n,mu,eps_n,sup_error\n")
        assert '"strictly_decreasing"' in rs.to_json()


class TestStabilityStudy:
    def test_radial_approach_converges(self):
        ball = Ball([0.0, 0.0], 1.0)
        x = np.array([2.0, 0.0])
        u = np.array([1.0, 0.0])
        ns = range(1, 101)
        pts = [x + (1.0 / n) * u for n in ns]
        eps = [1.0 / n**2 for n in ns]
        study = stability_study(ball, x, pts, eps, method="fw")
        assert study.final_gap <= 1e-2
        assert study.monotone_within(factor=2.0)

    def test_requires_convergence_when_eps_fixed_small(self):
        ball = Ball([0.0, 0.0], 1.0)
        x = np.array([0.0, 3.0])
        pts = [x] * 5
        study = stability_study(ball, x, pts, [1e-10] * 5)
        assert study.final_gap <= 1e-5


class TestSelfConsistency:
    def test_gate_passes_dragging(self):
        ok, err = self_consistency_gate("dragging_interval", n_ref=256)
        assert ok and err <= 1e-10

    def test_gate_passes_interior(self):
        ok, _ = self_consistency_gate("interior_ode", n_ref=512)
        assert ok
