"""Damped Newton solver on systems with known roots and known failure modes."""

import numpy as np
import pytest

import claimstreams as cs
from claimstreams.solver import ascend_potential


class TestSolveSystem:
    def test_linear_shift_one_iteration(self):
        target = np.array([2.0, -1.5, 0.25])
        report = cs.solve_system(lambda x: x - target, np.zeros(3))
        assert report.converged
        # one Newton step plus the pass that certifies the residual
        assert report.iterations <= 2
        np.testing.assert_allclose(report.root, target, atol=1e-12)

    def test_scalar_quadratic(self):
        report = cs.solve_system(lambda x: x * x - 4.0, np.array([3.0]))
        assert report.converged
        assert abs(report.root[0] - 2.0) < 1e-10

    def test_converged_implies_residual_bound(self):
        opts = cs.SolveOptions(residual_tol=1e-10)
        report = cs.solve_system(lambda x: np.array([np.sin(x[0]) - 0.3]), np.array([0.0]), opts)
        assert report.converged
        residual = np.linalg.norm(np.sin(report.root) - 0.3)
        assert residual <= opts.residual_tol

    def test_linear_3x3_matches_direct_elimination(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
        b = rng.normal(size=3)
        report = cs.solve_system(lambda x: a @ x - b, np.zeros(3))
        assert report.converged
        np.testing.assert_allclose(report.root, np.linalg.solve(a, b), atol=1e-10)

    def test_max_iters_returns_flagged_report(self):
        report = cs.solve_system(
            lambda x: x * x - 4.0, np.array([300.0]), cs.SolveOptions(max_iters=2)
        )
        assert not report.converged
        assert report.iterations == 2

    def test_rootless_system_raises(self):
        # x^2 + 1 has no real root; the line search must exhaust damping.
        with pytest.raises(cs.SolverError):
            cs.solve_system(lambda x: x * x + 1.0, np.array([0.5]), cs.SolveOptions(max_iters=500))

    def test_non_finite_residual_raises(self):
        with pytest.raises(cs.SolverError):
            cs.solve_system(lambda x: np.array([np.nan]), np.array([1.0]))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(cs.SolverError):
            cs.solve_system(lambda x: np.array([x[0], x[0]]), np.array([1.0]))

    def test_frequency_stationarity_system_at_scale(self):
        # The three-equation M-step system at a realistic data scale has a
        # root; plugging it back in must leave essentially no residual.
        from claimstreams.freq_em import _m_step_residuals

        ref = cs.FreqParams(97.55820446, 30.14706672, 0.01978072, 0.5929959)
        sample = cs.CountSample(cs.sample_counts(ref, 180, seed=12))
        tau = cs.e_step_freq(ref, sample)
        residuals = _m_step_residuals(sample, tau)
        report = cs.solve_system(residuals, np.log([ref.alpha1, ref.alpha2, ref.beta]))
        assert report.converged
        assert np.linalg.norm(residuals(report.root)) <= 1e-8


class TestSolveOptions:
    def test_defaults(self):
        opts = cs.SolveOptions()
        assert opts.residual_tol == 1e-10
        assert opts.max_iters == 200

    def test_validation(self):
        with pytest.raises(ValueError):
            cs.SolveOptions(residual_tol=0.0)
        with pytest.raises(ValueError):
            cs.SolveOptions(max_iters=0)


class TestAscendPotential:
    def test_finds_quadratic_maximum(self):
        center = np.array([1.0, -2.0])

        def phi(x):
            d = x - center
            return -float(d @ d)

        def grad(x):
            return -2.0 * (x - center)

        x, gnorm, improved = ascend_potential(phi, grad, np.zeros(2))
        assert improved
        np.testing.assert_allclose(x, center, atol=1e-8)
        assert gnorm <= 1e-7

    def test_no_step_from_stationary_point(self):
        x, _, improved = ascend_potential(
            lambda x: -float(x @ x), lambda x: -2.0 * x, np.zeros(2)
        )
        assert not improved
        np.testing.assert_array_equal(x, np.zeros(2))

    def test_non_finite_start_raises(self):
        with pytest.raises(cs.SolverError):
            ascend_potential(lambda x: float("nan"), lambda x: x, np.array([1.0]))
