"""Rank-1 quadratic-eigenvalue route: candidates, certificates, polish.

The independent oracle recomputes both stationarity residuals directly
from each candidate's stored (u, v, omega) triple and cross-checks the
recovered (y, s) against u/||u|| and sqrt(||u||/||v||).
"""

import numpy as np
import pytest

from conftest import exact_fit_instance, rng_for, uniform_instance
from psdtls.errors import SingularAError
from psdtls.newton import SolverConfig, solve_rank_r
from psdtls.objective import ProblemInstance, reduce_instance
from psdtls.qep import rank1_candidates, solve_rank1_qep


def stationarity_residuals(red, cand):
    """Both first-order conditions, recomputed from scratch."""
    n = red.A.shape[0]
    M = red.C + cand.omega * np.eye(n)
    r1 = 2.0 * red.B @ cand.v - M @ cand.u
    r2 = 2.0 * red.A @ cand.u - M @ cand.v
    scale1 = 2.0 * np.linalg.norm(red.B @ cand.v) + np.linalg.norm(M @ cand.u)
    scale2 = 2.0 * np.linalg.norm(red.A @ cand.u) + np.linalg.norm(M @ cand.v)
    return (
        np.linalg.norm(r1) / max(scale1, 1e-300),
        np.linalg.norm(r2) / max(scale2, 1e-300),
    )


class TestCandidates:
    def test_scalar_identity_instance(self):
        inst = ProblemInstance(D=np.array([[1.0]]), T=np.array([[1.0]]))
        cands = rank1_candidates(reduce_instance(inst))
        best = min(cands, key=lambda c: (c.E, abs(c.omega)))
        assert best.E == pytest.approx(0.0, abs=1e-12)
        assert best.s == pytest.approx(1.0, abs=1e-10)
        assert best.y[0] == pytest.approx(1.0, abs=1e-10)
        assert best.omega == pytest.approx(0.0, abs=1e-10)

    def test_certificates_on_every_candidate(self):
        for key in (200, 201, 202, 203):
            red = reduce_instance(uniform_instance(key=key, m=20, n=5))
            for cand in rank1_candidates(red):
                res1, res2 = stationarity_residuals(red, cand)
                assert res1 <= 1e-7
                assert res2 <= 1e-7

    def test_recovery_identities(self):
        red = reduce_instance(uniform_instance(key=210, m=20, n=5))
        for cand in rank1_candidates(red):
            # Normalization u'v = 1.
            assert float(cand.u @ cand.v) == pytest.approx(1.0, abs=1e-8)
            # s and y recovered from (u, v).
            nu, nv = np.linalg.norm(cand.u), np.linalg.norm(cand.v)
            assert cand.s == pytest.approx(np.sqrt(nu / nv), rel=1e-10)
            y_ref = cand.u / nu
            pivot = int(np.argmax(np.abs(y_ref)))
            if y_ref[pivot] < 0.0:
                y_ref = -y_ref
            assert np.allclose(cand.y, y_ref, atol=1e-10)
            # Unit vector with positive pivot entry.
            assert np.linalg.norm(cand.y) == pytest.approx(1.0, abs=1e-12)
            assert cand.y[int(np.argmax(np.abs(cand.y)))] > 0.0

    def test_candidate_E_matches_objective(self):
        red = reduce_instance(uniform_instance(key=211, m=20, n=5))
        for cand in rank1_candidates(red):
            y = cand.y
            a = float(y @ red.A @ y)
            b = float(y @ red.B @ y)
            c = float(y @ red.C @ y)
            E_ref = a * cand.s**2 - c + b / cand.s**2
            assert cand.E == pytest.approx(E_ref, rel=1e-10, abs=1e-12)

    def test_singular_A_detected(self):
        D = np.zeros((6, 3))
        D[:, :2] = rng_for(212).standard_normal((6, 2))  # rank-deficient
        T = rng_for(213).standard_normal((6, 3))
        with pytest.raises(SingularAError):
            rank1_candidates(reduce_instance(ProblemInstance(D=D, T=T)))


class TestSolveRank1Qep:
    def test_exact_rank1_target(self):
        gen = rng_for(220)
        D = gen.standard_normal((15, 4))
        q = gen.standard_normal(4)
        q /= np.linalg.norm(q)
        X = 2.25 * np.outer(q, q)
        inst = ProblemInstance(D=D, T=D @ X)
        sol = solve_rank1_qep(inst)
        assert sol.E <= 1e-8
        assert np.linalg.norm(sol.X - X) <= 1e-6 * np.linalg.norm(X)
        assert sol.backend_used == "qep"
        # Rank-1 PSD by construction.
        w = np.linalg.eigvalsh(sol.X)
        assert w[-1] >= 0.0 and abs(w[:-1]).max() <= 1e-10 * max(w[-1], 1.0)

    def test_polish_never_loses_to_raw_or_newton(self):
        for key in (230, 231, 232, 233, 234):
            inst = uniform_instance(key=key, m=20, n=5)
            polished = solve_rank1_qep(inst)
            raw = solve_rank1_qep(inst, polish=False)
            newton = solve_rank_r(inst, 1, SolverConfig())
            tol = 1e-9 * (1.0 + abs(polished.E))
            assert polished.E <= raw.E + tol
            assert polished.E <= newton.E + tol

    def test_raw_mode_returns_zero_iteration_solution(self):
        inst = uniform_instance(key=240, m=18, n=4)
        raw = solve_rank1_qep(inst, polish=False)
        assert raw.newton_iters == 0
        assert raw.backend_used == "qep"
        assert raw.factors.r == 1
        assert raw.orth_residual <= 1e-12

    def test_accepts_reduced_problem(self):
        inst = uniform_instance(key=241, m=18, n=4)
        red = reduce_instance(inst)
        a = solve_rank1_qep(inst)
        b = solve_rank1_qep(red)
        assert a.E == pytest.approx(b.E, rel=1e-12, abs=1e-15)

    def test_deterministic(self):
        inst = uniform_instance(key=242, m=16, n=4)
        a = solve_rank1_qep(inst)
        b = solve_rank1_qep(inst)
        assert np.array_equal(a.X, b.X)
