"""Riccati/Lyapunov solvers and norm computations against closed-form values."""

from types import SimpleNamespace

import numpy as np
import pytest
import scipy.linalg

from rlct import (
    SolverError,
    StructuredRealization,
    build_lct,
    h2_norm,
    hinf_norm,
    hinf_solvable,
    solve_care,
    solve_lyapunov,
)
from rlct.riccati import check_regularity, hinf_riccatis


def _sys(A, B, C, D):
    return StructuredRealization(A, B, C, D)


def _embed(A, B, C):
    """Wrap (A, B, C) as the standard generalized plant used by the
    closed-form synthesis results (disturbance at the input, noise at the
    output, penalties on y and u)."""
    A = np.atleast_2d(np.asarray(A, float))
    B = np.atleast_2d(np.asarray(B, float))
    C = np.atleast_2d(np.asarray(C, float))
    n, m = B.shape
    p = C.shape[0]
    return SimpleNamespace(
        A=A,
        B1=np.hstack([B, np.zeros((n, p))]),
        B2=B,
        C1=np.vstack([C, np.zeros((m, n))]),
        C2=C,
        D11=np.zeros((p + m, m + p)),
        D12=np.vstack([np.zeros((p, m)), np.eye(m)]),
        D21=np.hstack([np.zeros((p, m)), np.eye(p)]),
        D22=np.zeros((p, p)),
    )


# ---------------------------------------------------------------------------
# solve_care


def test_care_scalar_unit():
    sol = solve_care(0.0, 1.0, 1.0, 1.0)
    assert abs(sol.X[0, 0] - 1.0) < 1e-12, f"X = {sol.X}"
    assert sol.residual < 1e-12
    assert abs(sol.closed_loop_abscissa + 1.0) < 1e-10


def test_care_scalar_unstable_plant():
    # A = 1, B = 1, Q = 0, R = 1: X = 2 stabilizes even though Q = 0.
    sol = solve_care(1.0, 1.0, 0.0, 1.0)
    assert abs(sol.X[0, 0] - 2.0) < 1e-12, f"X = {sol.X}"
    assert abs(sol.closed_loop_abscissa + 1.0) < 1e-10


def test_care_lossless_identity_solution():
    rng = np.random.default_rng(7)
    for _ in range(10):
        k, j, m1 = 3, 2, 2
        real = build_lct(
            rng.normal(size=(k, j)),
            rng.normal(size=(k, m1)),
            rng.normal(size=(j, 0)),
        )
        sol = solve_care(real.A, real.B, real.B @ real.B.T, np.eye(real.m))
        assert np.linalg.norm(sol.X - np.eye(real.n)) < 1e-10, (
            f"X deviates from identity by "
            f"{np.linalg.norm(sol.X - np.eye(real.n)):.3e}"
        )
        assert sol.residual < 1e-12
        assert sol.closed_loop_abscissa < 0


def test_care_matches_scipy_on_seeded_systems():
    rng = np.random.default_rng(21)
    for trial in range(15):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 3))
        A = rng.normal(size=(n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + 1.0) * np.eye(n)
        B = rng.normal(size=(n, m))
        Cq = rng.normal(size=(n, n))
        Q = Cq.T @ Cq
        R = np.eye(m)
        sol = solve_care(A, B, Q, R)
        ref = scipy.linalg.solve_continuous_are(A, B, Q, R)
        diff = np.linalg.norm(sol.X - ref) / (1.0 + np.linalg.norm(ref))
        assert diff < 1e-8, f"trial {trial}: disagreement {diff:.3e}"
        assert sol.residual < 1e-9 * (1 + np.linalg.norm(sol.X, "fro")) ** 2
        assert sol.closed_loop_abscissa < 0


def test_care_rejects_imaginary_axis_hamiltonian():
    # Undamped oscillator with no actuation or weighting: eigenvalues +-1j.
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(SolverError):
        solve_care(A, np.zeros((2, 1)), np.zeros((2, 2)), np.eye(1))


def test_care_rejects_indefinite_r():
    with pytest.raises(SolverError):
        solve_care(-1.0, 1.0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# solve_lyapunov


def test_lyapunov_scalar():
    P = solve_lyapunov(-1.0, 2.0)
    assert abs(P[0, 0] - 1.0) < 1e-14


def test_lyapunov_identity_pair():
    P = solve_lyapunov(-np.eye(2), np.eye(2))
    assert np.allclose(P, 0.5 * np.eye(2), atol=1e-14)


def test_lyapunov_residual_on_seeded_systems():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        A = rng.normal(size=(n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + 0.5) * np.eye(n)
        G = rng.normal(size=(n, n))
        W = G @ G.T
        P = solve_lyapunov(A, W)
        res = np.linalg.norm(A @ P + P @ A.T + W, "fro")
        assert res < 1e-10 * (1 + np.linalg.norm(P, "fro"))
        assert np.linalg.eigvalsh(P)[0] > -1e-12


def test_lyapunov_rejects_unstable():
    with pytest.raises(SolverError):
        solve_lyapunov(1.0, 1.0)


# ---------------------------------------------------------------------------
# h2_norm


def test_h2_first_order_lag():
    val = h2_norm(_sys(-1.0, 1.0, 1.0, 0.0))
    assert abs(val - 1.0 / np.sqrt(2.0)) < 1e-12, f"h2 = {val}"


def test_h2_first_order_family():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = float(rng.uniform(0.2, 5.0))
        val = h2_norm(_sys(-a, 1.0, 1.0, 0.0))
        assert abs(val - 1.0 / np.sqrt(2.0 * a)) < 1e-10


def test_h2_dual_gramian_agreement():
    rng = np.random.default_rng(3)
    for _ in range(8):
        n, m, p = 5, 2, 3
        A = rng.normal(size=(n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + 1.0) * np.eye(n)
        B = rng.normal(size=(n, m))
        C = rng.normal(size=(p, n))
        val = h2_norm(_sys(A, B, C, np.zeros((p, m))))
        Qobs = solve_lyapunov(A.T, C.T @ C)
        dual = np.sqrt(np.trace(B.T @ Qobs @ B))
        assert abs(val - dual) < 1e-10 * (1 + dual), f"{val} vs {dual}"


def test_h2_rejects_feedthrough_and_unstable():
    with pytest.raises(SolverError):
        h2_norm(_sys(-1.0, 1.0, 1.0, 1.0))
    with pytest.raises(SolverError):
        h2_norm(_sys(1.0, 1.0, 1.0, 0.0))


# ---------------------------------------------------------------------------
# hinf_norm


def test_hinf_static_gain():
    real = StructuredRealization(
        np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[3.0]]
    )
    assert hinf_norm(real) == 3.0


def test_hinf_first_order_lag():
    val = hinf_norm(_sys(-1.0, 1.0, 1.0, 0.0), tol=1e-8)
    assert abs(val - 1.0) < 1e-7, f"hinf = {val}"


def test_hinf_damped_resonator():
    # 1 / (s^2 + 0.1 s + 1): peak gain 1 / (0.1 sqrt(1 - 0.05^2)).
    real = _sys([[0.0, 1.0], [-1.0, -0.1]], [[0.0], [1.0]], [[1.0, 0.0]],
                [[0.0]])
    val = hinf_norm(real, tol=1e-8)
    analytic = 1.0 / (0.1 * np.sqrt(1.0 - 0.05**2))
    assert abs(val - analytic) < 1e-6 * analytic, f"{val} vs {analytic}"


def test_hinf_dominates_frequency_grid():
    rng = np.random.default_rng(17)
    for _ in range(6):
        A = rng.normal(size=(2, 2))
        A -= (np.max(np.linalg.eigvals(A).real) + 0.3) * np.eye(2)
        B = rng.normal(size=(2, 1))
        C = rng.normal(size=(1, 2))
        real = _sys(A, B, C, [[0.0]])
        tol = 1e-6
        val = hinf_norm(real, tol=tol)
        wmax = 10.0 * np.max(np.abs(np.linalg.eigvals(A)))
        grid_max = 0.0
        for w in np.linspace(0.0, wmax, 4001):
            G = C @ np.linalg.solve(1j * w * np.eye(2) - A, B)
            grid_max = max(grid_max, abs(G[0, 0]))
        assert val >= grid_max - tol * grid_max
        assert abs(val - grid_max) < 2 * tol * grid_max, (
            f"bisection {val} vs dense grid {grid_max}"
        )


def test_hinf_rejects_unstable():
    with pytest.raises(SolverError):
        hinf_norm(_sys(1.0, 1.0, 1.0, 0.0))


# ---------------------------------------------------------------------------
# hinf_solvable


def test_hinf_riccati_integrator_value():
    plant = _embed(0.0, 1.0, 1.0)
    gamma = 1.5
    X, Y = hinf_riccatis(plant, gamma)
    expected = gamma / np.sqrt(gamma**2 - 1.0)
    assert abs(X[0, 0] - expected) < 1e-10, f"X = {X}"
    assert abs(Y[0, 0] - expected) < 1e-10


def test_hinf_solvable_threshold_on_lossless_plants():
    rng = np.random.default_rng(29)
    crit = np.sqrt(2.0)
    for _ in range(5):
        real = build_lct(rng.normal(size=(2, 2)), rng.normal(size=(2, 2)),
                         rng.normal(size=(2, 1)))
        plant = _embed(real.A, real.B, real.C)
        assert not hinf_solvable(plant, 0.999 * crit)
        assert hinf_solvable(plant, 1.001 * crit)


def test_hinf_solvable_monotone_in_gamma():
    rng = np.random.default_rng(41)
    real = build_lct(rng.normal(size=(3, 2)), rng.normal(size=(3, 2)),
                     rng.normal(size=(2, 2)))
    plant = _embed(real.A, real.B, real.C)
    flags = [hinf_solvable(plant, g) for g in np.linspace(0.8, 3.0, 12)]
    first_true = flags.index(True)
    assert all(flags[first_true:]), f"solvability not monotone: {flags}"
    assert not any(flags[:first_true])


def test_hinf_solvable_names_regularity_violation():
    plant = _embed(0.0, 1.0, 1.0)
    plant.D12 = np.array([[0.0], [2.0]])
    with pytest.raises(SolverError, match="D12"):
        hinf_solvable(plant, 2.0)


def test_regularity_accepts_embedded_plant():
    check_regularity(_embed([[0.0, 1.0], [-1.0, 0.0]], [[1.0], [0.0]],
                            [[1.0, 0.0]]))


# ---------------------------------------------------------------------------
# Signature shortcut linking the two H2 Riccati equations.


def _random_symmetric_plant(rng, n, m1, m2):
    si = np.diag(rng.choice([-1.0, 1.0], size=n))
    se = np.diag(rng.choice([-1.0, 1.0], size=m1))
    sk = np.diag(rng.choice([-1.0, 1.0], size=m2))
    S = rng.normal(size=(n, n))
    A = si @ (S + S.T)
    A -= (np.max(np.linalg.eigvals(A).real) + 1.0) * np.eye(n)
    B1 = rng.normal(size=(n, m1))
    B2 = rng.normal(size=(n, m2))
    C1 = -se @ B1.T @ si
    C2 = -sk @ B2.T @ si
    return A, B1, B2, C1, C2, si


def test_h2_riccati_pair_signature_shortcut():
    rng = np.random.default_rng(53)
    for trial in range(10):
        n = int(rng.integers(2, 8))
        A, B1, B2, C1, C2, si = _random_symmetric_plant(
            rng, n, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        X = solve_care(A, B2, C1.T @ C1, np.eye(B2.shape[1])).X
        Y = solve_care(A.T, C2.T, B1 @ B1.T, np.eye(C2.shape[0])).X
        gap = np.linalg.norm(X - si @ Y @ si, "fro")
        assert gap < 1e-8 * (1 + np.linalg.norm(X, "fro")), (
            f"trial {trial}: shortcut gap {gap:.3e}"
        )
