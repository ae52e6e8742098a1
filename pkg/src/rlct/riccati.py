"""Continuous Riccati and Lyapunov solvers plus H2/H-infinity machinery.

The Riccati path is an ordered real Schur decomposition of the Hamiltonian;
the same core handles the sign-indefinite quadratic term needed by the
H-infinity solvability test.  Norms come from the Lyapunov trace formula
(H2) and bounded-real Hamiltonian bisection (H-infinity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SolverError

TAU_RIC = 1e-9

# Eigenvalues this close to the imaginary axis (relative to ||H||_2) mean
# the Hamiltonian has no clean stable/antistable split.
AXIS_RTOL = 1e-8


@dataclass(frozen=True)
class RiccatiSolution:
    """Stabilizing solution with its residual and closed-loop abscissa."""

    X: np.ndarray
    residual: float
    closed_loop_abscissa: float


def _imag_axis_clearance(H: np.ndarray) -> float:
    """Smallest |Re(lambda)| over the spectrum, scaled by ||H||_2."""
    if H.size == 0:
        return np.inf
    scale = np.linalg.norm(H, 2)
    if scale == 0.0:
        return np.inf
    eigs = np.linalg.eigvals(H)
    return float(np.min(np.abs(eigs.real))) / scale


def _stable_subspace_solution(A, S, Q):
    """Solve A^T X + X A - X S X + Q = 0 via the Hamiltonian's stable subspace.

    Returns None when the Hamiltonian has eigenvalues on (or numerically
    touching) the imaginary axis, or when the subspace does not project onto
    the state space, i.e. when no stabilizing solution exists.
    """
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0, -np.inf
    H = np.block([[A, -S], [-Q, -A.T]])
    if _imag_axis_clearance(H) <= AXIS_RTOL:
        return None
    _, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    if sdim != n:
        return None
    Z11 = Z[:n, :n]
    Z21 = Z[n:, :n]
    svals = np.linalg.svd(Z11, compute_uv=False)
    if svals[-1] < 1e-12 * svals[0]:
        raise SolverError(
            f"stable-subspace basis is ill conditioned "
            f"(sigma_min/sigma_max = {svals[-1] / svals[0]:.3e})"
        )
    X = np.linalg.solve(Z11.T, Z21.T).T
    X = 0.5 * (X + X.T)
    residual = float(np.linalg.norm(A.T @ X + X @ A - X @ S @ X + Q, "fro"))
    abscissa = float(np.max(np.linalg.eigvals(A - S @ X).real))
    return X, residual, abscissa


def solve_care(A, B, Q, R) -> RiccatiSolution:
    """Stabilizing solution of A^T X + X A - X B R^{-1} B^T X + Q = 0."""
    A = np.atleast_2d(np.asarray(A, float))
    B = np.atleast_2d(np.asarray(B, float))
    Q = np.atleast_2d(np.asarray(Q, float))
    R = np.atleast_2d(np.asarray(R, float))
    if B.ndim == 2 and B.shape[0] != A.shape[0]:
        B = B.reshape(A.shape[0], -1)
    if R.size and np.linalg.eigvalsh(0.5 * (R + R.T))[0] <= 0:
        raise SolverError("R must be positive definite")
    S = B @ np.linalg.solve(R, B.T)
    result = _stable_subspace_solution(A, S, Q)
    if result is None:
        raise SolverError(
            "no stabilizing solution: Hamiltonian spectrum touches the "
            "imaginary axis or the stable subspace is deficient"
        )
    X, residual, abscissa = result
    if residual >= TAU_RIC * (1.0 + np.linalg.norm(X, "fro")) ** 2:
        raise SolverError(f"Riccati residual {residual:.3e} exceeds tolerance")
    return RiccatiSolution(X, residual, abscissa)


def solve_lyapunov(A, W) -> np.ndarray:
    """Solve A P + P A^T + W = 0 for Hurwitz A and symmetric W."""
    A = np.atleast_2d(np.asarray(A, float))
    W = np.atleast_2d(np.asarray(W, float))
    if A.shape[0] == 0:
        return np.zeros((0, 0))
    if np.max(np.linalg.eigvals(A).real) >= 0:
        raise SolverError("A is not Hurwitz")
    if np.max(np.abs(W - W.T)) > 1e-12 * (1.0 + np.max(np.abs(W))):
        raise SolverError("W must be symmetric")
    P = scipy.linalg.solve_continuous_lyapunov(A, -W)
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(A @ P + P @ A.T + W, "fro"))
    if residual >= 1e-10 * (1.0 + np.linalg.norm(P, "fro")):
        raise SolverError(f"Lyapunov residual {residual:.3e} exceeds tolerance")
    return P


def h2_norm(real) -> float:
    """H2 norm from the controllability Gramian trace formula."""
    if real.D.size and np.max(np.abs(real.D)) != 0.0:
        raise SolverError("H2 norm is infinite for nonzero feedthrough")
    if real.n == 0:
        return 0.0
    if np.max(np.linalg.eigvals(real.A).real) >= 0:
        raise SolverError("H2 norm requires a Hurwitz state matrix")
    P = solve_lyapunov(real.A, real.B @ real.B.T)
    return float(np.sqrt(max(np.trace(real.C @ P @ real.C.T), 0.0)))


def _bounded_by(A, B, C, D, gamma: float) -> bool:
    """Bounded-real test: is the H-infinity norm strictly below gamma?"""
    m = B.shape[1] if B.size else D.shape[1]
    if D.size:
        smax = np.linalg.svd(D, compute_uv=False)
        if smax.size and smax[0] >= gamma:
            return False
    if A.shape[0] == 0:
        return True
    R = gamma**2 * np.eye(m) - D.T @ D
    RinvBt = np.linalg.solve(R, B.T)
    RinvDtC = np.linalg.solve(R, D.T @ C)
    Acl = A + B @ RinvDtC
    H = np.block([
        [Acl, B @ RinvBt],
        [-C.T @ (np.eye(C.shape[0]) + D @ np.linalg.solve(R, D.T)) @ C, -Acl.T],
    ])
    # ||H||_2 blows up as gamma approaches the feedthrough gain, so judge
    # each eigenvalue against its own magnitude; the absolute floor covers
    # the rounding of genuinely imaginary eigenvalues of a large H.
    floor = 100.0 * np.finfo(float).eps * np.linalg.norm(H, 2)
    for lam in np.linalg.eigvals(H):
        if abs(lam.real) <= max(AXIS_RTOL * max(abs(lam), 1.0), floor):
            return False
    return True


def hinf_norm(real, tol: float = 1e-6) -> float:
    """H-infinity norm by Hamiltonian bisection.

    The lower bracket starts from the feedthrough gain and a 20-point
    frequency sweep; the upper bracket doubles until the bounded-real test
    passes.  Returns the bracket midpoint once the relative gap is below
    ``tol``.
    """
    A, B, C, D = real.A, real.B, real.C, real.D
    if real.n == 0:
        if D.size == 0:
            return 0.0
        return float(np.linalg.svd(D, compute_uv=False)[0])
    eigs = np.linalg.eigvals(A)
    if np.max(eigs.real) >= 0:
        raise SolverError("H-infinity norm requires a Hurwitz state matrix")

    lower = float(np.linalg.svd(D, compute_uv=False)[0]) if D.size else 0.0
    mags = np.abs(eigs)
    w_lo = 0.01 * float(np.min(mags[mags > 0], initial=1.0))
    w_hi = 100.0 * float(np.max(mags, initial=1.0))
    for w in np.logspace(np.log10(w_lo), np.log10(w_hi), 19):
        G = C @ np.linalg.solve(1j * w * np.eye(real.n) - A, B) + D
        lower = max(lower, float(np.linalg.svd(G, compute_uv=False)[0])
                    if G.size else 0.0)
    try:
        G0 = C @ np.linalg.solve(-A, B) + D
        lower = max(lower, float(np.linalg.svd(G0, compute_uv=False)[0])
                    if G0.size else 0.0)
    except np.linalg.LinAlgError:
        pass
    if lower == 0.0:
        return 0.0

    upper = 2.0 * lower
    while not _bounded_by(A, B, C, D, upper):
        upper *= 2.0
        if upper > 1e12 * lower:
            raise SolverError("H-infinity bisection bracket failed to close")
    lo = lower
    while upper - lo > tol * lo:
        mid = 0.5 * (lo + upper)
        if _bounded_by(A, B, C, D, mid):
            upper = mid
        else:
            lo = mid
    return 0.5 * (lo + upper)


# ---------------------------------------------------------------------------
# H-infinity solvability for the generalized plant (two Riccati test).

def _sigma_min_rank(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def _stabilizable(A: np.ndarray, B: np.ndarray) -> bool:
    n = A.shape[0]
    if n == 0:
        return True
    for lam in np.linalg.eigvals(A):
        if lam.real >= -1e-10:
            pencil = np.hstack([lam * np.eye(n) - A, B.astype(complex)])
            svals = np.linalg.svd(pencil, compute_uv=False)
            if svals[n - 1] < 1e-9 * max(svals[0], 1.0):
                return False
    return True


def check_regularity(plant):
    """Raise SolverError naming the first violated regularity assumption."""
    A, B1, B2 = plant.A, plant.B1, plant.B2
    C1, C2, D12, D21 = plant.C1, plant.C2, plant.D12, plant.D21
    checks = [
        ("D11 = 0", np.max(np.abs(plant.D11)) if plant.D11.size else 0.0),
        ("D22 = 0", np.max(np.abs(plant.D22)) if plant.D22.size else 0.0),
        ("D12^T D12 = I",
         np.max(np.abs(D12.T @ D12 - np.eye(D12.shape[1]))) if D12.size else 0.0),
        ("D21 D21^T = I",
         np.max(np.abs(D21 @ D21.T - np.eye(D21.shape[0]))) if D21.size else 0.0),
        ("D12^T C1 = 0",
         np.max(np.abs(D12.T @ C1)) if (D12.size and C1.size) else 0.0),
        ("B1 D21^T = 0",
         np.max(np.abs(B1 @ D21.T)) if (B1.size and D21.size) else 0.0),
    ]
    for name, residual in checks:
        if residual > 1e-9:
            raise SolverError(f"regularity assumption violated: {name} "
                              f"(residual {residual:.3e})")
    if not _stabilizable(A, B2):
        raise SolverError("regularity assumption violated: (A, B2) stabilizable")
    if not _stabilizable(A.T, C2.T):
        raise SolverError("regularity assumption violated: (C2, A) detectable")
    if not _stabilizable(A, B1):
        raise SolverError("regularity assumption violated: (A, B1) stabilizable")
    if not _stabilizable(A.T, C1.T):
        raise SolverError("regularity assumption violated: (C1, A) detectable")


def hinf_riccatis(plant, gamma: float):
    """Stabilizing (X, Y) of the two H-infinity Riccati equations, or None."""
    if gamma <= 0:
        raise SolverError("gamma must be positive")
    A, B1, B2, C1, C2 = plant.A, plant.B1, plant.B2, plant.C1, plant.C2
    g2 = gamma ** (-2)
    rx = _stable_subspace_solution(
        A, B2 @ B2.T - g2 * (B1 @ B1.T), C1.T @ C1)
    if rx is None:
        return None
    ry = _stable_subspace_solution(
        A.T, C2.T @ C2 - g2 * (C1.T @ C1), B1 @ B1.T)
    if ry is None:
        return None
    return rx[0], ry[0]


def hinf_solvable(plant, gamma: float) -> bool:
    """True iff both Riccati equations have stabilizing PSD solutions with
    rho(X Y) < gamma^2."""
    check_regularity(plant)
    pair = hinf_riccatis(plant, gamma)
    if pair is None:
        return False
    X, Y = pair
    for Mat in (X, Y):
        if Mat.size and np.linalg.eigvalsh(Mat)[0] < -1e-9 * (
                1.0 + np.linalg.norm(Mat, 2)):
            return False
    if X.size:
        rho = float(np.max(np.abs(np.linalg.eigvals(X @ Y))))
        if rho >= gamma**2:
            return False
    return True
