"""Branch-level current/voltage reconstruction for signature-symmetric models.

A signature-symmetric passive realization exposes the port behavior (u, y)
and a state x, but not the currents and voltages of the individual storage
elements that a physical network would have.  Given a compatible internal
kernel

    K = [[Theta, Gamma^T], [Gamma, Phi]],  K > 0,

together with per-branch sign data, ``build_internal_map`` assembles the
matrix F that expands a trajectory (x, u, y) into stacked branch currents
and voltages [i; v].  Capacitor-type branches then satisfy c * dv/dt = i
and inductor-type branches l * di/dt = v along every trajectory of the
realization; ``element_law_residual`` measures this on a simulated run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .structured import (
    TAU_STRUCT,
    ConditionCheck,
    Signature,
    StructuredRealization,
    ValidationReport,
    _as_matrix,
    document_text,
    matrix_text,
    parse_realization,
    realization_fields,
    tau_psd,
)

# Exact-commutation tolerance for the structured eigendecomposition.
_COMMUTE_TOL = 1e-12


@dataclass(frozen=True)
class InternalData:
    """Internal kernel and branch bookkeeping for one realization.

    ``theta`` (size d), ``gamma`` (n x d) and ``phi`` (size n) form the
    kernel K above, where n is the realization's state dimension and d the
    number of extra internal branches without state counterparts.
    ``sigma_int_dagger`` signs the d extra branches, ``sigma_int`` the n
    state branches, ``sigma_ext`` the ports.  ``n_C``/``n_L`` declare how
    many branches are capacitor- resp. inductor-typed, and ``permutation``
    reorders the (dagger, state, port) branch stack into the network's own
    element order.

    Construction checks shapes and finiteness only; the numeric conditions
    (kernel definiteness, signed symmetry, count consistency) are scored by
    ``validate_internal_data`` so that failing data can still be built and
    reported on.
    """

    theta: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray
    sigma_int_dagger: Signature
    sigma_int: Signature
    sigma_ext: Signature
    n_C: int
    n_L: int
    permutation: np.ndarray

    def __post_init__(self):
        d = len(self.sigma_int_dagger)
        n = len(self.sigma_int)
        theta = _as_matrix(self.theta, d, d)
        if theta.shape != (d, d):
            raise StructureError(
                f"theta has shape {theta.shape}, expected {(d, d)}")
        gamma = _as_matrix(self.gamma, n, d)
        if gamma.shape != (n, d):
            raise StructureError(
                f"gamma has shape {gamma.shape}, expected {(n, d)}")
        phi = _as_matrix(self.phi, n, n)
        if phi.shape != (n, n):
            raise StructureError(f"phi has shape {phi.shape}, expected {(n, n)}")
        if self.n_C < 0 or self.n_L < 0:
            raise StructureError("n_C and n_L must be nonnegative")
        if self.n_C + self.n_L != d + n:
            raise StructureError(
                f"declared n_C + n_L = {self.n_C + self.n_L} but the kernel "
                f"has {d + n} internal branches")
        nb = self.n_branches
        perm = _as_matrix(self.permutation, nb, nb)
        if perm.shape != (nb, nb):
            raise StructureError(
                f"permutation has shape {perm.shape}, expected {(nb, nb)}")
        for name, mat in (("theta", theta), ("gamma", gamma), ("phi", phi),
                          ("permutation", perm)):
            if mat.size and not np.all(np.isfinite(mat)):
                raise StructureError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        object.__setattr__(self, "n_C", int(self.n_C))
        object.__setattr__(self, "n_L", int(self.n_L))

    @property
    def n_int_dagger(self) -> int:
        return len(self.sigma_int_dagger)

    @property
    def n_int(self) -> int:
        return len(self.sigma_int)

    @property
    def n_ext(self) -> int:
        return len(self.sigma_ext)

    @property
    def n_branches(self) -> int:
        return self.n_C + self.n_L + self.n_ext

    def kernel(self) -> np.ndarray:
        """The symmetric block matrix [[theta, gamma^T], [gamma, phi]]."""
        return np.block([
            [self.theta, self.gamma.T],
            [self.gamma, self.phi],
        ])


def commuting_eigvecs(M, sigma: Signature) -> np.ndarray:
    """Orthogonal Q with Q^T M Q diagonal and Q Sigma = Sigma Q exactly.

    Requires Sigma M = M Sigma, which forces M to vanish between indices of
    opposite sign; each same-sign block is diagonalized independently so the
    commutation holds by construction rather than by eigenvalue ordering.
    """
    M = _as_matrix(M)
    k = len(sigma)
    if M.shape != (k, k):
        raise StructureError(f"matrix has shape {M.shape}, expected {(k, k)}")
    if k == 0:
        return np.zeros((0, 0))
    scale = 1.0 + float(np.max(np.abs(M)))
    if np.max(np.abs(M - M.T)) > _COMMUTE_TOL * scale:
        raise StructureError("matrix is not symmetric")
    signs = sigma.diagonal()
    commute = signs[:, None] * M - M * signs[None, :]
    if np.max(np.abs(commute)) > _COMMUTE_TOL * scale:
        raise StructureError(
            "matrix does not commute with the signature: entries couple "
            "indices of opposite sign")
    Q = np.zeros((k, k))
    for sign in (1, -1):
        idx = np.flatnonzero(signs == sign)
        if idx.size == 0:
            continue
        block = M[np.ix_(idx, idx)]
        off = block - np.diag(np.diag(block))
        if np.max(np.abs(off)) <= _COMMUTE_TOL * scale:
            vecs = np.eye(idx.size)  # already diagonal: keep the given order
        else:
            _, vecs = np.linalg.eigh(0.5 * (block + block.T))
        Q[np.ix_(idx, idx)] = vecs
    return Q


def _check_permutation(P: np.ndarray) -> ConditionCheck:
    name = "permutation is a 0/1 matrix with one 1 per row and column"
    if P.size == 0:
        return ConditionCheck(name, True, 0.0)
    entry = float(np.max(np.minimum(np.abs(P), np.abs(P - 1.0))))
    rows = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
    cols = float(np.max(np.abs(P.sum(axis=0) - 1.0)))
    residual = max(entry, rows, cols)
    return ConditionCheck(name, residual < TAU_STRUCT, residual)


def validate_internal_data(real: StructuredRealization,
                           internal: InternalData) -> ValidationReport:
    """Score the admissibility conditions tying ``internal`` to ``real``.

    Dimension mismatches raise; everything numeric is reported as a
    per-condition pass/fail with its residual.
    """
    if internal.n_int != real.n:
        raise StructureError(
            f"internal data describes {internal.n_int} state branches but "
            f"the realization has {real.n} states")
    if real.m != real.p:
        raise StructureError("branch reconstruction needs a square port map")
    if internal.n_ext != real.m:
        raise StructureError(
            f"internal data describes {internal.n_ext} ports but the "
            f"realization has {real.m}")
    for name, own in (("sigma_int", real.sigma_int),
                      ("sigma_ext", real.sigma_ext)):
        if own is not None and tuple(own) != tuple(getattr(internal, name)):
            raise StructureError(
                f"realization and internal data disagree on {name}")

    sig_int = internal.sigma_int.diagonal()
    sig_ext = internal.sigma_ext.diagonal()
    sig_dag = internal.sigma_int_dagger.diagonal()

    M = real.coupling_matrix()
    sigma = np.concatenate([sig_int, sig_ext])
    sym = sigma[:, None] * M - M.T * sigma[None, :]
    sym_res = float(np.max(np.abs(sym))) if sym.size else 0.0
    diss = M + M.T
    lam_min = float(np.linalg.eigvalsh(diss)[0]) if diss.size else 0.0

    trace_gap = abs(float(sig_dag.sum() + sig_int.sum())
                    - (internal.n_C - internal.n_L))

    K = internal.kernel()
    skew = np.concatenate([sig_dag, sig_int])
    ksym = skew[:, None] * K - K.T * skew[None, :]
    ksym_res = float(np.max(np.abs(ksym))) if ksym.size else 0.0
    if K.size:
        k_min = float(np.linalg.eigvalsh(0.5 * (K + K.T))[0])
        k_pass = k_min > tau_psd(K)
        k_res = max(0.0, -k_min)
    else:
        k_pass, k_res = True, 0.0

    checks = (
        ConditionCheck("signature symmetry of the realization",
                       sym_res < TAU_STRUCT, sym_res),
        ConditionCheck("passivity of the realization",
                       lam_min > -tau_psd(diss), max(0.0, -lam_min)),
        _check_permutation(internal.permutation),
        ConditionCheck("signed branch counts match n_C - n_L",
                       trace_gap < 0.5, trace_gap),
        ConditionCheck("signed symmetry of the internal kernel",
                       ksym_res < TAU_STRUCT, ksym_res),
        ConditionCheck("positive definiteness of the internal kernel",
                       k_pass, k_res),
    )
    return ValidationReport(all(c.passed for c in checks), checks)


def _psd_sqrt(mat: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (S^(1/2), S^(-1/2)) of a symmetric positive definite matrix."""
    if mat.size == 0:
        empty = np.zeros(mat.shape)
        return empty, empty
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    if vals[0] <= 1e-12 * max(1.0, vals[-1]):
        raise StructureError(f"non-positive {what}: min eigenvalue {vals[0]:.3e}")
    root = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    inv_root = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    return root, inv_root


def build_internal_map(real: StructuredRealization,
                       internal: InternalData) -> np.ndarray:
    """Assemble the branch map F with [i; v] = F @ [x; u; y].

    F has 2 * (n_C + n_L + n_ext) rows; the first half produces the branch
    currents and the second half the branch voltages, both in the network
    element order fixed by ``internal.permutation``.
    """
    report = validate_internal_data(real, internal)
    if not report.passed:
        raise StructureError(
            "internal data rejected: " + ", ".join(report.violations))

    d, n, m, p = internal.n_int_dagger, real.n, real.m, real.p
    theta, gamma, phi = internal.theta, internal.gamma, internal.phi

    if d:
        theta_inv_gt = np.linalg.solve(theta, gamma.T)
        schur = phi - gamma @ theta_inv_gt
    else:
        theta_inv_gt = np.zeros((0, n))
        schur = phi
    delta, _ = _psd_sqrt(schur, "Schur complement of the internal kernel")
    phi_root, phi_inv_root = _psd_sqrt(phi, "phi block")
    q1 = commuting_eigvecs(theta, internal.sigma_int_dagger)
    q2 = commuting_eigvecs(phi, internal.sigma_int)

    zeros = np.zeros
    # Row blocks over the stacked coordinates [x; u; y].
    e_dag = -q1.T @ theta_inv_gt @ phi_inv_root
    w = q2.T @ phi_root @ delta @ phi_inv_root
    e_rows = np.block([
        [e_dag, zeros((d, m)), zeros((d, p))],
        [w @ real.A, w @ real.B, zeros((n, p))],
        [zeros((p, n)), zeros((p, m)), np.eye(p)],
    ])
    h_dag = -q1.T @ gamma.T @ phi_inv_root
    v2 = q2.T @ phi_inv_root @ delta @ phi_inv_root
    h_rows = np.block([
        [h_dag @ real.A, h_dag @ real.B, zeros((d, p))],
        [v2, zeros((n, m)), zeros((n, p))],
        [zeros((m, n)), np.eye(m), zeros((m, p))],
    ])

    signs = np.concatenate([
        -internal.sigma_int_dagger.diagonal(),
        internal.sigma_int.diagonal(),
        internal.sigma_ext.diagonal(),
    ])
    up = 0.5 * (1.0 + signs)[:, None]
    down = 0.5 * (1.0 - signs)[:, None]
    currents = up * e_rows + down * h_rows
    voltages = down * e_rows + up * h_rows
    P = internal.permutation
    return np.vstack([P @ currents, P @ voltages])


def branch_values(internal: InternalData) -> np.ndarray:
    """Element values per internal branch in (dagger, state) stack order.

    Entry k is the capacitance (sign +1) or inductance (sign -1) of branch
    k, read from the diagonalized kernel blocks.
    """
    q1 = commuting_eigvecs(internal.theta, internal.sigma_int_dagger)
    q2 = commuting_eigvecs(internal.phi, internal.sigma_int)
    lam1 = np.diag(q1.T @ internal.theta @ q1) if internal.n_int_dagger else \
        np.zeros(0)
    lam2 = np.diag(q2.T @ internal.phi @ q2) if internal.n_int else np.zeros(0)
    return np.concatenate([lam1, lam2])


def _smooth_input(t: np.ndarray, m: int) -> np.ndarray:
    """Phase-shifted unit sinusoids, one column per input channel."""
    phases = 0.7 * np.arange(m)
    return np.sin(t[:, None] + phases[None, :])


def element_law_residual(real: StructuredRealization,
                         internal: InternalData,
                         t_final: float = 5.0,
                         step: float = 1e-3) -> float:
    """Worst dynamic element-law violation along a simulated trajectory.

    Integrates the realization under a smooth sinusoidal drive with
    fixed-step RK4, maps (x, u, y) through ``build_internal_map``, and
    checks c * dv/dt = i on capacitor-type branches and l * di/dt = v on
    inductor-type ones, derivatives taken by central differences.
    """
    F = build_internal_map(real, internal)
    steps = int(round(t_final / step))
    times = step * np.arange(steps + 1)
    A, B = real.A, real.B

    drive_lo = (B @ _smooth_input(times[:-1], real.m).T).T
    drive_mid = (B @ _smooth_input(times[:-1] + 0.5 * step, real.m).T).T
    drive_hi = (B @ _smooth_input(times[1:], real.m).T).T
    x = np.zeros(real.n)
    states = np.empty((steps + 1, real.n))
    states[0] = x
    for k in range(steps):
        k1 = A @ x + drive_lo[k]
        k2 = A @ (x + 0.5 * step * k1) + drive_mid[k]
        k3 = A @ (x + 0.5 * step * k2) + drive_mid[k]
        k4 = A @ (x + step * k3) + drive_hi[k]
        x = x + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = x

    inputs = _smooth_input(times, real.m)
    outputs = states @ real.C.T + inputs @ real.D.T
    stacked = np.hstack([states, inputs, outputs])
    branch = stacked @ F.T
    nb = internal.n_branches
    # Back to (dagger, state, port) stack order for the law bookkeeping.
    currents = branch[:, :nb] @ internal.permutation
    voltages = branch[:, nb:] @ internal.permutation

    signs = np.concatenate([
        internal.sigma_int_dagger.diagonal(),
        internal.sigma_int.diagonal(),
    ])
    values = branch_values(internal)
    worst = 0.0
    for k, (sign, value) in enumerate(zip(signs, values)):
        if sign > 0:
            diff, target = voltages[:, k], currents[:, k]
        else:
            diff, target = currents[:, k], voltages[:, k]
        slope = (diff[2:] - diff[:-2]) / (2.0 * step)
        worst = max(worst, float(np.max(np.abs(value * slope - target[1:-1]))))
    return worst


def serialize_internal(real: StructuredRealization,
                       internal: InternalData) -> str:
    """One document holding the realization plus its internal kernel."""
    fields = realization_fields(real)
    fields += [
        ("theta", matrix_text(internal.theta)),
        ("gamma", matrix_text(internal.gamma)),
        ("phi", matrix_text(internal.phi)),
        ("sigma_int_dagger", json.dumps(list(internal.sigma_int_dagger))),
        ("n_C", str(internal.n_C)),
        ("n_L", str(internal.n_L)),
        ("permutation", matrix_text(internal.permutation)),
    ]
    return document_text(fields)


def parse_internal(text: str) -> tuple[StructuredRealization, InternalData]:
    real = parse_realization(text)
    if real.sigma_int is None or real.sigma_ext is None:
        raise StructureError("internal data needs explicit signatures")
    try:
        doc = json.loads(text)
        sig_dag = Signature(tuple(int(v) for v in doc["sigma_int_dagger"]))
        d = len(sig_dag)
        theta = np.asarray(doc["theta"], dtype=float).reshape(d, d)
        gamma = np.asarray(doc["gamma"], dtype=float).reshape(real.n, d)
        phi = np.asarray(doc["phi"], dtype=float).reshape(real.n, real.n)
        n_C, n_L = int(doc["n_C"]), int(doc["n_L"])
        nb = n_C + n_L + real.m
        perm = np.asarray(doc["permutation"], dtype=float).reshape(nb, nb)
    except (KeyError, ValueError) as exc:
        raise StructureError(f"bad internal-data document: {exc}") from None
    internal = InternalData(
        theta=theta, gamma=gamma, phi=phi, sigma_int_dagger=sig_dag,
        sigma_int=real.sigma_int, sigma_ext=real.sigma_ext,
        n_C=n_C, n_L=n_L, permutation=perm,
    )
    return real, internal
