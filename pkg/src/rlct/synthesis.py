"""Controller construction for signature-symmetric plants.

The controller sign convention is fixed throughout the package as

    dx_K/dt = A_K x_K + B_K y,      u = -C_K x_K - D_K y,

so a positive-real controller transfer function corresponds to terminating
the plant with a passive network.  ``h2_symmetric`` and ``hinf_symmetric``
exploit the plant's signature symmetry to solve one Riccati equation
instead of two and return controllers inheriting the same symmetry.  For
lossless (LCT) plants the optimal laws are available in closed form, and
for the lossy single-sign classes (RLT/RCT) the optimal H-infinity law is
a static resistive termination.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SolverError, StructureError
from .riccati import check_regularity, hinf_norm, hinf_riccatis, solve_care
from .structured import (
    TAU_STRUCT,
    Signature,
    StructuredRealization,
    _as_matrix,
    controllability_basis,
    document_text,
    matrix_text,
    tau_psd,
    validate_structure,
)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Controller:
    """Dynamic output feedback law, possibly static (empty A_K).

    ``impl_hint`` optionally names a passive-network implementation of the
    law, e.g. ``terminate_resistors(1)`` or
    ``copy_network_plus_resistors(2)``.
    """

    A_K: np.ndarray
    B_K: np.ndarray
    C_K: np.ndarray
    D_K: np.ndarray
    impl_hint: str | None = None

    def __post_init__(self):
        A = _as_matrix(self.A_K, 0, 0)
        k = A.shape[0]
        if A.shape != (k, k):
            raise StructureError(f"A_K must be square, got {A.shape}")
        D = _as_matrix(self.D_K)
        m, p = D.shape
        B = _as_matrix(self.B_K, k, p)
        C = _as_matrix(self.C_K, m, k)
        if B.shape != (k, p) or C.shape != (m, k):
            raise StructureError(
                f"controller blocks are not conformable: A_K {A.shape}, "
                f"B_K {B.shape}, C_K {C.shape}, D_K {D.shape}")
        for name, mat in (("A_K", A), ("B_K", B), ("C_K", C), ("D_K", D)):
            if mat.size and not np.all(np.isfinite(mat)):
                raise StructureError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def order(self) -> int:
        return self.A_K.shape[0]

    def transfer_at(self, s: complex) -> np.ndarray:
        """K(s) = C_K (sI - A_K)^{-1} B_K + D_K (the positive convention)."""
        if self.order == 0:
            return self.D_K.astype(complex)
        pencil = s * np.eye(self.order) - self.A_K
        return self.C_K @ np.linalg.solve(pencil, self.B_K) + self.D_K


@dataclass(frozen=True)
class GeneralizedPlant:
    """Disturbance/performance form with inputs (w, u), outputs (z, y)."""

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D11: np.ndarray
    D12: np.ndarray
    D21: np.ndarray
    D22: np.ndarray
    sigma_int: Signature | None = None
    sigma_ext: Signature | None = None
    sigma_K: Signature | None = None

    def __post_init__(self):
        A = _as_matrix(self.A, 0, 0)
        n = A.shape[0]
        B1 = _as_matrix(self.B1, n, 0)
        B2 = _as_matrix(self.B2, n, 0)
        mw, mu = B1.shape[1], B2.shape[1]
        C1 = _as_matrix(self.C1, 0, n)
        C2 = _as_matrix(self.C2, 0, n)
        pz, py = C1.shape[0], C2.shape[0]
        D11 = _as_matrix(self.D11, pz, mw)
        D12 = _as_matrix(self.D12, pz, mu)
        D21 = _as_matrix(self.D21, py, mw)
        D22 = _as_matrix(self.D22, py, mu)
        shapes = {
            "A": (A, (n, n)), "B1": (B1, (n, mw)), "B2": (B2, (n, mu)),
            "C1": (C1, (pz, n)), "C2": (C2, (py, n)),
            "D11": (D11, (pz, mw)), "D12": (D12, (pz, mu)),
            "D21": (D21, (py, mw)), "D22": (D22, (py, mu)),
        }
        for name, (mat, want) in shapes.items():
            if mat.shape != want:
                raise StructureError(
                    f"{name} has shape {mat.shape}, expected {want}")
            if mat.size and not np.all(np.isfinite(mat)):
                raise StructureError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if self.sigma_int is not None and len(self.sigma_int) != n:
            raise StructureError("sigma_int length does not match the state")
        if self.sigma_ext is not None and (len(self.sigma_ext) != mw
                                           or mw != pz):
            raise StructureError(
                "sigma_ext requires matching disturbance/performance counts")
        if self.sigma_K is not None and (len(self.sigma_K) != mu or mu != py):
            raise StructureError(
                "sigma_K requires matching control/measurement counts")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m_w(self) -> int:
        return self.B1.shape[1]

    @property
    def m_u(self) -> int:
        return self.B2.shape[1]

    def coupling_matrix(self) -> np.ndarray:
        return np.block([
            [-self.A, -self.B1, -self.B2],
            [self.C1, self.D11, self.D12],
            [self.C2, self.D21, self.D22],
        ])


def plant_symmetry_residual(plant: GeneralizedPlant) -> float:
    """Worst entrywise violation of the signed plant symmetry."""
    if plant.sigma_int is None or plant.sigma_ext is None \
            or plant.sigma_K is None:
        raise StructureError("plant symmetry needs all three signatures")
    sigma = np.concatenate([
        plant.sigma_int.diagonal(),
        plant.sigma_ext.diagonal(),
        plant.sigma_K.diagonal(),
    ])
    M = plant.coupling_matrix()
    res = sigma[:, None] * M - M.T * sigma[None, :]
    return float(np.max(np.abs(res))) if res.size else 0.0


@dataclass(frozen=True)
class Problem2Plant:
    """Square passive plant G with no feedthrough, disturbed at both the
    actuation and the measurement; the performance output is (y, u)."""

    realization: StructuredRealization
    norm: str = "H2"

    def __post_init__(self):
        real = self.realization
        if real.m != real.p:
            raise StructureError("plant must be square")
        if real.D.size and np.max(np.abs(real.D)) > 0.0:
            raise StructureError("plant must have zero feedthrough (D = 0)")
        if self.norm not in ("H2", "Hinf"):
            raise StructureError(f"unknown norm selector {self.norm!r}")


@dataclass(frozen=True)
class Problem3Plant:
    """Lossy single-sign plant G with a load disturbance on the state
    equation; the performance output is z = (y, u)."""

    realization: StructuredRealization

    def __post_init__(self):
        if self.realization.class_tag not in ("RLT", "RCT"):
            raise StructureError(
                "plant must carry an RLT or RCT tag, got "
                f"{self.realization.class_tag!r}")
        if self.realization.partition is None:
            raise StructureError("plant needs a block partition")


def embed_problem2(plant: Problem2Plant) -> GeneralizedPlant:
    """Disturbance/performance embedding with w = (w1, w2), z = (y, u)."""
    real = plant.realization
    n, m = real.n, real.m
    eye = np.eye(m)
    sig_ext = None
    sig_K = real.sigma_ext
    if sig_K is not None:
        sig_ext = Signature(tuple(sig_K) + tuple(sig_K))
    return GeneralizedPlant(
        A=real.A,
        B1=np.hstack([real.B, np.zeros((n, m))]),
        B2=real.B,
        C1=np.vstack([real.C, np.zeros((m, n))]),
        C2=real.C,
        D11=np.zeros((2 * m, 2 * m)),
        D12=np.vstack([np.zeros((m, m)), eye]),
        D21=np.hstack([np.zeros((m, m)), eye]),
        D22=np.zeros((m, m)),
        sigma_int=real.sigma_int,
        sigma_ext=sig_ext,
        sigma_K=sig_K,
    )


def _require_symmetry(plant: GeneralizedPlant) -> None:
    residual = plant_symmetry_residual(plant)
    if residual >= TAU_STRUCT:
        raise StructureError(
            f"plant symmetry residual {residual:.3e} exceeds tolerance")


def h2_symmetric(plant: GeneralizedPlant) -> Controller:
    """H2-optimal controller from a single Riccati solve.

    The plant symmetry makes the filter Riccati solution the signed mirror
    Y = Sigma_int X Sigma_int of the control solution X, so only X is
    computed; the returned controller satisfies the same signed symmetry.
    """
    _require_symmetry(plant)
    check_regularity(plant)
    A, B2 = plant.A, plant.B2
    X = solve_care(A, B2, plant.C1.T @ plant.C1, np.eye(plant.m_u)).X
    Si = plant.sigma_int.matrix()
    Sk = plant.sigma_K.matrix()
    A_K = A - B2 @ B2.T @ X - Si @ X @ B2 @ B2.T @ Si
    B_K = -Si @ X @ B2 @ Sk
    C_K = B2.T @ X
    return Controller(A_K, B_K, C_K, np.zeros((plant.m_u, plant.m_u)))


def _sqrt_one_minus_series(M: np.ndarray, max_terms: int = 10000) -> np.ndarray:
    """(I - M)^(1/2) by the binomial series; needs rho(M) < 1."""
    n = M.shape[0]
    acc = np.eye(n)
    term = np.eye(n)
    coeff = 1.0
    for k in range(1, max_terms + 1):
        coeff *= (1.5 / k) - 1.0  # binomial(1/2, k) recurrence
        term = term @ M
        update = coeff * term
        acc += update
        if np.max(np.abs(update)) < 1e-16 * max(1.0, np.max(np.abs(acc))):
            return acc
    raise ConvergenceError("square-root series did not converge")


def _z_infinity_roots(W: np.ndarray, gamma: float):
    """(Z^(1/2), Z^(-1/2)) for Z = (I - gamma^-2 W)^(-1).

    W is a product of symmetric matrices, hence diagonalizable with real
    spectrum except in degenerate cases; the binomial series is the
    fallback there.
    """
    n = W.shape[0]
    if n == 0:
        empty = np.zeros((0, 0))
        return empty, empty
    S = np.eye(n) - W / gamma**2
    root = None
    vals, vecs = np.linalg.eig(S)
    if np.max(np.abs(vals.imag)) < 1e-9 and np.min(vals.real) > 0:
        cond = np.linalg.cond(vecs)
        if cond < 1e8:
            candidate = (vecs * np.sqrt(vals.real)) @ np.linalg.inv(vecs)
            candidate = candidate.real
            if np.max(np.abs(candidate @ candidate - S)) \
                    < 1e-8 * (1.0 + np.max(np.abs(S))):
                root = candidate
    if root is None:
        root = _sqrt_one_minus_series(W / gamma**2)
    return np.linalg.inv(root), root


def hinf_symmetric(plant: GeneralizedPlant, gamma: float) -> Controller:
    """Suboptimal H-infinity controller at level ``gamma``.

    Solves the single control Riccati equation, forms the central
    controller with the mirrored filter solution, and changes coordinates
    by Z^(1/2) so the returned controller is again signature symmetric.
    The achieved closed-loop norm is verified to be below ``gamma``.
    """
    _require_symmetry(plant)
    check_regularity(plant)
    pair = hinf_riccatis(plant, gamma)
    if pair is None:
        raise SolverError(f"not solvable at gamma = {gamma}")
    X, _ = pair
    if X.size and np.linalg.eigvalsh(X)[0] < -tau_psd(X):
        raise SolverError(f"not solvable at gamma = {gamma}")
    A, B1, B2 = plant.A, plant.B1, plant.B2
    Si = plant.sigma_int.matrix()
    Sk = plant.sigma_K.matrix()
    W = Si @ X @ Si @ X
    rho = float(np.max(np.abs(np.linalg.eigvals(W)))) if W.size else 0.0
    margin = 1.0 - rho / gamma**2
    if margin <= 0.0:
        raise SolverError(
            f"not solvable at gamma = {gamma}: the spectral coupling "
            "condition fails")
    if margin <= 1e-6:
        safe = 1.01 * gamma
        raise SolverError(
            f"gamma = {gamma} is within the blow-up margin of the infimum "
            f"(spectral margin {margin:.2e}); try gamma >= {safe}")
    Z = np.linalg.inv(np.eye(plant.n) - W / gamma**2)
    A_K = (A - (B2 @ B2.T - (B1 @ B1.T) / gamma**2) @ X
           - Z @ Si @ X @ B2 @ B2.T @ Si)
    B_K = -Z @ Si @ X @ B2 @ Sk
    C_K = B2.T @ X
    z_half, z_neg_half = _z_infinity_roots(W, gamma)
    controller = Controller(
        z_neg_half @ A_K @ z_half,
        z_neg_half @ B_K,
        C_K @ z_half,
        np.zeros((plant.m_u, plant.m_u)),
    )
    closed = close_loop(plant, controller)
    achieved = hinf_norm(closed)
    if achieved >= gamma:
        raise SolverError(
            f"achieved closed-loop norm {achieved:.6g} is not below "
            f"gamma = {gamma}")
    return controller


def _require_lct(plant: Problem2Plant) -> StructuredRealization:
    real = plant.realization
    report = validate_structure(real, "LCT")
    if not report.passed:
        raise StructureError(
            "plant is not lossless: " + ", ".join(report.violations))
    return real


def lct_h2(plant: Problem2Plant) -> Controller:
    """Closed-form H2-optimal controller for a lossless plant.

    The control Riccati solution is the identity, so the law is a copy of
    the plant damped by unit state feedback on both sides; electrically, a
    copy of the network with a 2 ohm resistor across each port pair.
    """
    real = _require_lct(plant)
    basis = controllability_basis(real.A, real.B)
    if basis.shape[1] != real.n:
        raise StructureError(
            "plant has uncontrollable states; reduce_to_controllable first")
    A, B = real.A, real.B
    return Controller(
        A - 2.0 * B @ B.T, B, B.T, np.zeros((real.m, real.m)),
        impl_hint="copy_network_plus_resistors(2)",
    )


def lct_hinf(plant: Problem2Plant) -> Controller:
    """Optimal static H-infinity law for a lossless plant: u = -sqrt(2) y."""
    real = _require_lct(plant)
    m = real.m
    return Controller(
        np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)),
        SQRT2 * np.eye(m),
        impl_hint=f"terminate_resistors({SQRT2!r})",
    )


def lct_coprime(plant: Problem2Plant) -> Controller:
    """Optimally robust law for coprime-factor perturbations: u = -y."""
    real = _require_lct(plant)
    m = real.m
    return Controller(
        np.zeros((0, 0)), np.zeros((0, m)), np.zeros((m, 0)), np.eye(m),
        impl_hint="terminate_resistors(1)",
    )


def _strict_min_eig(block: np.ndarray) -> float:
    if block.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(0.5 * (block + block.T))[0])


def _static_gain(real: StructuredRealization) -> np.ndarray:
    """G(0) = D - C A^{-1} B; raises if A is singular."""
    try:
        shift = real.C @ np.linalg.solve(real.A, real.B) if real.n else 0.0
    except np.linalg.LinAlgError:
        raise SolverError("A is singular; the plant has no static gain") \
            from None
    return real.D - shift


def _lossy_static(plant: Problem3Plant, tag: str) -> Controller:
    real = plant.realization
    if real.class_tag != tag:
        raise StructureError(f"expected an {tag} plant, got {real.class_tag!r}")
    p1, m1 = real.partition.row_split, real.partition.col_split
    B1, B2 = real.B[:, :m1], real.B[:, m1:]
    D11 = real.D[:p1, :m1]
    D22 = real.D[p1:, m1:]
    if tag == "RLT":
        gram = np.block([[-real.A, B2], [B2.T, D22]])
        semidef = D11
    else:
        gram = np.block([[-real.A, B1], [B1.T, D11]])
        semidef = D22
    if _strict_min_eig(gram) <= tau_psd(gram):
        raise StructureError(
            f"{tag} strict passivity condition fails: the damping block is "
            "not positive definite")
    if _strict_min_eig(semidef) < -tau_psd(semidef):
        raise StructureError(
            f"{tag} condition fails: the remaining feedthrough block is "
            "not positive semidefinite")
    gain0 = _static_gain(real)
    D_K = gain0.T
    signs = np.hstack([B1, -B2]) if tag == "RLT" else np.hstack([-B1, B2])
    block_form = real.D.T - real.B.T @ np.linalg.solve(real.A, signs)
    gap = np.max(np.abs(block_form - D_K)) if D_K.size else 0.0
    assert gap < 1e-10 * (1.0 + np.max(np.abs(D_K))), \
        f"static-gain identity violated by {gap:.3e}"
    m, p = real.m, real.p
    return Controller(
        np.zeros((0, 0)), np.zeros((0, p)), np.zeros((m, 0)), D_K,
        impl_hint="dual_network(static termination G(0)^T)",
    )


def rlt_static(plant: Problem3Plant) -> Controller:
    """Optimal static H-infinity law u = -G(0)^T y for strict RLT plants."""
    return _lossy_static(plant, "RLT")


def rct_static(plant: Problem3Plant) -> Controller:
    """Mirror of ``rlt_static`` for strict RCT plants."""
    return _lossy_static(plant, "RCT")


def gamma_star(plant: Problem3Plant) -> float:
    """Smallest achievable closed-loop gain for the (y, u) performance map."""
    real = plant.realization
    if real.n == 0:
        raise SolverError("gamma_star needs a dynamic plant")
    eigs = np.linalg.eigvals(real.A)
    if np.max(eigs.real) >= 0:
        raise SolverError("gamma_star needs a Hurwitz state matrix")
    G0 = _static_gain(real)
    m = G0.shape[1]
    stack = np.vstack([np.eye(m), -G0.T])
    middle = np.linalg.solve(np.eye(m) + G0 @ G0.T, real.C)
    gain = stack @ middle @ np.linalg.solve(real.A, np.eye(real.n))
    if gain.size == 0:
        return 0.0
    return float(np.linalg.svd(gain, compute_uv=False)[0])


def problem3_generalized(plant: Problem3Plant) -> GeneralizedPlant:
    """State-disturbance form with z = (y, u) for a lossy plant.

    The disturbance w is an n-vector entering dx/dt = A x + B u + w,
    so the static optimum's closed-loop gain matches ``gamma_star``.
    """
    real = plant.realization
    n, m, p = real.n, real.m, real.p
    return GeneralizedPlant(
        A=real.A,
        B1=np.eye(n),
        B2=real.B,
        C1=np.vstack([real.C, np.zeros((m, n))]),
        C2=real.C,
        D11=np.zeros((p + m, n)),
        D12=np.vstack([real.D, np.eye(m)]),
        D21=np.zeros((p, n)),
        D22=real.D,
    )


def close_loop(plant, controller: Controller) -> StructuredRealization:
    """Closed performance map T_zw under u = -C_K x_K - D_K y."""
    if isinstance(plant, Problem2Plant):
        plant = embed_problem2(plant)
    elif isinstance(plant, Problem3Plant):
        plant = problem3_generalized(plant)
    if not isinstance(plant, GeneralizedPlant):
        raise StructureError(f"cannot close a loop around {type(plant)!r}")

    D22, D_K = plant.D22, controller.D_K
    coupling = np.eye(plant.m_u) + D_K @ D22
    if np.linalg.cond(coupling) > 1e12:
        raise StructureError(
            "ill-posed feedback: I + D_K D22 is numerically singular")
    S = np.linalg.inv(coupling)
    # u = -S (C_K x_K + D_K C2 x + D_K D21 w)
    u_x = -S @ D_K @ plant.C2
    u_k = -S @ controller.C_K
    u_w = -S @ D_K @ plant.D21
    y_x = plant.C2 + D22 @ u_x
    y_k = D22 @ u_k
    y_w = plant.D21 + D22 @ u_w

    k = controller.order
    A_cl = np.block([
        [plant.A + plant.B2 @ u_x, plant.B2 @ u_k],
        [controller.B_K @ y_x,
         controller.A_K + controller.B_K @ y_k],
    ]) if k else plant.A + plant.B2 @ u_x
    B_cl = np.vstack([
        plant.B1 + plant.B2 @ u_w,
        controller.B_K @ y_w,
    ]) if k else plant.B1 + plant.B2 @ u_w
    C_cl = np.hstack([
        plant.C1 + plant.D12 @ u_x,
        plant.D12 @ u_k,
    ]) if k else plant.C1 + plant.D12 @ u_x
    D_cl = plant.D11 + plant.D12 @ u_w
    return StructuredRealization(A_cl, B_cl, C_cl, D_cl)


def controller_symmetry_residual(controller: Controller,
                                 sigma_int: Signature,
                                 sigma_K: Signature) -> float:
    """Worst violation of the controller's own signed symmetry."""
    M = np.block([
        [-controller.A_K, -controller.B_K],
        [controller.C_K, controller.D_K],
    ])
    sigma = np.concatenate([sigma_int.diagonal(), sigma_K.diagonal()])
    res = sigma[:, None] * M - M.T * sigma[None, :]
    return float(np.max(np.abs(res))) if res.size else 0.0


def serialize_controller(controller: Controller) -> str:
    fields = [
        ("n", str(controller.order)),
        ("m", str(controller.C_K.shape[0])),
        ("p", str(controller.B_K.shape[1])),
        ("A", matrix_text(controller.A_K)),
        ("B", matrix_text(controller.B_K)),
        ("C", matrix_text(controller.C_K)),
        ("D", matrix_text(controller.D_K)),
    ]
    if controller.impl_hint is not None:
        fields.append(("impl_hint", json.dumps(controller.impl_hint)))
    return document_text(fields)


def parse_controller(text: str) -> Controller:
    try:
        doc = json.loads(text)
        n, m, p = int(doc["n"]), int(doc["m"]), int(doc["p"])
        A = np.asarray(doc["A"], dtype=float).reshape(n, n)
        B = np.asarray(doc["B"], dtype=float).reshape(n, p)
        C = np.asarray(doc["C"], dtype=float).reshape(m, n)
        D = np.asarray(doc["D"], dtype=float).reshape(m, p)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise StructureError(f"bad controller document: {exc}") from None
    return Controller(A, B, C, D, impl_hint=doc.get("impl_hint"))
