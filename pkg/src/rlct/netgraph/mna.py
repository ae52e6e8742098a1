"""Modified nodal analysis: descriptor models and the impedance oracle.

Unknowns are the non-ground node voltages plus one branch current per
inductor, two per ideal transformer, and one per voltage-driven port.
Capacitors stamp into E, conductances into A.  The input is the driven
quantity per port and the output the complementary one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import ImproperBehaviorError, NetlistError, SolverError, StructureError
from ..structured import StructuredRealization, transfer_eval
from .netlist import Netlist

_PROBE_SEED = 20240408


@dataclass(frozen=True)
class DescriptorModel:
    """Pencil model E dx/dt = A x + B u, y = C x + D u (E may be singular)."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def n_d(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


def _normalize_drive(drive, n_ports: int) -> tuple[str, ...]:
    if isinstance(drive, str):
        drive = (drive,) * n_ports
    drive = tuple(drive)
    if len(drive) != n_ports:
        raise NetlistError(
            f"drive list has {len(drive)} entries for {n_ports} ports")
    for d in drive:
        if d not in ("current", "voltage"):
            raise NetlistError(f"drive must be 'current' or 'voltage', got {d!r}")
    return drive


def _reference_node(net: Netlist) -> str:
    if "0" in net.nodes:
        return "0"
    if net.ports:
        return net.ports[0][1]
    raise StructureError("no ground node '0' and no port to set a reference")


def mna_descriptor(net: Netlist, drive="current") -> DescriptorModel:
    drive = _normalize_drive(drive, len(net.ports))
    ref = _reference_node(net)
    vidx = {name: i for i, name in enumerate(n for n in net.nodes if n != ref)}
    nv = len(vidx)

    extra = 0
    for el in net.elements:
        if el.kind == "L":
            extra += 1
        elif el.kind == "T":
            extra += 2
    extra += sum(1 for d in drive if d == "voltage")

    n_d = nv + extra
    m = len(net.ports)
    E = np.zeros((n_d, n_d))
    A = np.zeros((n_d, n_d))
    B = np.zeros((n_d, m))
    C = np.zeros((m, n_d))
    D = np.zeros((m, m))

    def kcl(node: str, col: int, sign: float, into=A):
        """Add sign * x[col] to the right-hand side of node's KCL row."""
        if node != ref:
            into[vidx[node], col] += sign

    def volt(row: int, node: str, sign: float, into=A):
        if node != ref:
            into[row, vidx[node]] += sign

    branch = nv
    for el in net.elements:
        if el.kind == "R":
            g = 1.0 / el.value
            a, b = el.nodes
            # current out of a: g (va - vb); moved to the A side negated
            for node, other in ((a, b), (b, a)):
                if node != ref:
                    A[vidx[node], vidx[node]] -= g
                    if other != ref:
                        A[vidx[node], vidx[other]] += g
        elif el.kind == "C":
            c = el.value
            a, b = el.nodes
            for node, other in ((a, b), (b, a)):
                if node != ref:
                    E[vidx[node], vidx[node]] += c
                    if other != ref:
                        E[vidx[node], vidx[other]] -= c
        elif el.kind == "L":
            a, b = el.nodes
            row = branch
            branch += 1
            kcl(a, row, -1.0)
            kcl(b, row, +1.0)
            E[row, row] = el.value
            volt(row, a, +1.0)
            volt(row, b, -1.0)
        elif el.kind == "T":
            n1p, n1m, n2p, n2m = el.nodes
            i1, i2 = branch, branch + 1
            branch += 2
            kcl(n1p, i1, -1.0)
            kcl(n1m, i1, +1.0)
            kcl(n2p, i2, -1.0)
            kcl(n2m, i2, +1.0)
            # v1 = ratio * v2
            volt(i1, n1p, +1.0)
            volt(i1, n1m, -1.0)
            volt(i1, n2p, -el.value)
            volt(i1, n2m, +el.value)
            # i2 = -ratio * i1
            A[i2, i2] = 1.0
            A[i2, i1] = el.value

    for k, ((a, b), dv) in enumerate(zip(net.ports, drive)):
        if dv == "current":
            if a != ref:
                B[vidx[a], k] += 1.0
            if b != ref:
                B[vidx[b], k] -= 1.0
            volt(k, a, +1.0, into=C)
            volt(k, b, -1.0, into=C)
        else:
            row = branch
            branch += 1
            kcl(a, row, +1.0)
            kcl(b, row, -1.0)
            volt(row, a, +1.0)
            volt(row, b, -1.0)
            B[row, k] = -1.0
            C[k, row] = 1.0

    model = DescriptorModel(E, A, B, C, D)
    _check_regular(model)
    return model


def _check_regular(d: DescriptorModel) -> None:
    if d.n_d == 0:
        return
    rng = np.random.default_rng(_PROBE_SEED)
    probes = []
    for _ in range(3):
        mag = 10.0 ** rng.uniform(-1.0, 1.0)
        ang = rng.uniform(0.0, 2.0 * np.pi)
        probes.append(mag * np.exp(1j * ang))
    for s in probes:
        pencil = s * d.E - d.A
        svals = np.linalg.svd(pencil, compute_uv=False)
        if svals[-1] > 1e-12 * max(svals[0], 1.0):
            return
    raise StructureError(
        "irregular pencil: singular at probes "
        + ", ".join(f"{s:.6g}" for s in probes)
    )


def transfer_of_descriptor(d: DescriptorModel, s: complex) -> np.ndarray:
    pencil = s * d.E - d.A
    try:
        X = np.linalg.solve(pencil.astype(complex), d.B.astype(complex))
    except np.linalg.LinAlgError:
        err = SolverError(f"pencil is singular at s = {s}")
        err.s = s
        raise err from None
    return d.C @ X + d.D


def impedance_at(net: Netlist, s: complex, drive="current") -> np.ndarray:
    """Port response matrix at s by direct complex solve (the ground-truth
    oracle: impedance for current drive, admittance for voltage drive)."""
    return transfer_of_descriptor(mna_descriptor(net, drive), s)


def descriptor_to_statespace(d: DescriptorModel) -> StructuredRealization:
    """Deflate the infinite-frequency part of the pencil and return an
    ordinary state-space model with the same transfer function.

    Raises ImproperBehaviorError when the pencil has a higher-index
    infinite block (the response then differentiates the input).
    """
    n_d = d.n_d
    if n_d == 0:
        return StructuredRealization(
            np.zeros((0, 0)), np.zeros((0, d.m)), np.zeros((d.p, 0)), d.D)

    def finite(alpha, beta):
        return np.abs(beta) > 1e-8 * np.sqrt(np.abs(alpha) ** 2 + np.abs(beta) ** 2)

    AA, BB, alpha, beta, Q, Z = scipy.linalg.ordqz(
        d.A, d.E, sort=finite, output="real")
    k = int(np.count_nonzero(finite(alpha, beta)))

    T22 = BB[k:, k:]
    if T22.size and np.linalg.norm(T22, "fro") > 1e-8 * (
            1.0 + np.linalg.norm(BB, "fro")):
        raise ImproperBehaviorError(
            "improper behavior: the pencil's infinite block has index > 1 "
            "(e.g. a voltage-driven capacitor loop)")

    Bt = Q.T @ d.B
    Ct = d.C @ Z
    S11, S12, S22 = AA[:k, :k], AA[:k, k:], AA[k:, k:]
    T11, T12 = BB[:k, :k], BB[:k, k:]
    B1t, B2t = Bt[:k, :], Bt[k:, :]
    C1t, C2t = Ct[:, :k], Ct[:, k:]

    if k < n_d:
        try:
            G = np.linalg.solve(S22, B2t)
        except np.linalg.LinAlgError:
            raise SolverError("deflation failed: singular infinite block") \
                from None
    else:
        G = np.zeros((0, d.m))

    if k:
        H = np.linalg.solve(T11, T12 @ G)
        A_ss = np.linalg.solve(T11, S11)
        B_ss = np.linalg.solve(T11, B1t - S12 @ G) + A_ss @ H
        C_ss = C1t
        D_ss = d.D + C1t @ H - C2t @ G
    else:
        A_ss = np.zeros((0, 0))
        B_ss = np.zeros((0, d.m))
        C_ss = np.zeros((d.p, 0))
        D_ss = d.D - C2t @ G

    real = StructuredRealization(A_ss, B_ss, C_ss, D_ss)
    _self_check(d, real)
    return real


def _self_check(d: DescriptorModel, real: StructuredRealization) -> None:
    rng = np.random.default_rng(7)
    checked = 0
    attempts = 0
    while checked < 10 and attempts < 40:
        attempts += 1
        s = complex(rng.uniform(0.3, 3.0), rng.uniform(-3.0, 3.0))
        try:
            ref = transfer_of_descriptor(d, s)
            got = transfer_eval(real, s)
        except (SolverError, np.linalg.LinAlgError):
            continue
        checked += 1
        rel = np.linalg.norm(got - ref) / (1.0 + np.linalg.norm(ref))
        if rel > 1e-8:
            raise SolverError(
                f"state-space extraction self-check failed at s = {s:.4g} "
                f"(relative error {rel:.3e})")
    if checked < 10:
        raise SolverError("state-space extraction self-check could not probe")
