"""Network model builders: Kron reduction, swing-equation grids, and the
constrained least-squares circuit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import StructureError
from ..structured import BlockPartition, Signature, StructuredRealization
from .netlist import Element, Netlist, validate_netlist

_LAPLACIAN_TOL = 1e-9


def _check_laplacian(L: np.ndarray) -> None:
    scale = 1.0 + np.max(np.abs(L), initial=0.0)
    if np.max(np.abs(L - L.T), initial=0.0) > _LAPLACIAN_TOL * scale:
        raise StructureError("Laplacian must be symmetric")
    if np.max(np.abs(L.sum(axis=1)), initial=0.0) > _LAPLACIAN_TOL * scale:
        raise StructureError("Laplacian rows must sum to zero")
    off = L - np.diag(np.diag(L))
    if off.size and np.max(off) > _LAPLACIAN_TOL * scale:
        raise StructureError("Laplacian off-diagonal entries must be <= 0")


def kron_reduce(L, boundary) -> np.ndarray:
    """Schur complement of the interior block: Y = L11 - L12 L22^{-1} L21."""
    L = np.atleast_2d(np.asarray(L, float))
    _check_laplacian(L)
    n = L.shape[0]
    boundary = list(dict.fromkeys(int(i) for i in boundary))
    if any(i < 0 or i >= n for i in boundary):
        raise StructureError(f"boundary indices out of range for {n} nodes")
    interior = [i for i in range(n) if i not in boundary]
    L11 = L[np.ix_(boundary, boundary)]
    if not interior:
        return L11.copy()
    L12 = L[np.ix_(boundary, interior)]
    L22 = L[np.ix_(interior, interior)]
    svals = np.linalg.svd(L22, compute_uv=False)
    if svals[-1] < 1e-12 * max(svals[0], 1.0):
        raise StructureError(
            "interior block is singular (an interior node is isolated from "
            "the boundary)")
    Y = L11 - L12 @ np.linalg.solve(L22, L12.T)
    Y = 0.5 * (Y + Y.T)
    return Y


def _laplacian_edges(Y: np.ndarray):
    """Edge list (i, j, weight) from the negated off-diagonals."""
    n = Y.shape[0]
    scale = 1.0 + np.max(np.abs(Y), initial=0.0)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            w = -Y[i, j]
            if w > _LAPLACIAN_TOL * scale:
                edges.append((i, j, float(w)))
    return edges


def build_swing_grid(L, renewable, inertias) -> StructuredRealization:
    """Lossless realization of the frequency-to-power map of a swing-equation
    grid.

    Buses in ``renewable`` are inputs (their frequency is driven and the
    drawn power is the output); buses with an entry in ``inertias`` are
    synchronous machines; all remaining buses are passive and eliminated by
    Kron reduction.  States are the scaled line flows of the reduced network
    followed by the scaled machine frequencies.
    """
    L = np.atleast_2d(np.asarray(L, float))
    n = L.shape[0]
    renewable = list(dict.fromkeys(int(i) for i in renewable))
    if not renewable:
        raise StructureError("renewable bus set is empty")
    machines = sorted(int(k) for k in inertias)
    if set(machines) & set(renewable):
        raise StructureError("a bus cannot be both renewable and a machine")
    M = np.array([float(inertias[k]) for k in machines])
    if np.any(M <= 0):
        raise StructureError("machine inertias must be positive")

    boundary = renewable + machines
    Y = kron_reduce(L, boundary)
    edges = _laplacian_edges(Y)
    nb = len(boundary)

    # connectivity of the reduced graph (all driven and machine buses must
    # interact)
    reach = {0}
    frontier = [0]
    adj = {i: set() for i in range(nb)}
    for i, j, _ in edges:
        adj[i].add(j)
        adj[j].add(i)
    while frontier:
        cur = frontier.pop()
        for nxt in adj[cur]:
            if nxt not in reach:
                reach.add(nxt)
                frontier.append(nxt)
    if reach != set(range(nb)):
        raise StructureError("renewable/machine buses are not connected")

    nl = len(edges)
    m = len(renewable)
    nc = len(machines)
    inc = np.zeros((nb, nl))
    w = np.zeros(nl)
    for e, (i, j, weight) in enumerate(edges):
        inc[i, e] = 1.0
        inc[j, e] = -1.0
        w[e] = weight
    sqrt_w = np.sqrt(w)
    inc_r = inc[:m, :]
    inc_s = inc[m:, :]
    A12 = (sqrt_w[:, None] * inc_s.T) / np.sqrt(M)[None, :] if nc else \
        np.zeros((nl, 0))
    B1 = sqrt_w[:, None] * inc_r.T

    A = np.block([
        [np.zeros((nl, nl)), A12],
        [-A12.T, np.zeros((nc, nc))],
    ])
    B = np.vstack([B1, np.zeros((nc, m))])
    return StructuredRealization(
        A, B, B.T, np.zeros((m, m)),
        sigma_int=Signature((-1,) * nl + (1,) * nc),
        sigma_ext=Signature((1,) * m),
        class_tag="LCT",
        partition=BlockPartition(m, m),
    )


def swing_grid_netlist(L, renewable, inertias, series_resistance=0.0) -> Netlist:
    """Electrical analogue of the swing grid: inductors 1/b_ij for the lines,
    a capacitor M_k to ground per machine, a port per renewable bus, and an
    optional series resistor at each port."""
    L = np.atleast_2d(np.asarray(L, float))
    _check_laplacian(L)
    renewable = list(dict.fromkeys(int(i) for i in renewable))
    machines = sorted(int(k) for k in inertias)

    def bus(i: int) -> str:
        return f"b{i}"

    nodes = [bus(i) for i in range(L.shape[0])] + ["0"]
    elements = []
    for i, j, w in _laplacian_edges(L):
        elements.append(Element("L", (bus(i), bus(j)), 1.0 / w))
    for k in machines:
        elements.append(Element("C", (bus(k), "0"), float(inertias[k])))
    ports = []
    for k in renewable:
        if series_resistance > 0.0:
            term = f"t{k}"
            nodes.append(term)
            elements.append(Element("R", (term, bus(k)), float(series_resistance)))
            ports.append((term, "0"))
        else:
            ports.append((bus(k), "0"))
    net = Netlist(tuple(nodes), tuple(elements), tuple(ports))
    validate_netlist(net)
    return net


@dataclass(frozen=True)
class LeastSquaresCircuit:
    """Lossless plant for min 0.5 |A_ls x - b|^2 s.t. C_ls x = d, plus the
    reference-input matrices.

    The dynamics are dx/dt = A x + B (u + w1 - r1) + b_r2 r2 with (u, y)
    forming the lossless port channels of ``realization``.
    """

    realization: StructuredRealization
    b_r2: np.ndarray
    a_ls: np.ndarray
    c_ls: np.ndarray
    rank_warnings: tuple[str, ...]


def build_least_squares_circuit(A_ls, C_ls=None) -> LeastSquaresCircuit:
    A_ls = np.atleast_2d(np.asarray(A_ls, float))
    m_rows, n_cols = A_ls.shape
    if C_ls is None:
        C_ls = np.zeros((0, n_cols))
    C_ls = np.atleast_2d(np.asarray(C_ls, float))
    if C_ls.size == 0:
        C_ls = C_ls.reshape(0, n_cols)
    if C_ls.shape[1] != n_cols:
        raise StructureError(
            f"C_ls has {C_ls.shape[1]} columns, expected {n_cols}")
    p = C_ls.shape[0]

    warnings = []
    stacked = np.vstack([A_ls, C_ls])
    if np.linalg.matrix_rank(stacked) < n_cols:
        warnings.append("stacked [A_ls; C_ls] is column-rank deficient: the "
                        "least-squares solution is not unique")
    if p and np.linalg.matrix_rank(C_ls) < p:
        warnings.append("C_ls is row-rank deficient: constraints may be "
                        "inconsistent or redundant")

    n = n_cols + p
    A = np.block([
        [np.zeros((n_cols, n_cols)), -C_ls.T],
        [C_ls, np.zeros((p, p))],
    ])
    B = np.vstack([A_ls.T, np.zeros((p, m_rows))])
    C = np.hstack([A_ls, np.zeros((m_rows, p))])
    real = StructuredRealization(
        A, B, C, np.zeros((m_rows, m_rows)),
        sigma_int=Signature((-1,) * n_cols + (1,) * p) if n else None,
        sigma_ext=Signature((1,) * m_rows) if m_rows else None,
        class_tag="LCT",
        partition=BlockPartition(m_rows, m_rows),
    )
    b_r2 = np.vstack([np.zeros((n_cols, p)), np.eye(p)])
    return LeastSquaresCircuit(real, b_r2, A_ls, C_ls, tuple(warnings))
