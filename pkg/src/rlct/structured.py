"""Structured state-space realizations of passive reciprocal networks.

A realization (A, B, C, D) is signature symmetric when there are diagonal
sign matrices Sigma_int and Sigma_ext with

    Sigma M = M^T Sigma,   M + M^T >= 0,

where M = [[-A, -B], [C, D]] and Sigma = diag(Sigma_int, Sigma_ext).  Each
element class (resistor/inductor/capacitor/transformer combinations) pins
additional zero patterns and definiteness conditions on the blocks of M;
``validate_structure`` checks those, ``infer_signatures`` recovers the sign
matrices from the matrices alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, StructureError

# Absolute tolerance for entries that must vanish or coincide.
TAU_STRUCT = 1e-9

# Relative rank cutoff for controllability: sigma_i > n * sigma_1 * RANK_RTOL.
RANK_RTOL = 1e-12

CLASS_TAGS = ("T", "LT", "CT", "LCT", "RT", "RLT", "RCT", "RLCT", "Unstructured")

# Tags whose validation needs to know which external ports carry which sign.
_PARTITIONED_TAGS = ("T", "LT", "CT", "RT", "RLT", "RCT")


def tau_psd(block: np.ndarray) -> float:
    """Semidefiniteness tolerance, scaled by the block's spectral norm."""
    if block.size == 0:
        return 1e-9
    return 1e-9 * (1.0 + float(np.linalg.norm(block, 2)))


@dataclass(frozen=True)
class Signature:
    """Ordered +1/-1 entries; as a diagonal matrix Sigma, Sigma @ Sigma = I."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        for e in entries:
            if e not in (1, -1):
                raise ValueError(f"signature entries must be +1 or -1, got {e}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def diagonal(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())


@dataclass(frozen=True)
class BlockPartition:
    """Split of the external rows/columns into the +1 block (first) and the
    -1 block (rest).  ``row_split`` applies to outputs, ``col_split`` to
    inputs."""

    row_split: int
    col_split: int

    def __post_init__(self):
        if self.row_split < 0 or self.col_split < 0:
            raise ValueError("partition splits must be nonnegative")


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    checks: tuple[ConditionCheck, ...]

    @property
    def violations(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)

    @property
    def worst_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def summary(self) -> str:
        lines = ["pass" if self.passed else "FAIL"]
        for c in self.checks:
            status = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}  (residual {c.residual:.3e})")
        return "\n".join(lines)


def _as_matrix(value, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    a = np.array(value, dtype=float)
    if a.ndim != 2:
        if a.size == 0 and rows is not None and cols is not None and rows * cols == 0:
            a = a.reshape(rows, cols)
        else:
            a = np.atleast_2d(a)
    return a


@dataclass(frozen=True)
class StructuredRealization:
    """State-space quadruple with optional signatures and a class tag.

    Matrices are stored dense and read-only.  When both signatures are
    present the signature-symmetry identity and passivity of M + M^T are
    enforced at construction; when a class tag other than ``Unstructured``
    is given, the tag's structural conditions are enforced as well.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sigma_int: Signature | None = None
    sigma_ext: Signature | None = None
    class_tag: str = "Unstructured"
    partition: BlockPartition | None = None

    def __post_init__(self):
        A = _as_matrix(self.A)
        n = A.shape[0]
        if A.shape != (n, n):
            raise StructureError(f"A must be square, got shape {A.shape}")
        B = _as_matrix(self.B, n, 0)
        if B.shape[0] != n:
            raise StructureError(f"B has {B.shape[0]} rows, expected {n}")
        m = B.shape[1]
        C = _as_matrix(self.C, 0, n)
        if C.shape[1] != n:
            raise StructureError(f"C has {C.shape[1]} columns, expected {n}")
        p = C.shape[0]
        D = _as_matrix(self.D, p, m)
        if D.shape != (p, m):
            raise StructureError(f"D has shape {D.shape}, expected {(p, m)}")
        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if mat.size and not np.all(np.isfinite(mat)):
                raise StructureError(f"{name} contains non-finite entries")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

        if self.class_tag not in CLASS_TAGS:
            raise StructureError(f"unknown class tag {self.class_tag!r}")
        if self.sigma_int is not None and len(self.sigma_int) != n:
            raise StructureError(
                f"sigma_int has {len(self.sigma_int)} entries, expected {n}"
            )
        if self.sigma_ext is not None:
            if p != m:
                raise StructureError("sigma_ext requires a square external map (p = m)")
            if len(self.sigma_ext) != m:
                raise StructureError(
                    f"sigma_ext has {len(self.sigma_ext)} entries, expected {m}"
                )
        if self.partition is not None:
            if self.partition.row_split > p or self.partition.col_split > m:
                raise StructureError("partition split exceeds dimension")

        if self.sigma_int is not None and self.sigma_ext is not None:
            report = _check_signature_pair(self, self.sigma_int, self.sigma_ext)
            if not report.passed:
                raise StructureError(
                    "signature pair inconsistent with matrices: "
                    + ", ".join(report.violations)
                )
        if self.class_tag != "Unstructured":
            report = validate_structure(self, self.class_tag)
            if not report.passed:
                raise StructureError(
                    f"matrices violate the {self.class_tag} structure: "
                    + ", ".join(report.violations)
                )

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def coupling_matrix(self) -> np.ndarray:
        """The matrix M = [[-A, -B], [C, D]] that the signatures conjugate."""
        return np.block([[-self.A, -self.B], [self.C, self.D]])

    def with_tag(self, tag: str, partition: BlockPartition | None = None):
        return StructuredRealization(
            self.A, self.B, self.C, self.D,
            sigma_int=self.sigma_int, sigma_ext=self.sigma_ext,
            class_tag=tag, partition=partition or self.partition,
        )


def _check_zero(name: str, block: np.ndarray) -> ConditionCheck:
    residual = float(np.max(np.abs(block))) if block.size else 0.0
    return ConditionCheck(name, residual < TAU_STRUCT, residual)


def _check_equal(name: str, left: np.ndarray, right: np.ndarray) -> ConditionCheck:
    if left.shape != right.shape:
        return ConditionCheck(name, False, float("inf"))
    residual = float(np.max(np.abs(left - right))) if left.size else 0.0
    return ConditionCheck(name, residual < TAU_STRUCT, residual)


def _check_psd(name: str, block: np.ndarray) -> ConditionCheck:
    if block.size == 0:
        return ConditionCheck(name, True, 0.0)
    sym = 0.5 * (block + block.T)
    lam_min = float(np.linalg.eigvalsh(sym)[0])
    return ConditionCheck(name, lam_min > -tau_psd(block), max(0.0, -lam_min))


def _split_external(real: StructuredRealization, tag: str):
    if real.partition is None:
        raise StructureError(
            f"class {tag} validation needs a block partition "
            "locating the +1 and -1 external blocks"
        )
    p1, m1 = real.partition.row_split, real.partition.col_split
    B1, B2 = real.B[:, :m1], real.B[:, m1:]
    C1, C2 = real.C[:p1, :], real.C[p1:, :]
    D11, D12 = real.D[:p1, :m1], real.D[:p1, m1:]
    D21, D22 = real.D[p1:, :m1], real.D[p1:, m1:]
    return B1, B2, C1, C2, D11, D12, D21, D22


def _check_signature_pair(real, sigma_int: Signature, sigma_ext: Signature):
    M = real.coupling_matrix()
    sigma = np.concatenate([sigma_int.diagonal(), sigma_ext.diagonal()])
    Sigma = np.diag(sigma)
    sym_res = Sigma @ M - M.T @ Sigma
    checks = (
        _check_zero("signature symmetry Sigma M = M^T Sigma", sym_res),
        _check_psd("passivity M + M^T >= 0", M + M.T),
    )
    return ValidationReport(all(c.passed for c in checks), checks)


def validate_structure(real: StructuredRealization, tag: str | None = None) -> ValidationReport:
    """Check the structural conditions of a realization class.

    Returns a report with one entry per condition; ``passed`` is True only
    if every zero pattern holds to TAU_STRUCT and every required block is
    positive semidefinite to its scaled tolerance.
    """
    tag = tag if tag is not None else real.class_tag
    if tag not in CLASS_TAGS:
        raise StructureError(f"unknown class tag {tag!r}")

    if tag == "Unstructured":
        return ValidationReport(True, ())

    if tag == "RLCT":
        if real.sigma_int is not None and real.sigma_ext is not None:
            return _check_signature_pair(real, real.sigma_int, real.sigma_ext)
        inferred = infer_signatures(real)
        if inferred is None:
            checks = (ConditionCheck(
                "RLCT: a consistent signature pair exists", False, float("inf"),
            ),)
            return ValidationReport(False, checks)
        return _check_signature_pair(real, inferred[0], inferred[1])

    if tag == "LCT":
        checks = (
            _check_zero("LCT: A = -A^T", real.A + real.A.T),
            _check_equal("LCT: B = C^T", real.B, real.C.T),
            _check_zero("LCT: D = -D^T", real.D + real.D.T),
        )
        return ValidationReport(all(c.passed for c in checks), checks)

    # The remaining tags constrain individual external blocks.
    B1, B2, C1, C2, D11, D12, D21, D22 = _split_external(real, tag)
    checks: list[ConditionCheck] = []

    if tag in ("T", "RT"):
        checks.append(ConditionCheck(
            f"{tag}: state dimension is zero", real.n == 0, float(real.n)))
    if tag in ("LT", "CT"):
        checks.append(_check_zero(f"{tag}: A = 0", real.A))
    if tag in ("RLT", "RCT"):
        checks.append(_check_zero(f"{tag}: A = A^T", real.A - real.A.T))

    if tag == "LT":
        checks.append(_check_zero("LT: B2 = 0", B2))
        checks.append(_check_equal("LT: C1 = B1^T", C1, B1.T))
        checks.append(_check_zero("LT: C2 = 0", C2))
    elif tag == "CT":
        checks.append(_check_zero("CT: B1 = 0", B1))
        checks.append(_check_zero("CT: C1 = 0", C1))
        checks.append(_check_equal("CT: C2 = B2^T", C2, B2.T))
    elif tag == "RLT":
        checks.append(_check_equal("RLT: C1 = B1^T", C1, B1.T))
        checks.append(_check_equal("RLT: C2 = -B2^T", C2, -B2.T))
    elif tag == "RCT":
        checks.append(_check_equal("RCT: C1 = -B1^T", C1, -B1.T))
        checks.append(_check_equal("RCT: C2 = B2^T", C2, B2.T))

    checks.append(_check_equal(f"{tag}: D21 = -D12^T", D21, -D12.T))
    if tag in ("T", "LT", "CT"):
        checks.append(_check_zero(f"{tag}: D11 = 0", D11))
        checks.append(_check_zero(f"{tag}: D22 = 0", D22))
    else:
        checks.append(_check_zero(f"{tag}: D11 = D11^T", D11 - D11.T))
        checks.append(_check_zero(f"{tag}: D22 = D22^T", D22 - D22.T))
        checks.append(_check_psd(f"{tag}: D11 >= 0", D11))
        checks.append(_check_psd(f"{tag}: D22 >= 0", D22))
        if tag == "RLT":
            dissip = np.block([[-real.A, B2], [B2.T, D22]])
            checks.append(_check_psd("RLT: [-A B2; B2^T D22] >= 0", dissip))
        elif tag == "RCT":
            dissip = np.block([[-real.A, B1], [B1.T, D11]])
            checks.append(_check_psd("RCT: [-A B1; B1^T D11] >= 0", dissip))

    return ValidationReport(all(c.passed for c in checks), tuple(checks))


class _ParityUnionFind:
    """Union-find tracking the relative sign of each index to its root."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.parity = [0] * size  # 0: same sign as root, 1: opposite

    def find(self, i: int) -> tuple[int, int]:
        if self.parent[i] == i:
            return i, 0
        root, par = self.find(self.parent[i])
        self.parent[i] = root
        self.parity[i] ^= par
        return root, self.parity[i]

    def union(self, i: int, j: int, parity: int) -> bool:
        ri, pi = self.find(i)
        rj, pj = self.find(j)
        if ri == rj:
            return (pi ^ pj) == parity
        self.parent[rj] = ri
        self.parity[rj] = pi ^ pj ^ parity
        return True


def infer_signatures(real: StructuredRealization):
    """Recover (Sigma_int, Sigma_ext) from the matrices, or None.

    Propagates sigma_i * M_ij = sigma_j * M_ji over all entry pairs of
    M = [[-A, -B], [C, D]].  Components untouched by any constraint default
    to +1, and the result is normalized so the first external entry is +1.
    """
    if real.p != real.m:
        raise StructureError("signature inference requires p = m")
    n, m = real.n, real.m
    M = real.coupling_matrix()
    size = n + m
    uf = _ParityUnionFind(size)
    for i in range(size):
        for j in range(i + 1, size):
            a, b = M[i, j], M[j, i]
            if abs(a) < TAU_STRUCT and abs(b) < TAU_STRUCT:
                continue
            if abs(a - b) < TAU_STRUCT:
                ok = uf.union(i, j, 0)
            elif abs(a + b) < TAU_STRUCT:
                ok = uf.union(i, j, 1)
            else:
                return None
            if not ok:
                return None

    root_sign: dict[int, int] = {}
    if m > 0:
        root, par = uf.find(n)
        root_sign[root] = 1 if par == 0 else -1
    sigma = np.zeros(size)
    for i in range(size):
        root, par = uf.find(i)
        base = root_sign.setdefault(root, 1)
        sigma[i] = base * (1 if par == 0 else -1)

    Sigma = np.diag(sigma)
    if np.max(np.abs(Sigma @ M - M.T @ Sigma)) >= TAU_STRUCT:
        return None
    sig_int = Signature(tuple(int(s) for s in sigma[:n]))
    sig_ext = Signature(tuple(int(s) for s in sigma[n:]))
    return sig_int, sig_ext


def transfer_eval(real: StructuredRealization, s: complex) -> np.ndarray:
    """Evaluate C (sI - A)^{-1} B + D at a single complex point."""
    if real.n == 0:
        return real.D.astype(complex)
    lhs = s * np.eye(real.n) - real.A
    try:
        x = np.linalg.solve(lhs, real.B.astype(complex))
    except np.linalg.LinAlgError:
        err = SolverError(f"resolvent is singular at s = {s}")
        err.s = s
        raise err from None
    return real.C @ x + real.D


def controllability_basis(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the controllability subspace (SVD rank cut)."""
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    ctrb = np.hstack(blocks) if B.size else np.zeros((n, 0))
    if ctrb.shape[1] == 0:
        return np.zeros((n, 0))
    U, svals, _ = np.linalg.svd(ctrb, full_matrices=True)
    if svals.size == 0 or svals[0] == 0.0:
        return np.zeros((n, 0))
    rank = int(np.sum(svals > n * svals[0] * RANK_RTOL))
    return U[:, :rank]


def reduce_to_controllable(real: StructuredRealization) -> StructuredRealization:
    """Project onto the controllability subspace, preserving the class.

    For the supported classes A = +/-A^T and C = +/-Sigma_ext B^T, so the
    projected realization is observable as well and keeps the tag.
    """
    tag = real.class_tag
    if tag in ("RLCT", "Unstructured"):
        raise StructureError(f"controllable reduction not supported for tag {tag}")
    if real.n == 0:
        return real
    Q1 = controllability_basis(real.A, real.B)
    r = Q1.shape[1]
    if tag in ("LT", "RLT"):
        sig_int = Signature((-1,) * r)
    elif tag in ("CT", "RCT"):
        sig_int = Signature((1,) * r)
    else:
        sig_int = None
    return StructuredRealization(
        Q1.T @ real.A @ Q1, Q1.T @ real.B, real.C @ Q1, real.D,
        sigma_int=sig_int, sigma_ext=real.sigma_ext,
        class_tag=tag, partition=real.partition,
    )


def _shaped(value, rows: int, cols: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros((rows, cols))
    mat = _as_matrix(value, rows, cols)
    if mat.shape != (rows, cols):
        raise StructureError(f"{name} has shape {mat.shape}, expected {(rows, cols)}")
    return mat


def _require_psd(name: str, block: np.ndarray):
    check = _check_psd(name, block)
    if not check.passed:
        raise StructureError(f"{name} violated: min eigenvalue -{check.residual:.6e}")


def build_lct(a12, b12, b21, partition: BlockPartition | None = None, d12=None):
    """Assemble a lossless inductor/capacitor/transformer realization.

    ``a12`` couples the +1 states (rows) to the -1 states (columns); ``b12``
    feeds the -1 external block into the +1 states and ``b21`` the +1
    external block into the -1 states.  ``d12`` is the optional feedthrough
    corner between the two external blocks.
    """
    a12 = _as_matrix(a12) if a12 is not None else np.zeros((0, 0))
    k, j = a12.shape
    b12 = _as_matrix(b12, k, 0) if b12 is not None else np.zeros((k, 0))
    b21 = _as_matrix(b21, j, 0) if b21 is not None else np.zeros((j, 0))
    if b12.shape[0] != k or b21.shape[0] != j:
        raise StructureError(
            f"b12/b21 row counts {b12.shape[0]}/{b21.shape[0]} do not match "
            f"a12 shape {a12.shape}"
        )
    m1, m2 = b21.shape[1], b12.shape[1]
    if partition is None:
        partition = BlockPartition(m1, m1)
    elif partition.col_split != m1 or partition.row_split != m1:
        raise StructureError(
            f"partition {partition} does not match b21 width {m1}"
        )
    d12 = _shaped(d12, m1, m2, "d12")

    A = np.block([[np.zeros((k, k)), a12], [-a12.T, np.zeros((j, j))]])
    B = np.block([[np.zeros((k, m1)), b12], [b21, np.zeros((j, m2))]])
    D = np.block([[np.zeros((m1, m1)), d12], [-d12.T, np.zeros((m2, m2))]])
    return StructuredRealization(
        A, B, B.T, D,
        sigma_int=Signature((1,) * k + (-1,) * j),
        sigma_ext=Signature((1,) * m1 + (-1,) * m2),
        class_tag="LCT", partition=partition,
    )


def _build_lossy(a, b1, b2, d11, d12, d22, internal_sign: int):
    a = _as_matrix(a) if a is not None else np.zeros((0, 0))
    n = a.shape[0]
    if a.size and a.shape != (n, n):
        raise StructureError(f"A must be square, got {a.shape}")
    m1 = (_as_matrix(b1).shape[1] if b1 is not None
          else (_as_matrix(d11).shape[0] if d11 is not None else 0))
    m2 = (_as_matrix(b2).shape[1] if b2 is not None
          else (_as_matrix(d22).shape[0] if d22 is not None else 0))
    b1 = _shaped(b1, n, m1, "B1")
    b2 = _shaped(b2, n, m2, "B2")
    d11 = _shaped(d11, m1, m1, "D11")
    d12 = _shaped(d12, m1, m2, "D12")
    d22 = _shaped(d22, m2, m2, "D22")

    if n and np.max(np.abs(a - a.T)) >= TAU_STRUCT:
        raise StructureError("A must be symmetric for the lossy classes")
    tag = "RLT" if internal_sign < 0 else "RCT"
    if tag == "RLT":
        _require_psd("RLT: [-A B2; B2^T D22] >= 0", np.block([[-a, b2], [b2.T, d22]]))
        _require_psd("RLT: D11 >= 0", d11)
        C = np.vstack([b1.T, -b2.T])
    else:
        _require_psd("RCT: [-A B1; B1^T D11] >= 0", np.block([[-a, b1], [b1.T, d11]]))
        _require_psd("RCT: D22 >= 0", d22)
        C = np.vstack([-b1.T, b2.T])

    B = np.hstack([b1, b2])
    D = np.block([[d11, d12], [-d12.T, d22]])
    return StructuredRealization(
        a, B, C, D,
        sigma_int=Signature((internal_sign,) * n),
        sigma_ext=Signature((1,) * m1 + (-1,) * m2),
        class_tag=tag, partition=BlockPartition(m1, m1),
    )


def build_rlt(a, b1, b2, d11, d12, d22):
    """Assemble a resistor/inductor/transformer realization (Sigma_int = -I)."""
    return _build_lossy(a, b1, b2, d11, d12, d22, internal_sign=-1)


def build_rct(a, b1, b2, d11, d12, d22):
    """Assemble a resistor/capacitor/transformer realization (Sigma_int = +I)."""
    return _build_lossy(a, b1, b2, d11, d12, d22, internal_sign=+1)


# ---------------------------------------------------------------------------
# Serialization: JSON documents, floats printed with 17 significant digits.

def fmt_float(value: float) -> str:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value}")
    return f"{value:.17g}"


def matrix_text(mat: np.ndarray) -> str:
    mat = np.atleast_2d(mat)
    if mat.shape[0] == 0:
        return "[]"
    rows = ", ".join(
        "[" + ", ".join(fmt_float(v) for v in row) + "]" for row in mat
    )
    return "[" + rows + "]"


def document_text(fields: list[tuple[str, str]]) -> str:
    body = ",\n".join(f'  "{key}": {value}' for key, value in fields)
    return "{\n" + body + "\n}\n"


def realization_fields(real: StructuredRealization) -> list[tuple[str, str]]:
    fields = [
        ("n", str(real.n)),
        ("m", str(real.m)),
        ("p", str(real.p)),
        ("A", matrix_text(real.A)),
        ("B", matrix_text(real.B)),
        ("C", matrix_text(real.C)),
        ("D", matrix_text(real.D)),
    ]
    if real.sigma_int is not None:
        fields.append(("sigma_int", json.dumps(list(real.sigma_int))))
    if real.sigma_ext is not None:
        fields.append(("sigma_ext", json.dumps(list(real.sigma_ext))))
    fields.append(("class_tag", json.dumps(real.class_tag)))
    if real.partition is not None:
        fields.append(("partition", json.dumps({
            "row_split": real.partition.row_split,
            "col_split": real.partition.col_split,
        })))
    return fields


def serialize_realization(real: StructuredRealization) -> str:
    return document_text(realization_fields(real))


def _matrix_from(doc, key: str, rows: int, cols: int) -> np.ndarray:
    return np.asarray(doc[key], dtype=float).reshape(rows, cols)


def parse_realization(text: str) -> StructuredRealization:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"malformed realization document: {exc}") from None
    try:
        n, m, p = int(doc["n"]), int(doc["m"]), int(doc["p"])
        A = _matrix_from(doc, "A", n, n)
        B = _matrix_from(doc, "B", n, m)
        C = _matrix_from(doc, "C", p, n)
        D = _matrix_from(doc, "D", p, m)
    except (KeyError, ValueError) as exc:
        raise StructureError(f"bad realization document: {exc}") from None
    sig_int = (Signature(tuple(int(v) for v in doc["sigma_int"]))
               if "sigma_int" in doc else None)
    sig_ext = (Signature(tuple(int(v) for v in doc["sigma_ext"]))
               if "sigma_ext" in doc else None)
    part = None
    if "partition" in doc:
        part = BlockPartition(int(doc["partition"]["row_split"]),
                              int(doc["partition"]["col_split"]))
    return StructuredRealization(
        A, B, C, D, sigma_int=sig_int, sigma_ext=sig_ext,
        class_tag=doc.get("class_tag", "Unstructured"), partition=part,
    )
