"""Command line front end for the circuit control toolchain.

Subcommands
-----------
parse       read a netlist and report its composition
realize     netlist -> state-space realization, checked against the
            network oracle at ten frequencies
synthesize  realization -> optimal controller document
verify      plant + controller -> closed-loop norms and margin
lsq         min ||A x - b|| s.t. C x = d through the settled circuit
grid        swing-equation plant and its distributed controller netlist
dual        planar dual of an embedded resistor network

Every command accepts ``--out PATH`` for its primary document and
``--trace PATH`` for a CSV table of supporting numbers.  Traces carry a
header row and 17-significant-digit floats, so reading them back yields
bit-identical values.  Without --out the document goes to stdout and
auxiliary report lines go to stderr; with --out the roles swap so that
stdout is always clean for piping.

Failures exit with the code of the error class: generic 1, netlist
parse 2, structural violation 3, solver failure 4, nonconvergence 5.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .errors import RlctError, SolverError, StructureError
from .netgraph import (
    build_swing_grid,
    descriptor_to_statespace,
    impedance_at,
    mna_descriptor,
    parse_netlist,
    planar_dual,
    serialize_netlist,
    swing_grid_netlist,
)
from .riccati import h2_norm, hinf_norm
from .sim import kkt_residual, least_squares_loop, simulate, solve_constrained_ls
from .structured import (
    StructuredRealization,
    controllability_basis,
    fmt_float,
    infer_signatures,
    parse_realization,
    reduce_to_controllable,
    serialize_realization,
    transfer_eval,
    validate_structure,
)
from .synthesis import (
    Problem2Plant,
    Problem3Plant,
    close_loop,
    embed_problem2,
    gamma_star,
    h2_symmetric,
    hinf_symmetric,
    lct_h2,
    lct_hinf,
    parse_controller,
    rct_static,
    rlt_static,
    serialize_controller,
)

PROBE_OMEGAS = np.logspace(-1.0, 2.0, 10)
ORACLE_RTOL = 1e-8


# ---------------------------------------------------------------------------
# small I/O helpers

def _read_text(path: str) -> str:
    return Path(path).read_text()


def _load_array(path: str, ndim: int) -> np.ndarray:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as err:
        raise RlctError(f"bad JSON in {path}: {err}") from None
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as err:
        raise RlctError(f"{path} is not a numeric array: {err}") from None
    if ndim == 1:
        return arr.reshape(-1)
    return np.atleast_2d(arr)


def _load_inertias(path: str) -> dict:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as err:
        raise RlctError(f"bad JSON in {path}: {err}") from None
    if not isinstance(data, dict):
        raise RlctError(
            f"{path} must map bus indices to inertias, e.g. {{\"2\": 1.5}}")
    try:
        return {int(k): float(v) for k, v in data.items()}
    except (TypeError, ValueError) as err:
        raise RlctError(f"bad inertia table in {path}: {err}") from None


def _emit(args, document: str, report: list[str]) -> None:
    if not document.endswith("\n"):
        document += "\n"
    if args.out:
        Path(args.out).write_text(document)
        for line in report:
            print(line)
    else:
        sys.stdout.write(document)
        for line in report:
            print(line, file=sys.stderr)


def _write_trace(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _response_trace(path: str, label: str, at) -> None:
    """CSV of a matrix frequency response: omega plus Re/Im per entry."""
    shape = at(1j * PROBE_OMEGAS[0]).shape
    header = ["omega"]
    for i in range(shape[0]):
        for j in range(shape[1]):
            header += [f"re_{label}{i + 1}{j + 1}", f"im_{label}{i + 1}{j + 1}"]
    rows = []
    for w in PROBE_OMEGAS:
        val = at(1j * w)
        row = [w]
        for i in range(shape[0]):
            for j in range(shape[1]):
                row += [val[i, j].real, val[i, j].imag]
        rows.append(row)
    _write_trace(path, header, rows)


def _sigma_max(mat: np.ndarray) -> float:
    if mat.size == 0:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False)[0])


# ---------------------------------------------------------------------------
# synthesis plumbing

def _with_signatures(real: StructuredRealization) -> StructuredRealization:
    """Realization with a signature pair, inferring one when absent."""
    if real.sigma_int is not None and real.sigma_ext is not None:
        return real
    inferred = infer_signatures(real)
    if inferred is None:
        raise StructureError(
            "realization admits no consistent signature pair; only "
            "signature-symmetric plants can be synthesized")
    return StructuredRealization(
        real.A, real.B, real.C, real.D,
        sigma_int=inferred[0], sigma_ext=inferred[1],
        class_tag=real.class_tag, partition=real.partition)


def _as_lct(real: StructuredRealization):
    """Tag a validated lossless realization, reducing if uncontrollable."""
    if real.class_tag != "LCT":
        real = StructuredRealization(
            real.A, real.B, real.C, real.D,
            sigma_int=real.sigma_int, sigma_ext=real.sigma_ext,
            class_tag="LCT", partition=real.partition)
    rank = controllability_basis(real.A, real.B).shape[1]
    if rank == real.n:
        return real, None
    reduced = reduce_to_controllable(real)
    note = (f"note: removed {real.n - reduced.n} uncontrollable states; "
            f"the law below is optimal for the {reduced.n}-state reduction")
    return reduced, note


# ---------------------------------------------------------------------------
# command handlers

def cmd_parse(args) -> int:
    net = parse_netlist(_read_text(args.netlist))
    counts = Counter(el.kind for el in net.elements)
    kinds = ", ".join(f"{k}={counts[k]}" for k in "RLCT" if counts[k])
    lines = [
        f"nodes: {len(net.nodes)}",
        f"elements: {len(net.elements)}" + (f" ({kinds})" if kinds else ""),
        f"ports: {len(net.ports)}",
        f"faces: {len(net.faces) if net.faces else 0}",
    ]
    _emit(args, "\n".join(lines), [])
    if args.trace:
        print("parse writes no trace table", file=sys.stderr)
    return 0


def cmd_realize(args) -> int:
    net = parse_netlist(_read_text(args.netlist))
    desc = mna_descriptor(net, drive=args.drive)
    real = descriptor_to_statespace(desc)
    worst = 0.0
    for w in PROBE_OMEGAS:
        model = transfer_eval(real, 1j * w)
        oracle = impedance_at(net, 1j * w, drive=args.drive)
        gap = float(np.max(np.abs(model - oracle), initial=0.0))
        worst = max(worst, gap / (1.0 + float(np.max(np.abs(oracle),
                                                     initial=0.0))))
    if worst > ORACLE_RTOL:
        raise SolverError(
            f"state-space model disagrees with the network oracle: "
            f"relative error {worst:.3e} at {len(PROBE_OMEGAS)} probe points")
    report = [
        f"states: {real.n}  ports: {real.m}  class: {real.class_tag}",
        f"oracle check: worst relative error {worst:.3e} "
        f"at {len(PROBE_OMEGAS)} points",
    ]
    _emit(args, serialize_realization(real), report)
    if args.trace:
        _response_trace(args.trace, "Z", lambda s: transfer_eval(real, s))
    return 0


def cmd_synthesize(args) -> int:
    real = parse_realization(_read_text(args.realization))
    report = []

    if args.problem == 2:
        is_lct = validate_structure(real, "LCT").passed
        if args.norm == "h2":
            if is_lct:
                base, note = _as_lct(real)
                if note:
                    report.append(note)
                controller = lct_h2(Problem2Plant(base))
            else:
                base = _with_signatures(real)
                controller = h2_symmetric(embed_problem2(Problem2Plant(base)))
            closed = close_loop(Problem2Plant(base), controller)
            report.append(
                f"closed-loop H2 norm: {fmt_float(h2_norm(closed))}")
        else:
            if args.gamma is None:
                if not is_lct:
                    raise StructureError(
                        "the plant is not lossless; pass --gamma to "
                        "synthesize a bounded-norm law")
                base, note = _as_lct(real)
                if note:
                    report.append(note)
                controller = lct_hinf(Problem2Plant(base, norm="Hinf"))
            else:
                base = _with_signatures(real)
                plant = Problem2Plant(base, norm="Hinf")
                controller = hinf_symmetric(embed_problem2(plant), args.gamma)
            closed = close_loop(Problem2Plant(base, norm="Hinf"), controller)
            report.append(
                f"achieved Hinf norm: {fmt_float(hinf_norm(closed))}")
    else:
        plant3 = Problem3Plant(real)
        if real.class_tag == "RLT":
            controller = rlt_static(plant3)
        else:
            controller = rct_static(plant3)
        try:
            level = gamma_star(plant3)
            report.append(f"guaranteed Hinf level: {fmt_float(level)}")
        except SolverError as err:
            report.append(f"guaranteed Hinf level: n/a ({err})")

    _emit(args, serialize_controller(controller), report)
    if args.trace:
        _response_trace(args.trace, "K", controller.transfer_at)
    return 0


def cmd_verify(args) -> int:
    real = parse_realization(_read_text(args.plant))
    controller = parse_controller(_read_text(args.controller))
    if args.problem == 2:
        plant = Problem2Plant(real)
    else:
        plant = Problem3Plant(real)
    closed = close_loop(plant, controller)

    if closed.n:
        margin = -float(np.max(np.linalg.eigvals(closed.A).real))
    else:
        margin = float("inf")
    if margin <= 0.0:
        raise SolverError(
            f"closed loop is not internally stable "
            f"(stability margin {fmt_float(margin)})")
    lines = [
        f"problem: {args.problem}",
        f"plant states: {real.n}",
        f"controller states: {controller.order}",
        f"stability margin: {fmt_float(margin)}",
    ]
    if float(np.max(np.abs(closed.D), initial=0.0)) > 0.0:
        lines.append("H2 norm: n/a (direct feedthrough)")
    else:
        lines.append(f"H2 norm: {fmt_float(h2_norm(closed))}")
    lines.append(f"Hinf norm: {fmt_float(hinf_norm(closed))}")
    _emit(args, "\n".join(lines), [])
    if args.trace:
        rows = [[w, _sigma_max(transfer_eval(closed, 1j * w))]
                for w in PROBE_OMEGAS]
        _write_trace(args.trace, ["omega", "sigma_max"], rows)
    return 0


def cmd_lsq(args) -> int:
    if (args.C is None) != (args.d is None):
        raise RlctError("--C and --d must be given together")
    A_ls = _load_array(args.A, 2)
    b = _load_array(args.b, 1)
    C_ls = _load_array(args.C, 2) if args.C else None
    d = _load_array(args.d, 1) if args.d else None
    x_bar, z_bar = solve_constrained_ls(A_ls, b, C_ls, d)
    residual = kkt_residual(A_ls, b, x_bar, z_bar, C_ls, d)
    document = json.dumps({
        "x": x_bar.tolist(),
        "z": z_bar.tolist(),
        "kkt_residual": residual,
    }, indent=2)
    _emit(args, document, [f"kkt residual: {residual:.3e}"])
    if args.trace:
        closed, drive, n_cols = least_squares_loop(A_ls, b, C_ls, d)
        result = simulate(closed, {"kind": "step", "amplitude": drive})
        header = (["time"]
                  + [f"x{i + 1}" for i in range(n_cols)]
                  + [f"z{i + 1}" for i in range(closed.n - n_cols)])
        rows = np.column_stack([result.times, result.states])
        _write_trace(args.trace, header, rows)
    return 0


def cmd_grid(args) -> int:
    L = _load_array(args.laplacian, 2)
    inertias = _load_inertias(args.inertia)
    plant = build_swing_grid(L, args.renewable, inertias)
    controller = lct_h2(Problem2Plant(plant))
    net = swing_grid_netlist(L, args.renewable, inertias,
                             series_resistance=2.0)
    # The plant convention is voltage-driven (frequency in, power out), so
    # the controller netlist must reproduce K under the same drive.
    worst = 0.0
    for w in PROBE_OMEGAS:
        model = controller.transfer_at(1j * w)
        oracle = impedance_at(net, 1j * w, drive="voltage")
        gap = float(np.max(np.abs(model - oracle), initial=0.0))
        worst = max(worst, gap / (1.0 + float(np.max(np.abs(oracle),
                                                     initial=0.0))))
    if worst > ORACLE_RTOL:
        raise SolverError(
            f"controller netlist disagrees with the optimal law: "
            f"relative error {worst:.3e}")
    closed = close_loop(Problem2Plant(plant), controller)
    report = [
        f"plant states: {plant.n}  renewable ports: {plant.m}",
        f"controller netlist: {len(net.elements)} elements, "
        f"{len(net.ports)} ports",
        f"netlist oracle check: worst relative error {worst:.3e}",
        f"closed-loop H2 norm: {fmt_float(h2_norm(closed))}",
    ]
    _emit(args, serialize_netlist(net), report)
    if args.trace:
        rows = [[w,
                 _sigma_max(controller.transfer_at(1j * w)),
                 _sigma_max(impedance_at(net, 1j * w, drive="voltage"))]
                for w in PROBE_OMEGAS]
        _write_trace(args.trace, ["omega", "sigma_law", "sigma_netlist"],
                     rows)
    return 0


def cmd_dual(args) -> int:
    net = parse_netlist(_read_text(args.netlist))
    dual = planar_dual(net, outer_face=args.outer_face)
    report = [
        f"primal: {len(net.nodes)} nodes, {net.edge_count} edges, "
        f"{len(net.faces or ())} faces",
        f"dual: {len(dual.nodes)} nodes, {len(dual.elements)} elements, "
        f"{len(dual.ports)} ports",
    ]
    _emit(args, serialize_netlist(dual), report)
    if args.trace:
        if dual.ports:
            _response_trace(args.trace, "Zd",
                            lambda s: impedance_at(dual, s))
        else:
            print("dual network has no ports; no trace written",
                  file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlct",
        description="passive-network realization and controller synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", metavar="PATH",
                       help="write the primary document here")
        p.add_argument("--trace", metavar="PATH",
                       help="write a CSV table of supporting numbers here")
        return p

    p = add("parse", "summarize a netlist")
    p.add_argument("netlist")
    p.set_defaults(func=cmd_parse)

    p = add("realize", "netlist to checked state-space realization")
    p.add_argument("netlist")
    p.add_argument("--drive", choices=("current", "voltage"),
                   default="current")
    p.set_defaults(func=cmd_realize)

    p = add("synthesize", "optimal controller for a realization")
    p.add_argument("realization")
    p.add_argument("--problem", type=int, choices=(2, 3), required=True)
    p.add_argument("--norm", choices=("h2", "hinf"), default="h2")
    p.add_argument("--gamma", type=float)
    p.set_defaults(func=cmd_synthesize)

    p = add("verify", "closed-loop report for a plant/controller pair")
    p.add_argument("plant")
    p.add_argument("controller")
    p.add_argument("--problem", type=int, choices=(2, 3), required=True)
    p.set_defaults(func=cmd_verify)

    p = add("lsq", "constrained least squares through the circuit loop")
    p.add_argument("--A", required=True, metavar="PATH")
    p.add_argument("--b", required=True, metavar="PATH")
    p.add_argument("--C", metavar="PATH")
    p.add_argument("--d", metavar="PATH")
    p.set_defaults(func=cmd_lsq)

    p = add("grid", "swing-equation plant and distributed controller")
    p.add_argument("--laplacian", required=True, metavar="PATH")
    p.add_argument("--renewable", required=True, type=int, nargs="+",
                   metavar="BUS")
    p.add_argument("--inertia", required=True, metavar="PATH")
    p.set_defaults(func=cmd_grid)

    p = add("dual", "planar dual of an embedded resistor network")
    p.add_argument("netlist")
    p.add_argument("--outer-face", type=int, default=0)
    p.set_defaults(func=cmd_dual)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RlctError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
