"""Fixed-step time simulation and the circuit least-squares solver.

The simulator integrates dx/dt = A x + B u(t) with classical RK4 on a
uniform grid.  Input signals are restricted to the three shapes the rest
of the package needs (step, zero, sinusoid); anything richer belongs in
the caller.  Steady state is declared when the state stops moving over
the trailing window:

    || x(t_f) - x(t_f - window) ||_inf  <  EPS_SS * (1 + || x(t_f) ||_inf)

with window = WINDOW_FRAC * t_final.

``solve_constrained_ls`` wires the least-squares circuit to the unit
negative-feedback law u = -y, drives it with constant sources, and reads
the equality-constrained minimizer off the settled state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, RlctError, StructureError
from .netgraph import build_least_squares_circuit
from .structured import StructuredRealization

EPS_SS = 1e-8
WINDOW_FRAC = 0.05
MAX_STEPS = 200_000


@dataclass(frozen=True)
class SimulationResult:
    """Trajectory of one simulation run.

    ``times`` has shape (k,), strictly increasing from 0.  ``states`` is
    (k, n) and ``outputs`` is (k, p), row i sampled at times[i].
    ``steady_state`` is the final state when the trailing-window test
    passed and None otherwise; ``converged`` reports that test.
    """

    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    steady_state: np.ndarray | None
    converged: bool


def _normalize_signal(signal, m: int):
    """Return (kind, amplitude vector, frequency, phase) from a loose spec."""
    if isinstance(signal, str):
        spec = {"kind": signal}
    elif isinstance(signal, dict):
        spec = dict(signal)
    else:
        raise RlctError(f"unsupported input signal spec {signal!r}")
    kind = spec.pop("kind", None)
    if kind not in ("step", "zero", "sinusoid"):
        raise RlctError(f"unknown input signal kind {kind!r}")
    amplitude = np.atleast_1d(np.asarray(
        spec.pop("amplitude", 1.0), dtype=float))
    if amplitude.size == 1:
        amplitude = np.full(m, float(amplitude[0]))
    if amplitude.shape != (m,):
        raise RlctError(
            f"signal amplitude has {amplitude.size} entries, expected {m}")
    frequency = float(spec.pop("frequency", 1.0))
    phase = float(spec.pop("phase", 0.0))
    if spec:
        raise RlctError(f"unknown signal options {sorted(spec)}")
    return kind, amplitude, frequency, phase


def default_time_grid(A: np.ndarray) -> tuple[float, float]:
    """(t_final, dt) heuristics from the spectrum of A.

    t_final covers twenty time constants of the slowest decaying mode
    and dt resolves the fastest one; both fall back to fixed values when
    the spectrum offers no scale (A = 0 or n = 0).
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 20.0, 0.01
    eigs = np.linalg.eigvals(A)
    decay = [abs(lam.real) for lam in eigs if lam.real < -1e-12]
    t_final = 20.0 / min(decay) if decay else 20.0
    rho = float(np.max(np.abs(eigs)))
    dt = 1.0 / (20.0 * rho) if rho > 0.0 else t_final / 2000.0
    if t_final / dt > MAX_STEPS:
        dt = t_final / MAX_STEPS
    return t_final, dt


def simulate(
    real: StructuredRealization,
    signal="step",
    t_final: float | None = None,
    dt: float | None = None,
    x0: np.ndarray | None = None,
) -> SimulationResult:
    """Integrate the realization from x0 (default 0) under a test signal.

    Raises ConvergenceError if the trajectory leaves the representable
    range before t_final.
    """
    A, B, C, D = real.A, real.B, real.C, real.D
    n, m = real.n, real.m
    kind, amplitude, frequency, phase = _normalize_signal(signal, m)

    auto_t, auto_dt = default_time_grid(A)
    t_final = auto_t if t_final is None else float(t_final)
    dt = auto_dt if dt is None else float(dt)
    if not dt > 0.0:
        raise RlctError(f"dt must be positive, got {dt}")
    if not t_final > dt:
        raise RlctError(f"t_final must exceed dt, got {t_final} <= {dt}")
    steps = int(round(t_final / dt))
    if steps > 4 * MAX_STEPS:
        raise RlctError(
            f"grid of {steps} steps is unreasonably fine; raise dt")
    times = dt * np.arange(steps + 1)

    if kind == "zero":
        def u_of(t):
            return np.zeros(m)
    elif kind == "step":
        def u_of(t):
            return amplitude
    else:
        def u_of(t):
            return amplitude * np.sin(frequency * t + phase)

    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(n)
    states = np.empty((steps + 1, n))
    inputs = np.empty((steps + 1, m))
    states[0] = x
    inputs[0] = u_of(0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            t = times[i]
            u_lo = inputs[i]
            u_mid = u_of(t + 0.5 * dt)
            u_hi = u_of(t + dt)
            k1 = A @ x + B @ u_lo
            k2 = A @ (x + 0.5 * dt * k1) + B @ u_mid
            k3 = A @ (x + 0.5 * dt * k2) + B @ u_mid
            k4 = A @ (x + dt * k3) + B @ u_hi
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise ConvergenceError(
                    f"trajectory diverged near t = {times[i + 1]:.6g}")
            states[i + 1] = x
            inputs[i + 1] = u_hi
    outputs = states @ C.T + inputs @ D.T

    window = max(1, int(round(WINDOW_FRAC * steps)))
    drift = float(np.max(np.abs(states[-1] - states[-1 - window]), initial=0.0))
    scale = float(np.max(np.abs(states[-1]), initial=0.0))
    converged = drift < EPS_SS * (1.0 + scale)
    steady = states[-1].copy() if converged else None
    return SimulationResult(times, states, outputs, steady, converged)


def least_squares_loop(A_ls, b, C_ls=None, d=None):
    """Closed least-squares circuit and its constant drive.

    Builds the circuit for min ||A_ls x - b|| s.t. C_ls x = d, closes the
    unit negative feedback u = -y, and returns (closed realization, step
    amplitude, split index) so the caller can simulate to steady state.
    The closed system is driven by (b, -d) through the original input
    map, and the settled state reads (x_bar, z_bar) directly.
    """
    A_ls = np.atleast_2d(np.asarray(A_ls, dtype=float))
    b = np.asarray(b, dtype=float).reshape(A_ls.shape[0])
    circuit = build_least_squares_circuit(A_ls, C_ls)
    if circuit.rank_warnings:
        raise StructureError("; ".join(circuit.rank_warnings))
    p = circuit.c_ls.shape[0]
    if p:
        d_vec = np.asarray(d, dtype=float).reshape(p)
    else:
        if d is not None and np.asarray(d, dtype=float).size:
            raise StructureError("d given without constraint rows C_ls")
        d_vec = np.zeros(0)

    real = circuit.realization
    # u = -y removes the lossless coupling's drive; the sources enter
    # through the same columns plus the constraint injection b_r2.
    A_cl = real.A - real.B @ real.C
    B_cl = np.hstack([real.B, circuit.b_r2])
    closed = StructuredRealization(
        A_cl, B_cl, real.C, np.zeros((real.p, B_cl.shape[1])))
    drive = np.concatenate([b, -d_vec])
    n_cols = A_ls.shape[1]
    return closed, drive, n_cols


def kkt_residual(A_ls, b, x_bar, z_bar=None, C_ls=None, d=None) -> float:
    """Scaled optimality residual of a candidate (x_bar, z_bar).

    max(stationarity, primal feasibility) over 1 + ||A^T b|| + ||d||.
    """
    A_mat = np.atleast_2d(np.asarray(A_ls, dtype=float))
    b_vec = np.asarray(b, dtype=float).reshape(A_mat.shape[0])
    x_bar = np.asarray(x_bar, dtype=float).reshape(A_mat.shape[1])
    grad = A_mat.T @ (A_mat @ x_bar - b_vec)
    scale = 1.0 + float(np.linalg.norm(A_mat.T @ b_vec))
    primal = 0.0
    if C_ls is not None:
        C_mat = np.atleast_2d(np.asarray(C_ls, dtype=float))
        d_vec = np.asarray(d, dtype=float).reshape(C_mat.shape[0])
        z_vec = np.asarray(z_bar, dtype=float).reshape(C_mat.shape[0])
        grad = grad + C_mat.T @ z_vec
        primal = float(np.linalg.norm(C_mat @ x_bar - d_vec))
        scale += float(np.linalg.norm(d_vec))
    return max(float(np.linalg.norm(grad)), primal) / scale


def solve_constrained_ls(A_ls, b, C_ls=None, d=None):
    """Equality-constrained least squares via the settled circuit.

    Returns (x_bar, z_bar): the minimizer of ||A_ls x - b||_2 subject to
    C_ls x = d and the constraint multiplier.  z_bar is empty when no
    constraints are given.  Raises ConvergenceError if the loop fails to
    settle or the stationarity residual exceeds 1e-6.
    """
    closed, drive, n_cols = least_squares_loop(A_ls, b, C_ls, d)
    signal = {"kind": "step", "amplitude": drive}
    result = simulate(closed, signal)
    if not result.converged:
        # Slow modes with large amplitudes can need more than the default
        # horizon of twenty time constants.
        t_auto, dt_auto = default_time_grid(closed.A)
        result = simulate(closed, signal, t_final=3.0 * t_auto, dt=dt_auto)
    if not result.converged:
        raise ConvergenceError(
            "least-squares loop did not reach steady state; "
            "check the rank assumptions on A_ls and C_ls")
    x_bar = result.steady_state[:n_cols]
    z_bar = result.steady_state[n_cols:]
    residual = kkt_residual(A_ls, b, x_bar, z_bar, C_ls, d)
    if residual > 1e-6:
        raise ConvergenceError(
            f"optimality residual {residual:.3e} exceeds 1e-6")
    return x_bar, z_bar
