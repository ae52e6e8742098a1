"""Shared golden fixtures.

The six-state realization below is the classical Bott-Duffin biquadratic
example: a one-port built from three capacitors, three inductors and two
resistors whose impedance the matrices reproduce exactly.  The netlist text
describes the same network, so the two serve as independent oracles for
each other throughout the suite.
"""

import numpy as np

_R2 = np.sqrt(2.0)
_R3 = np.sqrt(3.0)
_R32 = np.sqrt(1.5)

BOTT_DUFFIN_A = np.array([
    [-2.0, 0.0, 0.0, -_R3, 0.0, 0.0],
    [0.0, 0.0, 0.0, -_R2, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, _R2, -_R3],
    [_R3, _R2, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, -_R2, 0.0, 0.0, 0.0],
    [0.0, 0.0, _R3, 0.0, 0.0, -2.0],
])
BOTT_DUFFIN_B = np.array([[-_R2], [0.0], [0.0], [_R32], [0.0], [1.0 / _R2]])
BOTT_DUFFIN_C = np.array([[_R2, 0.0, 0.0, _R32, 0.0, 1.0 / _R2]])
BOTT_DUFFIN_D = np.array([[1.0]])

# Internal signs of the six states and the single driving point.
BOTT_DUFFIN_SIGMA_INT = (1, 1, 1, -1, -1, -1)
BOTT_DUFFIN_SIGMA_EXT = (1,)

BOTT_DUFFIN_NETLIST = """\
# Bott-Duffin one-port: biquadratic driving-point impedance
R 1 b 1
C b c 2/3
L b c 3/4
L 1 c 1/2
R c 0 1/4
C c 0 2
L c f 1/6
C f 0 3
P 1 0
"""

# Reactive element values in state order: capacitors then inductors.
BOTT_DUFFIN_REACTANCES = (2.0 / 3.0, 3.0, 2.0, 0.75, 0.5, 1.0 / 6.0)


def bott_duffin_realization():
    from rlct.structured import Signature, StructuredRealization

    return StructuredRealization(
        BOTT_DUFFIN_A, BOTT_DUFFIN_B, BOTT_DUFFIN_C, BOTT_DUFFIN_D,
        sigma_int=Signature(BOTT_DUFFIN_SIGMA_INT),
        sigma_ext=Signature(BOTT_DUFFIN_SIGMA_EXT),
        class_tag="RLCT",
    )


def _mixed_signs(rng, count):
    while True:
        signs = rng.choice((-1, 1), size=count)
        if count < 2 or (np.any(signs > 0) and np.any(signs < 0)):
            return signs


def random_symmetric_realization(rng, n, m):
    """Random signature-symmetric passive realization with zero feedthrough.

    Sigma M is a symmetric matrix T whose dissipation Sigma T + T Sigma has
    the cross-sign entries cancel, so passivity with D = 0 pins the
    same-sign port couplings to zero and leaves three free parameter
    groups: a PSD block on the +1 states, an NSD block on the -1 states,
    and arbitrary opposite-sign couplings.
    """
    from rlct.structured import Signature, StructuredRealization

    sigma_int = _mixed_signs(rng, n)
    sigma_ext = _mixed_signs(rng, m)
    T = np.zeros((n + m, n + m))

    state = 0.6 * rng.standard_normal((n, n))
    state = 0.5 * (state + state.T)
    for sgn in (1, -1):
        idx = np.flatnonzero(sigma_int == sgn)
        if idx.size:
            G = rng.standard_normal((idx.size, idx.size + 1))
            state[np.ix_(idx, idx)] = sgn * (0.3 * G @ G.T
                                             + 0.2 * np.eye(idx.size))
    T[:n, :n] = state

    inputs = 0.8 * rng.standard_normal((n, m))
    inputs[sigma_int[:, None] == sigma_ext[None, :]] = 0.0
    T[:n, n:] = inputs
    T[n:, :n] = inputs.T

    signs = np.concatenate([sigma_int, sigma_ext]).astype(float)
    M = signs[:, None] * T
    return StructuredRealization(
        -M[:n, :n], -M[:n, n:], M[n:, :n], np.zeros((m, m)),
        sigma_int=Signature(tuple(int(s) for s in sigma_int)),
        sigma_ext=Signature(tuple(int(s) for s in sigma_ext)),
    )


def random_lct(rng, k=2, j=2, m1=1, m2=1):
    """Random lossless plant with k + j states and two port blocks."""
    from rlct.structured import build_lct

    return build_lct(
        rng.standard_normal((k, j)),
        rng.standard_normal((k, m2)),
        rng.standard_normal((j, m1)),
    )


def strict_rlt(rng, n=3, m1=1, m2=2):
    """Random damped inductive plant whose lossy block clears zero."""
    from rlct.structured import build_rlt

    G = rng.standard_normal((n, n + 1))
    a = -(0.4 * G @ G.T + 0.3 * np.eye(n))
    b1 = rng.standard_normal((n, m1))
    b2 = rng.standard_normal((n, m2))
    H = rng.standard_normal((m1, m1 + 1))
    d11 = 0.3 * H @ H.T
    d12 = rng.standard_normal((m1, m2))
    slack = rng.standard_normal((m2, m2 + 1))
    d22 = b2.T @ np.linalg.solve(-a, b2) + 0.3 * slack @ slack.T \
        + 0.2 * np.eye(m2)
    return build_rlt(a, b1, b2, d11, d12, d22)


def strict_rct(rng, n=3, m1=2, m2=1):
    """Capacitive mirror of strict_rlt: the strict margin sits on the
    first port block instead of the second."""
    from rlct.structured import build_rct

    G = rng.standard_normal((n, n + 1))
    a = -(0.4 * G @ G.T + 0.3 * np.eye(n))
    b1 = rng.standard_normal((n, m1))
    b2 = rng.standard_normal((n, m2))
    slack = rng.standard_normal((m1, m1 + 1))
    d11 = b1.T @ np.linalg.solve(-a, b1) + 0.3 * slack @ slack.T \
        + 0.2 * np.eye(m1)
    d12 = rng.standard_normal((m1, m2))
    H = rng.standard_normal((m2, m2 + 1))
    d22 = 0.3 * H @ H.T
    return build_rct(a, b1, b2, d11, d12, d22)


def stabilizing_comparisons(rng, plant, count, perturbation=0.3):
    """Stabilizing controllers built by LQG on randomly perturbed data.

    Candidates that fail to stabilize the true plant are discarded, so the
    returned list always holds ``count`` genuinely stabilizing laws.
    """
    from rlct.riccati import solve_care
    from rlct.synthesis import Controller, close_loop

    n, mu = plant.n, plant.m_u
    kept = []
    attempts = 0
    while len(kept) < count:
        attempts += 1
        if attempts > 50 * count:
            raise RuntimeError("could not collect enough stabilizing laws")
        Ap = plant.A + perturbation * rng.standard_normal((n, n))
        B2p = plant.B2 + perturbation * rng.standard_normal(plant.B2.shape)
        C2p = plant.C2 + perturbation * rng.standard_normal(plant.C2.shape)
        try:
            F = B2p.T @ solve_care(
                Ap, B2p, plant.C1.T @ plant.C1 + 0.1 * np.eye(n),
                np.eye(mu)).X
            L = solve_care(
                Ap.T, C2p.T, plant.B1 @ plant.B1.T + 0.1 * np.eye(n),
                np.eye(C2p.shape[0])).X @ C2p.T
        except Exception:
            continue
        cand = Controller(Ap - B2p @ F - L @ C2p, L, F,
                          np.zeros((mu, C2p.shape[0])))
        closed = close_loop(plant, cand)
        if np.max(np.linalg.eigvals(closed.A).real) < -1e-9:
            kept.append(cand)
    return kept
