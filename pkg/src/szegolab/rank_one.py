"""Exact dynamics on the rank-one invariant manifold.

States u = b + c e^{ix}/(1 - p e^{ix}) with |p| < 1 close under the damped
flow. This module carries the (b,c,p) vector field, the two reduced
three-variable charts (blow-up and scattering), their integrators and the
distance to the circle of momentum-M single-mode states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn

from .errors import NonFiniteState
from .modes import ModeVector, Params

__all__ = [
    "RankOneState",
    "ReducedState",
    "RankOneTrajectory",
    "ReducedTrajectory",
    "embed",
    "bcp_rhs",
    "evolve_bcp",
    "to_reduced",
    "reduced_rhs",
    "evolve_reduced",
    "dist_to_CM",
    "rank_one_mass",
    "rank_one_momentum",
    "rank_one_sobolev_sq",
]

P_STOP = 1e-12      # stop when 1 - |p|^2 falls below this (coefficients stay
                    # finite but the state no longer resolves numerically)
CHART_SWITCH = 1e-3  # 1-|p|^2 below which Sobolev norms use the gamma-chart law


@dataclass(frozen=True)
class RankOneState:
    b: complex
    c: complex
    p: complex

    def __post_init__(self):
        if abs(self.p) >= 1.0:
            raise ValueError("|p| must be < 1")

    def to_json(self) -> str:
        return json.dumps(
            {
                "b": [self.b.real, self.b.imag],
                "c": [self.c.real, self.c.imag],
                "p": [self.p.real, self.p.imag],
            }
        )

    @staticmethod
    def from_json(text: str) -> "RankOneState":
        d = json.loads(text)
        return RankOneState(
            complex(*d["b"]), complex(*d["c"]), complex(*d["p"])
        )


def rank_one_momentum(state: RankOneState) -> float:
    q = abs(state.p) ** 2
    return abs(state.c) ** 2 / (1.0 - q) ** 2


def rank_one_mass(state: RankOneState) -> float:
    q = abs(state.p) ** 2
    return abs(state.b) ** 2 + abs(state.c) ** 2 / (1.0 - q)


def rank_one_sobolev_sq(state: RankOneState, s: float) -> float:
    """Squared Sobolev norm of the rank-one state.

    Exact series sum while 1-|p|^2 is moderate; once the state approaches the
    unit circle, the closed-form tail law Gamma(2s+1) M^{2s} gamma^{1-2s}
    takes over (the series would need ~40/(1-|p|^2) terms).
    """
    q = abs(state.p) ** 2
    one_minus = 1.0 - q
    m = rank_one_momentum(state)
    if one_minus < CHART_SWITCH:
        gam = m * one_minus
        return abs(state.b) ** 2 + float(gamma_fn(2 * s + 1)) * m ** (2 * s) * gam ** (
            1.0 - 2.0 * s
        )
    if q == 0.0:
        return abs(state.b) ** 2 + 2.0**s * abs(state.c) ** 2
    kmax = max(8, int(-37.0 / math.log(q)) + 1)
    k = np.arange(1, kmax + 1, dtype=float)
    series = np.sum((1.0 + k**2) ** s * q ** (k - 1.0))
    return abs(state.b) ** 2 + abs(state.c) ** 2 * float(series)


def embed(state: RankOneState, n: int) -> ModeVector:
    """Truncated coefficient vector: u_hat(0)=b, u_hat(k)=c p^{k-1} for k>=1."""
    c = np.zeros(n, dtype=np.complex128)
    c[0] = state.b
    c[1:] = state.c * state.p ** np.arange(n - 1)
    return ModeVector(c)


def _bcp_rhs(b: complex, c: complex, p: complex, nu: float, alpha: float, beta: float):
    q = abs(p) ** 2
    m = abs(c) ** 2 / (1.0 - q) ** 2  # momentum evaluated from the state
    one = m * (1.0 - q)
    db = -1j * ((abs(b) ** 2 + 2.0 * one) * b + m * c * np.conj(p) - (1j * nu - alpha) * b)
    dc = -1j * (2.0 * abs(b) ** 2 * c + 2.0 * one * b * p + (1.0 - beta) * m * c)
    dp = -1j * (c * np.conj(b) + (1.0 - beta) * m * p * (1.0 - q))
    return db, dc, dp


def bcp_rhs(state: RankOneState, p: Params) -> tuple[complex, complex, complex]:
    """Tangent (b', c', p') of the damped flow on the rank-one manifold.

    The momentum M appearing in the vector field is evaluated from the state
    on every call, so the field stays self-consistent for states perturbed
    off a fixed momentum shell.
    """
    return _bcp_rhs(state.b, state.c, state.p, p.nu, p.alpha, p.beta)


@dataclass
class RankOneTrajectory:
    times: np.ndarray
    states: list[RankOneState]
    completed: bool = True
    abort_reason: str | None = None

    def momentum(self) -> np.ndarray:
        return np.array([rank_one_momentum(s) for s in self.states])

    def mass(self) -> np.ndarray:
        return np.array([rank_one_mass(s) for s in self.states])

    def dist_cm(self) -> np.ndarray:
        return np.array([dist_to_CM(s) for s in self.states])

    def eta(self) -> np.ndarray:
        return np.array([abs(s.b) ** 2 for s in self.states])

    def one_minus_p_sq(self) -> np.ndarray:
        return np.array([1.0 - abs(s.p) ** 2 for s in self.states])


def evolve_bcp(
    state0: RankOneState,
    p: Params,
    t_end: float,
    sample_dt: float = 0.1,
    t_start: float = 0.0,
    rtol: float | None = None,
    atol: float | None = None,
) -> RankOneTrajectory:
    """Adaptive integration of the (b,c,p) system from t_start to t_end.

    t_end < t_start integrates backward. Stops with a flag when 1-|p|^2
    drops below the resolution floor.
    """
    y0 = np.array([state0.b, state0.c, state0.p], dtype=np.complex128)
    rtol = p.rel_tol if rtol is None else rtol
    atol = p.abs_tol if atol is None else atol

    def rhs(t, y):
        return np.array(_bcp_rhs(y[0], y[1], y[2], p.nu, p.alpha, p.beta))

    def p_event(t, y):
        return (1.0 - abs(y[2]) ** 2) - P_STOP

    p_event.terminal = True
    p_event.direction = -1

    span = (float(t_start), float(t_end))
    nstep = max(2, int(round(abs(t_end - t_start) / sample_dt)) + 1)
    t_eval = np.linspace(t_start, t_end, nstep)
    sol = solve_ivp(
        rhs, span, y0, method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval,
        events=p_event,
    )
    if sol.status == -1:
        raise NonFiniteState(f"rank-one integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y.real)) or not np.all(np.isfinite(sol.y.imag)):
        raise NonFiniteState("non-finite rank-one state produced")
    states = [
        RankOneState(sol.y[0, i], sol.y[1, i], sol.y[2, i] * _clip_p(sol.y[2, i]))
        for i in range(sol.y.shape[1])
    ]
    completed = sol.status == 0
    reason = None if completed else "1-|p|^2 reached the resolution floor"
    return RankOneTrajectory(sol.t, states, completed, reason)


def _clip_p(p: complex) -> float:
    # integration can overshoot |p| past 1 by rounding; pull back onto the disk
    a = abs(p)
    return 1.0 if a < 1.0 else (1.0 - 1e-15) / a


def dist_to_CM(state: RankOneState) -> float:
    """L2 distance to the circle of single-mode states carrying this momentum.

    Minimizing over the phase of the target gives the closed form
    sqrt(mass - 2 sqrt(M) |u_hat(1)| + M) with u_hat(1) = c.
    """
    m = rank_one_momentum(state)
    val = rank_one_mass(state) - 2.0 * math.sqrt(m) * abs(state.c) + m
    return math.sqrt(max(val, 0.0))


# --------------------------------------------------------------------------
# Reduced three-variable charts


@dataclass(frozen=True)
class ReducedState:
    """Reduced coordinates (eta, second, zeta) at fixed momentum M.

    chart = "blowup":  second = gamma = M (1-|p|^2), 0 < gamma <= M
    chart = "scatter": second = delta = M |p|^2,     0 <= delta < M
    zeta = M c conj(b) conj(p) in both charts.
    """

    eta: float
    second: float
    zeta: complex
    chart: str
    M: float

    def __post_init__(self):
        if self.chart not in ("blowup", "scatter"):
            raise ValueError("chart must be 'blowup' or 'scatter'")
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


def to_reduced(state: RankOneState, chart: str) -> ReducedState:
    m = rank_one_momentum(state)
    q = abs(state.p) ** 2
    eta = abs(state.b) ** 2
    zeta = m * state.c * np.conj(state.b) * np.conj(state.p)
    second = m * (1.0 - q) if chart == "blowup" else m * q
    return ReducedState(eta, second, complex(zeta), chart, m)


def _reduced_rhs_arrays(
    eta: float, second: float, zeta: complex, chart: str,
    M: float, nu: float, alpha: float, beta: float,
):
    im_z = zeta.imag
    if chart == "blowup":
        gam = second
        d_eta = 2.0 * im_z - 2.0 * nu * eta
        d_second = -2.0 * im_z
        d_zeta = (
            -(nu + 1j * (1.0 - beta) * M - 1j * alpha) * zeta
            + 1j * zeta * ((3.0 - beta) * gam - eta)
            - 2j * eta * gam * M
            + 1j * gam**2 * (M - gam + 3.0 * eta)
        )
    else:
        delta = second
        d_eta = 2.0 * im_z - 2.0 * nu * eta
        d_second = 2.0 * im_z
        d_zeta = (
            -(nu - 1j * (2.0 * M + alpha)) * zeta
            - 1j * ((3.0 - beta) * delta + eta) * zeta
            - 2j * eta * delta * (M - delta)
            + 1j * (M - delta) ** 2 * (delta + eta)
        )
    return d_eta, d_second, d_zeta


def reduced_rhs(state: ReducedState, p: Params) -> tuple[float, float, complex]:
    """Tangent of the reduced system in the state's chart."""
    return _reduced_rhs_arrays(
        state.eta, state.second, state.zeta, state.chart,
        state.M, p.nu, p.alpha, p.beta,
    )


@dataclass
class ReducedTrajectory:
    times: np.ndarray
    eta: np.ndarray
    second: np.ndarray
    zeta: np.ndarray
    chart: str
    M: float


def evolve_reduced(
    state0: ReducedState,
    p: Params,
    t_end: float,
    sample_dt: float = 1.0,
    rtol: float | None = None,
    atol: float | None = None,
) -> ReducedTrajectory:
    """Adaptive integration of the reduced system, sampled every sample_dt."""
    rtol = p.rel_tol if rtol is None else rtol
    atol = p.abs_tol if atol is None else atol
    chart, m = state0.chart, state0.M

    def rhs(t, y):
        d_eta, d_second, d_zeta = _reduced_rhs_arrays(
            y[0], y[1], complex(y[2], y[3]), chart, m, p.nu, p.alpha, p.beta
        )
        return [d_eta, d_second, d_zeta.real, d_zeta.imag]

    y0 = [state0.eta, state0.second, state0.zeta.real, state0.zeta.imag]
    nstep = max(2, int(round(t_end / sample_dt)) + 1)
    t_eval = np.linspace(0.0, t_end, nstep)
    sol = solve_ivp(rhs, (0.0, float(t_end)), y0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if sol.status != 0:
        raise NonFiniteState(f"reduced integration failed: {sol.message}")
    return ReducedTrajectory(
        sol.t, sol.y[0], sol.y[1], sol.y[2] + 1j * sol.y[3], chart, m
    )
