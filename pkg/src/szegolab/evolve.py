"""Adaptive time integration of the full spectral PDE with online diagnostics."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NonFiniteState
from .modes import (
    ModeVector,
    Params,
    _rhs_coeffs,
    mass,
    momentum,
    sobolev_sq,
    tail_fraction,
)

__all__ = ["Trajectory", "evolve", "lyapunov_residual", "TAIL_GUARD"]

TAIL_GUARD = 1e-4  # abort threshold on tail_fraction: beyond it the truncation
                   # no longer represents the solution (blow-up pushes energy up)

MAX_STEP = 0.1


@dataclass
class Trajectory:
    """Sampled PDE trajectory with per-sample diagnostics."""

    times: np.ndarray
    states: list[ModeVector]
    mass: np.ndarray
    momentum: np.ndarray
    mean_abs: np.ndarray
    sobolev: dict[float, np.ndarray]
    tail: np.ndarray
    params: Params
    completed: bool = True
    abort_reason: str | None = None

    def to_csv(self, path: str) -> None:
        s_keys = sorted(self.sobolev)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["t", "mass", "momentum", "mean_abs"]
                + [f"hs_{s:g}" for s in s_keys]
                + ["tail_fraction"]
            )
            for i, t in enumerate(self.times):
                w.writerow(
                    [t, self.mass[i], self.momentum[i], self.mean_abs[i]]
                    + [self.sobolev[s][i] for s in s_keys]
                    + [self.tail[i]]
                )

    def states_to_json(self, path: str) -> None:
        data = [
            {
                "t": float(t),
                "coeffs": [[float(z.real), float(z.imag)] for z in st.coeffs],
            }
            for t, st in zip(self.times, self.states)
        ]
        with open(path, "w") as fh:
            json.dump(data, fh)


def evolve(
    u0: ModeVector,
    p: Params,
    t_end: float,
    sample_dt: float = 0.1,
    s_values: tuple[float, ...] = (1.0,),
    tail_guard: float = TAIL_GUARD,
) -> Trajectory:
    """Integrate the PDE from u0 to t_end, sampling every sample_dt.

    Uses an adaptive high-order embedded Runge-Kutta pair with the tolerances
    from p. If the tail guard trips, the run stops early and the partial
    trajectory is returned with completed=False.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    c0 = np.asarray(u0.coeffs, dtype=np.complex128)
    if not (np.all(np.isfinite(c0.real)) and np.all(np.isfinite(c0.imag))):
        raise NonFiniteState("initial state has non-finite coefficients")

    t_samples = np.arange(0.0, t_end + 0.5 * sample_dt, sample_dt)
    if t_samples[-1] < t_end:
        t_samples = np.append(t_samples, t_end)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return _rhs_coeffs(y, p.nu, p.alpha, p.beta)

    half = u0.n // 2
    weights = 1.0 + np.arange(u0.n, dtype=float)

    def guard_event(t: float, y: np.ndarray) -> float:
        w = weights * (y.real**2 + y.imag**2)
        total = w.sum()
        frac = w[half:].sum() / total if total > 0 else 0.0
        return tail_guard - frac

    guard_event.terminal = True
    guard_event.direction = -1

    sol = solve_ivp(
        rhs,
        (0.0, float(t_end)),
        c0,
        method="DOP853",
        rtol=p.rel_tol,
        atol=p.abs_tol,
        max_step=MAX_STEP,
        t_eval=t_samples,
        events=guard_event,
        dense_output=False,
    )
    if sol.status == -1:
        raise NonFiniteState(f"integration failed: {sol.message}")

    times = sol.t
    cols = sol.y.T
    if not (np.all(np.isfinite(cols.real)) and np.all(np.isfinite(cols.imag))):
        raise NonFiniteState("non-finite coefficients produced during integration")

    states = [ModeVector(col) for col in cols]
    completed = sol.status == 0
    abort_reason = None if completed else (
        f"tail_fraction exceeded {tail_guard:g} at t = {sol.t_events[0][0]:.6g}"
    )
    return Trajectory(
        times=times,
        states=states,
        mass=np.array([mass(u) for u in states]),
        momentum=np.array([momentum(u) for u in states]),
        mean_abs=np.array([abs(u.coeffs[0]) for u in states]),
        sobolev={s: np.array([sobolev_sq(u, s) for u in states]) for s in s_values},
        tail=np.array([tail_fraction(u) for u in states]),
        params=p,
        completed=completed,
        abort_reason=abort_reason,
    )


def lyapunov_residual(traj: Trajectory) -> float:
    """Defect of the energy-dissipation identity along the sampled trajectory.

    Max over interior samples of |d(mass)/dt + 2 nu |(u|1)|^2| (central finite
    differences), normalized by the initial mass.
    """
    if len(traj.times) < 3:
        raise ValueError("need at least 3 samples")
    t = traj.times
    m = traj.mass
    dm = (m[2:] - m[:-2]) / (t[2:] - t[:-2])
    resid = np.abs(dm + 2.0 * traj.params.nu * traj.mean_abs[1:-1] ** 2)
    return float(resid.max() / m[0])
