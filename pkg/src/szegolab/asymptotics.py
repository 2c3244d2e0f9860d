"""Closed-form asymptotic constants and the scattering-manifold machinery.

For parameters (nu, alpha, beta, M) the linearization around the single-mode
circle is governed by a sign varsigma, two nonnegative numbers (sigma, rho),
the characteristic roots lambda_+/-, the mass-ratio constant Z and the
blow-up constants kappa and a^2(s). The 4x4 real matrix A drives the reduced
scattering system X' + A X = Q(X), solved backward from its decaying
asymptotics by a Duhamel fixed point; shooting the (b,c,p) system backward
from the same asymptotics produces points of the scattering manifold.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DegenerateParameters, NoContraction, SigmaCheckFailed
from .modes import Params
from .rank_one import RankOneState, RankOneTrajectory, evolve_bcp

__all__ = [
    "AsymptoticConstants",
    "AsymptoticCharge",
    "constants",
    "matrix_A",
    "q_nonlinearity",
    "scatter_tail_solve",
    "construct_sigma_point",
    "sigma_forward_trajectory",
]


@dataclass(frozen=True)
class AsymptoticConstants:
    varsigma: int
    sigma: float
    rho: float
    kappa: float
    lambda_plus: complex
    lambda_minus: complex
    Z: float
    a_sq: dict[float, float]

    def to_json(self) -> str:
        return json.dumps(
            {
                "varsigma": self.varsigma,
                "sigma": self.sigma,
                "rho": self.rho,
                "kappa": self.kappa,
                "lambda_plus": [self.lambda_plus.real, self.lambda_plus.imag],
                "lambda_minus": [self.lambda_minus.real, self.lambda_minus.imag],
                "Z": self.Z,
                "a_sq": {str(k): v for k, v in self.a_sq.items()},
            }
        )


@dataclass(frozen=True)
class AsymptoticCharge:
    """Asymptotic data (eta_inf, theta, phi) labelling one scattering orbit."""

    eta_inf: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.eta_inf <= 0:
            raise ValueError("eta_inf must be positive")


def constants(
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    s_list: tuple[float, ...] = (),
) -> AsymptoticConstants:
    """Evaluate all closed-form asymptotic constants for (nu, alpha, beta, M)."""
    if nu <= 0 or M <= 0:
        raise DegenerateParameters("need nu > 0 and M > 0")
    if alpha + 2.0 * M == 0.0:
        raise DegenerateParameters("alpha + 2M = 0: the sign varsigma is undefined")
    varsigma = 1 if alpha + 2.0 * M > 0 else -1
    d = nu**2 - alpha**2 - 4.0 * M * alpha
    e = 2.0 * nu * (alpha + 2.0 * M)
    disc = math.hypot(d, e)
    # the two algebraically equal forms; pick the one without cancellation
    sigma_sq = (d + disc) / 2.0 if d >= 0.0 else e**2 / (2.0 * (disc - d))
    sigma = math.sqrt(sigma_sq)
    if abs(sigma - nu) < 1e-14 * max(sigma, nu):
        raise DegenerateParameters("sigma = nu is excluded")
    rho = nu * (alpha + 2.0 * M) / (varsigma * sigma)
    kappa = (nu**2 + ((1.0 - beta) * M - alpha) ** 2) / (2.0 * nu * M)
    root = sigma + 1j * varsigma * rho
    lam_p = (-(nu + 1j * (alpha + 2.0 * beta * M)) + root) / 2.0
    lam_m = (-(nu + 1j * (alpha + 2.0 * beta * M)) - root) / 2.0
    w = (varsigma * rho - alpha + 1j * (nu - sigma)) / (2.0 * M) - 1.0
    z = abs(w) ** 2
    a_sq = {
        float(s): float(gamma_fn(2.0 * s + 1.0)) * M ** (2.0 * s) * kappa ** (1.0 - 2.0 * s)
        for s in s_list
    }
    return AsymptoticConstants(varsigma, sigma, rho, kappa, lam_p, lam_m, z, a_sq)


def _w_factor(cst: AsymptoticConstants, nu: float, alpha: float, M: float) -> complex:
    """Complex factor W with |W|^2 = Z relating the decaying p and b amplitudes."""
    return (cst.varsigma * cst.rho - alpha + 1j * (nu - cst.sigma)) / (2.0 * M) - 1.0


def matrix_A(nu: float, alpha: float, M: float) -> tuple[np.ndarray, np.ndarray]:
    """The linear part of the reduced scattering system and its eigenvalues."""
    a = np.array(
        [
            [2.0 * nu, 0.0, 0.0, -2.0],
            [0.0, 0.0, 0.0, -2.0],
            [0.0, 0.0, nu, 2.0 * M + alpha],
            [-(M**2), -(M**2), -(2.0 * M + alpha), nu],
        ]
    )
    return a, np.linalg.eigvals(a)


def q_nonlinearity(x: np.ndarray, beta: float, M: float) -> np.ndarray:
    """Quadratic-cubic nonlinearity of the reduced scattering system."""
    eta, delta, zr, zi = x
    coup = eta + (3.0 - beta) * delta
    return np.array(
        [
            0.0,
            0.0,
            coup * zi,
            -coup * zr - 2.0 * M * delta**2 - 4.0 * M * eta * delta
            + delta**3 + 3.0 * eta * delta**2,
        ]
    )


def _x_infinity(nu: float, alpha: float, M: float, cst: AsymptoticConstants) -> np.ndarray:
    s = cst.sigma
    return np.array(
        [1.0, (s - nu) / (s + nu), (2.0 * M + alpha) * (nu - s) / (2.0 * s), (nu - s) / 2.0]
    )


def scatter_tail_solve(
    eta_inf: float,
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    T: float,
    grid_h: float | None = None,
    span: float = 40.0,
    max_iter: int = 60,
) -> np.ndarray:
    """Solve the reduced scattering system on [T, infinity) and return X(T).

    Fixed-point iteration on the tail integral formulation
        X(t) = e^{-tA} X_inf - int_t^inf e^{(s-t)A} Q(X(s)) ds
    in the exponentially weighted sup norm, on a uniform grid of step
    grid_h = 0.05/(nu+sigma) truncated once the weighted integrand is
    negligible. X_inf is eta_inf times the decaying eigenvector of A.
    """
    cst = constants(nu, alpha, beta, M)
    rate = nu + cst.sigma
    if eta_inf * math.exp(-rate * T) >= 1e-3 * M:
        raise NoContraction(
            f"eta_inf e^(-(nu+sigma)T) = {eta_inf * math.exp(-rate * T):.3e} "
            f"not small against M = {M:g}; increase T"
        )
    a, _ = matrix_A(nu, alpha, M)
    v_inf = _x_infinity(nu, alpha, M, cst)  # A v = rate v
    h = grid_h if grid_h is not None else 0.05 / rate
    n = int(span / (rate * h)) + 1
    t = T + h * np.arange(n + 1)

    # diagonalize A once; the tail integral then reduces to a scalar
    # backward recurrence per eigendirection
    evals, vecs = np.linalg.eig(a)
    vinv = np.linalg.inv(vecs)
    elh = np.exp(evals * h)  # e^{lambda h}

    lin = eta_inf * math.exp(-rate * T) * np.exp(-rate * (t - T))[None, :] * v_inf[:, None]
    x = lin.copy()
    prev_change = None
    for _ in range(max_iter):
        q = np.stack([q_nonlinearity(x[:, i], beta, M) for i in range(t.size)], axis=1)
        y = vinv @ q.astype(complex)
        integ = np.zeros_like(y)
        # I_i = e^{lam h} I_{i+1} + (h/2)(y_i + e^{lam h} y_{i+1})
        for i in range(t.size - 2, -1, -1):
            integ[:, i] = elh * integ[:, i + 1] + 0.5 * h * (y[:, i] + elh * y[:, i + 1])
        x_new = lin - np.real(vecs @ integ)
        # measure the update in the exponentially weighted sup norm, relative
        # to the solution's own weighted size
        weight = np.exp(rate * (t - T))[None, :]
        change = float(np.max(np.abs(x_new - x) * weight)) / (
            float(np.max(np.abs(x_new) * weight)) + 1e-300
        )
        x = x_new
        if prev_change is not None and change > 0.5 * prev_change and change > 1e-13:
            raise NoContraction("tail fixed point is not contracting; increase T")
        if change < 1e-14:
            break
        prev_change = change if change > 0 else None
    return x[:, 0]


def seed_bcp_at_time(
    charge: AsymptoticCharge,
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    T: float,
) -> RankOneState:
    """Leading-order (b, c, p) at time T from the decaying asymptotic laws."""
    cst = constants(nu, alpha, beta, M)
    sigma = cst.sigma
    rate = (nu + sigma) / 2.0
    w = _w_factor(cst, nu, alpha, M)
    b = math.sqrt(charge.eta_inf) * cmath.exp(
        -rate * T + 1j * (-T * (2.0 * M + alpha) * (nu + sigma) / (2.0 * sigma) + charge.phi)
    )
    c = math.sqrt(M) * cmath.exp(1j * (-T * M * (1.0 - beta) + charge.theta))
    p = (
        math.sqrt(charge.eta_inf / M)
        * w
        * cmath.exp(
            -rate * T
            + 1j
            * (
                T * ((alpha + 2.0 * M * beta) * sigma + (2.0 * M + alpha) * nu) / (2.0 * sigma)
                + charge.theta
                - charge.phi
            )
        )
    )
    return RankOneState(b, c, p)


def construct_sigma_point(
    charge: AsymptoticCharge,
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    T: float,
    verify: bool = True,
    mass_floor_tol: float = 1e-8,
) -> RankOneState:
    """Point of the scattering manifold at t = 0 with the given asymptotic data.

    Seeds (b, c, p) at time T from the decaying asymptotics and shoots the
    rank-one system backward to t = 0. With verify=True the state is
    re-integrated forward and the defining mass floor mass(u(t)) >= M is
    checked along the way.
    """
    rate = nu + constants(nu, alpha, beta, M).sigma
    if charge.eta_inf * math.exp(-rate * T) >= 1e-3 * M:
        raise NoContraction("T too small for this eta_inf; asymptotic seed invalid")
    seed = seed_bcp_at_time(charge, nu, alpha, beta, M, T)
    p = Params(nu=nu, alpha=alpha, beta=beta, rel_tol=1e-12, abs_tol=1e-14)
    back = evolve_bcp(seed, p, t_end=0.0, sample_dt=min(0.05, T / 10.0), t_start=T)
    state0 = back.states[-1]
    if verify:
        fwd = sigma_forward_trajectory(state0, nu, alpha, beta, M, T)
        m = fwd.mass()
        if np.min(m) < M * (1.0 - mass_floor_tol):
            raise SigmaCheckFailed(
                f"mass floor violated: min mass = {np.min(m):.12g} < M = {M:g}"
            )
    return state0


def sigma_forward_trajectory(
    state0: RankOneState,
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    t_end: float,
    sample_dt: float = 0.02,
) -> RankOneTrajectory:
    """Forward rank-one run used to verify and rate-fit a scattering point."""
    p = Params(nu=nu, alpha=alpha, beta=beta, rel_tol=1e-12, abs_tol=1e-14)
    return evolve_bcp(state0, p, t_end=t_end, sample_dt=sample_dt)
