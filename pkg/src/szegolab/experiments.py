"""Rate fitting, blow-up/scattering classification, stationary data, sweeps.

This is the laboratory layer: it drives the integrators from the other
modules, fits the predicted asymptotic laws (power laws for blow-up, decay
rates for scattering, the t*gamma(t) -> kappa law), constructs stationary
data for beta = 1, and runs classification sweeps over parameter grids.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .asymptotics import constants
from .errors import (
    DegenerateParameters,
    InequalityViolated,
    InsufficientSamples,
    NewtonDiverged,
    OrderingViolated,
    SearchFailed,
)
from .hankel import F_functional, omega_membership, spectrum
from .modes import ModeVector, Params, cubic_term, mass, rhs_full
from .rank_one import (
    RankOneState,
    ReducedState,
    evolve_reduced,
    rank_one_momentum,
)

__all__ = [
    "FitResult",
    "fit_power_law",
    "fit_exp_rate",
    "kappa_check",
    "stationary_rho_solver",
    "stationary_norms_sq",
    "StationaryCandidate",
    "stationary_search",
    "ClassifyResult",
    "classify",
    "sweep",
    "sweep_to_csv",
    "reduced_sobolev_sq",
]

MIN_FIT_SAMPLES = 20
CIRCLE_TOL = 1e-12  # |b|, |p| below this means the state is on the circle


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of a power law y = A t^k or a decay y = A e^{-rt}."""

    exponent: float       # power-law exponent k, or the decay rate r
    amplitude: float
    r_squared: float
    window: tuple[float, float]

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError("r_squared outside [0, 1]")


def _window_mask(t: np.ndarray, window: tuple[float, float] | None) -> np.ndarray:
    if window is None:
        return np.ones(t.shape, dtype=bool)
    lo, hi = window
    return (t >= lo) & (t <= hi)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)


def fit_power_law(
    t: np.ndarray, y: np.ndarray, window: tuple[float, float] | None = None
) -> FitResult:
    """Fit y = A t^k by least squares on (log t, log y)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    m = _window_mask(t, window) & (t > 0) & (y > 0)
    if int(m.sum()) < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"power-law fit needs >= {MIN_FIT_SAMPLES} positive samples, got {int(m.sum())}"
        )
    slope, intercept, r2 = _linfit(np.log(t[m]), np.log(y[m]))
    w = (float(t[m].min()), float(t[m].max()))
    return FitResult(slope, float(np.exp(intercept)), r2, w)


def fit_exp_rate(
    t: np.ndarray, y: np.ndarray, window: tuple[float, float] | None = None
) -> FitResult:
    """Fit y = A e^{-rt} by least squares on (t, log y); exponent holds r."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    m = _window_mask(t, window) & (y > 0)
    if int(m.sum()) < MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"rate fit needs >= {MIN_FIT_SAMPLES} positive samples, got {int(m.sum())}"
        )
    slope, intercept, r2 = _linfit(t[m], np.log(y[m]))
    w = (float(t[m].min()), float(t[m].max()))
    return FitResult(-slope, float(np.exp(intercept)), r2, w)


def _generic_reduced_start(M: float, eta0: float, q0: float = 0.5,
                           phase: float = 0.4) -> ReducedState:
    """Generic blow-up-chart start off the circle and off the scattering set."""
    gam = M * (1.0 - q0)
    zeta_mod = np.sqrt(gam**2 * eta0 * (M - gam))  # |zeta|^2 = gamma^2 eta (M-gamma)
    zeta = zeta_mod * np.exp(1j * phase)
    return ReducedState(eta0, gam, complex(zeta), "blowup", M)


def kappa_check(
    nu: float,
    alpha: float,
    beta: float,
    M: float,
    eta0: float,
    t_end: float,
    q0: float = 0.5,
    sample_dt: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Long reduced blow-up run; returns (t, t*gamma(t)) for the decay-law check."""
    p = Params(nu=nu, alpha=alpha, beta=beta, rel_tol=1e-11, abs_tol=1e-13)
    start = _generic_reduced_start(M, eta0, q0=q0)
    dt = sample_dt if sample_dt is not None else max(t_end / 2000.0, 0.05)
    traj = evolve_reduced(start, p, t_end, sample_dt=dt)
    return traj.times, traj.times * traj.second


def reduced_sobolev_sq(gamma: np.ndarray, eta: np.ndarray, M: float, s: float) -> np.ndarray:
    """Squared H^s norm along a blow-up-chart run, via the tail closed form.

    Valid once gamma = M(1-|p|^2) is small: the geometric tail contributes
    Gamma(2s+1) M^{2s} gamma^{1-2s} and the mean contributes eta.
    """
    from scipy.special import gamma as gamma_fn

    return eta + float(gamma_fn(2.0 * s + 1.0)) * M ** (2.0 * s) * gamma ** (1.0 - 2.0 * s)


# --------------------------------------------------------------------------
# Stationary data for beta = 1


def stationary_rho_solver(
    sigma1: float, sigma2: float, eps: float
) -> tuple[float, float, float]:
    """Spectral-level existence check: roots of P(x) = x(x^2-s1^2)(x^2-s2^2) = +-eps.

    Newton iterations from seeds (sigma1, sigma2, 0) solving P(rho1) = eps,
    P(rho2) = -eps, P(rho3) = eps; the ordering rho1 > sigma1 > rho2 >
    sigma2 > rho3 > 0 and the inequality rho1^2+rho2^2+rho3^2 < 2 sigma1^2
    are verified before returning.
    """
    if not sigma1 > sigma2 > 0:
        raise ValueError("need sigma1 > sigma2 > 0")

    def p_val(x: float) -> float:
        return x * (x**2 - sigma1**2) * (x**2 - sigma2**2)

    def p_der(x: float) -> float:
        return (
            (x**2 - sigma1**2) * (x**2 - sigma2**2)
            + 2.0 * x**2 * (x**2 - sigma2**2)
            + 2.0 * x**2 * (x**2 - sigma1**2)
        )

    rhos = []
    for seed, target in ((sigma1, eps), (sigma2, -eps), (0.0, eps)):
        x = seed
        for _ in range(100):
            d = p_der(x)
            if d == 0.0:
                raise NewtonDiverged(f"zero derivative at x = {x:g}")
            step = (p_val(x) - target) / d
            x -= step
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        else:
            raise NewtonDiverged(f"no convergence from seed {seed:g}")
        if abs(p_val(x) - target) > 1e-12:
            raise NewtonDiverged(f"residual {abs(p_val(x) - target):.3e} from seed {seed:g}")
        rhos.append(x)
    r1, r2, r3 = rhos
    if not (r1 > sigma1 > r2 > sigma2 > r3 > 0.0):
        raise OrderingViolated(
            f"rho ordering failed: ({r1:g}, {sigma1:g}, {r2:g}, {sigma2:g}, {r3:g})"
        )
    if not r1**2 + r2**2 + r3**2 < 2.0 * sigma1**2:
        raise InequalityViolated("sum of rho^2 not below 2 sigma1^2; eps too large")
    return r1, r2, r3


def stationary_norms_sq(
    rhos: tuple[float, float, float], sigma1: float, sigma2: float
) -> tuple[float, float, float]:
    """Closed-form squared norms of the three singular projections of u."""
    r = np.asarray(rhos, dtype=float)
    out = []
    for j in range(3):
        num = r[j] ** 2 * (r[j] ** 2 - sigma1**2) * (r[j] ** 2 - sigma2**2)
        den = np.prod([r[j] ** 2 - r[k] ** 2 for k in range(3) if k != j])
        out.append(float(num / den))
    return tuple(out)


@dataclass(frozen=True)
class StationaryCandidate:
    """Accepted stationary datum for beta = 1 with its certification numbers."""

    u: ModeVector
    residual_mean: float
    residual_cubic: float
    omega: str
    shifted_rank: int
    rho_list: tuple[float, ...] = field(default_factory=tuple)
    sigma_list: tuple[float, ...] = field(default_factory=tuple)


def _cubic_zero_coeff(c_free: np.ndarray) -> np.ndarray:
    """Real/imag parts of the zero mode of Pi(|u|^2 u) with u_hat(0) = 0."""
    coeffs = np.zeros(c_free.size // 2 + 1, dtype=np.complex128)
    coeffs[1:] = c_free[0::2] + 1j * c_free[1::2]
    z = cubic_term(ModeVector(coeffs)).coeffs[0]
    return np.array([z.real, z.imag])


def stationary_search(
    K: int,
    seed: int = 0,
    max_tries: int = 60,
    residual_tol: float = 1e-12,
    margin: float = 0.3,
) -> StationaryCandidate:
    """Search coefficient space for a stationary datum of the beta = 1 flow.

    Stationarity at beta = 1 is equivalent to u_hat(0) = 0 together with a
    vanishing zero mode of Pi(|u|^2 u); the first is enforced structurally
    and the second is driven to zero by least squares over the remaining
    coefficients, with a hinge penalty pushing the candidate strictly inside
    the spectral blow-up criterion mass(u) < F(u). Seeds are redrawn until
    both the residual and the criterion hold.
    """
    if K < 4:
        raise ValueError("mode budget K must be at least 4")
    rng = np.random.default_rng(seed)
    n_embed = max(4 * K, 64)

    def build(x: np.ndarray) -> ModeVector:
        coeffs = np.zeros(n_embed, dtype=np.complex128)
        coeffs[1:K] = x[0::2] + 1j * x[1::2]
        return ModeVector(coeffs)

    def objective(x: np.ndarray) -> np.ndarray:
        z = _cubic_zero_coeff(x)
        u = build(x)
        gap = mass(u) - F_functional(u) + margin
        return np.array([z[0], z[1], max(gap, 0.0)])

    for _ in range(max_tries):
        x0 = rng.standard_normal(2 * (K - 1))
        res = least_squares(objective, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            diff_step=1e-7)
        r = float(np.linalg.norm(_cubic_zero_coeff(res.x)))
        if r > residual_tol:
            continue
        u = build(res.x)
        verdict = omega_membership(u)
        if verdict != "InOmega":
            continue
        rep = spectrum(u, shifted=True)
        return StationaryCandidate(
            u=u,
            residual_mean=float(abs(u.coeffs[0])),
            residual_cubic=r,
            omega=verdict,
            shifted_rank=int(sum(rep.mults)),
        )
    raise SearchFailed(f"no stationary datum inside the blow-up set after {max_tries} tries")


def stationary_residual(u: ModeVector, nu: float = 1.0, alpha: float = 0.0) -> float:
    """Norm of the beta = 1 vector field at u (zero for stationary data)."""
    p = Params(nu=nu, alpha=alpha, beta=1.0)
    return float(np.linalg.norm(rhs_full(u, p).coeffs))


# --------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class ClassifyResult:
    verdict: str                      # Periodic | BlowUp | Scatter | Undetermined
    fit: FitResult | None = None
    kappa_hat: float | None = None


def _extract_rank_one(u: ModeVector) -> RankOneState | None:
    """Recognize a geometric coefficient tail u_hat(k) = c p^{k-1}; None if not."""
    c = u.coeffs
    if c.shape[0] < 4 or abs(c[1]) == 0.0:
        return None
    p = complex(c[2] / c[1])
    if abs(p) >= 1.0:
        return None
    model = c[1] * p ** np.arange(c.shape[0] - 1)
    if np.max(np.abs(c[1:] - model)) > 1e-10 * max(1.0, float(np.abs(c).max())):
        return None
    return RankOneState(complex(c[0]), complex(c[1]), p)


def classify(
    u0: ModeVector | RankOneState,
    p: Params,
    horizon: float = 1.0e4,
) -> ClassifyResult:
    """Decide the fate of rank-one data: periodic orbit, blow-up, or scattering.

    The state is reduced to the three-variable blow-up chart and integrated
    to the horizon. Blow-up is recognized by t*gamma(t) stabilizing (the
    kappa law); scattering by an exponential fit of the distance to the
    circle with R^2 > 0.99. Anything else is reported Undetermined.
    """
    if isinstance(u0, ModeVector):
        state = _extract_rank_one(u0)
        if state is None:
            return ClassifyResult("Undetermined")
    else:
        state = u0
    if abs(state.b) < CIRCLE_TOL and abs(state.p) < CIRCLE_TOL:
        return ClassifyResult("Periodic")
    M = rank_one_momentum(state)
    eta0 = abs(state.b) ** 2
    q0 = abs(state.p) ** 2
    zeta0 = M * state.c * np.conj(state.b) * np.conj(state.p)
    start = ReducedState(eta0, M * (1.0 - q0), complex(zeta0), "blowup", M)
    traj = evolve_reduced(start, p, horizon, sample_dt=max(horizon / 4000.0, 1e-3))
    t, eta, gam = traj.times, traj.eta, traj.second

    # blow-up: t*gamma stabilizes at kappa over the late half of the run
    late = t >= 0.5 * horizon
    tg = t[late] * gam[late]
    if tg.size >= 3 and tg.min() > 0 and (tg.max() - tg.min()) < 0.1 * tg.mean():
        kappa_hat = float(tg[-1])
        hs = reduced_sobolev_sq(gam[late], eta[late], M, s=1.0)
        try:
            fit = fit_power_law(t[late], hs)
        except InsufficientSamples:
            fit = None
        return ClassifyResult("BlowUp", fit=fit, kappa_hat=kappa_hat)

    # scattering: a deep exponential approach to the circle. The approach
    # segment is what gets fitted; data on the stable set will eventually
    # drift off it through rounding, so the final state is not used.
    dist = np.sqrt(np.maximum(eta + (M - gam), 0.0))
    d0 = dist[0]
    i_min = int(np.argmin(dist))
    if d0 > 0 and dist[i_min] < 1e-4 * d0:
        floor = max(1e-5 * d0, 1e-7 * np.sqrt(M), 30.0 * dist[i_min])
        sel = (dist < 0.5 * d0) & (dist > floor) & (t <= t[i_min])
        try:
            fit = fit_exp_rate(t[sel], dist[sel])
        except InsufficientSamples:
            return ClassifyResult("Undetermined")
        if fit.r_squared > 0.99:
            return ClassifyResult("Scatter", fit=fit)
        return ClassifyResult("Undetermined", fit=fit)
    return ClassifyResult("Undetermined")


# --------------------------------------------------------------------------
# Parameter sweeps

SWEEP_COLUMNS = [
    "nu", "alpha", "beta", "M", "family", "verdict",
    "rate", "kappa", "a_sq", "sigma", "r_squared", "error",
]


def _sweep_cell(cell: dict) -> dict:
    """Run one grid cell; always returns a row, errors captured in-row."""
    row = {k: "" for k in SWEEP_COLUMNS}
    row["nu"] = cell["nu"]
    row["alpha"] = cell.get("alpha", 0.0)
    row["beta"] = cell.get("beta", 0.0)
    row["family"] = cell.get("family", "rank1")
    try:
        state = RankOneState(
            complex(cell.get("b", 0.0)),
            complex(cell.get("c", 1.0)),
            complex(cell.get("p", 0.0)),
        )
    except Exception as exc:  # defensive: bad cell spec must not kill the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    try:
        m = rank_one_momentum(state)
        row["M"] = m
        p = Params(nu=row["nu"], alpha=row["alpha"], beta=row["beta"],
                   rel_tol=1e-11, abs_tol=1e-13)
        result = classify(state, p, horizon=cell.get("horizon", 1.0e4))
        row["verdict"] = result.verdict
        if result.fit is not None:
            row["rate"] = result.fit.exponent
            row["r_squared"] = result.fit.r_squared
        if result.kappa_hat is not None:
            row["kappa"] = result.kappa_hat
        try:
            cst = constants(row["nu"], row["alpha"], row["beta"], m, s_list=(1.0,))
            row["a_sq"] = cst.a_sq[1.0]
            row["sigma"] = cst.sigma
        except DegenerateParameters:
            pass
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(cells: list[dict], jobs: int = 1) -> list[dict]:
    """Classify every grid cell, in parallel when jobs > 1.

    Cells are dicts with keys nu, alpha, beta and rank-one data b, c, p
    (complex). Rows come back in grid order; per-cell failures are recorded
    in the row's error column and never abort the sweep.
    """
    if jobs <= 1:
        return [_sweep_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_cell, cells))


def sweep_to_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
