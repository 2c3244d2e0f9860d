"""Finite-section Hankel and shifted-Hankel operators and their spectra.

The Hankel operator of symbol u is the antilinear map f -> Pi(u * conj(f));
its square is linear with matrix Gamma Gamma^dagger where Gamma_{jk} =
u_hat(j+k). The shifted operator uses the down-shifted symbol, i.e. entries
u_hat(j+k+1). The spectrum of the shifted square is the flow invariant that
drives everything else in this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EigensolverError
from .modes import ModeVector, Params, _rhs_coeffs, mass, shift_down

__all__ = [
    "SpectrumReport",
    "hankel_sq_matrix",
    "spectrum",
    "F_functional",
    "omega_membership",
    "toeplitz_abs2_matrix",
    "lax_generator",
    "lax_residual",
]

ZERO_TOL = 1e-10      # eigenvalues below ZERO_TOL * top are treated as zero
CLUSTER_TOL = 1e-7    # relative gap below which eigenvalues merge into one cluster
DOM_TOL = 1e-6        # relative projection threshold for dominance


@dataclass(frozen=True)
class SpectrumReport:
    """Distinct positive eigenvalues (decreasing), multiplicities, dominance flags."""

    values: tuple[float, ...]
    mults: tuple[int, ...]
    dominant: tuple[bool, ...]
    cluster_tol: float = CLUSTER_TOL

    def to_json(self) -> str:
        return json.dumps(
            {
                "values": list(self.values),
                "mults": list(self.mults),
                "dominant": list(self.dominant),
            }
        )

    @staticmethod
    def from_json(text: str) -> "SpectrumReport":
        d = json.loads(text)
        return SpectrumReport(
            tuple(d["values"]), tuple(d["mults"]), tuple(map(bool, d["dominant"]))
        )


def hankel_sq_matrix(u: ModeVector, n: int, shifted: bool = False) -> np.ndarray:
    """n x n matrix of the squared (shifted) Hankel operator, Gamma Gamma^dagger."""
    offset = 1 if shifted else 0
    if 2 * (n - 1) + offset >= u.n:
        raise ValueError(
            f"section size {n} needs coefficients up to {2 * (n - 1) + offset}, "
            f"but only {u.n} modes are stored"
        )
    j = np.arange(n)
    gamma = u.coeffs[j[:, None] + j[None, :] + offset]
    return gamma @ gamma.conj().T


def spectrum(
    u: ModeVector,
    shifted: bool = False,
    n: int | None = None,
    cluster_tol: float = CLUSTER_TOL,
    zero_tol: float = ZERO_TOL,
    dom_tol: float = DOM_TOL,
) -> SpectrumReport:
    """Clustered eigenvalues of the squared (shifted) Hankel finite section.

    Eigenvalues below zero_tol * (top eigenvalue) are discarded; values within
    relative cluster_tol merge into one cluster with summed multiplicity. A
    cluster is flagged dominant when u has a non-negligible projection onto
    its eigenspace.
    """
    if n is None:
        n = u.n // 2
    h = hankel_sq_matrix(u, n, shifted=shifted)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    if vals.size == 0 or vals[0] <= 0.0:
        return SpectrumReport((), (), (), cluster_tol)
    keep = vals > zero_tol * vals[0]
    vals = vals[keep]
    vecs = vecs[:, keep]

    uvec = np.asarray(u.coeffs[:n])
    unorm = np.linalg.norm(uvec)
    proj = np.abs(vecs.conj().T @ uvec)  # |<e_i, u>| per eigenvector

    values: list[float] = []
    mults: list[int] = []
    dominant: list[bool] = []
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and vals[i] - vals[j] <= cluster_tol * vals[i]:
            j += 1
        block_proj = float(np.sqrt(np.sum(proj[i:j] ** 2)))
        values.append(float(np.mean(vals[i:j])))
        mults.append(j - i)
        dominant.append(bool(unorm > 0 and block_proj > dom_tol * unorm))
        i = j
    return SpectrumReport(tuple(values), tuple(mults), tuple(dominant), cluster_tol)


def F_functional(u: ModeVector, n: int | None = None) -> float:
    """Alternating sum of the distinct positive eigenvalues of the shifted square."""
    rep = spectrum(u, shifted=True, n=n)
    return float(sum((-1) ** k * v for k, v in enumerate(rep.values)))


def omega_membership(u: ModeVector, margin: float = 1e-10, n: int | None = None) -> str:
    """Classify u against the exploding-data criterion mass < F.

    Returns "InOmega", "Boundary" or "Outside". On the boundary the verdict
    string carries whether the zero mode is nonzero (the second exploding
    criterion): "Boundary(mean!=0)" or "Boundary(mean=0)".
    """
    m = mass(u)
    f = F_functional(u, n=n)
    if m < f - margin:
        return "InOmega"
    if abs(m - f) <= margin:
        return "Boundary(mean!=0)" if abs(u.coeffs[0]) > margin else "Boundary(mean=0)"
    return "Outside"


def _abs2_coeffs(c: np.ndarray, nmax: int) -> np.ndarray:
    """Fourier coefficients of |u|^2 at frequencies 0..nmax-1 (exact)."""
    out = np.zeros(nmax, dtype=np.complex128)
    n = c.shape[0]
    for m in range(min(nmax, n)):
        out[m] = np.vdot(c[: n - m], c[m:])  # sum conj(c_k) c_{k+m}
    return out


def toeplitz_abs2_matrix(c: np.ndarray, n: int) -> np.ndarray:
    """n x n Toeplitz matrix of symbol |u|^2: entries (j,k) -> |u|^2_hat(j-k)."""
    pos = _abs2_coeffs(c, n)
    j = np.arange(n)
    diff = j[:, None] - j[None, :]
    t = np.where(diff >= 0, pos[np.abs(diff)], np.conj(pos[np.abs(diff)]))
    return t


def lax_generator(u: ModeVector, beta: float, n: int) -> np.ndarray:
    """Matrix of the flow generator commuting the shifted Hankel square.

    Returns C_u - beta * B_{S*u} on an n x n section, where both pieces are
    anti-self-adjoint combinations of a Toeplitz matrix and a Hankel square.
    """
    c = np.asarray(u.coeffs)
    down = shift_down(u)
    h_sh_sq = hankel_sq_matrix(u, n, shifted=True)
    c_op = -1j * toeplitz_abs2_matrix(c, n) + 0.5j * h_sh_sq
    # B of the down-shifted symbol: its (unshifted) Hankel square is the
    # shifted Hankel square of u itself.
    b_op = -1j * toeplitz_abs2_matrix(np.asarray(down.coeffs), n) + 0.5j * h_sh_sq
    return c_op - beta * b_op


def _advance(c: np.ndarray, p: Params, h: float) -> np.ndarray:
    """One accurate integration step of size h (h may be negative)."""
    sol = solve_ivp(
        lambda t, y: _rhs_coeffs(y, p.nu, p.alpha, p.beta),
        (0.0, h),
        c,
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
    )
    return sol.y[:, -1]


def lax_residual(
    u: ModeVector, p: Params, n: int, h: float = 1e-4, n_op: int | None = None
) -> float:
    """Relative defect of the isospectral-evolution identity on finite sections.

    Central finite difference of the shifted Hankel matrix along the flow,
    compared with the commutator with the Lax generator, normalized by the
    Frobenius norm of the shifted Hankel matrix. The shifted Hankel operator
    is antilinear, so the commutator reads G @ Gamma - Gamma @ conj(G). The
    operator products are evaluated on a larger section of size n_op and only
    their top-left n x n block is compared, since the entries of a product of
    infinite matrices are sums over all indices.
    """
    if n_op is None:
        n_op = (u.n - 1) // 2  # largest section the stored coefficients support
    if n_op < n:
        raise ValueError("operator section n_op must be at least the compared block n")
    c = np.asarray(u.coeffs)
    j = np.arange(n_op)

    def gamma(cc: np.ndarray) -> np.ndarray:
        return cc[j[:, None] + j[None, :] + 1]

    h_now = gamma(c)
    h_plus = gamma(_advance(c, p, h))
    h_minus = gamma(_advance(c, p, -h))
    fd = ((h_plus - h_minus) / (2.0 * h))[:n, :n]
    gen = lax_generator(u, p.beta, n_op)
    comm = (gen @ h_now - h_now @ np.conj(gen))[:n, :n]
    denom = np.linalg.norm(h_now[:n, :n])
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(fd - comm) / denom)
