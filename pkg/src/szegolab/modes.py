"""Fourier-side representation of the positive-frequency Hardy space on the torus.

States are truncated vectors of Fourier coefficients u_hat(k), k = 0..N-1.
All operations are pure: they never mutate their input and return fresh
arrays, so values can be shared freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModeVector",
    "Params",
    "mean",
    "mass",
    "momentum",
    "sobolev_sq",
    "tail_fraction",
    "shift_up",
    "shift_down",
    "cubic_term",
    "beta_term",
    "rhs_full",
    "mode_vector_to_json",
    "mode_vector_from_json",
]


@dataclass(frozen=True)
class ModeVector:
    """Truncated coefficient vector of a positive-frequency state.

    coeffs[k] is the Fourier coefficient at frequency k >= 0.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @staticmethod
    def zeros(n: int) -> "ModeVector":
        return ModeVector(np.zeros(n, dtype=np.complex128))

    @staticmethod
    def from_terms(terms: dict[int, complex], n: int) -> "ModeVector":
        """Build a state from a sparse {frequency: coefficient} mapping."""
        c = np.zeros(n, dtype=np.complex128)
        for k, v in terms.items():
            if not 0 <= k < n:
                raise ValueError(f"frequency {k} outside [0, {n})")
            c[k] = v
        return ModeVector(c)


@dataclass(frozen=True)
class Params:
    """Equation and solver parameters (damping nu > 0, deformations alpha, beta)."""

    nu: float
    alpha: float = 0.0
    beta: float = 0.0
    N: int = 256
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.N < 8:
            raise ValueError("N must be at least 8")


def mean(u: ModeVector) -> complex:
    """Zero-frequency coefficient, i.e. the pairing of u with the constant 1."""
    return complex(u.coeffs[0])


def mass(u: ModeVector) -> float:
    """Squared L2 norm, sum of |u_hat(k)|^2."""
    return float(np.sum(np.abs(u.coeffs) ** 2))


def momentum(u: ModeVector) -> float:
    """Conserved momentum, sum of k |u_hat(k)|^2."""
    k = np.arange(u.n)
    return float(np.sum(k * np.abs(u.coeffs) ** 2))


def sobolev_sq(u: ModeVector, s: float) -> float:
    """Squared Sobolev norm with weight (1 + k^2)^s."""
    k = np.arange(u.n)
    return float(np.sum((1.0 + k.astype(float) ** 2) ** s * np.abs(u.coeffs) ** 2))


def tail_fraction(u: ModeVector) -> float:
    """Fraction of the (1+k)-weighted energy carried by frequencies k >= N/2.

    Used as the truncation-validity indicator: when it grows, the upper half
    of the spectrum is active and the mode cutoff no longer represents the
    solution.
    """
    w = (1.0 + np.arange(u.n)) * np.abs(u.coeffs) ** 2
    total = w.sum()
    if total == 0.0:
        return 0.0
    return float(w[u.n // 2 :].sum() / total)


def shift_up(u: ModeVector) -> ModeVector:
    """Multiplication by e^{ix}: coefficients move one slot up (top one drops)."""
    c = np.zeros(u.n, dtype=np.complex128)
    c[1:] = u.coeffs[:-1]
    return ModeVector(c)


def shift_down(u: ModeVector) -> ModeVector:
    """Adjoint shift: drop the zero mode and move coefficients one slot down."""
    c = np.zeros(u.n, dtype=np.complex128)
    c[:-1] = u.coeffs[1:]
    return ModeVector(c)


def _cubic_coeffs(c: np.ndarray) -> np.ndarray:
    """Nonnegative-frequency coefficients of |u|^2 u for coefficient vector c.

    Computed on a grid zero-padded to 2N. The triple product has true
    spectral support in [-(N-1), 2N-2], so with a 2N-point grid none of the
    aliased copies lands back in the retained window [0, N-1]: the first N
    output coefficients are exact.
    """
    n = c.shape[0]
    g = 2 * n
    spec = np.zeros(g, dtype=np.complex128)
    spec[:n] = c
    vals = np.fft.ifft(spec) * g
    w = np.abs(vals) ** 2 * vals
    out = np.fft.fft(w) / g
    return out[:n]


def cubic_term(u: ModeVector) -> ModeVector:
    """Positive-frequency projection of |u|^2 u."""
    return ModeVector(_cubic_coeffs(np.asarray(u.coeffs)))


def beta_term(u: ModeVector) -> ModeVector:
    """Shift-conjugated cubic term: shift down, apply the cubic term, shift up.

    Returned without its coupling-constant prefactor.
    """
    down = np.zeros(u.n, dtype=np.complex128)
    down[:-1] = u.coeffs[1:]
    out = np.zeros(u.n, dtype=np.complex128)
    out[1:] = _cubic_coeffs(down)[:-1]
    return ModeVector(out)


def _rhs_coeffs(c: np.ndarray, nu: float, alpha: float, beta: float) -> np.ndarray:
    rhs = _cubic_coeffs(c)
    rhs[0] += alpha * c[0]
    if beta != 0.0:
        down = np.zeros_like(c)
        down[:-1] = c[1:]
        bt = np.zeros_like(c)
        bt[1:] = _cubic_coeffs(down)[:-1]
        rhs -= beta * bt
    out = -1j * rhs
    out[0] -= nu * c[0]
    return out


def rhs_full(u: ModeVector, p: Params) -> ModeVector:
    """Time derivative of u under the damped equation.

    d_t u = -i [ Pi(|u|^2 u) + alpha (u|1) - beta * beta_term(u) ] - nu (u|1),
    where the zero-mode pairing (u|1) enters as the constant function.
    """
    return ModeVector(_rhs_coeffs(np.asarray(u.coeffs), p.nu, p.alpha, p.beta))


def cubic_term_direct(u: ModeVector) -> ModeVector:
    """O(N^3) triple-sum oracle for cubic_term (test reference, slow)."""
    c = u.coeffs
    n = u.n
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        # frequency i = k + l - m with k, l, m in [0, n)
        for k in range(n):
            for l in range(n):
                m = k + l - i
                if 0 <= m < n:
                    out[i] += c[k] * c[l] * np.conj(c[m])
    return ModeVector(out)


def mode_vector_to_json(u: ModeVector) -> str:
    """Serialize as a JSON array of [re, im] pairs, index = frequency."""
    return json.dumps([[float(z.real), float(z.imag)] for z in u.coeffs])


def mode_vector_from_json(text: str) -> ModeVector:
    pairs = json.loads(text)
    c = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
    return ModeVector(c)
