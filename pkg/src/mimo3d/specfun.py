"""Special-function kernel used by the spatial-correlation engine.

Provides spherical Bessel functions, Legendre and renormalized associated
Legendre polynomials, their expansions into sine/cosine harmonics, modified
Bessel functions and the error function of complex argument.

The renormalized associated Legendre function used throughout is

    Pbar_n^m(x) = sqrt((n + 1/2) (n-m)! / (n+m)!) * P_n^m(x)

(no Condon-Shortley phase).  The normalization is folded into the recurrence
seed so every intermediate stays O(1); the plain (n+m)! post-factor would
overflow past n ~ 85.

The harmonic expansions are

    P_{2n}(cos x)          = p_n^2 + 2 * sum_{k=1..n} p_{n-k} p_{n+k} cos(2kx)
    Pbar_{2n}^{2m}(cos x)  = sum_{k=0..n} c_k cos(2kx)
    Pbar_{2n-1}^{2m-1}(cos x) = sum_{k=1..n} d_k sin((2k-1)x)

Coefficients are obtained by numerical projection on a uniform midpoint grid
over [0, pi].  Because the targets are finite trigonometric polynomials, the
midpoint rule is exact (up to roundoff) once the grid has more points than
twice the polynomial degree; results are cached per (kind, degree, order).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

MAX_DEGREE = 200

EVEN_LEGENDRE = "even-legendre"
EVEN_ASSOCIATED = "even-associated"
ODD_ASSOCIATED = "odd-associated"


def spherical_bessel_j(n: int, x: float) -> float:
    """Spherical Bessel function j_n(x) for x >= 0, n <= MAX_DEGREE."""
    if n < 0 or n > MAX_DEGREE:
        raise ValueError(f"order must be in [0, {MAX_DEGREE}], got {n}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    return float(_sp.spherical_jn(n, x))


def spherical_bessel_j_all(nmax: int, x: float) -> np.ndarray:
    """j_0(x) .. j_nmax(x) as a vector."""
    if nmax < 0 or nmax > MAX_DEGREE:
        raise ValueError(f"order must be in [0, {MAX_DEGREE}], got {nmax}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    return _sp.spherical_jn(np.arange(nmax + 1), x)


def legendre_p(n: int, x):
    """Legendre polynomial P_n(x) by the three-term recurrence.

    Accepts a scalar or ndarray argument in [-1, 1].
    """
    if n < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p if p.ndim else float(p)


def assoc_legendre_pbar(n: int, m: int, x):
    """Renormalized associated Legendre Pbar_n^m(x), m <= n.

    The sqrt((n+1/2)(n-m)!/(n+m)!) factor is applied term by term during the
    recursion, never as a trailing factorial ratio.
    """
    if m < 0 or n < 0:
        raise ValueError("degree and order must be >= 0")
    if m > n:
        raise ValueError(f"order {m} exceeds degree {n}")
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.maximum(1.0 - x * x, 0.0))
    # Seed: Pbar_m^m = sqrt((m+1/2) (2m-1)!!/(2m)!!) (1-x^2)^(m/2), built up
    # one factor at a time so intermediates stay O(1).
    p = np.full_like(x, 1.0 / np.sqrt(2.0))
    for k in range(1, m + 1):
        p = np.sqrt((2 * k + 1) / (2.0 * k)) * s * p
    if n == m:
        return p if p.ndim else float(p)
    p_prev = p
    p = np.sqrt(2 * m + 3.0) * x * p_prev
    for k in range(m + 1, n):
        alpha = np.sqrt((2 * k + 1) * (2 * k + 3) / ((k + 1.0 - m) * (k + 1.0 + m)))
        beta = np.sqrt(
            (2 * k + 3)
            * (k - m)
            * (k + m)
            / ((2 * k - 1.0) * (k + 1.0 - m) * (k + 1.0 + m))
        )
        p, p_prev = alpha * x * p - beta * p_prev, p
    return p if p.ndim else float(p)


def legendre_p_zero(n: int) -> float:
    """P_n(0); vanishes for odd n."""
    return legendre_p(n, 0.0)


def modified_bessel_i(n: int, kappa: float) -> float:
    """Modified Bessel function I_n(kappa) for kappa in [0, 500], n <= 100."""
    if n < 0 or n > 100:
        raise ValueError(f"order must be in [0, 100], got {n}")
    if kappa < 0 or kappa > 500:
        raise ValueError(f"argument must be in [0, 500], got {kappa}")
    return float(_sp.iv(n, kappa))


_ERF_BOX = 30.0


def erf_complex(z: complex) -> complex:
    """Error function of complex argument, |Re z|, |Im z| <= 30."""
    z = complex(z)
    if abs(z.real) > _ERF_BOX or abs(z.imag) > _ERF_BOX:
        raise ValueError(f"argument {z} outside the supported range |Re|,|Im| <= {_ERF_BOX}")
    return complex(_sp.erf(z))


@dataclass(frozen=True)
class TrigExpansion:
    """Finite sine/cosine expansion of a (renormalized associated) Legendre polynomial.

    For cosine kinds ``coefficients[k]`` multiplies cos(2kx); for the odd
    (sine) kind ``coefficients[k]`` multiplies sin((2k+1)x).
    """

    kind: str
    degree: int
    order: int
    coefficients: tuple

    def reconstruct(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.kind == ODD_ASSOCIATED:
            for k, coef in enumerate(self.coefficients):
                out += coef * np.sin((2 * k + 1) * x)
        else:
            for k, coef in enumerate(self.coefficients):
                out += coef * np.cos(2 * k * x)
        return out

    def target(self, x):
        """The polynomial the expansion represents, evaluated at cos(x)."""
        c = np.cos(np.asarray(x, dtype=float))
        if self.kind == EVEN_LEGENDRE:
            return legendre_p(self.degree, c)
        return assoc_legendre_pbar(self.degree, self.order, c)


def trig_expansion(kind: str, n: int, m: int = 0) -> TrigExpansion:
    """Harmonic expansion coefficients for the three Legendre families.

    ``kind`` selects the family: ``even-legendre`` expands P_{2n},
    ``even-associated`` expands Pbar_{2n}^{2m} (1 <= m <= n) and
    ``odd-associated`` expands Pbar_{2n-1}^{2m-1} (1 <= m <= n).
    """
    if kind == EVEN_LEGENDRE:
        if m != 0:
            raise ValueError("even-legendre expansion takes no order")
        if n < 0 or 2 * n > MAX_DEGREE:
            raise ValueError(f"degree 2n out of range for n={n}")
    elif kind == EVEN_ASSOCIATED:
        if not (1 <= m <= n) or 2 * n > MAX_DEGREE:
            raise ValueError(f"inconsistent even-associated orders n={n}, m={m}")
    elif kind == ODD_ASSOCIATED:
        if not (1 <= m <= n) or 2 * n - 1 > MAX_DEGREE:
            raise ValueError(f"inconsistent odd-associated orders n={n}, m={m}")
    else:
        raise ValueError(f"unknown expansion kind {kind!r}")
    return _trig_expansion_cached(kind, n, m)


@lru_cache(maxsize=None)
def _trig_expansion_cached(kind: str, n: int, m: int) -> TrigExpansion:
    # Midpoint grid over [0, pi].  All integrands are trig polynomials with
    # even frequencies <= 4n, so any grid with more than 2n points is exact.
    npts = 4 * (n + 1)
    x = (np.arange(npts) + 0.5) * np.pi / npts
    if kind == EVEN_LEGENDRE:
        degree, order = 2 * n, 0
        values = legendre_p(degree, np.cos(x))
    elif kind == EVEN_ASSOCIATED:
        degree, order = 2 * n, 2 * m
        values = assoc_legendre_pbar(degree, order, np.cos(x))
    else:
        degree, order = 2 * n - 1, 2 * m - 1
        values = assoc_legendre_pbar(degree, order, np.cos(x))

    if kind == ODD_ASSOCIATED:
        ks = np.arange(1, n + 1)
        basis = np.sin((2 * ks[:, None] - 1) * x[None, :])
        coeffs = 2.0 / npts * basis @ values
    else:
        ks = np.arange(0, n + 1)
        basis = np.cos(2 * ks[:, None] * x[None, :])
        coeffs = 2.0 / npts * basis @ values
        coeffs[0] *= 0.5
    return TrigExpansion(kind, degree, order, tuple(float(c) for c in coeffs))
