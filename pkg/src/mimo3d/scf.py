"""Closed-form spatial correlation function for a uniform linear array.

The correlation between two ports separated by ``lag`` antenna spacings is
the expectation of the array phase term weighted by the antenna patterns,

    rho(lag) = E[ g_H(phi) g_V(theta) exp(i * beta * lag * sin(phi) sin(theta)) ],

with beta = 2 pi spacing / lambda.  Expanding the plane wave into spherical
waves and the resulting Legendre polynomials into sine/cosine harmonics turns
this into a rapidly converging series whose ingredients are spherical Bessel
values at beta*|lag|, Legendre values at zero argument, the harmonic
expansions from :mod:`mimo3d.specfun`, and the Fourier-series coefficients of
the azimuth and elevation spectra:

    rho(lag) = pi^2 a(0) b(1) j_0(x)
             + sum_n j_{2n}(x)   * A_n          (real, even orders)
             + sum_n j_{2n-1}(x) * i * B_n      (imaginary, odd orders)

where A_n collects the even-Legendre and even-associated contributions and
B_n the odd-associated ones.  A_n and B_n do not depend on the lag, so they
are computed once per (azimuth, elevation, truncation) triple and reused for
every lag of a correlation matrix.

Truncating the series at order ``n`` leaves an error bounded by
``gain * eta * exp(-(n - ceil(e*x/2)))`` with eta ~ 0.6785, which drops below
any practical tolerance a dozen orders past ``e*x/2``.  The series order
needed therefore grows with beta*|lag|; ``required_truncation`` picks it
automatically and ``correlation_matrix(..., auto_truncation=True)`` applies it
to the far lags of large arrays.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from . import specfun
from .spectra import AZIMUTH, ELEVATION, AngularSpectrum

TRUNCATION_ETA = 0.678481234
# specfun caps polynomial degrees at 200; each series order n consumes degree 2n
MAX_TRUNCATION = specfun.MAX_DEGREE // 2


class TruncationWarning(UserWarning):
    """The configured series order is below the certified-error regime for the
    widest lag of the array."""


class TruncationBoundError(ValueError):
    """The exponential truncation bound does not apply (order below e*x/2)."""


class IndefiniteCorrelationError(ValueError):
    """Assembled correlation matrix is indefinite beyond the repair tolerance,
    which signals a series truncation too coarse for the array size."""


@dataclass(frozen=True)
class ScfConfig:
    """Array geometry, series order and the spectrum pair for one link end."""

    spacing_over_lambda: float
    port_count: int
    azimuth: AngularSpectrum
    elevation: AngularSpectrum
    truncation: int = 15
    gain_scale: float = 1.0

    def __post_init__(self):
        if self.spacing_over_lambda <= 0:
            raise ValueError("antenna spacing must be positive")
        if self.port_count < 1:
            raise ValueError("port count must be >= 1")
        if not 1 <= self.truncation <= MAX_TRUNCATION:
            raise ValueError(f"truncation must be in [1, {MAX_TRUNCATION}]")
        if self.gain_scale <= 0:
            raise ValueError("gain scale must be positive")
        if self.azimuth.axis != AZIMUTH or self.elevation.axis != ELEVATION:
            raise ValueError("config needs one azimuth and one elevation spectrum")
        widest = self.beta * (self.port_count - 1)
        if widest > 0 and self.truncation < math.ceil(math.e * widest / 2.0):
            warnings.warn(
                f"truncation {self.truncation} is below the certified regime "
                f"{math.ceil(math.e * widest / 2.0)} for the widest lag; far-lag "
                "values are best-effort (consider auto_truncation)",
                TruncationWarning,
                stacklevel=2,
            )

    @property
    def beta(self) -> float:
        """Wavenumber times antenna spacing, 2 pi d / lambda."""
        return 2.0 * np.pi * self.spacing_over_lambda


@lru_cache(maxsize=None)
def _pbar_zero(degree: int, order: int) -> float:
    return specfun.assoc_legendre_pbar(degree, order, 0.0)


@lru_cache(maxsize=None)
def _legendre_zero(degree: int) -> float:
    return specfun.legendre_p(degree, 0.0)


@lru_cache(maxsize=None)
def _elevation_functionals(elevation: AngularSpectrum, nmax: int):
    """Vectors db[k] = (b(2k+1)-b(2k-1))/2 and da[k] = (a(2k-2)-a(2k))/2.

    These turn the harmonic expansions of the Legendre families into the
    expectations over the elevation spectrum (one extra pi lives in the series
    prefactors).
    """
    ks = np.arange(nmax + 1)
    db = np.array([0.5 * (elevation.b(2 * k + 1) - elevation.b(2 * k - 1)) for k in ks])
    da = np.array([0.5 * (elevation.a(2 * k - 2) - elevation.a(2 * k)) for k in ks])
    return db, da


@lru_cache(maxsize=None)
def _series_coefficients(azimuth: AngularSpectrum, elevation: AngularSpectrum, nmax: int):
    """Lag-independent series weights (constant, A[n], B[n]) for n = 1..nmax."""
    db, da = _elevation_functionals(elevation, nmax)
    a0 = azimuth.a(0)
    constant = np.pi**2 * a0 * elevation.b(1)
    even = np.zeros(nmax + 1)
    odd = np.zeros(nmax + 1)
    pi2 = np.pi**2
    for n in range(1, nmax + 1):
        sign = -1.0 if n % 2 else 1.0
        leg = np.asarray(specfun.trig_expansion(specfun.EVEN_LEGENDRE, n).coefficients)
        term = (4 * n + 1) * _legendre_zero(2 * n) * a0 * float(leg @ db[: n + 1])
        for m in range(1, n + 1):
            pz = _pbar_zero(2 * n, 2 * m)
            if pz != 0.0:
                cs = np.asarray(
                    specfun.trig_expansion(specfun.EVEN_ASSOCIATED, n, m).coefficients
                )
                msign = -1.0 if m % 2 else 1.0
                term += 4.0 * msign * pz * azimuth.a(2 * m) * float(cs @ db[: n + 1])
        even[n] = sign * pi2 * term

        term = 0.0
        for m in range(1, n + 1):
            pz = _pbar_zero(2 * n - 1, 2 * m - 1)
            if pz != 0.0:
                ds = np.asarray(
                    specfun.trig_expansion(specfun.ODD_ASSOCIATED, n, m).coefficients
                )
                msign = -1.0 if m % 2 else 1.0
                term += 4.0 * msign * pz * azimuth.b(2 * m - 1) * float(ds @ da[1 : n + 1])
        odd[n] = sign * pi2 * term
    return constant, even, odd


def rho(config: ScfConfig, lag: int, truncation: int | None = None) -> complex:
    """Correlation coefficient between two ports ``lag`` spacings apart.

    Conjugate-symmetric in the lag; ``truncation`` overrides the configured
    series order for this evaluation.
    """
    lag = int(lag)
    if abs(lag) >= config.port_count:
        raise ValueError(f"|lag| must be below the port count {config.port_count}")
    n0 = config.truncation if truncation is None else int(truncation)
    if not 1 <= n0 <= MAX_TRUNCATION:
        raise ValueError(f"truncation must be in [1, {MAX_TRUNCATION}]")
    constant, even, odd = _series_coefficients(config.azimuth, config.elevation, n0)
    x = config.beta * abs(lag)
    bessel = specfun.spherical_bessel_j_all(2 * n0, x)
    value = constant * bessel[0]
    value += float(bessel[2 :: 2] @ even[1:])
    value += 1j * float(bessel[1 :: 2] @ odd[1:])
    if lag < 0:
        value = np.conj(value)
    return complex(config.gain_scale * value)


@lru_cache(maxsize=None)
def _series_coefficients_2d(azimuth: AngularSpectrum, nmax: int):
    """Flat-elevation analogue: elevation collapses to theta = pi/2, squaring
    the zero-argument Legendre factors and dropping the elevation spectra."""
    a0 = azimuth.a(0)
    constant = np.pi * a0
    even = np.zeros(nmax + 1)
    odd = np.zeros(nmax + 1)
    for n in range(1, nmax + 1):
        sign = -1.0 if n % 2 else 1.0
        term = (4 * n + 1) * _legendre_zero(2 * n) ** 2 * a0
        for m in range(1, n + 1):
            msign = -1.0 if m % 2 else 1.0
            term += 4.0 * msign * _pbar_zero(2 * n, 2 * m) ** 2 * azimuth.a(2 * m)
        even[n] = sign * np.pi * term
        term = 0.0
        for m in range(1, n + 1):
            msign = -1.0 if m % 2 else 1.0
            term += 4.0 * msign * _pbar_zero(2 * n - 1, 2 * m - 1) ** 2 * azimuth.b(2 * m - 1)
        odd[n] = sign * np.pi * term
    return constant, even, odd


def rho_2d(
    azimuth: AngularSpectrum,
    spacing_over_lambda: float,
    lag: int,
    truncation: int = 15,
    gain_scale: float = 1.0,
) -> complex:
    """Correlation of the flat (azimuth-only) model: the elevation angle is
    pinned to pi/2 and the vertical pattern to unit gain."""
    if spacing_over_lambda <= 0:
        raise ValueError("antenna spacing must be positive")
    if not 1 <= truncation <= MAX_TRUNCATION:
        raise ValueError(f"truncation must be in [1, {MAX_TRUNCATION}]")
    lag = int(lag)
    constant, even, odd = _series_coefficients_2d(azimuth, truncation)
    x = 2.0 * np.pi * spacing_over_lambda * abs(lag)
    bessel = specfun.spherical_bessel_j_all(2 * truncation, x)
    value = constant * bessel[0]
    value += float(bessel[2 :: 2] @ even[1:])
    value += 1j * float(bessel[1 :: 2] @ odd[1:])
    if lag < 0:
        value = np.conj(value)
    return complex(gain_scale * value)


def truncation_bound(config: ScfConfig, lag: int, truncation: int | None = None) -> float:
    """Upper bound on the series truncation error at the given lag,
    gain * eta * exp(-delta) with delta = order - ceil(e*beta*|lag|/2)."""
    n0 = config.truncation if truncation is None else int(truncation)
    x = config.beta * abs(int(lag))
    delta = n0 - math.ceil(math.e * x / 2.0)
    if delta < 0:
        raise TruncationBoundError(
            f"order {n0} is below ceil(e*x/2) = {math.ceil(math.e * x / 2.0)}; "
            "the exponential bound does not apply"
        )
    return config.gain_scale * TRUNCATION_ETA * math.exp(-delta)


def required_truncation(beta_lag: float, tol: float = 1e-6) -> int:
    """Smallest series order whose truncation bound (relative to the gain
    scale) is below ``tol``, capped at the polynomial-degree limit."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    margin = max(0, math.ceil(math.log(TRUNCATION_ETA / tol)))
    return min(MAX_TRUNCATION, math.ceil(math.e * beta_lag / 2.0) + margin)


class CorrelationMatrix:
    """Hermitian Toeplitz correlation matrix defined by its first column.

    Eigenvalues inside ``-repair_tol * rho(0)`` of zero are clipped to zero
    (series truncation noise); anything more negative raises, since silently
    repairing a large violation would mask an inadequate series order.
    """

    def __init__(self, first_row, repair_tol: float = 1e-9):
        first_row = np.asarray(first_row, dtype=complex)
        if first_row.ndim != 1 or first_row.size < 1:
            raise ValueError("first row must be a non-empty vector")
        rho0 = first_row[0]
        if rho0.real <= 0 or abs(rho0.imag) > 1e-10 * abs(rho0):
            raise ValueError(f"zero-lag correlation must be real positive, got {rho0}")
        scale = rho0.real
        if np.any(np.abs(first_row) > scale * (1.0 + 1e-9)):
            raise ValueError("correlation magnitudes exceed the zero-lag value")
        first_row = first_row.copy()
        first_row[0] = scale
        self.first_row = first_row
        dense = toeplitz(first_row, np.conj(first_row))
        eigvals, eigvecs = np.linalg.eigh(dense)
        if eigvals[0] < -repair_tol * scale:
            raise IndefiniteCorrelationError(
                f"smallest eigenvalue {eigvals[0]:.3e} below -{repair_tol:.1e} * rho(0); "
                "increase the series order (auto_truncation) or loosen repair_tol"
            )
        if eigvals[0] < 0.0:
            eigvals = np.clip(eigvals, 0.0, None)
            dense = (eigvecs * eigvals) @ eigvecs.conj().T
            dense = 0.5 * (dense + dense.conj().T)
        self._dense = dense
        self._eigvals = eigvals
        self._eigvecs = eigvecs

    @property
    def order(self) -> int:
        return self.first_row.size

    def matrix(self) -> np.ndarray:
        """Dense (repaired) matrix copy."""
        return self._dense.copy()

    def eigenvalues(self) -> np.ndarray:
        return self._eigvals.copy()

    def sqrt(self) -> np.ndarray:
        """Hermitian PSD principal square root."""
        root = (self._eigvecs * np.sqrt(self._eigvals)) @ self._eigvecs.conj().T
        return 0.5 * (root + root.conj().T)

    def to_csv(self, path):
        """Write the dense matrix row-major as alternating re,im columns."""
        dense = self._dense
        with open(path, "w", newline="") as fh:
            fh.write(f"# hermitian toeplitz correlation matrix, order={self.order}\n")
            fh.write("# row-major entries as re,im pairs\n")
            for row in dense:
                cells = []
                for entry in row:
                    cells.append(f"{entry.real:.17g}")
                    cells.append(f"{entry.imag:.17g}")
                fh.write(",".join(cells) + "\n")


def correlation_matrix(
    config: ScfConfig,
    auto_truncation: bool = False,
    tol: float = 1e-6,
    repair_tol: float = 1e-9,
) -> CorrelationMatrix:
    """Assemble the Toeplitz correlation matrix rho(0..port_count-1).

    With ``auto_truncation`` the series order is raised to whatever the widest
    lag needs for a truncation bound below ``tol`` (relative to the gain
    scale), instead of the configured order.
    """
    n0 = config.truncation
    if auto_truncation:
        widest = config.beta * (config.port_count - 1)
        n0 = max(n0, required_truncation(widest, tol))
    first_row = np.array(
        [rho(config, lag, truncation=n0) for lag in range(config.port_count)]
    )
    return CorrelationMatrix(first_row, repair_tol=repair_tol)


def correlation_matrix_2d(
    azimuth: AngularSpectrum,
    spacing_over_lambda: float,
    port_count: int,
    truncation: int = 15,
    gain_scale: float = 1.0,
    auto_truncation: bool = False,
    tol: float = 1e-6,
    repair_tol: float = 1e-9,
) -> CorrelationMatrix:
    """Toeplitz correlation matrix of the flat-elevation model."""
    n0 = truncation
    if auto_truncation:
        widest = 2.0 * np.pi * spacing_over_lambda * (port_count - 1)
        n0 = max(n0, required_truncation(widest, tol))
    first_row = np.array(
        [
            rho_2d(azimuth, spacing_over_lambda, lag, truncation=n0, gain_scale=gain_scale)
            for lag in range(port_count)
        ]
    )
    return CorrelationMatrix(first_row, repair_tol=repair_tol)
