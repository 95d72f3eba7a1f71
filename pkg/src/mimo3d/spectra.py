"""Angular power spectra and their Fourier-series coefficients.

A spectrum couples an angular density with a per-axis antenna pattern:

    PAS(phi)   = g_H(phi)   * p_phi(phi)      (azimuth)
    PES(theta) = g_V(theta) * p_theta(theta)  (elevation)

where p_phi is the azimuth angle density and p_theta = f_theta / sin(theta)
for an elevation angle density f_theta supported on [0, pi].  Everything the
correlation engine needs from a spectrum is the cosine/sine coefficient pair

    a(m) = (1/pi) * integral PAS(x) cos(mx) dx
    b(m) = (1/pi) * integral PAS(x) sin(mx) dx

(azimuth over [-pi, pi], elevation over [0, pi]; the elevation density is
zero beyond pi so nothing is lost by stopping there).

Closed forms are available for the supported
(density, pattern) pairs; an adaptive-quadrature path covers everything else,
including user-tabulated spectra and floored (clipped) patterns.  Patterns are
stored at 0 dB peak; the peak antenna gain travels separately as a linear
scale on correlation and power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate, optimize
from scipy import special as _sp

from . import specfun

AZIMUTH = "azimuth"
ELEVATION = "elevation"

SQRT2 = math.sqrt(2.0)
# 12*(x/x3db)^2 dB attenuation in natural-log units.
_QUAD_LOG = 1.2 * math.log(10.0)


class ClosedFormUnavailableError(ValueError):
    """Raised when the closed-form coefficient path is requested for an
    unsupported (density, pattern) combination."""


# ---------------------------------------------------------------------------
# angular densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VonMisesAzimuth:
    """Circular density exp(k cos(x - mean)) / (2 pi I0(k)) on (-pi, pi]."""

    mean: float
    concentration: float

    axis = AZIMUTH
    breakpoints: tuple = ()

    def pdf(self, phi):
        phi = np.asarray(phi, dtype=float)
        # exp(k(cos-1)) / (2 pi ive(0,k)) avoids overflow at large k
        out = np.exp(self.concentration * (np.cos(phi - self.mean) - 1.0))
        out /= 2.0 * np.pi * _sp.ive(0, self.concentration)
        return out if out.ndim else float(out)

    power_density = pdf

    def sample(self, rng, size):
        return rng.vonmises(self.mean, self.concentration, size)


@dataclass(frozen=True)
class LaplacianElevation:
    """Truncated Laplacian elevation density A exp(-sqrt(2)|t - mean|/spread) sin(t).

    Supported on [0, pi]; the normalizer makes the full density (including the
    sin factor) integrate to one.
    """

    mean: float
    spread: float

    axis = ELEVATION

    def __post_init__(self):
        if not 0.0 < self.mean < np.pi:
            raise ValueError(f"mean elevation must lie in (0, pi), got {self.mean}")
        if self.spread <= 0.0:
            raise ValueError(f"spread must be positive, got {self.spread}")

    @property
    def breakpoints(self):
        return (self.mean,)

    @property
    def normalizer(self):
        return laplacian_normalizer(self.mean, self.spread)

    def _envelope(self, theta):
        return self.normalizer * np.exp(-SQRT2 * np.abs(theta - self.mean) / self.spread)

    def pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.where(
            (theta >= 0.0) & (theta <= np.pi),
            self._envelope(theta) * np.sin(theta),
            0.0,
        )
        return out if out.ndim else float(out)

    def power_density(self, theta):
        """pdf / sin(theta); the sin factor cancels analytically."""
        theta = np.asarray(theta, dtype=float)
        out = np.where((theta >= 0.0) & (theta <= np.pi), self._envelope(theta), 0.0)
        return out if out.ndim else float(out)

    def sample(self, rng, size):
        """Two-branch inverse-CDF proposal (the exponential envelope) followed
        by rejection against sin(theta)."""
        scale = self.spread / SQRT2
        mass_lo = scale * (1.0 - math.exp(-self.mean / scale))
        mass_hi = scale * (1.0 - math.exp(-(np.pi - self.mean) / scale))
        p_lo = mass_lo / (mass_lo + mass_hi)
        out = np.empty(size)
        filled = 0
        attempts = 0
        while filled < size:
            chunk = max(2 * (size - filled), 64)
            attempts += chunk
            if attempts > 10**6:
                raise RuntimeError(
                    "elevation sampling rejection failed; degenerate parameters "
                    f"(mean={self.mean}, spread={self.spread})"
                )
            u = rng.random(chunk)
            v = rng.random(chunk)
            lower = u < p_lo
            # invert the one-sided truncated exponential on each branch
            dist = np.where(
                lower,
                -scale * np.log1p(-v * (1.0 - math.exp(-self.mean / scale))),
                -scale * np.log1p(-v * (1.0 - math.exp(-(np.pi - self.mean) / scale))),
            )
            theta = np.where(lower, self.mean - dist, self.mean + dist)
            keep = theta[rng.random(chunk) < np.sin(theta)]
            take = min(keep.size, size - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out


@dataclass(frozen=True)
class UniformAngle:
    """Uniform density on [low, high].  A zero-width support is allowed and
    acts as a point mass (sampling only)."""

    axis: str
    low: float
    high: float

    breakpoints: tuple = ()

    def __post_init__(self):
        if self.high < self.low:
            raise ValueError("empty support")

    def pdf(self, angle):
        angle = np.asarray(angle, dtype=float)
        if self.high == self.low:
            raise ValueError("degenerate uniform density has no pdf")
        out = np.where(
            (angle >= self.low) & (angle <= self.high), 1.0 / (self.high - self.low), 0.0
        )
        return out if out.ndim else float(out)

    def power_density(self, angle):
        if self.axis == ELEVATION:
            angle = np.asarray(angle, dtype=float)
            out = self.pdf(angle) / np.sin(angle)
            return out if np.ndim(out) else float(out)
        return self.pdf(angle)

    def sample(self, rng, size):
        if self.high == self.low:
            return np.full(size, self.low)
        return rng.uniform(self.low, self.high, size)


def _normalize_table(angles, values):
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    if angles.ndim != 1 or angles.size < 2 or angles.shape != values.shape:
        raise ValueError("tabulated density needs matching 1-d angle/value arrays")
    if np.any(np.diff(angles) <= 0):
        raise ValueError("tabulated angles must be strictly increasing")
    if np.any(values < 0):
        raise ValueError("tabulated density values must be non-negative")
    total = np.trapezoid(values, angles)
    if total <= 0:
        raise ValueError("tabulated density integrates to zero")
    return angles, values / total


@dataclass(frozen=True)
class TabulatedDensity:
    """User-supplied density on a grid, linearly interpolated and renormalized
    to unit mass on construction."""

    axis: str
    angles: tuple
    values: tuple

    breakpoints: tuple = ()

    def __post_init__(self):
        angles, values = _normalize_table(self.angles, self.values)
        object.__setattr__(self, "angles", tuple(angles))
        object.__setattr__(self, "values", tuple(values))

    def pdf(self, angle):
        angle = np.asarray(angle, dtype=float)
        out = np.interp(angle, self.angles, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)

    def power_density(self, angle):
        if self.axis == ELEVATION:
            angle = np.asarray(angle, dtype=float)
            out = self.pdf(angle) / np.sin(angle)
            return out if np.ndim(out) else float(out)
        return self.pdf(angle)

    def sample(self, rng, size):
        xs = np.asarray(self.angles)
        ys = np.asarray(self.values)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs))])
        cdf /= cdf[-1]
        return np.interp(rng.random(size), cdf, xs)


def load_tabulated_density(path) -> TabulatedDensity:
    """Read a two-column (angle_rad, density) text file whose first comment
    line declares the axis, e.g. ``# axis=elevation``."""
    path = Path(path)
    axis = None
    for line in path.read_text().splitlines():
        line = line.strip()
        if line.startswith("#") and "axis=" in line:
            axis = line.split("axis=", 1)[1].split()[0].strip()
            break
    if axis not in (AZIMUTH, ELEVATION):
        raise ValueError(f"{path}: missing or invalid '# axis=<azimuth|elevation>' header")
    data = np.loadtxt(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (angle_rad, density)")
    return TabulatedDensity(axis, tuple(data[:, 0]), tuple(data[:, 1]))


def laplacian_normalizer(mean: float, spread: float) -> float:
    """Constant A making A exp(-sqrt(2)|t-mean|/spread) sin(t) a density on [0, pi]."""
    if not 0.0 < mean < np.pi:
        raise ValueError(f"mean elevation must lie in (0, pi), got {mean}")
    if spread <= 0.0:
        raise ValueError(f"spread must be positive, got {spread}")
    den = 2.0 * SQRT2 * spread * math.sin(mean) + 2.0 * spread**2 * math.exp(
        -np.pi / (SQRT2 * spread)
    ) * math.cosh(SQRT2 * (np.pi / 2.0 - mean) / spread)
    return (2.0 + spread**2) / den


def wrapped_gaussian_spread(concentration: float) -> float:
    """Spread (rad) of the wrapped-Gaussian surrogate of a von Mises density,
    from the first-circular-moment match."""
    if concentration <= 0:
        raise ValueError("concentration must be positive")
    ratio = _sp.ive(1, concentration) / _sp.ive(0, concentration)
    return math.sqrt(-2.0 * math.log(ratio))


def von_mises_from_wrapped_gaussian(spread: float) -> float:
    """Invert the wrapped-Gaussian/von-Mises spread correspondence by monotone
    root finding; raises when the spread maps to no positive concentration."""
    if spread <= 0:
        raise ValueError("spread must be positive")
    lo, hi = 1e-10, 1e8
    if not wrapped_gaussian_spread(hi) <= spread <= wrapped_gaussian_spread(lo):
        raise ValueError(f"spread {spread} rad is outside the invertible range")
    log_k = optimize.brentq(
        lambda lk: wrapped_gaussian_spread(math.exp(lk)) - spread,
        math.log(lo),
        math.log(hi),
        xtol=1e-12,
        rtol=8.9e-16,
    )
    return math.exp(log_k)


# ---------------------------------------------------------------------------
# antenna patterns (linear power gain, 0 dB peak)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitGain:
    """Omnidirectional 0 dB pattern."""

    def gain(self, angle):
        angle = np.asarray(angle, dtype=float)
        out = np.ones_like(angle)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Horizontal3gpp:
    """Quadratic horizontal pattern -12 (phi/phi_3db)^2 dB.

    ``floored`` clips the attenuation at 20 dB; the closed-form coefficient
    path integrates the unclipped parabola, so floored patterns fall back to
    quadrature.
    """

    beamwidth_3db: float
    floored: bool = False

    def gain(self, angle):
        angle = np.asarray(angle, dtype=float)
        att = 12.0 * (angle / self.beamwidth_3db) ** 2
        if self.floored:
            att = np.minimum(att, 20.0)
        out = 10.0 ** (-att / 10.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Vertical3gpp:
    """Quadratic vertical pattern -12 ((theta - tilt)/theta_3db)^2 dB,
    symmetric about the boresight tilt."""

    tilt: float
    beamwidth_3db: float
    floored: bool = False

    def gain(self, angle):
        angle = np.asarray(angle, dtype=float)
        att = 12.0 * ((angle - self.tilt) / self.beamwidth_3db) ** 2
        if self.floored:
            att = np.minimum(att, 20.0)
        out = 10.0 ** (-att / 10.0)
        return out if out.ndim else float(out)


def pattern_gain(pattern, angle):
    """Linear power gain of a pattern at the given angle."""
    return pattern.gain(angle)


# ---------------------------------------------------------------------------
# angular spectrum and Fourier-series coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngularSpectrum:
    """Angular density times per-axis antenna pattern, at 0 dB pattern peak.

    ``path`` chooses the coefficient evaluation: ``auto`` prefers a closed
    form and falls back to quadrature, the other two force one route.
    """

    axis: str
    density: object
    pattern: object = field(default_factory=UnitGain)
    path: str = "auto"

    def __post_init__(self):
        if self.axis not in (AZIMUTH, ELEVATION):
            raise ValueError(f"axis must be azimuth or elevation, got {self.axis!r}")
        if getattr(self.density, "axis", self.axis) != self.axis:
            raise ValueError("density axis does not match spectrum axis")
        if self.path not in ("auto", "closed-form", "quadrature"):
            raise ValueError(f"unknown coefficient path {self.path!r}")

    def value(self, angle):
        """PAS/PES value: pattern gain times angular power density."""
        return self.pattern.gain(angle) * self.density.power_density(angle)

    def a(self, m: int) -> float:
        """Cosine coefficient; even in the harmonic index."""
        return fs_coefficient(self, "cos", abs(int(m)))

    def b(self, m: int) -> float:
        """Sine coefficient; odd in the harmonic index."""
        m = int(m)
        if m == 0:
            return 0.0
        value = fs_coefficient(self, "sin", abs(m))
        return -value if m < 0 else value


def fs_coefficient(spectrum: AngularSpectrum, trig: str, m: int) -> float:
    """Fourier-series coefficient of a spectrum: (1/pi) integral of
    PAS/PES times cos(mx) or sin(mx) over the axis domain."""
    if trig not in ("cos", "sin"):
        raise ValueError(f"trig must be 'cos' or 'sin', got {trig!r}")
    if m < 0:
        raise ValueError("harmonic index must be non-negative; use a()/b() for parity")
    return _fs_cached(spectrum, trig, int(m))


@lru_cache(maxsize=None)
def _fs_cached(spectrum, trig, m):
    if spectrum.path in ("auto", "closed-form"):
        value = _fs_closed_form(spectrum, trig, m)
        if value is not None:
            return value
        if spectrum.path == "closed-form":
            raise ClosedFormUnavailableError(
                f"no closed form for {type(spectrum.density).__name__} with "
                f"{type(spectrum.pattern).__name__}"
            )
    return _fs_quadrature(spectrum, trig, m)


def _fs_closed_form(spectrum, trig, m):
    dens, pat = spectrum.density, spectrum.pattern
    if isinstance(dens, VonMisesAzimuth) and isinstance(pat, UnitGain):
        ratio = _sp.ive(m, dens.concentration) / _sp.ive(0, dens.concentration)
        arg = m * dens.mean
        return ratio * (math.cos(arg) if trig == "cos" else math.sin(arg)) / np.pi
    if isinstance(dens, UniformAngle) and isinstance(pat, UnitGain) and dens.high > dens.low:
        width = dens.high - dens.low
        if m == 0:
            return 1.0 / np.pi if trig == "cos" else 0.0
        if trig == "cos":
            return (math.sin(m * dens.high) - math.sin(m * dens.low)) / (np.pi * m * width)
        return (math.cos(m * dens.low) - math.cos(m * dens.high)) / (np.pi * m * width)
    if isinstance(dens, LaplacianElevation) and isinstance(pat, UnitGain):
        return _laplacian_unit_gain_fs(dens, trig, m)
    if (
        isinstance(dens, LaplacianElevation)
        and isinstance(pat, Vertical3gpp)
        and not pat.floored
    ):
        return _laplacian_vertical_fs(dens, pat, trig, m)
    return None


def _laplacian_unit_gain_fs(dens, trig, m):
    """Coefficients of A exp(-sqrt(2)|t - t0|/s) over [0, pi] (the sin factor
    of the density cancels against the elevation power-density convention)."""
    t0, s = dens.mean, dens.spread
    amp = dens.normalizer
    rate = SQRT2 / s
    denom = np.pi * (m * m + rate * rate)
    e_lo = math.exp(-rate * t0)
    e_hi = math.exp(-rate * (np.pi - t0))
    sign = -1.0 if m % 2 else 1.0
    if trig == "cos":
        return amp * rate * (2.0 * math.cos(m * t0) - e_lo - sign * e_hi) / denom
    return amp * (2.0 * rate * math.sin(m * t0) + m * (e_lo - sign * e_hi)) / denom


def _scaled_erf_terms(prefactor, z):
    """e^prefactor * erf(z) for complex z, split as (constant, scaled) parts.

    Returns (c, t) with e^P erf(z) = c * e^P + t, where t is evaluated through
    the scaled Faddeeva function so the erf growth exp(Im(z)^2) and the decay
    of e^P cancel analytically.  Needed because the coefficient closed form
    hits |Im z| ~ m/(2 sqrt(a)), which overflows a direct erf call for deep
    harmonics.
    """
    sgn = 1.0 if z.real >= 0 else -1.0
    # erf(z) = sgn - sgn * exp(-z^2) w(i sgn z); Im(i sgn z) >= 0 keeps w stable
    t = -sgn * np.exp(prefactor - z * z) * _sp.wofz(1j * sgn * z)
    return sgn, t


def _gaussian_exp_trig_integral(a, tilt, rate, origin, lo, hi, m):
    """Closed form of integral exp(-a(t-tilt)^2 - rate*(t-origin) + i m t) dt
    over [lo, hi], stable for any harmonic m."""
    w = tilt + (1j * m - rate) / (2.0 * a)
    prefactor = a * w * w - a * tilt * tilt + rate * origin
    sa = math.sqrt(a)
    z_lo = sa * (lo - w)
    z_hi = sa * (hi - w)
    if max(abs(z_lo.imag), abs(z_hi.imag)) <= 6.0 and prefactor.real < 700.0:
        diff = specfun.erf_complex(z_hi) - specfun.erf_complex(z_lo)
        value = np.exp(prefactor) * diff
    else:
        c_hi, t_hi = _scaled_erf_terms(prefactor, z_hi)
        c_lo, t_lo = _scaled_erf_terms(prefactor, z_lo)
        value = (c_hi - c_lo) * np.exp(prefactor) + (t_hi - t_lo)
    return math.sqrt(np.pi) / (2.0 * sa) * value


def _laplacian_vertical_fs(dens, pat, trig, m):
    """Closed-form coefficients for the truncated-Laplacian elevation density
    under the unclipped quadratic vertical pattern, as two one-sided
    Gaussian-type integrals joined at the density kink."""
    t0, s = dens.mean, dens.spread
    amp = dens.normalizer
    a = _QUAD_LOG / pat.beamwidth_3db**2
    rate = SQRT2 / s
    upper = _gaussian_exp_trig_integral(a, pat.tilt, rate, t0, t0, np.pi, m)
    lower = _gaussian_exp_trig_integral(a, pat.tilt, -rate, t0, 0.0, t0, m)
    total = amp / np.pi * (upper + lower)
    return float(total.real) if trig == "cos" else float(total.imag)


def _fs_quadrature(spectrum, trig, m):
    lo, hi = (-np.pi, np.pi) if spectrum.axis == AZIMUTH else (0.0, np.pi)
    osc = np.cos if trig == "cos" else np.sin
    if isinstance(spectrum.density, TabulatedDensity):
        # piecewise-linear density: per-segment Gauss-Legendre on the table's
        # own grid is exact and avoids adaptive-rule kink warnings
        edges = np.clip(np.asarray(spectrum.density.angles), lo, hi)
        nodes, weights = np.polynomial.legendre.leggauss(8)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        ws = (half[:, None] * weights[None, :]).ravel()
        return float(np.sum(spectrum.value(xs) * osc(m * xs) * ws)) / np.pi

    def integrand(x):
        return spectrum.value(x) * osc(m * x)

    points = [p for p in getattr(spectrum.density, "breakpoints", ()) if lo < p < hi]
    value, _ = integrate.quad(
        integrand,
        lo,
        hi,
        points=points or None,
        limit=4096,
        epsabs=1e-10,
        epsrel=1e-10,
    )
    return value / np.pi
