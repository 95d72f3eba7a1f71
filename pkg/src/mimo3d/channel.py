"""Channel synthesis: parametric sum-of-paths and nonparametric Kronecker models.

The parametric model sums N plane-wave paths with i.i.d. complex-Gaussian
amplitudes of variance 1/N; each path carries azimuth/elevation departure and
arrival angles drawn from the configured densities, weighted by the square
root of the pattern gains, and a linear-array phase along each end.  Its flat
variant pins both elevation angles to pi/2 with unit vertical gains.

The Kronecker model colors an i.i.d. CN(0,1) matrix with the PSD principal
square roots of the two end correlation matrices.

Randomness is counter-based and splittable: every draw derives its own Philox
generator from ``SeedSequence([seed, *path])``, so batches are reproducible
bit-for-bit regardless of evaluation order or thread count.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .scf import CorrelationMatrix
from .spectra import UnitGain

_MAGIC = b"M3DC"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIIq16s")


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a (seed, *path) address in the stream tree."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, path)])))


@dataclass(frozen=True)
class ParametricConfig:
    """Sum-of-paths channel description for both link ends."""

    n_paths: int
    tx_ports: int
    rx_ports: int
    tx_spacing_over_lambda: float
    rx_spacing_over_lambda: float
    tx_azimuth: object
    tx_elevation: object
    rx_azimuth: object
    rx_elevation: object
    tx_horizontal_pattern: object = field(default_factory=UnitGain)
    tx_vertical_pattern: object = field(default_factory=UnitGain)
    rx_horizontal_pattern: object = field(default_factory=UnitGain)
    rx_vertical_pattern: object = field(default_factory=UnitGain)
    tx_gain_scale: float = 1.0
    rx_gain_scale: float = 1.0
    flat: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("need at least one path")
        if self.tx_ports < 1 or self.rx_ports < 1:
            raise ValueError("port counts must be >= 1")
        if self.tx_spacing_over_lambda <= 0 or self.rx_spacing_over_lambda <= 0:
            raise ValueError("antenna spacings must be positive")

    @property
    def generator_tag(self) -> str:
        return "parametric-2d" if self.flat else "parametric-3d"


@dataclass(frozen=True)
class ChannelRealization:
    """One channel matrix (rx_ports x tx_ports) plus generator metadata."""

    matrix: np.ndarray
    seed: int
    generator: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2:
            raise ValueError("channel matrix must be two-dimensional")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("channel matrix has non-finite entries")
        object.__setattr__(self, "matrix", m)


def draw_parametric(config: ParametricConfig, seed: int, index: int = 0) -> ChannelRealization:
    """One parametric realization; deterministic in (config, seed, index).

    Draw order within the stream is fixed: amplitudes, departure azimuth,
    departure elevation, arrival azimuth, arrival elevation.
    """
    rng = rng_stream(seed, index)
    n = config.n_paths
    amp = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(0.5 / n)
    dep_az = config.tx_azimuth.sample(rng, n)
    dep_el = np.full(n, np.pi / 2) if config.flat else config.tx_elevation.sample(rng, n)
    arr_az = config.rx_azimuth.sample(rng, n)
    arr_el = np.full(n, np.pi / 2) if config.flat else config.rx_elevation.sample(rng, n)

    gain_tx = config.tx_horizontal_pattern.gain(dep_az) * config.tx_gain_scale
    gain_rx = config.rx_horizontal_pattern.gain(arr_az) * config.rx_gain_scale
    if not config.flat:
        gain_tx = gain_tx * config.tx_vertical_pattern.gain(dep_el)
        gain_rx = gain_rx * config.rx_vertical_pattern.gain(arr_el)

    weights = amp * np.sqrt(gain_tx * gain_rx)
    beta_t = 2.0 * np.pi * config.tx_spacing_over_lambda
    beta_r = 2.0 * np.pi * config.rx_spacing_over_lambda
    dir_tx = np.sin(dep_az) * np.sin(dep_el)
    dir_rx = np.sin(arr_az) * np.sin(arr_el)
    steer_tx = np.exp(1j * beta_t * np.outer(np.arange(config.tx_ports), dir_tx))
    steer_rx = np.exp(1j * beta_r * np.outer(np.arange(config.rx_ports), dir_rx))
    matrix = (steer_rx * weights) @ steer_tx.T
    return ChannelRealization(matrix, seed, config.generator_tag)


def draw_parametric_batch(config: ParametricConfig, seed: int, count: int) -> np.ndarray:
    """Stack of ``count`` parametric matrices, one derived stream per draw."""
    out = np.empty((count, config.rx_ports, config.tx_ports), dtype=complex)
    for i in range(count):
        out[i] = draw_parametric(config, seed, i).matrix
    return out


def matrix_sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    """Hermitian PSD principal square root via eigendecomposition.

    Tolerates eigenvalues down to -1e-9 * trace/order (clipped to zero);
    anything lower is treated as a genuinely indefinite input.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(np.abs(np.trace(m)).real / m.shape[0], np.finfo(float).tiny)
    if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(scale, 1.0):
        raise ValueError("matrix is not Hermitian")
    eigvals, eigvecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    if eigvals[0] < -1e-9 * scale:
        raise ValueError(f"matrix is indefinite (min eigenvalue {eigvals[0]:.3e})")
    eigvals = np.clip(eigvals, 0.0, None)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T
    return 0.5 * (root + root.conj().T)


def _end_root(matrix) -> np.ndarray:
    if isinstance(matrix, CorrelationMatrix):
        return matrix.sqrt()
    return matrix_sqrt_psd(np.asarray(matrix, dtype=complex))


def draw_kronecker(r_ms, r_bs, seed: int, index: int = 0) -> ChannelRealization:
    """One Kronecker realization root(R_ms) X root(R_bs) with X iid CN(0,1)."""
    root_ms = _end_root(r_ms)
    root_bs = _end_root(r_bs)
    rng = rng_stream(seed, index)
    shape = (root_ms.shape[0], root_bs.shape[0])
    x = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
    return ChannelRealization(root_ms @ x @ root_bs, seed, "kronecker")


def draw_kronecker_batch(r_ms, r_bs, seed: int, count: int) -> np.ndarray:
    """Stack of ``count`` Kronecker matrices; square roots are factored once."""
    root_ms = _end_root(r_ms)
    root_bs = _end_root(r_bs)
    n_ms, n_bs = root_ms.shape[0], root_bs.shape[0]
    out = np.empty((count, n_ms, n_bs), dtype=complex)
    for i in range(count):
        rng = rng_stream(seed, i)
        x = (rng.standard_normal((n_ms, n_bs)) + 1j * rng.standard_normal((n_ms, n_bs)))
        out[i] = root_ms @ (x * np.sqrt(0.5)) @ root_bs
    return out


def save_realizations(path, matrices: np.ndarray, seed: int, generator: str) -> None:
    """Write a realization batch as a flat little-endian binary record:
    header (magic, version, count, rx, tx, seed, tag) then row-major
    interleaved re/im float64 per realization."""
    matrices = np.asarray(matrices, dtype=complex)
    if matrices.ndim == 2:
        matrices = matrices[None, :, :]
    count, n_rx, n_tx = matrices.shape
    tag = generator.encode()[:16].ljust(16, b"\0")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, count, n_rx, n_tx, int(seed), tag))
        interleaved = np.empty((count, n_rx, n_tx, 2))
        interleaved[..., 0] = matrices.real
        interleaved[..., 1] = matrices.imag
        fh.write(interleaved.astype("<f8").tobytes())


def load_realizations(path):
    """Read a batch written by :func:`save_realizations`.

    Returns (matrices, seed, generator_tag)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, version, count, n_rx, n_tx, seed, tag = _HEADER.unpack(header)
        if magic != _MAGIC or version != _VERSION:
            raise ValueError(f"{path}: not a channel realization record")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    expected = count * n_rx * n_tx * 2
    if raw.size != expected:
        raise ValueError(f"{path}: truncated record ({raw.size} of {expected} floats)")
    raw = raw.reshape(count, n_rx, n_tx, 2)
    return raw[..., 0] + 1j * raw[..., 1], seed, tag.rstrip(b"\0").decode()
