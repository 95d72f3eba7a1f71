"""Mutual information of channel realizations, its large-system deterministic
equivalent, and the regularized zero-forcing multi-user downlink.

All mutual-information values are in nats; the CLI converts to bits on output
when asked.

The deterministic equivalent approximates the per-transmit-antenna mutual
information of the Kronecker model by

    V = (1/N) [ logdet(I + kappa/s2 * R_bs) + logdet(I + kappa_bar/s2 * R_ms) ]
        - kappa * kappa_bar / s2

where (kappa, kappa_bar) is the unique positive fixed point of

    kappa     = (1/N) tr( R_ms (I + kappa_bar/s2 * R_ms)^-1 )
    kappa_bar = (1/N) tr( R_bs (I + kappa/s2     * R_bs)^-1 )

with N the transmit port count and s2 the noise variance.  The map is a
contraction for s2 > 0; a damped iteration converges in a few dozen steps.

The multi-user path scales each user's correlated channel by a large-scale
coefficient that folds transmit power, path loss, antenna gain, shadow fading
and noise power into one number, so the per-user SINR carries a unit noise
term.  The urban-macro path-loss curve 128.1 + 37.6 log10(d_km) dB is a
documented stand-in; it shifts all users jointly and cancels from any
argmax-over-tilt comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, matrix_sqrt_psd, rng_stream
from .scf import CorrelationMatrix


def _as_matrix(channel) -> np.ndarray:
    if isinstance(channel, ChannelRealization):
        return channel.matrix
    return np.asarray(channel, dtype=complex)


def mutual_information(channel, noise_var: float) -> float:
    """log det(I + H H^H / (N_tx * noise_var)) in nats, equal Tx power split."""
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    h = _as_matrix(channel)
    n_rx, n_tx = h.shape
    gram = h @ h.conj().T / (n_tx * noise_var)
    sign, logdet = np.linalg.slogdet(np.eye(n_rx) + gram)
    return float(logdet)


@dataclass(frozen=True)
class FixedPointSolution:
    """Fixed point (kappa, kappa_bar) and the deterministic per-antenna
    mutual information, with convergence diagnostics."""

    kappa: float
    kappa_bar: float
    mi_per_antenna: float
    iterations: int
    residual: float


def _end_eigvals(matrix) -> np.ndarray:
    if isinstance(matrix, CorrelationMatrix):
        return matrix.eigenvalues()
    m = np.asarray(matrix, dtype=complex)
    return np.linalg.eigvalsh(m)


def deterministic_mi(
    r_bs,
    r_ms,
    noise_var: float,
    damping: float = 0.5,
    tol: float = 1e-10,
    max_iter: int = 10000,
) -> FixedPointSolution:
    """Solve the two-trace fixed point by damped iteration and evaluate the
    deterministic per-antenna mutual information."""
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    lam_bs = _end_eigvals(r_bs)
    lam_ms = _end_eigvals(r_ms)
    if lam_bs[0] < -1e-9 * max(lam_bs[-1], 1.0) or lam_ms[0] < -1e-9 * max(lam_ms[-1], 1.0):
        raise ValueError("correlation matrices must be positive semidefinite")
    lam_bs = np.clip(lam_bs, 0.0, None)
    lam_ms = np.clip(lam_ms, 0.0, None)
    n = lam_bs.size

    def step_kappa(kappa_bar):
        return float(np.sum(lam_ms / (1.0 + kappa_bar * lam_ms / noise_var)) / n)

    def step_kappa_bar(kappa):
        return float(np.sum(lam_bs / (1.0 + kappa * lam_bs / noise_var)) / n)

    kappa = float(np.mean(lam_ms))
    kappa_bar = float(np.mean(lam_bs))
    residual = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_kappa = step_kappa(kappa_bar)
        new_kappa_bar = step_kappa_bar(kappa)
        kappa = (1.0 - damping) * kappa + damping * new_kappa
        kappa_bar = (1.0 - damping) * kappa_bar + damping * new_kappa_bar
        residual = max(abs(kappa - step_kappa(kappa_bar)), abs(kappa_bar - step_kappa_bar(kappa)))
        if residual <= tol:
            break
    else:
        raise RuntimeError(f"fixed point did not converge within {max_iter} iterations")
    value = (
        float(np.sum(np.log1p(kappa * lam_bs / noise_var))) / n
        + float(np.sum(np.log1p(kappa_bar * lam_ms / noise_var))) / n
        - kappa * kappa_bar / noise_var
    )
    return FixedPointSolution(kappa, kappa_bar, value, iterations, residual)


def rzf_precoder(channels: np.ndarray, regularization: float, power: float) -> np.ndarray:
    """Regularized zero-forcing precoder for stacked user channels.

    ``channels`` has one user channel vector per row (K x N); the returned
    matrix is N x K with one precoding column per user, scaled so the total
    precoder power equals ``power``.
    """
    if regularization <= 0:
        raise ValueError("regularization must be strictly positive")
    if power <= 0:
        raise ValueError("power budget must be positive")
    h_cols = np.asarray(channels, dtype=complex).T
    n_tx, n_users = h_cols.shape
    if n_users > n_tx:
        raise ValueError("more users than transmit antennas")
    gram = h_cols @ h_cols.conj().T + regularization * n_tx * np.eye(n_tx)
    directions = np.linalg.solve(gram, h_cols)
    norm = float(np.sum(np.abs(directions) ** 2))
    if norm == 0:
        raise ValueError("zero channel matrix")
    return math.sqrt(power / norm) * directions


def sinr(user: int, channels: np.ndarray, precoder: np.ndarray) -> float:
    """Per-user SINR under the given precoder with unit noise."""
    channels = np.asarray(channels, dtype=complex)
    if not 0 <= user < channels.shape[0]:
        raise ValueError(f"user index {user} out of range")
    coupling = channels[user].conj() @ precoder
    signal = float(np.abs(coupling[user]) ** 2)
    interference = float(np.sum(np.abs(coupling) ** 2)) - signal
    return signal / (interference + 1.0)


def all_sinr(channels: np.ndarray, precoder: np.ndarray) -> np.ndarray:
    """SINR of every user in one pass."""
    coupling = np.asarray(channels, dtype=complex).conj() @ precoder
    powers = np.abs(coupling) ** 2
    signal = np.diag(powers).copy()
    interference = powers.sum(axis=1) - signal
    return signal / (interference + 1.0)


def user_channel(r_bs, large_scale: float, seed: int, index: int = 0) -> np.ndarray:
    """Correlated user channel sqrt(large_scale) * root(R) z with z iid CN(0,1)."""
    if large_scale <= 0:
        raise ValueError("large-scale coefficient must be positive")
    root = r_bs.sqrt() if isinstance(r_bs, CorrelationMatrix) else matrix_sqrt_psd(r_bs)
    rng = rng_stream(seed, index)
    n = root.shape[0]
    z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(0.5)
    return math.sqrt(large_scale) * (root @ z)


def pathloss_uma_db(distance_m: float) -> float:
    """Urban-macro path loss 128.1 + 37.6 log10(d_km) dB (stand-in curve)."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    return 128.1 + 37.6 * math.log10(distance_m / 1000.0)


def large_scale_coefficient(
    distance_m: float,
    tx_power_dbm: float = 46.0,
    antenna_gain_db: float = 17.0,
    shadow_fading_db: float = 6.0,
    noise_power_w: float = 1.13e-13,
) -> float:
    """Linear ratio of received power to noise power for one user: transmit
    power through path loss, peak antenna gain and a shadow-fading margin,
    divided by the noise power."""
    tx_power_w = 10.0 ** ((tx_power_dbm - 30.0) / 10.0)
    link_db = antenna_gain_db - shadow_fading_db - pathloss_uma_db(distance_m)
    return tx_power_w * 10.0 ** (link_db / 10.0) / noise_power_w


def los_elevation(distance_m: float, height_diff_m: float = 25.0) -> float:
    """Line-of-sight elevation coordinate at the base station: pi/2 plus the
    depression angle towards a user at the given horizontal distance."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    return np.pi / 2.0 + math.atan2(height_diff_m, distance_m)


@dataclass(eq=False)
class MultiUserConfig:
    """Downlink with K single-antenna users behind per-user transmit
    correlation; needs at least as many base-station ports as users."""

    user_matrices: tuple
    large_scales: tuple
    los_elevations: tuple
    power: float = 1.0
    regularization: float | None = None

    def __post_init__(self):
        k = len(self.user_matrices)
        if k == 0 or len(self.large_scales) != k or len(self.los_elevations) != k:
            raise ValueError("per-user matrices, scales and angles must align")
        orders = {m.order if isinstance(m, CorrelationMatrix) else m.shape[0] for m in self.user_matrices}
        if len(orders) != 1:
            raise ValueError("all user matrices must share the port count")
        self.n_ports = orders.pop()
        if self.n_ports < k:
            raise ValueError("need at least as many ports as users")
        if any(s <= 0 for s in self.large_scales):
            raise ValueError("large-scale coefficients must be positive")
        self.n_users = k
        if self.regularization is None:
            self.regularization = 1.0 / (k * float(np.mean(self.large_scales)))

    def roots(self) -> np.ndarray:
        stack = np.empty((self.n_users, self.n_ports, self.n_ports), dtype=complex)
        for i, m in enumerate(self.user_matrices):
            stack[i] = m.sqrt() if isinstance(m, CorrelationMatrix) else matrix_sqrt_psd(m)
        return stack


def multiuser_mi_draw(config: MultiUserConfig, seed: int, index: int = 0, roots=None):
    """Per-user SINRs for one fading draw (all users drawn from one stream)."""
    if roots is None:
        roots = config.roots()
    rng = rng_stream(seed, index)
    k, n = config.n_users, config.n_ports
    z = (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) * np.sqrt(0.5)
    channels = np.einsum("kij,kj->ki", roots, z)
    channels *= np.sqrt(np.asarray(config.large_scales))[:, None]
    precoder = rzf_precoder(channels, config.regularization, config.power)
    return all_sinr(channels, precoder)


def multiuser_normalized_mi(config: MultiUserConfig, seed: int, draws: int):
    """Mean and standard error of the per-user mutual information
    sum(log(1+SINR_k))/K over fading draws."""
    if draws < 1:
        raise ValueError("need at least one draw")
    roots = config.roots()
    values = np.empty(draws)
    for i in range(draws):
        gammas = multiuser_mi_draw(config, seed, i, roots=roots)
        values[i] = float(np.mean(np.log1p(gammas)))
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
