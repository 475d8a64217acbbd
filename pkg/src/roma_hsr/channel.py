"""Exact line-of-sight channel with per-pair Doppler, Gram matrix and capacity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SPEED_OF_LIGHT, Scenario, antenna_positions

DEFAULT_RANK_TOL = 1e-6


@dataclass(frozen=True)
class PowerPolicy:
    """Equal power per retained stream.

    ``snr_linear`` is P_max / sigma^2. When ``reference_distance`` is set the
    SNR is instead read as the per-link receive SNR of a free-space link of
    that length, i.e. P_max / sigma^2 = snr_linear * (4 pi reference_distance)^2.
    """

    snr_linear: float
    reference_distance: float | None = None

    def __post_init__(self):
        if not self.snr_linear > 0:
            raise ValueError("snr_linear must be positive")
        if self.reference_distance is not None and not self.reference_distance > 0:
            raise ValueError("reference_distance must be positive")

    @classmethod
    def from_db(cls, snr_db: float, reference_distance: float | None = None) -> "PowerPolicy":
        return cls(10.0 ** (snr_db / 10.0), reference_distance)

    @property
    def transmit_snr(self) -> float:
        """P_max / sigma^2 seen by the raw channel amplitudes."""
        if self.reference_distance is None:
            return self.snr_linear
        return self.snr_linear * (4 * math.pi * self.reference_distance) ** 2


def doppler_frequency(tx_pos, rx_pos, velocity, carrier_hz: float) -> float:
    """Doppler offset (Hz) of one element pair for receiver velocity ``velocity``."""
    delta = np.asarray(rx_pos, dtype=float) - np.asarray(tx_pos, dtype=float)
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise ValueError("coincident transmit and receive positions")
    return carrier_hz / SPEED_OF_LIGHT * float(delta @ np.asarray(velocity, dtype=float)) / dist


def pair_distances(scenario: Scenario) -> np.ndarray:
    """Exact element-pair distances, shape ``(N, M)`` (rx rows, tx columns)."""
    tx = antenna_positions(scenario, "tx")
    rx = antenna_positions(scenario, "rx")
    return np.linalg.norm(rx[:, None, :] - tx[None, :, :], axis=2)


def exact_channel(scenario: Scenario) -> np.ndarray:
    """N x M channel ``exp(-j k d) / (4 pi d)`` with k = 2 pi (f_c + f_d) / c per pair."""
    tx = antenna_positions(scenario, "tx")
    rx = antenna_positions(scenario, "rx")
    delta = rx[:, None, :] - tx[None, :, :]
    dist = np.linalg.norm(delta, axis=2)
    if np.any(dist == 0.0):
        raise ValueError("a transmit and a receive element coincide")
    freq = np.full(dist.shape, scenario.carrier_hz)
    if scenario.doppler:
        radial = delta @ np.asarray(scenario.velocity)
        freq = freq + scenario.carrier_hz / SPEED_OF_LIGHT * radial / dist
    k = 2 * np.pi * freq / SPEED_OF_LIGHT
    return np.exp(-1j * k * dist) / (4 * np.pi * dist)


def gram(H: np.ndarray) -> np.ndarray:
    """``H^H H``, symmetrised so the result is exactly Hermitian."""
    H = np.asarray(H)
    G = H.conj().T @ H
    return (G + G.conj().T) / 2


def sorted_eigenvalues(G: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in descending order."""
    return np.linalg.eigvalsh(G)[::-1]


def capacity_from_eigenvalues(eigenvalues, policy: PowerPolicy,
                              rank_tol: float = DEFAULT_RANK_TOL) -> float:
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    if lam.size == 0 or lam[0] <= 0:
        return 0.0
    rank = int(np.count_nonzero(lam > rank_tol * lam[0]))
    per_stream = policy.transmit_snr / rank
    return float(np.sum(np.log2(1.0 + per_stream * lam[:rank])))


def capacity(G: np.ndarray, policy: PowerPolicy, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """Capacity (bits/s/Hz) with P_max split equally over the numerically
    significant eigenmodes of ``G`` (those above ``rank_tol`` times the largest).
    """
    return capacity_from_eigenvalues(sorted_eigenvalues(G), policy, rank_tol)


def orthogonality_defect(G: np.ndarray) -> float:
    """Largest off-diagonal magnitude of ``G`` over its largest diagonal entry."""
    G = np.asarray(G)
    diag = np.abs(np.diag(G)).max(initial=0.0)
    if diag == 0.0:
        raise ValueError("orthogonality defect undefined for a zero matrix")
    off = np.abs(G - np.diag(np.diag(G)))
    return float(off.max(initial=0.0) / diag)
