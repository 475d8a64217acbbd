"""Spatial-correlation analysis of the LoS channel between two planar panels.

Far from the panels the pair distance is expanded to second order, which
splits the channel into a receive phase diagonal, a transmit phase diagonal
and a unit-modulus coupling matrix ``P``::

    H ~ F_RX @ P @ F_TX / (4 pi D)

The gain matrix ``R = P^H P`` shares its rank with the Gram matrix. Because
the receive offsets are centred, every entry of ``R`` is a product of two
real Dirichlet kernels whose arguments are set by four coupling coefficients
``eta[a, b]`` (``a`` indexes the receive axis, ``b`` the transmit axis).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Scenario,
    antenna_offsets,
    center_distance,
    element_indices,
    panel_basis,
)

DIRICHLET_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationFactors:
    """Diagonals of F_TX (M,) and F_RX (N,), the coupling matrix ``p`` (N, M)
    and the amplitude ``scale = 1 / (4 pi D)``.
    """

    f_tx: np.ndarray
    f_rx: np.ndarray
    p: np.ndarray
    scale: float

    def reconstruct(self) -> np.ndarray:
        """Approximate channel ``scale * diag(f_rx) @ p @ diag(f_tx)``."""
        return self.scale * self.f_rx[:, None] * self.p * self.f_tx[None, :]


@dataclass(frozen=True)
class EtaCoefficients:
    eta: np.ndarray
    provenance: str


@dataclass(frozen=True)
class EtaReport:
    """Printed closed-form coefficients next to the phase-difference fit."""

    printed: EtaCoefficients
    fitted: EtaCoefficients

    @property
    def discrepancy(self) -> np.ndarray:
        """Element-wise |printed - fitted| relative to the largest fitted value."""
        scale = np.abs(self.fitted.eta).max()
        diff = np.abs(self.printed.eta - self.fitted.eta)
        return diff / scale if scale > 0 else diff

    @property
    def agrees(self) -> bool:
        return bool(self.discrepancy.max() < 1e-9)


def _offsets(scenario: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    t = antenna_offsets(scenario.tx, scenario.tx_pose)
    r = antenna_offsets(scenario.rx, scenario.rx_pose)
    return t, r, np.asarray(scenario.rx_center), center_distance(scenario)


def approx_distances(scenario: Scenario) -> np.ndarray:
    """Second-order Taylor pair distances, shape ``(N, M)``.

    ``rho`` keeps every term of ``|r_n - r_m|^2 - D^2``; the squared
    correction drops the transmit-only quadratic term as printed.
    """
    t, r, c, D = _offsets(scenario)
    dr = r[:, None, :]
    dt = t[None, :, :]
    lin = 2 * c * dr - 2 * c * dt + dr ** 2 - 2 * dr * dt
    rho = (lin + dt ** 2).sum(axis=2)
    rho_sq = lin.sum(axis=2) ** 2
    return D * (1 + rho / (2 * D ** 2) - rho_sq / (8 * D ** 4))


def approx_pair_distance(scenario: Scenario, m: int, n: int) -> float:
    """Taylor-approximated distance between tx element ``m`` and rx element ``n``."""
    t, r, c, D = _offsets(scenario)
    dt, dr = t[m], r[n]
    lin = 2 * c * dr - 2 * c * dt + dr ** 2 - 2 * dr * dt
    rho = float(np.sum(lin + dt ** 2))
    rho_sq = float(np.sum(lin)) ** 2
    return D * (1 + rho / (2 * D ** 2) - rho_sq / (8 * D ** 4))


def factorized_channel(scenario: Scenario) -> CorrelationFactors:
    """Phase factorisation of the channel at the carrier frequency (no Doppler)."""
    t, r, c, D = _offsets(scenario)
    k = scenario.wavenumber
    tc = t @ c
    rc = r @ c
    tx_phase = -2 * tc + np.sum(t * t, axis=1) - tc ** 2 / D ** 2
    rx_phase = 2 * D ** 2 + 2 * rc + np.sum(r * r, axis=1) - rc ** 2 / D ** 2
    f_tx = np.exp(-1j * k / (2 * D) * tx_phase)
    f_rx = np.exp(-1j * k / (2 * D) * rx_phase)
    p = np.exp(1j * k / D * (r @ t.T - np.outer(rc, tc) / D ** 2))
    return CorrelationFactors(f_tx=f_tx, f_rx=f_rx, p=p, scale=1 / (4 * math.pi * D))


def gain_matrix(factors: CorrelationFactors) -> np.ndarray:
    """``R = P^H P`` (M x M), symmetrised to be exactly Hermitian."""
    p = factors.p
    R = p.conj().T @ p
    return (R + R.conj().T) / 2


def _printed_eta(scenario: Scenario) -> np.ndarray:
    x0, y0, z0 = scenario.rx_center
    D = center_distance(scenario)
    a1, b1 = scenario.tx_pose.alpha, scenario.tx_pose.beta
    a2, b2 = scenario.rx_pose.alpha, scenario.rx_pose.beta
    sin, cos = math.sin, math.cos
    half = math.pi / 2

    def s1(p, q):
        return D ** 2 * cos(p - q) - x0 ** 2 * cos(p) * cos(q)

    def s2(b, p, q):
        # b is unused in the printed definition; kept for the printed signature
        return (-D ** 2 * sin(p - q) + x0 ** 2 * sin(p) * cos(q)
                - y0 ** 2 * cos(p) * sin(q) - x0 * y0 * cos(p + q))

    def s3(p, q):
        return sin(p) * sin(b1) * cos(b2) + sin(q) * cos(b1) * sin(b2)

    def s4(p, q):
        return (-y0 ** 2 * cos(p) * cos(q) + D ** 2 * cos(b1) * cos(b2)
                - z0 ** 2 * cos(b1) * cos(b2) + x0 * y0 * sin(p + q))

    rx, tx = scenario.rx, scenario.tx
    d3 = D ** 3
    eta11 = rx.spacing_h * tx.spacing_h / d3 * (
        s1(a1, a2) + y0 ** 2 * sin(a1) * sin(a2) + x0 * y0 * sin(a1 - a2))
    eta12 = rx.spacing_h * tx.spacing_v / d3 * (
        sin(b1) * s2(b1, a1, a2) - z0 * cos(b1) * (x0 * cos(a2) + y0 * sin(a2)))
    eta21 = rx.spacing_v * tx.spacing_h / d3 * (
        sin(b1) * s2(b2, a2, a1) - z0 * cos(b1) * (x0 * cos(a2) + y0 * sin(a2)))
    eta22 = rx.spacing_v * tx.spacing_v / d3 * (
        sin(b1) * sin(b2) * (s1(a1 + half, a2 + half) + s4(a1, a2))
        + x0 * z0 * s3(a1, a2) - y0 * z0 * s3(a1 + half, a2 + half))
    return np.array([[eta11, eta12], [eta21, eta22]])


def _fitted_eta(scenario: Scenario) -> np.ndarray:
    # The coupling phase of P is bilinear in the rx and tx offsets, so the
    # mixed difference over one lattice step on each panel isolates k * eta.
    c = np.asarray(scenario.rx_center)
    D = center_distance(scenario)
    k = scenario.wavenumber

    def phase(r, t):
        return k / D * (r @ t - (r @ c) * (t @ c) / D ** 2)

    e = panel_basis(scenario.rx_pose)
    w = panel_basis(scenario.tx_pose)
    r_steps = (scenario.rx.spacing_h * e[0], scenario.rx.spacing_v * e[1])
    t_steps = (scenario.tx.spacing_h * w[0], scenario.tx.spacing_v * w[1])
    zero = np.zeros(3)
    eta = np.empty((2, 2))
    for a, ra in enumerate(r_steps):
        for b, tb in enumerate(t_steps):
            mixed = phase(ra, tb) - phase(ra, zero) - phase(zero, tb) + phase(zero, zero)
            eta[a, b] = mixed / k
    return eta


def eta_coefficients(scenario: Scenario) -> EtaReport:
    """Coupling coefficients from the printed formulas and from the phase fit.

    Downstream code uses ``report.fitted``; the printed set is kept for
    traceability and its disagreement is exposed as ``report.discrepancy``.
    """
    return EtaReport(
        printed=EtaCoefficients(_printed_eta(scenario), "closed_form"),
        fitted=EtaCoefficients(_fitted_eta(scenario), "oracle_fit"),
    )


def dirichlet(x, n: int):
    """``sin(n x / 2) / sin(x / 2)``, the centred sum of ``exp(j x (i - (n-1)/2))``.

    At the removable singularities ``x = 2 pi q`` the limit ``n (-1)^(q (n-1))``
    is returned.
    """
    x = np.asarray(x, dtype=float)
    den = np.sin(x / 2)
    singular = np.abs(den) < DIRICHLET_SINGULAR_TOL
    safe = np.where(singular, 1.0, den)
    out = np.sin(n * x / 2) / safe
    q = np.rint(x / (2 * np.pi))
    limit = n * np.where((q * (n - 1)) % 2 == 0, 1.0, -1.0)
    out = np.where(singular, limit, out)
    return out if out.ndim else float(out)


def _dirichlet_args(scenario: Scenario, eta: np.ndarray, d1, d2):
    k = scenario.wavenumber
    x_h = k * (eta[0, 0] * d1 + eta[0, 1] * d2)
    x_v = k * (eta[1, 0] * d1 + eta[1, 1] * d2)
    return x_h, x_v


def gain_entry_closed_form(scenario: Scenario, u: int, v: int, eta: np.ndarray | None = None) -> complex:
    """Entry ``R[u, v]`` as a product of two Dirichlet kernels."""
    if eta is None:
        eta = _fitted_eta(scenario)
    h = scenario.tx.count_h
    d1 = v % h - u % h
    d2 = v // h - u // h
    x_h, x_v = _dirichlet_args(scenario, eta, d1, d2)
    return complex(dirichlet(x_h, scenario.rx.count_h) * dirichlet(x_v, scenario.rx.count_v))


def gain_matrix_closed_form(scenario: Scenario, eta: np.ndarray | None = None) -> np.ndarray:
    """Full real gain matrix ``R`` (M x M) from the Dirichlet product form.

    ``R[u, v]`` depends only on the index difference, so the kernel is
    evaluated once per distinct difference and gathered.
    """
    if eta is None:
        eta = _fitted_eta(scenario)
    mh, mv = scenario.tx.count_h, scenario.tx.count_v
    d1 = np.arange(-(mh - 1), mh)
    d2 = np.arange(-(mv - 1), mv)
    x_h, x_v = _dirichlet_args(scenario, eta, d1[:, None], d2[None, :])
    table = dirichlet(x_h, scenario.rx.count_h) * dirichlet(x_v, scenario.rx.count_v)
    m1, m2 = element_indices(scenario.tx)
    i1 = m1[None, :] - m1[:, None] + (mh - 1)
    i2 = m2[None, :] - m2[:, None] + (mv - 1)
    return table[i1, i2]


def optimal_spacing(scenario: Scenario) -> float:
    """Uniform spacing that zeroes the Dirichlet kernel for parallel panels.

    ``d = sqrt(|lambda D^3 / (N_H x0 z0)|)`` with ``N_H`` the receive
    horizontal element count.
    """
    if not (scenario.tx_pose.is_parallel and scenario.rx_pose.is_parallel):
        raise ValueError("optimal spacing is only defined for parallel panels (all angles zero)")
    x0, _, z0 = scenario.rx_center
    if x0 == 0 or z0 == 0:
        raise ValueError("optimal spacing is singular when x0 or z0 is zero")
    D = center_distance(scenario)
    return math.sqrt(abs(scenario.wavelength * D ** 3 / (scenario.rx.count_h * x0 * z0)))


def numerical_rank(matrix, tol: float = 1e-6) -> int:
    """Count of singular values above ``tol`` times the largest one."""
    s = np.linalg.svd(np.asarray(matrix), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))
