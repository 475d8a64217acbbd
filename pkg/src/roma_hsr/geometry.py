"""Panel geometry for two rotatable uniform planar arrays.

The transmit panel is centred at the origin and the receive panel at
``rx_center``. Each panel is spanned by two orthonormal vectors

    u1 = (cos a, sin a, 0)
    u2 = (-sin b sin a, sin b cos a, cos b)

where ``a`` rotates the panel about the vertical axis and ``b`` tilts it away
from the z-axis. Element ``m`` (zero based) sits at grid position
``(m % count_h, m // count_h)``; the one-based index is ``m + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

ALPHA_BOUNDS = (-math.pi / 2, math.pi / 2)
BETA_BOUNDS = (0.0, math.pi / 2)

_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class ArrayConfig:
    """Element counts and spacings (metres) of one uniform planar array."""

    count_h: int
    count_v: int
    spacing_h: float
    spacing_v: float

    def __post_init__(self):
        if int(self.count_h) != self.count_h or int(self.count_v) != self.count_v:
            raise ValueError("element counts must be integers")
        if self.count_h < 1 or self.count_v < 1:
            raise ValueError(f"element counts must be >= 1, got {self.count_h}x{self.count_v}")
        if not (self.spacing_h > 0 and self.spacing_v > 0):
            raise ValueError("antenna spacings must be positive")

    @classmethod
    def square(cls, count: int, spacing: float) -> "ArrayConfig":
        return cls(count, count, spacing, spacing)

    @property
    def size(self) -> int:
        return self.count_h * self.count_v


@dataclass(frozen=True)
class PanelPose:
    """Rotation ``alpha`` in [-pi/2, pi/2] and tilt ``beta`` in [0, pi/2] (radians)."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        lo, hi = ALPHA_BOUNDS
        if not lo - _ANGLE_SLACK <= self.alpha <= hi + _ANGLE_SLACK:
            raise ValueError(f"alpha={self.alpha} outside [-pi/2, pi/2]")
        lo, hi = BETA_BOUNDS
        if not lo - _ANGLE_SLACK <= self.beta <= hi + _ANGLE_SLACK:
            raise ValueError(f"beta={self.beta} outside [0, pi/2]")

    @property
    def is_parallel(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0


@dataclass(frozen=True)
class Scenario:
    """Complete transceiver geometry.

    ``doppler=False`` freezes the propagation frequency at ``carrier_hz`` for
    every element pair.
    """

    tx: ArrayConfig
    rx: ArrayConfig
    tx_pose: PanelPose = field(default_factory=PanelPose)
    rx_pose: PanelPose = field(default_factory=PanelPose)
    rx_center: tuple[float, float, float] = (30.0, 4.0, 10.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    carrier_hz: float = 20e9
    doppler: bool = True

    def __post_init__(self):
        center = tuple(float(v) for v in self.rx_center)
        velocity = tuple(float(v) for v in self.velocity)
        if len(center) != 3 or len(velocity) != 3:
            raise ValueError("rx_center and velocity must be 3-vectors")
        if not all(math.isfinite(v) for v in center):
            raise ValueError("rx_center must be finite")
        if math.hypot(*center) == 0.0:
            raise ValueError("rx_center coincides with the transmitter centre")
        if not self.carrier_hz > 0:
            raise ValueError("carrier_hz must be positive")
        object.__setattr__(self, "rx_center", center)
        object.__setattr__(self, "velocity", velocity)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi * self.carrier_hz / SPEED_OF_LIGHT

    @property
    def angles(self) -> np.ndarray:
        """Rotation angles as ``(alpha_tx, beta_tx, alpha_rx, beta_rx)``."""
        return np.array([self.tx_pose.alpha, self.tx_pose.beta,
                         self.rx_pose.alpha, self.rx_pose.beta])

    def with_angles(self, angles) -> "Scenario":
        a1, b1, a2, b2 = (float(v) for v in angles)
        return replace(self, tx_pose=PanelPose(a1, b1), rx_pose=PanelPose(a2, b2))

    def with_spacing(self, spacing: float) -> "Scenario":
        """Same scenario with uniform spacing ``spacing`` on both panels."""
        return replace(
            self,
            tx=replace(self.tx, spacing_h=spacing, spacing_v=spacing),
            rx=replace(self.rx, spacing_h=spacing, spacing_v=spacing),
        )

    def with_center(self, rx_center) -> "Scenario":
        return replace(self, rx_center=tuple(rx_center))


def center_distance(scenario: Scenario) -> float:
    """Distance between the two panel centres."""
    return math.sqrt(sum(v * v for v in scenario.rx_center))


def panel_basis(pose: PanelPose) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal in-plane axes ``(u1, u2)`` of a rotated panel."""
    sa, ca = math.sin(pose.alpha), math.cos(pose.alpha)
    sb, cb = math.sin(pose.beta), math.cos(pose.beta)
    u1 = np.array([ca, sa, 0.0])
    u2 = np.array([-sb * sa, sb * ca, cb])
    return u1, u2


def element_indices(config: ArrayConfig) -> tuple[np.ndarray, np.ndarray]:
    """Grid indices ``(m1, m2)`` of every element, zero-based element order."""
    m = np.arange(config.size)
    return m % config.count_h, m // config.count_h


def centered_coordinates(config: ArrayConfig) -> tuple[np.ndarray, np.ndarray]:
    """In-plane coordinates (metres) of each element relative to the panel centre."""
    m1, m2 = element_indices(config)
    h = (m1 - (config.count_h - 1) / 2) * config.spacing_h
    v = (m2 - (config.count_v - 1) / 2) * config.spacing_v
    return h, v


def antenna_offsets(config: ArrayConfig, pose: PanelPose) -> np.ndarray:
    """Offsets of every element from its panel centre, shape ``(count_h*count_v, 3)``."""
    h, v = centered_coordinates(config)
    u1, u2 = panel_basis(pose)
    return h[:, None] * u1 + v[:, None] * u2


def antenna_positions(scenario: Scenario, side: str) -> np.ndarray:
    """Absolute element positions of the ``"tx"`` or ``"rx"`` panel."""
    if side == "tx":
        return antenna_offsets(scenario.tx, scenario.tx_pose)
    if side == "rx":
        return np.asarray(scenario.rx_center) + antenna_offsets(scenario.rx, scenario.rx_pose)
    raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")
