"""Constant-velocity train localisation from two polar fixes.

The train runs along the x-axis, ``x(t) = x0 - v t``, at a fixed lateral
offset ``y0`` from the base station. Positions are polar pairs
``(theta, range)`` in the horizontal plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PolarObservation:
    theta: float
    range: float
    time: float = 0.0

    def __post_init__(self):
        if not self.range > 0:
            raise ValueError(f"range must be positive, got {self.range}")
        if self.time < 0:
            raise ValueError(f"time must be non-negative, got {self.time}")


@dataclass(frozen=True)
class TrackParams:
    initial_center: tuple[float, float, float]
    speed: float
    duration: float
    step: float = 1.0
    noise_theta: float = 0.0
    noise_range: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")
        if self.noise_theta < 0 or self.noise_range < 0:
            raise ValueError("noise standard deviations must be non-negative")


@dataclass(frozen=True)
class Track:
    """Sampled ground truth and noisy polar fixes of one pass."""

    times: np.ndarray
    x: np.ndarray
    y: float
    theta: np.ndarray
    range: np.ndarray
    theta_noisy: np.ndarray
    range_noisy: np.ndarray

    def __len__(self):
        return len(self.times)

    def truth(self) -> np.ndarray:
        return np.column_stack([self.theta, self.range])

    def observation(self, i: int, noisy: bool = True) -> PolarObservation:
        if noisy:
            return PolarObservation(float(self.theta_noisy[i]), float(self.range_noisy[i]), float(self.times[i]))
        return PolarObservation(float(self.theta[i]), float(self.range[i]), float(self.times[i]))

    def pairs(self) -> list[tuple[PolarObservation, PolarObservation]]:
        return [(self.observation(i, noisy=False), self.observation(i)) for i in range(len(self))]


def estimate_speed(obs0: PolarObservation, obs1: PolarObservation) -> float:
    """Along-track speed from the change of the x-projection between two fixes."""
    dt = obs1.time - obs0.time
    if not dt > 0:
        raise ValueError("second observation must be strictly later than the first")
    return (obs0.range * math.cos(obs0.theta) - obs1.range * math.cos(obs1.theta)) / dt


def predict_position(obs0: PolarObservation, speed: float, t: float) -> tuple[float, float]:
    """Predicted ``(theta, range)`` at time ``t`` after ``obs0``."""
    if t < 0:
        raise ValueError("prediction time must be non-negative")
    r0, th0 = obs0.range, obs0.theta
    vt = speed * t
    theta = math.atan2(r0 * math.sin(th0), r0 * math.cos(th0) - vt)
    radicand = vt ** 2 - 2 * vt * r0 * math.cos(th0) + r0 ** 2
    if radicand < 0:
        # cancellation near the closest approach can leave a tiny negative value
        if radicand < -1e-9 * max(r0 ** 2, vt ** 2):
            raise ValueError("inconsistent inputs: negative squared range")
        radicand = 0.0
    return theta, math.sqrt(radicand)


def predict_track(obs0: PolarObservation, speed: float, times) -> np.ndarray:
    """Vectorised :func:`predict_position`, returns an array of shape ``(T, 2)``."""
    t = np.asarray(times, dtype=float) - obs0.time
    r0, th0 = obs0.range, obs0.theta
    vt = speed * t
    theta = np.arctan2(r0 * math.sin(th0), r0 * math.cos(th0) - vt)
    radicand = vt ** 2 - 2 * vt * r0 * math.cos(th0) + r0 ** 2
    return np.column_stack([theta, np.sqrt(np.clip(radicand, 0.0, None))])


def simulate_track(params: TrackParams) -> Track:
    """Straight-line pass sampled every ``step`` seconds over ``[0, duration]``.

    Noisy fixes add independent zero-mean Gaussian errors to angle and range;
    a negative noisy range is reflected to keep it physical.
    """
    x0, y0, _ = (float(v) for v in params.initial_center)
    n = int(math.floor(params.duration / params.step + 1e-9)) + 1
    times = np.arange(n) * params.step
    x = x0 - params.speed * times
    theta = np.arctan2(y0, x)
    ranges = np.hypot(x, y0)
    rng = np.random.default_rng(params.seed)
    theta_noise = rng.normal(0.0, 1.0, n) * params.noise_theta
    range_noise = rng.normal(0.0, 1.0, n) * params.noise_range
    range_noisy = np.abs(ranges + range_noise)
    return Track(times=times, x=x, y=y0, theta=theta, range=ranges,
                 theta_noisy=theta + theta_noise, range_noisy=range_noisy)


def nmse(truth, predicted) -> float:
    """Prediction error energy over truth energy, each sample a ``(theta, range)`` pair."""
    truth = np.asarray(truth, dtype=float).reshape(-1, 2)
    predicted = np.asarray(predicted, dtype=float).reshape(-1, 2)
    if truth.shape != predicted.shape:
        raise ValueError(f"length mismatch: {len(truth)} vs {len(predicted)}")
    if len(truth) == 0:
        raise ValueError("empty sequences")
    den = float(np.sum(truth ** 2))
    if den == 0:
        raise ValueError("truth is identically zero")
    return float(np.sum((truth - predicted) ** 2)) / den


def nmse_cartesian(truth, predicted) -> float:
    """NMSE of the same samples after conversion to horizontal-plane x/y."""
    def to_xy(polar):
        polar = np.asarray(polar, dtype=float).reshape(-1, 2)
        return np.column_stack([polar[:, 1] * np.cos(polar[:, 0]), polar[:, 1] * np.sin(polar[:, 0])])

    return nmse(to_xy(truth), to_xy(predicted))


def localize(track: Track) -> np.ndarray:
    """Predict the whole pass from the first two noisy fixes."""
    if len(track) < 2:
        raise ValueError("need at least two fixes to estimate the speed")
    obs0, obs1 = track.observation(0), track.observation(1)
    speed = estimate_speed(obs0, obs1)
    return predict_track(obs0, speed, track.times)
