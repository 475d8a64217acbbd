"""Experiment runners behind the ``roma`` command line.

Configuration files are flat ``key = value`` text; ``#`` starts a comment.
Every runner returns a :class:`ResultTable` whose CSV rendering starts with a
comment line carrying the library version, a hash of the resolved
configuration and the seed, followed by the header row.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import PowerPolicy, capacity, exact_channel, gram
from .correlation import optimal_spacing
from .geometry import SPEED_OF_LIGHT, ArrayConfig, Scenario, center_distance
from .optimizer import DEConfig, de_optimize, rank_objective
from .trajectory import TrackParams, localize, nmse, nmse_cartesian, simulate_track

log = logging.getLogger(__name__)

MODES = ("spacing-sweep", "position-sweep", "localization", "rotation-opt")


class ConfigError(ValueError):
    """Invalid or unknown configuration entry."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none", "center") else float(text)


def _parse_optional_int(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else int(text)


def _float_list(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    carrier_hz: float = 20e9
    snr_db: float = 15.0
    # None: SNR referenced to the free-space loss at the (x0, y0, z0) centre distance
    snr_reference_m: float | None = None
    speed_mps: float = 350 / 3.6
    x0: float = 30.0
    y0: float = 4.0
    z0: float = 10.0
    tx_count_h: int = 20
    tx_count_v: int = 20
    rx_count_h: int = 20
    rx_count_v: int = 20
    spacing_over_lambda: float = 1.0
    rank_tol: float = 1e-6
    doppler: bool = True
    de_population: int = 40
    de_generations: int = 100
    de_f0: float = 0.5
    de_cr: float = 0.2
    de_crossover: str = "literal"
    warm_start: bool = True
    noise_theta: float = 0.01
    noise_range: float = 1.0
    noise_ref_count: int = 16
    localization_counts: tuple = (16, 32, 64, 128)
    localization_seeds: int = 100
    track_radius_m: float = 2000.0
    track_step_s: float = 1.0
    sweep_start: float | None = None
    sweep_stop: float | None = None
    sweep_steps: int | None = None
    sweep_panels: tuple = (4, 8)
    sweep_x0: tuple = (30.0, 60.0)
    sweep_carriers_hz: tuple = (20e9, 10e9)
    seed: int = 0

    def __post_init__(self):
        positive = ("carrier_hz", "speed_mps", "spacing_over_lambda", "rank_tol",
                    "track_radius_m", "track_step_s")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("tx_count_h", "tx_count_v", "rx_count_h", "rx_count_v",
                     "noise_ref_count", "localization_seeds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.de_population < 4:
            raise ConfigError("de_population must be >= 4")
        if self.de_generations < 1:
            raise ConfigError("de_generations must be >= 1 (optimizer budget cannot be zero)")
        if not 0 <= self.de_cr <= 1:
            raise ConfigError("de_cr must lie in [0, 1]")
        if self.de_crossover not in ("literal", "binomial"):
            raise ConfigError("de_crossover must be 'literal' or 'binomial'")
        if self.noise_theta < 0 or self.noise_range < 0:
            raise ConfigError("noise standard deviations must be non-negative")
        if self.snr_reference_m is not None and not self.snr_reference_m > 0:
            raise ConfigError("snr_reference_m must be positive")
        if math.hypot(self.x0, self.y0, self.z0) == 0:
            raise ConfigError("x0, y0, z0 must not all be zero")
        if self.sweep_steps is not None and self.sweep_steps < 1:
            raise ConfigError("sweep_steps must be >= 1")
        if (self.sweep_start is not None and self.sweep_stop is not None
                and self.sweep_stop < self.sweep_start):
            raise ConfigError("sweep range is empty (sweep_stop < sweep_start)")
        for name in ("localization_counts", "sweep_panels", "sweep_x0", "sweep_carriers_hz"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must not be empty")
        if min(self.localization_counts) < 1 or min(self.sweep_panels) < 1:
            raise ConfigError("antenna counts must be >= 1")
        if min(self.sweep_carriers_hz) <= 0:
            raise ConfigError("sweep carriers must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def policy(self) -> PowerPolicy:
        ref = self.snr_reference_m
        if ref is None:
            ref = math.hypot(self.x0, self.y0, self.z0)
        return PowerPolicy.from_db(self.snr_db, ref)

    def sweep(self, start: float, stop: float, steps: int) -> np.ndarray:
        start = start if self.sweep_start is None else self.sweep_start
        stop = stop if self.sweep_stop is None else self.sweep_stop
        steps = steps if self.sweep_steps is None else self.sweep_steps
        return np.linspace(start, stop, steps)

    def scenario(self, x0: float | None = None) -> Scenario:
        d = self.spacing_over_lambda * self.wavelength
        return Scenario(
            tx=ArrayConfig(self.tx_count_h, self.tx_count_v, d, d),
            rx=ArrayConfig(self.rx_count_h, self.rx_count_v, d, d),
            rx_center=(self.x0 if x0 is None else x0, self.y0, self.z0),
            velocity=(self.speed_mps, 0.0, 0.0),
            carrier_hz=self.carrier_hz,
            doppler=self.doppler,
        )

    def de_config(self, dims: int) -> DEConfig:
        return DEConfig(population=self.de_population, dims=dims, generations=self.de_generations,
                        f0=self.de_f0, cr=self.de_cr, seed=self.seed, crossover=self.de_crossover)

    def digest(self) -> str:
        canonical = "\n".join(f"{k}={v!r}" for k, v in sorted(dataclasses.asdict(self).items()))
        return hashlib.sha256(canonical.encode()).hexdigest()


_PARSERS = {
    "carrier_hz": float, "snr_db": float, "snr_reference_m": _parse_optional_float,
    "speed_mps": float, "x0": float, "y0": float, "z0": float,
    "tx_count_h": int, "tx_count_v": int, "rx_count_h": int, "rx_count_v": int,
    "spacing_over_lambda": float, "rank_tol": float, "doppler": _parse_bool,
    "de_population": int, "de_generations": int, "de_f0": float, "de_cr": float,
    "de_crossover": str.strip, "warm_start": _parse_bool,
    "noise_theta": float, "noise_range": float, "noise_ref_count": int,
    "localization_counts": _int_list, "localization_seeds": int,
    "track_radius_m": float, "track_step_s": float,
    "sweep_start": _parse_optional_float, "sweep_stop": _parse_optional_float,
    "sweep_steps": _parse_optional_int,
    "sweep_panels": _int_list, "sweep_x0": _float_list, "sweep_carriers_hz": _float_list,
    "seed": int,
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Build a config from ``key = value`` lines; ``overrides`` win over the file."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **overrides)


@dataclass
class ResultTable:
    mode: str
    columns: tuple
    rows: list = field(default_factory=list)
    config: ExperimentConfig | None = None
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        digest = self.config.digest() if self.config else "none"
        seed = self.config.seed if self.config else "none"
        buf.write(f"# roma_hsr {__version__} mode={self.mode} config_sha256={digest} seed={seed}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def run_spacing_sweep(config: ExperimentConfig) -> ResultTable:
    """Capacity of parallel panels versus normalised spacing d / lambda.

    One curve per (square panel size, x0, carrier) combination; the exact
    channel is used and the optimal spacing is reported alongside.
    """
    table = ResultTable("spacing-sweep", ("d_over_lambda", "capacity_bps_hz", "d_star_over_lambda",
                                          "panel", "distance_m", "carrier_hz"), config=config)
    grid = config.sweep(1.0, 100.0, 100)
    policy = config.policy
    for n in config.sweep_panels:
        for x0 in config.sweep_x0:
            for fc in config.sweep_carriers_hz:
                lam = SPEED_OF_LIGHT / fc
                base = Scenario(ArrayConfig.square(n, lam), ArrayConfig.square(n, lam),
                                rx_center=(x0, config.y0, config.z0),
                                velocity=(config.speed_mps, 0.0, 0.0),
                                carrier_hz=fc, doppler=config.doppler)
                try:
                    d_star = optimal_spacing(base) / lam
                except ValueError:
                    d_star = float("nan")
                D = center_distance(base)
                for ratio in grid:
                    cap = capacity(gram(exact_channel(base.with_spacing(ratio * lam))), policy, config.rank_tol)
                    table.rows.append((float(ratio), cap, d_star, f"{n}x{n}", D, fc))
    return table


def _memoized(fn):
    cache = {}

    def wrapped(x):
        key = tuple(float(v) for v in x)
        if key not in cache:
            cache[key] = fn(key)
        return cache[key]

    return wrapped


def optimize_policies(config: ExperimentConfig, scenario: Scenario) -> dict:
    """Best ``(rank, capacity)`` and angles for the three antenna policies.

    The one-sided search is warm-started from the fixed pose and the
    two-sided search from the one-sided optimum, so the nested policies are
    ordered by construction.
    """
    policy = config.policy

    def score(angles):
        return rank_objective(angles, scenario, config.rank_tol, policy)

    fpa_angles = np.zeros(4)
    results = {"fpa": (score(fpa_angles), fpa_angles)}

    one_obj = _memoized(lambda a: score((0.0, 0.0, a[0], a[1])))
    best_rx, trace = de_optimize(one_obj, config.de_config(2),
                                 initial=[(0.0, 0.0)] if config.warm_start else None)
    one_angles = np.array([0.0, 0.0, *best_rx])
    results["one_sided"] = (trace.scores[-1], one_angles)

    both_obj = _memoized(score)
    best, trace = de_optimize(both_obj, config.de_config(4),
                              initial=[one_angles] if config.warm_start else None)
    results["both_sided"] = (trace.scores[-1], best)
    return results


def run_position_sweep(config: ExperimentConfig) -> ResultTable:
    """Capacity of FPA, one-sided and two-sided rotation versus train x-position."""
    table = ResultTable("position-sweep", ("x_m", "policy", "capacity_bps_hz", "normalized_capacity"),
                        config=config)
    for x in config.sweep(10.0, 200.0, 4):
        results = optimize_policies(config, config.scenario(x0=float(x)))
        base = results["fpa"][0][1]
        for name in ("fpa", "one_sided", "both_sided"):
            cap = results[name][0][1]
            table.rows.append((float(x), name, cap, cap / base if base > 0 else float("nan")))
        log.info("x=%.1f m: %s", x, {k: v[0] for k, v in results.items()})
    return table


def localization_noise(config: ExperimentConfig, count: int) -> tuple[float, float]:
    """Angle and range noise stds for an array with ``count`` horizontal elements."""
    factor = config.noise_ref_count / count
    return config.noise_theta * factor, config.noise_range * factor


def localization_track(config: ExperimentConfig, noise_theta: float, noise_range: float,
                       seed: int) -> TrackParams:
    radius = config.track_radius_m
    if radius <= abs(config.y0):
        raise ConfigError("track radius must exceed the lateral offset y0")
    x_start = math.sqrt(radius ** 2 - config.y0 ** 2)
    duration = 2 * x_start / config.speed_mps
    if duration < config.track_step_s:
        raise ConfigError("track is shorter than one sampling step")
    return TrackParams((x_start, config.y0, config.z0), config.speed_mps, duration,
                       config.track_step_s, noise_theta, noise_range, seed)


def run_localization(config: ExperimentConfig) -> ResultTable:
    """Median localisation NMSE over seeds for each antenna count."""
    table = ResultTable("localization", ("count_h", "noise_theta", "noise_range", "nmse_paper",
                                         "nmse_cartesian"), config=config)
    for count in config.localization_counts:
        s_theta, s_range = localization_noise(config, count)
        mixed, cart = [], []
        for k in range(config.localization_seeds):
            track = simulate_track(localization_track(config, s_theta, s_range, config.seed + k))
            predicted = localize(track)
            mixed.append(nmse(track.truth(), predicted))
            cart.append(nmse_cartesian(track.truth(), predicted))
        table.rows.append((count, s_theta, s_range, float(np.median(mixed)), float(np.median(cart))))
    return table


def run_rotation_opt(config: ExperimentConfig) -> ResultTable:
    """Per-generation trace of the two-sided rotation search at one position."""
    table = ResultTable("rotation-opt", ("generation", "rank", "capacity_bps_hz", "a1", "b1", "a2", "b2"),
                        config=config)
    scenario = config.scenario()
    policy = config.policy
    objective = _memoized(lambda a: rank_objective(a, scenario, config.rank_tol, policy))
    best, trace = de_optimize(objective, config.de_config(4))
    for g, (angles, (rank, cap)) in enumerate(zip(trace.angles, trace.scores)):
        table.rows.append((g, rank, cap, *(float(a) for a in angles)))
    fpa = rank_objective(np.zeros(4), scenario, config.rank_tol, policy)
    table.summary = {
        "rank": trace.scores[-1][0],
        "capacity_bps_hz": trace.scores[-1][1],
        "angles": [float(a) for a in best],
        "fpa_rank": fpa[0],
        "fpa_capacity_bps_hz": fpa[1],
        "evaluations": trace.evaluations,
    }
    return table


RUNNERS = {
    "spacing-sweep": run_spacing_sweep,
    "position-sweep": run_position_sweep,
    "localization": run_localization,
    "rotation-opt": run_rotation_opt,
}
