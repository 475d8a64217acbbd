"""Adaptive differential evolution over the panel rotation angles.

Individuals are scored by the rank of the gain matrix ``R``; ties inside a
rank plateau are broken by the capacity of the reconstructed Gram matrix.
Scores compare lexicographically as ``(rank, capacity)`` tuples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import DEFAULT_RANK_TOL, PowerPolicy, capacity_from_eigenvalues
from .correlation import factorized_channel, gain_matrix, gain_matrix_closed_form
from .geometry import ALPHA_BOUNDS, BETA_BOUNDS, Scenario, center_distance

Score = tuple
Objective = Callable[[np.ndarray], Score]

CROSSOVER_MODES = ("literal", "binomial")


def rotation_bounds(sides: str = "both") -> np.ndarray:
    """Box bounds for ``(alpha_tx, beta_tx, alpha_rx, beta_rx)`` or, with
    ``sides="rx"``, for ``(alpha_rx, beta_rx)`` only.
    """
    panel = [ALPHA_BOUNDS, BETA_BOUNDS]
    if sides == "both":
        return np.array(panel * 2, dtype=float)
    if sides in ("rx", "tx"):
        return np.array(panel, dtype=float)
    raise ValueError(f"unknown sides {sides!r}")


@dataclass(frozen=True)
class DEConfig:
    population: int = 40
    dims: int = 4
    generations: int = 100
    f0: float = 0.5
    cr: float = 0.2
    seed: int = 0
    bounds: np.ndarray | None = None
    crossover: str = "literal"

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be at least 4 (mutation needs three distinct peers)")
        if self.dims < 1 or self.generations < 1:
            raise ValueError("dims and generations must be positive")
        if not 0.0 <= self.cr <= 1.0:
            raise ValueError("cr must lie in [0, 1]")
        if self.crossover not in CROSSOVER_MODES:
            raise ValueError(f"crossover must be one of {CROSSOVER_MODES}")
        bounds = self.bounds
        if bounds is None:
            if self.dims == 4:
                bounds = rotation_bounds("both")
            elif self.dims == 2:
                bounds = rotation_bounds("rx")
            else:
                raise ValueError("bounds are required unless dims is 2 or 4")
        bounds = np.array(bounds, dtype=float).reshape(self.dims, 2)
        if np.any(bounds[:, 0] > bounds[:, 1]):
            raise ValueError("every lower bound must not exceed its upper bound")
        object.__setattr__(self, "bounds", bounds)


@dataclass
class DETrace:
    """Incumbent after initialisation and after each generation (length gen + 1)."""

    angles: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    evaluations: int = 0

    def record(self, x: np.ndarray, score: Score) -> None:
        self.angles.append(np.array(x, dtype=float))
        self.scores.append(score)

    def __len__(self):
        return len(self.scores)

    @property
    def ranks(self) -> list:
        return [s[0] for s in self.scores]

    @property
    def capacities(self) -> list:
        return [s[1] for s in self.scores]


def mutation_scale(g: int, gen: int, f0: float) -> float:
    """Mutation factor for generation ``g``: ``f0 * 2**exp(1 - gen / (gen + 1 - g))``.

    Starts at ``2 f0`` and decays towards ``f0``.
    """
    if not 1 <= g <= gen:
        raise ValueError(f"generation {g} outside 1..{gen}")
    lamb = math.exp(1.0 - gen / (gen + 1.0 - g))
    return f0 * 2.0 ** lamb


def rank_objective(angles, scenario: Scenario, rank_tol: float = DEFAULT_RANK_TOL,
                   policy: PowerPolicy | None = None, method: str = "closed_form") -> Score:
    """``(rank(R), capacity)`` for ``scenario`` posed at ``angles``.

    ``method="closed_form"`` builds ``R`` from the Dirichlet product form,
    ``"direct"`` forms ``P^H P``; both give the same matrix. ``R`` is Hermitian
    PSD, so its eigenvalue magnitudes are its singular values and also give
    the reconstructed Gram spectrum after scaling by ``1 / (4 pi D)^2``.
    """
    if policy is None:
        policy = PowerPolicy.from_db(15.0)
    posed = scenario.with_angles(angles)
    if method == "closed_form":
        R = gain_matrix_closed_form(posed)
    elif method == "direct":
        R = gain_matrix(factorized_channel(posed))
    else:
        raise ValueError(f"unknown method {method!r}")
    eig = np.sort(np.abs(np.linalg.eigvalsh(R)))[::-1]
    rank = int(np.count_nonzero(eig > rank_tol * eig[0])) if eig[0] > 0 else 0
    scale = 1.0 / (4 * math.pi * center_distance(posed)) ** 2
    return rank, capacity_from_eigenvalues(eig * scale, policy, rank_tol)


def _pick_peers(rng: np.random.Generator, i: int, num: int) -> np.ndarray:
    r = rng.choice(num - 1, size=3, replace=False)
    return r + (r >= i)


def de_optimize(objective: Objective, config: DEConfig,
                initial: Sequence | None = None) -> tuple[np.ndarray, DETrace]:
    """Maximise ``objective`` over the box ``config.bounds``.

    Parameters
    ----------
    objective : callable
        Maps a point to a score tuple; larger tuples are better.
    config : DEConfig
        Population size, budget, operators and seed.
    initial : sequence of points, optional
        Points that replace the first members of the random initial
        population (warm start).

    Returns
    -------
    best : ndarray
        Final incumbent.
    trace : DETrace
        Incumbent per generation; the objective is called exactly
        ``(generations + 1) * population`` times.
    """
    rng = np.random.default_rng(config.seed)
    num, dims = config.population, config.dims
    lo, hi = config.bounds[:, 0], config.bounds[:, 1]
    trace = DETrace()

    def evaluate(x):
        trace.evaluations += 1
        return tuple(objective(x))

    pop = lo + rng.random((num, dims)) * (hi - lo)
    if initial is not None:
        seeds = np.clip(np.atleast_2d(np.asarray(initial, dtype=float)), lo, hi)
        if seeds.shape[1] != dims or len(seeds) > num:
            raise ValueError("initial points do not fit the population")
        pop[:len(seeds)] = seeds
    scores = [evaluate(x) for x in pop]
    best = max(range(num), key=scores.__getitem__)
    trace.record(pop[best], scores[best])

    for g in range(1, config.generations + 1):
        F = mutation_scale(g, config.generations, config.f0)
        mutants = np.empty_like(pop)
        for i in range(num):
            r1, r2, r3 = _pick_peers(rng, i, num)
            mutants[i] = np.clip(pop[r1] + F * (pop[r2] - pop[r3]), lo, hi)

        if config.crossover == "literal":
            take = rng.random(num) > config.cr
            trials = np.where(take[:, None], mutants, pop)
        else:
            mask = rng.random((num, dims)) < config.cr
            mask[np.arange(num), rng.integers(dims, size=num)] = True
            trials = np.where(mask, mutants, pop)

        for i in range(num):
            score = evaluate(trials[i])
            if score >= scores[i]:
                pop[i] = trials[i]
                scores[i] = score
        best = max(range(num), key=scores.__getitem__)
        trace.record(pop[best], scores[best])

    return trace.angles[-1].copy(), trace
