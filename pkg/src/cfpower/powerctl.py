"""Power-control strategies: channel inversion, grid max-min and particle swarm.

The two optimizers maximize a fitness over the box ``[0, zeta_max]^K``.
Fitness callables are vectorized: they take an ``(n, K)`` array of power
vectors and return ``n`` values (see :mod:`cfpower.rates`).
"""

from dataclasses import dataclass, field

import numpy as np


class BudgetExceeded(RuntimeError):
    """The brute-force grid is larger than the configured evaluation cap."""


class CountingFitness:
    """Wrap a vectorized fitness and count individual evaluations."""

    def __init__(self, fitness):
        self.fitness = fitness
        self.calls = 0

    def __call__(self, zeta):
        zeta = np.atleast_2d(zeta)
        self.calls += zeta.shape[0]
        return self.fitness(zeta)


def _rowwise(fitness):
    def batched(zeta):
        return np.array([fitness(z) for z in np.atleast_2d(zeta)], dtype=float)
    return batched


def channel_inversion(realization, zeta_max=1.0):
    """Inverse aggregate mean channel power per UE, rescaled so the max is ``zeta_max``.

    The LoS term uses the squared norm of every LoS gain vector, whether or
    not that link is currently blocked.
    """
    power = np.sum(np.abs(realization.los_gain) ** 2, axis=(0, 2)) + realization.beta.sum(axis=0)
    if np.any(power <= 0):
        raise ZeroDivisionError("degenerate channel: zero aggregate power for some UE")
    raw = 1.0 / power
    return raw * (zeta_max / raw.max())


def power_grid(L, zeta_max=1.0):
    if L < 2:
        raise ValueError("need at least two power levels")
    return np.linspace(0.0, zeta_max, L)


def max_min_brute_force(fitness, K, L, zeta_max=1.0, max_evaluations=10**8,
                        chunk_size=1 << 16, vectorized=True):
    """Exhaustive search over ``L`` uniform levels per UE (``L**K`` points).

    Ties on fitness go to the smallest total power, then to the first grid
    point in lexicographic order.
    """
    total = L ** K
    if total > max_evaluations:
        raise BudgetExceeded(f"L**K = {L}**{K} = {total} exceeds cap {max_evaluations}")
    f = fitness if vectorized else _rowwise(fitness)
    levels = power_grid(L, zeta_max)
    shape = (L,) * K

    best_val, best_sum, best_idx = -np.inf, np.inf, None
    for start in range(0, total, chunk_size):
        flat = np.arange(start, min(start + chunk_size, total))
        grid = levels[np.stack(np.unravel_index(flat, shape), axis=-1)]
        vals = np.asarray(f(grid), dtype=float)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        v = vals.max()
        if v < best_val:
            continue
        tied = np.flatnonzero(vals == v)
        sums = grid[tied].sum(axis=1)
        j = tied[np.argmin(sums)]
        if v > best_val or sums.min() < best_sum:
            best_val, best_sum, best_idx = v, sums.min(), flat[j]
    if best_idx is None:
        best_idx = 0
    return levels[np.array(np.unravel_index(best_idx, shape))]


@dataclass(frozen=True)
class SwarmConfig:
    """Particle swarm hyperparameters.

    ``velocity_max=None`` disables velocity clamping. ``warm_start`` seeds
    particle 0 with a caller-supplied vector (channel inversion in the
    experiment harness).
    """

    particles: int = 50
    iterations: int = 10_000
    inertia: float = 1.0
    cognitive: float = 2.0
    social: float = 2.0
    zeta_max: float = 1.0
    velocity_max: float = None
    warm_start: bool = True
    seed: int = None

    def __post_init__(self):
        if self.particles < 1 or self.iterations < 1:
            raise ValueError("particles and iterations must be >= 1")
        if self.inertia < 0 or self.cognitive < 0 or self.social < 0:
            raise ValueError("swarm coefficients must be nonnegative")
        if not self.zeta_max > 0:
            raise ValueError("zeta_max must be positive")
        if self.velocity_max is not None and not self.velocity_max > 0:
            raise ValueError("velocity_max must be positive when set")


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest: np.ndarray
    pbest_val: np.ndarray
    gbest: np.ndarray
    gbest_val: float = -np.inf
    t: int = 0
    nan_count: int = 0
    history: list = field(default_factory=list)


class ParticleSwarm:
    """Box-constrained particle swarm maximizer.

    Each iteration moves every particle with the inertia / cognitive / social
    velocity update using the global best from the start of the iteration,
    evaluates the whole swarm in one fitness call, then folds personal and
    global bests in particle order with strict improvement. Coordinates that
    leave ``[0, zeta_max]`` are clamped and their velocity zeroed.
    """

    def __init__(self, fitness, K, config, rng=None, vectorized=True):
        self.fitness = fitness if vectorized else _rowwise(fitness)
        self.K = K
        self.config = config
        seed = config.seed if rng is None else rng
        self.rng = np.random.default_rng(seed)
        self.state = None

    def _evaluate(self, X):
        vals = np.asarray(self.fitness(X), dtype=float).reshape(len(X))
        nan = np.isnan(vals)
        if nan.any():
            self.state.nan_count += int(nan.sum())
            vals = np.where(nan, -np.inf, vals)
        return vals

    def _fold_global(self):
        s = self.state
        j = int(np.argmax(s.pbest_val))
        if s.pbest_val[j] > s.gbest_val:
            s.gbest_val = float(s.pbest_val[j])
            s.gbest = s.pbest[j].copy()

    def initialize(self, initial=None):
        cfg, P, K = self.config, self.config.particles, self.K
        X = self.rng.random((P, K)) * cfg.zeta_max
        V = self.rng.random((P, K)) * cfg.zeta_max
        if initial is not None:
            X[0] = np.clip(np.asarray(initial, dtype=float), 0.0, cfg.zeta_max)
        self.state = SwarmState(X, V, X.copy(), np.empty(P), np.zeros(K))
        vals = self._evaluate(X)
        self.state.pbest_val = vals.copy()
        self._fold_global()
        self.state.history.append(self.state.gbest_val)
        return self.state

    def step(self):
        cfg, s = self.config, self.state
        P, K = s.positions.shape
        r1 = self.rng.random((P, K))
        r2 = self.rng.random((P, K))
        V = (cfg.inertia * s.velocities
             + cfg.cognitive * r1 * (s.pbest - s.positions)
             + cfg.social * r2 * (s.gbest - s.positions))
        if cfg.velocity_max is not None:
            V = np.clip(V, -cfg.velocity_max, cfg.velocity_max)
        X = s.positions + V
        out = (X < 0.0) | (X > cfg.zeta_max)
        X = np.clip(X, 0.0, cfg.zeta_max)
        V[out] = 0.0
        s.positions, s.velocities = X, V

        vals = self._evaluate(X)
        better = vals > s.pbest_val
        s.pbest[better] = X[better]
        s.pbest_val[better] = vals[better]
        self._fold_global()
        s.t += 1
        s.history.append(s.gbest_val)
        return s

    def run(self, initial=None):
        self.initialize(initial)
        for _ in range(self.config.iterations):
            self.step()
        return self.state.gbest.copy(), self.state.gbest_val


def psa_maximize(fitness, K, config, rng=None, initial=None, vectorized=True):
    """Maximize ``fitness`` over ``[0, zeta_max]^K``; returns ``(zeta, value)``."""
    return ParticleSwarm(fitness, K, config, rng=rng, vectorized=vectorized).run(initial)
