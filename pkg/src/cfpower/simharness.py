"""Monte Carlo experiment harness.

One realization runs layout -> channel -> effective coefficients -> power
control -> rates for every configured strategy and direction. Coefficients
are computed once per direction and shared by all strategies.

Random streams are derived from ``(seed, label, index)`` with a stable hash,
so results do not depend on scheduling or worker count.
"""

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from cfpower.beamforming import NumericalFailure, effective_coeffs
from cfpower.channel import NOISE_REFERENCES, ChannelParams, reference_noise_power, sample_channel
from cfpower.geometry import generate_layout
from cfpower.powerctl import (
    CountingFitness,
    SwarmConfig,
    channel_inversion,
    max_min_brute_force,
    psa_maximize,
)
from cfpower.rates import achievable_rates, jain_index, min_rate_fitness, sinr

log = logging.getLogger(__name__)

STRATEGIES = ("none", "inversion", "maxmin", "psa")
DIRECTIONS = ("uplink", "downlink")
MAX_FAILURE_FRACTION = 0.01


def child_seed(seed, label, index):
    """Stable 64-bit seed for stream ``label`` of realization ``index``."""
    digest = hashlib.blake2b(f"{seed}:{label}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed, label, index):
    return np.random.default_rng(child_seed(seed, label, index))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one Monte Carlo experiment.

    ``N`` is antennas per AP. When ``total_antennas`` is set, AP-count
    sweeps keep ``M * N`` equal to it.
    """

    M: int = 32
    K: int = 8
    N: int = 4
    total_antennas: int = None
    area_side: float = 1000.0
    ap_height: float = 10.0
    ue_height: float = 1.5
    realizations: int = 200
    directions: tuple = DIRECTIONS
    strategies: tuple = ("inversion", "psa")
    rates_mode: str = "instantaneous"
    levels: int = 100
    max_evaluations: int = 10**8
    seed: int = 0
    layout_policy: str = "redraw"
    blockage_policy: str = "per-realization"
    noise_reference: str = "los-array"
    threads: int = 1
    channel: ChannelParams = field(default_factory=ChannelParams)
    swarm: SwarmConfig = field(default_factory=SwarmConfig)

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.channel.N != self.N:
            object.__setattr__(self, "channel", replace(self.channel, N=self.N))
        problems = []
        if self.M < 1 or self.K < 1 or self.N < 1:
            problems.append("M, K and N must be >= 1")
        if self.realizations < 1:
            problems.append("realizations must be >= 1")
        if not self.strategies or set(self.strategies) - set(STRATEGIES):
            problems.append(f"strategies must be a nonempty subset of {STRATEGIES}")
        if not self.directions or set(self.directions) - set(DIRECTIONS):
            problems.append(f"directions must be a nonempty subset of {DIRECTIONS}")
        if self.rates_mode not in ("instantaneous", "ensemble"):
            problems.append("rates_mode must be 'instantaneous' or 'ensemble'")
        if self.layout_policy not in ("redraw", "fixed"):
            problems.append("layout_policy must be 'redraw' or 'fixed'")
        if self.blockage_policy not in ("per-realization", "per-deployment"):
            problems.append("blockage_policy must be 'per-realization' or 'per-deployment'")
        if self.noise_reference not in NOISE_REFERENCES:
            problems.append(f"noise_reference must be one of {NOISE_REFERENCES}")
        if self.levels < 2:
            problems.append("levels must be >= 2")
        if self.threads < 1:
            problems.append("threads must be >= 1")
        if problems:
            raise ValueError("; ".join(problems))

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = asdict(self)
        d["directions"] = list(self.directions)
        d["strategies"] = list(self.strategies)
        d["channel"].pop("N")
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown experiment key(s): {', '.join(sorted(unknown))}")
        N = d.get("N", cls.N)
        d["channel"] = ChannelParams(**{**d.get("channel", {}), "N": N})
        d["swarm"] = SwarmConfig(**d.get("swarm", {}))
        return cls(**d)


def resolve_noise_power(config):
    if config.channel.noise_power is not None:
        return config.channel.noise_power
    return reference_noise_power(config.channel, config.M, config.area_side,
                                 config.ap_height, config.ue_height, config.noise_reference)


@dataclass
class Record:
    """Outcome of one strategy in one direction on one realization."""

    realization: int
    strategy: str
    direction: str
    zeta: np.ndarray
    rates: np.ndarray
    sinr: np.ndarray
    evaluations: int = 0

    @property
    def min_rate(self):
        return float(self.rates.min())

    @property
    def min_sinr_db(self):
        with np.errstate(divide="ignore"):
            return float(10 * np.log10(self.sinr.min()))

    @property
    def jain(self):
        return jain_index(self.rates)


def realization_channel(config, index):
    layout_index = -1 if config.layout_policy == "fixed" else index
    layout = generate_layout(config.M, config.K, config.area_side,
                             stream(config.seed, "layout", layout_index),
                             ap_height=config.ap_height, ue_height=config.ue_height)
    blockage_index = layout_index if config.blockage_policy == "per-deployment" else index
    return sample_channel(layout, config.channel,
                          rng=stream(config.seed, "fading", index),
                          blockage_rng=stream(config.seed, "blockage", blockage_index))


def realization_coefficients(config, index, N0):
    """Channel draw and per-direction coefficients for realization ``index``."""
    channel = realization_channel(config, index)
    try:
        coeffs = {d: effective_coeffs(channel.H, N0, d) for d in config.directions}
    except NumericalFailure as exc:
        raise NumericalFailure(f"realization {index}: {exc}") from exc
    return channel, coeffs


def _power_vector(config, strategy, direction, index, channel, coeffs):
    zmax = config.swarm.zeta_max
    fitness = CountingFitness(lambda z: min_rate_fitness(coeffs, z))
    if strategy == "none":
        return np.full(config.K, zmax), 0
    if strategy == "inversion":
        return channel_inversion(channel, zmax), 0
    if strategy == "maxmin":
        z = max_min_brute_force(fitness, config.K, config.levels, zmax, config.max_evaluations)
        return z, fitness.calls
    warm = channel_inversion(channel, zmax) if config.swarm.warm_start else None
    z, _ = psa_maximize(fitness, config.K, config.swarm,
                        rng=stream(config.seed, f"psa-{direction}", index), initial=warm)
    return z, fitness.calls


def evaluate_strategies(config, index, channel, coeffs):
    records = []
    for direction in config.directions:
        c = coeffs[direction]
        for strategy in config.strategies:
            z, calls = _power_vector(config, strategy, direction, index, channel, c)
            records.append(Record(index, strategy, direction, z,
                                  achievable_rates(c, z), sinr(c, z), calls))
    return records


def run_realization(config, index, N0=None):
    """All strategy records for one realization (coefficients shared across strategies)."""
    N0 = resolve_noise_power(config) if N0 is None else N0
    channel, coeffs = realization_coefficients(config, index, N0)
    return evaluate_strategies(config, index, channel, coeffs)


def _ensemble_interference(coeff_sets, directions):
    """Replace per-realization interference powers by their batch mean."""
    out = []
    means = {d: np.mean([np.abs(c[d].coeff) ** 2 for _, c in coeff_sets], axis=0)
             for d in directions}
    for channel, coeffs in coeff_sets:
        out.append((channel, {d: replace(coeffs[d], interference_power=means[d]) for d in directions}))
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    noise_power: float
    failures: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def select(self, strategy, direction):
        return [r for r in self.records if r.strategy == strategy and r.direction == direction]

    def min_rates(self, strategy, direction):
        return np.array([r.min_rate for r in self.select(strategy, direction)])

    def mean_jain(self, strategy, direction):
        return float(np.mean([r.jain for r in self.select(strategy, direction)]))

    def min_sinr_cdf(self, strategy, direction):
        """Empirical CDF of the per-realization minimum SINR (dB)."""
        v = np.sort([r.min_sinr_db for r in self.select(strategy, direction)])
        return v, np.arange(1, len(v) + 1) / len(v)

    def rate_percentile(self, strategy, direction, q=10):
        """``q``-th percentile of the minimum rate; q=10 is the 90%-likely rate."""
        return float(np.percentile(self.min_rates(strategy, direction), q))

    def summary_rows(self):
        rows = []
        for d in self.config.directions:
            for s in self.config.strategies:
                mr = self.min_rates(s, d)
                rows.append({
                    "strategy": s, "direction": d,
                    "min_rate_p10": float(np.percentile(mr, 10)),
                    "min_rate_p50": float(np.percentile(mr, 50)),
                    "min_rate_p90": float(np.percentile(mr, 90)),
                    "mean_jain": self.mean_jain(s, d),
                })
        return rows


def _map(fn, items, threads):
    if threads == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _guard(fn):
    def wrapped(i):
        try:
            return fn(i)
        except NumericalFailure as exc:
            log.warning("%s", exc)
            return exc
    return wrapped


def run_experiment(config):
    """Run all realizations and gather records in realization order."""
    start = time.perf_counter()
    N0 = resolve_noise_power(config)
    indices = range(config.realizations)
    failures = []

    if config.rates_mode == "instantaneous":
        outs = _map(_guard(lambda i: run_realization(config, i, N0)), indices, config.threads)
        records = []
        for i, out in zip(indices, outs):
            if isinstance(out, Exception):
                failures.append((i, str(out)))
            else:
                records.extend(out)
    else:
        states = _map(_guard(lambda i: realization_coefficients(config, i, N0)), indices, config.threads)
        good = [(i, s) for i, s in zip(indices, states) if not isinstance(s, Exception)]
        failures = [(i, str(s)) for i, s in zip(indices, states) if isinstance(s, Exception)]
        adjusted = _ensemble_interference([s for _, s in good], config.directions)
        outs = _map(lambda j: evaluate_strategies(config, good[j][0], *adjusted[j]),
                    range(len(good)), config.threads)
        records = [r for out in outs for r in out]

    if len(failures) > MAX_FAILURE_FRACTION * config.realizations:
        raise NumericalFailure(
            f"{len(failures)} of {config.realizations} realizations failed; first: {failures[0][1]}")

    evals = {}
    for r in records:
        evals[r.strategy] = evals.get(r.strategy, 0) + r.evaluations
    meta = {
        "noise_power": N0,
        "seed": config.seed,
        "failures": failures,
        "fitness_evaluations": evals,
        "wall_clock_s": time.perf_counter() - start,
    }
    return ExperimentResult(config, records, N0, failures, meta)


def sweep_ap_count(config, M_values):
    """Mean Jain index per (M, strategy, direction) at fixed total antenna count.

    Returns the table rows and the per-M :class:`ExperimentResult` objects.
    """
    total = config.total_antennas or config.M * config.N
    rows, results = [], []
    for M in M_values:
        if M < 1 or total % M:
            raise ValueError(f"M={M} does not divide the antenna budget {total}")
        cfg = config.with_(M=M, N=total // M, total_antennas=total)
        res = run_experiment(cfg)
        results.append(res)
        for d in cfg.directions:
            for s in cfg.strategies:
                rows.append({"M": M, "N": total // M, "strategy": s, "direction": d,
                             "mean_jain": res.mean_jain(s, d),
                             "min_rate_p10": res.rate_percentile(s, d)})
    return rows, results
