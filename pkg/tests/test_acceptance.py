"""Exit criteria. Each test prints one PASS/FAIL line and asserts the criterion as stated."""

import time

import numpy as np
import pytest
from scipy import integrate

from cfpower import cli
from cfpower import config as cfgmod
from cfpower.beamforming import mmse_effective_coeffs, rzf_effective_coeffs
from cfpower.channel import ChannelParams, los_probability, omega, sample_channel
from cfpower.geometry import NetworkLayout, generate_layout
from cfpower.powerctl import (
    CountingFitness,
    ParticleSwarm,
    SwarmConfig,
    max_min_brute_force,
)
from cfpower.presets import get_preset
from cfpower.rates import achievable_rates, jain_index, min_rate_fitness
from cfpower.simharness import ExperimentConfig, run_experiment, run_realization, sweep_ap_count

from conftest import random_complex


def desk_config(preset, **experiment):
    sections = cfgmod.merge(get_preset(preset, "desk"), {"experiment": experiment})
    return cfgmod.build(sections)


def close_rel(a, b, rtol):
    return np.max(np.abs(a - b)) <= rtol * max(np.max(np.abs(b)), np.finfo(float).tiny)


# direct-inversion oracle, independent of the factorized path
def oracle_uplink(H, N0):
    inv = np.linalg.inv(H @ H.conj().T + N0 * np.eye(H.shape[0]))
    return H.conj().T @ inv @ H, N0 * np.sum(np.abs(inv @ H) ** 2, axis=0)


def oracle_downlink(H, N0):
    inv = np.linalg.inv(H.conj() @ H.T + N0 * np.eye(H.shape[0]))
    return H.T @ inv @ H.conj()


def test_criterion_1_beamforming_oracle(verdict):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    ok = True
    for _ in range(200):
        MN = int(rng.integers(1, 9))
        K = int(rng.integers(1, 5))
        scale = 10 ** rng.uniform(-3, 0)
        H = random_complex(rng, (MN, K)) * scale
        # keeps cond(HH^H + N0 I) <= ~1e5 so the explicit inverse is itself accurate to 1e-8
        N0 = scale**2 * 10 ** rng.uniform(-4, 1)
        up = mmse_effective_coeffs(H, N0)
        ref_up, ref_noise = oracle_uplink(H, N0)
        down = rzf_effective_coeffs(H, N0)
        ref_down = oracle_downlink(H, N0)
        for a, b in ((up.coeff, ref_up), (up.noise_var, ref_noise), (down.coeff, ref_down)):
            err = np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)
            worst = max(worst, err)
            ok &= close_rel(a, b, 1e-8)
        ok &= down.noise_var == pytest.approx(N0)
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    verdict("criterion 1 (beamforming oracle)", ok, f"worst rel err {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_psa_vs_brute_force(verdict):
    config, _ = desk_config("two-ue-uplink", directions=["uplink", "downlink"], strategies=["maxmin", "psa"],
                            realizations=100, levels=100)
    config = config.with_(swarm=SwarmConfig(particles=20, iterations=500, warm_start=False))
    assert (config.M, config.N, config.K) == (32, 4, 2)
    start = time.perf_counter()
    res = run_experiment(config)
    elapsed = time.perf_counter() - start
    ok = elapsed < 300
    details = []
    for d in config.directions:
        grid = res.min_rates("maxmin", d)
        psa = res.min_rates("psa", d)
        hits = int(np.sum(psa >= 0.99 * grid))
        details.append(f"{d} {hits}/100")
        ok &= hits >= 90
    verdict("criterion 2 (PSA vs brute force, K=2)", ok, ", ".join(details) + f", {elapsed:.0f}s")
    assert ok


def test_criterion_3_strategy_ordering(verdict):
    start = time.perf_counter()
    ok = True
    details = []
    for preset in ("many-ue-uplink", "many-ue-downlink"):
        config, _ = desk_config(preset, seed=0)
        assert (config.M, config.N, config.K, config.realizations) == (32, 4, 8, 200)
        res = run_experiment(config)
        (d,) = config.directions
        ci = res.rate_percentile("inversion", d, 10)
        psa = res.rate_percentile("psa", d, 10)
        ratio = psa / ci
        details.append(f"{d} p10 {psa:.4f}/{ci:.4f} = {ratio:.3f}")
        ok &= ratio >= 1.25
    elapsed = time.perf_counter() - start
    ok &= elapsed < 900
    verdict("criterion 3 (PSA p10 min rate >= 1.25x inversion)", ok,
            "; ".join(details) + f", {elapsed:.0f}s")
    assert ok


def test_criterion_4_fairness_trend(verdict):
    start = time.perf_counter()
    ok = True
    details = []
    for preset in ("sweep-psa-uplink", "sweep-psa-downlink"):
        config, sweep = desk_config(preset)
        assert sweep == [8, 16, 32, 64] and config.total_antennas == 128
        assert (config.K, config.realizations) == (8, 100)
        rows, _ = sweep_ap_count(config, sweep)
        (d,) = config.directions
        jain = {(r["M"], r["strategy"]): r["mean_jain"] for r in rows}
        gains = {}
        for M in sweep:
            psa, ci = jain[M, "psa"], jain[M, "inversion"]
            ok &= psa >= ci
            gains[M] = (psa - ci) / ci
        ok &= gains[sweep[0]] > gains[sweep[-1]]
        details.append(f"{d} " + " ".join(
            f"M={M}:{jain[M, 'psa']:.3f}/{jain[M, 'inversion']:.3f}" for M in sweep))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1200
    verdict("criterion 4 (mean Jain PSA/inversion across AP sweep)", ok,
            "; ".join(details) + f", {elapsed:.0f}s")
    assert ok


def test_criterion_5_channel_statistics(verdict):
    start = time.perf_counter()
    params = ChannelParams()
    rng = np.random.default_rng(5)
    ok = True
    worst_z = 0.0
    n = 10_000
    for d in (10.0, 50.0, 100.0, 250.0, 450.0):
        phi = rng.uniform(0, 2 * np.pi, n)
        ues = np.column_stack([500 + d * np.cos(phi), 500 + d * np.sin(phi)])
        layout = NetworkLayout(np.array([[500.0, 500.0]]), ues)
        ch = sample_channel(layout, params.with_(N=1), rng=rng)
        p = float(los_probability(d, params))
        se = np.sqrt(p * (1 - p) / n)
        z = abs(ch.delta.mean() - p) / se
        worst_z = max(worst_z, z)
        ok &= z <= 3

    mono = True
    for _ in range(1000):
        prm = ChannelParams(alpha=rng.uniform(0, 1), mu=10 ** rng.uniform(-6, -2),
                            gamma=rng.uniform(1, 50))
        ue_h = rng.uniform(0.5, 5)
        ap_h = ue_h + rng.uniform(0.1, 40)
        d = np.sort(rng.uniform(0, 2000, 50))
        mono &= bool(np.all(np.diff(los_probability(d, prm, ap_h, ue_h)) <= 0))
    ok &= mono

    worst_rel = 0.0
    for _ in range(20):
        prm = ChannelParams(gamma=rng.uniform(1, 60))
        ue_h = rng.uniform(0.5, 5)
        ap_h = ue_h + rng.uniform(0.5, 50)
        val, _ = integrate.quad(lambda h: np.exp(-h * h / (2 * prm.gamma**2)), ue_h, ap_h,
                                epsabs=0, epsrel=1e-13, limit=200)
        ref = val / (ap_h - ue_h)
        rel = abs(omega(prm, ap_h, ue_h) - ref) / ref
        worst_rel = max(worst_rel, rel)
        ok &= rel <= 1e-9
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    verdict("criterion 5 (channel statistics)", ok,
            f"worst |z| {worst_z:.2f}, monotone {mono}, omega rel err {worst_rel:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_invariant_suites(verdict, tmp_path):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    checks = {}

    jain_ok = True
    for _ in range(500):
        K = int(rng.integers(1, 20))
        R = rng.exponential(size=K) * (rng.random(K) < 0.8)
        if not R.any():
            R[0] = 1.0
        j = jain_index(R)
        jain_ok &= 1 / K - 1e-12 <= j <= 1 + 1e-12
        jain_ok &= abs(jain_index(R * 10 ** rng.uniform(-5, 5)) - j) <= 1e-12
    checks["jain"] = jain_ok

    mono_ok, feas_ok, calls_ok = True, True, True
    for _ in range(20):
        K = int(rng.integers(1, 6))
        coeffs = mmse_effective_coeffs(random_complex(rng, (8, K)), 10 ** rng.uniform(-3, 0))
        cfg = SwarmConfig(particles=int(rng.integers(1, 10)), iterations=int(rng.integers(1, 40)))
        f = CountingFitness(lambda z: min_rate_fitness(coeffs, z))
        swarm = ParticleSwarm(f, K, cfg, rng=np.random.default_rng(int(rng.integers(1 << 32))))
        z, _ = swarm.run()
        mono_ok &= bool(np.all(np.diff(swarm.state.history) >= 0))
        feas_ok &= bool(np.all((z >= 0) & (z <= cfg.zeta_max)))
        calls_ok &= f.calls == cfg.particles * (cfg.iterations + 1)
        L = int(rng.integers(2, 7))
        g = CountingFitness(lambda z: min_rate_fitness(coeffs, z))
        zb = max_min_brute_force(g, K, L)
        calls_ok &= g.calls == L**K
        feas_ok &= bool(np.all((zb >= 0) & (zb <= 1)))
    checks["gbest monotone"] = mono_ok
    checks["evaluation counts"] = calls_ok

    small = ExperimentConfig(M=8, N=2, K=3, realizations=5, levels=5,
                             strategies=("none", "inversion", "maxmin", "psa"),
                             swarm=SwarmConfig(particles=5, iterations=20))
    for r in run_experiment(small).records:
        feas_ok &= bool(np.all((r.zeta >= 0) & (r.zeta <= 1)))
    checks["feasibility"] = feas_ok

    outs = []
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        code = cli.main(["run", "--preset", "many-ue-uplink", "--tier", "desk", "--seed", "11",
                         "--threads", str(threads), "--out", str(out)])
        outs.append(out)
        checks[f"cli exit t={threads}"] = code == 0
    same = True
    for name in ("records.csv", "cdf.csv", "summary.csv"):
        same &= (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    checks["threads 1 vs 8 byte-identical"] = same

    elapsed = time.perf_counter() - start
    checks["runtime < 5 min"] = elapsed < 300
    ok = all(checks.values())
    verdict("criterion 6 (invariant suites)", ok,
            ", ".join(k for k, v in checks.items() if not v) or f"all {len(checks)} checks, {elapsed:.0f}s")
    assert ok


def test_criterion_7_degenerate_cases(verdict):
    start = time.perf_counter()
    checks = {}
    config = ExperimentConfig(M=8, N=4, K=1, realizations=1, levels=100,
                              strategies=("inversion", "maxmin", "psa"),
                              swarm=SwarmConfig(particles=20, iterations=50))
    same = True
    for i in range(5):
        recs = run_realization(config, i)
        for d in config.directions:
            rates = [r.rates for r in recs if r.direction == d]
            same &= all(np.array_equal(rates[0], x) for x in rates[1:])
    checks["K=1 identical rates"] = same

    rng = np.random.default_rng(7)
    params = ChannelParams(alpha=0.0)
    delta_one = True
    for _ in range(20):
        ch = sample_channel(generate_layout(6, 5, rng=rng), params, rng=rng)
        delta_one &= bool(np.all(ch.delta == 1))
    checks["alpha=0 gives delta 1"] = delta_one

    H = np.zeros((8, 3), complex)
    zero_ok = True
    for c in (mmse_effective_coeffs(H, 1e-3), rzf_effective_coeffs(H, 1e-3)):
        zero_ok &= not np.any(c.coeff)
        rates = achievable_rates(c, np.ones(3))
        zero_ok &= not np.any(rates) and jain_index(rates) == 1.0
    checks["H=0 zero coefficients, jain 1"] = zero_ok

    elapsed = time.perf_counter() - start
    checks["runtime < 5 s"] = elapsed < 5
    ok = all(checks.values())
    verdict("criterion 7 (degenerate cases)", ok,
            ", ".join(k for k, v in checks.items() if not v) or f"all {len(checks)} checks, {elapsed:.1f}s")
    assert ok
