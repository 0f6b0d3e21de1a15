"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances are pinned here and nowhere else.
"""

import json
import math

import numpy as np

from entropy_roofline.cli import main as cli_main
from entropy_roofline.distribution_shaping import (
    ShapingPipelineSpec,
    run_pipeline,
    uniforms_needed,
)
from entropy_roofline.entropy_sources import (
    EntropyStream,
    NonidealitySpec,
    SourceSpec,
    create_source,
    mismatch_array,
    pelgrom_sigma,
)
from entropy_roofline.errors import VarianceRangeError
from entropy_roofline.fidelity import autocorrelation, ks_test, normal_cdf
from entropy_roofline.perf_model import (
    ArchParams,
    RegimeLabel,
    bandwidth_compression,
    crossover_alpha,
    effective_beta,
    system_throughput,
)
from entropy_roofline.probabilistic_memory import (
    BackendConfig,
    DistributionSpec,
    PMemArray,
)
from entropy_roofline.simulator import (
    SimConfig,
    backend_effective_rates,
    run,
)
from entropy_roofline.workload import bnn_layer, conv_layer, mc_estimator


def _report(num: int, description: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {description}")
    assert ok, f"criterion {num} failed: {description}"


def test_criterion_1_endpoint_exactness():
    checks = []
    for bd, br in [(100.0, 1.0), (2.5e10, 1e9), (3.7, 9.1)]:
        arch = ArchParams(pi=1e13, beta_data=bd, beta_rand=br)
        checks.append(abs(effective_beta(0.0, arch) - bd) <= 1e-12 * bd)
        checks.append(abs(effective_beta(1.0, arch) - br) <= 1e-12 * br)
    _report(1, "effective_beta endpoints exact to 1e-12 relative", all(checks))


def test_criterion_2_entropy_wall_compression():
    arch_big_gap = ArchParams(pi=1e13, beta_data=1e4, beta_rand=1.0)
    expected_big = 0.01 * 1e4 + 0.99  # direct harmonic arithmetic: 100.99
    got_big = bandwidth_compression(0.01, arch_big_gap)
    arch_small_gap = ArchParams(pi=1e13, beta_data=100.0, beta_rand=1.0)
    expected_small = 0.01 * 100.0 + 0.99  # 1.99: one percent already halves
    got_small = bandwidth_compression(0.01, arch_small_gap)
    ok = (
        abs(got_big - expected_big) / expected_big <= 1e-9
        and abs(got_small - expected_small) / expected_small <= 1e-9
    )
    _report(2, "alpha=1% compression: 100.99 at gap 1e4, 1.99 at gap 100", ok)


def test_criterion_3_monotonicity_property():
    rng = np.random.default_rng(2024)
    ok = True
    for _ in range(1000):
        br = 10.0 ** rng.uniform(0, 6)
        bd = br * 10.0 ** rng.uniform(0.05, 6)
        arch = ArchParams(pi=1e13, beta_data=bd, beta_rand=br)
        alphas = np.sort(rng.uniform(0.0, 1.0, size=4))
        betas = [effective_beta(float(a), arch) for a in alphas]
        ok &= all(b2 < b1 for b1, b2 in zip(betas, betas[1:]))
        ok &= all(br - 1e-9 * br <= b <= bd + 1e-9 * bd for b in betas)
    _report(3, "effective_beta strictly decreasing and within [beta_rand, beta_data] over 1000 draws", bool(ok))


def test_criterion_4_crossover_oracle():
    def bisect(ai, arch, iters=100):
        f = lambda a: ai * effective_beta(a, arch) - arch.pi
        lo, hi = 0.0, 1.0
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return 0.0
        if fhi == 0.0:
            return 1.0
        if flo * fhi > 0.0:
            return None
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                return mid
            if (fm > 0.0) == (flo > 0.0):
                lo, flo = mid, fm
            else:
                hi = mid
        return 0.5 * (lo + hi)

    rng = np.random.default_rng(4)
    ok = True
    checked = 0
    while checked < 200:
        br = 10.0 ** rng.uniform(0, 4)
        bd = br * 10.0 ** rng.uniform(0.5, 5)
        arch = ArchParams(pi=10.0 ** rng.uniform(2, 10), beta_data=bd, beta_rand=br)
        ai = 10.0 ** rng.uniform(-2, 4)
        star = crossover_alpha(ai, arch)
        if star is None:
            continue
        checked += 1
        oracle = bisect(ai, arch)
        ok &= oracle is not None and abs(star - oracle) <= 1e-9
        ok &= abs(system_throughput(ai, star, arch) - arch.pi) / arch.pi <= 1e-9
    _report(4, "analytic crossover agrees with bisection within 1e-9 on 200 configs", bool(ok))


def test_criterion_5_simulator_model_agreement():
    arch = ArchParams.default()
    backends = [
        BackendConfig.von_neumann(),
        BackendConfig.coupled_pcim(),
        BackendConfig.decoupled_near_memory(),
        BackendConfig.decoupled_in_memory(parallelism=32),
    ]
    workloads = [
        bnn_layer(128, 128, 1),
        conv_layer(64, 64, 3, 32, 32, 1),
        conv_layer(64, 64, 3, 32, 32, 1, stochastic_weights=True),
        mc_estimator(1_000_000, 4),
    ]
    ok = True
    for backend in backends:
        for wl in workloads:
            cfg = SimConfig(arch=arch, backend=backend)
            res = run(wl, cfg)
            bd, br = backend_effective_rates(cfg)
            arch_eff = ArchParams(pi=arch.pi, beta_data=bd, beta_rand=br)
            phi = system_throughput(wl.ai(), wl.alpha(), arch_eff)
            ok &= abs(res.achieved_phi - phi) / phi <= 0.01
    _report(5, "serialized simulator matches the analytic model within 1% on 4 backends x 4 workloads", bool(ok))


def test_criterion_6_regime_reproduction():
    arch = ArchParams.default()
    cfg = SimConfig(arch=arch, backend=BackendConfig.von_neumann())
    bnn = run(bnn_layer(128, 128, 1), cfg)
    conv_det = run(conv_layer(64, 64, 3, 32, 32, 1), cfg)
    conv_stoch = run(conv_layer(64, 64, 3, 32, 32, 1, stochastic_weights=True), cfg)
    ok = (
        bnn.regime_observed is RegimeLabel.ENTROPY_BOUND
        and conv_det.regime_observed is RegimeLabel.COMPUTE_BOUND
        and conv_stoch.regime_observed is not RegimeLabel.COMPUTE_BOUND
    )
    _report(6, "BNN entropy-bound, conv compute-bound, stochastic conv leaves compute-bound", ok)


def test_criterion_7_box_muller_fidelity():
    n = 100_000
    spec = ShapingPipelineSpec(method="box_muller")
    passes = 0
    moments_ok = True
    for seed in range(100):
        src = create_source(SourceSpec.pseudo_uniform(seed=seed))
        z = run_pipeline(spec, src.draw(uniforms_needed(spec, n)))[:n]
        _, ok = ks_test(z, normal_cdf, 0.01)
        passes += ok
        moments_ok &= abs(z.mean()) <= 0.0126
        moments_ok &= abs(z.var(ddof=1) - 1.0) <= 0.018
    _report(
        7,
        f"Box-Muller KS pass rate {passes}/100 (need >= 95) with per-run moment bounds",
        passes >= 95 and moments_ok,
    )


def test_criterion_8_nonideality_round_trip():
    bias_spec = SourceSpec.thermal_gaussian(
        sigma=1.0, seed=808, nonideality=NonidealitySpec(bias=0.1)
    )
    x = create_source(bias_spec).draw(1_000_000)
    bias_ok = abs(x.mean() - 0.1) <= 0.004

    ar_spec = SourceSpec.thermal_gaussian(
        sigma=1.0, seed=809, nonideality=NonidealitySpec(rho=0.5)
    )
    y = create_source(ar_spec).draw(100_000)
    rho = autocorrelation(y, 2)
    ar_ok = abs(rho[0] - 0.5) <= 0.05 and abs(rho[1] - 0.25) <= 0.05
    _report(8, "bias 0.1 and AR(1) rho 0.5 recovered by the estimators", bias_ok and ar_ok)


def test_criterion_9_pelgrom_scaling():
    exact = pelgrom_sigma(10e-3, 4.0) / pelgrom_sigma(10e-3, 1.0)
    exact_ok = abs(exact - 0.5) <= 1e-12
    a1 = mismatch_array(SourceSpec.mismatch_static(10e-3, 1.0, seed=901), 1000, 1000)
    a4 = mismatch_array(SourceSpec.mismatch_static(10e-3, 4.0, seed=902), 1000, 1000)
    ratio = a4.offsets.std() / a1.offsets.std()
    empirical_ok = abs(ratio - 0.5) <= 0.02 * 0.5
    _report(9, f"mismatch sigma ratio {ratio:.4f} vs 0.5 (2% band), law ratio exact", exact_ok and empirical_ok)


def test_criterion_10_unified_primitive_contract():
    backends = {
        "von_neumann": BackendConfig.von_neumann(),
        "coupled_pcim": BackendConfig.coupled_pcim(),
        "decoupled_near_memory": BackendConfig.decoupled_near_memory(),
        "decoupled_in_memory": BackendConfig.decoupled_in_memory(parallelism=4),
    }
    ok = True
    for backend in backends.values():
        arr = PMemArray(2, 2, backend)
        arr.write((0, 0), DistributionSpec.point_mass(2.5))
        stream = EntropyStream(0)
        ok &= arr.sample((0, 0), stream) == 2.5
        ok &= arr.cost_report().entropy_bits_consumed == 0
        ok &= stream.position == 0

    coupled = BackendConfig.coupled_pcim(
        sigma0=0.1, gamma=0.0, sigma_min_frac=0.5, sigma_max_frac=2.0
    )
    arr = PMemArray(2, 2, coupled)
    arr.write((0, 0), DistributionSpec.gaussian(1.0, 0.1))
    try:
        arr.set_variance((0, 0), 0.3)
        ok = False
    except VarianceRangeError as exc:
        ok &= math.isclose(exc.lo, 0.05) and math.isclose(exc.hi, 0.2)
    arr.set_variance((0, 0), 0.05)  # in-window request accepted

    wear = BackendConfig.coupled_pcim(write_based_sampling=True)
    arr = PMemArray(2, 2, wear)
    arr.write((1, 1), DistributionSpec.gaussian(0.0, 0.1))
    base = arr.write_count((1, 1))
    stream = EntropyStream(1)
    n = 500
    for _ in range(n):
        arr.sample((1, 1), stream)
    ok &= arr.write_count((1, 1)) == base + n
    _report(10, "zero-variance sampling free of entropy; coupled variance window and endurance", bool(ok))


def test_criterion_11_cli_determinism(tmp_path):
    sim_a, sim_b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli_main(["simulate", "--workload", "bnn", "--out", str(sim_a)]) == 0
    assert cli_main(["simulate", "--workload", "bnn", "--out", str(sim_b)]) == 0
    sim_ok = sim_a.read_bytes() == sim_b.read_bytes()

    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "alpha": [0.0, 0.01, 0.1, 0.5, 1.0],
        "backend": ["von_neumann", "coupled_pcim", "decoupled_in_memory"],
        "mode": ["serialized", "overlapped"],
    }))
    outs = []
    for jobs in ("1", "8", "8"):
        out = tmp_path / f"s{len(outs)}.csv"
        assert cli_main(["sweep", "--grid", str(grid), "--jobs", jobs,
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    sweep_ok = outs[0] == outs[1] == outs[2]
    _report(11, "cmd_simulate and cmd_sweep byte-identical across runs and --jobs", sim_ok and sweep_ok)
