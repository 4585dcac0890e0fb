"""Acceptance criteria 1 to 9.

Each test appends one ``CRITERION k: PASS|FAIL ...`` line to the summary
printed at the end of the pytest run, then asserts. Run this file directly
(``python3 tests/test_acceptance.py``) to see only these lines.
"""
import itertools
import json
import math
import sys
from pathlib import Path

import mpmath
import numpy as np
import pytest
from scipy.stats import linregress

sys.path.insert(0, str(Path(__file__).parent))

import conftest  # noqa: E402
import oracles  # noqa: E402
from bias_gauge import presets  # noqa: E402
from bias_gauge.difficulty import (  # noqa: E402
    InnerTask,
    MetaTaskSpec,
    TaskSpec,
    combine,
    difficulty_general,
    difficulty_meta,
    difficulty_rl,
    rank_models,
)
from bias_gauge.ingest import dataset_stats  # noqa: E402
from bias_gauge.numerics import log_binomial  # noqa: E402
from bias_gauge.sandbox import build_toy, interpolating_sample, mc_inductive_bias  # noqa: E402
from bias_gauge.sandbox import test_error as grid_error  # noqa: E402
from bias_gauge.transport import exact_wasserstein, scaling_experiment  # noqa: E402


def record(k, ok, detail):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def mnist_stats(mnist):
    data, which = mnist
    return dataset_stats(data, delta_mode="exact", dim_k=5, seed=0), which


# -- 1 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_1_wasserstein_scaling():
    res = scaling_experiment([3, 9], [10, 25, 50, 100, 250, 500], ref_size=2000, trials=5, seed=0)
    _, s3, _, r2_3 = res.fit_for(3)
    _, s9, _, r2_9 = res.fit_for(9)
    ok = -0.5 <= s3 <= -0.2 and r2_3 >= 0.9 and abs(s9) < abs(s3)
    record(1, ok, f"slope(m=3)={s3:.4f} R2={r2_3:.4f}; slope(m=9)={s9:.4f} R2={r2_9:.4f}")
    assert ok


# -- 2 ----------------------------------------------------------------------------------

def test_criterion_2_mnist_parameters(mnist_stats):
    stats, which = mnist_stats
    ok = stats.delta_method == "exact" and 11 <= stats.m_hat <= 17 and 1.0 <= stats.delta_hat <= 5.0
    record(2, ok, f"[{which} MNIST, n={stats.n}, unit scaling] m_hat={stats.m_hat:.3f} in [11,17], "
                  f"delta_hat={stats.delta_hat:.4f} in [1,5], r={stats.r:.4f}")
    assert ok


# -- 3 ----------------------------------------------------------------------------------

TARGETS = {"mnist": 16, "svhn": 31, "cifar10": 32, "imagenet": 41}


def test_criterion_3_benchmark_orders(mnist_stats):
    r_mnist = mnist_stats[0].r
    logs = {name: difficulty_general(presets.benchmark(name, r=r_mnist if name == "mnist" else None)).log10_bits
            for name in TARGETS}
    within = all(abs(logs[k] - TARGETS[k]) <= 1 for k in TARGETS)
    ordered = logs["mnist"] < logs["svhn"] < logs["cifar10"] < logs["imagenet"]
    detail = ", ".join(f"{k}={logs[k]:.2f} (target {TARGETS[k]})" for k in TARGETS)
    record(3, within and ordered, f"log10 bits: {detail}; strict order {'holds' if ordered else 'broken'}")
    assert within and ordered


# -- 4 ----------------------------------------------------------------------------------

def test_criterion_4_model_ranking():
    problems = []
    cifar_logs = []
    for name, models in presets.MODEL_ERRORS.items():
        rows = rank_models(presets.benchmark(name), models)
        got = [r["name"] for r in rows]
        want = [m for m, _ in reversed(models)]
        if got != want:
            problems.append(f"{name} order {got}")
        if name == "cifar10":
            cifar_logs = [r["bits"].log10() for r in rows]
    in_band = all(abs(v - 32) <= 1 for v in cifar_logs)
    if not in_band:
        problems.append("cifar10 outside 1e31..1e33")
    ok = not problems
    record(4, ok, f"order reproduced in all 4 tables; CIFAR-10 log10 bits span "
                  f"[{min(cifar_logs):.2f}, {max(cifar_logs):.2f}]" if ok else "; ".join(problems))
    assert ok


# -- 5 ----------------------------------------------------------------------------------

def test_criterion_5_rl_scaling():
    T = np.arange(1, 7)
    logs = np.array([difficulty_rl(**presets.cartpole(int(t))).log10_bits for t in T])
    fit = linregress(T, logs)
    ok = fit.rvalue ** 2 >= 0.99 and fit.slope > 0
    record(5, ok, f"log10 bits vs T: slope={fit.slope:.3f}/observation, R2={fit.rvalue ** 2:.5f}; "
                  f"values {np.round(logs, 2).tolist()}")
    assert ok


# -- 6 ----------------------------------------------------------------------------------

def test_criterion_6_combination(mnist_stats):
    spec = presets.benchmark("mnist", r=mnist_stats[0].r)
    res = combine(spec, spec)
    single = res.i1_aug.total_nats
    lo, hi = res.lower.log10() - math.log10(math.log(2)), res.upper.log10() - math.log10(math.log(2))
    band = abs(lo - 26) <= 1 and abs(hi - 26) <= 1
    ordered = res.lower.ln_mag <= res.upper.ln_mag
    upper_id = abs((res.upper / single).to_float() - 2) <= 2e-9
    # ln 2 is far below the resolution of a double at this size, so the offset
    # is checked through the stored gap and on a task small enough to resolve it
    small = TaskSpec.classification(1, 2, 2, 1.0, 2.0, 1.0, 0.1)
    small_res = combine(small, small)
    s = small_res.i1_aug.total_nats.to_float()
    lower_id = (res.lower_gap_nats == math.log(2)
                and abs((res.lower / single).to_float() - 1) <= 1e-9
                and abs(small_res.lower.to_float() - (s - math.log(2))) <= 1e-9 * s)
    ok = band and ordered and upper_id and lower_id
    record(6, ok, f"MNIST x MNIST bits: lower=10^{lo:.2f}, upper=10^{hi:.2f} (target 10^26 +/- 1); "
                  f"lower<=upper {ordered}; identities upper=2I' {upper_id}, lower=I'-ln2 {lower_id}")
    assert ok


# -- 7 ----------------------------------------------------------------------------------

def _random_spec(rng):
    m = int(rng.integers(1, 25))
    d = int(rng.integers(2, 1001))
    r = float(rng.uniform(1, 50))
    delta = float(rng.uniform(0.05, 1.0)) * 2 * math.pi * r / math.sqrt(m + 1)
    return TaskSpec.classification(m, float(10 ** rng.uniform(1, 7)), d, r, delta, 1.0,
                                   float(10 ** rng.uniform(-4, -0.5)))


def _nats(spec):
    t = difficulty_general(spec).total_nats
    return -math.inf if t.is_zero else t.ln_mag


def _monotone_violations(count=1000, seed=2024):
    rng = np.random.default_rng(seed)
    bad = {"n": 0, "delta": 0, "eps": 0, "m": 0}
    skipped = 0
    for _ in range(count):
        spec = _random_spec(rng)
        base = _nats(spec)
        tol = 1e-12 * abs(base) if math.isfinite(base) else 0
        if _nats(spec.with_(n=spec.n * 1.5)) > base + tol:
            bad["n"] += 1
        coarser = spec.with_(delta=spec.delta * 1.1)
        if 2 * math.pi * coarser.r / coarser.delta < math.sqrt(coarser.m):
            skipped += 1  # K would drop to 0, which is not a valid spec
        elif _nats(coarser) > base + tol:
            bad["delta"] += 1
        if _nats(spec.with_(eps_over_L=spec.eps_over_L * 1.5)) > base + tol:
            bad["eps"] += 1
        if _nats(spec.with_(m=spec.m + 1)) < base - tol:
            bad["m"] += 1
    return bad, skipped


def _vertex_check(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for a, b in itertools.product(range(1, 5), repeat=2):
        P = rng.normal(size=(a, 3))
        Q = rng.normal(size=(b, 3))
        want = oracles.transport_by_vertices(P, Q)
        got_lsa = exact_wasserstein(P, Q)[0]
        got_lp = exact_wasserstein(P, Q, assignment_cap=0)[0]
        worst = max(worst, abs(got_lsa - want), abs(got_lp - want))
    return worst


def _binomial_check(seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in list(range(0, 60)) + rng.integers(60, 10_001, 300).tolist():
        for k in {0, 1, n // 3, n // 2, n, int(rng.integers(0, n + 1))}:
            exact = math.comb(n, k)
            want = mpmath.log(exact)
            got = log_binomial(n, k).ln_mag
            if exact == 1:
                worst = max(worst, abs(got))
            else:
                worst = max(worst, float(abs((got - want) / want)))
    return worst


def _identical_reports(seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        spec = _random_spec(rng)
        twin = TaskSpec.from_json(json.loads(json.dumps(spec.to_json())))
        a = json.dumps(difficulty_general(spec).to_json(), sort_keys=True)
        b = json.dumps(difficulty_general(twin).to_json(), sort_keys=True)
        if a != b:
            return False
    return True


def test_criterion_7_properties():
    bad, skipped = _monotone_violations()
    binom_err = _binomial_check()
    transport_err = _vertex_check()
    identical = _identical_reports()
    parts = {
        "a": sum(bad.values()) == 0,
        "b": binom_err <= 1e-9,
        "c": transport_err <= 1e-9,
        "d": identical,
    }
    ok = all(parts.values())
    record(7, ok, f"(a) monotonicity violations over 1000 specs {bad} "
                  f"({skipped} delta steps skipped as invalid); "
                  f"(b) log_binomial max rel err {binom_err:.2e}; "
                  f"(c) max |exact - vertex enumeration| {transport_err:.2e}; "
                  f"(d) bit-identical reports {identical}")
    assert ok


# -- 8 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_sandbox():
    rng = np.random.default_rng(99)
    bad = []
    certified = 0
    for seed in range(20):
        K = int(rng.integers(1, 7))
        n = int(rng.integers(1, 2 * K + 1))
        B = float(rng.uniform(1.0, 3.0))
        task = build_toy(K, n, B, 1.0, seed=seed)
        pilot = grid_error(task, interpolating_sample(task, 2000, seed=seed + 1000))
        task = task.with_eps(float(np.quantile(pilot, 0.3)) or 1e-3)
        rep = mc_inductive_bias(task, 20_000, seed=seed)
        certified += rep["implication_certified"]
        if (rep["implication_violations"] or rep["probe_violations"]
                or rep["fraction_in_ball"] > rep["fraction_generalizing"]
                or rep["i_mc"] > rep["i_bound"]):
            bad.append((seed, K, n, rep["implication_violations"], rep["probe_violations"]))
    ok = not bad
    record(8, ok, f"20 toy tasks: implication/probe violations {bad or 'none'}; "
                  f"in-ball set inside generalizing set on every sample; "
                  f"analytic certificate applies to {certified}/20")
    assert ok


# -- 9 ----------------------------------------------------------------------------------

def test_criterion_9_omniglot():
    logs = {(m0, m1): difficulty_meta(presets.omniglot(m0, m1)).log10_bits
            for m0 in range(8, 15) for m1 in range(m0 + 2, m0 + 11)}
    in_band = all(120 <= v <= 170 for v in logs.values())
    spec = MetaTaskSpec(2, 2, (3,), InnerTask(2, 1, 1, 1.0, math.pi, 1.0), 2, 0.01)
    want, _, _ = oracles.meta_difficulty_nats(2, 2, [3], 2, 1, 1, 2, 1.0, mpmath.pi, 1.0, 0.01)
    got = difficulty_meta(spec).total_nats.to_float()
    rel = float(abs((got - want) / want))
    ok = in_band and rel <= 1e-9
    record(9, ok, f"Omniglot log10 bits over {len(logs)} (m0, m1) pairs span "
                  f"[{min(logs.values()):.1f}, {max(logs.values()):.1f}] (band [120,170]); "
                  f"tiny meta vs oracle rel err {rel:.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider", "-rN"]))
