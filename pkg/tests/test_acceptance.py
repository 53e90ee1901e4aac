"""Acceptance sweep: the headline guarantees at full scale.

Each test checks one criterion end to end and records a pass/fail line on
the scoreboard printed after the run.  Random sweeps use seeds 0..9999;
the adversary policy is deterministic, so it runs once per configuration.
"""

import hashlib
import math
import time

from splitternet.analysis import check_lemma1, compute_metrics, region_for_stage
from splitternet.engine import simulate, trace_to_jsonl
from splitternet.explore import explore_exhaustive
from splitternet.threads import execute_threads
from splitternet.topology import (
    build_adaptive,
    build_full,
    build_grid,
    build_stage,
    build_tree,
    ceil_sqrt,
)

SEEDS = 10_000

GOLDEN_TRACE_SHA256 = "c7791a46d6ca109e2d5474c479286f1ddc30f93093dab7342943967c045bf9ff"


def ceil_lg(x: int) -> int:
    return (x - 1).bit_length()


def test_exhaustive_splitter_contract(acceptance):
    """Every schedule of 2 and 3 processes on one splitter upholds the contract."""
    start = time.perf_counter()
    two = explore_exhaustive(build_grid(1), 2)
    three = explore_exhaustive(build_grid(1), 3)
    elapsed = time.perf_counter() - start
    ok = (
        two.interleavings == 54
        and two.interleavings <= 70
        and not two.violations
        and three.interleavings == 11862
        and 10_000 <= three.interleavings < 100_000
        and not three.violations
        and elapsed < 1.0
    )
    acceptance(
        "splitter-exhaustive",
        ok,
        f"p=2: {two.interleavings} schedules, p=3: {three.interleavings}, "
        f"0 violations, {elapsed:.2f}s",
    )
    assert ok


def test_exhaustive_tree_blocker(acceptance):
    """All schedules of 3 processes on the 3-node tree leave at least one stop."""
    start = time.perf_counter()
    report = explore_exhaustive(build_tree(3), 3)
    elapsed = time.perf_counter() - start
    stops_everywhere = all(
        any(kind == "stop" for kind, _ in vec) for vec in report.outcome_vectors
    )
    ok = (
        report.interleavings == 239_330_046
        and not report.violations
        and stops_everywhere
        and elapsed < 60.0
    )
    acceptance(
        "tree-blocker-exhaustive",
        ok,
        f"{report.interleavings} schedules in {report.configurations} configurations, "
        f"every one stops someone, {elapsed:.2f}s",
    )
    assert ok


def test_grid_absorbs_up_to_side_count(acceptance):
    """m processes in a side-m grid all stop, for m = 2..8, every seed."""
    failures = 0
    runs = 0
    for m in range(2, 9):
        t = build_grid(m)
        for seed in range(SEEDS):
            res, _ = simulate(t, m, "random", seed, record=False)
            runs += 1
            if res.overflowed or len(res.names) != m:
                failures += 1
        res, _ = simulate(t, m, "adversary", 0, record=False)
        runs += 1
        if res.overflowed or len(res.names) != m:
            failures += 1
    ok = failures == 0
    acceptance(
        "grid-absorbs-m",
        ok,
        f"m=2..8, p=m, {SEEDS} seeds + adversary: {failures} of {runs} runs overflowed",
    )
    assert ok


def test_overloaded_grid_exit_counting(acceptance):
    """Side-6 grid with 7, 12, 20 processes: wires+stops and splitters+stops bounds."""
    t = build_grid(6)
    region = region_for_stage(t, 0)
    violations = 0
    runs = 0
    for procs in (7, 12, 20):
        for seed in range(SEEDS):
            _, trace = simulate(t, procs, "random", seed)
            violations += len(check_lemma1(trace, region))
            runs += 1
    ok = violations == 0
    acceptance(
        "grid-exit-inequalities",
        ok,
        f"m=6, p in {{7,12,20}}, {SEEDS} seeds: {violations} violations in {runs} runs",
    )
    assert ok


def test_stage_minimum_stop_count(acceptance):
    """A stage sized for n, fed n processes, stops at least ceil_sqrt(n) of them."""
    failures = 0
    runs = 0
    for n in (4, 9, 16, 25):
        t = build_stage(n)
        r = ceil_sqrt(n)
        for seed in range(SEEDS):
            res, _ = simulate(t, n, "random", seed, record=False)
            runs += 1
            if res.stops_per_stage.get(0, 0) < r:
                failures += 1
        res, _ = simulate(t, n, "adversary", 0, record=False)
        runs += 1
        if res.stops_per_stage.get(0, 0) < r:
            failures += 1
    ok = failures == 0
    acceptance(
        "stage-min-stops",
        ok,
        f"n in {{4,9,16,25}}, k=n, {SEEDS} seeds + adversary: {failures} of {runs} runs "
        f"under ceil_sqrt(n) stops",
    )
    assert ok


def test_full_network_renaming(acceptance):
    """n processes, full network: distinct names under the closed-form bound."""
    assert 3 * (4 * 9 + 3) == 117  # name bound for n=9
    assert 4 * (4 * 16 + 4) == 272  # name bound for n=16
    failures = 0
    runs = 0
    for n in (4, 9, 16, 25, 64, 100):
        t = build_full(n)
        r = ceil_sqrt(n)
        name_bound = r * (4 * r * r + r)
        ops_bound = 4 * r * (2 * r + ceil_lg(n))

        def run_ok(res):
            return (
                not res.overflowed
                and len(res.names) == n
                and len(set(res.names.values())) == n
                and max(res.names.values()) < name_bound
                and max(res.register_ops) <= ops_bound
            )

        for seed in range(SEEDS):
            res, _ = simulate(t, n, "random", seed, record=False)
            runs += 1
            if not run_ok(res):
                failures += 1
        res, _ = simulate(t, n, "adversary", 0, record=False)
        runs += 1
        if not run_ok(res):
            failures += 1
    ok = failures == 0
    acceptance(
        "renaming-full-network",
        ok,
        f"n in {{4,9,16,25,64,100}}, {SEEDS} seeds + adversary: {failures} of {runs} runs "
        f"broke distinctness, overflow, name, or ops bounds",
    )
    assert ok


def test_thread_stress(acceptance):
    """64 real threads through the full network, 100 runs, all names unique."""
    t = build_full(64)
    results = execute_threads(t, 64, runs=100)
    passed = sum(
        1
        for res in results
        if len(res.names) == 64
        and len(set(res.names.values())) == 64
        and not res.overflowed
    )
    ok = passed == 100
    acceptance("thread-stress", ok, f"{passed}/100 unique-name runs on 64 threads")
    assert ok


def test_adaptive_names_track_participants(acceptance):
    """k participants never get past the first chained network sized >= k."""
    t = build_adaptive(64)
    sizes = [1, 2, 4, 8, 16, 32, 64]
    cumulative = {}
    total = 0
    for n in sizes:
        total += build_full(n).node_count
        cumulative[n] = total
    bounds = {k: cumulative[2 ** ceil_lg(k)] for k in (3, 5, 12)}
    assert bounds == {3: 77, 5: 194, 12: 466}

    failures = 0
    runs = 0
    for k, bound in bounds.items():
        def run_ok(res):
            return (
                not res.overflowed
                and len(res.names) == k
                and len(set(res.names.values())) == k
                and max(res.names.values()) < bound
            )

        for seed in range(1000):
            res, _ = simulate(t, k, "random", seed, record=False)
            runs += 1
            if not run_ok(res):
                failures += 1
        for policy in ("round_robin", "adversary"):
            res, _ = simulate(t, k, policy, 0, record=False)
            runs += 1
            if not run_ok(res):
                failures += 1
    ok = failures == 0
    acceptance(
        "adaptive-names",
        ok,
        f"k in {{3,5,12}} on the 64-chain: {failures} of {runs} runs exceeded the "
        f"cumulative bounds {sorted(bounds.values())}",
    )
    assert ok


def test_deterministic_traces(acceptance):
    """Repeated (topology, p, policy, seed) runs give byte-identical traces."""
    t = build_full(9)
    identical = True
    for policy in ("round_robin", "random", "adversary"):
        _, tr1 = simulate(t, 9, policy, seed=42)
        _, tr2 = simulate(t, 9, policy, seed=42)
        identical = identical and trace_to_jsonl(tr1) == trace_to_jsonl(tr2)
    _, golden = simulate(t, 9, "random", seed=42)
    digest = hashlib.sha256(trace_to_jsonl(golden).encode()).hexdigest()
    ok = identical and digest == GOLDEN_TRACE_SHA256
    acceptance(
        "determinism",
        ok,
        f"byte-identical repeats, golden sha256 {digest[:12]}.. "
        f"{'matches' if ok else 'DIFFERS'} (single platform here; format has no "
        f"float or ordering hazards)",
    )
    assert ok


def test_node_count_ratio_shrinks_toward_four(acceptance):
    """node_count / n^1.5 decreases toward 4 as square n grows."""
    ratios = []
    for n in (4, 16, 64, 256, 1024):
        r = ceil_sqrt(n)
        count = build_full(n).node_count
        ratio = count / math.sqrt(n) ** 3
        assert ratio == 4 + 1 / r
        ratios.append(ratio)
    decreasing = all(a > b for a, b in zip(ratios, ratios[1:]))
    ok = decreasing and ratios[-1] - 4 < 0.04
    acceptance(
        "size-ratio-monotone",
        ok,
        "node_count/n^1.5 = " + ", ".join(f"{x:.5f}" for x in ratios) + " -> 4",
    )
    assert ok
