"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report lines.
"""

import random
import subprocess
import sys
import time
import pytest

from mcsoc import bench
from mcsoc.cache import CacheGeometry, CacheState
from mcsoc.config import ResourceBudget, make_system, paper_space
from mcsoc.mailbox import EMPTY, OK, Mailbox, run_dual_driver
from mcsoc.resources import PAPER_ANCHORS, DesignPoint, calibrate_costs, estimate
from mcsoc.workload import default_profile, synthesize, validate
from oracles import ShadowMapCache

SEED = bench.CALIBRATION_SEED


def check(label, condition, detail=""):
    status = "PASS" if condition else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {label}: {status}{suffix}")
    assert condition, f"{label}{suffix}"


# -- 1. VAX MIPS arithmetic ---------------------------------------------------

def test_criterion_1_vax_mips_arithmetic():
    ok = (
        bench.format_vax_mips(87_118) == "49.58"
        and bench.format_vax_mips(71_428) == "40.65"
        and bench.format_vax_mips(1_757) == "1.00"
    )
    check("1 vax-mips arithmetic", ok,
          f"87118->{bench.format_vax_mips(87_118)}, 71428->{bench.format_vax_mips(71_428)}")


# -- 2. Resource anchors ------------------------------------------------------

def test_criterion_2_resource_anchors():
    t0 = time.time()
    coeffs, _ = calibrate_costs(PAPER_ANCHORS)
    budget = ResourceBudget()
    anchor_ok = all(
        abs(estimate(p, coeffs, budget).m9k_used - u.m9k) <= 2
        for p, u in PAPER_ANCHORS
    )
    feasible_ok = all(
        estimate(DesignPoint(n, ic, dc), coeffs, budget).fits
        for n, ic, dc in paper_space()
    )
    infeasible_ok = (
        not estimate(DesignPoint(2, 32, 0), coeffs, budget).fits
        and not estimate(DesignPoint(1, 8, 64), coeffs, budget).fits
    )
    elapsed = time.time() - t0
    preds = [estimate(p, coeffs, budget).m9k_used for p, _ in PAPER_ANCHORS]
    check("2 resource anchors", anchor_ok and feasible_ok and infeasible_ok and elapsed < 1.0,
          f"M9K predictions {preds} vs (51, 53, 55); {elapsed:.2f}s")


# -- 3. Calibrated ratio reproduction ------------------------------------------

@pytest.fixture(scope="module")
def calibrated_sweep():
    profile = default_profile()
    t0 = time.time()
    calibration = bench.calibrate_timing(seed=SEED, profile=profile)
    table = bench.sweep(
        paper_space(), profile, SEED,
        timing=calibration.timing, iterations=10_000,
    )
    elapsed = time.time() - t0
    rows = {(r.n_cpus, r.ic_kb, r.dc_kb): r.dhrystones_per_sec for r in table.rows}
    return calibration, table, rows, elapsed, profile


def test_criterion_3a_dual_speedup(calibrated_sweep):
    _, _, rows, _, _ = calibrated_sweep
    ratios = []
    for ic in (2, 4, 8, 16):
        ratios.append(float(rows[(2, ic, 0)] / rows[(1, ic, 0)]))
    for dc in (4, 8):
        ratios.append(float(rows[(2, 8, dc)] / rows[(1, 8, dc)]))
    ok = all(1.9 <= r <= 2.1 for r in ratios)
    check("3a dual/single speedup in [1.9, 2.1]", ok,
          f"ratios {[round(r, 3) for r in ratios]}")


def test_criterion_3b_ic_gain(calibrated_sweep):
    _, _, rows, _, _ = calibrated_sweep
    gain = float(rows[(1, 16, 0)] / rows[(1, 2, 0)]) - 1
    check("3b single-CPU 2->16 KB IC gain <= 15%", gain <= 0.15, f"{gain:.2%}")


def test_criterion_3c_dc_impact(calibrated_sweep):
    _, _, rows, _, _ = calibrated_sweep
    best_nodc = max(rows[(n, ic, 0)] for n in (1, 2) for ic in (2, 4, 8, 16))
    best_single_nodc = max(rows[(1, ic, 0)] for ic in (2, 4, 8, 16))
    r1 = float(rows[(1, 8, 4)] / best_nodc)
    r2 = float(rows[(1, 8, 4)] / best_single_nodc)
    check("3c 4KB-DC impact >= 1.8x best no-DC and >= 3.0x best single no-DC",
          r1 >= 1.8 and r2 >= 3.0, f"{r1:.3f}x, {r2:.3f}x")


def test_criterion_3d_dc_gain(calibrated_sweep):
    _, _, rows, _, _ = calibrated_sweep
    gain = float(rows[(1, 8, 32)] / rows[(1, 8, 4)]) - 1
    check("3d single-CPU 4->32 KB DC gain <= 10%", gain <= 0.10, f"{gain:.2%}")


def test_criterion_3e_recommended_config(calibrated_sweep):
    calibration, _, _, elapsed, profile = calibrated_sweep
    rec = bench.recommend(
        paper_space(), profile, SEED, timing=calibration.timing, iterations=10_000
    )
    ok = rec.point == DesignPoint(2, 8, 8)
    check("3e recommend returns (2 CPU, 8 KB IC, 8 KB DC)", ok and elapsed < 60.0,
          f"{rec.point}, calibrate+sweep {elapsed:.1f}s")


# -- 4. Cache oracle equivalence ----------------------------------------------

def test_criterion_4_cache_oracle_equivalence():
    t0 = time.time()
    rng = random.Random(0xCAC4E)
    geometries = [0, 2048, 4096, 8192, 16384, 32768]
    lengths = [1000] * 800 + [5000] * 150 + [10_000] * 50
    rng.shuffle(lengths)
    mismatches = 0
    for i, n_refs in enumerate(lengths):
        capacity = geometries[i % len(geometries)]
        span = rng.choice([4096, 16384, 65536])
        cache = CacheState(CacheGeometry(capacity, 32))
        shadow = ShadowMapCache(capacity, 32)
        for _ in range(n_refs):
            addr = rng.randrange(0, span, 4)
            write = rng.random() < 0.3
            got = cache.access(addr, write)
            want = shadow.access(addr, write)
            if (got.hit, got.writeback_required) != want:
                mismatches += 1
                break
    elapsed = time.time() - t0
    check("4 cache oracle equivalence (1000 traces)",
          mismatches == 0 and elapsed < 30.0,
          f"{len(lengths)} traces, {sum(lengths)} refs, {elapsed:.1f}s")


# -- 5. Workload fidelity -----------------------------------------------------

def test_criterion_5_workload_fidelity():
    profile = default_profile()
    worst = 0.0
    for seed in range(10):
        trace = synthesize(profile, 1000, seed=seed)
        devs = validate(trace, profile)
        worst = max(worst, max(devs.values()))
    check("5 workload mixes within +/-2.0 pp over 10 seeds", worst <= 2.0,
          f"worst deviation {worst:.3f} pp")


# -- 6. Mailbox suite ----------------------------------------------------------

def _exhaustive_ok(capacity, depth=6):
    frontier = [((), 0, 0, [])]      # queue, accepted, gotten, fifo
    for step in range(depth):
        nxt = []
        for queue, acc, got, fifo in frontier:
            for op in ("post", "get"):
                box = Mailbox("m", capacity)
                box.queue.extend(queue)
                if op == "post":
                    ok = box.post(step + 1, 1)
                    fifo2 = fifo + [step + 1] if ok else list(fifo)
                    acc2, got2 = acc + (1 if ok else 0), got
                else:
                    value, code = box.get(0)
                    if code == OK:
                        if not fifo or value != fifo[0]:
                            return False
                        fifo2, got2 = fifo[1:], got + 1
                    else:
                        if value is not None or code != EMPTY:
                            return False
                        fifo2, got2 = list(fifo), got
                    acc2 = acc
                q2 = tuple(box.queue)
                if len(q2) > capacity or box.mutex_owner is not None:
                    return False
                if acc2 != got2 + len(q2):
                    return False
                nxt.append((q2, acc2, got2, fifo2))
        frontier = nxt
    return True


def test_criterion_6_mailbox_suite():
    model_ok = all(_exhaustive_ok(c) for c in (1, 2, 3))

    system = make_system(2, 8, 8)
    profile = default_profile()
    t1 = run_dual_driver(system, profile, 30, seed=SEED)
    t2 = run_dual_driver(system, profile, 30, seed=SEED)
    deterministic = t1.text() == t2.text()
    conserved = t1.stats.posts_accepted == t1.stats.gets_successful + t1.final_queue_len

    active = None
    mutex_ok = True
    for ev in sorted(t1.events, key=lambda e: (e.ucycle, e.kind == "acquire")):
        if ev.kind == "acquire":
            mutex_ok &= active is None
            active = ev.core_id
        else:
            mutex_ok &= active == ev.core_id
            active = None

    rng = random.Random(77)
    box = Mailbox("m", capacity=3)
    random_ok = True
    for _ in range(5000):
        if rng.random() < 0.55:
            box.post(rng.randrange(100), 1)
        else:
            box.get(0)
        random_ok &= len(box) <= 3
    random_ok &= box.stats.posts_accepted == box.stats.gets_successful + len(box)

    check("6 mailbox FIFO/conservation/non-blocking/mutex/model-check",
          model_ok and deterministic and conserved and mutex_ok and random_ok)


# -- 7. CLI determinism ---------------------------------------------------------

def test_criterion_7_cli_determinism():
    def run(args):
        return subprocess.run(
            [sys.executable, "-m", "mcsoc.cli", *args],
            capture_output=True, text=True,
        )

    commands = [
        ["sweep", "--seed", "5", "--iterations", "80", "--format", "csv"],
        ["dual-driver", "--seed", "5", "--iterations", "12"],
        ["gen-workload", "--seed", "5"],
        ["simulate", "--seed", "5", "--iterations", "40", "--format", "markdown"],
    ]
    ok = True
    for args in commands:
        a, b = run(args), run(args)
        ok &= a.returncode == b.returncode == 0 and a.stdout == b.stdout
    check("7 CLI output byte-identical across runs", ok)
