"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Simulation criteria run at full scale (10^6 fading blocks) with seed 1.
"""
import itertools
import math
import time

import numpy as np
import pytest

from acceptance_report import record
from nomaec.channel import ChannelBlock
from nomaec.cli import main
from nomaec.ec_engine import effective_capacity
from nomaec.pairing import PairingPlan, enumerate_pairings, heuristic_objective, nomar_heuristic_pairing
from nomaec.ratelaw import PowerAllocation
from nomaec.recommend import NOMA_OPT, NOMAR_OPT, OMA, ScenarioQuery, recommend
from nomaec.scenarios import choice_probability, preset, run_scenario

SEED = 1
BLOCKS = 10 ** 6
GRID = tuple(float(x) for x in range(0, 41, 2))


def combined(*ses):
    return math.sqrt(sum(s * s for s in ses))


@pytest.fixture(scope="module")
def fig2():
    t = time.perf_counter()
    res = run_scenario(preset("fig2", seed=SEED, n_blocks=BLOCKS))
    return res, time.perf_counter() - t


def test_c01_estimator_exactness():
    worst = 0.0
    for beta in -np.logspace(-3, 2, 41):
        for r in (0.0, 0.37, 2.75, 11.0):
            worst = max(worst, abs(effective_capacity(np.full(5000, r), beta).value - r))
    two = effective_capacity([0.0, 1.0], -5.0).value
    ok = worst <= 1e-12 and abs(two - 0.1372865) <= 1e-6
    record(1, "EC estimator exactness", ok,
           f"max constant-rate error {worst:.2e}; two-point EC {two:.10f}")
    assert ok


def test_c02_jensen_and_monotonicity():
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    betas = -np.logspace(-3, 2, 12)  # decreasing
    jensen = mono = 0
    for _ in range(1000):
        n = int(rng.integers(2, 400))
        kind = rng.integers(3)
        if kind == 0:
            r = rng.exponential(rng.uniform(0.1, 5), n)
        elif kind == 1:
            r = np.log2(1 + rng.exponential(size=n) * 10 ** rng.uniform(0, 4))
        else:
            r = rng.uniform(0, rng.uniform(0.1, 30), n)
        ecs = [effective_capacity(r, b).value for b in betas]
        jensen += sum(e > r.mean() + 1e-12 * (1 + r.mean()) for e in ecs)
        mono += sum(b > a + 1e-12 for a, b in zip(ecs, ecs[1:]))
    dt = time.perf_counter() - t
    ok = jensen == 0 and mono == 0
    record(2, "Jensen and beta-monotonicity", ok,
           f"{jensen} Jensen and {mono} monotonicity violations over 1000 sets ({dt:.1f} s)")
    assert ok


def test_c03_fig2_crossover(fig2):
    res, dt = fig2

    def delta(snr, u):
        n = res.get(snr_db=snr, scheme="NOMA", user_rank=u)
        o = res.get(snr_db=snr, scheme="OMA", user_rank=u)
        return n.delta_ec_vs_oma, combined(n.ec_std_error, o.ec_std_error)

    d0, se0 = delta(0.0, 1)
    d40, se40 = delta(40.0, 1)
    weak = [delta(s, 0)[0] for s in GRID]
    ok = d0 > 2 * se0 and d40 < -2 * se40 and min(weak) > 0
    record(3, "fig2 crossover", ok,
           f"strong dEC {d0:+.4f} (2SE {2 * se0:.4f}) at 0 dB, {d40:+.4f} (2SE {2 * se40:.4f}) "
           f"at 40 dB; min weak dEC {min(weak):+.4f}; {dt:.1f} s")
    assert ok


def crossing(snrs, deltas):
    """First SNR where the strong-user gain turns negative, linearly interpolated."""
    for (x0, y0), (x1, y1) in zip(zip(snrs, deltas), zip(snrs[1:], deltas[1:])):
        if y0 >= 0 > y1:
            return x0 + (x1 - x0) * y0 / (y0 - y1)
    return math.inf if deltas[-1] >= 0 else -math.inf


def test_c04_crossover_shift():
    t = time.perf_counter()
    betas = (-1.0, -5.0, -10.0)
    cfg = preset("fig2", seed=SEED, n_blocks=BLOCKS).replace(beta_grid=tuple((b, b) for b in betas))
    res = run_scenario(cfg)
    points = []
    for b in betas:
        x, d = res.series("NOMA", "full", 1, beta=(b, b), attr="delta_ec_vs_oma")
        points.append(crossing(list(x), list(d)))
    dt = time.perf_counter() - t
    ok = all(a <= b for a, b in zip(points, points[1:]))
    record(4, "crossover shift with stringency", ok,
           "crossing SNR " + ", ".join(f"beta={b:g}: {p:.2f} dB" for b, p in zip(betas, points))
           + f"; {dt:.1f} s")
    assert ok


def test_c05_strong_user_plateau(fig2):
    res, _ = fig2
    ec = lambda s, snr: res.get(snr_db=snr, scheme=s, user_rank=1).ec_value
    noma = ec("NOMA", 40.0) - ec("NOMA", 30.0)
    oma = ec("OMA", 40.0) - ec("OMA", 30.0)
    ok = noma < 0.05 and oma > 1.0
    record(5, "strong-user plateau", ok,
           f"NOMA growth 30->40 dB {noma:.4f}, OMA growth {oma:.4f}")
    assert ok


def test_c06_pairing_order():
    t = time.perf_counter()
    res = run_scenario(preset("fig6", seed=SEED, n_blocks=BLOCKS))
    worst = []
    bad = []
    for snr in GRID:
        fam = {p: res.get(snr_db=snr, pairing=p, user_rank=0)
               for p in ("none", "full", "optimal", "sequential")}
        d = {p: fam[p].sum_ec - fam["none"].sum_ec for p in fam}
        for hi, lo in (("full", "optimal"), ("optimal", "sequential")):
            gap = d[hi] - d[lo]
            se = combined(fam[hi].sum_ec_std_error, fam[lo].sum_ec_std_error)
            worst.append(gap / se if se else math.inf)
            if gap < -2 * se:
                bad.append(f"{snr:g} dB {hi}<{lo} by {-gap:.3f}")
    dt = time.perf_counter() - t
    ok = not bad
    record(6, "pairing ordering", ok,
           (f"{len(bad)} violations, e.g. " + "; ".join(bad[:3]) if bad else "no violations")
           + f"; worst gap {min(worst):.1f} SE; {dt:.1f} s")
    assert ok


def test_c07_nomar_dominance():
    t = time.perf_counter()
    cfg = preset("fig2", seed=SEED, n_blocks=BLOCKS).replace(
        schemes=("oma", "noma_full", "noma_paired", "nomar_paired"), pairings=("optimal",))
    res = run_scenario(cfg)
    bad = 0
    for snr in GRID:
        ec = lambda s, p, u: res.get(snr_db=snr, scheme=s, pairing=p, user_rank=u).ec_value
        o = (ec("OMA", "none", 0), ec("OMA", "none", 1))
        nr = (ec("NOMA_R", "optimal", 0), ec("NOMA_R", "optimal", 1))
        for p in ("full", "optimal"):
            n = (ec("NOMA", p, 0), ec("NOMA", p, 1))
            bad += not (nr[1] >= max(n[1], o[1]))
            bad += not (n[0] >= nr[0] >= o[0])
    dt = time.perf_counter() - t
    record(7, "NOMA-R dominance (exact)", bad == 0,
           f"{bad} ordering violations over {len(GRID)} SNR points; {dt:.1f} s")
    assert bad == 0


def test_c08_choice_probability():
    t = time.perf_counter()
    grid = tuple(float(x) for x in range(-10, 41, 2))
    cfg = preset("fig_sumec_surface_2u", seed=SEED, n_blocks=BLOCKS).replace(
        snr_db_grid=grid, beta_grid=((-5.0, -5.0),), schemes=("nomar_paired",))
    probs = choice_probability(cfg)
    p = np.array([v for _, v in probs])
    se = np.sqrt(p * (1 - p) / BLOCKS)
    rises = [(grid[i], grid[i + 1]) for i in range(len(p) - 1)
             if p[i + 1] - p[i] > 2 * combined(se[i], se[i + 1])]
    dt = time.perf_counter() - t
    ok = p[0] > 0.9 and p[-1] < 0.1 and not rises
    record(8, "choice probability limits", ok,
           f"p_noma {p[0]:.4f} at -10 dB, {p[-1]:.4f} at 40 dB; {len(rises)} increases beyond 2SE; {dt:.1f} s")
    assert ok


def test_c09_nomar_best_4u():
    t = time.perf_counter()
    cfg = preset("fig_sumec_4u", seed=SEED, n_blocks=BLOCKS)
    top = cfg.snr_db_grid[-1]
    # each SNR point is computed independently from the same blocks
    res = run_scenario(cfg.replace(snr_db_grid=(top,)))
    rows = {(r.scheme, r.pairing): r for r in res.select(user_rank=0)}
    best = rows[("NOMA_R", "optimal")]
    lagging = [k for k, r in rows.items()
               if r.sum_ec - best.sum_ec > 2 * combined(r.sum_ec_std_error, best.sum_ec_std_error)]
    dt = time.perf_counter() - t
    runner = max((r.sum_ec, k) for k, r in rows.items() if k != ("NOMA_R", "optimal"))
    record(9, "NOMA-R best at large SNR", not lagging,
           f"NOMA-R(optimal) sum EC {best.sum_ec:.4f} at {top:g} dB; best other "
           f"{runner[1][0]}/{runner[1][1]} {runner[0]:.4f}; {dt:.1f} s")
    assert not lagging


def test_c10_stringency_surface():
    t = time.perf_counter()
    res = run_scenario(preset("fig_sumec_surface_2u", seed=SEED, n_blocks=BLOCKS))

    def gap(b):
        nr = res.get(scheme="NOMA_R", user_rank=0, beta_weak=b, beta_strong=b).sum_ec
        n = res.get(scheme="NOMA", user_rank=0, beta_weak=b, beta_strong=b).sum_ec
        return nr - n

    strict, loose = gap(-10.0), gap(-0.1)
    dt = time.perf_counter() - t
    record(10, "stringency surface", strict > loose,
           f"NOMA-R minus NOMA sum EC {strict:+.4f} at (-10,-10), {loose:+.4f} at (-0.1,-0.1); {dt:.1f} s")
    assert strict > loose


def test_c11_pairing_oracle():
    counts = {m: len(enumerate_pairings(m)) for m in (2, 4, 6, 8)}
    expected = {m: math.prod(range(m - 1, 0, -2)) for m in counts}
    pw = PowerAllocation((0.2, 0.8))
    rng = np.random.default_rng(SEED)
    matchings = {m: sorted({tuple(sorted(tuple(sorted(p[i:i + 2])) for i in range(0, m, 2)))
                            for p in itertools.permutations(range(m))}) for m in counts}
    mismatches = 0
    for _ in range(1000):
        m = int(rng.choice([2, 4, 6, 8]))
        g = np.sort(rng.exponential(size=m))
        rho = 10 ** rng.uniform(-1, 4)
        plans = matchings[m]
        brute, best = None, -math.inf
        for key in plans:  # ascending, so strict '>' keeps the smallest tied plan
            v = heuristic_objective(g, PairingPlan(key), pw, rho)
            if v > best:
                brute, best = key, v
        chosen = nomar_heuristic_pairing(ChannelBlock(g), pw, rho)
        mismatches += chosen.key != brute
    ok = counts == expected and mismatches == 0
    record(11, "pairing enumeration oracle", ok,
           f"counts {counts}; {mismatches} heuristic mismatches over 1000 blocks")
    assert ok


def test_c12_table_golden():
    golden = {
        (True, True, "low"): (NOMAR_OPT, NOMA_OPT), (True, True, "high"): (NOMAR_OPT, OMA),
        (True, False, "low"): (NOMAR_OPT, NOMA_OPT), (True, False, "high"): (NOMA_OPT,),
        (False, True, "low"): (NOMAR_OPT, NOMA_OPT), (False, True, "high"): (NOMAR_OPT,),
        (False, False, "low"): (NOMAR_OPT, NOMA_OPT), (False, False, "high"): (NOMAR_OPT,),
    }
    wrong = [k for k, v in golden.items() if recommend(ScenarioQuery(*k)).techniques != v]
    record(12, "recommendation table", not wrong, f"{8 - len(wrong)}/8 rows match")
    assert not wrong


def test_c13_determinism(tmp_path):
    t = time.perf_counter()
    data = []
    for i, workers in enumerate((1, 2)):
        out = tmp_path / f"run{i}"
        assert main(["sweep", "--preset", "fig2", "--seed", str(SEED), "--blocks", str(BLOCKS),
                     "--workers", str(workers), "--out", str(out)]) == 0
        data.append((out / "sweep.csv").read_bytes())
    dt = time.perf_counter() - t
    ok = data[0] == data[1]
    record(13, "determinism", ok, f"fig2 CSVs byte-identical across workers 1 and 2: {ok}; {dt:.1f} s")
    assert ok
