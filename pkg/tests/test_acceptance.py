"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the pytest report.
"""

import itertools
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from zippercodes.channel_sim import ZipperSystem, gap_db, run_sim_point
from zippercodes.cli import main
from zippercodes.galois_bch import decode_bounded, decode_genie, encode_systematic, make_shortened_bch
from zippercodes.stall_analysis import (
    build_code_graph,
    census_from_graph,
    core_edges,
    count_min_stalls_delayed,
    count_min_stalls_tiled,
    enumerate_cliques,
    error_floor_bound,
    error_pattern_graph,
    min_stall_size,
    peel,
)
from zippercodes.window_decoder import DecoderConfig, genie_residual
from zippercodes.zipper_core import (
    InterleaverMap,
    ZipperSpec,
    check_properties,
    code_rate,
    make_braided7,
    make_delayed_diagonal,
    make_tiled_diagonal,
)

CARRIER = make_shortened_bch(6, 1, 63)  # graph-only experiments: the code just carries widths


def report(n, ok, detail, started):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} [{time.perf_counter() - started:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def graph_family(kind, **params):
    if kind == "staircase":
        widths = (params["m"],) * params["m"]
    elif kind == "tiled":
        widths = (params["w"] * params["L"],) * params["w"]
    else:
        widths = (params["m"],)
    spec = ZipperSpec((CARRIER,) * len(widths), widths)
    return spec, InterleaverMap(kind, params, widths)


THRESHOLDS_W1 = [(0.960, 2.68e-3, 0.503), (0.970, 2.03e-3, 0.412), (0.975, 1.63e-3, 0.398), (0.980, 1.24e-3, 0.393)]
THRESHOLDS_R0967 = [
    (2.015e-3, 0.536), (2.036e-3, 0.526), (2.060e-3, 0.514), (2.099e-3, 0.497),
    (2.035e-3, 0.526), (2.048e-3, 0.520), (2.071e-3, 0.509), (2.073e-3, 0.508),
]


def test_criterion_1_gap_reproduction():
    start = time.perf_counter()
    rows = THRESHOLDS_W1 + [(0.967, p, g) for p, g in THRESHOLDS_R0967]
    errs = [abs(gap_db(p, r) - g) for r, p, g in rows]
    elapsed = time.perf_counter() - start
    ok = max(errs) <= 0.02 and elapsed < 1.0
    report(1, ok, f"{len(rows)} table rows, max |gap error| = {max(errs):.4f} dB (tol 0.02)", start)


def test_criterion_2_rate_formulas():
    start = time.perf_counter()
    stair = code_rate(ZipperSpec.uniform(make_shortened_bch(12, 3, 2400), 1200))
    braided = code_rate(make_braided7()[0])
    delayed = code_rate(ZipperSpec.uniform(make_shortened_bch(11, 3, 2000), 1000))
    got = (stair, braided, delayed)
    want = (Fraction(97, 100), Fraction(1, 7), Fraction(967, 1000))
    report(2, got == want, f"rates {tuple(map(str, got))}, expected {tuple(map(str, want))}", start)


def test_criterion_3_bch_exhaustive():
    start = time.perf_counter()
    checked = genie = 0
    ok = True
    for d, t, n in [(4, 2, 15), (3, 1, 7)]:
        code = make_shortened_bch(d, t, n)
        book = [encode_systematic(code, bits) for bits in itertools.product([0, 1], repeat=code.k)]
        small = [p for w in range(t + 1) for p in itertools.combinations(range(n), w)]
        for cw in book:
            for pos in small:
                word = cw.copy()
                word[list(pos)] ^= 1
                out = decode_bounded(code, word)
                ok &= out is not None and np.array_equal(out.codeword, cw)
                checked += 1
        # genie failure depends on the pattern only: all heavy patterns on codeword 0,
        # weight t+1 on every codeword
        for w in range(t + 1, n + 1):
            for pos in itertools.combinations(range(n), w):
                word = book[0].copy()
                word[list(pos)] ^= 1
                ok &= decode_genie(code, word, book[0], check_truth=False) is None
                genie += 1
        for cw in book:
            for pos in itertools.combinations(range(n), t + 1):
                word = cw.copy()
                word[list(pos)] ^= 1
                ok &= decode_genie(code, word, cw, check_truth=False) is None
                genie += 1
    ok &= time.perf_counter() - start < 60
    report(3, ok, f"{checked} bounded decodes corrected, {genie} genie decodes with weight > t failed", start)


def random_pattern(rnd, spec, im, rows, graph):
    """Random errors: uniform, or seeded with the edges of a clique plus noise."""
    real = [(i, k) for i in range(rows) for k in range(spec.m(i), spec.n(i))]
    if rnd.random() < 0.5:
        return rnd.sample(real, rnd.randint(1, min(len(real), 2 * rows)))
    t = spec.code(0).t
    size = rnd.randint(t + 1, t + 3)
    anchor = rnd.randrange(rows)
    res = enumerate_cliques(graph, size, cap=1, anchors=[anchor])
    errors = set(rnd.sample(real, rnd.randint(0, rows // 2)))
    if res.cliques:
        c = set(res.cliques[0])
        errors |= {p for (u, v), syms in graph.symbols.items() if u in c and v in c for p in syms}
    return sorted(errors) or [real[0]]


def test_criterion_4_peeling_oracle():
    start = time.perf_counter()
    systems = [
        make_delayed_diagonal(8, 2, make_shortened_bch(5, 1, 16)),
        make_delayed_diagonal(12, 2, make_shortened_bch(5, 2, 24)),
        make_delayed_diagonal(16, 1, make_shortened_bch(6, 2, 32)),
        make_tiled_diagonal(1, 12, make_shortened_bch(5, 2, 24)),
        make_tiled_diagonal(2, 4, make_shortened_bch(5, 1, 16)),
        make_tiled_diagonal(4, 4, make_shortened_bch(6, 2, 32)),
    ]
    rnd = random.Random(4)
    trials = mismatches = stuck = 0
    for spec, im in systems:
        t = spec.code(0).t
        graphs = {}
        for _ in range(200):
            rows = rnd.randint(4, 64 - im.reach)
            rows -= rows % spec.period
            if rows not in graphs:
                graphs[rows] = build_code_graph(im, spec, (0, rows))
            errors = random_pattern(rnd, spec, im, rows, graphs[rows])
            want = peel(error_pattern_graph(im, spec, errors, row_range=(0, rows), check_map=False), t).positions
            got = genie_residual(spec, im, rows, errors)
            mismatches += got != want
            stuck += bool(want)
            trials += 1
    ok = trials >= 1000 and mismatches == 0 and time.perf_counter() - start < 300
    report(4, ok, f"{trials} patterns ({stuck} with a nonempty residual), {mismatches} mismatches", start)


def staircase_stalls(m, t, size, blocks):
    spec, im = graph_family("staircase", m=m)
    edges = build_code_graph(im, spec, (0, blocks * m)).edges()
    for sel in itertools.combinations(edges, size):
        if core_edges(list(sel), t):
            return True
    return False


def test_criterion_5_minimum_stall_size():
    start = time.perf_counter()
    rnd = random.Random(5)
    maps = [
        graph_family("delayed", m=8, delta=1),
        graph_family("delayed", m=10, delta=3),
        graph_family("tiled", w=2, L=4),
        graph_family("staircase", m=4),
        make_braided7(),
    ]
    assert all(check_properties(im, spec).scattering for spec, im in maps)
    graphs = [build_code_graph(im, spec, (0, 60)) for spec, im in maps]
    below = found_below = hits_at_limit = 0
    for t in (1, 2, 3):
        limit = min_stall_size(t)
        for trial in range(125_000):
            g = graphs[trial % len(graphs)]
            at_limit = trial % 10 == 0
            nv = t + 2 if at_limit else rnd.randint(t + 2, t + 5)
            lo = rnd.randrange(0, 40)
            verts = set(rnd.sample(range(lo, lo + 20), nv))
            local = [e for e in g.edges() if e[0] in verts and e[1] in verts]
            if not local:
                continue
            if at_limit:
                if len(local) >= limit:
                    hits_at_limit += bool(core_edges(rnd.sample(local, limit), t))
                continue
            sel = rnd.sample(local, rnd.randint(1, min(limit - 1, len(local))))
            below += 1
            found_below += bool(core_edges(sel, t))
    # staircase: four consecutive blocks hold every connected pattern of these sizes
    exhaustive_ok = True
    squares = []
    for m in (1, 2, 3):
        for t in (1, 2):
            exhaustive_ok &= not staircase_stalls(m, t, min_stall_size(t), 4)
            square = staircase_stalls(m, t, (t + 1) ** 2, 3)
            # a row meets at most m rows of each neighbouring block
            exhaustive_ok &= square == (m >= t + 1)
            squares.append((m, t, square))
    ok = found_below == 0 and hits_at_limit > 0 and exhaustive_ok and time.perf_counter() - start < 600
    sq = ", ".join(f"m={m} t={t}: {'yes' if s else 'no'}" for m, t, s in squares)
    report(5, ok, f"{below} random patterns below (t+1)(t+2)/2 gave {found_below} stalls "
                  f"({hits_at_limit} stalls at the bound); staircase size (t+1)^2 stall found: {sq}", start)


def test_criterion_6_counting_formulas():
    start = time.perf_counter()
    delayed_bad = []
    cases = 0
    for m in range(1, 15):
        for delta in range(1, m + 1):
            spec, im = graph_family("delayed", m=m, delta=delta)
            g = build_code_graph(im, spec, (0, m + delta))
            for t in (1, 2, 3):
                brute = enumerate_cliques(g, t + 2, cap=None, anchors=[0], keep=False).count
                exists, per, _ = count_min_stalls_delayed(m, delta, t)
                cases += 1
                if brute != per or exists != (brute > 0):
                    delayed_bad.append((m, delta, t, brute, per))
    endpoints = (count_min_stalls_delayed(1000, 333, 3)[:2], count_min_stalls_delayed(1000, 334, 3)[:2])
    tiled_bad = []
    tcases = 0
    for w in (1, 2):
        for L in range(1, 6):
            spec, im = graph_family("tiled", w=w, L=L)
            for K in range(1, 9):
                g = build_code_graph(im, spec, (0, w * K))
                for t in (1, 2):
                    brute = enumerate_cliques(g, t + 2, cap=None, keep=False).count
                    tcases += 1
                    if brute != count_min_stalls_tiled(L, K, w, t)[0]:
                        tiled_bad.append((w, L, K, t, brute))
    ok = not delayed_bad and not tiled_bad and endpoints == ((True, 1), (False, 0))
    ok &= time.perf_counter() - start < 600
    report(6, ok, f"delayed {cases} cases, {len(delayed_bad)} mismatches; m=1000 t=3 endpoints {endpoints}; "
                  f"tiled {tcases} cases, {len(tiled_bad)} mismatches", start)


def poisson_interval(k, z=3.0):
    """Approximate z-sigma interval for a Poisson mean given k events."""
    lo = max(0.0, k - z * math.sqrt(k))
    hi = k + z * math.sqrt(k) + z * z
    return lo, hi


@pytest.mark.slow
def test_criterion_7_error_floor():
    start = time.perf_counter()
    m, delta, M, p = 8, 2, 40, 2e-3
    spec, im = make_delayed_diagonal(m, delta, make_shortened_bch(5, 1, 16))
    t = spec.code(0).t
    graph = build_code_graph(im, spec, (0, M))
    edges = graph.edges()
    positions = [graph.symbols[e][0] for e in edges]
    E = len(edges)
    census = census_from_graph(graph, t, M, m, cycles4=True)
    est = error_floor_bound(census, p)

    rng = np.random.default_rng(7)
    windows, chunk = 10**8, 10**6
    residual_bits = stalled = 0
    checked = mismatches = 0
    pick = random.Random(7)
    for _ in range(windows // chunk):
        counts = rng.binomial(E, p, size=chunk)
        for c in counts[counts >= min_stall_size(t)]:
            idx = rng.choice(E, size=int(c), replace=False)
            sel = [edges[e] for e in idx]
            left = core_edges(sel, t)
            residual_bits += len(left)
            stalled += bool(left)
            # genie window decoder on the same pattern: every stalled window and a sample of others
            if left or pick.random() < 1e-3:
                errors = [positions[e] for e in idx]
                want = {errors[e] for e in left}
                mismatches += genie_residual(spec, im, M, errors) != want
                checked += 1
    bits = windows * E
    measured = residual_bits / bits
    # residual bits arrive in whole stall patterns; use stall counts for the spread
    per_stall = residual_bits / stalled if stalled else 1.0
    lo, hi = (x * per_stall / bits for x in poisson_interval(stalled))
    ratio = measured / est.dominant_ber if measured else math.inf
    z = (measured - est.bound) / (per_stall * math.sqrt(max(stalled, 1)) / bits)
    ok = (lo <= est.bound and 1 / 3 <= ratio <= 3 and mismatches == 0
          and time.perf_counter() - start < 1800)
    report(7, ok, f"{windows:.0e} windows of {E} bits at p={p}: measured BER {measured:.3e} "
                  f"(3-sigma [{lo:.3e}, {hi:.3e}], {stalled} stalls, z vs bound {z:+.2f}), bound {est.bound:.3e}, dominant {est.dominant_ber:.3e} "
                  f"(ratio {ratio:.2f}); genie cross-check {checked} windows, {mismatches} mismatches", start)


def poisson_upper(k, conf=0.95):
    """Exact one-sided upper confidence limit for a Poisson mean."""
    def cdf(mu):
        term = total = math.exp(-mu)
        for i in range(1, k + 1):
            term *= mu / i
            total += term
        return total

    lo, hi = 0.0, k + 10.0 * math.sqrt(k + 1) + 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(mid) > 1 - conf:
            lo = mid
        else:
            hi = mid
    return hi


@pytest.mark.slow
def test_criterion_8_waterfall():
    start = time.perf_counter()
    spec, im = make_tiled_diagonal(1, 60, make_shortened_bch(7, 2, 120))
    cfg = DecoderConfig(window_rows=5 * 60, max_rounds=5, truncation=(600, 60))
    system = ZipperSystem(spec, im, cfg)
    hi = run_sim_point(system, 0.022, 8, min_errors=10**9, max_trials=8)
    lo = run_sim_point(system, 0.015, 8, min_errors=10**9, max_trials=60)
    lo_upper = poisson_upper(lo.post_errors) / lo.info_bits
    drop = hi.post_ber / lo_upper
    ok = drop >= 100 and time.perf_counter() - start < 1800
    report(8, ok, f"rate {code_rate(spec)}: BER {hi.post_ber:.2e} at p=0.022, {lo.post_ber:.2e} at p=0.015 "
                  f"(95% upper {lo_upper:.2e}); drop >= {drop:.0f}x", start)


SIM_CONFIG = """\
code:
  family: delayed
  m: 12
  delta: 2
  bch: {degree: 5, t: 2, n: 24}
decoder:
  window_rows: 50
  chunk: 8
  truncation: {J: 32, tau: 8}
channel:
  p: [0.04, 0.08, 0.12]
  min_errors: 40
  max_trials: 12
"""


def test_criterion_9_determinism(tmp_path):
    start = time.perf_counter()
    configs = {"small.yaml": SIM_CONFIG,
               "genie.yaml": (Path(__file__).resolve().parent.parent / "configs" / "delayed_small.yaml").read_text()}
    same = True
    runs = 0
    for name, text in configs.items():
        cfg = tmp_path / name
        cfg.write_text(text)
        bodies = []
        for workers in (1, 2, 3):
            out = tmp_path / f"{name}.{workers}.csv"
            assert main(["simulate", str(cfg), "--seed", "99", "--workers", str(workers),
                         "--set", "channel.max_trials=12", "--out", str(out)]) == 0
            bodies.append(out.read_bytes())
            runs += 1
        same &= all(b == bodies[0] for b in bodies)
    report(9, same, f"{runs} simulate runs over {len(configs)} configs with 1, 2, 3 workers: "
                    f"CSV bodies {'byte-identical' if same else 'differ'}", start)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
