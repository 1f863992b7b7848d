"""BSC Monte Carlo, waterfall extrapolation and gap to the Shannon limit.

Randomness: every trial draws from its own PCG64 stream seeded by
``SeedSequence(master_seed, spawn_key=(trial,))``.  Trials are reduced in
index order and the stop rule is checked after each trial, so results do
not depend on how many worker processes ran them.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable

import numpy as np

from .window_decoder import DecoderConfig, Truncation, apply_truncation, decode_stream
from .zipper_core import InterleaverMap, ZipperSpec, check_properties, encode_buffer

__all__ = [
    "SimPoint",
    "GapReport",
    "ZipperSystem",
    "trial_rng",
    "bsc_transmit",
    "run_trial",
    "run_sim_point",
    "fit_extrapolate",
    "binary_entropy",
    "shannon_limit_p",
    "q_function",
    "q_inv",
    "gap_db",
    "gap_report",
    "write_points_csv",
    "read_points_csv",
]

CSV_VERSION = "# zippercodes sim-points v1"
CSV_COLUMNS = ("p", "bits", "info_bits", "pre_errors", "post_errors", "pre_ber", "post_ber", "seed")


@dataclass(frozen=True)
class SimPoint:
    """One Monte Carlo operating point.

    ``bits``/``pre_errors`` count transmitted real bits; ``info_bits``/
    ``post_errors`` count delivered message bits after decoding.
    """

    p: float
    bits: int
    info_bits: int
    pre_errors: int
    post_errors: int
    seed: int
    trials: int = 0

    @property
    def pre_ber(self) -> float:
        return self.pre_errors / self.bits if self.bits else 0.0

    @property
    def post_ber(self) -> float:
        return self.post_errors / self.info_bits if self.info_bits else 0.0


@dataclass(frozen=True)
class GapReport:
    rate: float
    p_star: float
    p_shannon: float
    gap_db: float

    def __str__(self) -> str:
        return (
            f"rate      = {self.rate:.6f}\n"
            f"p_star    = {self.p_star:.6e}\n"
            f"p_shannon = {self.p_shannon:.6e}\n"
            f"gap_db    = {self.gap_db:.4f}\n"
        )


@dataclass(frozen=True)
class ZipperSystem:
    """Everything needed to run one trial: code, map, decoder, frame length.

    With truncation configured a frame is one truncation period (J + tau
    rows); otherwise ``frame_rows`` must be given.
    """

    spec: ZipperSpec
    imap: InterleaverMap
    config: DecoderConfig
    frame_rows: int | None = None

    def rows_per_frame(self) -> int:
        if self.frame_rows is not None:
            return self.frame_rows
        if self.config.truncation is None:
            raise ValueError("frame_rows is required without truncation")
        return sum(self.config.truncation)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(trial,))))


def bsc_transmit(bits, p: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability p."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover probability {p} outside [0, 1/2]")
    b = np.asarray(bits, dtype=np.uint8)
    if p == 0.0:
        return b.copy()
    return b ^ (rng.random(b.shape) < p).astype(np.uint8)


def run_trial(system: ZipperSystem, p: float, master_seed: int, trial: int) -> tuple[int, int, int, int]:
    """Encode, transmit and decode one frame; returns (bits, info_bits, pre, post)."""
    rng = trial_rng(master_seed, trial)
    spec, imap = system.spec, system.imap
    cfg = system.config.resolved(spec, imap)
    trunc: Truncation | None = apply_truncation(spec, cfg)
    rows = system.rows_per_frame()
    zero_rows = trunc.is_truncated if trunc else None
    nbits = sum(spec.info_width(i) for i in range(rows) if not (trunc and trunc.is_truncated(i)))
    message = rng.integers(0, 2, nbits, dtype=np.uint8)
    full = encode_buffer(spec, imap, message, num_rows=rows, zero_rows=zero_rows)
    received = []
    for i, row in enumerate(full):
        m = spec.m(i)
        lo = spec.k(i) if trunc and trunc.is_truncated(i) else m
        rx = row[m:].copy()
        rx[lo - m:] = bsc_transmit(rx[lo - m:], p, rng)
        received.append(rx)
    _, stats = decode_stream(spec, imap, cfg, received, truth=full, check_map=False)
    return stats.bits, stats.info_bits, stats.pre_errors, stats.info_errors


def _run_trials(args):
    system, p, master_seed, trials = args
    return [run_trial(system, p, master_seed, t) for t in trials]


def run_sim_point(
    system: ZipperSystem,
    p: float,
    master_seed: int,
    min_errors: int = 100,
    max_bits: int = 10**7,
    max_trials: int | None = None,
    workers: int = 1,
) -> SimPoint:
    """Run trials 0, 1, 2, ... until ``min_errors`` post-FEC errors or ``max_bits`` sent."""
    props = check_properties(system.imap, system.spec)
    if not (props.causal and props.bijective):
        raise ValueError("simulation needs a causal, bijective interleaver map")
    bits = info = pre = post = 0
    trial = 0
    batch = max(1, workers) * 4
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        done = False
        while not done:
            ids = list(range(trial, trial + batch))
            if pool is None:
                results = _run_trials((system, p, master_seed, ids))
            else:
                parts = [ids[w::workers] for w in range(workers)]
                futures = [pool.submit(_run_trials, (system, p, master_seed, part)) for part in parts]
                by_id = {}
                for part, fut in zip(parts, futures):
                    by_id.update(zip(part, fut.result()))
                results = [by_id[t] for t in ids]
            for b, ib, e_pre, e_post in results:
                bits, info, pre, post = bits + b, info + ib, pre + e_pre, post + e_post
                trial += 1
                if post >= min_errors or bits >= max_bits or (max_trials is not None and trial >= max_trials):
                    done = True
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    return SimPoint(p, bits, info, pre, post, master_seed, trial)


def fit_extrapolate(points, target_ber: float = 1e-15, ber_ceiling: float | None = None) -> float:
    """Least-squares line through (log10 p, log10 BER); returns p where it hits target_ber.

    ``points`` may hold SimPoints or (p, ber) pairs.  Zero-BER points are skipped.
    """
    pairs = [(pt.p, pt.post_ber) if isinstance(pt, SimPoint) else (float(pt[0]), float(pt[1])) for pt in points]
    pairs = [(p, b) for p, b in pairs if b > 0 and p > 0 and (ber_ceiling is None or b <= ber_ceiling)]
    if len(pairs) < 2:
        raise ValueError("need at least two points with nonzero BER to extrapolate")
    ps = [p for p, _ in pairs]
    if len(set(ps)) != len(ps):
        raise ValueError("duplicate crossover probabilities in fit")
    x = np.log10(ps)
    y = np.log10([b for _, b in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    if slope <= 0:
        raise ValueError(f"fitted slope {slope:.3g} is not positive: no waterfall to extrapolate")
    return float(10 ** ((math.log10(target_ber) - intercept) / slope))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def shannon_limit_p(rate: float, tol: float = 1e-12) -> float:
    """Largest BSC crossover p with capacity 1 - h(p) >= rate (bisection on h)."""
    rate = float(rate)
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate {rate} outside (0, 1)")
    target = 1.0 - rate
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inv(x: float) -> float:
    if not 0.0 < x < 0.5:
        raise ValueError(f"q_inv argument {x} outside (0, 1/2)")
    return -NormalDist().inv_cdf(x)


def gap_db(p_star: float, rate: float) -> float:
    """Bi-AWGN SNR gap (dB) between crossover p_star and the Shannon limit at ``rate``.

    Hard-decision BPSK has p = Q(sqrt(c * SNR)) for a fixed constant c, so the
    SNR ratio is (Qinv(p_star) / Qinv(p_shannon))^2.
    """
    p_sh = shannon_limit_p(rate)
    if not 0.0 < p_star <= p_sh * (1 + 1e-12):
        raise ValueError(f"p_star={p_star} must lie in (0, {p_sh}] for rate {rate}")
    return max(0.0, 20.0 * math.log10(q_inv(p_star) / q_inv(p_sh)))


def gap_report(p_star: float, rate: float) -> GapReport:
    return GapReport(float(rate), p_star, shannon_limit_p(rate), gap_db(p_star, rate))


def write_points_csv(points: Iterable[SimPoint], stream=None) -> str:
    """Write points as CSV (returns the text; also writes it to ``stream`` if given)."""
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pt in points:
        w.writerow([repr(pt.p), pt.bits, pt.info_bits, pt.pre_errors, pt.post_errors,
                    f"{pt.pre_ber:.6e}", f"{pt.post_ber:.6e}", pt.seed])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_points_csv(text: str) -> list[SimPoint]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    missing = set(CSV_COLUMNS) - set(rows[0] if rows else CSV_COLUMNS)
    if missing:
        raise ValueError(f"CSV is missing columns {sorted(missing)}")
    return [
        SimPoint(float(r["p"]), int(r["bits"]), int(r["info_bits"]), int(r["pre_errors"]),
                 int(r["post_errors"]), int(r["seed"]))
        for r in rows
    ]
