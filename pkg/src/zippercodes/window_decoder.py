"""Sliding-window iterative hard-decision decoding of zipper codes.

Rows arrive chunk by chunk into a window of ``window_rows`` rows.  Each
chunk triggers up to ``max_rounds`` decoding rounds; afterwards the oldest
rows beyond the window size are committed.  Committed rows stay readable
for ``reach`` more rows (the frozen tail) so that later virtual symbols can
still be filled, but they never change again: a correction that would
modify a committed bit is suppressed and counted.

Positions known to be zero (virtual copies of negative rows, and the
information positions of truncated rows) are never flipped.  A constituent
correction touching one of them is rejected as a detected miscorrection.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .galois_bch import locate_errors
from .zipper_core import InterleaverMap, ZipperSpec, check_properties

__all__ = [
    "DecoderConfig",
    "Truncation",
    "DecodeStats",
    "DecodingWindow",
    "apply_truncation",
    "decode_stream",
    "genie_residual",
]

SCHEDULES = ("exhaustive", "pipelined")
MODES = ("bounded", "genie")


@dataclass(frozen=True)
class DecoderConfig:
    window_rows: int
    max_rounds: int = 5
    chunk_rows: int | None = None  # defaults to the largest virtual width m
    schedule: str = "exhaustive"
    stride: int = 1
    fresh_stale: bool = True
    truncation: tuple[int, int] | None = None  # (J, tau)
    mode: str = "bounded"

    def resolved(self, spec: ZipperSpec, imap: InterleaverMap) -> "DecoderConfig":
        """Fill defaults and check cross-field constraints against the code."""
        cfg = self
        if cfg.chunk_rows is None:
            cfg = replace(cfg, chunk_rows=max(spec.virtual))
        if cfg.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}, got {cfg.schedule!r}")
        if cfg.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {cfg.mode!r}")
        if cfg.stride < 1 or cfg.max_rounds < 1 or cfg.chunk_rows < 1:
            raise ValueError("stride, max_rounds and chunk_rows must be >= 1")
        if cfg.schedule == "exhaustive" and cfg.stride != 1:
            raise ValueError("stride only applies to the pipelined schedule")
        if cfg.window_rows < imap.reach + cfg.chunk_rows:
            raise ValueError(
                f"window_rows={cfg.window_rows} < reach ({imap.reach}) + chunk_rows ({cfg.chunk_rows})"
            )
        if cfg.truncation is not None:
            J, tau = cfg.truncation
            if J < 1 or tau < 0:
                raise ValueError("truncation needs J >= 1 and tau >= 0")
            if J % cfg.chunk_rows or tau % cfg.chunk_rows:
                raise ValueError(
                    f"J={J} and tau={tau} must be multiples of chunk_rows={cfg.chunk_rows}"
                )
        return cfg


@dataclass(frozen=True)
class Truncation:
    """Periodic truncation: in each period of J + tau rows the last tau carry no data."""

    spec: ZipperSpec
    J: int
    tau: int

    @property
    def period(self) -> int:
        return self.J + self.tau

    def is_truncated(self, i: int) -> bool:
        return self.tau > 0 and i % self.period >= self.J

    def known_columns(self, i: int) -> range:
        if self.is_truncated(i):
            return range(self.spec.m(i), self.spec.k(i))
        return range(0)

    def positions(self, rows: range) -> set[tuple[int, int]]:
        return {(i, j) for i in rows for j in self.known_columns(i)}

    def __contains__(self, pos) -> bool:
        i, j = pos
        return j in self.known_columns(i)

    def effective_rate(self) -> Fraction:
        spec = self.spec
        nu = spec.period
        kbar = Fraction(sum(c.k for c in spec.codes), nu)
        nbar = Fraction(sum(c.n for c in spec.codes), nu)
        mbar = Fraction(sum(spec.virtual), nu)
        data = self.J * (kbar - mbar)
        sent = (self.J + self.tau) * (nbar - mbar) - self.tau * (kbar - mbar)
        return data / sent


def apply_truncation(spec: ZipperSpec, config: DecoderConfig) -> Truncation | None:
    if config.truncation is None:
        return None
    if config.chunk_rows is not None:
        J, tau = config.truncation
        if J % config.chunk_rows or tau % config.chunk_rows:
            raise ValueError("J and tau must be multiples of chunk_rows")
    return Truncation(spec, *config.truncation)


@dataclass
class DecodeStats:
    rows_decoded: int = 0
    corrections: int = 0
    suppressed_flips: int = 0
    rejected_corrections: int = 0
    rounds: list[int] = field(default_factory=list)
    bits: int = 0
    info_bits: int = 0
    pre_errors: int = 0
    post_errors: int = 0
    info_errors: int = 0


class DecodingWindow:
    """Ring of full buffer rows: the active window plus the frozen tail."""

    def __init__(
        self,
        spec: ZipperSpec,
        imap: InterleaverMap,
        config: DecoderConfig,
        truth: Sequence[np.ndarray] | None = None,
    ):
        cfg = config.resolved(spec, imap)
        if cfg.mode == "genie" and truth is None:
            raise ValueError("genie mode needs the transmitted buffer as truth")
        self.spec, self.imap, self.config = spec, imap, cfg
        self.truth = truth
        self.truncation = apply_truncation(spec, cfg)
        self.capacity = cfg.window_rows + cfg.chunk_rows + imap.reach + 1
        self.buf = np.zeros((self.capacity, spec.max_n), dtype=np.uint8)
        self.fresh = np.zeros(self.capacity, dtype=bool)
        self.base = 0  # oldest row still in the window
        self.top = 0  # next row to arrive
        self.stats = DecodeStats()
        self._delta = [np.array([d for d, _ in row], dtype=np.int64) for row in imap.table]
        self._col = [np.array([c for _, c in row], dtype=np.int64) for row in imap.table]

    @property
    def size(self) -> int:
        return self.top - self.base

    def row(self, i: int) -> np.ndarray:
        return self.buf[i % self.capacity, : self.spec.n(i)]

    def _transmitted(self, i: int) -> range:
        lo = self.spec.k(i) if self.truncation and self.truncation.is_truncated(i) else self.spec.m(i)
        return range(lo, self.spec.n(i))

    def _info(self, i: int) -> range:
        if self.truncation and self.truncation.is_truncated(i):
            return range(0)
        return range(self.spec.m(i), self.spec.k(i))

    def push(self, real_row) -> None:
        """Append the next received row, filling its virtual part from the buffer."""
        i, spec = self.top, self.spec
        u, m, n = i % spec.period, spec.m(i), spec.n(i)
        real = np.asarray(real_row, dtype=np.uint8)
        if real.shape != (n - m,):
            raise ValueError(f"row {i}: expected {n - m} real bits, got {real.shape}")
        slot = i % self.capacity
        row = self.buf[slot]
        row[:] = 0
        row[m:n] = real
        if self.truncation and self.truncation.is_truncated(i):
            row[m:spec.k(i)] = 0
        src = i - self._delta[u]
        older = (src >= 0) & (src < i)
        row[:m][older] = self.buf[src[older] % self.capacity, self._col[u][older]]
        same = src == i
        if same.any():
            row[:m][same] = row[self._col[u][same]]
        self.fresh[slot] = True
        self.top += 1
        if self.truth is not None:
            sent = self._transmitted(i)
            t = np.asarray(self.truth[i])
            self.stats.bits += len(sent)
            self.stats.pre_errors += int(np.count_nonzero(row[sent.start:n] != t[sent.start:n]))

    def _known(self, i: int, j: int) -> bool:
        u = i % self.spec.period
        if j < self.spec.m(i):
            return i - self._delta[u][j] < 0
        return self.truncation is not None and (i, j) in self.truncation

    def flip_with_duplicates(self, i: int, j: int) -> int:
        """Flip (i, j) together with every copy inside the window; returns bits changed."""
        u = i % self.spec.period
        if j < self.spec.m(i):
            a, c = i - int(self._delta[u][j]), int(self._col[u][j])
            if a < self.base:
                self.stats.suppressed_flips += 1
                return 0
        else:
            a, c = i, j
        cap = self.capacity
        self.buf[a % cap, c] ^= 1
        self.fresh[a % cap] = True
        changed = 1
        for d, jj in self.imap.inverse_offsets(a, c):
            r = a + d
            if r >= self.top:
                continue
            if r < self.base:
                self.stats.suppressed_flips += 1
                continue
            self.buf[r % cap, jj] ^= 1
            self.fresh[r % cap] = True
            changed += 1
        return changed

    def decode_row(self, i: int) -> int:
        """Run the constituent decoder on row i; returns the number of bits it corrected."""
        code = self.spec.code(i)
        word = self.row(i)
        self.stats.rows_decoded += 1
        if self.config.mode == "genie":
            pos = np.flatnonzero(word != self.truth[i])
            if pos.size > code.t:
                pos = None
        else:
            pos = locate_errors(code, word)
        slot = i % self.capacity
        if pos is None or pos.size == 0:
            self.fresh[slot] = False
            return 0
        if any(self._known(i, int(j)) for j in pos):
            self.stats.rejected_corrections += 1
            self.fresh[slot] = False
            return 0
        for j in pos:
            self.flip_with_duplicates(i, int(j))
        self.fresh[slot] = False
        self.stats.corrections += int(pos.size)
        return int(pos.size)

    def decode_round(self, round_index: int = 0) -> int:
        """One pass over the window, oldest row first; returns bits corrected."""
        cfg = self.config
        total = 0
        for i in range(self.base, self.top):
            if cfg.schedule == "pipelined" and (i - round_index) % cfg.stride:
                continue
            if cfg.fresh_stale and not self.fresh[i % self.capacity]:
                continue
            total += self.decode_row(i)
        return total

    def run_rounds(self) -> int:
        used = 0
        for r in range(self.config.max_rounds):
            used += 1
            if self.decode_round(r) == 0:
                break
        self.stats.rounds.append(used)
        return used

    def commit(self, count: int) -> list[np.ndarray]:
        """Move the ``count`` oldest rows to the frozen tail; returns their message bits."""
        out = []
        for _ in range(min(count, self.size)):
            i = self.base
            row = self.row(i)
            info = self._info(i)
            out.append(row[info.start:info.stop].copy())
            if self.truth is not None:
                t = np.asarray(self.truth[i])
                sent = self._transmitted(i)
                self.stats.post_errors += int(np.count_nonzero(row[sent.start:sent.stop] != t[sent.start:sent.stop]))
                self.stats.info_bits += len(info)
                self.stats.info_errors += int(np.count_nonzero(row[info.start:info.stop] != t[info.start:info.stop]))
            self.base += 1
        return out

    def virtual_mismatches(self) -> list[tuple[int, int]]:
        """In-window virtual positions that disagree with their source (should be empty)."""
        bad = []
        for i in range(self.base, self.top):
            u = i % self.spec.period
            row = self.row(i)
            for j in range(self.spec.m(i)):
                a = i - int(self._delta[u][j])
                want = 0 if a < 0 else self.buf[a % self.capacity, self._col[u][j]]
                if row[j] != want:
                    bad.append((i, j))
        return bad


def decode_stream(
    spec: ZipperSpec,
    imap: InterleaverMap,
    config: DecoderConfig,
    received: Sequence[np.ndarray],
    truth: Sequence[np.ndarray] | None = None,
    check_map: bool = True,
) -> tuple[np.ndarray, DecodeStats]:
    """Decode a stream of received real rows.

    ``truth`` holds the transmitted full buffer rows; it is required in
    genie mode and enables the error counts in the returned stats.
    Returns the delivered message bits (truncated rows excluded).
    """
    if check_map:
        props = check_properties(imap, spec)
        if not (props.causal and props.bijective):
            raise ValueError("window decoding needs a causal, bijective interleaver map")
    win = DecodingWindow(spec, imap, config, truth)
    cfg = win.config
    out: list[np.ndarray] = []
    total = len(received)
    for start in range(0, total, cfg.chunk_rows):
        for i in range(start, min(start + cfg.chunk_rows, total)):
            win.push(received[i])
        excess = win.size - cfg.window_rows
        if excess > 0:
            out.extend(win.commit(excess))
        win.run_rounds()
    out.extend(win.commit(win.size))
    message = np.concatenate(out) if out else np.zeros(0, dtype=np.uint8)
    return message, win.stats


def genie_residual(
    spec: ZipperSpec,
    imap: InterleaverMap,
    num_rows: int,
    errors,
    max_rounds: int = 10**6,
) -> set[tuple[int, int]]:
    """Genie-decode a block of rows [0, num_rows) holding ``errors`` on the zero buffer.

    All rows sit in one chunk, so decoding runs until no row changes.
    Returns the real positions still in error.
    """
    truth = [np.zeros(spec.n(i), dtype=np.uint8) for i in range(num_rows)]
    cfg = DecoderConfig(
        window_rows=num_rows + imap.reach, chunk_rows=num_rows, max_rounds=max_rounds, mode="genie"
    )
    win = DecodingWindow(spec, imap, cfg, truth)
    rows = [np.zeros(spec.real_width(i), dtype=np.uint8) for i in range(num_rows)]
    for i, k in errors:
        rows[i][k - spec.m(i)] ^= 1
    for r in rows:
        win.push(r)
    win.run_rounds()
    left = set()
    for i in range(num_rows):
        m = spec.m(i)
        left.update((i, int(k) + m) for k in np.flatnonzero(win.row(i)[m:]))
    return left
