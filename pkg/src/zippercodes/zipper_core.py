"""Zipping pairs, interleaver maps, streaming encoder and rate.

Row ``i`` of the buffer uses period slot ``u = i mod nu``.  Its first
``m_u`` positions are virtual (copies of real symbols elsewhere), the
remaining ``n_u - m_u`` positions are real and are the only ones sent.
Rows with negative index are implicitly all-zero and never stored.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .galois_bch import BchCode, encode_systematic, make_shortened_bch

__all__ = [
    "ZipperSpec",
    "InterleaverMap",
    "MapProperties",
    "make_staircase",
    "make_tiled_diagonal",
    "make_delayed_diagonal",
    "make_braided7",
    "make_custom",
    "phi",
    "phi_inverse",
    "check_properties",
    "ZipperEncoder",
    "encode_buffer",
    "encode_rows",
    "fill_received_buffer",
    "code_rate",
]

Position = tuple[int, int]


@dataclass(frozen=True)
class ZipperSpec:
    """Periodic constituent codes plus the width ``m_u`` of each virtual prefix."""

    codes: tuple[BchCode, ...]
    virtual: tuple[int, ...]

    def __post_init__(self):
        if not self.codes or len(self.codes) != len(self.virtual):
            raise ValueError("need one virtual width per period slot")
        for code, m in zip(self.codes, self.virtual):
            if not 0 <= m <= code.k:
                raise ValueError(f"virtual width {m} must lie in [0, k={code.k}]")

    @classmethod
    def uniform(cls, code: BchCode, m: int, period: int = 1) -> "ZipperSpec":
        return cls((code,) * period, (m,) * period)

    @property
    def period(self) -> int:
        return len(self.codes)

    def code(self, i: int) -> BchCode:
        return self.codes[i % self.period]

    def m(self, i: int) -> int:
        return self.virtual[i % self.period]

    def n(self, i: int) -> int:
        return self.codes[i % self.period].n

    def k(self, i: int) -> int:
        return self.codes[i % self.period].k

    def real_width(self, i: int) -> int:
        return self.n(i) - self.m(i)

    def info_width(self, i: int) -> int:
        """Message bits carried by row ``i`` (real information positions)."""
        return self.k(i) - self.m(i)

    @property
    def max_n(self) -> int:
        return max(c.n for c in self.codes)


@dataclass(frozen=True)
class MapProperties:
    causal: bool
    strictly_causal: bool
    periodic: int | None
    bijective: bool
    scattering: bool


def _staircase(p, row, j):
    m = p["m"]
    blk, r = divmod(row, m)
    return m * (blk - 1) + j, m + r


def _tiled(p, row, col):
    w, L = p["w"], p["L"]
    q, i = divmod(row, w)
    s, j = divmod(col, w)
    return w * (q - s - 1) + j, w * (L + s) + i


def _delayed(p, i, j):
    return i - j - p["delta"], j + p["m"]


def _braided7(p, i, j):
    if i % 2 == 0:
        return i + 2 * j - 5, 6 - j
    if j != 3:
        return i - 2 * j - 3, 4 + j
    return i - 1, 3


def _custom(p, i, j):
    tab = p["table"]
    d, c = tab[i % len(tab)][j]
    return i - d, c


_FORMULAS = {
    "staircase": _staircase,
    "tiled": _tiled,
    "delayed": _delayed,
    "braided7": _braided7,
    "custom": _custom,
}


@dataclass(frozen=True, eq=False)
class InterleaverMap:
    """phi: virtual positions -> extended real positions, periodic with ``period``.

    :meth:`formula` evaluates phi in closed form for the named kinds;
    ``table[u][j] = (delta, col)`` encodes ``phi(nu*q + u, j) = (nu*q + u - delta, col)``
    and is built from the formula over the first period on first use.
    """

    kind: str
    params: dict
    widths: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in _FORMULAS:
            raise ValueError(f"unknown interleaver kind {self.kind!r}")

    @cached_property
    def table(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(
            tuple((u - s, c) for s, c in (self.formula(u, j) for j in range(w)))
            for u, w in enumerate(self.widths)
        )

    @cached_property
    def _inverse(self) -> tuple[dict[int, list[tuple[int, int]]], ...]:
        period = self.period
        inverse: list[dict[int, list[tuple[int, int]]]] = [defaultdict(list) for _ in self.widths]
        for u, row in enumerate(self.table):
            for j, (delta, col) in enumerate(row):
                inverse[(u - delta) % period][col].append((delta, j))
        return tuple(dict(d) for d in inverse)

    def formula(self, i: int, j: int) -> Position:
        return _FORMULAS[self.kind](self.params, i, j)

    @property
    def period(self) -> int:
        return len(self.widths)

    @cached_property
    def reach(self) -> int:
        """Largest backward row distance ``i - phi_1(i, j)`` over a period."""
        return max((d for row in self.table for d, _ in row), default=0)

    def __call__(self, i: int, j: int) -> Position:
        return phi(self, i, j)

    def inverse_offsets(self, i: int, col: int) -> list[tuple[int, int]]:
        """(row offset, virtual column) pairs of the copies of real position (i, col)."""
        return self._inverse[i % self.period].get(col, [])


def phi(imap: InterleaverMap, i: int, j: int) -> Position:
    if i < 0 or not 0 <= j < imap.widths[i % imap.period]:
        raise ValueError(f"({i}, {j}) is not a virtual position")
    return imap.formula(i, j)


def phi_inverse(imap: InterleaverMap, i: int, j: int) -> set[Position]:
    """Virtual positions that copy the real symbol at (i, j)."""
    if i >= 0 and j < imap.widths[i % imap.period]:
        return set()
    return {(i + d, jj) for d, jj in imap.inverse_offsets(i, j) if i + d >= 0}


def _uniform_code(code: BchCode, n: int, what: str) -> None:
    if code.n != n:
        raise ValueError(f"{what} needs a constituent code of length {n}, got {code.n}")


def make_staircase(m: int, code: BchCode) -> tuple[ZipperSpec, InterleaverMap]:
    """Staircase code with m x m blocks: phi(m*i + r, j) = (m*(i-1) + j, m + r)."""
    _uniform_code(code, 2 * m, "staircase")

    spec = ZipperSpec.uniform(code, m, period=m)
    return spec, InterleaverMap("staircase", {"m": m}, spec.virtual)


def make_tiled_diagonal(w: int, L: int, code: BchCode) -> tuple[ZipperSpec, InterleaverMap]:
    """Tiled diagonal map on w x w tiles with L virtual tiles per tile row."""
    _uniform_code(code, 2 * L * w, "tiled diagonal")

    spec = ZipperSpec.uniform(code, L * w, period=w)
    return spec, InterleaverMap("tiled", {"w": w, "L": L}, spec.virtual)


def make_delayed_diagonal(m: int, delta: int, code: BchCode) -> tuple[ZipperSpec, InterleaverMap]:
    """phi(i, j) = (i - j - delta, j + m)."""
    if delta < 1:
        raise ValueError("delay must be >= 1")
    _uniform_code(code, 2 * m, "delayed diagonal")
    spec = ZipperSpec.uniform(code, m)
    return spec, InterleaverMap("delayed", {"m": m, "delta": delta}, spec.virtual)


def make_braided7(code: BchCode | None = None) -> tuple[ZipperSpec, InterleaverMap]:
    """Rate-1/7 tightly braided block code with (7,4) Hamming rows."""
    if code is None:
        code = make_shortened_bch(3, 1, 7)
    _uniform_code(code, 7, "braided7")
    if code.k != 4:
        raise ValueError("braided7 needs the (7,4) Hamming code")

    spec = ZipperSpec((code, code), (3, 4))
    return spec, InterleaverMap("braided7", {}, spec.virtual)


def make_custom(spec: ZipperSpec, table: Sequence[Sequence[tuple[int, int]]]) -> InterleaverMap:
    """Map given by one period of (row offset, column) pairs per virtual position.

    ``table[u][j] = (delta, col)`` means phi(nu*q + u, j) = (nu*q + u - delta, col).
    """
    if len(table) != spec.period:
        raise ValueError(f"table has {len(table)} slots, spec period is {spec.period}")
    tab = tuple(tuple((int(d), int(c)) for d, c in row) for row in table)
    for u, row in enumerate(tab):
        if len(row) != spec.virtual[u]:
            raise ValueError(f"slot {u}: {len(row)} entries for {spec.virtual[u]} virtual positions")
        for j, (d, c) in enumerate(row):
            target = u - d
            if target >= 0 and not spec.m(target) <= c < spec.n(target):
                raise ValueError(f"phi({u}, {j}) = ({target}, {c}) is not a real position")
    return InterleaverMap("custom", {"table": tab}, spec.virtual)


def check_properties(
    imap: InterleaverMap, spec: ZipperSpec, horizon: int | None = None
) -> MapProperties:
    """Evaluate the map over rows [0, horizon) and report its structural flags."""
    nu, reach = imap.period, imap.reach
    if horizon is None:
        horizon = 3 * nu + 2 * reach
    images: dict[Position, Position] = {}
    for i in range(horizon):
        for j in range(spec.m(i)):
            images[(i, j)] = imap.formula(i, j)

    causal = all(s <= i for (i, _), (s, _) in images.items())
    strictly = all(s < i for (i, _), (s, _) in images.items())

    periodic = nu
    for (i, j), (s, c) in images.items():
        later = images.get((i + nu, j))
        if later is not None and later != (s + nu, c):
            periodic = None
            break

    preimages = Counter(v for v in images.values() if v[0] >= 0)
    bijective = all(cnt == 1 for cnt in preimages.values())
    if bijective:
        for a in range(max(0, horizon - reach)):
            for c in range(spec.m(a), spec.n(a)):
                if preimages.get((a, c), 0) != 1:
                    bijective = False
                    break
            if not bijective:
                break

    shared = Counter()
    for (i, _), (s, _) in images.items():
        if s >= 0:
            shared[(min(i, s), max(i, s))] += 1
    scattering = strictly and all(cnt <= 1 for cnt in shared.values())
    return MapProperties(causal, strictly, periodic, bijective, scattering)


class ZipperEncoder:
    """Streaming encoder: one full buffer row per call to :meth:`push`."""

    def __init__(self, spec: ZipperSpec, imap: InterleaverMap):
        props = check_properties(imap, spec)
        if not props.causal:
            raise ValueError("encoding requires a causal interleaver map")
        self.spec = spec
        self.imap = imap
        self.rows: dict[int, np.ndarray] = {}
        self.next_row = 0

    def push(self, info_bits) -> np.ndarray:
        i = self.next_row
        spec = self.spec
        code, m, k = spec.code(i), spec.m(i), spec.k(i)
        info = np.asarray(info_bits, dtype=np.uint8)
        if info.shape != (k - m,):
            raise ValueError(f"row {i} takes {k - m} message bits, got {info.shape}")
        msg = np.zeros(k, dtype=np.uint8)
        msg[m:] = info
        for j, (delta, col) in enumerate(self.imap.table[i % spec.period]):
            src = i - delta
            if src == i:
                msg[j] = msg[col]
            elif src >= 0:
                msg[j] = self.rows[src][col]
        row = encode_systematic(code, msg)
        self.rows[i] = row
        self.rows.pop(i - self.imap.reach - 1, None)
        self.next_row += 1
        return row


def _split_message(spec: ZipperSpec, message, num_rows: int | None, zero_rows) -> Iterable[np.ndarray]:
    bits = np.asarray(message, dtype=np.uint8).ravel()
    pos, i = 0, 0
    while num_rows is None or i < num_rows:
        width = spec.info_width(i)
        if zero_rows is not None and zero_rows(i):
            yield np.zeros(width, dtype=np.uint8)
        else:
            if num_rows is None and pos == bits.size:
                return
            if pos + width > bits.size:
                raise ValueError(f"message underrun at row {i}: need {width} bits, {bits.size - pos} left")
            yield bits[pos:pos + width]
            pos += width
        i += 1
    if pos != bits.size:
        raise ValueError(f"{bits.size - pos} message bits left over after {num_rows} rows")


def encode_buffer(
    spec: ZipperSpec,
    imap: InterleaverMap,
    message,
    num_rows: int | None = None,
    zero_rows: Callable[[int], bool] | None = None,
) -> list[np.ndarray]:
    """Encode ``message`` into full buffer rows (virtual + real).

    Without ``num_rows`` the message must split exactly into whole rows.
    Rows for which ``zero_rows(i)`` holds take all-zero information bits and
    consume no message bits.
    """
    enc = ZipperEncoder(spec, imap)
    out = []
    for info in _split_message(spec, message, num_rows, zero_rows):
        out.append(enc.push(info))
    return out


def encode_rows(spec, imap, message, num_rows=None, zero_rows=None) -> list[np.ndarray]:
    """Encode and return only the real (transmitted) part of each row."""
    full = encode_buffer(spec, imap, message, num_rows, zero_rows)
    return [row[spec.m(i):] for i, row in enumerate(full)]


def fill_received_buffer(spec: ZipperSpec, imap: InterleaverMap, real_rows) -> list[np.ndarray]:
    """Rebuild full rows from real rows by copying each virtual symbol from its source."""
    full = []
    for i, real in enumerate(real_rows):
        m = spec.m(i)
        row = np.zeros(spec.n(i), dtype=np.uint8)
        row[m:] = real
        for j, (delta, col) in enumerate(imap.table[i % spec.period]):
            src = i - delta
            if 0 <= src < i:
                row[j] = full[src][col]
            elif src == i:
                row[j] = row[col]
        full.append(row)
    return full


def code_rate(spec: ZipperSpec) -> Fraction:
    k = sum(c.k for c in spec.codes)
    n = sum(c.n for c in spec.codes)
    m = sum(spec.virtual)
    if n == m:
        raise ValueError("degenerate zipping pair: no real positions")
    return Fraction(k - m, n - m)
