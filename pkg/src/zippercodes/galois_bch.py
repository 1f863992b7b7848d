"""Binary extension fields and shortened binary BCH codes.

Polynomials over GF(2) are Python ints (bit i is the coefficient of x^i).
Field elements of GF(2^d) are ints in [0, 2^d) using the polynomial basis.
Codewords are ``uint8`` numpy arrays holding one bit per entry.

Codeword layout (systematic): positions ``0..k-1`` carry the message and
``k..n-1`` the parity.  As a polynomial, message bit ``p`` is the
coefficient of ``x^(r+p)`` and parity bit ``k+q`` the coefficient of
``x^q``, so ``c(x) = x^r m(x) + (x^r m(x) mod g(x))``.  Shortening fixes
the coefficients of ``x^n .. x^(N-1)`` to zero, i.e. it removes the
highest-index information positions of the parent code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "DEFAULT_PRIMITIVE_POLYNOMIALS",
    "GaloisField",
    "BchCode",
    "DecodeOutcome",
    "build_field",
    "bch_generator",
    "make_shortened_bch",
    "encode_systematic",
    "syndromes",
    "locate_errors",
    "decode_bounded",
    "decode_genie",
]

# x^2+x+1, x^3+x+1, x^4+x+1, x^5+x^2+1, ... (minimal-weight primitive polynomials)
DEFAULT_PRIMITIVE_POLYNOMIALS = {
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def poly_mul(a: int, b: int) -> int:
    """Carry-less product of two GF(2) polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, b: int) -> int:
    """Remainder of ``a`` divided by ``b`` over GF(2)."""
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


@dataclass(frozen=True, eq=False)
class GaloisField:
    """GF(2^degree) with log/antilog tables.

    ``antilog[e]`` is alpha^e for ``0 <= e < 2*order`` (doubled so that sums
    of two logs index directly); ``log[x]`` is defined for nonzero ``x``.
    """

    degree: int
    primitive_polynomial: int
    log: np.ndarray = field(repr=False)
    antilog: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        """Multiplicative group order, 2^degree - 1."""
        return (1 << self.degree) - 1

    @property
    def size(self) -> int:
        return 1 << self.degree

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.antilog[self.log[a] + self.log[b]])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^%d)" % self.degree)
        if a == 0:
            return 0
        return int(self.antilog[(self.log[a] - self.log[b]) % self.order])

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return int(self.antilog[(int(self.log[a]) * e) % self.order])

    def alpha_pow(self, e: int) -> int:
        return int(self.antilog[e % self.order])


def build_field(degree: int, primitive_polynomial: int | None = None) -> GaloisField:
    """Build GF(2^degree), using the built-in primitive polynomial by default."""
    if not 2 <= degree <= 16:
        raise ValueError(f"field degree must be in [2, 16], got {degree}")
    poly = DEFAULT_PRIMITIVE_POLYNOMIALS[degree] if primitive_polynomial is None else int(primitive_polynomial)
    if poly.bit_length() - 1 != degree:
        raise ValueError(f"polynomial {poly:#x} has degree {poly.bit_length() - 1}, expected {degree}")
    order = (1 << degree) - 1
    antilog = np.zeros(2 * order, dtype=np.int64)
    log = np.full(1 << degree, -1, dtype=np.int64)
    x = 1
    for e in range(order):
        if log[x] != -1:
            raise ValueError(
                f"polynomial {poly:#x} is not primitive: x has order {e}, not {order}"
            )
        antilog[e] = x
        log[x] = e
        x <<= 1
        if x >> degree:
            x ^= poly
    if x != 1:
        # x^order != 1 means the polynomial is reducible with x not a unit root
        raise ValueError(f"polynomial {poly:#x} is not primitive")
    antilog[order:] = antilog[:order]
    antilog.setflags(write=False)
    log.setflags(write=False)
    return GaloisField(degree, poly, log, antilog)


def cyclotomic_coset(i: int, order: int) -> list[int]:
    coset, c = [], i % order
    while c not in coset:
        coset.append(c)
        c = (2 * c) % order
    return coset


def minimal_polynomial(gf: GaloisField, i: int) -> int:
    """Minimal polynomial of alpha^i over GF(2), as a bitmask."""
    coeffs = [1]  # coefficients in GF(2^d), lowest degree first
    for c in cyclotomic_coset(i, gf.order):
        root = gf.alpha_pow(c)
        nxt = [0] * (len(coeffs) + 1)
        for d, a in enumerate(coeffs):
            nxt[d + 1] ^= a
            nxt[d] ^= gf.mul(a, root)
        coeffs = nxt
    if any(a not in (0, 1) for a in coeffs):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return sum(a << d for d, a in enumerate(coeffs))


def bch_generator(gf: GaloisField, t: int) -> int:
    """Narrow-sense BCH generator: lcm of the minimal polynomials of alpha^1..alpha^2t."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if 2 * t >= gf.order:
        raise ValueError(f"t={t} too large for GF(2^{gf.degree})")
    g, seen = 1, set()
    for i in range(1, 2 * t + 1):
        rep = min(cyclotomic_coset(i, gf.order))
        if rep not in seen:
            seen.add(rep)
            g = poly_mul(g, minimal_polynomial(gf, i))
    return g


@dataclass(frozen=True, eq=False)
class BchCode:
    """A shortened t-error-correcting binary BCH code of length ``n``."""

    field: GaloisField
    t: int
    n: int
    k: int
    generator: int
    parity_matrix: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    @property
    def parent_n(self) -> int:
        return self.field.order

    @property
    def shortening(self) -> int:
        return self.parent_n - self.n

    @property
    def r(self) -> int:
        return self.n - self.k

    def __repr__(self) -> str:
        return f"BchCode(n={self.n}, k={self.k}, t={self.t}, GF(2^{self.field.degree}))"

    def position_of_degree(self, e: int) -> int:
        return self.k + e if e < self.r else e - self.r


def make_shortened_bch(
    degree: int, t: int, n: int, primitive_polynomial: int | None = None
) -> BchCode:
    gf = build_field(degree, primitive_polynomial)
    g = bch_generator(gf, t)
    r = g.bit_length() - 1
    if not 0 < n <= gf.order:
        raise ValueError(f"length n={n} outside (0, {gf.order}]")
    k = n - r
    if k < 1:
        raise ValueError(f"n={n} leaves no information positions (parity bits r={r})")
    # row p = x^(r+p) mod g, as r coefficient bits
    P = np.zeros((k, r), dtype=np.uint8)
    rem = g ^ (1 << r)
    for p in range(k):
        for q in range(r):
            P[p, q] = (rem >> q) & 1
        rem <<= 1
        if rem >> r:
            rem ^= g
    P.setflags(write=False)
    degrees = np.concatenate([np.arange(r, n), np.arange(r)]).astype(np.int64)
    degrees.setflags(write=False)
    return BchCode(gf, t, n, k, g, P, degrees)


def encode_systematic(code: BchCode, message) -> np.ndarray:
    """Return ``[message | parity]``; accepts a 1-D message or a 2-D batch."""
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape[-1] != code.k:
        raise ValueError(f"message length {msg.shape[-1]} != k={code.k}")
    parity = (msg.astype(np.int64) @ code.parity_matrix) & 1
    return np.concatenate([msg, parity.astype(np.uint8)], axis=-1)


def syndromes(code: BchCode, word) -> list[int]:
    """S_1..S_2t of ``word`` as field elements."""
    w = np.asarray(word)
    if w.shape != (code.n,):
        raise ValueError(f"word length {w.shape} != ({code.n},)")
    degs = code.degrees[np.flatnonzero(w)]
    if degs.size == 0:
        return [0] * (2 * code.t)
    js = np.arange(1, 2 * code.t + 1)[:, None]
    vals = code.field.antilog[(js * degs[None, :]) % code.field.order]
    return [int(v) for v in np.bitwise_xor.reduce(vals, axis=1)]


def _berlekamp_massey(gf: GaloisField, S: list[int]) -> list[int]:
    """Shortest LFSR connection polynomial (lowest degree first) for S."""
    C, B = [1], [1]
    L, shift, b = 0, 1, 1
    for i, s in enumerate(S):
        d = s
        for j in range(1, L + 1):
            if j < len(C) and C[j] and S[i - j]:
                d ^= gf.mul(C[j], S[i - j])
        if d == 0:
            shift += 1
            continue
        coef = gf.div(d, b)
        T = list(C)
        need = len(B) + shift
        if len(C) < need:
            C = C + [0] * (need - len(C))
        for j, bj in enumerate(B):
            if bj:
                C[j + shift] ^= gf.mul(coef, bj)
        if 2 * L <= i:
            L, B, b, shift = i + 1 - L, T, d, 1
        else:
            shift += 1
    del C[L + 1:]
    return C


def locate_errors(code: BchCode, word) -> np.ndarray | None:
    """Bounded-distance decoding; returns the positions to flip, or None on failure."""
    S = syndromes(code, word)
    if not any(S):
        return np.zeros(0, dtype=np.int64)
    gf = code.field
    locator = _berlekamp_massey(gf, S)
    L = len(locator) - 1
    if L > code.t or L == 0 or locator[L] == 0:
        return None
    # Chien search over the unshortened degrees 0..n-1: root alpha^-e <=> error at degree e
    e = np.arange(code.n, dtype=np.int64)
    acc = np.ones(code.n, dtype=np.int64)
    for l in range(1, L + 1):
        if locator[l]:
            acc ^= gf.antilog[(int(gf.log[locator[l]]) - l * e) % gf.order]
    roots = np.flatnonzero(acc == 0)
    if roots.size != L:
        return None
    r = code.r
    positions = np.where(roots < r, roots + code.k, roots - r)
    positions.sort()
    fixed = np.array(word, dtype=np.uint8, copy=True)
    fixed[positions] ^= 1
    if any(syndromes(code, fixed)):
        return None
    return positions


class DecodeOutcome(NamedTuple):
    """A successful decode: the codeword and the positions flipped to reach it."""

    codeword: np.ndarray
    positions: np.ndarray

    @property
    def flips(self) -> int:
        return int(self.positions.size)


def decode_bounded(code: BchCode, word) -> DecodeOutcome | None:
    """Syndrome / Berlekamp-Massey / Chien decoding. ``None`` signals failure.

    May miscorrect toward another codeword within distance t of ``word``.
    """
    w = np.asarray(word, dtype=np.uint8)
    if w.shape != (code.n,):
        raise ValueError(f"word length {w.shape} != ({code.n},)")
    pos = locate_errors(code, w)
    if pos is None:
        return None
    out = w.copy()
    out[pos] ^= 1
    return DecodeOutcome(out, pos)


def decode_genie(code: BchCode, word, truth, check_truth: bool = True) -> DecodeOutcome | None:
    """Miscorrection-free decoder: returns ``truth`` iff it lies within distance t."""
    w = np.asarray(word, dtype=np.uint8)
    tr = np.asarray(truth, dtype=np.uint8)
    if w.shape != (code.n,) or tr.shape != (code.n,):
        raise ValueError("word and truth must both have length n")
    if check_truth and any(syndromes(code, tr)):
        raise ValueError("truth is not a codeword")
    pos = np.flatnonzero(w != tr)
    if pos.size > code.t:
        return None
    return DecodeOutcome(tr.copy(), pos)
