"""Graph view of zipper codes: error graphs, peeling, stalls and floor estimates.

Vertices are buffer rows.  In the code graph an edge joins two rows that
share a symbol (a real symbol and its virtual copy).  An error pattern is a
set of real positions; each erroneous symbol becomes one edge between the
row holding it and the row holding its copy.  A genie-aided constituent
decoder acts on this graph as (t+1)-core peeling.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

from .zipper_core import InterleaverMap, ZipperSpec, check_properties

__all__ = [
    "CodeGraph",
    "ErrorGraph",
    "StallClass",
    "StallCensus",
    "FloorEstimate",
    "CliqueResult",
    "build_code_graph",
    "error_pattern_graph",
    "peel",
    "core_edges",
    "is_stall",
    "min_stall_size",
    "enumerate_cliques",
    "count_cycles4",
    "count_min_stalls_tiled",
    "count_min_stalls_delayed",
    "census_from_graph",
    "error_floor_bound",
    "to_dot",
]

Position = tuple[int, int]


@dataclass(frozen=True)
class CodeGraph:
    """Induced code graph on rows [row_lo, row_hi).

    ``symbols[(u, v)]`` (u < v) lists the real positions shared by rows u
    and v; its length is the edge multiplicity.
    """

    row_lo: int
    row_hi: int
    symbols: dict[tuple[int, int], tuple[Position, ...]]
    adjacency: dict[int, frozenset[int]] = field(repr=False)

    @property
    def vertices(self) -> range:
        return range(self.row_lo, self.row_hi)

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency.get(v, frozenset())

    def multiplicity(self, u: int, v: int) -> int:
        return len(self.symbols.get((min(u, v), max(u, v)), ()))

    def degree(self, v: int) -> int:
        """Degree counting parallel edges."""
        return sum(self.multiplicity(v, u) for u in self.neighbors(v))

    @property
    def max_multiplicity(self) -> int:
        return max((len(s) for s in self.symbols.values()), default=0)

    @property
    def is_simple(self) -> bool:
        return self.max_multiplicity <= 1

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.symbols)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.symbols.values())


@dataclass(frozen=True)
class ErrorGraph:
    """Graph of an error pattern.

    ``edges`` holds (u, v, position) with u the row of the real symbol and
    v the row of its copy.  Errors whose copy row lies outside the row range
    under consideration are kept as ``loose`` (row, position) half-edges:
    they still count toward the degree of their row, so that
    ``len(edges) + len(loose)`` is always the pattern size.
    """

    edges: tuple[tuple[int, int, Position], ...]
    loose: tuple[tuple[int, Position], ...] = ()

    @property
    def vertices(self) -> frozenset[int]:
        vs = {u for u, _, _ in self.edges} | {v for _, v, _ in self.edges}
        return frozenset(vs | {v for v, _ in self.loose})

    @property
    def size(self) -> int:
        return len(self.edges) + len(self.loose)

    def degrees(self) -> Counter:
        deg = Counter()
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        for v, _ in self.loose:
            deg[v] += 1
        return deg

    @property
    def positions(self) -> frozenset[Position]:
        return frozenset([p for _, _, p in self.edges] + [p for _, p in self.loose])

    def __bool__(self) -> bool:
        return self.size > 0


def build_code_graph(imap: InterleaverMap, spec: ZipperSpec, row_range: tuple[int, int]) -> CodeGraph:
    """Code graph induced on rows ``row_range = (lo, hi)``.

    A virtual symbol of row i copied from row s gives the edge {s, i};
    copies from negative rows (or from rows outside the range) are dropped.
    """
    lo, hi = row_range
    if lo < 0 or hi < lo:
        raise ValueError(f"bad row range {row_range}")
    syms: dict[tuple[int, int], list[Position]] = defaultdict(list)
    for i in range(lo, hi):
        for j in range(spec.m(i)):
            s, c = imap.formula(i, j)
            if s > i:
                raise ValueError("code graph needs a causal map")
            if lo <= s < hi:
                syms[(min(s, i), max(s, i))].append((s, c))
    adj: dict[int, set[int]] = defaultdict(set)
    for u, v in syms:
        adj[u].add(v)
        adj[v].add(u)
    return CodeGraph(
        lo, hi,
        {e: tuple(p) for e, p in sorted(syms.items())},
        {v: frozenset(ns) for v, ns in adj.items()},
    )


def error_pattern_graph(
    imap: InterleaverMap,
    spec: ZipperSpec,
    errors: Iterable[Position],
    row_range: tuple[int, int] | None = None,
    check_map: bool = True,
) -> ErrorGraph:
    """Graph G_S of the real error positions ``errors``.

    Each error (i, k) joins row i to the row of its copy.  If that row falls
    outside ``row_range`` the error is kept as a loose half-edge on row i.
    """
    if check_map:
        props = check_properties(imap, spec)
        if not (props.bijective and props.scattering):
            raise ValueError("error graphs need a bijective, scattering map (simple code graph)")
    edges, loose = [], []
    for pos in sorted(set(errors)):
        i, k = pos
        if i < 0 or not spec.m(i) <= k < spec.n(i):
            raise ValueError(f"{pos} is not a real position")
        copies = [i + d for d, _ in imap.inverse_offsets(i, k)]
        inside = [v for v in copies if row_range is None or row_range[0] <= v < row_range[1]]
        if inside:
            edges.append((i, inside[0], pos))
        else:
            loose.append((i, pos))
    return ErrorGraph(tuple(edges), tuple(loose))


def core_edges(edges: list[tuple[int, int]], t: int, loose: Iterable[int] = ()) -> list[int]:
    """Indices of ``edges`` that survive (t+1)-core peeling.

    ``loose`` lists rows carrying an extra half-edge each.  Plain-list fast
    path used by the Monte Carlo floor estimate.
    """
    deg = Counter()
    inc: dict[int, list[int]] = defaultdict(list)
    for e, (u, v) in enumerate(edges):
        deg[u] += 1
        deg[v] += 1
        inc[u].append(e)
        inc[v].append(e)
    for v in loose:
        deg[v] += 1
    alive = [True] * len(edges)
    gone = set()
    queue = deque(v for v in deg if deg[v] <= t)
    while queue:
        v = queue.popleft()
        if v in gone:
            continue
        gone.add(v)
        for e in inc[v]:
            if alive[e]:
                alive[e] = False
                u = edges[e][0] if edges[e][1] == v else edges[e][1]
                deg[u] -= 1
                if deg[u] == t and u not in gone:
                    queue.append(u)
    return [e for e, a in enumerate(alive) if a]


def peel(graph: ErrorGraph, t: int, rng: random.Random | None = None) -> ErrorGraph:
    """Residual (t+1)-core after repeatedly removing rows of degree <= t.

    With ``rng`` the next row to remove is drawn at random among the
    removable ones; the result does not depend on this order.
    """
    deg = graph.degrees()
    edges = list(graph.edges)
    loose = list(graph.loose)
    removed: set[int] = set()
    while True:
        low = sorted(v for v, d in deg.items() if d <= t and v not in removed)
        if not low:
            break
        v = rng.choice(low) if rng is not None else low[0]
        removed.add(v)
        keep = []
        for e in edges:
            if v in (e[0], e[1]):
                other = e[1] if e[0] == v else e[0]
                deg[other] -= 1
            else:
                keep.append(e)
        edges = keep
        loose = [h for h in loose if h[0] != v]
        del deg[v]
    return ErrorGraph(tuple(edges), tuple(loose))


def is_stall(graph: ErrorGraph, t: int) -> bool:
    deg = graph.degrees()
    return bool(deg) and min(deg.values()) >= t + 1


def min_stall_size(t: int, b: int = 1) -> int:
    """Smallest possible stall size with at most b parallel edges per row pair."""
    if t < 1 or b < 1:
        raise ValueError("need t >= 1 and b >= 1")
    if b == 1:
        return (t + 1) * (t + 2) // 2
    # the bound may be a half-integer; stall sizes are integers
    return math.ceil((1 + math.ceil((t + 1) / b)) * (t + 1) / 2)


@dataclass(frozen=True)
class CliqueResult:
    cliques: tuple[tuple[int, ...], ...]
    count: int
    truncated: bool


def enumerate_cliques(
    graph: CodeGraph,
    size: int,
    cap: int | None = 100_000,
    anchors: Iterable[int] | None = None,
    keep: bool = True,
) -> CliqueResult:
    """All cliques with ``size`` vertices, each listed in increasing order.

    ``anchors`` restricts the smallest vertex.  Stops after ``cap`` cliques
    and sets ``truncated``.  With ``keep=False`` only the count is kept.
    """
    if size < 1:
        raise ValueError("clique size must be positive")
    later = {v: sorted(u for u in graph.neighbors(v) if u > v) for v in graph.vertices}
    found: list[tuple[int, ...]] = []
    count = 0
    truncated = False

    def extend(clique: list[int], cands: list[int]) -> bool:
        nonlocal count
        if len(clique) == size:
            count += 1
            if keep:
                found.append(tuple(clique))
            return cap is not None and count >= cap
        need = size - len(clique)
        for idx, v in enumerate(cands):
            if len(cands) - idx < need:
                break
            nbrs = graph.neighbors(v)
            nxt = [u for u in cands[idx + 1:] if u in nbrs]
            clique.append(v)
            stop = extend(clique, nxt)
            clique.pop()
            if stop:
                return True
        return False

    roots = graph.vertices if anchors is None else sorted(set(anchors))
    for v in roots:
        if v not in later:
            continue
        if extend([v], later[v]):
            truncated = True
            break
    return CliqueResult(tuple(found), count, truncated)


def count_cycles4(graph: CodeGraph) -> int:
    """Number of 4-cycles (as vertex sets with their cyclic order) in a simple graph."""
    total = 0
    for u in graph.vertices:
        common = Counter()
        for x in graph.neighbors(u):
            for w in graph.neighbors(x):
                if w > u:
                    common[w] += 1
        total += sum(c * (c - 1) // 2 for c in common.values())
    # each cycle is seen once from each of its two diagonals
    return total // 2


def count_min_stalls_tiled(L: int, K: int, w: int, t: int) -> tuple[int, int]:
    """Exact and approximate number of minimum-size stalls in a wK-row window.

    Exact: sum_{s=t}^{L-1} C(s, t)(K - s - 1) w^(t+2); approximation
    C(L, t+1) K w^(t+2).  Both are 0 once L <= t.
    """
    if min(L, K, w) < 1 or t < 1:
        raise ValueError("L, K, w and t must be positive")
    if L <= t:
        return 0, 0
    exact = sum(math.comb(s, t) * max(K - s - 1, 0) for s in range(t, L)) * w ** (t + 2)
    return exact, math.comb(L, t + 1) * K * w ** (t + 2)


def count_min_stalls_delayed(m: int, delta: int, t: int, M: int = 1) -> tuple[bool, int, int]:
    """(exists, per-anchor count C(m - t*delta + t, t+1), M * per-anchor)."""
    if delta < 1 or m < 1 or t < 1:
        raise ValueError("m, delta and t must be positive")
    exists = delta * t <= m - 1
    top = m - t * delta + t
    per_anchor = math.comb(top, t + 1) if top >= t + 1 else 0
    return exists, per_anchor, M * per_anchor


@dataclass(frozen=True)
class StallClass:
    size: int
    count: int
    exact: bool = True


@dataclass(frozen=True)
class StallCensus:
    """Stall sizes and multiplicities for an M-row window of m-bit rows.

    ``bits`` overrides the window size M*m used to normalise the floor.
    """

    classes: tuple[StallClass, ...]
    M: int
    m: int
    t: int
    bits: int | None = None

    def __post_init__(self):
        lmin = min_stall_size(self.t)
        for c in self.classes:
            if not lmin <= c.size <= self.window_bits:
                raise ValueError(f"stall size {c.size} outside [{lmin}, {self.window_bits}]")
            if c.count < 0:
                raise ValueError("negative stall count")

    @property
    def window_bits(self) -> int:
        return self.bits if self.bits is not None else self.M * self.m


@dataclass(frozen=True)
class FloorEstimate:
    bound: float
    dominant_term: float
    dominant_size: int
    dominant_ber: float


def census_from_graph(graph: CodeGraph, t: int, M: int, m: int, cycles4: bool = False, cap: int | None = None) -> StallCensus:
    """Minimum-size class from (t+2)-clique enumeration, plus 4-cycles for t = 1.

    The window size is the number of edges of ``graph``.
    """
    if not graph.is_simple:
        raise ValueError("census needs a simple code graph")
    res = enumerate_cliques(graph, t + 2, cap=cap, keep=False)
    classes = [StallClass(min_stall_size(t), res.count, not res.truncated)]
    if cycles4:
        if t != 1:
            raise ValueError("4-cycles are stalls only for t = 1")
        classes.append(StallClass(4, count_cycles4(graph)))
    return StallCensus(tuple(c for c in classes if c.count), M, m, t, bits=graph.num_edges)


def error_floor_bound(census: StallCensus, p: float) -> FloorEstimate:
    """Union-bound floor sum_l l N_l p^l / (M m) and its dominant term.

    ``dominant_term`` is N_l* p^l* for the l* maximising N_l p^l;
    ``dominant_ber`` is that class's share of the bound.
    """
    if not census.classes:
        raise ValueError("empty stall census")
    if not 0.0 < p < 0.5:
        raise ValueError(f"p={p} outside (0, 1/2)")
    logp = math.log(p)

    def log_term(c: StallClass) -> float:
        return math.log(c.count) + c.size * logp if c.count else -math.inf

    bits = census.window_bits
    bound = sum(c.size * math.exp(log_term(c)) for c in census.classes) / bits
    best = max(census.classes, key=lambda c: (log_term(c), -c.size))
    term = math.exp(log_term(best))
    return FloorEstimate(bound, term, best.size, best.size * term / bits)


def to_dot(graph: CodeGraph | ErrorGraph, t: int | None = None, name: str = "zipper") -> str:
    """Graphviz DOT text.  For error graphs with ``t`` given, the peel residual is drawn bold red."""
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    if isinstance(graph, CodeGraph):
        for v in graph.vertices:
            lines.append(f'  {v} [label="{v}"];')
        for (u, v), syms in graph.symbols.items():
            for pos in syms:
                lines.append(f'  {u} -- {v} [label="{pos[0]},{pos[1]}"];')
    else:
        core = peel(graph, t) if t is not None else ErrorGraph(())
        hot_v = core.vertices
        hot_e = {p for _, _, p in core.edges}
        for v in sorted(graph.vertices):
            style = ", color=red, penwidth=2" if v in hot_v else ""
            lines.append(f'  {v} [label="{v}"{style}];')
        for u, v, pos in graph.edges:
            style = ", color=red, penwidth=2" if pos in hot_e else ""
            lines.append(f'  {u} -- {v} [label="{pos[0]},{pos[1]}"{style}];')
        for v, pos in graph.loose:
            lines.append(f'  loose_{pos[0]}_{pos[1]} [shape=point];')
            lines.append(f'  {v} -- loose_{pos[0]}_{pos[1]} [style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
