"""
Counting minimum stall patterns
===============================

With a scattering map the code graph is simple and a minimum stall pattern
is a (t+2)-clique.  Closed forms count them for tiled and delayed diagonal
maps; here they are checked against brute-force enumeration and swept over
the delay.
"""

# %%
import math

from zippercodes.galois_bch import make_shortened_bch
from zippercodes.stall_analysis import (
    build_code_graph,
    count_min_stalls_delayed,
    count_min_stalls_tiled,
    enumerate_cliques,
    min_stall_size,
)
from zippercodes.zipper_core import make_delayed_diagonal, make_tiled_diagonal

# %% [markdown]
# Minimum sizes: (t+1)(t+2)/2 edges, the edge count of a (t+2)-clique.

# %%
print({t: min_stall_size(t) for t in (1, 2, 3, 4)})

# %% [markdown]
# Delayed diagonal, m = 12, t = 2.  Rows i < j are adjacent when
# delta <= j - i <= m + delta - 1, so cliques anchored at row 0 live in
# [0, m + delta).

# %%
m, t = 12, 2
code = make_shortened_bch(5, t, 2 * m)
print(f"{'delta':>5} {'brute':>6} {'formula':>8}")
for delta in range(1, m + 1):
    spec, im = make_delayed_diagonal(m, delta, code)
    graph = build_code_graph(im, spec, (0, m + delta))
    brute = enumerate_cliques(graph, t + 2, cap=None, anchors=[0], keep=False).count
    print(f"{delta:5d} {brute:6d} {count_min_stalls_delayed(m, delta, t)[1]:8d}")

# %% [markdown]
# At m = 1000 and t = 3 minimum stalls vanish once 3 delta >= m.

# %%
for delta in (1, 100, 200, 300, 333, 334):
    exists, per, _ = count_min_stalls_delayed(1000, delta, 3)
    print(f"delta={delta:4d}  per anchor = {per:.4g}  exists = {exists}")
print("C(1000, 4) =", math.comb(1000, 4))

# %% [markdown]
# Tiled diagonal with w = 2, L = 4: the exact count over a window of K
# tile rows against enumeration, and the cruder C(L, t+1) K w^(t+2).

# %%
w, L, t = 2, 4, 1
spec, im = make_tiled_diagonal(w, L, make_shortened_bch(5, t, 2 * w * L))
for K in range(2, 9):
    graph = build_code_graph(im, spec, (0, w * K))
    brute = enumerate_cliques(graph, t + 2, cap=None, keep=False).count
    exact, approx = count_min_stalls_tiled(L, K, w, t)
    print(f"K={K}  brute={brute:4d}  exact={exact:4d}  approx={approx:4d}")
