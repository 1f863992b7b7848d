"""
Error floor from stall counts
=============================

For a small delayed diagonal code with t = 1 the floor is dominated by
triangles in the code graph.  The union bound over triangles and 4-cycles is
compared with a direct simulation of the genie decoder's fixed point.
"""

# %%
import numpy as np

from zippercodes.galois_bch import make_shortened_bch
from zippercodes.stall_analysis import build_code_graph, census_from_graph, core_edges, error_floor_bound
from zippercodes.zipper_core import make_delayed_diagonal

# %%
m, delta, M = 8, 2, 40
spec, im = make_delayed_diagonal(m, delta, make_shortened_bch(5, 1, 16))
graph = build_code_graph(im, spec, (0, M))
edges = graph.edges()
census = census_from_graph(graph, 1, M, m, cycles4=True)
for c in census.classes:
    print(f"size {c.size}: {c.count} patterns")
print("window bits:", census.window_bits)

# %% [markdown]
# Bound and dominant term over a few crossover probabilities.

# %%
for p in (1e-3, 2e-3, 5e-3, 1e-2):
    est = error_floor_bound(census, p)
    print(f"p={p:.0e}  bound={est.bound:.3e}  dominant size {est.dominant_size}: {est.dominant_ber:.3e}")

# %% [markdown]
# Simulation at p = 5e-3: draw the number of errors per window, place them,
# and peel.  Windows with fewer than three errors cannot stall.

# %%
p, windows = 5e-3, 2 * 10**6
rng = np.random.default_rng(3)
counts = rng.binomial(len(edges), p, size=windows)
left = stalled = 0
for c in counts[counts >= 3]:
    idx = rng.choice(len(edges), size=int(c), replace=False)
    core = core_edges([edges[e] for e in idx], 1)
    left += len(core)
    stalled += bool(core)
measured = left / (windows * len(edges))
est = error_floor_bound(census, p)
print(f"measured {measured:.3e}  bound {est.bound:.3e}  dominant {est.dominant_ber:.3e}")

# %% [markdown]
# Residual bits come in whole stalls, so the relative spread of the
# measurement is about one over the square root of the stall count.

# %%
print(f"{stalled} stalled windows, relative spread ~ {1 / np.sqrt(stalled):.1%}")
