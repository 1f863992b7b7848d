"""
Genie decoding as graph peeling
===============================

A genie-aided row decoder fixes a row exactly when it holds at most t
errors.  On the error graph that is removal of vertices of degree <= t, so
the decoder's fixed point is the (t+1)-core.
"""

# %%
from zippercodes.galois_bch import make_shortened_bch
from zippercodes.stall_analysis import error_pattern_graph, is_stall, peel, to_dot
from zippercodes.window_decoder import genie_residual
from zippercodes.zipper_core import make_delayed_diagonal

# %% [markdown]
# Delayed diagonal code with m = 12, delta = 2 and t = 2 rows.  The real
# symbol (a, k) is copied into row a + (k - m) + delta, so an error there is
# an edge between those two rows.

# %%
m, delta = 12, 2
spec, im = make_delayed_diagonal(m, delta, make_shortened_bch(5, 2, 24))
pairs = [(1, 3), (1, 6), (1, 8), (3, 6), (3, 8), (6, 8), (4, 6)]
errors = [(a, m + b - a - delta) for a, b in pairs]
graph = error_pattern_graph(im, spec, errors)
print("rows:", sorted(graph.vertices), " edges:", graph.size)
print("degrees:", dict(sorted(graph.degrees().items())))

# %% [markdown]
# Row 4 holds one error and is cleaned; rows 1, 3, 6, 8 form a 4-clique of
# degree-3 rows, which no t = 2 decoder can touch.

# %%
core = peel(graph, 2)
print("residual rows:", sorted(core.vertices), " stall:", is_stall(core, 2))

# %% [markdown]
# The same pattern through the sliding-window decoder in genie mode.

# %%
left = genie_residual(spec, im, 12, errors)
print("window decoder leaves", sorted(left))
print("same as peeling:", left == core.positions)

# %%
print(to_dot(graph, t=2, name="example"))
