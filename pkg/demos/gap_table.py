"""
Gap to the Shannon limit
========================

A zipper code reaching post-FEC BER 1e-15 at crossover probability p* is
compared with the best possible code of the same rate on the BSC.  The
comparison is made in dB at the channel's Q-function level.
"""

# %%
from fractions import Fraction

from zippercodes import code_rate, make_shortened_bch
from zippercodes.channel_sim import binary_entropy, gap_db, shannon_limit_p
from zippercodes.zipper_core import ZipperSpec

# %% [markdown]
# Rates first.  A uniform zipper code with virtual width m and (n, k) rows
# has rate (k - m) / (n - m).

# %%
rows = [(825, 11, 1650), (1200, 12, 2400), (1440, 12, 2880), (1800, 12, 3600)]
for m, degree, n in rows:
    code = make_shortened_bch(degree, 3, n)
    rate = code_rate(ZipperSpec.uniform(code, m))
    print(f"m={m:5d}  ({code.n},{code.k},t=3)  rate={rate} = {float(rate):.3f}")

# %% [markdown]
# The Shannon limit is the p at which the BSC capacity 1 - h(p) equals the
# rate.  It is found by bisection on the binary entropy.

# %%
for r in (0.96, 0.967, 0.97, 0.975, 0.98):
    p_sh = shannon_limit_p(r)
    print(f"R={r:.3f}  p_shannon={p_sh:.4e}  1-h(p)={1 - binary_entropy(p_sh):.6f}")

# %% [markdown]
# Thresholds measured at 1e-15 for tiled diagonal codes with w = 1.

# %%
measured = [(0.960, 2.68e-3), (0.970, 2.03e-3), (0.975, 1.63e-3), (0.980, 1.24e-3)]
print(f"{'rate':>6} {'p*':>10} {'gap dB':>7}")
for r, p_star in measured:
    print(f"{r:6.3f} {p_star:10.3e} {gap_db(p_star, r):7.3f}")

# %% [markdown]
# Larger tiles or delays at rate 0.967 move p* up and the gap down.

# %%
for label, p_star in [("w=1", 2.015e-3), ("tiled w=1000", 2.099e-3), ("delayed 334", 2.073e-3)]:
    print(f"{label:>13}: {gap_db(p_star, float(Fraction(967, 1000))):.3f} dB")
