"""
Degree distributions
====================

Every droplet XORs together a random number of blocks.  That number is drawn
from a soliton distribution: the ideal one is optimal in expectation but fragile in
practice, the robust one adds a little mass at low degrees plus a spike near
k/R so that the peeling decoder rarely stalls.
"""

import numpy as np

from sefcodes import SolitonParams, ideal_soliton, robust_soliton
from sefcodes.soliton import sample_degrees

k = 1000
ideal = ideal_soliton(k)
robust = robust_soliton(SolitonParams(k, c=0.03, delta=0.5))

# The first few probabilities side by side.
for d in (1, 2, 3, 4, 10):
    print(f"d={d:<3} ideal {ideal.pmf(d):.5f}  robust {robust.pmf(d):.5f}")

# The spike sits near k / R, and beta is the normalizer.
print(f"R = {robust.R:.3f}, spike at d = {robust.spike}, beta = {robust.beta:.4f}")
print(f"mean degree: ideal {ideal.mean():.2f}, robust {robust.mean():.2f}")

# Sampling is a cdf lookup; the empirical histogram tracks the pmf.
rng = np.random.default_rng(0)
draws = sample_degrees(robust, rng, 100_000)
print("empirical P(d=1):", np.mean(draws == 1).round(4), "vs", round(robust.pmf(1), 4))

# Parameters that push the spike outside [1, k] are refused up front.
try:
    robust_soliton(SolitonParams(10, c=0.03, delta=0.5))
except ValueError as exc:
    print("rejected:", exc)
