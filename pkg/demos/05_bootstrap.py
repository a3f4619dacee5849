"""
Bootstrapping against a hostile network
=======================================

A fresh node contacts random peers until it can decode every sealed epoch.
A fifth of the peers hand out corrupted droplets; they cost extra contacts
but never a wrong block.  Downloading only the droplets the decoder still
needs trims the bandwidth overhead.
"""

from sefcodes import ChainGenConfig, EpochConfig, NetworkConfig, SizeModel, measure_bootstrap_cost
from sefcodes.sim import ChainContext, chain_for_epochs

ecfg = EpochConfig(k=200, s=1, tau=0)
chain = chain_for_epochs(ChainGenConfig(0, SizeModel.fixed(4000), (1, 2), 3), ecfg, 1)
ctx = ChainContext(chain, ecfg)

for sigma in (0.0, 0.2):
    cfg = NetworkConfig(N=1000, epoch_cfg=ecfg, sigma=sigma, c=0.1, delta=0.5, trials=40, rng_seed=5)
    rep = measure_bootstrap_cost(ctx, cfg)
    print(f"sigma={sigma}: honest nodes K99 = {rep.k_hat:.0f}, mean contacted {rep.mean_nodes:.1f}, "
          f"overhead {rep.mean_overhead:.1%}")

lazy = measure_bootstrap_cost(ctx, NetworkConfig(N=1000, epoch_cfg=ecfg, c=0.1, trials=40, rng_seed=5), mode="as_needed")
print(f"as-needed download: overhead {lazy.mean_overhead:.1%}")

rs = measure_bootstrap_cost(ctx, NetworkConfig(N=3000, epoch_cfg=ecfg, scheme="random_sampling", trials=40, rng_seed=5))
print(f"random sampling baseline: mean {rs.mean_cost:.0f} nodes")
