"""
Choosing (c, delta)
===================

The robust soliton has two knobs.  A small sweep over them, scored by the
99th percentile of honest nodes needed, shows which pair to deploy.
"""

from sefcodes import ChainGenConfig, EpochConfig, NetworkConfig, SizeModel, sweep
from sefcodes.sim import SweepGrid, chain_for_epochs

gen = ChainGenConfig(0, SizeModel.fixed(128), (1, 2), 0)


def chain_for(k, s):
    return chain_for_epochs(gen, EpochConfig(k, s, tau=0), 1)


grid = SweepGrid(ks=((100, 1),), cs=(0.03, 0.1, 0.3), deltas=(0.1, 0.5))
base = NetworkConfig(N=600, epoch_cfg=EpochConfig(100, 1, tau=0), trials=50, rng_seed=1)
rep = sweep(grid, base, chain_for)
for row in rep.rows:
    print(f"c={row['c']:<5} delta={row['delta']:<4} K99={row['k_hat']:>5} mean={row['mean_cost']:.1f}")
best = rep.best()[0]
print(f"best: c={best['c']}, delta={best['delta']}")
print(rep.summary_csv().splitlines()[0])
