"""Instance generators shared by the codec tests and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from oracles import classical_peel, to_int
from sefcodes.codec import Droplet, EpochView, combine, encode_droplet, is_consistent
from sefcodes.epoch import EpochConfig, epoch_view
from sefcodes.hashchain import ChainGenConfig, SizeModel
from sefcodes.sim import chain_for_epochs
from sefcodes.soliton import SolitonParams, robust_soliton


@lru_cache(maxsize=None)
def view_for(k: int, Ls: int | None = None, seed: int = 0) -> EpochView:
    cfg = EpochConfig(k, 1, 0, Ls)
    chain = chain_for_epochs(ChainGenConfig(0, SizeModel.uniform(24, 160), (1, 3), seed), cfg, 1)
    return epoch_view(chain, cfg, 0)


@lru_cache(maxsize=None)
def pmf_for(k: int):
    for c in (0.1, 0.03, 0.3, 0.01):
        try:
            return robust_soliton(SolitonParams(k, c, 0.5))
        except Exception:
            continue
    raise AssertionError(k)


@dataclass
class Instance:
    view: EpochView
    droplets: list[Droplet]
    clear: list[bool]  # parallel to droplets; True for honestly generated ones


def murky(view: EpochView, rng: np.random.Generator) -> Droplet:
    """A droplet whose data disagrees with its own neighbor vector."""
    k = view.k
    while True:
        d = encode_droplet(view, pmf_for(k), rng)
        if rng.random() < 0.5:
            data = bytearray(d.data)
            for _ in range(int(rng.integers(1, 4))):
                data[int(rng.integers(len(data)))] ^= int(rng.integers(1, 256))
            d = Droplet(d.epoch, k, d.neighbors, bytes(data))
        else:
            deg = int(rng.integers(1, min(k, 4) + 1))
            nbrs = tuple(sorted(rng.choice(k, deg, replace=False).tolist()))
            d = Droplet(d.epoch, k, nbrs, d.data)
        if not is_consistent(d, view.super_blocks):
            return d


def opaque(view: EpochView, rng: np.random.Generator) -> Droplet:
    """Consistent but unhelpful: low-index, low-degree combinations."""
    hi = max(1, min(view.k, 3))
    deg = int(rng.integers(1, hi + 1))
    return combine(view, sorted(rng.choice(hi, deg, replace=False).tolist()))


def make_instance(k: int, sigma: float, rng: np.random.Generator, Ls: int | None = None,
                  overhead: tuple[float, float] = (1.0, 1.5)) -> Instance:
    view = view_for(k, Ls)
    n_clear = int(k * rng.uniform(*overhead))
    n_adv = int(round(n_clear * sigma / (1 - sigma)))
    items = [(encode_droplet(view, pmf_for(k), rng), True) for _ in range(n_clear)]
    for _ in range(n_adv):
        items.append((murky(view, rng) if rng.random() < 0.7 else opaque(view, rng), False))
    order = rng.permutation(len(items))
    items = [items[i] for i in order]
    return Instance(view, [d for d, _ in items], [c for _, c in items])


def classical_ok(inst: Instance) -> bool:
    rows = [(d.neighbors, to_int(d.data)) for d, c in zip(inst.droplets, inst.clear) if c]
    return all(v is not None for v in classical_peel(rows, inst.view.k))
