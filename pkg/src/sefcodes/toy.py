"""The six-block, nine-droplet peeling walkthrough as a reusable fixture.

Neighbor sets (1-based, as drawn)::

    c1 {3,5,6}   c2 {1,3,4}*  c3 {1,4}   c4 {3}    c5 {1,6}
    c6 {3,6}*    c7 {2,5}     c8 {3,6}   c9 {2,4,6}

``*`` marks the murky droplets.  Under lowest-block-first selection the
decoder accepts c4, rejects c6, accepts c8, c5, rejects c2, then accepts
c3, c9 and c1 (c1 and c7 tie on block 5; c1 arrived first).
"""

from __future__ import annotations

from dataclasses import dataclass

from .codec import Droplet, EpochView, combine
from .hashchain import Chain, ChainGenConfig, SizeModel, generate_chain

TOY_K = 6
TOY_NEIGHBORS = (
    (3, 5, 6),
    (1, 3, 4),
    (1, 4),
    (3,),
    (1, 6),
    (3, 6),
    (2, 5),
    (3, 6),
    (2, 4, 6),
)
TOY_MURKY = (2, 6)
TOY_EXPECTED_ACCEPTS = (4, 8, 5, 3, 9, 1)
TOY_EXPECTED_REJECTS = (6, 2)


@dataclass(frozen=True)
class ToyFixture:
    chain: Chain
    epoch: EpochView
    droplets: tuple[Droplet, ...]  # c1..c9 in order
    murky: tuple[int, ...]  # 1-based labels


def _corrupt(d: Droplet) -> Droplet:
    data = bytearray(d.data)
    for i in range(0, len(data), 7):
        data[i] ^= 0xA5
    return Droplet(d.epoch, d.k, d.neighbors, bytes(data))


def toy_fixture(payload_size: int = 256, seed: int = 6) -> ToyFixture:
    chain = generate_chain(ChainGenConfig(TOY_K, SizeModel.fixed(payload_size), (1, 3), seed))
    epoch = EpochView(
        0,
        tuple(b.serialize() for b in chain.blocks),
        tuple((b.header,) for b in chain.blocks),
    )
    droplets = []
    for label, nbrs in enumerate(TOY_NEIGHBORS, start=1):
        d = combine(epoch, [m - 1 for m in nbrs])
        if label in TOY_MURKY:
            d = _corrupt(d)
        droplets.append(d)
    return ToyFixture(chain, epoch, tuple(droplets), TOY_MURKY)


def toy_network(fx: ToyFixture | None = None):
    """The walkthrough as a 9-node network, node i holding droplet c(i+1)."""
    from .epoch import EpochConfig, EpochRecord, NodeStore
    from .sim import ChainContext, Network, NetworkConfig, SimNode
    from .soliton import ideal_soliton

    fx = toy_fixture() if fx is None else fx
    ecfg = EpochConfig(TOY_K, 1, tau=0)
    ctx = ChainContext(fx.chain, ecfg)
    n = len(fx.droplets)
    cfg = NetworkConfig(N=n, epoch_cfg=ecfg, sigma=len(fx.murky) / n, degree="ideal")
    nodes = []
    for i, d in enumerate(fx.droplets):
        store = NodeStore(i, i, ecfg, header_chain=ctx.headers, tail=list(ctx.tail), next_epoch=1)
        store.records[(TOY_K, 0)] = EpochRecord(TOY_K, 0, 0, TOY_K, fx.epoch.size, [d])
        nodes.append(SimNode(i, "murky" if i + 1 in fx.murky else "honest", i, 1, store))
    return Network(ctx, cfg, nodes, ideal_soliton(TOY_K))
