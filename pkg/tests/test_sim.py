import math

import pytest

from oracles import harmonic
from sefcodes.codec import is_consistent
from sefcodes.epoch import EpochConfig
from sefcodes.errors import ConfigError
from sefcodes.hashchain import ChainGenConfig, SizeModel
from sefcodes.sim import (
    ChainContext,
    NetworkConfig,
    SweepGrid,
    bootstrap,
    bootstrap_as_needed,
    bribery_attack,
    build_network,
    chain_for_epochs,
    measure_bootstrap_cost,
    random_sampling_baseline,
    run_trials,
    sweep,
)
from sefcodes.toy import toy_network

GEN = ChainGenConfig(0, SizeModel.fixed(256), (1, 3), 4)


def ctx_for(k, s=1, epochs=1, tau=0, Ls=None, gen=GEN):
    ecfg = EpochConfig(k, s, tau, Ls)
    return ChainContext(chain_for_epochs(gen, ecfg, epochs), ecfg)


@pytest.fixture(scope="module")
def ctx200():
    return ctx_for(200)


def test_config_validation_and_roundtrip():
    ecfg = EpochConfig(10, 1, 0)
    with pytest.raises(ConfigError):
        NetworkConfig(N=5, epoch_cfg=ecfg, sigma=1.0)
    with pytest.raises(ConfigError):
        NetworkConfig(N=5, epoch_cfg=ecfg, adversary_mix={"murky": 0.5})
    with pytest.raises(ConfigError):
        NetworkConfig(N=5, epoch_cfg=ecfg, adversary_mix={"sneaky": 1.0})
    with pytest.raises(ConfigError):
        NetworkConfig(N=0, epoch_cfg=ecfg)
    cfg = NetworkConfig(N=5, epoch_cfg=ecfg, sigma=0.2, adversary_mix={"murky": 0.5, "silent": 0.5}, node_s=(1, 2))
    assert NetworkConfig.from_dict(cfg.to_dict()) == cfg


def test_honest_network(ctx200):
    net = build_network(ctx200, NetworkConfig(N=50, epoch_cfg=ctx200.epoch_cfg))
    sbs = ctx200.views[0].super_blocks
    assert net.roles() == {"honest": 50}
    assert all(is_consistent(d, sbs) for i in range(50) for d in net.respond(i))


def test_murky_count(ctx200):
    net = build_network(ctx200, NetworkConfig(N=101, epoch_cfg=ctx200.epoch_cfg, sigma=0.5))
    sbs = ctx200.views[0].super_blocks
    bad = [i for i in range(101) if not all(is_consistent(d, sbs) for d in net.respond(i))]
    # sigma * N is rounded half-up
    assert len(bad) == math.floor(101 * 0.5 + 0.5) == net.roles()["murky"]


def test_opaque_nodes(ctx200):
    net = build_network(ctx200, NetworkConfig(N=40, epoch_cfg=ctx200.epoch_cfg, sigma=0.5, adversary_mix={"opaque": 1}))
    sbs = ctx200.views[0].super_blocks
    for i, node in enumerate(net.nodes):
        if node.role == "opaque":
            for d in net.respond(i):
                assert is_consistent(d, sbs) and d.neighbors == (0,)


def test_degenerate_epoch():
    ctx = ctx_for(1)
    r = bootstrap(build_network(ctx, NetworkConfig(N=3, epoch_cfg=ctx.epoch_cfg, degree="ideal")), rng=0)
    assert r.success and r.nodes_contacted == 1


def test_toy_network():
    r = bootstrap(toy_network(), order=range(9))
    assert r.success and r.rejections == 2
    assert r.nodes_contacted == 8 and r.honest_contacted == 6


def test_multi_epoch_with_tail_and_concatenation():
    gen = ChainGenConfig(0, SizeModel.uniform(50, 400), (1, 3), 9)
    ctx = ctx_for(30, 1, epochs=2, tau=7, Ls=1200, gen=gen)
    assert ctx.n_epochs == 2 and len(ctx.tail) >= 7
    cfg = NetworkConfig(N=200, epoch_cfg=ctx.epoch_cfg, c=0.1, sigma=0.2)
    r = bootstrap(build_network(ctx, cfg, 3), rng=3, keep_blocks=True)
    assert r.success and r.tail_ok and r.header_chain_ok
    for view, got in zip(ctx.views, r.recovered):
        assert got == list(view.super_blocks)


def test_silent_majority_header_chain():
    ctx = ctx_for(20)
    cfg = NetworkConfig(N=60, epoch_cfg=ctx.epoch_cfg, c=0.1, sigma=0.8, adversary_mix={"silent": 0.5, "murky": 0.5})
    r = bootstrap(build_network(ctx, cfg, 1), rng=1)
    assert r.header_chain_ok


def test_sigma_scaling(ctx200):
    base = NetworkConfig(N=800, epoch_cfg=ctx200.epoch_cfg, c=0.1, sigma=0.1, trials=30, rng_seed=5)
    res = run_trials(ctx200, base)
    assert all(r.success for r in res)
    ratio = sum(r.nodes_contacted for r in res) / sum(r.honest_contacted for r in res)
    assert 1.05 < ratio < 1.18


def test_as_needed_accounting(ctx200):
    cfg = NetworkConfig(N=600, epoch_cfg=ctx200.epoch_cfg, c=0.1, sigma=0.1)
    for seed in range(3):
        bulk = bootstrap(build_network(ctx200, cfg, seed), "bulk", seed)
        lazy = bootstrap_as_needed(build_network(ctx200, cfg, seed), seed)
        assert bulk.success and lazy.success
        assert lazy.nodes_contacted == bulk.nodes_contacted
        assert lazy.overhead < bulk.overhead
        assert lazy.droplets_downloaded == 200 + lazy.rejections


def test_bulk_downloads_at_least_the_chain(ctx200):
    r = bootstrap(build_network(ctx200, NetworkConfig(N=500, epoch_cfg=ctx200.epoch_cfg, c=0.1), 2), rng=2)
    assert r.success and r.bytes_downloaded >= r.bytes_blockchain and r.overhead > 0


def test_random_sampling():
    ctx = ctx_for(100)
    cfg = NetworkConfig(N=2000, epoch_cfg=ctx.epoch_cfg, scheme="random_sampling", trials=200, rng_seed=1)
    rep = measure_bootstrap_cost(ctx, cfg)
    target = 100 * harmonic(100)
    assert abs(rep.mean_cost - target) / target < 0.1
    one = ctx_for(20, 20)
    r = random_sampling_baseline(one, NetworkConfig(N=5, epoch_cfg=one.epoch_cfg), seed=0)
    assert r.success and r.nodes_contacted == 1


def test_bribery(ctx200):
    cfg = NetworkConfig(N=400, epoch_cfg=ctx200.epoch_cfg, c=0.1)
    net = build_network(ctx200, cfg, 0)
    assert bribery_attack(net, 0) is net
    holders = net.singleton_counts()
    attacked = bribery_attack(net, len(holders))
    assert sum(n.role == "silent" for n in attacked.nodes) == len(holders)
    assert not bootstrap(attacked, rng=0).success
    oblivious = NetworkConfig(N=400, epoch_cfg=ctx200.epoch_cfg, c=0.1, sigma=len(holders) / 400,
                              adversary_mix={"silent": 1.0})
    assert sum(bootstrap(build_network(ctx200, oblivious, s), rng=s).success for s in range(5)) >= 4
    everyone = bribery_attack(net, 10**6)
    assert not bootstrap(everyone, rng=0).success
    via_mix = build_network(ctx200, NetworkConfig(N=400, epoch_cfg=ctx200.epoch_cfg, c=0.1, sigma=len(holders) / 400,
                                                  adversary_mix={"singleton_bribery": 1.0}), 0)
    assert not bootstrap(via_mix, rng=0).success


def test_cost_lower_bound(ctx200):
    for s in (1, 4):
        ctx = ctx200 if s == 1 else ctx_for(200, 4)
        rep = measure_bootstrap_cost(ctx, NetworkConfig(N=500, epoch_cfg=ctx.epoch_cfg, c=0.1, trials=20))
        assert rep.success_rate == 1
        assert rep.min_cost >= math.ceil(200 / s)
        assert rep.k_hat >= math.ceil(200 / s)


def test_trials_are_reproducible_and_parallel_safe(ctx200):
    cfg = NetworkConfig(N=400, epoch_cfg=ctx200.epoch_cfg, c=0.1, sigma=0.2, trials=4, rng_seed=3)
    a = [r.to_dict() for r in run_trials(ctx200, cfg)]
    b = [r.to_dict() for r in run_trials(ctx200, cfg, workers=2)]
    assert a == b


def test_per_node_s():
    ctx = ctx_for(60, 2)
    cfg = NetworkConfig(N=100, epoch_cfg=ctx.epoch_cfg, c=0.1, node_s=(1, 3))
    net = build_network(ctx, cfg, 0)
    assert [len(net.respond(i)) for i in range(4)] == [1, 3, 1, 3]
    assert bootstrap(net, rng=0).success


def test_sweep_report():
    chains = {}

    def chain_for(k, s):
        if k not in chains:
            chains[k] = chain_for_epochs(GEN, EpochConfig(k, s, 0), 1)
        return chains[k]

    base = NetworkConfig(N=600, epoch_cfg=EpochConfig(50, 1, 0), trials=20, rng_seed=2)
    grid = SweepGrid(ks=((50, 1), (100, 2)), cs=(0.1, 0.3), deltas=(0.5,), schemes=("sef", "random_sampling"))
    rep = sweep(grid, base, chain_for)
    assert len(rep.rows) == 2 * 2 + 2
    assert all(r["optimal"] == 50 for r in rep.rows)
    best = rep.best()
    assert len(best) == 4
    sef = {r["k"]: r for r in best if r["scheme"] == "sef"}
    rs = {r["k"]: r for r in best if r["scheme"] == "random_sampling"}
    for k in (50, 100):
        assert rs[k]["k_hat"] > sef[k]["k_hat"] >= 50
    assert rep.summary_csv() == sweep(grid, base, chain_for).summary_csv()
    head = rep.trials_csv().splitlines()[0].split(",")
    assert head == ["experiment_id", "k", "s", "c", "delta", "sigma", "mode", "trial", "nodes_contacted",
                    "honest_contacted", "bytes_down", "overhead", "success"]


def test_overhead_shrinks_with_k():
    gen = ChainGenConfig(0, SizeModel.fixed(4000), (1, 2), 1)
    means = []
    for k in (50, 400):
        ctx = ctx_for(k, gen=gen)
        rep = measure_bootstrap_cost(ctx, NetworkConfig(N=3 * k, epoch_cfg=ctx.epoch_cfg, c=0.1, trials=15, rng_seed=k))
        means.append(rep.mean_overhead)
    assert means[1] < means[0]
