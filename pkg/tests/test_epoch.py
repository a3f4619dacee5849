import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sefcodes.codec import decode
from sefcodes.epoch import (
    EpochConfig,
    NodeStore,
    concatenate_blocks,
    epoch_header_groups,
    epoch_view,
    group_headers,
    load_snapshot,
    reencode_tier,
    sealable_epochs,
    seal_all,
    seal_epoch,
    slot_neighbors,
    storage_savings,
    store_snapshot,
)
from sefcodes.errors import ConfigError, InsufficientDroplets, NotFinalizedError
from sefcodes.hashchain import HEADER_SIZE, ChainGenConfig, SizeModel, generate_chain, make_block
from sefcodes.soliton import SolitonParams, ideal_soliton, robust_soliton


def fixed_chain(n, payload=200, seed=0):
    return generate_chain(ChainGenConfig(n, SizeModel.fixed(payload), (1, 3), seed))


def test_default_tau():
    assert EpochConfig(10, 1).tau == 550


@pytest.mark.parametrize("kw", [dict(k=0, s=1), dict(k=1, s=0), dict(k=1, s=1, tau=-1), dict(k=1, s=1, Ls=10)])
def test_epoch_config_validation(kw):
    with pytest.raises(ConfigError):
        EpochConfig(**kw)


def _blocks_of_size(sizes):
    out, prev = [], None
    for sz in sizes:
        b = make_block([bytes(sz - HEADER_SIZE - 8)], prev)
        assert b.size == sz
        out.append(b)
        prev = b.header
    return out


def test_greedy_concatenation():
    mb = 1_000_000
    sbs = concatenate_blocks(_blocks_of_size([400_000] * 3), mb)
    assert [sb.count for sb in sbs] == [2, 1]
    sbs = concatenate_blocks(_blocks_of_size([1000] * 4), 1000)
    assert [sb.count for sb in sbs] == [1, 1, 1, 1]
    with pytest.raises(ConfigError):
        concatenate_blocks(_blocks_of_size([1000, 2000]), 1500)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.integers(400, 3000))
def test_concatenation_is_a_partition(seed, Ls):
    chain = generate_chain(ChainGenConfig(40, SizeModel.uniform(20, 300), (1, 3), seed))
    sbs = concatenate_blocks(chain.blocks, Ls)
    assert b"".join(sb.data for sb in sbs) == b"".join(b.serialize() for b in chain.blocks)
    assert [h for sb in sbs for h in sb.headers] == chain.headers
    L = chain.max_block_size
    for sb in sbs[:-1]:
        assert Ls - L < sb.size <= Ls
    assert [(g.start, g.headers) for g in group_headers(chain.headers, Ls)] == [(sb.start, sb.headers) for sb in sbs]


def test_seal_k4_s2():
    cfg = EpochConfig(4, 2, tau=3)
    chain = fixed_chain(7)
    pmf = ideal_soliton(4)
    store = seal_epoch(NodeStore(0, 11, cfg), chain, pmf)
    assert len(store.droplets(0)) == 2
    assert store.tail == list(chain.blocks[4:])
    assert store.header_chain == chain.headers
    with pytest.raises(NotFinalizedError):
        seal_epoch(store, chain, pmf)


def test_premature_seal():
    cfg = EpochConfig(4, 1, tau=3)
    with pytest.raises(NotFinalizedError):
        seal_epoch(NodeStore(0, 1, cfg), fixed_chain(6), ideal_soliton(4))


def test_seal_is_reproducible_and_seed_dependent():
    cfg = EpochConfig(16, 4, tau=0)
    chain = fixed_chain(32)
    pmf = robust_soliton(SolitonParams(16, 0.1, 0.5))
    a = seal_all(NodeStore(0, 5, cfg), chain, pmf)
    b = seal_all(NodeStore(0, 5, cfg), chain, pmf)
    c = seal_all(NodeStore(1, 6, cfg), chain, pmf)
    assert a.all_droplets() == b.all_droplets()
    assert [d.neighbors for d in a.all_droplets()] != [d.neighbors for d in c.all_droplets()]


def test_same_vectors_across_epochs():
    cfg = EpochConfig(16, 4, tau=0)
    store = seal_all(NodeStore(0, 42, cfg), fixed_chain(48), robust_soliton(SolitonParams(16, 0.1, 0.5)))
    vecs = [[d.neighbors for d in store.droplets(e)] for e in range(3)]
    assert vecs[0] == vecs[1] == vecs[2]
    assert vecs[0] == [slot_neighbors(42, 16, j, store.cfg and robust_soliton(SolitonParams(16, 0.1, 0.5))) for j in range(4)]


def test_sealable_with_concatenation_keeps_last_open():
    chain = fixed_chain(30, payload=100)
    cfg = EpochConfig(5, 1, tau=0, Ls=400)  # 2 blocks per super-block
    assert sealable_epochs(chain.headers, cfg) == 2  # 15 super-blocks, last one open
    v = epoch_view(chain, cfg, 1)
    assert all(len(g) == 2 for g in v.groups)


def test_fixed_size_gamma_exact():
    cfg = EpochConfig(10, 1, tau=0)
    store = seal_all(NodeStore(0, 3, cfg), fixed_chain(100), ideal_soliton(10))
    assert storage_savings(store).gamma == 10.0
    cfg = EpochConfig(20, 4, tau=0, Ls=fixed_chain(1).max_block_size)
    store = seal_all(NodeStore(0, 3, cfg), fixed_chain(100), ideal_soliton(20))
    assert storage_savings(store).gamma == 5.0


def test_concatenation_improves_gamma():
    from sefcodes.hashchain import bitcoin_like_histogram

    model = SizeModel.from_histogram(bitcoin_like_histogram(2000))
    k = 100
    pmf = robust_soliton(SolitonParams(k, 0.1, 0.5))
    chain = generate_chain(ChainGenConfig(3000, model, (1, 4), 1))
    L = chain.max_block_size
    pad = storage_savings(seal_all(NodeStore(0, 1, EpochConfig(k, 1, 0)), chain, pmf)).gamma
    cat = storage_savings(seal_all(NodeStore(0, 1, EpochConfig(k, 1, 0, 10 * L)), chain, pmf)).gamma
    assert pad < 0.85 * k
    assert cat > 0.93 * k > pad


def _network_decoder(chain, cfg, pmf, n_nodes=60):
    stores = [seal_all(NodeStore(i, 1000 + i, cfg), chain, pmf) for i in range(n_nodes)]

    def decode_fn(e):
        groups = epoch_header_groups(chain.headers, cfg, e)
        out = decode([d for st_ in stores for d in st_.droplets(e)], groups)
        if not out.success:
            raise InsufficientDroplets(f"epoch {e}")
        return out.blocks

    return decode_fn


def test_reencode_tier():
    small = EpochConfig(4, 2, tau=0)
    big = EpochConfig(8, 1, tau=0)
    chain = fixed_chain(8)
    pmf4, pmf8 = ideal_soliton(4), robust_soliton(SolitonParams(8, 0.3, 0.5))
    store = seal_all(NodeStore(0, 9, small), chain, pmf4)
    assert storage_savings(store).gamma == 2.0
    reencode_tier(store, 0, big, pmf8, _network_decoder(chain, small, pmf4))
    assert list(store.records) == [(8, 0)]
    assert len(store.droplets(0, k=8)) == 1
    assert storage_savings(store).gamma == 8.0

    # a bucket decoding only long-epoch droplets gets the original blocks back
    others = [reencode_tier(seal_all(NodeStore(i, 50 + i, small), chain, pmf4), 0, big, pmf8,
                            _network_decoder(chain, small, pmf4)) for i in range(40)]
    groups = epoch_header_groups(chain.headers, big, 0)
    out = decode([d for s in others for d in s.droplets(0, k=8)], groups)
    assert out.success
    assert out.blocks == [b.serialize() for b in chain.blocks]


def test_reencode_tier_errors():
    small = EpochConfig(4, 2, tau=0)
    chain = fixed_chain(8)
    pmf4 = ideal_soliton(4)
    store = seal_all(NodeStore(0, 9, small), chain, pmf4)
    with pytest.raises(ConfigError):
        reencode_tier(store, 0, EpochConfig(6, 1, tau=0), ideal_soliton(6), lambda e: [])
    with pytest.raises(InsufficientDroplets):
        reencode_tier(store, 0, EpochConfig(8, 1, tau=0), ideal_soliton(8), _network_decoder(chain, small, pmf4, 1))
    assert (4, 0) in store.records


def test_snapshot_roundtrip(tmp_path):
    cfg = EpochConfig(8, 2, tau=3)
    chain = fixed_chain(30)
    store = seal_all(NodeStore(7, 77, cfg), chain, ideal_soliton(8))
    p = tmp_path / "n.snap"
    store_snapshot(store, p, extra={"hello": 1})
    back, manifest = load_snapshot(p)
    assert manifest["spec"] == {"hello": 1}
    assert back.records == store.records
    assert back.header_chain == store.header_chain
    assert back.tail == store.tail
    assert back.cfg == cfg and back.next_epoch == store.next_epoch
    p2 = tmp_path / "m.snap"
    store_snapshot(back, p2, extra={"hello": 1})
    assert p.read_bytes() == p2.read_bytes()


def test_variable_s_per_node():
    chain = fixed_chain(16)
    pmf = ideal_soliton(16)
    sizes = [len(seal_all(NodeStore(i, i, EpochConfig(16, s, tau=0)), chain, pmf).droplets(0)) for i, s in enumerate((1, 3, 5))]
    assert sizes == [1, 3, 5]
    assert np.isclose(storage_savings(seal_all(NodeStore(0, 0, EpochConfig(16, 4, tau=0)), chain, pmf)).gamma, 4.0)
