"""
Sealing epochs and storage savings
==================================

A node waits until k blocks are final, encodes them into s droplets and then
drops the blocks.  With fixed-size blocks the saving is exactly k/s.  With
uneven blocks, zero padding to the largest block wastes space; packing blocks
into super-blocks of about Ls bytes wins most of it back.
"""

from sefcodes import ChainGenConfig, EpochConfig, NodeStore, SizeModel, SolitonParams, generate_chain
from sefcodes import robust_soliton, seal_all, storage_savings
from sefcodes.hashchain import bitcoin_like_histogram

k, s = 100, 2
pmf = robust_soliton(SolitonParams(k, 0.1, 0.5))

fixed = generate_chain(ChainGenConfig(400, SizeModel.fixed(1000), (1, 3), 0))
store = seal_all(NodeStore(node_id=0, seed=11, cfg=EpochConfig(k, s, tau=0)), fixed, pmf)
print(f"fixed-size blocks: {len(store.records)} epochs sealed, gamma = {storage_savings(store).gamma:.2f}")

chain = generate_chain(ChainGenConfig(3000, SizeModel.from_histogram(bitcoin_like_histogram(2000)), (1, 4), 1))
L = chain.max_block_size
for label, Ls in (("zero padding", None), ("super-blocks, Ls = 10 L", 10 * L)):
    st = seal_all(NodeStore(0, 11, EpochConfig(k, 1, tau=0, Ls=Ls)), chain, pmf)
    print(f"{label:<24} gamma = {storage_savings(st).gamma:6.1f} of {k}")
