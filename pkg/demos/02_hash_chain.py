"""
Blocks and the header chain
===========================

A synthetic chain: each block carries a Merkle root over its transactions and
the hash of the previous header.  The 88-byte headers alone are enough to
check any block a peer hands us.
"""

from dataclasses import replace

from sefcodes import ChainGenConfig, SizeModel, generate_chain
from sefcodes.hashchain import bitcoin_like_histogram, dump_chain, parse_chain, validate_header_chain

chain = generate_chain(ChainGenConfig(n_blocks=50, size_model=SizeModel.uniform(200, 2000), txs_per_block=(1, 4), rng_seed=1))
print(f"{chain.height} blocks, {chain.size} bytes, largest block {chain.max_block_size} bytes")
print("header chain valid:", validate_header_chain(chain.headers))

# Serialization round-trips byte for byte, and parsing re-verifies every link.
raw = dump_chain(chain)
again = parse_chain(raw)
print("round trip identical:", dump_chain(again) == raw)

# Tamper with one transaction and the Merkle check fails.
blk = chain.blocks[7]
forged = replace(blk, txs=(b"x" + blk.txs[0][1:],) + blk.txs[1:])
print("block 7 consistent:", blk.is_consistent(), "| tampered:", forged.is_consistent())

# Block sizes can follow an empirical histogram shaped like a real chain.
model = SizeModel.from_histogram(bitcoin_like_histogram(4000))
print(f"bitcoin-like size model: mean {model.mean():.0f} bytes, max {model.max_size}")
