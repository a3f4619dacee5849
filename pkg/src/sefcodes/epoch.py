"""Epoch lifecycle for a droplet node.

Blocks are greedily packed into super-blocks of at most ``Ls`` bytes, every
``k`` consecutive super-blocks form an epoch, and once an epoch is ``tau``
blocks deep the node replaces it by ``s`` droplets.  The degree and
neighbors of droplet slot ``j`` come from an RNG stream keyed on
``(node seed, k, j)`` so the same choice recurs in every epoch.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .codec import Droplet, EpochView, choose_neighbors, combine, dump_droplets, parse_droplets
from .errors import ConfigError, NotFinalizedError, ParseError
from .hashchain import HEADER_SIZE, Block, Chain, Header, dump_chain, parse_chain
from .soliton import DegreePmf


@dataclass(frozen=True)
class EpochConfig:
    k: int
    s: int
    tau: int = 550  # finality depth; desk-scale runs pass 0
    Ls: int | None = None  # None: one block per super-block

    def __post_init__(self):
        if self.k < 1 or self.s < 1 or self.tau < 0:
            raise ConfigError(f"need k >= 1, s >= 1, tau >= 0 (got k={self.k}, s={self.s}, tau={self.tau})")
        if self.Ls is not None and self.Ls < HEADER_SIZE:
            raise ConfigError(f"Ls={self.Ls} cannot hold even a header")

    @property
    def gamma(self) -> float:
        return self.k / self.s


@dataclass(frozen=True)
class SuperBlock:
    start: int  # chain index of the first block
    headers: tuple[Header, ...]
    data: bytes | None = None

    @property
    def count(self) -> int:
        return len(self.headers)

    @property
    def size(self) -> int:
        return sum(HEADER_SIZE + h.payload_size for h in self.headers)


def _pack(sizes: Sequence[int], Ls: int | None) -> list[tuple[int, int]]:
    """Greedy packing of item sizes into (start, count) runs of at most Ls."""
    if Ls is None:
        return [(i, 1) for i in range(len(sizes))]
    runs = []
    start, fill = 0, 0
    for i, sz in enumerate(sizes):
        if sz > Ls:
            raise ConfigError(f"block {i} of {sz} bytes exceeds Ls={Ls}")
        if i > start and fill + sz > Ls:
            runs.append((start, i - start))
            start, fill = i, 0
        fill += sz
    if len(sizes) > start:
        runs.append((start, len(sizes) - start))
    return runs


def concatenate_blocks(blocks: Sequence[Block], Ls: int | None) -> list[SuperBlock]:
    runs = _pack([b.size for b in blocks], Ls)
    return [
        SuperBlock(
            start,
            tuple(b.header for b in blocks[start : start + n]),
            b"".join(b.serialize() for b in blocks[start : start + n]),
        )
        for start, n in runs
    ]


def group_headers(headers: Sequence[Header], Ls: int | None) -> list[SuperBlock]:
    """Super-block layout recovered from the header-chain alone."""
    runs = _pack([HEADER_SIZE + h.payload_size for h in headers], Ls)
    return [SuperBlock(start, tuple(headers[start : start + n])) for start, n in runs]


def _closed_count(n_super: int, Ls: int | None) -> int:
    # with concatenation the newest super-block may still grow
    return n_super if Ls is None else max(0, n_super - 1)


def sealable_epochs(headers: Sequence[Header], cfg: EpochConfig) -> int:
    """Number of leading epochs that are complete and tau blocks deep."""
    sbs = group_headers(headers, cfg.Ls)
    closed = _closed_count(len(sbs), cfg.Ls)
    n = 0
    while (n + 1) * cfg.k <= closed:
        last = sbs[(n + 1) * cfg.k - 1]
        if len(headers) < last.start + last.count + cfg.tau:
            break
        n += 1
    return n


def epoch_view(chain: Chain | Sequence[Block], cfg: EpochConfig, index: int) -> EpochView:
    blocks = chain.blocks if isinstance(chain, Chain) else chain
    sbs = concatenate_blocks(blocks, cfg.Ls)
    part = sbs[index * cfg.k : (index + 1) * cfg.k]
    if len(part) != cfg.k:
        raise NotFinalizedError(f"epoch {index} has only {len(part)} of {cfg.k} super-blocks")
    return EpochView(index, tuple(sb.data for sb in part), tuple(sb.headers for sb in part))


def epoch_views(chain: Chain, cfg: EpochConfig) -> list[EpochView]:
    """Views of every sealable epoch of ``chain``."""
    n = sealable_epochs(chain.headers, cfg)
    sbs = concatenate_blocks(chain.blocks, cfg.Ls)
    return [
        EpochView(e, tuple(sb.data for sb in sbs[e * cfg.k : (e + 1) * cfg.k]),
                  tuple(sb.headers for sb in sbs[e * cfg.k : (e + 1) * cfg.k]))
        for e in range(n)
    ]


def epoch_header_groups(headers: Sequence[Header], cfg: EpochConfig, index: int, k: int | None = None):
    k = cfg.k if k is None else k
    sbs = group_headers(headers, cfg.Ls)
    part = sbs[index * k : (index + 1) * k]
    if len(part) != k:
        raise NotFinalizedError(f"epoch {index} not covered by the header-chain")
    return tuple(sb.headers for sb in part)


def slot_rng(seed: int, k: int, slot: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k, slot)))


def slot_neighbors(seed: int, k: int, slot: int, pmf: DegreePmf) -> tuple[int, ...]:
    return choose_neighbors(k, pmf, slot_rng(seed, k, slot))


def encode_epoch(seed: int, view: EpochView, s: int, pmf: DegreePmf) -> list[Droplet]:
    """The s droplets a node with private coins ``seed`` stores for ``view``."""
    return [combine(view, slot_neighbors(seed, view.k, j, pmf)) for j in range(s)]


@dataclass
class EpochRecord:
    k: int
    index: int
    first_block: int
    n_blocks: int
    chain_bytes: int
    droplets: list[Droplet]

    @property
    def droplet_bytes(self) -> int:
        return sum(len(d.data) for d in self.droplets)

    @property
    def vector_bytes(self) -> int:
        return sum(d.vector_size for d in self.droplets)


@dataclass
class NodeStore:
    node_id: int
    seed: int
    cfg: EpochConfig
    records: dict[tuple[int, int], EpochRecord] = field(default_factory=dict)
    header_chain: list[Header] = field(default_factory=list)
    tail: list[Block] = field(default_factory=list)
    next_epoch: int = 0

    def droplets(self, epoch: int, k: int | None = None) -> list[Droplet]:
        return self.records[(self.cfg.k if k is None else k, epoch)].droplets

    @property
    def sealed_blocks(self) -> int:
        return max((r.first_block + r.n_blocks for r in self.records.values()), default=0)

    def all_droplets(self) -> list[Droplet]:
        return [d for key in sorted(self.records) for d in self.records[key].droplets]


def seal_epoch(store: NodeStore, chain: Chain, pmf: DegreePmf, cfg: EpochConfig | None = None) -> NodeStore:
    """Encode the node's next epoch into s droplets and drop its raw blocks."""
    cfg = store.cfg if cfg is None else cfg
    e = store.next_epoch
    if sealable_epochs(chain.headers, cfg) <= e:
        raise NotFinalizedError(f"epoch {e} is not complete and {cfg.tau} blocks deep at height {chain.height}")
    if pmf.k != cfg.k:
        raise ConfigError(f"pmf support {pmf.k} does not match k={cfg.k}")
    view = epoch_view(chain, cfg, e)
    first = view.groups[0][0]
    first_block = _index_of(chain, first, store.sealed_blocks)
    n_blocks = sum(len(g) for g in view.groups)
    droplets = encode_epoch(store.seed, view, cfg.s, pmf)
    store.records[(cfg.k, e)] = EpochRecord(cfg.k, e, first_block, n_blocks, view.size, droplets)
    store.next_epoch = e + 1
    store.header_chain = chain.headers
    store.tail = list(chain.blocks[first_block + n_blocks :])
    return store


def _index_of(chain: Chain, header: Header, hint: int) -> int:
    if hint < chain.height and chain.blocks[hint].header == header:
        return hint
    for i, b in enumerate(chain.blocks):
        if b.header == header:
            return i
    raise ValueError("header not on chain")


def seal_all(store: NodeStore, chain: Chain, pmf: DegreePmf) -> NodeStore:
    n = sealable_epochs(chain.headers, store.cfg)
    while store.next_epoch < n:
        seal_epoch(store, chain, pmf)
    store.header_chain = chain.headers
    if not store.records:
        store.tail = list(chain.blocks)
    return store


def reencode_tier(
    store: NodeStore,
    long_index: int,
    big_cfg: EpochConfig,
    pmf: DegreePmf,
    decode_fn: Callable[[int], Sequence[bytes]],
) -> NodeStore:
    """Replace the small epochs spanned by long epoch ``long_index`` with
    ``big_cfg.s`` droplets over all of their super-blocks.

    ``decode_fn(e)`` must return the k1 super-blocks of small epoch ``e``
    (the node bootstraps them like a bucket); it raises
    :class:`InsufficientDroplets` when it cannot.
    """
    k1, k2 = store.cfg.k, big_cfg.k
    if k2 % k1 or big_cfg.Ls != store.cfg.Ls:
        raise ConfigError(f"long epoch k2={k2} must be a multiple of k1={k1} with the same Ls")
    if pmf.k != k2:
        raise ConfigError(f"pmf support {pmf.k} does not match k2={k2}")
    r = k2 // k1
    small = [long_index * r + i for i in range(r)]
    missing = [e for e in small if (k1, e) not in store.records]
    if missing:
        raise NotFinalizedError(f"small epochs {missing} are not sealed")
    super_blocks: list[bytes] = []
    for e in small:
        super_blocks.extend(decode_fn(e))
    groups = epoch_header_groups(store.header_chain, big_cfg, long_index)
    view = EpochView(long_index, tuple(super_blocks), groups)
    recs = [store.records[(k1, e)] for e in small]
    droplets = encode_epoch(store.seed, view, big_cfg.s, pmf)
    store.records[(k2, long_index)] = EpochRecord(
        k2,
        long_index,
        recs[0].first_block,
        sum(rec.n_blocks for rec in recs),
        sum(rec.chain_bytes for rec in recs),
        droplets,
    )
    for e in small:
        del store.records[(k1, e)]
    return store


@dataclass(frozen=True)
class Savings:
    gamma: float  # sealed chain bytes / droplet bytes
    gamma_all: float  # whole chain / every byte the node keeps
    chain_bytes: int
    droplet_bytes: int
    stored_bytes: int


def storage_savings(store: NodeStore, chain_size: int | None = None) -> Savings:
    if not store.records:
        raise ConfigError("no sealed epoch")
    recs = store.records.values()
    sealed = sum(r.chain_bytes for r in recs)
    dbytes = sum(r.droplet_bytes for r in recs)
    stored = (
        dbytes
        + sum(r.vector_bytes for r in recs)
        + HEADER_SIZE * len(store.header_chain)
        + sum(b.size for b in store.tail)
    )
    total = chain_size if chain_size is not None else sealed + sum(b.size for b in store.tail)
    return Savings(sealed / dbytes, total / stored, sealed, dbytes, stored)


# --- snapshots --------------------------------------------------------------

SNAPSHOT_MAGIC = b"SEFNODE1"


def store_snapshot(store: NodeStore, path: str | Path, extra: dict | None = None) -> None:
    """Write ``MAGIC | u32 manifest length | JSON manifest | droplet records |
    header records | tail as a block-dump``."""
    keys = sorted(store.records)
    manifest = {
        "node_id": store.node_id,
        "seed": store.seed,
        "cfg": asdict(store.cfg),
        "next_epoch": store.next_epoch,
        "epochs": [
            {
                "k": store.records[key].k,
                "index": store.records[key].index,
                "first_block": store.records[key].first_block,
                "n_blocks": store.records[key].n_blocks,
                "chain_bytes": store.records[key].chain_bytes,
                "n_droplets": len(store.records[key].droplets),
            }
            for key in keys
        ],
        "n_headers": len(store.header_chain),
        "n_tail": len(store.tail),
    }
    if extra:
        manifest["spec"] = extra
    head = json.dumps(manifest, sort_keys=True).encode()
    body = b"".join(
        [
            SNAPSHOT_MAGIC,
            struct.pack(">I", len(head)),
            head,
            dump_droplets(d for key in keys for d in store.records[key].droplets),
            b"".join(h.serialize() for h in store.header_chain),
            dump_chain(Chain(tuple(store.tail))),
        ]
    )
    Path(path).write_bytes(body)


def load_snapshot(path: str | Path) -> tuple[NodeStore, dict]:
    raw = Path(path).read_bytes()
    if raw[:8] != SNAPSHOT_MAGIC:
        raise ParseError("not a node snapshot")
    (n,) = struct.unpack_from(">I", raw, 8)
    manifest = json.loads(raw[12 : 12 + n])
    off = 12 + n
    store = NodeStore(manifest["node_id"], manifest["seed"], EpochConfig(**manifest["cfg"]))
    store.next_epoch = manifest["next_epoch"]
    for ep in manifest["epochs"]:
        droplets, off = parse_droplets(raw, ep["n_droplets"], off)
        store.records[(ep["k"], ep["index"])] = EpochRecord(
            ep["k"], ep["index"], ep["first_block"], ep["n_blocks"], ep["chain_bytes"], droplets
        )
    for _ in range(manifest["n_headers"]):
        store.header_chain.append(Header.deserialize(raw[off : off + HEADER_SIZE]))
        off += HEADER_SIZE
    store.tail = list(parse_chain(raw[off:], verify=False).blocks)
    return store, manifest
