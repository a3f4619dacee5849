"""Blocks, headers, Merkle roots and the header hash-chain.

A header is a fixed 88-byte record::

    merkle_root (32) | prev_header_hash (32) | payload_size (u64 BE) | metadata (16)

and a block payload is serialized as a u32 transaction count followed by
``u32 length + bytes`` for every transaction.  ``payload_size`` in the header
is the length of that serialization, which is what lets a decoder split a
concatenation of blocks back into its parts.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, EmptyPayload, IntegrityError, NoValidChain, ParseError

DIGEST_SIZE = 32
METADATA_SIZE = 16
HEADER_SIZE = 2 * DIGEST_SIZE + 8 + METADATA_SIZE  # L_h
ZERO_DIGEST = bytes(DIGEST_SIZE)

CHAIN_MAGIC = b"SEFCHAIN"
CHAIN_VERSION = 1

_HEADER_STRUCT = struct.Struct(">32s32sQ16s")


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def merkle_root(txs: Sequence[bytes]) -> bytes:
    """Bitcoin-style Merkle root: leaves are ``sha256(tx)`` and an odd level
    duplicates its last node before pairing."""
    if not txs:
        raise EmptyPayload("merkle_root of an empty transaction list")
    level = [sha256(tx) for tx in txs]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [sha256(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


@dataclass(frozen=True)
class Header:
    merkle_root: bytes
    prev_header_hash: bytes
    payload_size: int
    metadata: bytes = bytes(METADATA_SIZE)

    def __post_init__(self):
        if len(self.merkle_root) != DIGEST_SIZE or len(self.prev_header_hash) != DIGEST_SIZE:
            raise ValueError("digests must be 32 bytes")
        if len(self.metadata) != METADATA_SIZE:
            raise ValueError(f"metadata must be {METADATA_SIZE} bytes")
        if not 0 <= self.payload_size < 2**64:
            raise ValueError("payload_size out of range")

    def serialize(self) -> bytes:
        return _HEADER_STRUCT.pack(
            self.merkle_root, self.prev_header_hash, self.payload_size, self.metadata
        )

    @classmethod
    def deserialize(cls, raw: bytes) -> "Header":
        if len(raw) != HEADER_SIZE:
            raise ParseError(f"header must be {HEADER_SIZE} bytes, got {len(raw)}")
        root, prev, size, meta = _HEADER_STRUCT.unpack(raw)
        return cls(root, prev, size, meta)

    def hash(self) -> bytes:
        return sha256(self.serialize())


def serialize_payload(txs: Sequence[bytes]) -> bytes:
    parts = [struct.pack(">I", len(txs))]
    for tx in txs:
        parts.append(struct.pack(">I", len(tx)))
        parts.append(tx)
    return b"".join(parts)


def parse_payload(raw: bytes) -> list[bytes]:
    """Inverse of :func:`serialize_payload`; the buffer must be consumed exactly."""
    if len(raw) < 4:
        raise ParseError("payload shorter than its tx count field")
    (count,) = struct.unpack_from(">I", raw, 0)
    off = 4
    txs = []
    for _ in range(count):
        if off + 4 > len(raw):
            raise ParseError("truncated tx length")
        (n,) = struct.unpack_from(">I", raw, off)
        off += 4
        if off + n > len(raw):
            raise ParseError("truncated tx body")
        txs.append(raw[off : off + n])
        off += n
    if off != len(raw):
        raise ParseError("trailing bytes after last transaction")
    return txs


def payload_size_for(tx_lengths: Iterable[int]) -> int:
    lengths = list(tx_lengths)
    return 4 + 4 * len(lengths) + sum(lengths)


@dataclass(frozen=True)
class Block:
    header: Header
    txs: tuple[bytes, ...]

    def payload(self) -> bytes:
        return serialize_payload(self.txs)

    def serialize(self) -> bytes:
        return self.header.serialize() + self.payload()

    @property
    def size(self) -> int:
        return HEADER_SIZE + self.header.payload_size

    def is_consistent(self) -> bool:
        return (
            len(self.txs) > 0
            and self.header.payload_size == len(self.payload())
            and self.header.merkle_root == merkle_root(self.txs)
        )


def make_block(txs: Sequence[bytes], prev: Header | None, metadata: bytes = bytes(METADATA_SIZE)) -> Block:
    txs = tuple(bytes(t) for t in txs)
    prev_hash = ZERO_DIGEST if prev is None else prev.hash()
    header = Header(merkle_root(txs), prev_hash, len(serialize_payload(txs)), metadata)
    return Block(header, txs)


def validate_header_chain(headers: Sequence[Header]) -> bool:
    prev_hash = ZERO_DIGEST
    for h in headers:
        if h.prev_header_hash != prev_hash:
            return False
        prev_hash = h.hash()
    return True


def longest_valid_header_chain(candidates: Sequence[Sequence[Header]]) -> list[Header]:
    best = None
    for cand in candidates:
        if (best is None or len(cand) > len(best)) and validate_header_chain(cand):
            best = cand
    if best is None:
        raise NoValidChain("no candidate header-chain validates")
    return list(best)


@dataclass(frozen=True)
class Chain:
    blocks: tuple[Block, ...]

    @property
    def height(self) -> int:
        return len(self.blocks)

    @property
    def headers(self) -> list[Header]:
        return [b.header for b in self.blocks]

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    @property
    def max_block_size(self) -> int:
        return max((b.size for b in self.blocks), default=0)

    def check(self) -> None:
        """Raise IntegrityError unless linkage and every Merkle root hold."""
        if not validate_header_chain(self.headers):
            raise IntegrityError("header-chain linkage broken")
        for i, b in enumerate(self.blocks):
            if not b.is_consistent():
                raise IntegrityError(f"block {i}: payload does not match its header")


# --- synthetic chains -------------------------------------------------------


@dataclass(frozen=True)
class SizeModel:
    """Payload-size sampler.  ``kind`` is one of fixed, uniform, empirical.

    For ``empirical`` the histogram is a list of ``(lo, hi, weight)`` bins,
    sizes drawn uniformly from the integer range ``[lo, hi)`` of the chosen bin.
    """

    kind: str
    lo: int = 0
    hi: int = 0
    bins: tuple[tuple[int, int, float], ...] = ()

    @classmethod
    def fixed(cls, size: int) -> "SizeModel":
        return cls("fixed", size, size)

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "SizeModel":
        return cls("uniform", lo, hi)

    @classmethod
    def empirical(cls, path: str | Path) -> "SizeModel":
        return cls.from_histogram(load_histogram(path))

    @classmethod
    def from_histogram(cls, bins: Sequence[tuple[int, int, float]]) -> "SizeModel":
        bins = tuple((int(lo), int(hi), float(w)) for lo, hi, w in bins)
        if not bins:
            raise ConfigError("empty histogram")
        return cls("empirical", min(b[0] for b in bins), max(b[1] for b in bins) - 1, bins)

    @property
    def max_size(self) -> int:
        return self.hi

    def mean(self) -> float:
        if self.kind == "empirical":
            w = np.array([b[2] for b in self.bins])
            mids = np.array([(b[0] + b[1] - 1) / 2 for b in self.bins])
            return float((w * mids).sum() / w.sum())
        return (self.lo + self.hi) / 2

    def validate(self, min_size: int = 8) -> None:
        if self.kind not in ("fixed", "uniform", "empirical"):
            raise ConfigError(f"unknown size model {self.kind!r}")
        if self.lo < min_size or self.hi < self.lo:
            raise ConfigError(f"bad size range [{self.lo}, {self.hi}] (payload needs >= {min_size} bytes)")
        if self.kind == "empirical":
            for lo, hi, w in self.bins:
                if hi <= lo or w < 0:
                    raise ConfigError(f"bad histogram bin ({lo}, {hi}, {w})")
            if sum(b[2] for b in self.bins) <= 0:
                raise ConfigError("histogram weights sum to zero")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(n, self.lo, dtype=np.int64)
        if self.kind == "uniform":
            return rng.integers(self.lo, self.hi, size=n, endpoint=True)
        w = np.array([b[2] for b in self.bins], dtype=float)
        idx = rng.choice(len(self.bins), size=n, p=w / w.sum())
        lo = np.array([b[0] for b in self.bins])[idx]
        hi = np.array([b[1] for b in self.bins])[idx]
        return lo + (rng.random(n) * (hi - lo)).astype(np.int64)

    def to_dict(self) -> dict:
        if self.kind == "empirical":
            return {"kind": "empirical", "bins": [list(b) for b in self.bins]}
        if self.kind == "fixed":
            return {"kind": "fixed", "size": self.lo}
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d: dict) -> "SizeModel":
        kind = d.get("kind")
        try:
            if kind == "fixed":
                return cls.fixed(int(d["size"]))
            if kind == "uniform":
                return cls.uniform(int(d["lo"]), int(d["hi"]))
            if kind == "empirical":
                if "path" in d:
                    return cls.empirical(d["path"])
                return cls.from_histogram(d["bins"])
        except KeyError as e:
            raise ConfigError(f"size model {kind!r} missing field {e}") from None
        raise ConfigError(f"unknown size model {kind!r}")


def load_histogram(path: str | Path) -> list[tuple[int, int, float]]:
    """Read a JSON histogram ``{"edges": [...], "weights": [...]}``."""
    try:
        doc = json.loads(Path(path).read_text())
        edges, weights = doc["edges"], doc["weights"]
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"cannot read histogram {path}: {e}") from None
    if len(edges) != len(weights) + 1:
        raise ConfigError("histogram needs len(edges) == len(weights) + 1")
    return [(int(edges[i]), int(edges[i + 1]), float(weights[i])) for i in range(len(weights))]


def bitcoin_like_histogram(max_payload: int) -> list[tuple[int, int, float]]:
    """Block-size histogram shaped like Bitcoin's history, scaled to ``max_payload``.

    Roughly a third of the mass sits on tiny early-era blocks, the rest is
    spread over partially filled blocks with a bump near the size limit.
    """
    shape = [
        (0.00, 0.02, 0.30),
        (0.02, 0.10, 0.10),
        (0.10, 0.30, 0.12),
        (0.30, 0.60, 0.12),
        (0.60, 0.90, 0.14),
        (0.90, 1.00, 0.22),
    ]
    out = []
    for lo, hi, w in shape:
        a = max(16, int(lo * max_payload))
        b = max(a + 1, int(hi * max_payload) + (1 if hi == 1.0 else 0))
        out.append((a, b, w))
    return out


@dataclass(frozen=True)
class ChainGenConfig:
    n_blocks: int
    size_model: SizeModel
    txs_per_block: tuple[int, int] = (1, 4)
    rng_seed: int = 0

    @property
    def max_block_size(self) -> int:
        return self.size_model.max_size

    def to_dict(self) -> dict:
        return {
            "n_blocks": self.n_blocks,
            "size_model": self.size_model.to_dict(),
            "txs_per_block": list(self.txs_per_block),
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainGenConfig":
        try:
            return cls(
                n_blocks=int(d["n_blocks"]),
                size_model=SizeModel.from_dict(d["size_model"]),
                txs_per_block=tuple(d.get("txs_per_block", (1, 4))),
                rng_seed=int(d.get("rng_seed", 0)),
            )
        except KeyError as e:
            raise ConfigError(f"chain config missing field {e}") from None


def _split_lengths(payload_size: int, n_txs: int) -> list[int]:
    # payload = 4 + sum(4 + len_i)
    body = payload_size - 4 - 4 * n_txs
    base, extra = divmod(body, n_txs)
    return [base + (1 if i < extra else 0) for i in range(n_txs)]


def generate_chain(cfg: ChainGenConfig) -> Chain:
    """Deterministic synthetic chain: same config, byte-identical result."""
    if cfg.n_blocks < 0:
        raise ConfigError("n_blocks must be >= 0")
    cfg.size_model.validate()
    lo_tx, hi_tx = cfg.txs_per_block
    if not 1 <= lo_tx <= hi_tx:
        raise ConfigError(f"bad txs_per_block range {cfg.txs_per_block}")

    rng = np.random.default_rng(cfg.rng_seed)
    sizes = cfg.size_model.sample(rng, cfg.n_blocks)
    blocks: list[Block] = []
    prev = None
    for height, size in enumerate(sizes):
        size = int(size)
        n_txs = int(rng.integers(lo_tx, hi_tx, endpoint=True))
        n_txs = max(1, min(n_txs, (size - 4) // 4))
        lengths = _split_lengths(size, n_txs)
        body = rng.bytes(sum(lengths))
        txs, off = [], 0
        for n in lengths:
            txs.append(body[off : off + n])
            off += n
        meta = struct.pack(">Q", height) + rng.bytes(8)
        block = make_block(txs, prev, meta)
        blocks.append(block)
        prev = block.header
    return Chain(tuple(blocks))


# --- block-dump files -------------------------------------------------------


def dump_chain(chain: Chain) -> bytes:
    out = [CHAIN_MAGIC, struct.pack(">HQ", CHAIN_VERSION, chain.height)]
    for b in chain.blocks:
        out.append(b.header.serialize())
        out.append(struct.pack(">I", len(b.txs)))
        for tx in b.txs:
            out.append(struct.pack(">I", len(tx)))
            out.append(tx)
    return b"".join(out)


def store_chain(chain: Chain, path: str | Path) -> None:
    Path(path).write_bytes(dump_chain(chain))


def load_chain(path: str | Path) -> Chain:
    raw = Path(path).read_bytes()
    return parse_chain(raw)


def parse_chain(raw: bytes, verify: bool = True) -> Chain:
    """Parse a block-dump.  ``verify=False`` skips the linkage and Merkle
    checks (used for chain fragments such as a node's uncoded tail)."""
    if raw[:8] != CHAIN_MAGIC:
        raise ParseError("bad magic")
    if len(raw) < 18:
        raise ParseError("truncated preamble")
    version, count = struct.unpack_from(">HQ", raw, 8)
    if version != CHAIN_VERSION:
        raise ParseError(f"unsupported version {version}")
    off = 18
    blocks = []

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise ParseError(f"truncated record at byte {off}")
        chunk = raw[off : off + n]
        off += n
        return chunk

    for _ in range(count):
        header = Header.deserialize(take(HEADER_SIZE))
        (n_txs,) = struct.unpack(">I", take(4))
        txs = []
        for _ in range(n_txs):
            (n,) = struct.unpack(">I", take(4))
            txs.append(take(n))
        blocks.append(Block(header, tuple(txs)))
    if off != len(raw):
        raise ParseError("trailing bytes after last block")
    chain = Chain(tuple(blocks))
    if verify:
        chain.check()
    return chain
