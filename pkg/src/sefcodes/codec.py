"""LT droplet encoding and the error-resilient peeling decoder.

Byte strings are XORed with zero extension on the right.  Internally the
decoder keeps every residual droplet as a Python ``int`` built from the
little-endian bytes, which makes the zero extension free and the XOR cheap.
"""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .hashchain import HEADER_SIZE, Header, merkle_root, parse_payload
from .errors import ParseError
from .soliton import DegreePmf, sample_degree


def xor_padded(a: bytes, b: bytes) -> bytes:
    n = max(len(a), len(b))
    x = int.from_bytes(a, "little") ^ int.from_bytes(b, "little")
    return x.to_bytes(n, "little")


def xor_fold(parts: Iterable[bytes]) -> bytes:
    acc, n = 0, 0
    for p in parts:
        acc ^= int.from_bytes(p, "little")
        n = max(n, len(p))
    return acc.to_bytes(n, "little")


@dataclass(frozen=True)
class Droplet:
    """A coded super-block plus the indices of the super-blocks XORed into it."""

    epoch: int
    k: int
    neighbors: tuple[int, ...]
    data: bytes

    @property
    def degree(self) -> int:
        return len(self.neighbors)

    def bitvector(self) -> bytes:
        bits = np.zeros(self.k, dtype=np.uint8)
        bits[list(self.neighbors)] = 1
        return np.packbits(bits).tobytes()

    @property
    def vector_size(self) -> int:
        return (self.k + 7) // 8

    def to_bytes(self) -> bytes:
        return b"".join(
            (
                struct.pack(">II", self.epoch, self.k),
                self.bitvector(),
                struct.pack(">Q", len(self.data)),
                self.data,
            )
        )

    @classmethod
    def from_bytes(cls, raw: bytes, offset: int = 0) -> tuple["Droplet", int]:
        """Parse one wire record; returns the droplet and the offset after it."""
        if offset + 8 > len(raw):
            raise ParseError("truncated droplet preamble")
        epoch, k = struct.unpack_from(">II", raw, offset)
        off = offset + 8
        nvec = (k + 7) // 8
        if off + nvec + 8 > len(raw):
            raise ParseError("truncated droplet bitvector")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8, count=nvec, offset=off))
        if bits[k:].any():
            raise ParseError("bitvector has bits set past k")
        off += nvec
        (n,) = struct.unpack_from(">Q", raw, off)
        off += 8
        if off + n > len(raw):
            raise ParseError("truncated droplet data")
        data = bytes(raw[off : off + n])
        neighbors = tuple(int(i) for i in np.flatnonzero(bits[:k]))
        return cls(epoch, k, neighbors, data), off + n


def dump_droplets(droplets: Iterable[Droplet]) -> bytes:
    return b"".join(d.to_bytes() for d in droplets)


def parse_droplets(raw: bytes, count: int | None = None, offset: int = 0) -> tuple[list[Droplet], int]:
    out = []
    while (count is None and offset < len(raw)) or (count is not None and len(out) < count):
        d, offset = Droplet.from_bytes(raw, offset)
        out.append(d)
    return out, offset


@dataclass(frozen=True)
class EpochView:
    """The k super-blocks of one epoch and, per super-block, the headers of
    the blocks concatenated into it."""

    index: int
    super_blocks: tuple[bytes, ...]
    groups: tuple[tuple[Header, ...], ...]

    @property
    def k(self) -> int:
        return len(self.super_blocks)

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.super_blocks)

    @cached_property
    def as_ints(self) -> tuple[int, ...]:
        return tuple(int.from_bytes(b, "little") for b in self.super_blocks)


def choose_neighbors(k: int, pmf: DegreePmf, rng: np.random.Generator) -> tuple[int, ...]:
    d = sample_degree(pmf, rng)
    return tuple(sorted(int(i) for i in rng.choice(k, size=d, replace=False)))


def combine(epoch: EpochView, neighbors: Sequence[int]) -> Droplet:
    neighbors = tuple(sorted(neighbors))
    ints, blocks = epoch.as_ints, epoch.super_blocks
    acc, n = 0, 0
    for m in neighbors:
        acc ^= ints[m]
        n = max(n, len(blocks[m]))
    return Droplet(epoch.index, epoch.k, neighbors, acc.to_bytes(n, "little"))


def encode_droplet(epoch: EpochView, pmf: DegreePmf, rng: np.random.Generator) -> Droplet:
    return combine(epoch, choose_neighbors(epoch.k, pmf, rng))


# --- verification -----------------------------------------------------------


def _split_checked(data: bytes, expected: Sequence[Header], raw_headers: Sequence[bytes]) -> bytes | None:
    total = sum(HEADER_SIZE + h.payload_size for h in expected)
    if len(data) < total or any(data[total:]):
        return None
    off = 0
    for h, raw in zip(expected, raw_headers):
        if data[off : off + HEADER_SIZE] != raw:
            return None
        off += HEADER_SIZE
        try:
            txs = parse_payload(data[off : off + h.payload_size])
        except ParseError:
            return None
        if not txs or merkle_root(txs) != h.merkle_root:
            return None
        off += h.payload_size
    return data[:total]


def verify_singleton(droplet_data: bytes, expected_headers: Sequence[Header]) -> bool:
    """Accept iff the data decomposes into exactly the expected blocks.

    Every embedded header must byte-equal its honest counterpart, every
    payload must hash to the Merkle root it carries, and any bytes past the
    expected total (adaptive padding) must be zero.
    """
    raws = [h.serialize() for h in expected_headers]
    return _split_checked(droplet_data, expected_headers, raws) is not None


class SlotVerifier:
    """Per-epoch verifier holding the honest header groups for every slot."""

    def __init__(self, groups: Sequence[Sequence[Header]]):
        self.groups = [tuple(g) for g in groups]
        self._raw = [[h.serialize() for h in g] for g in self.groups]

    @classmethod
    def for_epoch(cls, epoch: EpochView) -> "SlotVerifier":
        return cls(epoch.groups)

    def check(self, slot: int, data: bytes) -> bytes | None:
        """Return the super-block with padding stripped, or None to reject."""
        return _split_checked(data, self.groups[slot], self._raw[slot])


# --- peeling decoder --------------------------------------------------------


@dataclass
class DecodeOutcome:
    success: bool
    state: "PeelingDecoder"

    @property
    def blocks(self) -> list[bytes] | None:
        return list(self.state.decoded) if self.success else None

    @property
    def need_more(self) -> bool:
        return not self.success


class PeelingDecoder:
    """Incremental error-resilient peeling decoder for one epoch.

    Droplets are numbered in arrival order.  Among all current singletons the
    one on the lowest block index is processed first, ties going to the
    earliest arrival.  With ``verifier=None`` every singleton is accepted
    (classical LT peeling).

    A droplet may arrive without data (``data=None`` in :meth:`add_vectors`);
    it is then fetched through ``fetch(droplet)`` only once it becomes the
    chosen singleton, and the already decoded neighbors are XORed out at that
    point.
    """

    def __init__(
        self,
        k: int,
        verifier: SlotVerifier | None = None,
        fetch: Callable[[object], bytes] | None = None,
    ):
        self.k = k
        self.verifier = verifier
        self.fetch = fetch
        self.decoded: list[bytes | None] = [None] * k
        self._dec_int: list[int] = [0] * k
        self._dec_len: list[int] = [0] * k
        self.n_decoded = 0

        self._src: list[object] = []
        self._orig: list[tuple[int, ...]] = []
        self._res: dict[int, set[int]] = {}
        self._val: dict[int, int | None] = {}
        self._len: dict[int, int] = {}
        self._adj: list[set[int]] = [set() for _ in range(k)]
        self._heap: list[tuple[int, int]] = []

        self.accepted: list[tuple[int, int]] = []  # (droplet id, block)
        self.rejected: list[int] = []
        self.dropped = 0
        self.xor_ops = 0
        self.fetched = 0
        self.fetched_bytes = 0

    @property
    def done(self) -> bool:
        return self.n_decoded == self.k

    @property
    def n_droplets(self) -> int:
        return len(self._src)

    @property
    def live(self) -> int:
        return len(self._res)

    def source(self, did: int):
        return self._src[did]

    def residual(self, did: int) -> frozenset[int] | None:
        r = self._res.get(did)
        return None if r is None else frozenset(r)

    def outcome(self) -> DecodeOutcome:
        return DecodeOutcome(self.done, self)

    def add(self, droplets: Iterable[Droplet]) -> DecodeOutcome:
        for d in droplets:
            self._insert(d, d.neighbors, d.data)
        self._peel()
        return self.outcome()

    def add_vectors(self, items: Iterable[tuple[object, Sequence[int]]]) -> DecodeOutcome:
        """Insert droplets known only by their neighbor vectors."""
        for src, neighbors in items:
            self._insert(src, tuple(neighbors), None)
        self._peel()
        return self.outcome()

    def _insert(self, src, neighbors: tuple[int, ...], data: bytes | None) -> None:
        did = len(self._src)
        self._src.append(src)
        self._orig.append(neighbors)
        res = set()
        val = None if data is None else int.from_bytes(data, "little")
        length = 0 if data is None else len(data)
        for m in neighbors:
            if self.decoded[m] is None:
                res.add(m)
            elif val is not None:
                val ^= self._dec_int[m]
                length = max(length, self._dec_len[m])
                self.xor_ops += 1
        if not res:
            self.dropped += 1
            return
        self._res[did] = res
        self._val[did] = val
        self._len[did] = length
        for m in res:
            self._adj[m].add(did)
        if len(res) == 1:
            heapq.heappush(self._heap, (next(iter(res)), did))

    def _discard(self, did: int) -> None:
        for m in self._res.pop(did):
            self._adj[m].discard(did)
        del self._val[did]
        del self._len[did]

    def _materialize(self, did: int) -> None:
        data = self.fetch(self._src[did])
        self.fetched += 1
        self.fetched_bytes += len(data)
        val = int.from_bytes(data, "little")
        length = len(data)
        res = self._res[did]
        for m in self._orig[did]:
            if m not in res:
                val ^= self._dec_int[m]
                length = max(length, self._dec_len[m])
                self.xor_ops += 1
        self._val[did] = val
        self._len[did] = length

    def _peel(self) -> None:
        heap = self._heap
        while heap and not self.done:
            m, did = heapq.heappop(heap)
            if did not in self._res or self.decoded[m] is not None:
                continue
            if self._val[did] is None:
                self._materialize(did)
            data = self._val[did].to_bytes(self._len[did], "little")
            block = data if self.verifier is None else self.verifier.check(m, data)
            if block is None:
                self.rejected.append(did)
                self._discard(did)
                continue
            self.accepted.append((did, m))
            self._discard(did)
            self.decoded[m] = block
            bint = int.from_bytes(block, "little")
            self._dec_int[m] = bint
            self._dec_len[m] = len(block)
            self.n_decoded += 1
            for other in self._adj[m]:
                res = self._res[other]
                res.discard(m)
                if self._val[other] is not None:
                    self._val[other] ^= bint
                    self._len[other] = max(self._len[other], len(block))
                    self.xor_ops += 1
                if len(res) == 1:
                    heapq.heappush(heap, (next(iter(res)), other))
            for other in [o for o in self._adj[m] if not self._res[o]]:
                self.dropped += 1
                self._res[other] = set()
                self._discard(other)
            self._adj[m].clear()


def decode(
    droplets: Sequence[Droplet],
    epoch_headers: Sequence[Sequence[Header]] | None,
    k: int | None = None,
) -> DecodeOutcome:
    """Run the peeling decoder over ``droplets``.

    ``epoch_headers`` holds the honest header group of each of the k slots;
    pass None for classical (unverified) peeling, in which case ``k`` is
    required.
    """
    if epoch_headers is not None:
        verifier = SlotVerifier(epoch_headers)
        k = len(verifier.groups)
    else:
        verifier = None
        if k is None:
            raise ValueError("k is required when decoding without headers")
    return PeelingDecoder(k, verifier).add(droplets)


def add_droplets(state: PeelingDecoder | DecodeOutcome, more: Sequence[Droplet]) -> DecodeOutcome:
    if isinstance(state, DecodeOutcome):
        state = state.state
    return state.add(more)


def is_consistent(droplet: Droplet, super_blocks: Sequence[bytes]) -> bool:
    """Ground truth check ``c == v B`` (with the same zero padding)."""
    if droplet.degree == 0:
        return not any(droplet.data)
    return droplet.data == xor_fold(super_blocks[m] for m in droplet.neighbors)
