"""Bootstrap simulator: droplet nodes, adversaries and bucket nodes.

A :class:`Network` is a population of droplet nodes over one synthetic
chain.  Node storage is materialized on first contact (it is a pure function
of the node's seed), so Monte-Carlo trials only pay for the nodes a bucket
actually reaches.  Every trial builds a fresh network from its own seed.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .codec import Droplet, EpochView, PeelingDecoder, SlotVerifier, is_consistent
from .epoch import EpochConfig, EpochRecord, NodeStore, encode_epoch, group_headers, sealable_epochs, epoch_views
from .errors import ConfigError, NoValidChain
from .hashchain import Block, Chain, ChainGenConfig, Header, generate_chain, longest_valid_header_chain
from .soliton import DegreePmf, SolitonParams, all_at_once, ideal_soliton, robust_soliton

ADVERSARY_KINDS = ("silent", "murky", "opaque", "singleton_bribery")
SCHEMES = ("sef", "random_sampling")


@dataclass(frozen=True)
class NetworkConfig:
    N: int
    epoch_cfg: EpochConfig
    sigma: float = 0.0
    adversary_mix: tuple[tuple[str, float], ...] = (("murky", 1.0),)
    c: float = 0.03
    delta: float = 0.5
    degree: str = "robust"  # robust | ideal
    scheme: str = "sef"  # sef | random_sampling
    trials: int = 100
    rng_seed: int = 0
    n_hat: int = 1
    n_initial: int | None = None  # default ceil(k / s)
    header_sample: int = 25
    node_s: tuple[int, ...] | None = None  # per-node s, cycled over node ids

    def __post_init__(self):
        mix = self.adversary_mix
        if isinstance(mix, dict):
            mix = tuple(sorted(mix.items()))
            object.__setattr__(self, "adversary_mix", mix)
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if not 0 <= self.sigma < 1:
            raise ConfigError(f"sigma must lie in [0, 1), got {self.sigma}")
        for kind, w in mix:
            if kind not in ADVERSARY_KINDS:
                raise ConfigError(f"unknown adversary kind {kind!r}")
            if w < 0:
                raise ConfigError("adversary weights must be >= 0")
        if mix and abs(sum(w for _, w in mix) - 1.0) > 1e-9:
            raise ConfigError("adversary_mix weights must sum to 1")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.degree not in ("robust", "ideal"):
            raise ConfigError(f"unknown degree distribution {self.degree!r}")
        if self.n_hat < 1:
            raise ConfigError("n_hat must be >= 1")
        if self.scheme == "random_sampling" and self.epoch_cfg.s > self.epoch_cfg.k:
            raise ConfigError("random sampling needs s <= k")

    @property
    def gamma(self) -> float:
        return self.epoch_cfg.gamma

    def pmf(self) -> DegreePmf:
        k = self.epoch_cfg.k
        if self.scheme == "random_sampling":
            return all_at_once(k, self.epoch_cfg.s)
        if self.degree == "ideal":
            return ideal_soliton(k)
        return robust_soliton(SolitonParams(k, self.c, self.delta))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["adversary_mix"] = dict(self.adversary_mix)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        d = dict(d)
        try:
            d["epoch_cfg"] = EpochConfig(**d["epoch_cfg"])
        except (KeyError, TypeError) as e:
            raise ConfigError(f"bad epoch_cfg: {e}") from None
        if "adversary_mix" in d:
            d["adversary_mix"] = tuple(sorted(dict(d["adversary_mix"]).items()))
        if d.get("node_s") is not None:
            d["node_s"] = tuple(d["node_s"])
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None


def chain_for_epochs(gen: ChainGenConfig, epoch_cfg: EpochConfig, epochs: int = 1) -> Chain:
    """Generate the shortest chain (in steps of whole epochs) that seals ``epochs`` epochs."""
    if epochs < 1:
        raise ConfigError("epochs must be >= 1")
    n = epochs * epoch_cfg.k + epoch_cfg.tau
    while True:
        chain = generate_chain(replace(gen, n_blocks=n))
        if sealable_epochs(chain.headers, epoch_cfg) >= epochs:
            return chain
        n += epoch_cfg.k


class ChainContext:
    """Sealed-epoch views of a chain, shared read-only by every trial."""

    def __init__(self, chain: Chain, epoch_cfg: EpochConfig):
        self.chain = chain
        self.epoch_cfg = epoch_cfg
        self.headers = chain.headers
        self.views: list[EpochView] = epoch_views(chain, epoch_cfg)
        if not self.views:
            raise ConfigError("chain does not cover a sealed epoch")
        self.view_sizes = [v.size for v in self.views]
        self.view_blocks = [sum(len(g) for g in v.groups) for v in self.views]
        self.view_first = [sum(self.view_blocks[:e]) for e in range(len(self.views))]
        self.sealed_bytes = sum(self.view_sizes)
        last = self.views[-1].groups[-1][-1]
        self.sealed_blocks = next(i for i, h in enumerate(self.headers) if h is last) + 1
        self.tail = chain.blocks[self.sealed_blocks :]
        self._groups: dict[int, tuple[int, list]] = {}

    @property
    def n_epochs(self) -> int:
        return len(self.views)

    def groups_for(self, headers: Sequence[Header]) -> list[tuple[tuple[Header, ...], ...]]:
        """Header groups of every sealable epoch as seen from ``headers``."""
        key = id(headers)
        hit = self._groups.get(key)
        if hit is not None and hit[0] is headers:
            return hit[1]
        k = self.epoch_cfg.k
        n = sealable_epochs(headers, self.epoch_cfg)
        sbs = group_headers(headers, self.epoch_cfg.Ls)
        groups = [tuple(sb.headers for sb in sbs[e * k : (e + 1) * k]) for e in range(n)]
        self._groups[key] = (headers, groups)
        return groups


@dataclass
class SimNode:
    node_id: int
    role: str  # honest | silent | murky | opaque
    seed: int
    s: int
    store: NodeStore | None = None

    @property
    def honest(self) -> bool:
        return self.role == "honest"


class Network:
    def __init__(self, ctx: ChainContext, cfg: NetworkConfig, nodes: list[SimNode], pmf: DegreePmf | None = None):
        self.ctx = ctx
        self.cfg = cfg
        self.nodes = nodes
        self.pmf = cfg.pmf() if pmf is None else pmf
        self._forged = None

    @property
    def N(self) -> int:
        return len(self.nodes)

    def roles(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for n in self.nodes:
            out[n.role] = out.get(n.role, 0) + 1
        return out

    def store(self, i: int) -> NodeStore:
        node = self.nodes[i]
        if node.store is None:
            node.store = self._materialize(node)
        return node.store

    def _materialize(self, node: SimNode) -> NodeStore:
        ctx, cfg = self.ctx, self.cfg
        ecfg = replace(ctx.epoch_cfg, s=node.s)
        store = NodeStore(node.node_id, node.seed, ecfg, header_chain=ctx.headers, tail=list(ctx.tail))
        store.next_epoch = ctx.n_epochs
        rng = None
        if node.role == "murky":
            rng = np.random.default_rng(np.random.SeedSequence(entropy=node.seed, spawn_key=(0xADE,)))
        k = ecfg.k
        for view in ctx.views:
            if node.role == "silent":
                droplets = []
            elif node.role == "opaque":
                droplets = [_opaque(view) for _ in range(node.s)]
            elif cfg.scheme == "random_sampling":
                picks = np.random.default_rng(np.random.SeedSequence(entropy=node.seed, spawn_key=(k, 0)))
                idx = sorted(int(i) for i in picks.choice(k, size=node.s, replace=False))
                droplets = [_systematic(view, m) for m in idx]
            else:
                droplets = encode_epoch(node.seed, view, node.s, self.pmf)
            if node.role == "murky":
                droplets = [_murk(d, view, rng) for d in droplets]
            e = view.index
            store.records[(k, e)] = EpochRecord(
                k, e, ctx.view_first[e], ctx.view_blocks[e], ctx.view_sizes[e], droplets
            )
        return store

    def respond(self, i: int) -> list[Droplet] | None:
        """Droplets node ``i`` hands a bucket, or None when it stays silent."""
        if self.nodes[i].role == "silent":
            return None
        return self.store(i).all_droplets()

    def header_chain_from(self, i: int) -> list[Header] | None:
        role = self.nodes[i].role
        if role == "silent":
            return None
        if role == "honest":
            return self.ctx.headers
        if self._forged is None:
            self._forged = _forge_headers(self.ctx.headers)
        return self._forged

    def tail_from(self, i: int) -> list[Block] | None:
        role = self.nodes[i].role
        if role == "silent":
            return None
        tail = list(self.ctx.tail)
        if role != "honest" and tail:
            b = tail[0]
            tail[0] = Block(b.header, (b"\x00" + b.txs[0][1:],) + b.txs[1:])
        return tail

    def singleton_counts(self) -> dict[int, int]:
        """Degree-1 droplets held by each honest node (forces materialization)."""
        out = {}
        for node in self.nodes:
            if node.honest:
                c = sum(1 for d in self.store(node.node_id).all_droplets() if d.degree == 1)
                if c:
                    out[node.node_id] = c
        return out


def _systematic(view: EpochView, m: int) -> Droplet:
    return Droplet(view.index, view.k, (m,), view.super_blocks[m])


def _opaque(view: EpochView) -> Droplet:
    # consistent but maximally redundant: always block 0
    return _systematic(view, 0)


def _murk(d: Droplet, view: EpochView, rng: np.random.Generator) -> Droplet:
    """Corrupt data bytes (each w.p. 1/2) and/or resample the vector until c != vB."""
    while True:
        how = int(rng.integers(3))  # 0 data, 1 vector, 2 both
        data, neighbors = d.data, d.neighbors
        if how in (0, 2) and data:
            buf = np.frombuffer(data, dtype=np.uint8).copy()
            hit = rng.random(buf.size) < 0.5
            buf[hit] ^= rng.integers(1, 256, size=int(hit.sum()), dtype=np.uint8)
            data = buf.tobytes()
        if how in (1, 2):
            deg = max(1, d.degree)
            neighbors = tuple(sorted(int(i) for i in rng.choice(view.k, size=deg, replace=False)))
        out = Droplet(d.epoch, d.k, neighbors, data)
        if not is_consistent(out, view.super_blocks):
            return out


def _forge_headers(headers: Sequence[Header]) -> list[Header]:
    fake = [Header(bytes([7]) * 32, bytes([i + 1]) * 32, 100, bytes(16)) for i in range(max(1, len(headers) // 10))]
    return list(headers) + fake


def _assign_roles(cfg: NetworkConfig, rng: np.random.Generator) -> tuple[list[str], int]:
    """Roles for N nodes plus the number of bribery slots left to fill."""
    n_adv = int(math.floor(cfg.sigma * cfg.N + 0.5))
    weights = dict(cfg.adversary_mix)
    kinds = [k for k in ADVERSARY_KINDS if weights.get(k, 0) > 0]
    counts = {k: int(math.floor(weights[k] * n_adv)) for k in kinds}
    rest = n_adv - sum(counts.values())
    # largest remainder, ties in ADVERSARY_KINDS order
    for k in sorted(kinds, key=lambda k: -(weights[k] * n_adv - counts[k]))[:rest]:
        counts[k] += 1
    roles = ["honest"] * cfg.N
    oblivious = [k for k in kinds if k != "singleton_bribery"]
    order = rng.permutation(cfg.N)
    pos = 0
    for k in oblivious:
        for i in order[pos : pos + counts[k]]:
            roles[int(i)] = k
        pos += counts[k]
    return roles, counts.get("singleton_bribery", 0)


def build_network(chain: Chain | ChainContext, cfg: NetworkConfig, seed: int | None = None) -> Network:
    """Draw node roles and private coins for one trial."""
    ctx = chain if isinstance(chain, ChainContext) else ChainContext(chain, cfg.epoch_cfg)
    seed = cfg.rng_seed if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xB11D,)))
    roles, n_bribe = _assign_roles(cfg, rng)
    seeds = rng.integers(0, 2**63, size=cfg.N)
    s_values = cfg.node_s or (cfg.epoch_cfg.s,)
    nodes = [SimNode(i, roles[i], int(seeds[i]), int(s_values[i % len(s_values)])) for i in range(cfg.N)]
    net = Network(ctx, cfg, nodes)
    if n_bribe:
        net = bribery_attack(net, n_bribe)
    return net


def bribery_attack(network: Network, budget: int) -> Network:
    """Silence up to ``budget`` honest nodes holding degree-1 droplets,
    most singletons first (ties by node id).  Returns a new network."""
    if budget <= 0:
        return network
    counts = network.singleton_counts()
    victims = sorted(counts, key=lambda i: (-counts[i], i))[:budget]
    nodes = [replace(n) for n in network.nodes]
    for i in victims:
        nodes[i].role = "silent"
        nodes[i].store = None
    return Network(network.ctx, network.cfg, nodes, network.pmf)


@dataclass
class BootstrapResult:
    success: bool
    mode: str
    nodes_contacted: int
    honest_contacted: int
    droplets_downloaded: int
    bytes_downloaded: int
    bytes_blockchain: int
    vector_bytes: int
    rejections: int
    xor_ops: int
    tail_ok: bool = True
    header_chain_ok: bool = True
    recovered: list[list[bytes]] | None = field(default=None, repr=False)

    @property
    def overhead(self) -> float:
        return (self.bytes_downloaded - self.bytes_blockchain) / self.bytes_blockchain

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "recovered"}
        d["overhead"] = self.overhead
        return d


def _acquire_header_chain(net: Network, rng: np.random.Generator) -> list[Header] | None:
    order = rng.permutation(net.N)
    sample = min(net.cfg.header_sample, net.N)
    pos = 0
    while pos < net.N:
        batch = order[pos : pos + sample] if pos else order[:sample]
        pos += len(batch)
        seen: dict[int, list[Header]] = {}
        for i in batch:
            h = net.header_chain_from(int(i))
            if h is not None:
                seen.setdefault(id(h), h)
        try:
            return longest_valid_header_chain(list(seen.values()))
        except NoValidChain:
            continue
    return None


def _valid_tail(tail: Sequence[Block], headers: Sequence[Header], start: int) -> bool:
    want = headers[start:]
    if len(tail) != len(want):
        return False
    return all(b.header == h and b.is_consistent() for b, h in zip(tail, want))


def bootstrap(
    network: Network,
    mode: str = "bulk",
    rng: np.random.Generator | int | None = None,
    order: Sequence[int] | None = None,
    keep_blocks: bool = False,
) -> BootstrapResult:
    """Recover every sealed epoch by contacting nodes in random order.

    ``bulk`` downloads all droplets and vectors of each responsive node;
    ``as_needed`` downloads only vectors and fetches a droplet's data when it
    is about to be used as a singleton.
    """
    if mode not in ("bulk", "as_needed"):
        raise ConfigError(f"unknown mode {mode!r}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    net, ctx, cfg = network, network.ctx, network.cfg
    headers = _acquire_header_chain(net, rng)
    chain_bytes = ctx.sealed_bytes
    if headers is None:
        return BootstrapResult(False, mode, net.N, 0, 0, 0, chain_bytes, 0, 0, 0, False, False)
    groups = ctx.groups_for(headers)

    def fetch(src):
        return src.data

    decoders = [
        PeelingDecoder(ctx.epoch_cfg.k, SlotVerifier(g), fetch if mode == "as_needed" else None) for g in groups
    ]
    order = rng.permutation(net.N) if order is None else np.asarray(order)
    n_init = cfg.n_initial or math.ceil(ctx.epoch_cfg.k / ctx.epoch_cfg.s)

    contacted = honest = n_dl = vec_bytes = data_bytes = 0
    tail_ok = not ctx.tail
    pos = 0
    done = all(d.done for d in decoders)
    while not done and pos < len(order):
        step = n_init if pos == 0 else cfg.n_hat
        batch = [[] for _ in decoders]
        for i in order[pos : pos + step]:
            i = int(i)
            contacted += 1
            honest += net.nodes[i].honest
            got = net.respond(i)
            if got is None:
                continue
            if not tail_ok:
                tail_ok = _valid_tail(net.tail_from(i) or [], headers, ctx.sealed_blocks)
            for d in got:
                if d.epoch < len(batch) and d.k == ctx.epoch_cfg.k:
                    batch[d.epoch].append(d)
                    vec_bytes += d.vector_size
                    n_dl += 1
                    if mode == "bulk":
                        data_bytes += len(d.data)
        pos += step
        for dec, items in zip(decoders, batch):
            if not items or dec.done:
                continue
            if mode == "bulk":
                dec.add(items)
            else:
                dec.add_vectors((d, d.neighbors) for d in items)
        done = all(d.done for d in decoders)

    if mode == "as_needed":
        data_bytes = sum(dec.fetched_bytes for dec in decoders)
        n_dl = sum(dec.fetched for dec in decoders)
    success = done and tail_ok
    return BootstrapResult(
        success=success,
        mode=mode,
        nodes_contacted=contacted,
        honest_contacted=honest,
        droplets_downloaded=n_dl,
        bytes_downloaded=data_bytes + vec_bytes,
        bytes_blockchain=chain_bytes,
        vector_bytes=vec_bytes,
        rejections=sum(len(d.rejected) for d in decoders),
        xor_ops=sum(d.xor_ops for d in decoders),
        tail_ok=tail_ok,
        recovered=[list(d.decoded) for d in decoders] if keep_blocks else None,
    )


def bootstrap_as_needed(network: Network, rng=None, order=None, keep_blocks: bool = False) -> BootstrapResult:
    return bootstrap(network, "as_needed", rng, order, keep_blocks)


def random_sampling_baseline(chain: Chain | ChainContext, cfg: NetworkConfig, seed: int | None = None,
                             rng=None, mode: str = "bulk") -> BootstrapResult:
    """One bootstrap against nodes that each keep s distinct uncoded blocks."""
    cfg = replace(cfg, scheme="random_sampling")
    return bootstrap(build_network(chain, cfg, seed), mode, rng)


# --- Monte-Carlo measurement ------------------------------------------------


@dataclass
class CostReport:
    cfg: NetworkConfig
    target: float
    mode: str
    results: list[BootstrapResult]

    @property
    def honest_costs(self) -> np.ndarray:
        return np.array([r.honest_contacted if r.success else np.inf for r in self.results], dtype=float)

    @property
    def nodes(self) -> np.ndarray:
        return np.array([r.nodes_contacted if r.success else np.inf for r in self.results], dtype=float)

    @property
    def k_hat(self) -> float:
        """Empirical ``target`` quantile of honest nodes contacted at success."""
        return float(np.quantile(self.honest_costs, self.target, method="inverted_cdf"))

    @property
    def success_rate(self) -> float:
        return float(np.mean([r.success for r in self.results]))

    def _ok(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.results if r.success], dtype=float)

    @property
    def mean_cost(self) -> float:
        v = self._ok("honest_contacted")
        return float(v.mean()) if v.size else math.inf

    @property
    def min_cost(self) -> float:
        v = self._ok("honest_contacted")
        return float(v.min()) if v.size else math.inf

    @property
    def max_cost(self) -> float:
        v = self._ok("honest_contacted")
        return float(v.max()) if v.size else math.inf

    @property
    def mean_nodes(self) -> float:
        v = self._ok("nodes_contacted")
        return float(v.mean()) if v.size else math.inf

    @property
    def mean_overhead(self) -> float:
        v = np.array([r.overhead for r in self.results if r.success])
        return float(v.mean()) if v.size else math.inf


def trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(trials)]


def _run_trial(args) -> BootstrapResult:
    ctx, cfg, seed, mode, keep = args
    net = build_network(ctx, cfg, seed)
    return bootstrap(net, mode, np.random.default_rng([seed, 1]), keep_blocks=keep)


def run_trials(
    chain: Chain | ChainContext,
    cfg: NetworkConfig,
    trials: int | None = None,
    mode: str = "bulk",
    workers: int = 1,
    keep_blocks: bool = False,
) -> list[BootstrapResult]:
    ctx = chain if isinstance(chain, ChainContext) else ChainContext(chain, cfg.epoch_cfg)
    seeds = trial_seeds(cfg.rng_seed, cfg.trials if trials is None else trials)
    jobs = [(ctx, cfg, s, mode, keep_blocks) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_run_trial(j) for j in jobs]


def measure_bootstrap_cost(
    chain: Chain | ChainContext,
    cfg: NetworkConfig,
    target_prob: float = 0.99,
    trials: int | None = None,
    mode: str = "bulk",
    workers: int = 1,
) -> CostReport:
    trials = cfg.trials if trials is None else trials
    return CostReport(cfg, target_prob, mode, run_trials(chain, cfg, trials, mode, workers))


# --- sweeps -----------------------------------------------------------------

TRIAL_FIELDS = (
    "experiment_id", "k", "s", "c", "delta", "sigma", "mode", "trial",
    "nodes_contacted", "honest_contacted", "bytes_down", "overhead", "success",
)
SUMMARY_FIELDS = (
    "experiment_id", "scheme", "k", "s", "gamma", "optimal", "c", "delta", "sigma", "mode",
    "trials", "k_hat", "mean_cost", "min_cost", "max_cost", "mean_nodes", "mean_overhead",
    "success_rate", "best",
)


@dataclass
class SweepReport:
    rows: list[dict]
    trial_rows: list[dict]

    def best(self) -> list[dict]:
        return [r for r in self.rows if r["best"]]

    def summary_csv(self) -> str:
        return to_csv(self.rows, SUMMARY_FIELDS)

    def trials_csv(self) -> str:
        return to_csv(self.trial_rows, TRIAL_FIELDS)


def to_csv(rows: Iterable[dict], fields: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items() if k in fields})
    return buf.getvalue()


@dataclass(frozen=True)
class SweepGrid:
    ks: tuple[tuple[int, int], ...]  # (k, s) pairs
    cs: tuple[float, ...] = (0.01, 0.03, 0.1, 0.3)
    deltas: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7)
    sigmas: tuple[float, ...] = (0.0,)
    modes: tuple[str, ...] = ("bulk",)
    schemes: tuple[str, ...] = ("sef",)


def sweep(
    grid: SweepGrid,
    base: NetworkConfig,
    chain_for: "callable",
    target_prob: float = 0.99,
    workers: int = 1,
) -> SweepReport:
    """Run every grid cell; ``chain_for(k, s)`` supplies the chain per (k, s).

    For each (scheme, k, s, sigma, mode) the (c, delta) pair with the lowest
    K-hat (then lowest mean cost) is flagged ``best``.  Parameter pairs whose
    robust soliton is undefined for that k are skipped.
    """
    if not grid.ks:
        raise ConfigError("empty grid")
    rows, trial_rows = [], []
    exp = 0
    for scheme in grid.schemes:
        for k, s in grid.ks:
            ctx = ChainContext(chain_for(k, s), replace(base.epoch_cfg, k=k, s=s))
            pairs = [(None, None)] if scheme == "random_sampling" else [(c, d) for c in grid.cs for d in grid.deltas]
            for sigma in grid.sigmas:
                for mode in grid.modes:
                    cell = []
                    for c, d in pairs:
                        cfg = replace(base, epoch_cfg=ctx.epoch_cfg, sigma=sigma, scheme=scheme,
                                      c=base.c if c is None else c, delta=base.delta if d is None else d)
                        try:
                            cfg.pmf()
                        except ConfigError:
                            continue
                        rep = measure_bootstrap_cost(ctx, cfg, target_prob, mode=mode, workers=workers)
                        row = {
                            "experiment_id": exp, "scheme": scheme, "k": k, "s": s, "gamma": k / s,
                            "optimal": math.ceil(k / s), "c": c if c is not None else "",
                            "delta": d if d is not None else "", "sigma": sigma, "mode": mode,
                            "trials": len(rep.results), "k_hat": rep.k_hat, "mean_cost": rep.mean_cost,
                            "min_cost": rep.min_cost, "max_cost": rep.max_cost, "mean_nodes": rep.mean_nodes,
                            "mean_overhead": rep.mean_overhead, "success_rate": rep.success_rate, "best": False,
                        }
                        for t, r in enumerate(rep.results):
                            trial_rows.append({
                                "experiment_id": exp, "k": k, "s": s, "c": row["c"], "delta": row["delta"],
                                "sigma": sigma, "mode": mode, "trial": t, "nodes_contacted": r.nodes_contacted,
                                "honest_contacted": r.honest_contacted, "bytes_down": r.bytes_downloaded,
                                "overhead": r.overhead, "success": int(r.success),
                            })
                        cell.append(row)
                        rows.append(row)
                        exp += 1
                    if cell:
                        min(cell, key=lambda r: (r["k_hat"], r["mean_cost"]))["best"] = True
    return SweepReport(rows, trial_rows)
