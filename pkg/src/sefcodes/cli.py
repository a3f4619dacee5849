"""Command-line entry point: ``sefcodes {gen-chain,encode,bootstrap,sweep}``.

Each subcommand reads a JSON config (``--config``), applies flag overrides,
and writes artifacts that carry the resolved spec.  Nothing time- or
host-dependent goes into an artifact, so reruns are byte-identical.

Exit codes: 0 success, 1 config error, 2 integrity error, 3 decode exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .codec import decode
from .epoch import EpochConfig, NodeStore, seal_all, storage_savings, store_snapshot
from .errors import ConfigError, IntegrityError, ParseError
from .hashchain import Chain, ChainGenConfig, generate_chain, load_chain, store_chain
from .sim import TRIAL_FIELDS, NetworkConfig, SweepGrid, chain_for_epochs, run_trials, sweep, to_csv
from .soliton import SolitonParams, ideal_soliton, robust_soliton
from .toy import TOY_K, toy_fixture

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRITY, EXIT_EXHAUSTED = 0, 1, 2, 3

MODES = {"bulk": "bulk", "as-needed": "as_needed"}
BASELINES = {"sef": "sef", "random-sampling": "random_sampling"}


class DecodeExhausted(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load_config(path: str | None) -> tuple[dict, Path]:
    if path is None:
        return {}, Path.cwd()
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except ValueError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg, Path(path).resolve().parent


def _require_out(args) -> Path:
    if not args.out:
        raise ConfigError(f"{args.command} needs --out")
    return Path(args.out)


def _write(path: Path, text: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(text, bytes):
        path.write_bytes(text)
    else:
        path.write_text(text)


def _chain_from(spec, base: Path, epoch_cfg: EpochConfig | None = None) -> tuple[Chain, object]:
    """``spec`` is a chain file path or an inline chain-gen config."""
    if isinstance(spec, str):
        p = Path(spec)
        return load_chain(p if p.is_absolute() else base / p), spec
    if isinstance(spec, dict):
        spec = dict(spec)
        epochs = int(spec.pop("epochs", 1))
        gen = ChainGenConfig.from_dict(spec)
        gen.size_model.validate()
        if epoch_cfg is None:
            return generate_chain(gen), gen.to_dict()
        chain = chain_for_epochs(gen, epoch_cfg, epochs)
        return chain, dict(gen.to_dict(), n_blocks=chain.height, epochs=epochs)
    raise ConfigError("'chain' must be a file path or a chain-gen object")


def _epoch_cfg(d: dict) -> EpochConfig:
    try:
        return EpochConfig(**d)
    except TypeError as e:
        raise ConfigError(f"bad epoch config: {e}") from None


def _pmf(k: int, sol: dict):
    degree = sol.get("degree", "robust")
    if degree == "ideal":
        return ideal_soliton(k)
    if degree != "robust":
        raise ConfigError(f"unknown degree distribution {degree!r}")
    return robust_soliton(SolitonParams(k, float(sol.get("c", 0.03)), float(sol.get("delta", 0.5))))


# --- subcommands ------------------------------------------------------------


def cmd_gen_chain(args) -> int:
    cfg, _ = _load_config(args.config)
    cfg = cfg.get("chain", cfg)
    if args.seed is not None:
        cfg = dict(cfg, rng_seed=args.seed)
    gen = ChainGenConfig.from_dict(cfg)
    gen.size_model.validate()
    if gen.n_blocks < 1:
        raise ConfigError("n_blocks must be >= 1")
    out = _require_out(args)
    chain = generate_chain(gen)
    out.parent.mkdir(parents=True, exist_ok=True)
    store_chain(chain, out)
    spec = {"command": "gen-chain", "chain": gen.to_dict()}
    _write(out.with_name(out.name + ".spec.json"), _dumps(spec))
    print(f"wrote {chain.height} blocks, {chain.size} bytes, mean payload {gen.size_model.mean():.1f} to {out}")
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg, base = _load_config(args.config)
    if "chain" not in cfg:
        raise ConfigError("encode config needs 'chain'")
    ecfg = _epoch_cfg(cfg.get("epoch", {}))
    sol = dict(cfg.get("soliton", {}))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    node_id = int(cfg.get("node_id", 0))
    pmf = _pmf(ecfg.k, sol)
    chain, chain_spec = _chain_from(cfg["chain"], base)
    out = _require_out(args)
    store = seal_all(NodeStore(node_id, seed, ecfg), chain, pmf)
    if not store.records:
        raise ConfigError(f"chain of height {chain.height} seals no epoch of k={ecfg.k}, tau={ecfg.tau}")
    spec = {
        "command": "encode",
        "chain": chain_spec,
        "epoch": asdict(ecfg),
        "soliton": pmf.describe(),
        "seed": seed,
        "node_id": node_id,
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    store_snapshot(store, out, extra=spec)
    sav = storage_savings(store)
    print(f"gamma={sav.gamma:.2f} epochs={len(store.records)} droplet_bytes={sav.droplet_bytes} -> {out}")
    return EXIT_OK


def _bootstrap_toy(args, cfg) -> int:
    fx = toy_fixture(**cfg.get("fixture_args", {}))
    groups = tuple(fx.epoch.groups)
    dec = decode(fx.droplets, groups).state
    result = {
        "success": dec.done,
        "decoded": dec.n_decoded,
        "accepted": [did + 1 for did, _ in dec.accepted],
        "rejected": [did + 1 for did in dec.rejected],
        "matches_original": dec.done and list(dec.decoded) == list(fx.epoch.super_blocks),
    }
    spec = {"command": "bootstrap", "fixture": "toy", "k": TOY_K, "fixture_args": cfg.get("fixture_args", {})}
    doc = {"spec": spec, "result": result}
    if args.out:
        _write(Path(args.out) / "bootstrap.json", _dumps(doc))
    print(_dumps(result), end="")
    if not dec.done:
        raise DecodeExhausted("toy fixture did not decode")
    return EXIT_OK


def _network_cfg(cfg: dict, args) -> NetworkConfig:
    net = dict(cfg.get("network", {}))
    if "epoch_cfg" not in net:
        net["epoch_cfg"] = cfg.get("epoch", {})
    if args.seed is not None:
        net["rng_seed"] = args.seed
    if args.trials is not None:
        net["trials"] = args.trials
    if getattr(args, "baseline", None):
        net["scheme"] = BASELINES[args.baseline]
    return NetworkConfig.from_dict(net)


def cmd_bootstrap(args) -> int:
    cfg, base = _load_config(args.config)
    if cfg.get("fixture") == "toy":
        return _bootstrap_toy(args, cfg)
    if "chain" not in cfg:
        raise ConfigError("bootstrap config needs 'chain' or 'fixture'")
    ncfg = _network_cfg(cfg, args)
    ncfg.pmf()
    mode = MODES[args.mode or cfg.get("mode", "bulk").replace("_", "-")]
    chain, chain_spec = _chain_from(cfg["chain"], base, ncfg.epoch_cfg)
    results = run_trials(chain, ncfg, mode=mode, workers=args.workers)
    rows = []
    for t, r in enumerate(results):
        rows.append({
            "experiment_id": 0, "k": ncfg.epoch_cfg.k, "s": ncfg.epoch_cfg.s, "c": ncfg.c, "delta": ncfg.delta,
            "sigma": ncfg.sigma, "mode": mode, "trial": t, "nodes_contacted": r.nodes_contacted,
            "honest_contacted": r.honest_contacted, "bytes_down": r.bytes_downloaded,
            "overhead": r.overhead, "success": int(r.success),
        })
    spec = {"command": "bootstrap", "chain": chain_spec, "network": ncfg.to_dict(), "mode": mode}
    ok = [r for r in results if r.success]
    summary = {
        "trials": len(results),
        "successes": len(ok),
        "mean_nodes": sum(r.nodes_contacted for r in ok) / len(ok) if ok else None,
        "mean_honest": sum(r.honest_contacted for r in ok) / len(ok) if ok else None,
        "mean_overhead": sum(r.overhead for r in ok) / len(ok) if ok else None,
    }
    doc = {"spec": spec, "summary": summary, "results": [r.to_dict() for r in results]}
    if args.out:
        out = Path(args.out)
        _write(out / "bootstrap.json", _dumps(doc))
        _write(out / "trials.csv", _csv_with_spec(spec, to_csv(rows, TRIAL_FIELDS)))
    print(_dumps(summary), end="")
    if len(ok) < len(results):
        raise DecodeExhausted(f"{len(results) - len(ok)} of {len(results)} trials ran out of nodes")
    return EXIT_OK


def _csv_with_spec(spec: dict, body: str) -> str:
    return "# spec=" + json.dumps(spec, sort_keys=True) + "\n" + body


def cmd_sweep(args) -> int:
    cfg, base = _load_config(args.config)
    g = dict(cfg.get("grid", {}))
    if "ks" not in g:
        raise ConfigError("sweep config needs grid.ks, a list of [k, s] pairs")
    modes = [args.mode] if args.mode else g.get("modes", ["bulk"])
    schemes = [args.baseline] if args.baseline else g.get("schemes", ["sef"])
    try:
        grid = SweepGrid(
            ks=tuple((int(k), int(s)) for k, s in g["ks"]),
            cs=tuple(g.get("cs", SweepGrid.cs)),
            deltas=tuple(g.get("deltas", SweepGrid.deltas)),
            sigmas=tuple(g.get("sigmas", SweepGrid.sigmas)),
            modes=tuple(MODES[m.replace("_", "-")] for m in modes),
            schemes=tuple(BASELINES[b.replace("_", "-")] for b in schemes),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigError(f"bad grid: {e}") from None
    k0, s0 = grid.ks[0]
    cfg = dict(cfg, epoch=dict(cfg.get("epoch", {}), k=k0, s=s0))
    ncfg = _network_cfg(cfg, argparse.Namespace(seed=args.seed, trials=args.trials, baseline=None))
    chain_spec = cfg.get("chain")
    if not isinstance(chain_spec, dict):
        raise ConfigError("sweep needs an inline chain-gen config under 'chain'")

    def chain_for(k, s):
        return _chain_from(chain_spec, base, replace(ncfg.epoch_cfg, k=k, s=s))[0]

    report = sweep(grid, ncfg, chain_for, float(cfg.get("target_prob", 0.99)), workers=args.workers)
    spec = {
        "command": "sweep",
        "chain": chain_spec,
        "network": ncfg.to_dict(),
        "grid": {key: list(v) for key, v in asdict(grid).items()},
        "target_prob": float(cfg.get("target_prob", 0.99)),
    }
    out = _require_out(args)
    _write(out / "summary.csv", _csv_with_spec(spec, report.summary_csv()))
    _write(out / "trials.csv", _csv_with_spec(spec, report.trials_csv()))
    for r in report.best():
        print(
            f"{r['scheme']} k={r['k']} s={r['s']} sigma={r['sigma']} mode={r['mode']}: "
            f"best c={r['c']} delta={r['delta']} k_hat={r['k_hat']:g} mean={r['mean_cost']:.1f} optimal={r['optimal']}"
        )
    return EXIT_OK


# --- plumbing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sefcodes", description="Secure fountain code simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, trials=False, mode=False, baseline=False, workers=False):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output file or directory")
        if trials:
            sp.add_argument("--trials", type=int, help="Monte-Carlo trials")
        if mode:
            sp.add_argument("--mode", choices=sorted(MODES), help="droplet download mode")
        if baseline:
            sp.add_argument("--baseline", choices=sorted(BASELINES), help="storage scheme")
        if workers:
            sp.add_argument("--workers", type=int, default=1, help="parallel trial workers")
        return sp

    common(sub.add_parser("gen-chain", help="generate a synthetic chain file")).set_defaults(func=cmd_gen_chain)
    common(sub.add_parser("encode", help="seal a chain into a droplet-node snapshot")).set_defaults(func=cmd_encode)
    common(
        sub.add_parser("bootstrap", help="simulate bucket-node bootstraps"), True, True, True, True
    ).set_defaults(func=cmd_bootstrap)
    common(
        sub.add_parser("sweep", help="grid sweep over (k, s, c, delta, sigma)"), True, True, True, True
    ).set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrityError, ParseError) as e:
        print(f"integrity error: {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    except DecodeExhausted as e:
        print(f"decode exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED


if __name__ == "__main__":
    sys.exit(main())
