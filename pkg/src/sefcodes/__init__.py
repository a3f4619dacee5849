"""Secure fountain (SeF) codes for blockchain storage.

Nodes keep a handful of LT-coded droplets per epoch instead of every block;
a bootstrapping node collects droplets from peers and peels them back into
the chain, checking every recovered block against the header hash-chain.
"""

from .codec import Droplet, EpochView, PeelingDecoder, decode, encode_droplet, is_consistent
from .epoch import EpochConfig, NodeStore, epoch_view, seal_all, seal_epoch, storage_savings
from .errors import (
    ConfigError,
    EmptyPayload,
    InsufficientDroplets,
    IntegrityError,
    NotFinalizedError,
    NoValidChain,
    ParseError,
    SefError,
)
from .hashchain import Block, Chain, ChainGenConfig, Header, SizeModel, generate_chain, load_chain, store_chain
from .sim import NetworkConfig, bootstrap, build_network, measure_bootstrap_cost, run_trials, sweep
from .soliton import DegreePmf, SolitonParams, ideal_soliton, robust_soliton

__version__ = "0.1.0"

__all__ = [
    "Block", "Chain", "ChainGenConfig", "ConfigError", "DegreePmf", "Droplet", "EmptyPayload", "EpochConfig",
    "EpochView", "Header", "InsufficientDroplets", "IntegrityError", "NetworkConfig", "NoValidChain", "NodeStore",
    "NotFinalizedError", "ParseError", "PeelingDecoder", "SefError", "SizeModel", "SolitonParams", "bootstrap",
    "build_network", "decode", "encode_droplet", "epoch_view", "generate_chain", "ideal_soliton", "is_consistent",
    "load_chain", "measure_bootstrap_cost", "robust_soliton", "run_trials", "seal_all", "seal_epoch",
    "storage_savings", "store_chain", "sweep",
]
