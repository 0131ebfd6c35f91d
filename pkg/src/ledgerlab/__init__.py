"""Hash-chain ledger, commitment, and Bayesian trust simulation toolkit."""

from ledgerlab.hashchain import (
    Block,
    Chain,
    Digest,
    Kind,
    Record,
    TamperReport,
    TruthLabel,
    append,
    genesis,
    hash_block,
    tamper,
    verify_chain,
)

__version__ = "0.1.0"
