"""Append-only hash-linked ledger.

Blocks are sealed with SHA-256 over a fixed binary encoding::

    index       u64 big-endian
    timestamp   u64 big-endian (logical ticks)
    prev_hash   32 raw bytes
    per record: kind tag (1 byte)
                u32 length + UTF-8 id
                u32 length + payload

A record's ``truth_label`` is simulation ground truth and never enters the
encoding. Chains are immutable values: ``append`` and ``tamper`` return new
chains and leave their input untouched.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from ledgerlab.errors import AppendToInvalidChain, DuplicateRecordId, OutOfRange

DIGEST_SIZE = 32


class Digest(bytes):
    """A 32-byte SHA-256 output."""

    def __new__(cls, value: bytes):
        if len(value) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {len(value)}")
        return super().__new__(cls, value)

    @classmethod
    def zero(cls) -> "Digest":
        return cls(b"\x00" * DIGEST_SIZE)

    def __repr__(self) -> str:
        return f"Digest({self.hex()[:16]}...)"


def sha256(data: bytes) -> Digest:
    return Digest(hashlib.sha256(data).digest())


class Kind(enum.Enum):
    TRANSACTION = "Transaction"
    PREDICTION_COMMIT = "PredictionCommit"
    PREDICTION_REVEAL = "PredictionReveal"
    GARBAGE = "Garbage"
    NOTE = "Note"

    @property
    def tag(self) -> int:
        return _KIND_TAGS[self]


_KIND_TAGS = {kind: i for i, kind in enumerate(Kind)}


class TruthLabel(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Record:
    id: str
    kind: Kind
    payload: bytes
    truth_label: TruthLabel = TruthLabel.UNKNOWN

    def encode(self) -> bytes:
        ident = self.id.encode("utf-8")
        return (
            struct.pack(">BI", self.kind.tag, len(ident))
            + ident
            + struct.pack(">I", len(self.payload))
            + self.payload
        )


@dataclass(frozen=True)
class Block:
    index: int
    timestamp: int
    records: tuple[Record, ...]
    prev_hash: Digest
    # Digest recorded when the block was sealed. Verification recomputes it,
    # so the tip of a chain is tamper-evident even without a successor.
    digest: Digest = field(default_factory=Digest.zero)

    def encode(self) -> bytes:
        return self._encoded

    # Blocks are frozen and edits go through dataclasses.replace, which
    # builds a fresh instance, so the cached bytes can never go stale.
    @cached_property
    def _encoded(self) -> bytes:
        if self.index < 0 or self.timestamp < 0:
            raise ValueError("index and timestamp must be non-negative")
        head = struct.pack(">QQ", self.index, self.timestamp) + bytes(self.prev_hash)
        return head + b"".join(r.encode() for r in self.records)

    @property
    def payload_bytes(self) -> bytes:
        return b"".join(r.payload for r in self.records)


def hash_block(block: Block) -> Digest:
    return sha256(block.encode())


def seal_block(index: int, timestamp: int, records: Iterable[Record], prev_hash: bytes) -> Block:
    block = Block(index, timestamp, tuple(records), Digest(prev_hash))
    return replace(block, digest=hash_block(block))


@dataclass(frozen=True)
class TamperReport:
    valid: bool
    first_broken_index: int | None = None

    def to_dict(self) -> dict:
        return {"valid": self.valid, "first_broken_index": self.first_broken_index}


@dataclass(frozen=True)
class Chain:
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a chain holds at least the genesis block")
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i: int) -> Block:
        return self.blocks[i]

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    @property
    def tip_digest(self) -> Digest:
        return hash_block(self.tip)

    def records(self) -> Iterator[tuple[int, Record]]:
        """Yield ``(block_index, record)`` for every record, in chain order."""
        for block in self.blocks:
            for record in block.records:
                yield block.index, record

    def find(self, record_id: str) -> tuple[int, Record] | None:
        for index, record in self.records():
            if record.id == record_id:
                return index, record
        return None


def _check_unique(records: Sequence[Record], existing: Iterable[str] = ()) -> None:
    seen = set(existing)
    for r in records:
        if r.id in seen:
            raise DuplicateRecordId(f"record id {r.id!r} already present")
        seen.add(r.id)


def genesis(records: Iterable[Record] = (), timestamp: int = 0) -> Chain:
    records = tuple(records)
    _check_unique(records)
    return Chain((seal_block(0, timestamp, records, Digest.zero()),))


def append(chain: Chain, records: Iterable[Record], timestamp: int) -> Chain:
    """Seal ``records`` into a new block linked to the current tip.

    Timestamps are logical and need not increase.
    """
    report = verify_chain(chain)
    if not report.valid:
        raise AppendToInvalidChain(f"chain broken at block {report.first_broken_index}")
    records = tuple(records)
    _check_unique(records, (r.id for _, r in chain.records()))
    block = seal_block(len(chain), timestamp, records, hash_block(chain.tip))
    return Chain(chain.blocks + (block,))


def verify_chain(chain: Chain) -> TamperReport:
    blocks = chain.blocks
    for i, block in enumerate(blocks):
        if block.index != i:
            return TamperReport(False, i)
        if i == 0 and block.prev_hash != Digest.zero():
            return TamperReport(False, 0)
        actual = hash_block(block)
        if actual != block.digest:
            return TamperReport(False, i)
        if i + 1 < len(blocks) and blocks[i + 1].prev_hash != actual:
            return TamperReport(False, i)
    return TamperReport(True)


def tamper(chain: Chain, block_index: int, byte_offset: int, new_byte: int) -> Chain:
    """Overwrite one byte of a block's concatenated record payloads.

    The block keeps its sealed digest, i.e. this models an in-place edit of
    stored data, not a re-mined block.
    """
    if not 0 <= block_index < len(chain):
        raise OutOfRange(f"block index {block_index} outside 0..{len(chain) - 1}")
    if not 0 <= new_byte <= 0xFF:
        raise OutOfRange(f"byte value {new_byte} outside 0..255")
    block = chain[block_index]
    if not 0 <= byte_offset < len(block.payload_bytes):
        raise OutOfRange(
            f"offset {byte_offset} outside payload of {len(block.payload_bytes)} bytes"
        )

    records = list(block.records)
    offset = byte_offset
    for j, record in enumerate(records):
        if offset < len(record.payload):
            payload = bytearray(record.payload)
            payload[offset] = new_byte
            records[j] = replace(record, payload=bytes(payload))
            break
        offset -= len(record.payload)

    blocks = list(chain.blocks)
    blocks[block_index] = replace(block, records=tuple(records))
    return Chain(tuple(blocks))
