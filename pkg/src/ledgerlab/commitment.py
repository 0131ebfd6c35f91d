"""Salted hash commitments for predictions.

The committed preimage is::

    u32 len + salt | u32 len + UTF-8 subject | round u64 | u32 len + message

and the commitment digest is its SHA-256. A reveal record carries exactly
this preimage as its payload, so anyone holding the chain can re-hash it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ledgerlab.errors import BadSaltLength
from ledgerlab.hashchain import DIGEST_SIZE, Digest, Kind, Record, TruthLabel, sha256

SALT_SIZE = 16


@dataclass(frozen=True)
class Commitment:
    digest: Digest
    subject: str
    round: int

    def encode(self) -> bytes:
        subject = self.subject.encode("utf-8")
        return bytes(self.digest) + _lp(subject) + struct.pack(">Q", self.round)

    @classmethod
    def decode(cls, data: bytes) -> "Commitment":
        digest = Digest(data[:DIGEST_SIZE])
        subject, pos = _read_lp(data, DIGEST_SIZE)
        (round_,) = struct.unpack_from(">Q", data, pos)
        if pos + 8 != len(data):
            raise ValueError("trailing bytes after commitment")
        return cls(digest, subject.decode("utf-8"), round_)


@dataclass(frozen=True)
class Reveal:
    message: bytes
    salt: bytes
    subject: str
    round: int

    def __post_init__(self):
        if len(self.salt) != SALT_SIZE:
            raise BadSaltLength(f"salt must be {SALT_SIZE} bytes, got {len(self.salt)}")

    def encode(self) -> bytes:
        return preimage(self.message, self.salt, self.subject, self.round)

    @classmethod
    def decode(cls, data: bytes) -> "Reveal":
        salt, pos = _read_lp(data, 0)
        subject, pos = _read_lp(data, pos)
        (round_,) = struct.unpack_from(">Q", data, pos)
        message, pos = _read_lp(data, pos + 8)
        if pos != len(data):
            raise ValueError("trailing bytes after reveal")
        return cls(message, salt, subject.decode("utf-8"), round_)


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def _read_lp(data: bytes, pos: int) -> tuple[bytes, int]:
    (n,) = struct.unpack_from(">I", data, pos)
    pos += 4
    if pos + n > len(data):
        raise ValueError("length prefix runs past end of data")
    return data[pos:pos + n], pos + n


def preimage(message: bytes, salt: bytes, subject: str, round: int) -> bytes:
    if len(salt) != SALT_SIZE:
        raise BadSaltLength(f"salt must be {SALT_SIZE} bytes, got {len(salt)}")
    return (
        _lp(salt)
        + _lp(subject.encode("utf-8"))
        + struct.pack(">Q", round)
        + _lp(message)
    )


def commit(message: bytes, salt: bytes, subject: str, round: int) -> Commitment:
    return Commitment(sha256(preimage(message, salt, subject, round)), subject, round)


def verify_reveal(c: Commitment, r: Reveal) -> bool:
    if (c.subject, c.round) != (r.subject, r.round):
        return False
    return commit(r.message, r.salt, r.subject, r.round).digest == c.digest


def commit_record(c: Commitment) -> Record:
    return Record(f"C-{c.digest.hex()}", Kind.PREDICTION_COMMIT, c.encode(), TruthLabel.UNKNOWN)


def reveal_record(c: Commitment, r: Reveal, truth_label: TruthLabel = TruthLabel.UNKNOWN) -> Record:
    return Record(f"R-{c.digest.hex()}", Kind.PREDICTION_REVEAL, r.encode(), truth_label)
