"""Permanence audits for records of any truth value.

The ledger stores false records exactly as it stores true ones. These helpers
inject labelled records and check, later, that a record is still there and
byte-for-byte unchanged; the label never influences either step.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from ledgerlab import hashchain
from ledgerlab.hashchain import Chain, Record, TruthLabel


@dataclass(frozen=True)
class PermanenceAudit:
    record_id: str
    present: bool
    byte_identical: bool
    block_index: int | None
    truth_label: TruthLabel | None

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "present": self.present,
            "byte_identical": self.byte_identical,
            "block_index": self.block_index,
            "truth_label": self.truth_label.value if self.truth_label else None,
        }


@dataclass(frozen=True)
class TruthStatistics:
    total: int
    labeled_true: int
    labeled_false: int
    labeled_unknown: int

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "labeled_true": self.labeled_true,
            "labeled_false": self.labeled_false,
            "labeled_unknown": self.labeled_unknown,
        }


def inject(chain: Chain, records: Iterable[Record], timestamp: int) -> Chain:
    return hashchain.append(chain, records, timestamp)


def audit_permanence(chain: Chain, record_id: str, original: Record) -> PermanenceAudit:
    found = chain.find(record_id)
    if found is None:
        return PermanenceAudit(record_id, False, False, None, None)
    index, stored = found
    same = stored.payload == original.payload and stored.kind is original.kind
    return PermanenceAudit(record_id, True, same, index, stored.truth_label)


def truth_statistics(chain: Chain) -> TruthStatistics:
    counts = Counter(record.truth_label for _, record in chain.records())
    return TruthStatistics(
        total=sum(counts.values()),
        labeled_true=counts[TruthLabel.TRUE],
        labeled_false=counts[TruthLabel.FALSE],
        labeled_unknown=counts[TruthLabel.UNKNOWN],
    )
