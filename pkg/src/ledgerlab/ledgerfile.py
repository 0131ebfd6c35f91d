"""JSON Lines ledger files, one block per line.

    {"index":N,"timestamp":N,"prev_hash":"<hex>","hash":"<hex>",
     "records":[{"id":..,"kind":..,"payload":"<base64>","truth_label":..}]}

``hash`` is the digest the block was sealed with. The JSON text is never
hashed; loading rebuilds the binary encoding from the decoded fields.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import tempfile
from pathlib import Path

from ledgerlab.errors import ParseError
from ledgerlab.hashchain import Block, Chain, Digest, Kind, Record, TruthLabel


def record_to_dict(r: Record) -> dict:
    return {
        "id": r.id,
        "kind": r.kind.value,
        "payload": base64.b64encode(r.payload).decode("ascii"),
        "truth_label": r.truth_label.value,
    }


def record_from_dict(d: dict) -> Record:
    """Build a record; ``text`` may stand in for a base64 ``payload``."""
    if "payload" in d:
        payload = base64.b64decode(d["payload"], validate=True)
    elif "text" in d:
        payload = d["text"].encode("utf-8")
    else:
        raise KeyError("payload")
    return Record(
        id=str(d["id"]),
        kind=Kind(d.get("kind", Kind.GARBAGE.value)),
        payload=payload,
        truth_label=TruthLabel(d.get("truth_label", TruthLabel.UNKNOWN.value)),
    )


def block_to_dict(b: Block) -> dict:
    return {
        "index": b.index,
        "timestamp": b.timestamp,
        "prev_hash": b.prev_hash.hex(),
        "hash": b.digest.hex(),
        "records": [record_to_dict(r) for r in b.records],
    }


def block_from_dict(d: dict) -> Block:
    return Block(
        index=_nonneg_int(d["index"]),
        timestamp=_nonneg_int(d["timestamp"]),
        records=tuple(record_from_dict(r) for r in d["records"]),
        prev_hash=Digest(bytes.fromhex(d["prev_hash"])),
        digest=Digest(bytes.fromhex(d["hash"])),
    )


def _nonneg_int(v) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ValueError(f"expected a non-negative integer, got {v!r}")
    return v


def dumps(chain: Chain) -> str:
    return "".join(
        json.dumps(block_to_dict(b), separators=(",", ":")) + "\n" for b in chain
    )


def loads(text: str) -> Chain:
    blocks = []
    lines = text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            blocks.append(block_from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError, binascii.Error) as exc:
            raise ParseError(f"{type(exc).__name__}: {exc}", lineno) from exc
    if not blocks:
        raise ParseError("ledger holds no blocks")
    return Chain(tuple(blocks))


def load(path: str | os.PathLike) -> Chain:
    return loads(Path(path).read_text(encoding="utf-8"))


def atomic_write(path: str | os.PathLike, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump(chain: Chain, path: str | os.PathLike) -> None:
    atomic_write(path, dumps(chain))
