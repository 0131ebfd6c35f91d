"""Scripted end-to-end scenarios and their reports.

A scenario runs the prediction scheme, appends a block of labelled junk to
the resulting ledger, and re-derives each claim verdict from the raw chain
and transcript. Given the same config, every digest and trust value in the
report is identical run to run; only ``generated_at`` differs.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io
import json
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from ledgerlab import fraud_sim, garbage, hashchain, ledgerfile
from ledgerlab.epistemics import check_prior, check_theta
from ledgerlab.errors import BadPrior, BadTheta, ConfigError, WitnessFailed
from ledgerlab.hashchain import Chain, TamperReport, TruthLabel

SEED_ENV = "LEDGERLAB_SEED"
REPORT_FORMATS = ("json", "csv-summary")

CLAIM_TAMPER = "tamper_detection"
CLAIM_NOT_TRUTHFUL = "immutability_not_truthfulness"
CLAIM_PERMANENCE = "garbage_permanence"
CLAIM_NOT_TRUST = "immutability_not_trust"

DEFAULT_GARBAGE = (
    {"id": "g-false-1", "kind": "Garbage", "truth_label": "false",
     "text": "ACME insiders guarantee a 300% rally by Friday"},
    {"id": "g-false-2", "kind": "Garbage", "truth_label": "false",
     "text": "reserves audited and fully backed 1:1"},
    {"id": "g-false-3", "kind": "Note", "truth_label": "false",
     "text": "competitor CEO arrested for fraud"},
    {"id": "g-unknown-1", "kind": "Garbage", "truth_label": "unknown",
     "text": "this oracle is never wrong"},
    {"id": "g-true-1", "kind": "Transaction", "truth_label": "true",
     "text": "alice pays bob 5"},
)


@dataclass
class ScenarioConfig:
    name: str = "default"
    seed: int = 42
    k: int = 4
    theta: float = 0.75
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    subject: str = fraud_sim.DEFAULT_SUBJECT
    garbage: list[dict] = field(default_factory=lambda: [dict(g) for g in DEFAULT_GARBAGE])
    ledger_out: str | None = None
    report_out: str | None = None
    report_format: str = "json"

    def validate(self) -> "ScenarioConfig":
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or not 1 <= self.k <= fraud_sim.MAX_K:
            raise ConfigError(f"k must be an integer in [1, {fraud_sim.MAX_K}], got {self.k!r}")
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"report_format must be one of {REPORT_FORMATS}")
        try:
            check_theta(self.theta)
            check_prior(self.prior_alpha, self.prior_beta)
            records = [ledgerfile.record_from_dict(g) for g in self.garbage]
        except (BadTheta, BadPrior) as exc:
            raise ConfigError(str(exc)) from exc
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad garbage record: {exc}") from exc
        if len({r.id for r in records}) != len(records):
            raise ConfigError("garbage record ids must be unique")
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(d))


def resolve_config(
    file_values: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ScenarioConfig:
    """Merge config sources. Precedence: overrides > $LEDGERLAB_SEED > file."""
    values = dict(file_values or {})
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            values["seed"] = int(env[SEED_ENV])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer") from exc
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ScenarioConfig.from_dict(values).validate()


def load_config_file(path: str | os.PathLike) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data


@dataclass
class ScenarioReport:
    config: dict
    witness: dict
    chain: dict
    scheme: dict
    truth_statistics: dict
    agents: list[dict]
    claims: dict
    generated_at: str = ""

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.claims.values())

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioReport":
        return cls(**dict(d))


def _verdict(ok: bool, detail: str, **extra) -> dict:
    return {"status": "pass" if ok else "fail", "detail": detail, **extra}


def _check_tamper_detection(chain: Chain, seed: int) -> dict:
    rng = random.Random(f"{seed}:tamper")
    candidates = [b.index for b in chain if b.payload_bytes]
    if not candidates:
        return _verdict(False, "no block carries payload to mutate")
    index = rng.choice(candidates)
    payload = chain[index].payload_bytes
    offset = rng.randrange(len(payload))
    new_byte = (payload[offset] + rng.randrange(1, 256)) % 256
    before = hashchain.verify_chain(chain)
    after = hashchain.verify_chain(hashchain.tamper(chain, index, offset, new_byte))
    ok = before.valid and after == TamperReport(False, index)
    return _verdict(
        ok,
        f"mutated block {index} offset {offset}: detected at {after.first_broken_index}",
        block_index=index,
        byte_offset=offset,
    )


def _check_not_truthful(chain: Chain) -> dict:
    # Replay every false record of the run into a chain of its own: an
    # append-only log in which no statement is true, yet which verifies.
    false_records = [r for _, r in chain.records() if r.truth_label is TruthLabel.FALSE]
    if not false_records:
        return _verdict(False, "run produced no false records")
    log = hashchain.append(hashchain.genesis(), false_records, 1)
    every_false = all(r.truth_label is TruthLabel.FALSE for _, r in log.records())
    ok = hashchain.verify_chain(log).valid and every_false and hashchain.verify_chain(chain).valid
    return _verdict(ok, f"{len(false_records)} false records held in a valid log")


def _check_permanence(chain: Chain, originals) -> dict:
    audits = [garbage.audit_permanence(chain, r.id, r) for r in originals]
    ok = all(a.present and a.byte_identical for a in audits)
    return _verdict(ok, f"{sum(a.byte_identical for a in audits)}/{len(audits)} records retrieved unchanged")


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Run ``config`` and write its ledger/report files when paths are set."""
    report, chain = build_scenario(config)
    if config.ledger_out:
        ledgerfile.dump(chain, config.ledger_out)
    if config.report_out:
        export_report(report, config.report_out, config.report_format)
    return report


def build_scenario(config: ScenarioConfig) -> tuple[ScenarioReport, Chain]:
    config.validate()
    transcript = fraud_sim.run_scheme(config.k, config.theta, config.seed, config.subject)

    junk = [ledgerfile.record_from_dict(g) for g in config.garbage]
    chain = garbage.inject(transcript.chain, junk, transcript.chain.tip.timestamp + 1)

    prior = (config.prior_alpha, config.prior_beta)
    try:
        w = fraud_sim.counterexample_witness(transcript, config.theta, *prior)
        witness = {**w.to_dict(), "failed_leg": None, "detail": ""}
        not_trust = _verdict(True, "chain verifies; survivor trusts; auditor does not")
    except WitnessFailed as exc:
        witness = {**exc.witness.to_dict(), "failed_leg": exc.leg, "detail": exc.detail}
        not_trust = _verdict(False, exc.detail, failed_leg=exc.leg)

    agents = [
        fraud_sim.recipient_agent(transcript, v.recipient_id, config.theta, *prior).to_dict()
        for v in transcript.views
    ]
    agents.append(fraud_sim.auditor_agent(transcript, config.theta, *prior).to_dict())

    scheme = fraud_sim.transcript_report(transcript)
    del scheme["views"]
    scheme["survivor"] = fraud_sim.final_survivor(transcript).recipient_id

    return ScenarioReport(
        config=config.to_dict(),
        witness=witness,
        chain={
            "length": len(chain),
            "tip_digest": chain.tip_digest.hex(),
            "valid": hashchain.verify_chain(chain).valid,
        },
        scheme=scheme,
        truth_statistics=garbage.truth_statistics(chain).to_dict(),
        agents=agents,
        claims={
            CLAIM_TAMPER: _check_tamper_detection(chain, config.seed),
            CLAIM_NOT_TRUTHFUL: _check_not_truthful(chain),
            CLAIM_PERMANENCE: _check_permanence(chain, junk),
            CLAIM_NOT_TRUST: not_trust,
        },
        generated_at=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    ), chain


def verify_ledger_file(path: str | os.PathLike) -> TamperReport:
    return hashchain.verify_chain(ledgerfile.load(path))


CSV_FIELDS = ("id", "theta", "alpha", "beta", "observations", "successes", "trust_value", "trusted")


def report_csv(report: ScenarioReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for a in report.agents:
        writer.writerow([
            a["id"], a["theta"], a["alpha"], a["beta"],
            len(a["observations"]),
            sum(1 for o in a["observations"] if o["correct"]),
            repr(a["trust_value"]),
            str(a["trusted"]).lower(),
        ])
    return buf.getvalue()


def export_report(report: ScenarioReport, path: str | os.PathLike, format: str = "json") -> None:
    if format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    elif format == "csv-summary":
        text = report_csv(report)
    else:
        raise ValueError(f"unknown report format {format!r}; expected one of {REPORT_FORMATS}")
    ledgerfile.atomic_write(path, text)
