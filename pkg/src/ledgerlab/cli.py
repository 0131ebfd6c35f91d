"""ledgerlab command line.

\b
    ledgerlab ledger verify LEDGER
    ledgerlab ledger tamper LEDGER --block I --offset J --byte B --out PATH
    ledgerlab fraud run --k 4 --theta 0.75 --seed 42 --ledger-out L --report-out R
    ledgerlab garbage inject --ledger L --spec records.json
    ledgerlab garbage audit --ledger L --id RECORD_ID
    ledgerlab scenario run [--config cfg.json] [--seed N] ...

Exit codes: 0 success, 1 a checked claim failed, 2 usage or parse error.
"""

from __future__ import annotations

import json
import sys

import click

from ledgerlab import fraud_sim, garbage, hashchain, ledgerfile, scenario
from ledgerlab.errors import LedgerLabError, ParseError, WitnessFailed

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2))


def _fail_usage(msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_USAGE)


def _load_chain(path: str) -> hashchain.Chain:
    try:
        return ledgerfile.load(path)
    except ParseError as exc:
        _fail_usage(f"{path}: {exc}")
    except OSError as exc:
        _fail_usage(str(exc))


@click.group()
def cli() -> None:
    """Hash-chain ledger and trust-scheme simulator."""


# ---------------------------------------------------------------- ledger

@cli.group()
def ledger() -> None:
    """Verify or mutate ledger files."""


@ledger.command("verify")
@click.argument("path", type=click.Path(dir_okay=False))
def ledger_verify(path: str) -> None:
    """Check every hash link in a JSONL ledger."""
    report = hashchain.verify_chain(_load_chain(path))
    _emit(report.to_dict())
    sys.exit(EXIT_OK if report.valid else EXIT_VERDICT)


@ledger.command("tamper")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--block", "block_index", type=int, required=True)
@click.option("--offset", type=int, required=True, help="Offset into the block's concatenated payloads.")
@click.option("--byte", "new_byte", type=click.IntRange(0, 255), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def ledger_tamper(path: str, block_index: int, offset: int, new_byte: int, out: str) -> None:
    """Write a copy of the ledger with one payload byte overwritten."""
    chain = _load_chain(path)
    try:
        mutated = hashchain.tamper(chain, block_index, offset, new_byte)
    except LedgerLabError as exc:
        _fail_usage(str(exc))
    ledgerfile.dump(mutated, out)
    _emit(hashchain.verify_chain(mutated).to_dict())


# ----------------------------------------------------------------- fraud

@cli.group()
def fraud() -> None:
    """Predictive-fraud scheme."""


@fraud.command("run")
@click.option("--k", type=int, required=True, help="Rounds; 2**k recipients.")
@click.option("--theta", type=float, default=0.75, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ledger-out", type=click.Path(dir_okay=False))
@click.option("--report-out", type=click.Path(dir_okay=False))
def fraud_run(k: int, theta: float, seed: int, ledger_out: str | None, report_out: str | None) -> None:
    """Run the scheme and check the immutable-but-untrusted witness."""
    try:
        t = fraud_sim.run_scheme(k, theta, seed)
    except LedgerLabError as exc:
        _fail_usage(str(exc))
    failed = None
    try:
        w = fraud_sim.counterexample_witness(t, theta)
    except WitnessFailed as exc:
        w, failed = exc.witness, exc
    report = {
        "witness": {**w.to_dict(), "failed_leg": failed.leg if failed else None},
        "tip_digest": t.chain.tip_digest.hex(),
        **fraud_sim.transcript_report(t),
    }
    if ledger_out:
        ledgerfile.dump(t.chain, ledger_out)
    if report_out:
        ledgerfile.atomic_write(report_out, json.dumps(report, indent=2) + "\n")
    _emit(report["witness"])
    if failed:
        click.echo(f"witness failed: {failed}", err=True)
        sys.exit(EXIT_VERDICT)


# --------------------------------------------------------------- garbage

@cli.group("garbage")
def garbage_group() -> None:
    """Inject and audit labelled records."""


def _read_spec(path: str) -> tuple[list[hashchain.Record], int | None]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, list):
            data = {"records": data}
        records = [ledgerfile.record_from_dict(r) for r in data["records"]]
        return records, data.get("timestamp")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _fail_usage(f"{path}: {exc}")


@garbage_group.command("inject")
@click.option("--ledger", "ledger_path", type=click.Path(dir_okay=False), required=True)
@click.option("--spec", "spec_path", type=click.Path(dir_okay=False), required=True,
              help='JSON list of records, or {"timestamp": N, "records": [...]}.')
def garbage_inject(ledger_path: str, spec_path: str) -> None:
    """Append one block holding the given records, whatever their labels."""
    chain = _load_chain(ledger_path)
    records, timestamp = _read_spec(spec_path)
    if timestamp is None:
        timestamp = chain.tip.timestamp + 1
    try:
        chain = garbage.inject(chain, records, timestamp)
    except LedgerLabError as exc:
        _fail_usage(str(exc))
    ledgerfile.dump(chain, ledger_path)
    _emit({"block_index": chain.tip.index, "injected": len(records),
           "truth_statistics": garbage.truth_statistics(chain).to_dict()})


@garbage_group.command("audit")
@click.option("--ledger", "ledger_path", type=click.Path(dir_okay=False), required=True)
@click.option("--id", "record_id", required=True)
@click.option("--spec", "spec_path", type=click.Path(dir_okay=False),
              help="Record spec holding the original to compare against.")
def garbage_audit(ledger_path: str, record_id: str, spec_path: str | None) -> None:
    """Report whether a record is still present and unchanged.

    Without --spec the stored bytes count as unchanged only if the whole
    chain still verifies.
    """
    chain = _load_chain(ledger_path)
    chain_valid = hashchain.verify_chain(chain).valid
    if spec_path:
        originals = {r.id: r for r in _read_spec(spec_path)[0]}
        if record_id not in originals:
            _fail_usage(f"{record_id!r} not in {spec_path}")
        audit = garbage.audit_permanence(chain, record_id, originals[record_id])
    else:
        found = chain.find(record_id)
        stored = found[1] if found else hashchain.Record(record_id, hashchain.Kind.NOTE, b"")
        audit = garbage.audit_permanence(chain, record_id, stored)
        if not chain_valid:
            audit = garbage.PermanenceAudit(
                audit.record_id, audit.present, False, audit.block_index, audit.truth_label
            )
    _emit({**audit.to_dict(), "chain_valid": chain_valid})
    sys.exit(EXIT_OK if audit.byte_identical and chain_valid else EXIT_VERDICT)


# -------------------------------------------------------------- scenario

@cli.group("scenario")
def scenario_group() -> None:
    """Batch scenarios with JSON/CSV reports."""


@scenario_group.command("run")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="JSON config file; flags and $LEDGERLAB_SEED override it.")
@click.option("--name")
@click.option("--seed", type=int)
@click.option("--k", type=int)
@click.option("--theta", type=float)
@click.option("--prior-alpha", type=float)
@click.option("--prior-beta", type=float)
@click.option("--ledger-out", type=click.Path(dir_okay=False))
@click.option("--report-out", type=click.Path(dir_okay=False))
@click.option("--format", "report_format", type=click.Choice(scenario.REPORT_FORMATS))
def scenario_run(config_path, report_format, **flags) -> None:
    """Run a full scenario and check every claim."""
    try:
        file_values = scenario.load_config_file(config_path) if config_path else {}
        config = scenario.resolve_config(file_values, overrides={**flags, "report_format": report_format})
        report = scenario.run_scenario(config)
    except (LedgerLabError, OSError) as exc:
        _fail_usage(str(exc))
    _emit({
        "name": config.name,
        "tip_digest": report.chain["tip_digest"],
        "witness": report.witness,
        "claims": {k: v["status"] for k, v in report.claims.items()},
    })
    sys.exit(EXIT_OK if report.passed else EXIT_VERDICT)


def main() -> None:
    cli(prog_name="ledgerlab")


if __name__ == "__main__":
    main()
