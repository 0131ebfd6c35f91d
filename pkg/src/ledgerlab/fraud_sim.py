"""Survivorship-bias prediction scheme run on a real hash chain.

The adversary starts with ``n = 2**k`` recipients. Each round it commits, on
chain, one salted prediction per living recipient (half say Up, half Down),
records the market outcome, and reveals every prediction. Recipients whose
prediction missed are dropped. After ``k`` rounds one recipient remains
holding ``k`` correct, verifiably pre-committed predictions.

Chain layout (genesis is block 0), for round ``r``::

    3r + 1   commitments for every living recipient
    3r + 2   the outcome
    3r + 3   reveals for every commitment of the round
"""

from __future__ import annotations

import enum
import random
import struct
from dataclasses import dataclass

from ledgerlab import hashchain
from ledgerlab.commitment import (
    Commitment,
    Reveal,
    SALT_SIZE,
    commit,
    commit_record,
    reveal_record,
    verify_reveal,
)
from ledgerlab.epistemics import (
    Agent,
    Observation,
    check_prior,
    check_theta,
    informed_trust,
    new_agent,
)
from ledgerlab.errors import BadK, NoSurvivor, WitnessFailed
from ledgerlab.hashchain import Chain, Digest, Kind, Record, TruthLabel

MAX_K = 20
DEFAULT_SUBJECT = "ACME"


class Direction(enum.Enum):
    UP = "UP"
    DOWN = "DOWN"


@dataclass(frozen=True)
class Outcome:
    subject: str
    round: int
    direction: Direction

    def encode(self) -> bytes:
        subject = self.subject.encode("utf-8")
        word = self.direction.value.encode("ascii")
        return (
            struct.pack(">I", len(subject)) + subject
            + struct.pack(">Q", self.round)
            + struct.pack(">I", len(word)) + word
        )

    def record(self) -> Record:
        return Record(f"O-{self.subject}-{self.round}", Kind.NOTE, self.encode(), TruthLabel.TRUE)


@dataclass(frozen=True)
class Delivery:
    round: int
    predicted_direction: Direction
    commitment_digest: Digest
    was_correct: bool


@dataclass(frozen=True)
class RecipientView:
    recipient_id: str
    received: tuple[Delivery, ...]
    survived_rounds: int

    def to_dict(self) -> dict:
        return {
            "recipient_id": self.recipient_id,
            "survived_rounds": self.survived_rounds,
            "received": [
                {
                    "round": d.round,
                    "predicted_direction": d.predicted_direction.value,
                    "commitment_digest": d.commitment_digest.hex(),
                    "was_correct": d.was_correct,
                }
                for d in self.received
            ],
        }


@dataclass(frozen=True)
class SchemeTranscript:
    k: int
    n: int
    chain: Chain
    outcomes: tuple[Outcome, ...]
    views: tuple[RecipientView, ...]
    survivors_per_round: tuple[int, ...]
    issued_total: int
    correct_total: int

    def view(self, recipient_id: str) -> RecipientView:
        for v in self.views:
            if v.recipient_id == recipient_id:
                return v
        raise KeyError(recipient_id)


@dataclass(frozen=True)
class Witness:
    """Measured legs of "the ledger is immutable, yet trust is unwarranted"."""

    immutable: bool
    naive_trusted: bool
    informed_trusted: bool
    naive_value: float
    informed_value: float
    theta: float

    @property
    def holds(self) -> bool:
        return self.immutable and self.naive_trusted and not self.informed_trusted

    def to_dict(self) -> dict:
        return {
            "immutable": self.immutable,
            "naive_trusted": self.naive_trusted,
            "informed_trusted": self.informed_trusted,
            "naive_value": self.naive_value,
            "informed_value": self.informed_value,
            "theta": self.theta,
            "holds": self.holds,
        }


def commit_block_index(round: int) -> int:
    return 3 * round + 1


def outcome_block_index(round: int) -> int:
    return 3 * round + 2


def reveal_block_index(round: int) -> int:
    return 3 * round + 3


def recipient_ids(n: int) -> list[str]:
    width = max(3, len(str(n - 1)))
    return [f"r{i:0{width}d}" for i in range(n)]


def _check_k(k: int) -> None:
    if not (isinstance(k, int) and 1 <= k <= MAX_K):
        raise BadK(f"k must be an integer in [1, {MAX_K}], got {k!r}")


def _run(k: int, seed: int, subject: str, honest: bool) -> SchemeTranscript:
    rng = random.Random(seed)
    n = 1 if honest else 2 ** k
    living = recipient_ids(n)
    received: dict[str, list[Delivery]] = {rid: [] for rid in living}
    chain = hashchain.genesis([], timestamp=0)
    outcomes: list[Outcome] = []
    survivors: list[int] = []
    issued = correct = 0

    for r in range(k):
        # Salts first, then the outcome, so the draw order is fixed per seed.
        salts = [rng.randbytes(SALT_SIZE) for _ in living]
        actual = rng.choice([Direction.UP, Direction.DOWN])
        if honest:
            assigned = [actual]
        else:
            half = len(living) // 2
            assigned = [Direction.UP] * half + [Direction.DOWN] * (len(living) - half)

        reveals = [
            Reveal(direction.value.encode("ascii"), salt, subject, r)
            for direction, salt in zip(assigned, salts)
        ]
        commitments = [commit(rv.message, rv.salt, subject, r) for rv in reveals]
        chain = hashchain.append(chain, [commit_record(c) for c in commitments], 3 * r + 1)

        outcome = Outcome(subject, r, actual)
        outcomes.append(outcome)
        chain = hashchain.append(chain, [outcome.record()], 3 * r + 2)

        hits = [direction == actual for direction in assigned]
        chain = hashchain.append(
            chain,
            [
                reveal_record(c, rv, TruthLabel.TRUE if hit else TruthLabel.FALSE)
                for c, rv, hit in zip(commitments, reveals, hits)
            ],
            3 * r + 3,
        )

        for rid, direction, c, hit in zip(living, assigned, commitments, hits):
            received[rid].append(Delivery(r, direction, c.digest, hit))
        issued += len(living)
        correct += sum(hits)
        living = [rid for rid, hit in zip(living, hits) if hit]
        survivors.append(len(living))

    views = tuple(
        RecipientView(rid, tuple(ds), sum(1 for d in ds if d.was_correct))
        for rid, ds in received.items()
    )
    return SchemeTranscript(
        k=k,
        n=n,
        chain=chain,
        outcomes=tuple(outcomes),
        views=views,
        survivors_per_round=tuple(survivors),
        issued_total=issued,
        correct_total=correct,
    )


def run_scheme(k: int, theta: float, seed: int, subject: str = DEFAULT_SUBJECT) -> SchemeTranscript:
    _check_k(k)
    check_theta(theta)
    return _run(k, seed, subject, honest=False)


def run_honest(k: int, seed: int, subject: str = DEFAULT_SUBJECT) -> SchemeTranscript:
    """A single recipient served by a predictor that is right every round.

    Same chain layout as :func:`run_scheme`; no filtering ever happens.
    """
    _check_k(k)
    return _run(k, seed, subject, honest=True)


def _agent_for(t: SchemeTranscript, agent_id: str, deliveries, theta, prior_alpha, prior_beta) -> Agent:
    obs = tuple(
        Observation(t.chain[outcome_block_index(d.round)].timestamp, d.was_correct)
        for d in deliveries
    )
    return new_agent(agent_id, theta, prior_alpha, prior_beta, obs)


def recipient_agent(
    t: SchemeTranscript, recipient_id: str, theta: float,
    prior_alpha: float = 1.0, prior_beta: float = 1.0,
) -> Agent:
    """A recipient who believes exactly what it was shown."""
    return _agent_for(t, recipient_id, t.view(recipient_id).received, theta, prior_alpha, prior_beta)


def auditor_agent(
    t: SchemeTranscript, theta: float,
    prior_alpha: float = 1.0, prior_beta: float = 1.0, agent_id: str = "auditor",
) -> Agent:
    deliveries = sorted(
        (d for v in t.views for d in v.received), key=lambda d: d.round
    )
    return _agent_for(t, agent_id, deliveries, theta, prior_alpha, prior_beta)


def final_survivor(t: SchemeTranscript) -> RecipientView:
    full = [
        v for v in t.views
        if len(v.received) == t.k and all(d.was_correct for d in v.received)
    ]
    if not full:
        raise NoSurvivor("no recipient holds a perfect record")
    return min(full, key=lambda v: v.recipient_id)


def survivor_naive_agent(
    t: SchemeTranscript, theta: float, prior_alpha: float = 1.0, prior_beta: float = 1.0
) -> Agent:
    return recipient_agent(t, final_survivor(t).recipient_id, theta, prior_alpha, prior_beta)


def verify_transcript_onchain(t: SchemeTranscript) -> bool:
    """Re-check, from the chain alone, everything a recipient is told.

    Each delivered commitment must sit in its round's commitment block
    (before the outcome block), have a reveal in the round's reveal block
    that opens it to the delivered direction, and the outcome block must
    carry the recorded outcome.
    """
    chain = t.chain
    if not hashchain.verify_chain(chain).valid:
        return False
    if len(chain) != 1 + 3 * t.k or len(t.outcomes) != t.k:
        return False

    commits: list[dict[bytes, Commitment]] = []
    reveals: list[dict[bytes, Reveal]] = []
    try:
        for r, outcome in enumerate(t.outcomes):
            cblock = chain[commit_block_index(r)]
            oblock = chain[outcome_block_index(r)]
            rblock = chain[reveal_block_index(r)]
            if cblock.timestamp >= oblock.timestamp:
                return False
            if [rec.payload for rec in oblock.records] != [outcome.encode()]:
                return False

            round_commits = {}
            for rec in cblock.records:
                if rec.kind is not Kind.PREDICTION_COMMIT:
                    return False
                c = Commitment.decode(rec.payload)
                if c.round != r:
                    return False
                round_commits[bytes(c.digest)] = c

            round_reveals = {}
            for rec in rblock.records:
                if rec.kind is not Kind.PREDICTION_REVEAL:
                    return False
                rv = Reveal.decode(rec.payload)
                c = commit(rv.message, rv.salt, rv.subject, rv.round)
                opened = round_commits.get(bytes(c.digest))
                if opened is None or not verify_reveal(opened, rv):
                    return False
                round_reveals[bytes(c.digest)] = rv
            commits.append(round_commits)
            reveals.append(round_reveals)
    except (ValueError, IndexError):
        return False

    for view in t.views:
        for d in view.received:
            key = bytes(d.commitment_digest)
            if not 0 <= d.round < t.k or key not in commits[d.round]:
                return False
            rv = reveals[d.round].get(key)
            if rv is None or rv.message != d.predicted_direction.value.encode("ascii"):
                return False
            if d.was_correct != (d.predicted_direction is t.outcomes[d.round].direction):
                return False
    return True


def counterexample_witness(
    t: SchemeTranscript, theta: float, prior_alpha: float = 1.0, prior_beta: float = 1.0
) -> Witness:
    """Exhibit an immutable chain whose survivor trusts while an auditor does not.

    Every leg is recomputed from the transcript. Raises :class:`WitnessFailed`
    naming the first leg that does not hold.
    """
    theta = check_theta(theta)
    check_prior(prior_alpha, prior_beta)
    immutable = verify_transcript_onchain(t)
    naive = survivor_naive_agent(t, theta, prior_alpha, prior_beta)
    informed = informed_trust(t, theta, prior_alpha, prior_beta)
    w = Witness(
        immutable=immutable,
        naive_trusted=naive.trusted,
        informed_trusted=informed.trusted,
        naive_value=naive.trust_value,
        informed_value=informed.value,
        theta=theta,
    )
    if not w.immutable:
        raise WitnessFailed("immutable", w, "transcript does not verify on chain")
    if not w.naive_trusted:
        raise WitnessFailed(
            "naive_trusted", w,
            f"survivor trust {w.naive_value:.6g} < theta {theta:.6g}",
        )
    if w.informed_trusted:
        raise WitnessFailed(
            "informed_trusted", w,
            f"informed trust {w.informed_value:.6g} >= theta {theta:.6g}",
        )
    return w


def transcript_report(t: SchemeTranscript) -> dict:
    return {
        "k": t.k,
        "n": t.n,
        "survivors_per_round": list(t.survivors_per_round),
        "issued_total": t.issued_total,
        "correct_total": t.correct_total,
        "outcomes": [
            {"subject": o.subject, "round": o.round, "direction": o.direction.value}
            for o in t.outcomes
        ],
        "views": [v.to_dict() for v in t.views],
    }
