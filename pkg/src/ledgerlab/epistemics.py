"""Thresholded Beta-Bernoulli trust.

An agent holds a Beta(alpha, beta) prior over the probability that a source's
output is correct and conditions it on every correct/incorrect observation it
has been shown. Its trust value is the posterior mean; it *trusts* the source
when that mean reaches its threshold ``theta`` (inclusive).

Nothing here touches a chain or a digest. Whatever the ledger guarantees, the
belief only ever sees the observation list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from ledgerlab.errors import BadPrior, BadTheta, IncompleteTranscript


class Observation(NamedTuple):
    time: int
    correct: bool


@dataclass(frozen=True)
class BeliefState:
    alpha: float = 1.0
    beta: float = 1.0
    observations: tuple[Observation, ...] = ()

    @property
    def successes(self) -> int:
        return sum(1 for o in self.observations if o.correct)

    @property
    def failures(self) -> int:
        return len(self.observations) - self.successes

    @property
    def mean(self) -> float:
        return (self.alpha + self.successes) / (self.alpha + self.beta + len(self.observations))

    def update(self, correct: bool, time: int) -> "BeliefState":
        return replace(self, observations=self.observations + (Observation(time, bool(correct)),))


@dataclass(frozen=True)
class Agent:
    id: str
    theta: float
    belief: BeliefState = field(default_factory=BeliefState)

    def observe(self, correct: bool, time: int) -> "Agent":
        return replace(self, belief=self.belief.update(correct, time))

    @property
    def trust_value(self) -> float:
        return self.belief.mean

    @property
    def trusted(self) -> bool:
        return self.trust_value >= self.theta

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "theta": self.theta,
            "alpha": self.belief.alpha,
            "beta": self.belief.beta,
            "observations": [{"t": o.time, "correct": o.correct} for o in self.belief.observations],
            "trust_value": self.trust_value,
            "trusted": self.trusted,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Agent":
        obs = tuple(Observation(int(o["t"]), bool(o["correct"])) for o in d["observations"])
        return new_agent(d["id"], d["theta"], d["alpha"], d["beta"], obs)


class TrustAssessment(NamedTuple):
    value: float
    trusted: bool


def check_theta(theta: float) -> float:
    if not (isinstance(theta, (int, float)) and 0.0 <= theta <= 1.0):
        raise BadTheta(f"theta must lie in [0, 1], got {theta!r}")
    return float(theta)


def check_prior(alpha: float, beta: float) -> None:
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise BadPrior(f"prior {name} must be a positive finite number, got {v!r}")


def new_agent(
    id: str,
    theta: float,
    prior_alpha: float = 1.0,
    prior_beta: float = 1.0,
    observations: tuple[Observation, ...] = (),
) -> Agent:
    theta = check_theta(theta)
    check_prior(prior_alpha, prior_beta)
    return Agent(id, theta, BeliefState(float(prior_alpha), float(prior_beta), tuple(observations)))


def observe(agent: Agent, correct: bool, time: int) -> Agent:
    return agent.observe(correct, time)


def trust_value(agent: Agent) -> float:
    return agent.trust_value


def is_trusted(agent: Agent) -> bool:
    return agent.trusted


def informed_trust(transcript, theta: float, prior_alpha: float = 1.0, prior_beta: float = 1.0) -> TrustAssessment:
    """Trust conditioned on every prediction issued, not only the survivors'.

    This is the auditor's view of a predictive-fraud transcript: all
    branches, including the recipients who were dropped, under the same
    prior a naive recipient uses.
    """
    theta = check_theta(theta)
    check_prior(prior_alpha, prior_beta)
    deliveries = [d for view in transcript.views for d in view.received]
    if not deliveries:
        raise IncompleteTranscript("transcript issued no predictions")
    if len(transcript.outcomes) != transcript.k:
        raise IncompleteTranscript(
            f"{len(transcript.outcomes)} of {transcript.k} rounds resolved"
        )
    if len(deliveries) != transcript.issued_total:
        raise IncompleteTranscript(
            f"views hold {len(deliveries)} predictions, transcript claims {transcript.issued_total}"
        )
    correct = sum(1 for d in deliveries if d.was_correct)
    value = (prior_alpha + correct) / (prior_alpha + prior_beta + len(deliveries))
    return TrustAssessment(value, value >= theta)
