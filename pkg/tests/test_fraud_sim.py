import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from ledgerlab import hashchain
from ledgerlab.epistemics import informed_trust, trust_value
from ledgerlab.errors import BadK, BadTheta, IncompleteTranscript, NoSurvivor, WitnessFailed
from ledgerlab.fraud_sim import (
    Direction,
    auditor_agent,
    counterexample_witness,
    final_survivor,
    outcome_block_index,
    recipient_agent,
    reveal_block_index,
    run_honest,
    run_scheme,
    survivor_naive_agent,
    verify_transcript_onchain,
)
from ledgerlab.hashchain import Chain, Kind, TruthLabel


def rebuild(blocks) -> Chain:
    """Re-seal a block list from scratch so every link is consistent again."""
    chain = hashchain.genesis(blocks[0].records, blocks[0].timestamp)
    for b in blocks[1:]:
        chain = hashchain.append(chain, b.records, b.timestamp)
    return chain


@pytest.fixture(scope="module")
def k4():
    return run_scheme(4, 0.75, seed=42)


def test_k4_halves(k4):
    assert k4.n == 16
    assert k4.survivors_per_round == (8, 4, 2, 1)


def test_k3_tallies_by_enumeration():
    t = run_scheme(3, 0.75, seed=9)
    assert oracles.count_transcript(t) == (14, 7)
    assert (t.issued_total, t.correct_total) == (14, 7)


@pytest.mark.parametrize("seed", range(5))
def test_k1_smallest_instance(seed):
    t = run_scheme(1, 0.75, seed)
    assert t.n == 2 and t.survivors_per_round == (1,)
    records = sorted((v.survived_rounds, len(v.received)) for v in t.views)
    assert records == [(0, 1), (1, 1)]


def test_chain_layout(k4):
    chain = k4.chain
    assert len(chain) == 1 + 3 * 4
    for r in range(4):
        assert all(rec.kind is Kind.PREDICTION_COMMIT for rec in chain[3 * r + 1].records)
        assert len(chain[3 * r + 1].records) == 16 // 2 ** r
        assert [rec.kind for rec in chain[outcome_block_index(r)].records] == [Kind.NOTE]
        assert all(rec.kind is Kind.PREDICTION_REVEAL for rec in chain[reveal_block_index(r)].records)


def test_each_round_is_balanced(k4):
    for r in range(4):
        directions = [d.predicted_direction for v in k4.views for d in v.received if d.round == r]
        assert directions.count(Direction.UP) == directions.count(Direction.DOWN)


def test_run_is_valid_and_verifiable(k4):
    assert hashchain.verify_chain(k4.chain).valid
    assert verify_transcript_onchain(k4)


def test_reveal_labels_match_outcomes(k4):
    for r, outcome in enumerate(k4.outcomes):
        for rec in k4.chain[reveal_block_index(r)].records:
            hit = rec.payload.endswith(outcome.direction.value.encode())
            assert rec.truth_label is (TruthLabel.TRUE if hit else TruthLabel.FALSE)


def test_bad_parameters():
    with pytest.raises(BadK):
        run_scheme(0, 0.75, 1)
    with pytest.raises(BadK):
        run_scheme(21, 0.75, 1)
    with pytest.raises(BadTheta):
        run_scheme(3, 1.5, 1)


def test_deterministic_tip():
    assert run_scheme(5, 0.75, 3).chain.tip_digest == run_scheme(5, 0.75, 3).chain.tip_digest
    assert run_scheme(5, 0.75, 3).chain.tip_digest != run_scheme(5, 0.75, 4).chain.tip_digest


# --- naive survivor


@pytest.mark.parametrize("k,value,trusted", [(4, 5 / 6, True), (1, 2 / 3, False), (2, 3 / 4, True)])
def test_survivor_naive_agent(k, value, trusted):
    agent = survivor_naive_agent(run_scheme(k, 0.75, 11), 0.75)
    assert len(agent.belief.observations) == k
    assert all(o.correct for o in agent.belief.observations)
    assert trust_value(agent) == value
    assert agent.trusted is trusted


def test_survivor_observation_times_are_outcome_blocks(k4):
    agent = survivor_naive_agent(k4, 0.75)
    assert [o.time for o in agent.belief.observations] == [
        k4.chain[outcome_block_index(r)].timestamp for r in range(4)
    ]


def test_no_survivor_is_reported(k4):
    broken = dataclasses.replace(k4, views=tuple(v for v in k4.views if v.survived_rounds < 4))
    with pytest.raises(NoSurvivor):
        final_survivor(broken)


# --- informed trust


def test_informed_trust_k3():
    t = run_scheme(3, 0.75, seed=1)
    issued, correct = oracles.count_transcript(t)
    assert (issued, correct) == (14, 7)
    value, trusted = informed_trust(t, 0.75)
    assert value == (1 + 7) / (2 + 14) == 0.5
    assert not trusted


def test_informed_matches_auditor_fold(k4):
    assert auditor_agent(k4, 0.75).trust_value == informed_trust(k4, 0.75).value


@pytest.mark.parametrize("k", [1, 3, 6])
def test_honest_predictor_naive_equals_informed(k):
    t = run_honest(k, seed=4)
    assert t.n == 1 and t.survivors_per_round == (1,) * k
    assert verify_transcript_onchain(t)
    naive = survivor_naive_agent(t, 0.75)
    assert naive.trust_value == informed_trust(t, 0.75).value == (k + 1) / (k + 2)


def test_empty_transcript_incomplete(k4):
    empty = dataclasses.replace(k4, views=(), issued_total=0)
    with pytest.raises(IncompleteTranscript):
        informed_trust(empty, 0.75)


def test_unresolved_rounds_incomplete(k4):
    with pytest.raises(IncompleteTranscript):
        informed_trust(dataclasses.replace(k4, outcomes=k4.outcomes[:2]), 0.75)


# --- on-chain verification


def test_tampered_commitment_block_fails(k4):
    block = k4.chain[1]
    mutated = hashchain.tamper(k4.chain, 1, 5, block.payload_bytes[5] ^ 0x10)
    assert hashchain.verify_chain(mutated).first_broken_index == 1
    assert not verify_transcript_onchain(dataclasses.replace(k4, chain=mutated))


def test_missing_reveal_fails_even_on_valid_chain(k4):
    blocks = list(k4.chain.blocks)
    rb = blocks[reveal_block_index(2)]
    blocks[reveal_block_index(2)] = dataclasses.replace(rb, records=rb.records[1:])
    resealed = rebuild(blocks)
    assert hashchain.verify_chain(resealed).valid
    assert not verify_transcript_onchain(dataclasses.replace(k4, chain=resealed))


def test_commitment_after_outcome_fails(k4):
    # swap the round-0 commit and outcome timestamps: pre-commitment breaks
    blocks = list(k4.chain.blocks)
    blocks[1] = dataclasses.replace(blocks[1], timestamp=blocks[2].timestamp + 1)
    resealed = rebuild(blocks)
    assert not verify_transcript_onchain(dataclasses.replace(k4, chain=resealed))


def test_lying_view_fails(k4):
    views = list(k4.views)
    v = views[0]
    d = v.received[0]
    flipped = Direction.UP if d.predicted_direction is Direction.DOWN else Direction.DOWN
    views[0] = dataclasses.replace(v, received=(dataclasses.replace(d, predicted_direction=flipped),) + v.received[1:])
    assert not verify_transcript_onchain(dataclasses.replace(k4, views=tuple(views)))


# --- witness


def test_witness_k4(k4):
    w = counterexample_witness(k4, 0.75)
    assert w.immutable and w.naive_trusted and not w.informed_trusted
    assert w.naive_value == 5 / 6
    assert w.informed_value == 0.5
    assert w.holds


def test_witness_k1_fails_on_naive_leg():
    with pytest.raises(WitnessFailed) as exc:
        counterexample_witness(run_scheme(1, 0.75, 0), 0.75)
    assert exc.value.leg == "naive_trusted"
    assert exc.value.witness.naive_value == 2 / 3


def test_witness_low_theta_fails_on_informed_leg(k4):
    with pytest.raises(WitnessFailed) as exc:
        counterexample_witness(k4, 0.4)
    assert exc.value.leg == "informed_trusted"


def test_witness_fails_on_tampered_chain(k4):
    mutated = hashchain.tamper(k4.chain, 3, 0, k4.chain[3].payload_bytes[0] ^ 1)
    with pytest.raises(WitnessFailed) as exc:
        counterexample_witness(dataclasses.replace(k4, chain=mutated), 0.75)
    assert exc.value.leg == "immutable"


# --- properties


@settings(max_examples=25, deadline=None)
@given(k=st.integers(1, 8), seed=st.integers(0, 2**32))
def test_halving_and_population_accuracy(k, seed):
    t = run_scheme(k, 0.75, seed)
    assert list(t.survivors_per_round) == [2 ** (k - r - 1) for r in range(k)]
    assert t.issued_total == sum(2 ** k // 2 ** r for r in range(k))
    assert 2 * t.correct_total == t.issued_total
    survivor = final_survivor(t)
    assert all(d.was_correct for d in survivor.received)
    for v in t.views:
        if v is not survivor:
            assert not v.received[-1].was_correct
            assert all(d.was_correct for d in v.received[:-1])


@settings(max_examples=15, deadline=None)
@given(k=st.integers(2, 7), seed=st.integers(0, 2**32), data=st.data())
def test_witness_exists_in_open_band(k, seed, data):
    upper = (k + 1) / (k + 2)
    theta = data.draw(st.floats(min_value=0.5, max_value=upper, exclude_min=True))
    w = counterexample_witness(run_scheme(k, theta, seed), theta)
    assert w.holds


def test_every_view_verifies_on_chain():
    t = run_scheme(5, 0.75, 77)
    assert verify_transcript_onchain(t)
    for v in t.views:
        a = recipient_agent(t, v.recipient_id, 0.75)
        assert len(a.belief.observations) == len(v.received)
