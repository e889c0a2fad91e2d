from __future__ import annotations

import json

import pytest

from lextree.agents import FailingAgent, ScriptedAgent
from lextree.pipeline import (
    DraftFailed,
    RefineConfig,
    derive_label,
    draft,
    refine_loop,
)
from lextree.verify import verify_logical

from conftest import ART20_DOC, ART20_FACTS, agent_reply, draft_reply

GOOD_SCORE = agent_reply(90)
LOW_SCORE = agent_reply(10, "scenario is vague")

# A draft that parses but scores poorly: the tree violates the schema.
BAD_TREE_REPLY = json.dumps(
    {
        "scenario": "something vague",
        "question": "is it fine?",
        "rule_tree": {"p": "a", "op": "OR", "conditions": ["b"]},
        "facts": ["b"],
    }
)


def config(**kw):
    return RefineConfig(concurrent_verifiers=False, **kw)


class TestDraft:
    def test_scripted_pass_through(self):
        agent = ScriptedAgent([draft_reply()])
        d = draft("GDPR Art. 20", agent)
        assert d.article == "GDPR Art. 20"
        assert d.question.endswith("?")
        assert d.rule_tree_doc == ART20_DOC
        assert d.facts_doc == ART20_FACTS
        assert d.word_count > 0

    def test_missing_facts_block_fails_after_retry(self):
        bad = json.dumps({"scenario": "s", "question": "q?", "rule_tree": ART20_DOC})
        agent = ScriptedAgent([bad, bad])
        with pytest.raises(DraftFailed):
            draft("GDPR Art. 20", agent)
        assert len(agent.calls) == 2

    def test_retry_then_success(self):
        agent = ScriptedAgent(["not json at all {", draft_reply()])
        d = draft("GDPR Art. 20", agent)
        assert d.facts_doc == ART20_FACTS

    def test_feedback_is_carried_verbatim(self):
        agent = ScriptedAgent([draft_reply()])
        draft("GDPR Art. 20", agent, prior_feedback="tighten the exception scope")
        _instruction, context = agent.calls[0]
        assert "tighten the exception scope" in context


class TestDeriveLabel:
    def test_full_condition_facts_true(self):
        agent = ScriptedAgent([draft_reply()])
        assert derive_label(draft("a20", agent)) is True

    def test_exception_fact_flips_false(self):
        agent = ScriptedAgent(
            [draft_reply(facts=ART20_FACTS + ["adversely_affects_others_rights"])]
        )
        assert derive_label(draft("a20", agent)) is False

    def test_empty_facts_all_rule_false(self):
        agent = ScriptedAgent([draft_reply(facts=[])])
        assert derive_label(draft("a20", agent)) is False


class TestRefineLoop:
    def test_bad_then_good_accepts_at_iteration_two(self):
        drafter = ScriptedAgent([BAD_TREE_REPLY, draft_reply()])
        scenario = ScriptedAgent([GOOD_SCORE] * 2)
        legal = ScriptedAgent([GOOD_SCORE] * 2)
        sample, history = refine_loop("GDPR Art. 20", drafter, scenario, legal, config())
        assert sample is not None
        assert history.accepted_index == 1
        assert len(history.iterations) == 2
        assert not history.exhausted

    def test_always_bad_exhausts_at_max_iterations(self):
        drafter = ScriptedAgent([BAD_TREE_REPLY], repeat_last=True)
        scenario = ScriptedAgent([GOOD_SCORE], repeat_last=True)
        legal = ScriptedAgent([GOOD_SCORE], repeat_last=True)
        sample, history = refine_loop("GDPR Art. 20", drafter, scenario, legal, config())
        assert sample is None
        assert history.exhausted
        assert len(history.iterations) == 5
        assert len(drafter.calls) == 5  # never more drafter calls than iterations

    def test_threshold_zero_accepts_first_valid_draft(self):
        drafter = ScriptedAgent([draft_reply()])
        scenario = ScriptedAgent([LOW_SCORE])
        legal = ScriptedAgent([LOW_SCORE])
        sample, history = refine_loop(
            "GDPR Art. 20", drafter, scenario, legal, config(threshold=0)
        )
        assert sample is not None
        assert history.accepted_index == 0

    def test_feedback_from_failed_round_reaches_next_draft(self):
        drafter = ScriptedAgent([draft_reply(), draft_reply()])
        scenario = ScriptedAgent([LOW_SCORE, GOOD_SCORE])
        legal = ScriptedAgent([LOW_SCORE, GOOD_SCORE])
        sample, history = refine_loop("GDPR Art. 20", drafter, scenario, legal, config())
        assert sample is not None
        _instruction, second_context = drafter.calls[1]
        assert "scenario is vague" in second_context
        assert "[Scenario]" in second_context

    def test_agent_unavailable_aborts_round_not_loop(self):
        drafter = ScriptedAgent([draft_reply(), draft_reply()])
        scenario = ScriptedAgent([GOOD_SCORE, GOOD_SCORE, GOOD_SCORE])
        legal = FailingAgent()
        sample, history = refine_loop(
            "GDPR Art. 20", drafter, scenario, legal, config(max_iterations=2)
        )
        assert sample is None
        assert len(history.iterations) == 2
        assert all(it.error for it in history.iterations)

    def test_accepted_sample_is_self_consistent(self):
        drafter = ScriptedAgent([draft_reply()])
        scenario = ScriptedAgent([GOOD_SCORE])
        legal = ScriptedAgent([GOOD_SCORE])
        sample, _ = refine_loop("GDPR Art. 20", drafter, scenario, legal, config())
        assert sample is not None
        assert verify_logical(sample).score == 100
        assert len(sample.reports) == 4
        assert sample.status.value == "AutoVerified"

    def test_history_serializes(self):
        drafter = ScriptedAgent([draft_reply()])
        scenario = ScriptedAgent([GOOD_SCORE])
        legal = ScriptedAgent([GOOD_SCORE])
        _, history = refine_loop("GDPR Art. 20", drafter, scenario, legal, config())
        doc = history.to_doc()
        assert doc["outcome"] == "Accepted(0)"
        assert doc["iterations"][0]["passed"] is True
