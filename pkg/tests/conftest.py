from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lextree.model import parse_facts, parse_rule_tree
from lextree.store import Sample, Status, new_sample_id

# The schematic single-rule portability example (three conditions).
SCHEMATIC_PORTABILITY_DOC = {
    "p": "gdpr_art20_data_portability",
    "op": "ALL",
    "conditions": [
        "data_subject_requests_portability",
        "processing_is_automated",
        "processing_based_on_contract_or_consent",
    ],
    "exceptions": ["adversely_affects_others_rights"],
}

# The reviewed portability case: four cumulative conditions, one carve-out.
ART20_DOC = {
    "p": "gdpr_art20_data_portability",
    "op": "ALL",
    "conditions": [
        "data_subject_requests_portability",
        "data_is_personal_data_of_subject",
        "processing_based_on_consent_or_contract",
        "processing_is_automated",
    ],
    "exceptions": ["adversely_affects_others_rights"],
}

ART20_FACTS = [
    "data_subject_requests_portability",
    "data_is_personal_data_of_subject",
    "processing_based_on_consent_or_contract",
    "processing_is_automated",
]

# Burden-shift pattern: every ground encoded as an explicit negated condition.
BURDEN_SHIFT_DOC = {
    "p": "no_art9_exception",
    "op": "ALL",
    "conditions": [
        "no_vital_interests_basis",
        "no_nonprofit_basis",
        "not_manifestly_public",
        "no_legal_claims_basis",
        "no_substantial_public_interest",
        "no_medicine_basis",
        "no_public_health_basis",
        "no_research_archiving_basis",
    ],
    "exceptions": [],
}

# Pass-through chain: two relay rules in front of the real content.
CHAIN_DOC = [
    {
        "p": "no_a9_exception_applies",
        "op": "ALL",
        "conditions": ["no_a9_grounds_true"],
        "exceptions": [],
    },
    {
        "p": "no_a9_grounds_true",
        "op": "ALL",
        "conditions": ["not_any_a9_ground_true"],
        "exceptions": [],
    },
    {
        "p": "not_any_a9_ground_true",
        "op": "ALL",
        "conditions": ["a9_grounds_assessment_negative"],
        "exceptions": [],
    },
]


@pytest.fixture
def art20_tree():
    return parse_rule_tree(ART20_DOC)


@pytest.fixture
def art20_facts():
    return parse_facts(ART20_FACTS)


@pytest.fixture
def chain_tree():
    return parse_rule_tree(CHAIN_DOC)


@pytest.fixture
def burden_tree():
    return parse_rule_tree(BURDEN_SHIFT_DOC)


def make_sample(
    tree_doc=None,
    facts=None,
    label=True,
    article="GDPR Art. 20",
    scenario="A subscriber of a fitness-tracking service requests her data.",
    question="Does the data subject hold the portability right?",
    status=Status.DRAFTED,
    sample_id=None,
    reports=(),
) -> Sample:
    tree_doc = ART20_DOC if tree_doc is None else tree_doc
    facts = ART20_FACTS if facts is None else facts
    return Sample(
        id=sample_id or new_sample_id(),
        article=article,
        scenario=scenario,
        question=question,
        rule_tree=parse_rule_tree(tree_doc),
        facts=parse_facts(facts),
        label=label,
        reports=tuple(reports),
        status=status,
    )


def agent_reply(score: int, feedback: str = "looks reasonable") -> str:
    return json.dumps({"score": score, "feedback": feedback})


def draft_reply(tree_doc=None, facts=None, scenario=None, question=None) -> str:
    return json.dumps(
        {
            "scenario": scenario
            or ("A subscriber requests a copy of her data. " * 10).strip(),
            "question": question or "Does she hold the portability right?",
            "rule_tree": ART20_DOC if tree_doc is None else tree_doc,
            "facts": ART20_FACTS if facts is None else facts,
        }
    )
