from __future__ import annotations

import pytest

from lextree.engine import (
    BudgetExceeded,
    EntryKind,
    InvalidTreeError,
    UnknownTarget,
    WARN_CYCLE_CUT,
    evaluate,
    explain,
)
from lextree.model import parse_facts, parse_rule_tree

from conftest import ART20_FACTS


def test_portability_case_is_true(art20_tree, art20_facts):
    result = evaluate(art20_tree, art20_facts)
    assert result.value is True
    assert result.target == "gdpr_art20_data_portability"


def test_exception_defeats_regardless_of_conditions(art20_tree):
    facts = parse_facts(ART20_FACTS + ["adversely_affects_others_rights"])
    result = evaluate(art20_tree, facts)
    assert result.value is False
    entry = result.trace.entries["gdpr_art20_data_portability"]
    assert entry.kind is EntryKind.DEFEATED
    assert entry.exception == "adversely_affects_others_rights"


def test_negation_as_failure_base_case(art20_tree):
    assert evaluate(art20_tree, parse_facts([])).value is False


def test_multiple_rules_same_head_are_disjunctive():
    tree = parse_rule_tree(
        [
            {"p": "g", "op": "ALL", "conditions": ["a"]},
            {"p": "g", "op": "ALL", "conditions": ["b"]},
        ]
    )
    result = evaluate(tree, parse_facts(["b"]))
    assert result.value is True
    assert result.trace.entries["g"].rule_index == 1


def test_any_operator():
    tree = parse_rule_tree({"p": "g", "op": "ANY", "conditions": ["a", "b"]})
    assert evaluate(tree, parse_facts(["b"])).value is True
    assert evaluate(tree, parse_facts([])).value is False


def test_fact_shortcut_overrides_rules():
    tree = parse_rule_tree({"p": "g", "op": "ALL", "conditions": ["never"]})
    result = evaluate(tree, parse_facts(["g"]))
    assert result.value is True
    assert result.trace.entries["g"].kind is EntryKind.FACT


def test_recursive_exception_evaluation():
    # The exception itself is derived through a rule.
    tree = parse_rule_tree(
        [
            {"p": "g", "op": "ALL", "conditions": ["a"], "exceptions": ["e"]},
            {"p": "e", "op": "ALL", "conditions": ["x"]},
        ]
    )
    assert evaluate(tree, parse_facts(["a"])).value is True
    assert evaluate(tree, parse_facts(["a", "x"])).value is False


def test_cycle_cut_to_false_with_warning():
    tree = parse_rule_tree(
        [
            {"p": "a", "op": "ALL", "conditions": ["b"]},
            {"p": "b", "op": "ALL", "conditions": ["a"]},
        ]
    )
    result = evaluate(tree, parse_facts([]))
    assert result.value is False
    assert WARN_CYCLE_CUT in result.warnings
    assert result.trace.entries["a"].kind is EntryKind.CUT_ON_CYCLE


def test_cycle_with_alternate_support_still_derives():
    tree = parse_rule_tree(
        [
            {"p": "a", "op": "ANY", "conditions": ["a", "x"]},
        ]
    )
    result = evaluate(tree, parse_facts(["x"]))
    assert result.value is True
    assert WARN_CYCLE_CUT in result.warnings
    entry = result.trace.entries["a"]
    assert entry.kind is EntryKind.DERIVED
    assert entry.cycle is True


def test_budget_exceeded_on_deep_chain():
    rules = [{"p": f"p{i}", "op": "ALL", "conditions": [f"p{i+1}"]} for i in range(30)]
    tree = parse_rule_tree(rules)
    with pytest.raises(BudgetExceeded):
        evaluate(tree, parse_facts(["p30"]), budget=10)


def test_steps_never_exceed_budget():
    rules = [{"p": f"p{i}", "op": "ALL", "conditions": [f"p{i+1}"]} for i in range(5)]
    tree = parse_rule_tree(rules)
    result = evaluate(tree, parse_facts(["p5"]), budget=100)
    assert result.steps_used <= 100


def test_unknown_target(art20_tree, art20_facts):
    with pytest.raises(UnknownTarget):
        evaluate(art20_tree, art20_facts, target="tyop_predicate")


def test_target_that_is_only_referenced_is_plain_false(art20_tree, art20_facts):
    result = evaluate(art20_tree, art20_facts, target="adversely_affects_others_rights")
    assert result.value is False


def test_invalid_tree_refused():
    tree = parse_rule_tree({"p": "x", "op": "ALL", "conditions": ["y"], "exceptions": ["y"]})
    with pytest.raises(InvalidTreeError):
        evaluate(tree, parse_facts([]))


def test_duplicate_fact_warning_propagates(art20_tree):
    facts = parse_facts(ART20_FACTS + [ART20_FACTS[0]])
    result = evaluate(art20_tree, facts)
    assert any(w.startswith("DUPLICATE_FACT") for w in result.warnings)


def test_determinism(art20_tree, art20_facts):
    first = evaluate(art20_tree, art20_facts)
    second = evaluate(art20_tree, art20_facts)
    assert first.value == second.value
    assert first.warnings == second.warnings
    assert first.steps_used == second.steps_used
    assert first.trace.entries == second.trace.entries


class TestExplain:
    def test_full_condition_facts(self, art20_tree, art20_facts):
        trace = explain(art20_tree, art20_facts)
        head = trace.entries["gdpr_art20_data_portability"]
        assert head.kind is EntryKind.DERIVED
        assert head.rule_index == 0
        for cond in art20_tree.rules[0].conditions:
            assert trace.entries[cond].kind is EntryKind.FACT
        exc = trace.entries["adversely_affects_others_rights"]
        assert exc.kind is EntryKind.NOT_ESTABLISHED

    def test_defeat_entry(self, art20_tree):
        facts = parse_facts(ART20_FACTS + ["adversely_affects_others_rights"])
        trace = explain(art20_tree, facts)
        head = trace.entries["gdpr_art20_data_portability"]
        assert head.kind is EntryKind.DEFEATED
        assert head.rule_index == 0
        assert head.exception == "adversely_affects_others_rights"

    def test_each_consulted_predicate_has_one_entry(self, art20_tree, art20_facts):
        trace = explain(art20_tree, art20_facts)
        preds = list(trace.entries)
        assert len(preds) == len(set(preds))
