"""Lint catalog for formalization defects, plus semantics-preserving simplification.

The lint rules target recurring machine-formalization defects: pass-through
rule chains, negated-condition burden shifting, fact-anchoring drift, and
the empty-fact-set labeling hack.  ``simplify`` collapses pass-through
chains and guards the rewrite with an equivalence check over the simplified
tree's predicate universe.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Protocol

from .engine import evaluate
from .model import FactSet, Rule, RuleTree, validate

NEGATION_PREFIXES = ("no_", "not_")

DEFAULT_CHANGE_MARKERS = ("proposed", "change", "changes", "instead", "now plans")

EQUIVALENCE_EXHAUSTIVE_LIMIT = 12
EQUIVALENCE_SAMPLES = 256


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


@dataclass(frozen=True)
class Finding:
    rule_id: str
    severity: Severity
    location: str
    message: str
    suggestion: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "location": self.location,
            "message": self.message,
            "suggestion": self.suggestion,
        }


class SampleLike(Protocol):
    """What lint needs from a sample record."""

    rule_tree: RuleTree
    facts: FactSet
    label: bool | None
    scenario: str
    question: str


class SimplifyWouldChangeSemantics(Exception):
    """Internal guard: a rewrite altered evaluation; signals a bug."""


def _reference_counts(tree: RuleTree) -> dict[str, int]:
    counts: dict[str, int] = {}
    for rule in tree.rules:
        for pred in rule.conditions + rule.exceptions:
            counts[pred] = counts.get(pred, 0) + 1
    return counts


def _is_pass_through(rule: Rule, refs: dict[str, int], head_counts: dict[str, int]) -> bool:
    return (
        len(rule.conditions) == 1
        and not rule.exceptions
        and refs.get(rule.head, 0) == 1
        and head_counts.get(rule.head, 0) == 1
    )


def lint_tree(tree: RuleTree) -> list[Finding]:
    """Tree-only lint rules (L1, L2, L6)."""
    findings: list[Finding] = []
    refs = _reference_counts(tree)
    head_counts: dict[str, int] = {}
    for rule in tree.rules:
        head_counts[rule.head] = head_counts.get(rule.head, 0) + 1

    for i, rule in enumerate(tree.rules):
        if _is_pass_through(rule, refs, head_counts):
            findings.append(
                Finding(
                    "L1",
                    Severity.WARNING,
                    f"rules[{i}]",
                    f"pass-through rule: {rule.head!r} merely relays "
                    f"{rule.conditions[0]!r}; the chain link is redundant",
                    suggestion=f"inline {rule.conditions[0]!r} at the reference site",
                )
            )
        negated = [c for c in rule.conditions if c.startswith(NEGATION_PREFIXES)]
        if (
            not rule.exceptions
            and len(negated) >= 2
            and len(negated) * 2 >= len(rule.conditions)
        ):
            findings.append(
                Finding(
                    "L2",
                    Severity.WARNING,
                    f"rules[{i}]",
                    f"{len(negated)} of {len(rule.conditions)} conditions are negated "
                    f"predicates ({negated[0]!r}, ...); encoding absences as explicit "
                    "conditions shifts the burden of proof",
                    suggestion="model the positive grounds as exceptions instead",
                )
            )

    from .model import WARN_UNREACHABLE  # local import avoids a cycle at module load

    report = validate(tree)
    for issue in report.warnings:
        if issue.code == WARN_UNREACHABLE:
            findings.append(
                Finding(
                    "L6",
                    Severity.WARNING,
                    issue.location,
                    issue.message,
                )
            )
    return findings


def lint_sample(
    sample: SampleLike,
    change_markers: Iterable[str] = DEFAULT_CHANGE_MARKERS,
) -> list[Finding]:
    """Run the full lint catalog (L1-L7) over one sample."""
    tree = sample.rule_tree
    facts = sample.facts
    findings = lint_tree(tree)

    referenced = tree.referenced()
    heads = tree.heads()
    condition_preds = {c for r in tree.rules for c in r.conditions}
    exception_preds = {e for r in tree.rules for e in r.exceptions}

    for fact in sorted(facts.facts):
        if fact not in referenced and fact not in heads:
            findings.append(
                Finding(
                    "L3",
                    Severity.INFO,
                    fact,
                    f"fact {fact!r} is referenced by no rule; possible anchoring drift",
                )
            )

    for pred in sorted(condition_preds - heads - facts.facts):
        findings.append(
            Finding(
                "L4",
                Severity.INFO,
                pred,
                f"condition {pred!r} is neither a rule head nor a fact in this sample",
            )
        )

    if sample.label is not None and len(facts) == 0:
        findings.append(
            Finding(
                "L5",
                Severity.ERROR,
                "facts",
                "labeled sample has an empty fact set; fact extraction may have been "
                "gamed to force the label",
            )
        )

    text = f"{sample.question} {sample.scenario}".lower()
    if any(marker in text for marker in change_markers):
        anchored = (
            len(facts) > 0
            and all(f in condition_preds for f in facts.facts)
            and not any(f in exception_preds for f in facts.facts)
        )
        if anchored:
            findings.append(
                Finding(
                    "L7",
                    Severity.INFO,
                    "facts",
                    "the question describes a change, but every fact matches the tree's "
                    "positive conditions; facts may be anchored to the baseline setting",
                )
            )
    return findings


def format_findings(findings: list[Finding]) -> str:
    return "\n".join(
        f"{f.rule_id} {f.severity.value} {f.location}: {f.message}" for f in findings
    )


# --- simplification -------------------------------------------------------


def _rewrite_once(tree: RuleTree) -> RuleTree | None:
    """Apply one chain-collapse rewrite; None when at fixpoint.

    Two safe rewrites, both requiring the eliminated head to be defined by
    exactly one exception-free rule and referenced exactly once:
      - link removal: definition has a single condition; the reference is
        replaced by that condition wherever it appears;
      - body splice: the reference sits in the conditions of a rule with
        the same operator, so the definition's conditions slot in directly.
    The tree's target head is never eliminated.
    """
    refs = _reference_counts(tree)
    for i, rule in enumerate(tree.rules):
        head = rule.head
        if head == tree.target or refs.get(head, 0) != 1 or rule.exceptions:
            continue
        if len(tree.rules_for(head)) != 1:
            continue  # disjunctive heads are never collapsed
        if head in rule.conditions or head in rule.exceptions:
            continue  # self-reference
        # Find the unique reference site.
        for j, site in enumerate(tree.rules):
            if j == i:
                continue
            in_conds = head in site.conditions
            in_excs = head in site.exceptions
            if not (in_conds or in_excs):
                continue
            if len(rule.conditions) == 1:
                inner = rule.conditions[0]
                new_site = Rule(
                    head=site.head,
                    op=site.op,
                    conditions=tuple(inner if c == head else c for c in site.conditions),
                    exceptions=tuple(inner if e == head else e for e in site.exceptions),
                )
            elif in_conds and not in_excs and site.op == rule.op:
                spliced: list[str] = []
                for c in site.conditions:
                    if c == head:
                        spliced.extend(rule.conditions)
                    else:
                        spliced.append(c)
                # Splicing may introduce duplicates; keep first occurrences.
                deduped = tuple(dict.fromkeys(spliced))
                new_site = Rule(
                    head=site.head,
                    op=site.op,
                    conditions=deduped,
                    exceptions=site.exceptions,
                )
            else:
                break  # this head cannot be collapsed safely
            new_rules = [
                new_site if k == j else r
                for k, r in enumerate(tree.rules)
                if k != i
            ]
            return RuleTree(rules=tuple(new_rules))
    return None


def _equivalent(original: RuleTree, simplified: RuleTree, budget: int = 100_000) -> bool:
    """Check evaluation equivalence over the simplified tree's predicates.

    Exhaustive for universes of at most EQUIVALENCE_EXHAUSTIVE_LIMIT
    predicates, sampled (seeded) above that.  Eliminated intermediate heads
    are internal names and are excluded from the fact universe.
    """
    universe = sorted(simplified.predicates())
    target = original.target

    def subsets():
        if len(universe) <= EQUIVALENCE_EXHAUSTIVE_LIMIT:
            for r in range(len(universe) + 1):
                yield from itertools.combinations(universe, r)
        else:
            rng = random.Random(0)
            for _ in range(EQUIVALENCE_SAMPLES):
                yield tuple(p for p in universe if rng.random() < 0.5)

    for subset in subsets():
        facts = FactSet(facts=frozenset(subset))
        a = evaluate(original, facts, target=target, budget=budget).value
        b = evaluate(simplified, facts, target=target, budget=budget).value
        if a != b:
            return False
    return True


def simplify(tree: RuleTree, check: bool = True) -> RuleTree:
    """Collapse pass-through rule chains until fixpoint.

    With ``check`` enabled (default) the result is verified to evaluate
    identically to the input over the simplified predicate universe;
    a mismatch raises SimplifyWouldChangeSemantics.
    """
    current = tree
    while True:
        nxt = _rewrite_once(current)
        if nxt is None:
            break
        current = nxt
    if current is not tree:
        report = validate(current)
        if report.errors:
            raise SimplifyWouldChangeSemantics(
                f"simplified tree fails validation: {[e.code for e in report.errors]}"
            )
        if check and not _equivalent(tree, current):
            raise SimplifyWouldChangeSemantics(
                "simplified tree evaluates differently on some fact subset"
            )
    return current
