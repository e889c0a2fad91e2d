"""The four-verifier framework and the average-score quality gate.

Representation and Logical are deterministic; Scenario and Legal are
agent-backed.  Each verifier yields an integer score in [0, 100] plus
feedback; the arithmetic mean of the four scores against the threshold
(default 70, inclusive) decides whether a sample passes.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .agents import AgentClient, AgentUnavailable
from .engine import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    EvaluationError,
    evaluate,
    render_trace,
)
from .lint import Severity, lint_sample
from .model import FactSet, RuleTree, SchemaError, TreeSyntaxError, parse_facts, parse_rule_tree, validate

DEFAULT_THRESHOLD = 70

DEDUCT_LINT_ERROR = 15
DEDUCT_WARNING = 10
DEDUCT_INFO = 2


class VerifierKind(Enum):
    SCENARIO = "Scenario"
    REPRESENTATION = "Representation"
    LOGICAL = "Logical"
    LEGAL = "Legal"


class MissingVerifier(Exception):
    """Fewer than four verifier kinds were supplied to the gate."""


@dataclass(frozen=True)
class VerifierReport:
    kind: VerifierKind
    score: int
    feedback: str
    elapsed: float = 0.0
    degraded: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.score <= 100:
            raise ValueError(f"score {self.score} outside [0, 100]")

    def to_doc(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "score": self.score,
            "feedback": self.feedback,
            "elapsed": self.elapsed,
            "degraded": self.degraded,
        }


@dataclass(frozen=True)
class QualityAssessment:
    reports: tuple[VerifierReport, ...]
    average: Fraction
    threshold: int
    passed: bool


@dataclass
class Candidate:
    """Normalized sample view the verifiers operate on.

    ``rule_tree``/``facts`` may be raw documents (to be parsed) or already
    parsed; ``label`` is None when no label could be derived.
    """

    article: str
    scenario: str
    question: str
    rule_tree: Any
    facts: Any
    label: bool | None = None


def _resolve_tree(sample: Any) -> tuple[RuleTree | None, str | None]:
    tree = sample.rule_tree
    if isinstance(tree, RuleTree):
        return tree, None
    try:
        return parse_rule_tree(tree), None
    except (TreeSyntaxError, SchemaError) as exc:
        return None, str(exc)


def _resolve_facts(sample: Any) -> tuple[FactSet | None, str | None]:
    facts = sample.facts
    if isinstance(facts, FactSet):
        return facts, None
    try:
        return parse_facts(facts), None
    except (TreeSyntaxError, SchemaError) as exc:
        return None, str(exc)


def verify_representation(sample: Any) -> VerifierReport:
    """Deterministic structural scoring of the sample's rule tree.

    Any parse or validation error zeroes the score; otherwise deductions
    are 15 per lint Error, 10 per validation warning or lint Warning, and
    2 per lint Info, floored at zero.
    """
    started = time.perf_counter()

    def report(score: int, feedback: str) -> VerifierReport:
        return VerifierReport(
            kind=VerifierKind.REPRESENTATION,
            score=score,
            feedback=feedback,
            elapsed=time.perf_counter() - started,
        )

    tree, tree_error = _resolve_tree(sample)
    if tree is None:
        return report(0, f"rule tree does not parse: {tree_error}")
    validation = validate(tree)
    if validation.errors:
        lines = [f"{e.code} at {e.location}: {e.message}" for e in validation.errors]
        return report(0, "validation errors:\n" + "\n".join(lines))

    facts, facts_error = _resolve_facts(sample)
    if facts is None:
        return report(0, f"fact set does not parse: {facts_error}")

    resolved = Candidate(
        article=getattr(sample, "article", ""),
        scenario=getattr(sample, "scenario", ""),
        question=getattr(sample, "question", ""),
        rule_tree=tree,
        facts=facts,
        label=getattr(sample, "label", None),
    )
    findings = lint_sample(resolved)
    score = 100
    lines: list[str] = []
    for issue in validation.warnings:
        score -= DEDUCT_WARNING
        lines.append(f"{issue.code} at {issue.location}: {issue.message}")
    for f in findings:
        if f.severity is Severity.ERROR:
            score -= DEDUCT_LINT_ERROR
        elif f.severity is Severity.WARNING:
            score -= DEDUCT_WARNING
        else:
            score -= DEDUCT_INFO
        lines.append(f"{f.rule_id} {f.severity.value} at {f.location}: {f.message}")
    score = max(score, 0)
    feedback = "no findings" if not lines else "\n".join(lines)
    return report(score, feedback)


def verify_logical(sample: Any, budget: int = DEFAULT_BUDGET) -> VerifierReport:
    """Re-evaluate the tree against the facts and compare to the stored label."""
    started = time.perf_counter()

    def report(score: int, feedback: str, degraded: bool = False) -> VerifierReport:
        return VerifierReport(
            kind=VerifierKind.LOGICAL,
            score=score,
            feedback=feedback,
            elapsed=time.perf_counter() - started,
            degraded=degraded,
        )

    tree, tree_error = _resolve_tree(sample)
    if tree is None:
        return report(0, f"rule tree does not parse: {tree_error}")
    facts, facts_error = _resolve_facts(sample)
    if facts is None:
        return report(0, f"fact set does not parse: {facts_error}")
    label = getattr(sample, "label", None)
    if label is None:
        return report(0, "sample has no stored label to check against")
    try:
        result = evaluate(tree, facts, budget=budget)
    except BudgetExceeded as exc:
        return report(0, f"re-evaluation exceeded its step budget: {exc}", degraded=True)
    except EvaluationError as exc:
        return report(0, f"re-evaluation failed: {exc}")
    summary = render_trace(result.trace)
    if result.value == label:
        return report(
            100,
            f"recomputed label {result.value} matches the stored label\n{summary}",
        )
    return report(
        0,
        f"recomputed label {result.value} contradicts stored label {label}\n{summary}",
    )


_SCORE_RE = re.compile(r"\{.*\}", re.DOTALL)


def _parse_agent_reply(text: str) -> tuple[int, str]:
    match = _SCORE_RE.search(text)
    if not match:
        raise ValueError("no JSON object in reply")
    data = json.loads(match.group(0))
    score = data["score"]
    feedback = data["feedback"]
    if isinstance(score, bool) or not isinstance(score, int):
        raise ValueError("score is not an integer")
    if not isinstance(feedback, str) or not feedback:
        raise ValueError("feedback is not a non-empty string")
    return score, feedback


def _sample_context(sample: Any) -> str:
    tree, _ = _resolve_tree(sample)
    facts, _ = _resolve_facts(sample)
    tree_doc = tree.to_json() if tree else json.dumps(sample.rule_tree, default=str)
    facts_doc = json.dumps(facts.to_doc()) if facts else json.dumps(sample.facts, default=str)
    return (
        f"Target article: {getattr(sample, 'article', '')}\n\n"
        f"Scenario:\n{getattr(sample, 'scenario', '')}\n\n"
        f"Question: {getattr(sample, 'question', '')}\n\n"
        f"Rule tree:\n{tree_doc}\n\n"
        f"Facts:\n{facts_doc}\n"
    )


def load_instruction(kind: VerifierKind | str, directory: str | Path | None = None) -> str:
    """Load the instruction template for an agent role.

    Templates live as editable text files; ``directory`` overrides the
    packaged defaults.
    """
    name = kind.value.lower() if isinstance(kind, VerifierKind) else kind.lower()
    if directory is not None:
        return (Path(directory) / f"{name}.txt").read_text(encoding="utf-8")
    return (resources.files("lextree") / "prompts" / f"{name}.txt").read_text(encoding="utf-8")


def verify_with_agent(
    kind: VerifierKind,
    sample: Any,
    agent: AgentClient,
    on_unavailable: str = "degrade",
    instruction_dir: str | Path | None = None,
) -> VerifierReport:
    """Run the Scenario or Legal verifier through an agent.

    Malformed replies are retried once, then scored 0 (degraded).
    Out-of-range scores are clamped with a note.  Transport failures are
    retried once; after that, ``on_unavailable`` selects between a
    degraded zero-score report ("degrade") and raising AgentUnavailable
    ("raise").
    """
    if kind not in (VerifierKind.SCENARIO, VerifierKind.LEGAL):
        raise ValueError(f"{kind} is not an agent-backed verifier")
    started = time.perf_counter()
    instruction = load_instruction(kind, instruction_dir)
    context = _sample_context(sample)

    last_error: str | None = None
    for attempt in range(2):
        try:
            reply = agent.send(instruction, context)
        except AgentUnavailable as exc:
            last_error = f"transport failure: {exc}"
            if attempt == 1 and on_unavailable == "raise":
                raise
            continue
        try:
            score, feedback = _parse_agent_reply(reply)
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            last_error = f"malformed reply: {exc}"
            continue
        if score < 0 or score > 100:
            clamped = min(max(score, 0), 100)
            feedback += f"\n[note: reported score {score} clamped to {clamped}]"
            score = clamped
        return VerifierReport(
            kind=kind,
            score=score,
            feedback=feedback,
            elapsed=time.perf_counter() - started,
        )
    return VerifierReport(
        kind=kind,
        score=0,
        feedback=f"verifier degraded after retry ({last_error})",
        elapsed=time.perf_counter() - started,
        degraded=True,
    )


def aggregate(
    reports: Sequence[VerifierReport],
    threshold: int = DEFAULT_THRESHOLD,
) -> QualityAssessment:
    """Exact-mean gate over one report per verifier kind (>= threshold passes)."""
    kinds = {r.kind for r in reports}
    if len(reports) != 4 or kinds != set(VerifierKind):
        missing = sorted(k.value for k in set(VerifierKind) - kinds)
        raise MissingVerifier(f"need exactly one report per kind; missing: {missing}")
    average = Fraction(sum(r.score for r in reports), 4)
    return QualityAssessment(
        reports=tuple(reports),
        average=average,
        threshold=threshold,
        passed=average >= threshold,
    )
