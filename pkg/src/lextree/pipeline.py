"""Drafter/verifier refinement loop.

One iteration: draft a sample for the target article, derive its label,
run the four verifiers, aggregate.  Passing drafts become AutoVerified
samples; failing ones feed the verifiers' feedback (last round only) back
into the next draft.  The loop is bounded by ``max_iterations``.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from .agents import AgentClient, AgentUnavailable
from .engine import DEFAULT_BUDGET, EvaluationError, evaluate
from .model import SchemaError, TreeSyntaxError, parse_facts, parse_rule_tree
from .store import Sample, Status, new_sample_id
from .verify import (
    Candidate,
    DEFAULT_THRESHOLD,
    QualityAssessment,
    VerifierKind,
    aggregate,
    load_instruction,
    verify_logical,
    verify_representation,
    verify_with_agent,
)


class DraftFailed(Exception):
    """The drafter's reply could not be parsed, even after one retry."""


@dataclass(frozen=True)
class DraftSample:
    """Raw drafter output for one article, prior to labeling."""

    article: str
    scenario: str
    question: str
    rule_tree_doc: Any
    facts_doc: Any

    @property
    def word_count(self) -> int:
        return len(self.scenario.split())


@dataclass
class RefineConfig:
    threshold: int = DEFAULT_THRESHOLD
    max_iterations: int = 5
    budget: int = DEFAULT_BUDGET
    concurrent_verifiers: bool = True
    instruction_dir: Any = None


@dataclass
class Iteration:
    draft: DraftSample | None
    assessment: QualityAssessment | None
    feedback: str
    error: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "scenario_words": self.draft.word_count if self.draft else None,
            "average": float(self.assessment.average) if self.assessment else None,
            "passed": self.assessment.passed if self.assessment else False,
            "scores": {r.kind.value: r.score for r in self.assessment.reports}
            if self.assessment
            else {},
            "feedback": self.feedback,
            "error": self.error,
        }


@dataclass
class RefinementHistory:
    iterations: list[Iteration] = field(default_factory=list)
    accepted_index: int | None = None

    @property
    def exhausted(self) -> bool:
        return self.accepted_index is None

    def to_doc(self) -> dict[str, Any]:
        return {
            "iterations": [it.to_doc() for it in self.iterations],
            "outcome": "Exhausted"
            if self.exhausted
            else f"Accepted({self.accepted_index})",
        }


_JSON_RE = re.compile(r"\{.*\}", re.DOTALL)


def _parse_draft_reply(article: str, reply: str) -> DraftSample:
    match = _JSON_RE.search(reply)
    if not match:
        raise ValueError("no JSON object in drafter reply")
    data = json.loads(match.group(0))
    missing = {"scenario", "question", "rule_tree", "facts"} - data.keys()
    if missing:
        raise ValueError(f"drafter reply missing {sorted(missing)}")
    if not isinstance(data["scenario"], str) or not isinstance(data["question"], str):
        raise ValueError("scenario and question must be strings")
    return DraftSample(
        article=article,
        scenario=data["scenario"],
        question=data["question"],
        rule_tree_doc=data["rule_tree"],
        facts_doc=data["facts"],
    )


def draft(
    article: str,
    agent: AgentClient,
    prior_feedback: str | None = None,
    instruction_dir: Any = None,
) -> DraftSample:
    """Ask the drafter for one sample; one retry on an unparseable reply."""
    instruction = load_instruction("drafter", instruction_dir)
    context = f"Target article: {article}\n"
    if prior_feedback:
        context += f"\nReviewer feedback on the previous draft:\n{prior_feedback}\n"
    last_error: Exception | None = None
    for _ in range(2):
        reply = agent.send(instruction, context)
        try:
            return _parse_draft_reply(article, reply)
        except (ValueError, json.JSONDecodeError) as exc:
            last_error = exc
    raise DraftFailed(f"unparseable drafter reply after retry: {last_error}")


def derive_label(draft_sample: DraftSample, budget: int = DEFAULT_BUDGET) -> bool:
    """Parse, validate, and evaluate the draft's tree on its default target."""
    tree = parse_rule_tree(draft_sample.rule_tree_doc)
    facts = parse_facts(draft_sample.facts_doc)
    return evaluate(tree, facts, budget=budget).value


def _run_verifiers(
    candidate: Candidate,
    scenario_agent: AgentClient,
    legal_agent: AgentClient,
    config: RefineConfig,
):
    jobs = [
        lambda: verify_representation(candidate),
        lambda: verify_logical(candidate, budget=config.budget),
        lambda: verify_with_agent(
            VerifierKind.SCENARIO,
            candidate,
            scenario_agent,
            on_unavailable="raise",
            instruction_dir=config.instruction_dir,
        ),
        lambda: verify_with_agent(
            VerifierKind.LEGAL,
            candidate,
            legal_agent,
            on_unavailable="raise",
            instruction_dir=config.instruction_dir,
        ),
    ]
    if config.concurrent_verifiers:
        with ThreadPoolExecutor(max_workers=4) as pool:
            futures = [pool.submit(job) for job in jobs]
            return [f.result() for f in futures]
    return [job() for job in jobs]


def refine_loop(
    article: str,
    drafter: AgentClient,
    scenario_agent: AgentClient,
    legal_agent: AgentClient,
    config: RefineConfig | None = None,
) -> tuple[Sample | None, RefinementHistory]:
    """Draft/verify/refine until a sample passes the gate or iterations run out."""
    config = config or RefineConfig()
    history = RefinementHistory()
    feedback: str | None = None

    for index in range(config.max_iterations):
        try:
            d = draft(article, drafter, prior_feedback=feedback, instruction_dir=config.instruction_dir)
        except (DraftFailed, AgentUnavailable) as exc:
            history.iterations.append(
                Iteration(draft=None, assessment=None, feedback=feedback or "", error=str(exc))
            )
            continue

        label: bool | None = None
        label_error: str | None = None
        try:
            label = derive_label(d, budget=config.budget)
        except (TreeSyntaxError, SchemaError, EvaluationError) as exc:
            label_error = str(exc)

        candidate = Candidate(
            article=article,
            scenario=d.scenario,
            question=d.question,
            rule_tree=d.rule_tree_doc,
            facts=d.facts_doc,
            label=label,
        )
        try:
            reports = _run_verifiers(candidate, scenario_agent, legal_agent, config)
        except AgentUnavailable as exc:
            history.iterations.append(
                Iteration(draft=d, assessment=None, feedback=feedback or "", error=str(exc))
            )
            continue

        assessment = aggregate(reports, threshold=config.threshold)
        round_feedback = "\n".join(f"[{r.kind.value}] {r.feedback}" for r in reports)
        history.iterations.append(
            Iteration(draft=d, assessment=assessment, feedback=round_feedback, error=label_error)
        )

        if assessment.passed and label is not None:
            history.accepted_index = index
            tree = parse_rule_tree(d.rule_tree_doc)
            facts = parse_facts(d.facts_doc)
            sample = Sample(
                id=new_sample_id(),
                article=article,
                scenario=d.scenario,
                question=d.question,
                rule_tree=tree,
                facts=facts,
                label=label,
                reports=tuple(reports),
                status=Status.AUTO_VERIFIED,
            )
            return sample, history

        feedback = round_feedback  # last round only, by design

    return None, history
