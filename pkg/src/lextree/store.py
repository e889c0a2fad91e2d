"""Append-friendly JSONL corpus with a sample lifecycle.

One sample per line; updates rewrite the whole file through a temp file
and rename.  Refinement histories and queue assignments live in sidecar
files next to the corpus.  All mutation goes through a single writer lock;
concurrent conflicting transitions resolve first-writer-wins.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from .engine import EvaluationError, evaluate
from .model import FactSet, RuleTree, parse_facts, parse_rule_tree
from .verify import VerifierKind, VerifierReport


class StoreError(Exception):
    pass


class IoFailure(StoreError):
    pass


class NotFound(StoreError):
    pass


class IdCollision(StoreError):
    pass


class LabelInconsistent(StoreError):
    """The stored label contradicts re-evaluation of the sample's own tree."""


class IllegalTransition(StoreError):
    pass


class Status(Enum):
    DRAFTED = "Drafted"
    AUTO_VERIFIED = "AutoVerified"
    QUEUED = "Queued"
    HUMAN_VERIFIED = "HumanVerified"
    META_REVIEWED = "MetaReviewed"
    REJECTED = "Rejected"


LEGAL_TRANSITIONS: dict[Status, set[Status]] = {
    Status.DRAFTED: {Status.AUTO_VERIFIED, Status.REJECTED},
    Status.AUTO_VERIFIED: {Status.QUEUED, Status.REJECTED},
    Status.QUEUED: {Status.HUMAN_VERIFIED, Status.REJECTED},
    Status.HUMAN_VERIFIED: {Status.META_REVIEWED, Status.REJECTED},
    Status.META_REVIEWED: {Status.REJECTED},
    Status.REJECTED: set(),
}


class Category(Enum):
    GOOD = "Good"
    BAD = "Bad"


class Decision(Enum):
    CONFIRM = "Confirm"
    OVERTURN = "Overturn"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class HumanVerdict:
    """Single-annotator review: criteria (a) relevance, (b) formalization,
    (c) logical soundness, plus a Good/Bad categorization."""

    annotator_id: str
    relevant: bool
    well_formalized: bool
    logically_sound: bool
    category: Category
    notes: str = ""
    timestamp: str = field(default_factory=utc_now)

    def __post_init__(self) -> None:
        if self.category is Category.GOOD and not (
            self.relevant and self.well_formalized and self.logically_sound
        ):
            raise ValueError("category Good requires all three criteria to hold")

    def to_doc(self) -> dict[str, Any]:
        return {
            "annotator_id": self.annotator_id,
            "relevant": self.relevant,
            "well_formalized": self.well_formalized,
            "logically_sound": self.logically_sound,
            "category": self.category.value,
            "notes": self.notes,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "HumanVerdict":
        return cls(
            annotator_id=doc["annotator_id"],
            relevant=doc["relevant"],
            well_formalized=doc["well_formalized"],
            logically_sound=doc["logically_sound"],
            category=Category(doc["category"]),
            notes=doc.get("notes", ""),
            timestamp=doc["timestamp"],
        )


@dataclass(frozen=True)
class MetaReview:
    """Second-round expert review confirming or overturning the verdict."""

    reviewer_id: str
    decision: Decision
    final_category: Category
    rationale: str = ""
    timestamp: str = field(default_factory=utc_now)

    def to_doc(self) -> dict[str, Any]:
        return {
            "reviewer_id": self.reviewer_id,
            "decision": self.decision.value,
            "final_category": self.final_category.value,
            "rationale": self.rationale,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "MetaReview":
        return cls(
            reviewer_id=doc["reviewer_id"],
            decision=Decision(doc["decision"]),
            final_category=Category(doc["final_category"]),
            rationale=doc.get("rationale", ""),
            timestamp=doc["timestamp"],
        )


def meta_review(
    reviewer_id: str,
    decision: Decision,
    verdict: HumanVerdict,
    rationale: str = "",
) -> MetaReview:
    """Build a MetaReview whose final category follows the flip semantics."""
    if decision is Decision.CONFIRM:
        final = verdict.category
    else:
        final = Category.BAD if verdict.category is Category.GOOD else Category.GOOD
    return MetaReview(
        reviewer_id=reviewer_id,
        decision=decision,
        final_category=final,
        rationale=rationale,
    )


@dataclass(frozen=True)
class Sample:
    """One corpus record, from draft through meta-review."""

    id: str
    article: str
    scenario: str
    question: str
    rule_tree: RuleTree
    facts: FactSet
    label: bool
    reports: tuple[VerifierReport, ...] = ()
    status: Status = Status.DRAFTED
    verdict: HumanVerdict | None = None
    meta_review: MetaReview | None = None
    created_at: str = field(default_factory=utc_now)
    updated_at: str = field(default_factory=utc_now)
    history_ref: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "article": self.article,
            "scenario": self.scenario,
            "question": self.question,
            "rule_tree": self.rule_tree.to_doc(),
            "facts": self.facts.to_doc(),
            "label": self.label,
            "reports": [r.to_doc() for r in self.reports],
            "status": self.status.value,
            "verdict": self.verdict.to_doc() if self.verdict else None,
            "meta_review": self.meta_review.to_doc() if self.meta_review else None,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Sample":
        return cls(
            id=doc["id"],
            article=doc["article"],
            scenario=doc["scenario"],
            question=doc["question"],
            rule_tree=parse_rule_tree(doc["rule_tree"]),
            facts=parse_facts(doc["facts"]),
            label=doc["label"],
            reports=tuple(
                VerifierReport(
                    kind=VerifierKind(r["kind"]),
                    score=r["score"],
                    feedback=r["feedback"],
                    elapsed=r.get("elapsed", 0.0),
                    degraded=r.get("degraded", False),
                )
                for r in doc.get("reports", [])
            ),
            status=Status(doc["status"]),
            verdict=HumanVerdict.from_doc(doc["verdict"]) if doc.get("verdict") else None,
            meta_review=MetaReview.from_doc(doc["meta_review"]) if doc.get("meta_review") else None,
            created_at=doc["created_at"],
            updated_at=doc["updated_at"],
        )

    def final_category(self) -> Category | None:
        if self.meta_review:
            return self.meta_review.final_category
        if self.verdict:
            return self.verdict.category
        return None


def new_sample_id() -> str:
    return uuid.uuid4().hex[:12]


class Corpus:
    """Single-file JSONL corpus with sidecar history and assignment files."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.history_path = self.path.with_name(self.path.name + ".history.jsonl")
        self.assignments_path = self.path.with_name(self.path.name + ".assignments.jsonl")
        self._lock = threading.Lock()
        self._samples: dict[str, Sample] = {}
        self._assignments: dict[str, dict[str, str]] = {}
        self._load()

    def _load(self) -> None:
        if self.path.exists():
            try:
                with self.path.open(encoding="utf-8") as fh:
                    for line in fh:
                        line = line.strip()
                        if not line:
                            continue
                        sample = Sample.from_doc(json.loads(line))
                        self._samples[sample.id] = sample
            except OSError as exc:
                raise IoFailure(f"cannot read corpus {self.path}: {exc}") from exc
        if self.assignments_path.exists():
            with self.assignments_path.open(encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        rec = json.loads(line)
                        self._assignments[rec["sample_id"]] = rec

    # -- reads ------------------------------------------------------------

    def get(self, sample_id: str) -> Sample:
        try:
            return self._samples[sample_id]
        except KeyError:
            raise NotFound(f"no sample with id {sample_id!r}") from None

    def __len__(self) -> int:
        return len(self._samples)

    def list(
        self,
        status: Status | None = None,
        article: str | None = None,
    ) -> list[Sample]:
        out = []
        for sample in self._samples.values():
            if status is not None and sample.status is not status:
                continue
            if article is not None and sample.article != article:
                continue
            out.append(sample)
        return out

    def assignment_of(self, sample_id: str) -> str | None:
        rec = self._assignments.get(sample_id)
        return rec["annotator_id"] if rec else None

    def assignments_for(self, annotator_id: str) -> list[str]:
        return [sid for sid, rec in self._assignments.items() if rec["annotator_id"] == annotator_id]

    # -- writes -----------------------------------------------------------

    def append_sample(self, sample: Sample, check_label: bool = True) -> str:
        with self._lock:
            if sample.id in self._samples:
                raise IdCollision(f"sample id {sample.id!r} already exists")
            if check_label:
                try:
                    recomputed = evaluate(sample.rule_tree, sample.facts).value
                except EvaluationError as exc:
                    raise LabelInconsistent(f"label cannot be recomputed: {exc}") from exc
                if recomputed != sample.label:
                    raise LabelInconsistent(
                        f"stored label {sample.label} contradicts re-evaluation {recomputed}"
                    )
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(sample.to_doc()) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise IoFailure(f"cannot append to {self.path}: {exc}") from exc
            self._samples[sample.id] = sample
            return sample.id

    def _rewrite(self) -> None:
        tmp = self.path.with_name(self.path.name + ".tmp")
        try:
            with tmp.open("w", encoding="utf-8") as fh:
                for sample in self._samples.values():
                    fh.write(json.dumps(sample.to_doc()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            tmp.replace(self.path)
        except OSError as exc:
            raise IoFailure(f"cannot rewrite {self.path}: {exc}") from exc

    def transition(
        self,
        sample_id: str,
        new_state: Status,
        payload: HumanVerdict | MetaReview | None = None,
    ) -> Sample:
        with self._lock:
            sample = self.get(sample_id)
            if new_state not in LEGAL_TRANSITIONS[sample.status]:
                raise IllegalTransition(
                    f"{sample.status.value} -> {new_state.value} is not a legal transition"
                )
            updates: dict[str, Any] = {"status": new_state, "updated_at": utc_now()}
            if new_state is Status.HUMAN_VERIFIED:
                if not isinstance(payload, HumanVerdict):
                    raise IllegalTransition("transition to HumanVerified requires a verdict")
                updates["verdict"] = payload
            elif new_state is Status.META_REVIEWED:
                if not isinstance(payload, MetaReview):
                    raise IllegalTransition("transition to MetaReviewed requires a meta review")
                updates["meta_review"] = payload
            updated = replace(sample, **updates)
            self._samples[sample_id] = updated
            self._rewrite()
            return updated

    def assign_next(self, annotator_id: str) -> Sample | None:
        """Atomically hand the next unassigned Queued sample to an annotator."""
        with self._lock:
            for sample in self._samples.values():
                if sample.status is Status.QUEUED and sample.id not in self._assignments:
                    rec = {
                        "sample_id": sample.id,
                        "annotator_id": annotator_id,
                        "assigned_at": utc_now(),
                    }
                    self._assignments[sample.id] = rec
                    try:
                        with self.assignments_path.open("a", encoding="utf-8") as fh:
                            fh.write(json.dumps(rec) + "\n")
                    except OSError as exc:
                        raise IoFailure(f"cannot record assignment: {exc}") from exc
                    return sample
            return None

    def save_history(self, sample_id: str, history_doc: Any) -> None:
        try:
            with self.history_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"sample_id": sample_id, "history": history_doc}) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot append history: {exc}") from exc

    # -- export / stats ----------------------------------------------------

    def curated(self) -> list[Sample]:
        return [
            s
            for s in self._samples.values()
            if s.status is Status.META_REVIEWED
            and s.meta_review is not None
            and s.meta_review.final_category is Category.GOOD
        ]

    def export_curated(self, destination: str | Path) -> int:
        rows = self.curated()
        try:
            with Path(destination).open("w", encoding="utf-8") as fh:
                for sample in rows:
                    fh.write(json.dumps(sample.to_doc()) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot export to {destination}: {exc}") from exc
        return len(rows)

    def stats(self) -> dict[str, Any]:
        by_status: dict[str, int] = {}
        by_article: dict[str, int] = {}
        by_category: dict[str, int] = {}
        scores: dict[str, list[int]] = {}
        for sample in self._samples.values():
            by_status[sample.status.value] = by_status.get(sample.status.value, 0) + 1
            by_article[sample.article] = by_article.get(sample.article, 0) + 1
            cat = sample.final_category()
            if cat:
                by_category[cat.value] = by_category.get(cat.value, 0) + 1
            for r in sample.reports:
                scores.setdefault(r.kind.value, []).append(r.score)
        score_summary = {
            kind: {
                "count": len(vals),
                "min": min(vals),
                "max": max(vals),
                "mean": sum(vals) / len(vals),
            }
            for kind, vals in scores.items()
        }
        return {
            "total": len(self._samples),
            "by_status": by_status,
            "by_article": by_article,
            "by_category": by_category,
            "scores": score_summary,
        }


def iter_corpus_lines(path: str | Path) -> Iterable[dict[str, Any]]:
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
