"""HTTP facade for review and automation.

Endpoints cover the review queue (no-overlap assignment), verdict and
meta-review submission, pipeline runs, export, and statistics.  Auth, when
configured, is a static token-to-role map checked against the
``X-Auth-Token`` header; the corpus remains the single writer.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from fastapi import Depends, FastAPI, Header, HTTPException, Query
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .agents import AgentClient, ScriptedAgent
from .engine import explain
from .pipeline import RefineConfig, refine_loop
from .store import (
    Category,
    Corpus,
    Decision,
    HumanVerdict,
    IllegalTransition,
    NotFound,
    Status,
    meta_review,
)

ROLE_ANNOTATOR = "annotator"
ROLE_META = "meta"


@dataclass
class AuthConfig:
    """token -> (role, identity); empty map disables auth checks."""

    tokens: dict[str, tuple[str, str]] = field(default_factory=dict)

    @property
    def enabled(self) -> bool:
        return bool(self.tokens)

    def resolve(self, token: str | None) -> tuple[str, str] | None:
        if token is None:
            return None
        return self.tokens.get(token)


class VerdictIn(BaseModel):
    annotator_id: str
    relevant: bool
    well_formalized: bool
    logically_sound: bool
    category: Literal["Good", "Bad"]
    notes: str = ""


class MetaIn(BaseModel):
    reviewer_id: str
    decision: Literal["Confirm", "Overturn"]
    rationale: str = ""


class RunIn(BaseModel):
    article: str
    threshold: int = 70
    max_iterations: int = 5
    mock_transcript: list[str] | None = None


@dataclass
class PipelineRun:
    id: str
    article: str
    status: str = "running"  # running | done | failed
    sample_id: str | None = None
    history: dict[str, Any] | None = None
    error: str | None = None


def _summary(sample) -> dict[str, Any]:
    return {
        "id": sample.id,
        "article": sample.article,
        "question": sample.question,
        "label": sample.label,
        "status": sample.status.value,
        "category": sample.final_category().value if sample.final_category() else None,
        "updated_at": sample.updated_at,
    }


def create_app(
    corpus: Corpus,
    auth: AuthConfig | None = None,
    drafter: AgentClient | None = None,
    scenario_agent: AgentClient | None = None,
    legal_agent: AgentClient | None = None,
    static_dir: str | Path | None = None,
    max_concurrent_runs: int = 2,
) -> FastAPI:
    app = FastAPI(title="lextree review service")
    auth = auth or AuthConfig()
    runs: dict[str, PipelineRun] = {}
    runs_lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=max_concurrent_runs)

    def caller(x_auth_token: str | None = Header(default=None)) -> tuple[str, str] | None:
        if not auth.enabled:
            return None
        who = auth.resolve(x_auth_token)
        if who is None:
            raise HTTPException(status_code=401, detail="missing or unknown token")
        return who

    @app.get("/samples")
    def list_samples(
        status: str | None = None,
        article: str | None = None,
        limit: int = Query(default=50, ge=1, le=500),
        offset: int = Query(default=0, ge=0),
        _who=Depends(caller),
    ):
        status_filter = None
        if status is not None:
            try:
                status_filter = Status(status)
            except ValueError:
                raise HTTPException(status_code=422, detail=f"unknown status {status!r}")
        rows = corpus.list(status=status_filter, article=article)
        return {
            "total": len(rows),
            "items": [_summary(s) for s in rows[offset : offset + limit]],
        }

    @app.get("/samples/{sample_id}")
    def get_sample(sample_id: str, _who=Depends(caller)):
        try:
            sample = corpus.get(sample_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="sample not found")
        trace = explain(sample.rule_tree, sample.facts)
        doc = sample.to_doc()
        doc["trace"] = trace.to_doc()
        doc["assigned_to"] = corpus.assignment_of(sample_id)
        return doc

    @app.get("/queue/next")
    def queue_next(annotator: str, who=Depends(caller)):
        if auth.enabled:
            role, identity = who
            if role != ROLE_ANNOTATOR or identity != annotator:
                raise HTTPException(status_code=403, detail="token does not match annotator")
        sample = corpus.assign_next(annotator)
        if sample is None:
            raise HTTPException(status_code=404, detail="no unassigned queued samples")
        remaining = sum(
            1
            for s in corpus.list(status=Status.QUEUED)
            if corpus.assignment_of(s.id) in (None, annotator)
        )
        return {"sample": _summary(sample), "remaining": remaining}

    @app.post("/samples/{sample_id}/verdict")
    def submit_verdict(sample_id: str, body: VerdictIn, who=Depends(caller)):
        if auth.enabled:
            role, identity = who
            if role != ROLE_ANNOTATOR or identity != body.annotator_id:
                raise HTTPException(status_code=403, detail="token does not match annotator")
        assignee = corpus.assignment_of(sample_id)
        if assignee is None or assignee != body.annotator_id:
            raise HTTPException(status_code=409, detail="caller is not the assignee")
        try:
            verdict = HumanVerdict(
                annotator_id=body.annotator_id,
                relevant=body.relevant,
                well_formalized=body.well_formalized,
                logically_sound=body.logically_sound,
                category=Category(body.category),
                notes=body.notes,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            updated = corpus.transition(sample_id, Status.HUMAN_VERIFIED, verdict)
        except NotFound:
            raise HTTPException(status_code=404, detail="sample not found")
        except IllegalTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return _summary(updated)

    @app.post("/samples/{sample_id}/meta")
    def submit_meta(sample_id: str, body: MetaIn, who=Depends(caller)):
        if auth.enabled:
            role, _identity = who
            if role != ROLE_META:
                raise HTTPException(status_code=403, detail="meta review requires the meta-reviewer role")
        try:
            sample = corpus.get(sample_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="sample not found")
        if sample.verdict is None:
            raise HTTPException(status_code=409, detail="sample has no annotator verdict yet")
        review = meta_review(
            reviewer_id=body.reviewer_id,
            decision=Decision(body.decision),
            verdict=sample.verdict,
            rationale=body.rationale,
        )
        try:
            updated = corpus.transition(sample_id, Status.META_REVIEWED, review)
        except IllegalTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return _summary(updated)

    @app.post("/pipeline/run")
    def pipeline_run(body: RunIn, _who=Depends(caller)):
        if body.mock_transcript is not None:
            shared = ScriptedAgent(body.mock_transcript)
            run_drafter = run_scenario = run_legal = shared
            concurrent = False
        else:
            if not (drafter and scenario_agent and legal_agent):
                raise HTTPException(
                    status_code=422,
                    detail="no agents configured; supply mock_transcript or configure remote agents",
                )
            run_drafter, run_scenario, run_legal = drafter, scenario_agent, legal_agent
            concurrent = True
        run = PipelineRun(id=uuid.uuid4().hex[:12], article=body.article)
        with runs_lock:
            runs[run.id] = run

        config = RefineConfig(
            threshold=body.threshold,
            max_iterations=body.max_iterations,
            concurrent_verifiers=concurrent,
        )

        def execute():
            try:
                sample, history = refine_loop(
                    body.article, run_drafter, run_scenario, run_legal, config
                )
                with runs_lock:
                    run.history = history.to_doc()
                    if sample is not None:
                        corpus.append_sample(sample)
                        corpus.save_history(sample.id, history.to_doc())
                        run.sample_id = sample.id
                    run.status = "done"
            except Exception as exc:  # surfaced via run status, not a 500
                with runs_lock:
                    run.status = "failed"
                    run.error = str(exc)

        pool.submit(execute)
        return {"run_id": run.id}

    @app.get("/pipeline/runs/{run_id}")
    def pipeline_status(run_id: str, _who=Depends(caller)):
        with runs_lock:
            run = runs.get(run_id)
            if run is None:
                raise HTTPException(status_code=404, detail="run not found")
            return {
                "run_id": run.id,
                "article": run.article,
                "status": run.status,
                "sample_id": run.sample_id,
                "history": run.history,
                "error": run.error,
            }

    @app.get("/export")
    def export(_who=Depends(caller)):
        import json as _json

        def lines():
            for sample in corpus.curated():
                yield _json.dumps(sample.to_doc()) + "\n"

        return StreamingResponse(lines(), media_type="application/jsonl")

    @app.get("/stats")
    def stats(_who=Depends(caller)):
        return corpus.stats()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
