"""Command-line entry points for the offline workflows.

Exit codes: 0 success, 1 domain failure (validation errors, exhausted
refinement, failing lint gate), 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .agents import ScriptedAgent, RemoteAgent, AgentUnavailable, load_transcript
from .engine import BudgetExceeded, DEFAULT_BUDGET, InvalidTreeError, UnknownTarget, evaluate, render_trace
from .lint import Severity, SimplifyWouldChangeSemantics, format_findings, lint_sample, simplify
from .model import SchemaError, TreeSyntaxError, parse_facts, parse_rule_tree, validate
from .pipeline import RefineConfig, refine_loop
from .store import Corpus
from .verify import Candidate


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}")


def _load_tree(path: str):
    try:
        return parse_rule_tree(_read(path))
    except (TreeSyntaxError, SchemaError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _load_facts(path: str):
    try:
        return parse_facts(_read(path))
    except (TreeSyntaxError, SchemaError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Defeasible rule-tree toolchain: evaluate, lint, verify, curate."""


@main.command("validate")
@click.argument("tree_file")
def validate_cmd(tree_file: str):
    """Parse and validate a rule-tree file."""
    tree = _load_tree(tree_file)
    report = validate(tree)
    for issue in report.errors:
        click.echo(f"ERROR {issue.code} at {issue.location}: {issue.message}")
    for issue in report.warnings:
        click.echo(f"WARNING {issue.code} at {issue.location}: {issue.message}")
    for issue in report.infos:
        click.echo(f"INFO {issue.code} at {issue.location}: {issue.message}")
    if report.errors:
        sys.exit(1)
    click.echo("ok")


@main.command("eval")
@click.argument("tree_file")
@click.argument("facts_file")
@click.option("--target", default=None, help="target predicate (default: first rule's head)")
@click.option("--trace", is_flag=True, help="print the derivation trace")
@click.option("--budget", default=DEFAULT_BUDGET, show_default=True)
def eval_cmd(tree_file: str, facts_file: str, target: str | None, trace: bool, budget: int):
    """Evaluate a rule tree against a fact set; prints true/false."""
    tree = _load_tree(tree_file)
    facts = _load_facts(facts_file)
    try:
        result = evaluate(tree, facts, target=target, budget=budget)
    except (InvalidTreeError, UnknownTarget, BudgetExceeded) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(str(result.value).lower())
    if trace:
        click.echo(render_trace(result.trace))


def _sample_from_doc(doc: dict) -> Candidate:
    return Candidate(
        article=doc.get("article", ""),
        scenario=doc.get("scenario", ""),
        question=doc.get("question", ""),
        rule_tree=parse_rule_tree(doc["rule_tree"]),
        facts=parse_facts(doc.get("facts", [])),
        label=doc.get("label"),
    )


@main.command("lint")
@click.argument("sample_file")
@click.option(
    "--fail-on",
    type=click.Choice(["warning", "error"]),
    default=None,
    help="exit nonzero when findings at or above this severity exist",
)
def lint_cmd(sample_file: str, fail_on: str | None):
    """Lint a sample file (JSON object) or a corpus (JSONL)."""
    text = _read(sample_file).strip()
    docs = []
    if "\n" in text and not text.startswith("["):
        for line in text.splitlines():
            line = line.strip()
            if line:
                docs.append(json.loads(line))
    else:
        docs.append(json.loads(text))

    worst = None
    for i, doc in enumerate(docs):
        try:
            sample = _sample_from_doc(doc)
        except (TreeSyntaxError, SchemaError, KeyError) as exc:
            click.echo(f"sample[{i}]: unusable ({exc})", err=True)
            worst = Severity.ERROR
            continue
        findings = lint_sample(sample)
        if findings:
            prefix = f"{doc.get('id', f'sample[{i}]')}: " if len(docs) > 1 else ""
            for line in format_findings(findings).splitlines():
                click.echo(prefix + line)
        for f in findings:
            if f.severity is Severity.ERROR:
                worst = Severity.ERROR
            elif f.severity is Severity.WARNING and worst is not Severity.ERROR:
                worst = Severity.WARNING

    if fail_on == "error" and worst is Severity.ERROR:
        sys.exit(1)
    if fail_on == "warning" and worst in (Severity.ERROR, Severity.WARNING):
        sys.exit(1)


@main.command("simplify")
@click.argument("tree_file")
@click.option("--check", is_flag=True, help="run the exhaustive equivalence guard")
@click.option("--out", "out_path", default=None, help="write result here instead of stdout")
def simplify_cmd(tree_file: str, check: bool, out_path: str | None):
    """Collapse pass-through rule chains and emit the simplified tree."""
    tree = _load_tree(tree_file)
    report = validate(tree)
    if report.errors:
        for issue in report.errors:
            click.echo(f"ERROR {issue.code} at {issue.location}: {issue.message}", err=True)
        sys.exit(1)
    try:
        result = simplify(tree, check=check)
    except SimplifyWouldChangeSemantics as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    text = result.to_json()
    if out_path:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@main.group("pipeline")
def pipeline_group():
    """Drafter/verifier pipeline commands."""


@pipeline_group.command("run")
@click.option("--article", required=True)
@click.option("--corpus", "corpus_path", required=True)
@click.option("--mock", "mock_path", default=None, help="transcript file replaying agent replies")
@click.option("--max-iters", default=5, show_default=True)
@click.option("--threshold", default=70, show_default=True)
def pipeline_run_cmd(article: str, corpus_path: str, mock_path: str | None, max_iters: int, threshold: int):
    """Run the refinement loop and append the accepted sample to the corpus."""
    if mock_path:
        shared = ScriptedAgent(load_transcript(mock_path))
        drafter = scenario_agent = legal_agent = shared
        concurrent = False
    else:
        try:
            drafter = scenario_agent = legal_agent = RemoteAgent.from_env()
        except AgentUnavailable as exc:
            raise click.ClickException(str(exc))
        concurrent = True
    config = RefineConfig(
        threshold=threshold, max_iterations=max_iters, concurrent_verifiers=concurrent
    )
    sample, history = refine_loop(article, drafter, scenario_agent, legal_agent, config)
    corpus = Corpus(corpus_path)
    if sample is None:
        click.echo(f"exhausted after {len(history.iterations)} iteration(s)")
        sys.exit(1)
    corpus.append_sample(sample)
    corpus.save_history(sample.id, history.to_doc())
    click.echo(
        f"accepted at iteration {history.accepted_index + 1}: sample {sample.id} "
        f"(label {str(sample.label).lower()})"
    )


@main.command("serve")
@click.option("--corpus", "corpus_path", required=True)
@click.option("--listen", default="127.0.0.1:8000", show_default=True)
@click.option("--static", "static_dir", default=None, help="directory of built UI assets")
def serve_cmd(corpus_path: str, listen: str, static_dir: str | None):
    """Start the review/automation HTTP service."""
    import uvicorn

    from .service import create_app

    host, _, port = listen.partition(":")
    app = create_app(Corpus(corpus_path), static_dir=static_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")


@main.command("export")
@click.option("--corpus", "corpus_path", required=True)
@click.option("--out", "out_path", required=True)
def export_cmd(corpus_path: str, out_path: str):
    """Write the curated (meta-reviewed Good) subset as JSONL."""
    count = Corpus(corpus_path).export_curated(out_path)
    click.echo(f"exported {count} sample(s)")


@main.command("stats")
@click.option("--corpus", "corpus_path", required=True)
def stats_cmd(corpus_path: str):
    """Print corpus statistics as JSON."""
    click.echo(json.dumps(Corpus(corpus_path).stats(), indent=2))


if __name__ == "__main__":
    main()
