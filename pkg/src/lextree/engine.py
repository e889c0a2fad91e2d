"""Deterministic rule-tree evaluation with derivation traces.

Semantics: a predicate is true iff it is an asserted fact, or some rule
with that head has its operator satisfied over its conditions and none of
the rule's exceptions is true.  Exceptions take priority over conditions;
predicates that cannot be derived are false (negation as failure).
Re-entering a predicate already on the active evaluation path yields false
for the inner occurrence (cycles are cut, never an error).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import FactSet, RuleTree, validate

DEFAULT_BUDGET = 10_000

WARN_CYCLE_CUT = "CYCLE_CUT"


class EvaluationError(Exception):
    """Base class for evaluation failures."""


class BudgetExceeded(EvaluationError):
    """The step budget was exhausted before evaluation finished."""


class UnknownTarget(EvaluationError):
    """The requested target appears nowhere in the tree or facts."""


class InvalidTreeError(EvaluationError):
    """The tree has validation errors and must not be evaluated."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{e.code} at {e.location}: {e.message}" for e in self.errors))


class EntryKind(Enum):
    FACT = "fact"
    DERIVED = "derived"
    DEFEATED = "defeated"
    FAILED = "failed"
    NOT_ESTABLISHED = "not_established"
    CUT_ON_CYCLE = "cut_on_cycle"


@dataclass(frozen=True)
class TraceEntry:
    """Final evaluation record for one predicate."""

    predicate: str
    kind: EntryKind
    value: bool
    rule_index: int | None = None
    satisfied: tuple[str, ...] = ()
    exception: str | None = None
    failed_rules: tuple[int, ...] = ()
    cycle: bool = False

    def to_doc(self) -> dict:
        return {
            "predicate": self.predicate,
            "kind": self.kind.value,
            "value": self.value,
            "rule_index": self.rule_index,
            "satisfied": list(self.satisfied),
            "exception": self.exception,
            "failed_rules": list(self.failed_rules),
            "cycle": self.cycle,
        }


@dataclass
class DerivationTrace:
    """Map from predicate to its (single) evaluation record."""

    entries: dict[str, TraceEntry] = field(default_factory=dict)

    def value_of(self, predicate: str) -> bool | None:
        entry = self.entries.get(predicate)
        return entry.value if entry else None

    def to_doc(self) -> list[dict]:
        return [self.entries[p].to_doc() for p in self.entries]


@dataclass(frozen=True)
class EvalResult:
    value: bool
    target: str
    trace: DerivationTrace
    warnings: tuple[str, ...]
    steps_used: int


class _Evaluator:
    def __init__(self, tree: RuleTree, facts: FactSet, budget: int):
        self.tree = tree
        self.facts = facts
        self.budget = budget
        self.steps = 0
        self.memo: dict[str, bool] = {}
        self.path: set[str] = set()
        self.cut: set[str] = set()
        self.trace = DerivationTrace()
        self.warnings: set[str] = set()

    def eval(self, pred: str) -> bool:
        if pred in self.memo:
            return self.memo[pred]
        if pred in self.path:
            # Cycle: the inner occurrence is false; do not memoize so an
            # off-path evaluation can still complete normally.
            self.warnings.add(WARN_CYCLE_CUT)
            self.cut.add(pred)
            return False
        if self.steps >= self.budget:
            raise BudgetExceeded(f"step budget of {self.budget} exhausted")
        self.steps += 1

        if pred in self.facts:
            self._record(TraceEntry(pred, EntryKind.FACT, True))
            self.memo[pred] = True
            return True

        rules = self.tree.rules_for(pred)
        if not rules:
            self._record(TraceEntry(pred, EntryKind.NOT_ESTABLISHED, False))
            self.memo[pred] = False
            return False

        self.path.add(pred)
        try:
            defeat: tuple[int, str] | None = None
            failed: list[int] = []
            for idx, rule in rules:
                firing = None
                for exc in rule.exceptions:
                    if self.eval(exc):
                        firing = exc
                        break
                if firing is not None:
                    if defeat is None:
                        defeat = (idx, firing)
                    continue
                satisfied: list[str] = []
                if rule.op == "ALL":
                    ok = True
                    for cond in rule.conditions:
                        if self.eval(cond):
                            satisfied.append(cond)
                        else:
                            ok = False
                            break
                else:  # ANY
                    ok = False
                    for cond in rule.conditions:
                        if self.eval(cond):
                            satisfied.append(cond)
                            ok = True
                            break
                if ok:
                    self._record(
                        TraceEntry(
                            pred,
                            EntryKind.DERIVED,
                            True,
                            rule_index=idx,
                            satisfied=tuple(satisfied),
                            cycle=pred in self.cut,
                        )
                    )
                    self.memo[pred] = True
                    return True
                failed.append(idx)
        finally:
            self.path.discard(pred)

        if pred in self.cut:
            self._record(
                TraceEntry(pred, EntryKind.CUT_ON_CYCLE, False, failed_rules=tuple(failed), cycle=True)
            )
        elif defeat is not None:
            self._record(
                TraceEntry(
                    pred,
                    EntryKind.DEFEATED,
                    False,
                    rule_index=defeat[0],
                    exception=defeat[1],
                    failed_rules=tuple(failed),
                )
            )
        else:
            self._record(TraceEntry(pred, EntryKind.FAILED, False, failed_rules=tuple(failed)))
        self.memo[pred] = False
        return False

    def _record(self, entry: TraceEntry) -> None:
        self.trace.entries[entry.predicate] = entry


def evaluate(
    tree: RuleTree,
    facts: FactSet,
    target: str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> EvalResult:
    """Evaluate ``target`` (default: first rule's head) against the facts.

    Raises InvalidTreeError when the tree fails validation, UnknownTarget
    when the target appears nowhere, and BudgetExceeded when the step
    budget runs out.
    """
    report = validate(tree)
    if report.errors:
        raise InvalidTreeError(report.errors)

    if target is None:
        target = tree.target
    if target not in tree.heads() and target not in facts and target not in tree.referenced():
        raise UnknownTarget(f"{target!r} is not a head, a fact, or referenced in the tree")

    ev = _Evaluator(tree, facts, budget)
    value = ev.eval(target)
    warnings = tuple(sorted(set(facts.warnings) | ev.warnings))
    return EvalResult(
        value=value,
        target=target,
        trace=ev.trace,
        warnings=warnings,
        steps_used=ev.steps,
    )


def explain(
    tree: RuleTree,
    facts: FactSet,
    target: str | None = None,
    budget: int = DEFAULT_BUDGET,
) -> DerivationTrace:
    """Return just the derivation trace for the evaluation."""
    return evaluate(tree, facts, target=target, budget=budget).trace


def render_trace(trace: DerivationTrace) -> str:
    """Human-readable one-line-per-predicate rendering of a trace."""
    lines = []
    for pred, e in trace.entries.items():
        if e.kind is EntryKind.FACT:
            detail = "asserted fact"
        elif e.kind is EntryKind.DERIVED:
            detail = f"derived by rules[{e.rule_index}] via {list(e.satisfied)}"
        elif e.kind is EntryKind.DEFEATED:
            detail = f"rules[{e.rule_index}] defeated by exception {e.exception!r}"
        elif e.kind is EntryKind.CUT_ON_CYCLE:
            detail = "cut on cycle"
        elif e.kind is EntryKind.FAILED:
            detail = f"conditions not met for rules {list(e.failed_rules)}"
        else:
            detail = "not established (no fact, no rule)"
        lines.append(f"{pred} = {str(e.value).lower()}  [{detail}]")
    return "\n".join(lines)
