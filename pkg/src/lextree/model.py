"""Core data model: defeasible rules, rule trees, fact sets.

The wire format is deliberately small.  A rule is a JSON object with the
keys ``p`` (head predicate), ``op`` (``"ALL"`` or ``"ANY"``),
``conditions`` (array of predicate names) and an optional ``exceptions``
array.  A rule tree is either a single rule object or an array of rule
objects; a fact set is an array of predicate names.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

OPS = ("ALL", "ANY")

RULE_KEYS = {"p", "op", "conditions", "exceptions"}
REQUIRED_RULE_KEYS = {"p", "op", "conditions"}


class TreeSyntaxError(ValueError):
    """The document is not well-formed (not parseable at all)."""


class SchemaError(ValueError):
    """The document parsed but does not match the rule/fact schema."""


def check_predicate(name: Any, where: str = "predicate") -> str:
    if not isinstance(name, str):
        raise SchemaError(f"{where}: expected a string, got {type(name).__name__}")
    if not IDENTIFIER_RE.match(name):
        raise SchemaError(f"{where}: {name!r} is not a valid predicate identifier")
    return name


@dataclass(frozen=True)
class Rule:
    """One defeasible rule: head holds when op(conditions) unless defeated."""

    head: str
    op: str
    conditions: tuple[str, ...]
    exceptions: tuple[str, ...] = ()

    def to_doc(self) -> dict[str, Any]:
        return {
            "p": self.head,
            "op": self.op,
            "conditions": list(self.conditions),
            "exceptions": list(self.exceptions),
        }


@dataclass(frozen=True)
class RuleTree:
    """Ordered, non-empty collection of rules; target defaults to the first head."""

    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        if not self.rules:
            raise SchemaError("a rule tree must contain at least one rule")

    @property
    def target(self) -> str:
        return self.rules[0].head

    def heads(self) -> set[str]:
        return {r.head for r in self.rules}

    def referenced(self) -> set[str]:
        out: set[str] = set()
        for r in self.rules:
            out.update(r.conditions)
            out.update(r.exceptions)
        return out

    def predicates(self) -> set[str]:
        return self.heads() | self.referenced()

    def rules_for(self, head: str) -> list[tuple[int, Rule]]:
        return [(i, r) for i, r in enumerate(self.rules) if r.head == head]

    def to_doc(self) -> list[dict[str, Any]]:
        return [r.to_doc() for r in self.rules]

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_doc(), indent=indent)


@dataclass(frozen=True)
class FactSet:
    """Closed-world set of predicates asserted true for one scenario."""

    facts: frozenset[str]
    warnings: tuple[str, ...] = ()

    def __contains__(self, name: str) -> bool:
        return name in self.facts

    def __iter__(self):
        return iter(sorted(self.facts))

    def __len__(self) -> int:
        return len(self.facts)

    def to_doc(self) -> list[str]:
        return sorted(self.facts)


def _load_document(document: Any) -> Any:
    if isinstance(document, (dict, list)):
        return document
    if isinstance(document, (str, bytes)):
        try:
            return json.loads(document)
        except json.JSONDecodeError as exc:
            raise TreeSyntaxError(f"malformed document: {exc}") from exc
    raise TreeSyntaxError(f"unsupported document type {type(document).__name__}")


def _parse_rule(obj: Any, where: str) -> Rule:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected a rule object, got {type(obj).__name__}")
    missing = REQUIRED_RULE_KEYS - obj.keys()
    if missing:
        raise SchemaError(f"{where}: missing field(s) {sorted(missing)}")
    extra = obj.keys() - RULE_KEYS
    if extra:
        raise SchemaError(f"{where}: unexpected field(s) {sorted(extra)}")
    head = check_predicate(obj["p"], f"{where}.p")
    op = obj["op"]
    if op not in OPS:
        raise SchemaError(f"{where}.op: expected one of {OPS}, got {op!r}")
    conditions = obj["conditions"]
    if not isinstance(conditions, list):
        raise SchemaError(f"{where}.conditions: expected an array")
    exceptions = obj.get("exceptions", [])
    if not isinstance(exceptions, list):
        raise SchemaError(f"{where}.exceptions: expected an array")
    conds = tuple(
        check_predicate(c, f"{where}.conditions[{i}]") for i, c in enumerate(conditions)
    )
    excs = tuple(
        check_predicate(e, f"{where}.exceptions[{i}]") for i, e in enumerate(exceptions)
    )
    return Rule(head=head, op=op, conditions=conds, exceptions=excs)


def parse_rule_tree(document: Any) -> RuleTree:
    """Parse a rule-tree document (JSON text or already-decoded object).

    A single rule object is promoted to a one-rule tree.  Raises
    TreeSyntaxError for malformed text and SchemaError for schema
    violations.
    """
    data = _load_document(document)
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list):
        raise SchemaError("a rule tree must be a rule object or an array of rules")
    if not data:
        raise SchemaError("a rule tree must contain at least one rule")
    rules = tuple(_parse_rule(obj, f"rules[{i}]") for i, obj in enumerate(data))
    return RuleTree(rules=rules)


def parse_facts(document: Any) -> FactSet:
    """Parse a fact-set document (array of predicate names).

    Duplicates are collapsed with a DUPLICATE_FACT warning recorded on the
    returned set.
    """
    data = _load_document(document)
    if not isinstance(data, list):
        raise SchemaError("a fact set must be an array of strings")
    names = [check_predicate(f, f"facts[{i}]") for i, f in enumerate(data)]
    warnings: list[str] = []
    seen: set[str] = set()
    for name in names:
        if name in seen:
            warnings.append(f"DUPLICATE_FACT:{name}")
        seen.add(name)
    return FactSet(facts=frozenset(seen), warnings=tuple(warnings))


# --- validation -----------------------------------------------------------

ERROR_EMPTY_CONDITIONS = "EMPTY_CONDITIONS"
ERROR_OVERLAP = "OVERLAP"
ERROR_DUPLICATE_RULE = "DUPLICATE_RULE"
WARN_CYCLE = "CYCLE"
WARN_UNREACHABLE = "UNREACHABLE"
WARN_MULTI_HEAD = "MULTI_HEAD"
INFO_NEVER_HEAD = "NEVER_HEAD"


@dataclass(frozen=True)
class Issue:
    code: str
    location: str
    message: str


@dataclass
class ValidationReport:
    """Structural findings for one tree.

    ``errors`` block evaluation; ``warnings`` are suspicious but legal;
    ``infos`` are purely informational (e.g. leaf predicates that can only
    be established by facts).
    """

    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)
    infos: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _reachable_heads(tree: RuleTree) -> set[str]:
    heads = tree.heads()
    seen = {tree.target}
    stack = [tree.target]
    while stack:
        pred = stack.pop()
        for _, rule in tree.rules_for(pred):
            for ref in rule.conditions + rule.exceptions:
                if ref in heads and ref not in seen:
                    seen.add(ref)
                    stack.append(ref)
    return seen


def _find_cycles(tree: RuleTree) -> list[str]:
    """Return heads involved in head-reference cycles, in first-seen order."""
    heads = tree.heads()
    graph = {
        h: sorted(
            {p for _, r in tree.rules_for(h) for p in r.conditions + r.exceptions if p in heads}
        )
        for h in sorted(heads)
    }
    cyclic: list[str] = []
    color: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(node: str, path: list[str]) -> None:
        color[node] = 0
        path.append(node)
        for nxt in graph[node]:
            if color.get(nxt) == 0:
                for member in path[path.index(nxt):]:
                    if member not in cyclic:
                        cyclic.append(member)
            elif nxt not in color:
                visit(nxt, path)
        path.pop()
        color[node] = 1

    for h in graph:
        if h not in color:
            visit(h, [])
    return cyclic


def validate(tree: RuleTree) -> ValidationReport:
    """Check structural invariants; always returns a report, never raises."""
    report = ValidationReport()
    seen_rules: dict[Rule, int] = {}
    head_counts: dict[str, int] = {}
    for i, rule in enumerate(tree.rules):
        loc = f"rules[{i}]"
        if not rule.conditions:
            report.errors.append(
                Issue(ERROR_EMPTY_CONDITIONS, loc, f"rule for {rule.head!r} has no conditions")
            )
        overlap = sorted(set(rule.conditions) & set(rule.exceptions))
        if overlap:
            report.errors.append(
                Issue(
                    ERROR_OVERLAP,
                    loc,
                    f"predicate(s) {overlap} appear as both condition and exception",
                )
            )
        if rule in seen_rules:
            report.errors.append(
                Issue(
                    ERROR_DUPLICATE_RULE,
                    loc,
                    f"identical to rules[{seen_rules[rule]}]",
                )
            )
        else:
            seen_rules[rule] = i
        head_counts[rule.head] = head_counts.get(rule.head, 0) + 1

    for head, n in head_counts.items():
        if n > 1:
            report.warnings.append(
                Issue(WARN_MULTI_HEAD, head, f"{n} rules share head {head!r} (disjunctive)")
            )

    cyclic = _find_cycles(tree)
    if cyclic:
        report.warnings.append(
            Issue(WARN_CYCLE, ",".join(cyclic), f"cyclic head references: {cyclic}")
        )

    reachable = _reachable_heads(tree)
    for i, rule in enumerate(tree.rules):
        if rule.head not in reachable:
            report.warnings.append(
                Issue(
                    WARN_UNREACHABLE,
                    f"rules[{i}]",
                    f"head {rule.head!r} is unreachable from target {tree.target!r}",
                )
            )

    heads = tree.heads()
    for pred in sorted(tree.referenced() - heads):
        report.infos.append(
            Issue(
                INFO_NEVER_HEAD,
                pred,
                f"{pred!r} is never a rule head; it can only be established as a fact",
            )
        )
    return report


def facts_from_iterable(names: Iterable[str]) -> FactSet:
    return FactSet(facts=frozenset(check_predicate(n) for n in names))
