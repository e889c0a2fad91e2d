"""Defeasible rule-tree toolchain for formalized legal norms.

Parsing, validation, and deterministic evaluation with derivation traces;
a lint/simplify suite for machine-generated trees; a four-verifier quality
gate with bounded drafter refinement; and a JSONL corpus with a human
review lifecycle behind an HTTP service.
"""

from .engine import (
    BudgetExceeded,
    DerivationTrace,
    EvalResult,
    InvalidTreeError,
    UnknownTarget,
    evaluate,
    explain,
)
from .lint import Finding, Severity, SimplifyWouldChangeSemantics, lint_sample, simplify
from .model import (
    FactSet,
    Rule,
    RuleTree,
    SchemaError,
    TreeSyntaxError,
    ValidationReport,
    parse_facts,
    parse_rule_tree,
    validate,
)
from .verify import (
    QualityAssessment,
    VerifierKind,
    VerifierReport,
    aggregate,
    verify_logical,
    verify_representation,
    verify_with_agent,
)

__all__ = [
    "BudgetExceeded",
    "DerivationTrace",
    "EvalResult",
    "FactSet",
    "Finding",
    "InvalidTreeError",
    "QualityAssessment",
    "Rule",
    "RuleTree",
    "SchemaError",
    "Severity",
    "SimplifyWouldChangeSemantics",
    "TreeSyntaxError",
    "UnknownTarget",
    "ValidationReport",
    "VerifierKind",
    "VerifierReport",
    "aggregate",
    "evaluate",
    "explain",
    "lint_sample",
    "parse_facts",
    "parse_rule_tree",
    "simplify",
    "validate",
    "verify_logical",
    "verify_representation",
    "verify_with_agent",
]

__version__ = "0.1.0"
