"""Relationship store and check/expand evaluator."""

from .engine import (
    DEFAULT_MAX_DEPTH,
    CheckRequest,
    CheckResult,
    ExpandBranch,
    ExpandTree,
    check,
    expand,
)
from .model import (
    AuthorizationModel,
    ComputedRelation,
    DIRECT,
    Direct,
    DirectSubject,
    ObjectRef,
    RelationDefinition,
    RelationTuple,
    SubjectRef,
    SubjectSet,
    TupleToUserset,
    Violation,
    is_identifier,
    sort_tuples,
    subject_from_json,
    subject_to_json,
    validate_model,
)
from .store import (
    EngineSnapshot,
    ModelValidationError,
    TupleStore,
    UnknownRelationError,
    parse_subject_filter,
)

__all__ = [
    "AuthorizationModel",
    "CheckRequest",
    "CheckResult",
    "ComputedRelation",
    "DEFAULT_MAX_DEPTH",
    "DIRECT",
    "Direct",
    "DirectSubject",
    "EngineSnapshot",
    "ExpandBranch",
    "ExpandTree",
    "ModelValidationError",
    "ObjectRef",
    "RelationDefinition",
    "RelationTuple",
    "SubjectRef",
    "SubjectSet",
    "TupleStore",
    "TupleToUserset",
    "UnknownRelationError",
    "Violation",
    "check",
    "expand",
    "is_identifier",
    "parse_subject_filter",
    "sort_tuples",
    "subject_from_json",
    "subject_to_json",
    "validate_model",
]
