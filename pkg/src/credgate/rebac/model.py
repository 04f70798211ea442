"""Relationship tuples and the authorization-model grammar.

State is a set of [object, relation, subject] facts. The model says, per
object type and relation, how a query can be satisfied: by a direct tuple,
by another relation on the same object (implication), or by hopping through
a tupleset to a related object (inheritance). Rewrites are unions only, so
adding facts can never take access away.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

IDENTIFIER_RE = re.compile(r"^[a-z][a-z0-9_]{0,63}$")

MAX_OBJECT_ID_BYTES = 512


def is_identifier(name: str) -> bool:
    return bool(IDENTIFIER_RE.match(name))


@dataclass(frozen=True, order=True)
class ObjectRef:
    type_name: str
    object_id: str

    def __post_init__(self):
        if not is_identifier(self.type_name):
            raise ValueError(f"invalid type name {self.type_name!r}")
        if not self.object_id:
            raise ValueError("object id must be non-empty")
        if len(self.object_id.encode("utf-8")) > MAX_OBJECT_ID_BYTES:
            raise ValueError("object id exceeds 512 bytes")

    def __str__(self) -> str:
        return f"{self.type_name}:{self.object_id}"

    @classmethod
    def parse(cls, text: str) -> "ObjectRef":
        """Split on the FIRST colon: object ids may themselves contain colons
        (DIDs do)."""
        type_name, sep, object_id = text.partition(":")
        if not sep:
            raise ValueError(f"object reference {text!r} has no type prefix")
        return cls(type_name=type_name, object_id=object_id)

    @classmethod
    def try_parse(cls, text: str) -> "ObjectRef | None":
        try:
            return cls.parse(text)
        except ValueError:
            return None


@dataclass(frozen=True, order=True)
class DirectSubject:
    subject_id: str

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject id must be non-empty")

    def sort_key(self) -> str:
        return self.subject_id


@dataclass(frozen=True, order=True)
class SubjectSet:
    """All subjects holding ``relation`` on ``object``."""

    object: ObjectRef
    relation: str

    def __post_init__(self):
        if not is_identifier(self.relation):
            raise ValueError(f"invalid relation {self.relation!r} in subject set")

    def sort_key(self) -> str:
        return f"{self.object}#{self.relation}"


SubjectRef = Union[DirectSubject, SubjectSet]


def subject_to_json(subject: SubjectRef):
    if isinstance(subject, DirectSubject):
        return subject.subject_id
    return {"object": str(subject.object), "relation": subject.relation}


def subject_from_json(data) -> SubjectRef:
    if isinstance(data, str):
        return DirectSubject(subject_id=data)
    if isinstance(data, dict):
        return SubjectSet(
            object=ObjectRef.parse(str(data["object"])), relation=str(data["relation"])
        )
    raise ValueError(f"subject must be a string or object, got {type(data).__name__}")


@dataclass(frozen=True)
class RelationTuple:
    object: ObjectRef
    relation: str
    subject: SubjectRef

    def __post_init__(self):
        if not is_identifier(self.relation):
            raise ValueError(f"invalid relation {self.relation!r}")

    def sort_key(self) -> tuple[str, str, str]:
        return (str(self.object), self.relation, self.subject.sort_key())

    def to_dict(self) -> dict:
        return {
            "object": str(self.object),
            "relation": self.relation,
            "subject": subject_to_json(self.subject),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RelationTuple":
        return cls(
            object=ObjectRef.parse(str(data["object"])),
            relation=str(data["relation"]),
            subject=subject_from_json(data["subject"]),
        )


# Rewrite nodes: how a relation query may be satisfied.


@dataclass(frozen=True)
class Direct:
    """Satisfied by a stored/contextual tuple on this very (object, relation)."""


@dataclass(frozen=True)
class ComputedRelation:
    """Satisfied when another relation on the same object is satisfied."""

    relation: str


@dataclass(frozen=True)
class TupleToUserset:
    """Satisfied by following tuples under ``tupleset_relation`` to related
    objects and checking ``computed_relation`` there."""

    tupleset_relation: str
    computed_relation: str


RewriteNode = Union[Direct, ComputedRelation, TupleToUserset]

DIRECT = Direct()


def rewrite_node_to_json(node: RewriteNode):
    if isinstance(node, Direct):
        return "direct"
    if isinstance(node, ComputedRelation):
        return {"computed": node.relation}
    return {
        "tupleToUserset": {
            "tupleset": node.tupleset_relation,
            "computed": node.computed_relation,
        }
    }


def rewrite_node_from_json(data) -> RewriteNode:
    if data == "direct":
        return DIRECT
    if isinstance(data, dict) and set(data) == {"computed"}:
        return ComputedRelation(relation=str(data["computed"]))
    if isinstance(data, dict) and set(data) == {"tupleToUserset"}:
        inner = data["tupleToUserset"]
        return TupleToUserset(
            tupleset_relation=str(inner["tupleset"]),
            computed_relation=str(inner["computed"]),
        )
    raise ValueError(f"unrecognized rewrite node {data!r}")


@dataclass(frozen=True)
class RelationDefinition:
    name: str
    rewrite: tuple[RewriteNode, ...]


@dataclass(frozen=True)
class AuthorizationModel:
    types: Mapping[str, Mapping[str, RelationDefinition]]
    model_id: str = "0"

    @classmethod
    def empty(cls) -> "AuthorizationModel":
        return cls(types={}, model_id="0")

    def relation(self, type_name: str, relation: str) -> RelationDefinition | None:
        return self.types.get(type_name, {}).get(relation)

    def has_relation(self, type_name: str, relation: str) -> bool:
        return self.relation(type_name, relation) is not None

    def to_dict(self) -> dict:
        return {
            "types": {
                type_name: {
                    "relations": {
                        rel_name: [rewrite_node_to_json(n) for n in rel_def.rewrite]
                        for rel_name, rel_def in relations.items()
                    }
                }
                for type_name, relations in self.types.items()
            }
        }

    @classmethod
    def from_dict(cls, data: dict, model_id: str = "0") -> "AuthorizationModel":
        types_raw = data.get("types")
        if not isinstance(types_raw, dict):
            raise ValueError('model must have a "types" object')
        types: dict[str, dict[str, RelationDefinition]] = {}
        for type_name, body in types_raw.items():
            if not isinstance(body, dict) or not isinstance(body.get("relations"), dict):
                raise ValueError(f'type {type_name!r} must have a "relations" object')
            relations = {}
            for rel_name, nodes in body["relations"].items():
                if not isinstance(nodes, list):
                    raise ValueError(f"rewrite of {type_name}#{rel_name} must be a list")
                relations[rel_name] = RelationDefinition(
                    name=rel_name,
                    rewrite=tuple(rewrite_node_from_json(n) for n in nodes),
                )
            types[type_name] = relations
        return cls(types=types, model_id=model_id)


@dataclass(frozen=True)
class Violation:
    type_name: str
    relation: str
    message: str

    def __str__(self) -> str:
        where = f"{self.type_name}#{self.relation}" if self.relation else self.type_name
        return f"{where}: {self.message}"


def validate_model(model: AuthorizationModel) -> list[Violation]:
    """Structural checks; an empty list means the model is usable."""
    violations: list[Violation] = []
    for type_name, relations in model.types.items():
        if not is_identifier(type_name):
            violations.append(Violation(type_name, "", "invalid type name"))
        for rel_name, rel_def in relations.items():
            if not is_identifier(rel_name):
                violations.append(Violation(type_name, rel_name, "invalid relation name"))
            if not rel_def.rewrite:
                violations.append(Violation(type_name, rel_name, "empty rewrite list"))
            if len(set(rel_def.rewrite)) != len(rel_def.rewrite):
                violations.append(Violation(type_name, rel_name, "duplicate rewrite nodes"))
            for node in rel_def.rewrite:
                if isinstance(node, ComputedRelation):
                    if node.relation not in relations:
                        violations.append(
                            Violation(
                                type_name,
                                rel_name,
                                f"unknown relation {node.relation} on type {type_name}",
                            )
                        )
                elif isinstance(node, TupleToUserset):
                    if node.tupleset_relation not in relations:
                        violations.append(
                            Violation(
                                type_name,
                                rel_name,
                                f"unknown tupleset relation {node.tupleset_relation} "
                                f"on type {type_name}",
                            )
                        )
                    if not is_identifier(node.computed_relation):
                        violations.append(
                            Violation(
                                type_name,
                                rel_name,
                                f"invalid computed relation {node.computed_relation!r}",
                            )
                        )
    return violations


def sort_tuples(tuples: Iterable[RelationTuple]) -> list[RelationTuple]:
    return sorted(tuples, key=lambda t: t.sort_key())
