"""The relationship-check evaluator.

Answers "does subject U have relation R with object O?" by walking the
union rewrite of (O's type, R) over stored plus per-call contextual tuples.
The subject never changes during recursion, so an evaluation frame is just
(object, relation); frames on the current path form the visited set and a
revisit evaluates false, which together with union-only rewrites makes the
result the least fixpoint. Any anomaly (unknown nested relation, exceeded
depth) denies that branch rather than erroring: fail closed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    ComputedRelation,
    Direct,
    DirectSubject,
    ObjectRef,
    RelationTuple,
    SubjectRef,
    SubjectSet,
    TupleToUserset,
    is_identifier,
)
from .store import EngineSnapshot, UnknownRelationError

DEFAULT_MAX_DEPTH = 25


@dataclass(frozen=True)
class CheckRequest:
    subject_id: str
    relation: str
    object: ObjectRef
    contextual_tuples: tuple[RelationTuple, ...] = ()
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject id must be non-empty")
        if not is_identifier(self.relation):
            raise ValueError(f"invalid relation {self.relation!r}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")


@dataclass(frozen=True)
class CheckResult:
    allowed: bool
    reasons: tuple[str, ...]
    depth_reached: int


@dataclass
class _Evaluation:
    snapshot: EngineSnapshot
    subject_id: str
    max_depth: int
    context: dict[tuple[ObjectRef, str], frozenset[SubjectRef]]
    depth_reached: int = 0

    def subjects_for(self, obj: ObjectRef, relation: str) -> frozenset[SubjectRef]:
        stored = self.snapshot.subjects_for(obj, relation)
        extra = self.context.get((obj, relation))
        if not extra:
            return stored
        return stored | extra

    def evaluate(
        self,
        obj: ObjectRef,
        relation: str,
        depth: int,
        visited: frozenset[tuple[ObjectRef, str]],
    ) -> list[str] | None:
        """Returns the satisfying chain as path segments, or None."""
        frame = (obj, relation)
        if frame in visited:
            return None
        if depth > self.max_depth:
            self.depth_reached = self.max_depth
            return None
        self.depth_reached = max(self.depth_reached, depth)
        rel_def = self.snapshot.model.relation(obj.type_name, relation)
        if rel_def is None:
            return None
        visited = visited | {frame}
        here = f"{obj}#{relation}"
        for node in rel_def.rewrite:
            if isinstance(node, Direct):
                subjects = self.subjects_for(obj, relation)
                if DirectSubject(self.subject_id) in subjects:
                    return [here, f"direct({self.subject_id})"]
                for subject in subjects:
                    if isinstance(subject, SubjectSet):
                        tail = self.evaluate(
                            subject.object, subject.relation, depth + 1, visited
                        )
                        if tail is not None:
                            return [here, "subject_set"] + tail
            elif isinstance(node, ComputedRelation):
                tail = self.evaluate(obj, node.relation, depth + 1, visited)
                if tail is not None:
                    return [here, f"computed({node.relation})"] + tail
            elif isinstance(node, TupleToUserset):
                label = (
                    f"tuple_to_userset({node.tupleset_relation}->"
                    f"{node.computed_relation})"
                )
                for subject in self.subjects_for(obj, node.tupleset_relation):
                    target = _userset_target(subject)
                    if target is None:
                        continue
                    tail = self.evaluate(
                        target, node.computed_relation, depth + 1, visited
                    )
                    if tail is not None:
                        return [here, label] + tail
        return None


def _userset_target(subject: SubjectRef) -> ObjectRef | None:
    """The object a tupleset entry points at. Direct subjects must parse as
    ``type:rest`` (first colon); unparseable ones are skipped."""
    if isinstance(subject, SubjectSet):
        return subject.object
    return ObjectRef.try_parse(subject.subject_id)


def _build_context(
    tuples: tuple[RelationTuple, ...],
) -> dict[tuple[ObjectRef, str], frozenset[SubjectRef]]:
    overlay: dict[tuple[ObjectRef, str], set[SubjectRef]] = {}
    for t in tuples:
        overlay.setdefault((t.object, t.relation), set()).add(t.subject)
    return {key: frozenset(subjects) for key, subjects in overlay.items()}


def check(snapshot: EngineSnapshot, request: CheckRequest) -> CheckResult:
    """Evaluate one authorization query against a snapshot.

    Contextual tuples are merged for this call only; the snapshot (and the
    store behind it) is never mutated. An unknown (type, relation) at the
    query's root is an error, distinct from a deny.
    """
    if not snapshot.model.has_relation(request.object.type_name, request.relation):
        raise UnknownRelationError(
            f"relation {request.relation!r} does not exist on type "
            f"{request.object.type_name!r}"
        )
    evaluation = _Evaluation(
        snapshot=snapshot,
        subject_id=request.subject_id,
        max_depth=request.max_depth,
        context=_build_context(request.contextual_tuples),
    )
    path = evaluation.evaluate(request.object, request.relation, 1, frozenset())
    if path is None:
        return CheckResult(
            allowed=False, reasons=(), depth_reached=evaluation.depth_reached
        )
    return CheckResult(
        allowed=True,
        reasons=(" -> ".join(path),),
        depth_reached=evaluation.depth_reached,
    )


@dataclass
class ExpandBranch:
    """One rewrite branch of an expansion node: its own direct subjects plus
    subtrees it delegates to."""

    label: str
    subjects: list[str] = field(default_factory=list)
    children: list["ExpandTree"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "branch": self.label,
            "subjects": sorted(self.subjects),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class ExpandTree:
    object: ObjectRef
    relation: str
    branches: list[ExpandBranch] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "object": str(self.object),
            "relation": self.relation,
            "branches": [b.to_dict() for b in self.branches],
        }

    def leaves(self) -> set[str]:
        found: set[str] = set()
        for branch in self.branches:
            found.update(branch.subjects)
            for child in branch.children:
                found.update(child.leaves())
        return found


def expand(
    snapshot: EngineSnapshot,
    obj: ObjectRef,
    relation: str,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> ExpandTree:
    """Debugging aid: enumerate, per rewrite branch, every subject the check
    would accept. Operates on stored tuples only."""
    if not snapshot.model.has_relation(obj.type_name, relation):
        raise UnknownRelationError(
            f"relation {relation!r} does not exist on type {obj.type_name!r}"
        )
    return _expand(snapshot, obj, relation, 1, max_depth, frozenset())


def _expand(
    snapshot: EngineSnapshot,
    obj: ObjectRef,
    relation: str,
    depth: int,
    max_depth: int,
    visited: frozenset[tuple[ObjectRef, str]],
) -> ExpandTree:
    tree = ExpandTree(object=obj, relation=relation)
    frame = (obj, relation)
    if frame in visited or depth > max_depth:
        return tree
    rel_def = snapshot.model.relation(obj.type_name, relation)
    if rel_def is None:
        return tree
    visited = visited | {frame}
    for node in rel_def.rewrite:
        if isinstance(node, Direct):
            branch = ExpandBranch(label="direct")
            for subject in snapshot.subjects_for(obj, relation):
                if isinstance(subject, DirectSubject):
                    branch.subjects.append(subject.subject_id)
                else:
                    branch.children.append(
                        _expand(
                            snapshot,
                            subject.object,
                            subject.relation,
                            depth + 1,
                            max_depth,
                            visited,
                        )
                    )
        elif isinstance(node, ComputedRelation):
            branch = ExpandBranch(label=f"computed({node.relation})")
            branch.children.append(
                _expand(snapshot, obj, node.relation, depth + 1, max_depth, visited)
            )
        else:
            branch = ExpandBranch(
                label=f"tuple_to_userset({node.tupleset_relation}->"
                f"{node.computed_relation})"
            )
            for subject in snapshot.subjects_for(obj, node.tupleset_relation):
                target = _userset_target(subject)
                if target is None:
                    continue
                branch.children.append(
                    _expand(
                        snapshot,
                        target,
                        node.computed_relation,
                        depth + 1,
                        max_depth,
                        visited,
                    )
                )
        tree.branches.append(branch)
    return tree
