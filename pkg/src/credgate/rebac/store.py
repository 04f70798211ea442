"""Tuple storage with immutable snapshots.

Writes are serialized and produce a new snapshot; readers (the check
evaluator) hold a snapshot and are never affected by later writes. When a
journal path is given, every committed model swap and tuple write is
appended as one JSON line and replayed at startup.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..journal import Journal
from .model import (
    AuthorizationModel,
    DirectSubject,
    ObjectRef,
    RelationTuple,
    SubjectRef,
    SubjectSet,
    sort_tuples,
    validate_model,
)


class UnknownRelationError(Exception):
    """A tuple or query references a (type, relation) absent from the model."""


class ModelValidationError(Exception):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


def _index_tuples(
    tuples: Iterable[RelationTuple],
) -> dict[tuple[ObjectRef, str], frozenset[SubjectRef]]:
    index: dict[tuple[ObjectRef, str], set[SubjectRef]] = {}
    for t in tuples:
        index.setdefault((t.object, t.relation), set()).add(t.subject)
    return {key: frozenset(subjects) for key, subjects in index.items()}


class EngineSnapshot:
    """Immutable (model, tuple set, revision) triple the evaluator runs on."""

    __slots__ = ("model", "revision", "tuples", "_index")

    def __init__(
        self,
        model: AuthorizationModel,
        tuples: frozenset[RelationTuple],
        revision: int,
    ):
        self.model = model
        self.tuples = tuples
        self.revision = revision
        self._index = _index_tuples(tuples)

    @classmethod
    def build(
        cls,
        model: AuthorizationModel,
        tuples: Iterable[RelationTuple] = (),
        revision: int = 0,
    ) -> "EngineSnapshot":
        return cls(model=model, tuples=frozenset(tuples), revision=revision)

    def subjects_for(self, obj: ObjectRef, relation: str) -> frozenset[SubjectRef]:
        return self._index.get((obj, relation), frozenset())


class TupleStore:
    """Serialized writer over an immutable snapshot chain."""

    def __init__(self, journal_path: Path | str | None = None):
        self._lock = threading.Lock()
        self._model = AuthorizationModel.empty()
        self._tuples: frozenset[RelationTuple] = frozenset()
        self._revision = 0
        self._model_counter = 0
        self._journal = Journal(Path(journal_path)) if journal_path else None
        self._snapshot = EngineSnapshot(self._model, self._tuples, self._revision)
        if self._journal is not None:
            self._replay()

    def _replay(self) -> None:
        for record in self._journal.replay():
            if record.get("op") == "model":
                model = AuthorizationModel.from_dict(
                    record["model"], model_id=record["model_id"]
                )
                self._model = model
                self._model_counter = int(record["model_id"])
            elif record.get("op") == "write":
                adds = [RelationTuple.from_dict(t) for t in record["adds"]]
                deletes = [RelationTuple.from_dict(t) for t in record["deletes"]]
                tuples = set(self._tuples)
                tuples.difference_update(deletes)
                tuples.update(adds)
                self._tuples = frozenset(tuples)
                self._revision = int(record["revision"])
        self._snapshot = EngineSnapshot(self._model, self._tuples, self._revision)

    def snapshot(self) -> EngineSnapshot:
        with self._lock:
            return self._snapshot

    @property
    def model(self) -> AuthorizationModel:
        return self.snapshot().model

    @property
    def revision(self) -> int:
        return self.snapshot().revision

    def set_model(self, model: AuthorizationModel) -> str:
        """Validate and atomically replace the active model; in-flight checks
        keep their snapshot."""
        violations = validate_model(model)
        if violations:
            raise ModelValidationError(violations)
        with self._lock:
            self._model_counter += 1
            model_id = f"{self._model_counter:012d}"
            stamped = AuthorizationModel(types=model.types, model_id=model_id)
            if self._journal is not None:
                self._journal.append(
                    {"op": "model", "model": stamped.to_dict(), "model_id": model_id}
                )
            self._model = stamped
            self._snapshot = EngineSnapshot(self._model, self._tuples, self._revision)
            return model_id

    def write(
        self,
        adds: Sequence[RelationTuple] = (),
        deletes: Sequence[RelationTuple] = (),
    ) -> int:
        """Atomic batch: validate every add against the active model first,
        then apply all adds and deletes or nothing. Duplicate adds and absent
        deletes are no-ops; the revision still advances."""
        with self._lock:
            for t in adds:
                if not self._model.has_relation(t.object.type_name, t.relation):
                    raise UnknownRelationError(
                        f"relation {t.relation!r} does not exist on type "
                        f"{t.object.type_name!r} in the active model"
                    )
            tuples = set(self._tuples)
            tuples.difference_update(deletes)
            tuples.update(adds)
            self._revision += 1
            if self._journal is not None:
                self._journal.append(
                    {
                        "op": "write",
                        "adds": [t.to_dict() for t in adds],
                        "deletes": [t.to_dict() for t in deletes],
                        "revision": self._revision,
                    }
                )
            self._tuples = frozenset(tuples)
            self._snapshot = EngineSnapshot(self._model, self._tuples, self._revision)
            return self._revision

    def read(
        self,
        object: ObjectRef | None = None,
        relation: str | None = None,
        subject: SubjectRef | None = None,
    ) -> list[RelationTuple]:
        """Stored tuples matching every supplied filter, in stable
        (object, relation, subject) order."""
        snapshot = self.snapshot()
        matches = [
            t
            for t in snapshot.tuples
            if (object is None or t.object == object)
            and (relation is None or t.relation == relation)
            and (subject is None or t.subject == subject)
        ]
        return sort_tuples(matches)

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()


def parse_subject_filter(text: str) -> SubjectRef:
    """Query-string form of a subject: ``id`` for direct subjects, or
    ``type:id#relation`` for subject sets."""
    if "#" in text:
        obj_part, _, relation = text.rpartition("#")
        return SubjectSet(object=ObjectRef.parse(obj_part), relation=relation)
    return DirectSubject(subject_id=text)
