"""Brute-force reachability oracle and randomized instance generator.

The oracle enumerates every derivable (relation, object) fact for a fixed
subject by iterating the rewrite rules to a fixpoint over the finite object
universe. It shares no code with the recursive evaluator: the engine walks
the graph top-down with a visited set, the oracle saturates bottom-up, and
on monotone union-only rules both must compute the least fixpoint.
"""

from __future__ import annotations

import random

from credgate.rebac import (
    AuthorizationModel,
    ComputedRelation,
    Direct,
    DirectSubject,
    ObjectRef,
    RelationTuple,
    SubjectSet,
    TupleToUserset,
)


def saturate(
    model: AuthorizationModel,
    tuples: list[RelationTuple],
    subject_id: str,
    extra_objects: tuple[ObjectRef, ...] = (),
) -> set[tuple[ObjectRef, str]]:
    """Least fixpoint of derivable (object, relation) facts for the subject."""
    objects = set(extra_objects)
    for t in tuples:
        objects.add(t.object)
        if isinstance(t.subject, SubjectSet):
            objects.add(t.subject.object)
        else:
            parsed = ObjectRef.try_parse(t.subject.subject_id)
            if parsed is not None:
                objects.add(parsed)

    index: dict[tuple[ObjectRef, str], set] = {}
    for t in tuples:
        index.setdefault((t.object, t.relation), set()).add(t.subject)

    pairs = [(o, r) for o in objects for r in model.types.get(o.type_name, {})]
    true_facts: set[tuple[ObjectRef, str]] = set()

    def derivable(o: ObjectRef, r: str) -> bool:
        for node in model.types[o.type_name][r].rewrite:
            if isinstance(node, Direct):
                subjects = index.get((o, r), set())
                if DirectSubject(subject_id) in subjects:
                    return True
                for s in subjects:
                    if isinstance(s, SubjectSet) and (s.object, s.relation) in true_facts:
                        return True
            elif isinstance(node, ComputedRelation):
                if (o, node.relation) in true_facts:
                    return True
            elif isinstance(node, TupleToUserset):
                for s in index.get((o, node.tupleset_relation), set()):
                    if isinstance(s, SubjectSet):
                        target = s.object
                    else:
                        target = ObjectRef.try_parse(s.subject_id)
                    if target is not None and (target, node.computed_relation) in true_facts:
                        return True
        return False

    changed = True
    while changed:
        changed = False
        for pair in pairs:
            if pair not in true_facts and derivable(*pair):
                true_facts.add(pair)
                changed = True
    return true_facts


def oracle_check(
    model: AuthorizationModel,
    tuples: list[RelationTuple],
    subject_id: str,
    relation: str,
    obj: ObjectRef,
) -> bool:
    facts = saturate(model, tuples, subject_id, extra_objects=(obj,))
    return (obj, relation) in facts


# -- randomized instances --

USER_POOL = ["user:u0", "user:u1", "user:u2", "user:alice", "plainname"]
OBJECT_ID_POOL = ["o0", "o1", "o2", "o3", "ns:deep", "did:lkey:abc", "x:y:z"]


def random_model(rng: random.Random) -> AuthorizationModel:
    """<=5 types, <=3 relations each, rewrites drawn from all three node
    kinds (references kept valid so the validator passes)."""
    n_types = rng.randint(1, 5)
    type_names = [f"t{i}" for i in range(n_types)]
    all_relations = [f"r{i}" for i in range(3)]
    types: dict = {}
    for type_name in type_names:
        own = rng.sample(all_relations, rng.randint(1, 3))
        relations: dict = {}
        for rel in own:
            nodes = []
            for _ in range(rng.randint(1, 3)):
                kind = rng.random()
                if kind < 0.5:
                    nodes.append("direct")
                elif kind < 0.75 and len(own) > 1:
                    other = rng.choice([r for r in own if r != rel] or own)
                    nodes.append({"computed": other})
                else:
                    nodes.append(
                        {
                            "tupleToUserset": {
                                "tupleset": rng.choice(own),
                                "computed": rng.choice(all_relations),
                            }
                        }
                    )
            unique = []
            for node in nodes:
                if node not in unique:
                    unique.append(node)
            relations[rel] = unique or ["direct"]
        types[type_name] = {"relations": relations}
    return AuthorizationModel.from_dict({"types": types})


def random_objects(rng: random.Random, model: AuthorizationModel) -> list[ObjectRef]:
    type_names = list(model.types)
    return [
        ObjectRef(type_name=rng.choice(type_names), object_id=object_id)
        for object_id in rng.sample(OBJECT_ID_POOL, rng.randint(3, len(OBJECT_ID_POOL)))
    ]


def random_tuple(
    rng: random.Random, model: AuthorizationModel, objects: list[ObjectRef]
) -> RelationTuple:
    obj = rng.choice(objects)
    relation = rng.choice(list(model.types[obj.type_name]))
    roll = rng.random()
    if roll < 0.5:
        subject = DirectSubject(rng.choice(USER_POOL))
    elif roll < 0.75:
        subject = DirectSubject(str(rng.choice(objects)))
    else:
        subject = SubjectSet(
            object=rng.choice(objects),
            relation=rng.choice(["r0", "r1", "r2"]),
        )
    return RelationTuple(object=obj, relation=relation, subject=subject)


def random_instance(rng: random.Random):
    """One (model, stored, contextual, query) draw within the size bounds."""
    model = random_model(rng)
    objects = random_objects(rng, model)
    total = rng.randint(0, 30)
    stored, contextual = [], []
    for _ in range(total):
        t = random_tuple(rng, model, objects)
        (contextual if rng.random() < 0.25 else stored).append(t)
    query_obj = rng.choice(objects)
    query_rel = rng.choice(list(model.types[query_obj.type_name]))
    subject_id = rng.choice(USER_POOL + [str(o) for o in objects[:2]])
    return model, stored, contextual, subject_id, query_rel, query_obj
