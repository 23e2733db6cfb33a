"""Typed, span-bearing annotations over document text.

A :class:`Cas` holds one document's text plus annotations kept in
(begin, end, id) order.  Types live in a :class:`TypeSystem` with single
inheritance; querying by a supertype returns instances of its subtypes
too.  Offsets are character offsets into the decoded text, 0-based and
half-open.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import AnnologError


class UnknownTypeError(AnnologError):
    def __init__(self, type_name: str) -> None:
        super().__init__(f"unknown annotation type {type_name!r}")
        self.type_name = type_name


class InvalidSpanError(AnnologError):
    pass


class UnknownFeatureError(AnnologError):
    def __init__(self, type_name: str, feature: str) -> None:
        super().__init__(f"type {type_name!r} declares no feature {feature!r}")


# Feature value kinds.  "ref" values are annotation ids.
FEATURE_KINDS = ("string", "integer", "ref", "string-list", "integer-list", "ref-list")


class TypeSystem:
    """Dotted type names with single-inheritance supertype edges and
    per-type feature declarations."""

    def __init__(self) -> None:
        self._supertype: Dict[str, Optional[str]] = {}
        self._features: Dict[str, Dict[str, str]] = {}

    def declare(self, name: str, supertype: Optional[str] = None,
                features: Optional[Dict[str, str]] = None) -> None:
        if supertype is not None and supertype not in self._supertype:
            raise UnknownTypeError(supertype)
        for feature, kind in (features or {}).items():
            if kind not in FEATURE_KINDS:
                raise ValueError(f"unknown feature kind {kind!r} for {name}.{feature}")
        self._supertype[name] = supertype
        self._features[name] = dict(features or {})
        # Inherited feature names must stay unique along the chain.
        seen: Dict[str, str] = {}
        for ancestor in self._chain(name):
            for feature in self._features.get(ancestor, ()):
                if feature in seen and seen[feature] != ancestor:
                    raise ValueError(
                        f"feature {feature!r} declared on both {ancestor} and {seen[feature]}")
                seen[feature] = ancestor

    def has_type(self, name: str) -> bool:
        return name in self._supertype

    def require(self, name: str) -> None:
        if name not in self._supertype:
            raise UnknownTypeError(name)

    def _chain(self, name: str) -> Iterable[str]:
        seen = set()
        current: Optional[str] = name
        while current is not None:
            if current in seen:
                raise ValueError(f"inheritance cycle through {current!r}")
            seen.add(current)
            yield current
            current = self._supertype.get(current)

    def subsumes(self, general: str, specific: str) -> bool:
        """True iff ``general`` is ``specific`` or one of its ancestors."""
        self.require(general)
        self.require(specific)
        return any(ancestor == general for ancestor in self._chain(specific))

    def feature_kind(self, type_name: str, feature: str) -> str:
        self.require(type_name)
        for ancestor in self._chain(type_name):
            kind = self._features.get(ancestor, {}).get(feature)
            if kind is not None:
                return kind
        raise UnknownFeatureError(type_name, feature)

    def type_names(self) -> List[str]:
        return list(self._supertype)


@dataclass(frozen=True)
class Annotation:
    id: int
    type: str
    begin: int
    end: int
    features: Dict[str, object] = field(default_factory=dict)

    @property
    def span(self) -> Tuple[int, int]:
        return (self.begin, self.end)


class Cas:
    """One document's text plus its annotations, ordered by (begin, end, id)."""

    def __init__(self, text: str, view: str = "_InitialView",
                 type_system: Optional[TypeSystem] = None) -> None:
        self.text = text
        self.view = view
        self.type_system = type_system or TypeSystem()
        self._annotations: List[Annotation] = []
        self._sort_keys: List[Tuple[int, int, int]] = []
        self._by_id: Dict[int, Annotation] = {}
        self._next_id = 1

    def __len__(self) -> int:
        return len(self._annotations)

    def add_annotation(self, type_name: str, begin: int, end: int,
                       features: Optional[Dict[str, object]] = None) -> int:
        """Insert an annotation and return its id."""
        self.type_system.require(type_name)
        if not (0 <= begin <= end <= len(self.text)):
            raise InvalidSpanError(
                f"span [{begin}, {end}) invalid for text of length {len(self.text)}")
        features = dict(features or {})
        for feature in features:
            self.type_system.feature_kind(type_name, feature)  # raises if undeclared
        annotation = Annotation(self._next_id, type_name, begin, end, features)
        self._next_id += 1
        key = (begin, end, annotation.id)
        index = bisect.bisect_left(self._sort_keys, key)
        self._sort_keys.insert(index, key)
        self._annotations.insert(index, annotation)
        self._by_id[annotation.id] = annotation
        return annotation.id

    def get(self, annotation_id: int) -> Annotation:
        return self._by_id[annotation_id]

    def annotations(self) -> List[Annotation]:
        """All annotations in span order."""
        return list(self._annotations)

    def annotations_of_type(self, type_name: str) -> List[Annotation]:
        """Annotations whose type is subsumed by ``type_name``, in span order."""
        self.type_system.require(type_name)
        return [a for a in self._annotations
                if self.type_system.subsumes(type_name, a.type)]

    def covered_text(self, annotation: Annotation) -> str:
        return self.text[annotation.begin:annotation.end]


def subsumes(type_system: TypeSystem, general: str, specific: str) -> bool:
    return type_system.subsumes(general, specific)


def annotations_of_type(cas: Cas, type_system: TypeSystem, type_name: str) -> List[Annotation]:
    type_system.require(type_name)
    return [a for a in cas.annotations() if type_system.subsumes(type_name, a.type)]


# Annotation types used by the shipped annotators.  Parse nodes and edges
# are the pipeline's input convention; Focus/AnswerType/relation types are
# its outputs.
PARSE_NODE = "parse.Node"
PARSE_EDGE = "parse.Edge"
PARSE_ROOT = "parse.Root"
FOCUS_TYPE = "qa.Focus"
ANSWER_TYPE = "qa.AnswerType"
RELATION_TYPE = "rel.Relation"


def default_type_system() -> TypeSystem:
    ts = TypeSystem()
    ts.declare(PARSE_NODE, features={
        "lemma": "string", "pennTag": "string", "semanticTypes": "string-list"})
    ts.declare(PARSE_EDGE, features={
        "label": "string", "source": "ref", "target": "ref"})
    ts.declare(PARSE_ROOT, features={"node": "ref"})
    ts.declare(FOCUS_TYPE, features={"patternId": "string", "nodes": "ref-list"})
    ts.declare(ANSWER_TYPE, features={
        "patternId": "string", "types": "string-list", "nodes": "ref-list"})
    ts.declare(RELATION_TYPE, features={"ruleId": "string"})
    return ts
