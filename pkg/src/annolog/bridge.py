"""Translation between annotation stores and ground fact bases.

The forward direction flattens a document's parse annotations into a
fixed predicate vocabulary:

    node/1          node id, an atom n<k> assigned in span order
    span/3          node, begin, end
    coveredText/2   node, surface string
    lemmaForm/2     node, lemma
    pennTag/2       node, Penn Treebank tag
    semanticType/2  node, dotted type name (one fact per type)
    subj/2 pred/2 modifier/2 objprep/2 whadv/2
                    dependency edges, first argument the governor
    child/2         parse-tree edge
    questionRoot/1  the virtual root atom

Rules navigate the tree from a virtual root: ``questionRoot(root)`` plus
one bridge-generated ``child(root, <head>)`` edge sit above the parse
head, so walking descendants of the root reaches every node including
the head itself.

The reverse direction maps solved output terms back into annotations via
an :class:`OutputSpec` describing which argument positions carry the span
and which become features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .annotations import (
    ANSWER_TYPE,
    Annotation,
    Cas,
    FOCUS_TYPE,
    PARSE_EDGE,
    PARSE_NODE,
    PARSE_ROOT,
)
from .engine import KnowledgeBase
from .errors import AnnologError
from .terms import (
    Atom,
    Clause,
    Compound,
    Integer,
    Term,
    Var,
    is_proper_list,
    list_elements,
    make_list,
    term_variables,
)


class SchemaViolationError(AnnologError):
    pass


class UngroundOutputError(AnnologError):
    pass


class UnknownNodeError(AnnologError):
    def __init__(self, atom: str) -> None:
        super().__init__(f"{atom!r} is not a node of this document")
        self.atom = atom


ROOT_ATOM = Atom("root")

EDGE_PREDICATES = ("subj", "pred", "modifier", "objprep", "whadv", "child")

# The complete fact vocabulary; every predicate is declared on the
# knowledge base so that rules probing an absent edge type fail instead
# of raising an unknown-predicate error.
FACT_SCHEMA: Tuple[Tuple[str, int], ...] = (
    ("node", 1), ("span", 3), ("coveredText", 2), ("lemmaForm", 2),
    ("pennTag", 2), ("semanticType", 2), ("subj", 2), ("pred", 2),
    ("modifier", 2), ("objprep", 2), ("whadv", 2), ("child", 2),
    ("questionRoot", 1),
)


class NodeTable:
    """The per-document bijection between node atoms and annotation ids."""

    def __init__(self, nodes: Sequence[Annotation]) -> None:
        self._atom_by_id: Dict[int, str] = {}
        self._annotation_by_atom: Dict[str, Annotation] = {}
        for index, annotation in enumerate(nodes, start=1):
            atom = f"n{index}"
            self._atom_by_id[annotation.id] = atom
            self._annotation_by_atom[atom] = annotation

    def __len__(self) -> int:
        return len(self._annotation_by_atom)

    def atom_for(self, annotation_id: int) -> str:
        return self._atom_by_id[annotation_id]

    def has_atom(self, atom: str) -> bool:
        return atom in self._annotation_by_atom

    def annotation_for(self, atom: str) -> Annotation:
        try:
            return self._annotation_by_atom[atom]
        except KeyError:
            raise UnknownNodeError(atom) from None

    def atoms(self) -> List[str]:
        return list(self._annotation_by_atom)


def node_table(cas: Cas) -> NodeTable:
    """Node atoms n1..nk over the document's parse nodes, in span order."""
    return NodeTable(cas.annotations_of_type(PARSE_NODE))


def _fact(functor: str, *args: Term) -> Clause:
    return Clause(Compound(functor, tuple(args)))


def cas_to_facts(cas: Cas, table: Optional[NodeTable] = None) -> List[Clause]:
    """Flatten ``cas`` into ground facts, deterministically ordered:
    node/1 facts in span order, per-node attributes, edges in input order,
    then the virtual root."""
    table = table or node_table(cas)
    nodes = cas.annotations_of_type(PARSE_NODE)
    facts: List[Clause] = []

    for annotation in nodes:
        facts.append(_fact("node", Atom(table.atom_for(annotation.id))))

    for annotation in nodes:
        atom = Atom(table.atom_for(annotation.id))
        facts.append(_fact("span", atom, Integer(annotation.begin), Integer(annotation.end)))
        facts.append(_fact("coveredText", atom, Atom(cas.covered_text(annotation))))
        facts.append(_fact("lemmaForm", atom, Atom(annotation.features.get("lemma", ""))))
        facts.append(_fact("pennTag", atom, Atom(annotation.features.get("pennTag", ""))))
        for semantic_type in annotation.features.get("semanticTypes", []):
            facts.append(_fact("semanticType", atom, Atom(semantic_type)))

    edges = sorted(cas.annotations_of_type(PARSE_EDGE), key=lambda a: a.id)
    for edge in edges:
        label = edge.features.get("label")
        if label not in EDGE_PREDICATES:
            raise SchemaViolationError(f"unknown edge label {label!r}")
        source = edge.features.get("source")
        target = edge.features.get("target")
        for endpoint in (source, target):
            if endpoint not in table._atom_by_id:
                raise SchemaViolationError(
                    f"edge {label!r} references missing node annotation {endpoint!r}")
        facts.append(_fact(label, Atom(table.atom_for(source)),
                           Atom(table.atom_for(target))))

    roots = cas.annotations_of_type(PARSE_ROOT)
    if len(roots) > 1:
        raise SchemaViolationError("more than one parse root annotation")
    if roots:
        head = roots[0].features.get("node")
        if head not in table._atom_by_id:
            raise SchemaViolationError(f"root references missing node annotation {head!r}")
        facts.append(_fact("child", ROOT_ATOM, Atom(table.atom_for(head))))
    facts.append(_fact("questionRoot", ROOT_ATOM))
    return facts


def declare_fact_schema(kb: KnowledgeBase) -> KnowledgeBase:
    for functor, arity in FACT_SCHEMA:
        kb.declare(functor, arity)
    return kb


def fact_base(cas: Cas, table: Optional[NodeTable] = None,
              extra_facts: Sequence[Clause] = ()) -> KnowledgeBase:
    """A fresh knowledge base holding the document's facts plus the base
    library, with the whole fact schema declared."""
    kb = KnowledgeBase()
    declare_fact_schema(kb)
    kb.assert_clauses(cas_to_facts(cas, table))
    if extra_facts:
        kb.assert_clauses(list(extra_facts))
    return kb


# -- write-back ---------------------------------------------------------------


@dataclass(frozen=True)
class OutputEntry:
    """How one output predicate becomes annotations.

    ``span_args`` are argument positions holding a node atom or a list of
    node atoms; the annotation covers their combined extent.  ``features``
    maps argument positions to (feature name, kind) with kind one of
    "string", "string-list", "ref" or "ref-list".
    """

    type_name: str
    span_args: Tuple[int, ...]
    features: Dict[int, Tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.span_args:
            raise ValueError(f"output entry for {self.type_name} declares no span source")


OutputSpec = Dict[Tuple[str, int], OutputEntry]


def _ensure_ground(term: Term, what: str) -> None:
    for var in term_variables(term):
        raise UngroundOutputError(f"{what} contains the unbound variable {var.name}")


def _node_atoms(term: Term) -> List[str]:
    """Node atoms named by ``term``: either a single atom or a proper list."""
    if isinstance(term, Atom):
        return [term.text]
    if is_proper_list(term):
        elements, _ = list_elements(term)
        atoms = []
        for element in elements:
            if not isinstance(element, Atom):
                raise UngroundOutputError(f"expected a node atom, got {element!r}")
            atoms.append(element.text)
        return atoms
    raise UngroundOutputError(f"expected a node atom or node list, got {term!r}")


def _feature_value(term: Term, kind: str, table: NodeTable):
    if kind == "string":
        if isinstance(term, Atom):
            return term.text
        if isinstance(term, Integer):
            return str(term.value)
        raise UngroundOutputError(f"expected an atom for a string feature, got {term!r}")
    if kind == "string-list":
        elements, tail = list_elements(term)
        if not is_proper_list(term):
            raise UngroundOutputError(f"expected a proper list, got {term!r}")
        return [_feature_value(e, "string", table) for e in elements]
    if kind == "ref":
        return table.annotation_for(_node_atoms(term)[0]).id
    if kind == "ref-list":
        return [table.annotation_for(a).id for a in _node_atoms(term)]
    raise ValueError(f"unknown feature kind {kind!r}")


def bindings_to_annotations(cas: Cas, spec: OutputSpec, pred: Tuple[str, int],
                            solutions: Sequence[Tuple[Term, ...]],
                            table: Optional[NodeTable] = None,
                            extra_features: Optional[Dict[str, object]] = None) -> List[int]:
    """Write one annotation per structurally distinct solution.

    ``solutions`` are the call's argument tuples, fully dereferenced.  The
    span covers the node(s) named by the entry's span arguments; features
    are filled per the entry, with ``extra_features`` merged into each.
    """
    entry = spec[pred]
    table = table or node_table(cas)
    functor, arity = pred
    for index in list(entry.span_args) + list(entry.features):
        if not 0 <= index < arity:
            raise ValueError(f"output entry for {functor}/{arity} names argument {index}")

    created: List[int] = []
    seen: Set[Tuple[Term, ...]] = set()
    for solution in solutions:
        if len(solution) != arity:
            raise ValueError(f"solution arity mismatch for {functor}/{arity}")
        if solution in seen:
            continue
        seen.add(solution)

        span_annotations: List[Annotation] = []
        for index in entry.span_args:
            _ensure_ground(solution[index], f"{functor}/{arity} argument {index}")
            for atom in _node_atoms(solution[index]):
                span_annotations.append(table.annotation_for(atom))
        if not span_annotations:
            raise UngroundOutputError(
                f"{functor}/{arity} solution names no nodes to span")
        begin = min(a.begin for a in span_annotations)
        end = max(a.end for a in span_annotations)

        features: Dict[str, object] = dict(extra_features or {})
        for index, (feature, kind) in entry.features.items():
            _ensure_ground(solution[index], f"{functor}/{arity} argument {index}")
            features[feature] = _feature_value(solution[index], kind, table)

        created.append(cas.add_annotation(entry.type_name, begin, end, features))
    return created


# -- facts from earlier annotators --------------------------------------------

# Annotation types that are pipeline input rather than annotator output.
_INPUT_TYPES = {PARSE_NODE, PARSE_EDGE, PARSE_ROOT}


def facts_from_annotations(cas: Cas, table: NodeTable,
                           input_predicates: Sequence[str]) -> List[Clause]:
    """Re-translate earlier annotators' output into facts.

    Supported declarations: "focus" (qa.Focus annotations as focus/2
    facts), "answerType" (qa.AnswerType as answerType/4 facts) and
    "semanticType" (any derived annotation whose span matches a parse
    node adds a semanticType/2 fact naming the annotation type).
    """
    facts: List[Clause] = []
    for predicate in input_predicates:
        if predicate == "focus":
            for annotation in sorted(cas.annotations_of_type(FOCUS_TYPE), key=lambda a: a.id):
                nodes = [Atom(table.atom_for(ref))
                         for ref in annotation.features.get("nodes", [])]
                facts.append(_fact("focus", ROOT_ATOM, make_list(nodes)))
        elif predicate == "answerType":
            for annotation in sorted(cas.annotations_of_type(ANSWER_TYPE), key=lambda a: a.id):
                nodes = [Atom(table.atom_for(ref))
                         for ref in annotation.features.get("nodes", [])]
                types = [Atom(t) for t in annotation.features.get("types", [])]
                facts.append(_fact(
                    "answerType", ROOT_ATOM, make_list(nodes),
                    Atom(annotation.features.get("patternId", "")), make_list(types)))
        elif predicate == "semanticType":
            spans = {}
            for node in cas.annotations_of_type(PARSE_NODE):
                spans.setdefault(node.span, []).append(node)
            for annotation in sorted(cas.annotations(), key=lambda a: a.id):
                if annotation.type in _INPUT_TYPES:
                    continue
                for node in spans.get(annotation.span, []):
                    facts.append(_fact("semanticType",
                                       Atom(table.atom_for(node.id)),
                                       Atom(annotation.type)))
        else:
            raise SchemaViolationError(
                f"unsupported input predicate declaration {predicate!r}")
    return facts


def input_predicate_keys(input_predicates: Sequence[str]) -> List[Tuple[str, int]]:
    """(functor, arity) declarations for input predicates, so that rules can
    probe them even when no earlier annotator produced matching facts.
    semanticType/2 is already part of the schema."""
    keys: List[Tuple[str, int]] = []
    for predicate in input_predicates:
        if predicate == "focus":
            keys.append(("focus", 2))
        elif predicate == "answerType":
            keys.append(("answerType", 4))
    return keys
