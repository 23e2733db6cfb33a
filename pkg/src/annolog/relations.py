"""Shallow semantic relation extraction.

Relation rules (castOf and friends) are cut-free, so unlike question
analysis every solution is wanted: each declared relation predicate is
enumerated exhaustively, results are deduplicated structurally, and each
one remembers the clause that derived it.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources as importlib_resources
from typing import Dict, List, Optional, Sequence, Tuple

from .annotations import Cas
from .bridge import (
    NodeTable,
    OutputSpec,
    bindings_to_annotations,
    cas_to_facts,
    declare_fact_schema,
    input_predicate_keys,
    node_table,
)
from .dsl import SourceProgram, parse_program
from .engine import (
    DEFAULT_CONFIG,
    ExternalRegistry,
    KnowledgeBase,
    SolveConfig,
    solve,
)
from .lexicon import LexicalResources, register_lexicon_predicates
from .terms import Call, Clause, Compound, Term, VarSource


def shipped_relation_rules() -> SourceProgram:
    text = importlib_resources.files("annolog").joinpath(
        "resources", "rules", "relations.pl").read_text(encoding="utf-8")
    return parse_program(text)


@dataclass(frozen=True)
class RelationResult:
    """One derived relation instance."""

    name: str
    arguments: Tuple[Term, ...]
    rule_id: str


def _clauses_for_predicate(rules: SourceProgram, key: Tuple[str, int]) -> List[Clause]:
    return [c for c in rules.clauses if c.key == key]


def extract_relations(facts: Sequence[Clause], rules: SourceProgram,
                      registry: ExternalRegistry, output_spec: OutputSpec,
                      config: SolveConfig = DEFAULT_CONFIG,
                      declarations: Sequence[Tuple[str, int]] = ()) -> List[RelationResult]:
    """All solutions of every relation predicate declared in ``output_spec``,
    in derivation order, structurally deduplicated.

    Clauses are enumerated one at a time (the rules are cut-free, so the
    union over clauses in order equals a whole-program enumeration), which
    lets each result carry the id of the clause that derived it.
    """
    results: List[RelationResult] = []
    for key in output_spec:
        functor, arity = key
        clauses = _clauses_for_predicate(rules, key)
        other_clauses = [c for c in rules.clauses if c.key != key]
        seen = set()
        for index, clause in enumerate(clauses, start=1):
            kb = KnowledgeBase()
            declare_fact_schema(kb)
            for decl_functor, decl_arity in declarations:
                kb.declare(decl_functor, decl_arity)
            kb.assert_clauses(list(facts))
            kb.assert_clauses(other_clauses + [clause], provenance="static")
            source = VarSource()
            variables = tuple(source.fresh(f"A{i}") for i in range(arity))
            query = Call(Compound(functor, variables))
            rule_id = f"{functor}/{arity}:{index}"
            for solution in solve(kb, registry, (query,), config):
                arguments = tuple(solution[v.name] for v in variables)
                if arguments in seen:
                    continue
                seen.add(arguments)
                results.append(RelationResult(functor, arguments, rule_id))
    return results


class RelationAnnotator:
    """Enumerates relation rules over a document and writes each derived
    relation back as an annotation spanning its argument nodes."""

    def __init__(self, output_spec: OutputSpec,
                 rules: Optional[SourceProgram] = None,
                 resources: Optional[LexicalResources] = None,
                 config: SolveConfig = DEFAULT_CONFIG,
                 input_predicates: Sequence[str] = ()) -> None:
        self.output_spec = output_spec
        self.rules = rules or shipped_relation_rules()
        self.config = config
        self.input_predicates = tuple(input_predicates)
        self.registry = ExternalRegistry()
        if resources is not None:
            register_lexicon_predicates(self.registry, resources)

    def process(self, cas: Cas, extra_facts: Sequence[Clause] = ()) -> List[str]:
        """Annotate ``cas`` in place; returns diagnostics (empty on success)."""
        table = node_table(cas)
        facts = list(cas_to_facts(cas, table)) + list(extra_facts)
        derived = extract_relations(facts, self.rules, self.registry,
                                    self.output_spec, self.config,
                                    input_predicate_keys(self.input_predicates))
        by_predicate: Dict[Tuple[str, int], List[RelationResult]] = {}
        for result in derived:
            by_predicate.setdefault((result.name, len(result.arguments)), []).append(result)
        for key, group in by_predicate.items():
            for result in group:
                bindings_to_annotations(
                    cas, self.output_spec, key, [result.arguments], table,
                    extra_features={"ruleId": result.rule_id})
        return []
