"""Question analysis: focus and lexical answer type.

The focus is the question segment the answer replaces; the answer type
is the semantic type the answer must have.  Both are found by rules over
the question's fact base.  Focus rules are tried one clause at a time in
file order — each is cut-terminated, so the first clause whose proof
succeeds wins and its position names the pattern that fired.  Answer-type
rules carry their pattern id as their third head argument and consume the
focus node list, so they run as one ordinary first-proof query.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources as importlib_resources
from typing import Dict, List, Optional, Sequence, Tuple

from .annotations import ANSWER_TYPE, Cas, FOCUS_TYPE
from .bridge import (
    NodeTable,
    OutputEntry,
    OutputSpec,
    ROOT_ATOM,
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
    Solution,
    solve,
    solve_first,
)
from .lexicon import LexicalResources, register_lexicon_predicates
from .terms import (
    Atom,
    Call,
    Clause,
    Compound,
    Term,
    Var,
    VarSource,
    list_elements,
    make_list,
)

FOCUS_KEY = ("focus", 2)
ANSWER_TYPE_KEY = ("answerType", 4)

# Pattern labels for the shipped focus rules, aligned with clause order in
# qparse_focus.pl.  User-supplied clauses beyond these get positional names.
SHIPPED_FOCUS_PATTERNS = ("WHAT_IS_X", "HOW_MANY_MUCH", "WHAT_NOUN", "WH_ADVERB")

OUTPUT_SPEC: OutputSpec = {
    FOCUS_KEY: OutputEntry(FOCUS_TYPE, span_args=(1,),
                           features={1: ("nodes", "ref-list")}),
    ANSWER_TYPE_KEY: OutputEntry(ANSWER_TYPE, span_args=(1,),
                                 features={1: ("nodes", "ref-list"),
                                           2: ("patternId", "string"),
                                           3: ("types", "string-list")}),
}


def _resource_text(name: str) -> str:
    return importlib_resources.files("annolog").joinpath("resources", "rules", name) \
        .read_text(encoding="utf-8")


def shipped_focus_rules() -> SourceProgram:
    return parse_program(_resource_text("qparse_focus.pl"))


def shipped_answer_type_rules() -> SourceProgram:
    return parse_program(_resource_text("qparse_atype.pl"))


@dataclass(frozen=True)
class FocusResult:
    pattern_id: str
    nodes: Tuple[str, ...]  # node atoms


@dataclass(frozen=True)
class AnswerTypeResult:
    pattern_id: str
    types: Tuple[str, ...]


@dataclass(frozen=True)
class QuestionAnalysis:
    focus: Optional[FocusResult]
    answer_type: Optional[AnswerTypeResult]


def _split_focus_clauses(rules: SourceProgram) -> Tuple[List[Clause], List[Clause]]:
    focus_clauses = [c for c in rules.clauses if c.key == FOCUS_KEY]
    other_clauses = [c for c in rules.clauses if c.key != FOCUS_KEY]
    return focus_clauses, other_clauses


def focus_pattern_ids(rules: SourceProgram,
                      pattern_ids: Optional[Sequence[str]] = None) -> List[str]:
    focus_clauses, _ = _split_focus_clauses(rules)
    ids = list(pattern_ids or SHIPPED_FOCUS_PATTERNS)
    while len(ids) < len(focus_clauses):
        ids.append(f"focus:{len(ids) + 1}")
    return ids[:len(focus_clauses)]


def _assemble_kb(facts: Sequence[Clause], rule_clauses: Sequence[Clause],
                 declarations: Sequence[Tuple[str, int]] = ()) -> KnowledgeBase:
    kb = KnowledgeBase()
    declare_fact_schema(kb)
    for functor, arity in declarations:
        kb.declare(functor, arity)
    kb.assert_clauses(list(facts))
    kb.assert_clauses(list(rule_clauses), provenance="static")
    return kb


def _focus_query() -> Tuple[Call, Var, Var]:
    source = VarSource()
    root = source.fresh("Root")
    nodes = source.fresh("Focus")
    query = Call(Compound("focus", (root, nodes)))
    return query, root, nodes


def detect_focus(facts: Sequence[Clause], rules: SourceProgram,
                 registry: ExternalRegistry, config: SolveConfig = DEFAULT_CONFIG,
                 pattern_ids: Optional[Sequence[str]] = None,
                 declarations: Sequence[Tuple[str, int]] = ()) -> Optional[FocusResult]:
    """First focus proof over the question's facts, or None.

    Clauses are tried one at a time in file order, so the returned pattern
    id names the clause that fired.  Focus clauses must not call focus/2
    themselves (the shipped patterns never do).
    """
    focus_clauses, other_clauses = _split_focus_clauses(rules)
    ids = focus_pattern_ids(rules, pattern_ids)
    for clause, pattern_id in zip(focus_clauses, ids):
        kb = _assemble_kb(facts, other_clauses + [clause], declarations)
        query, root, nodes = _focus_query()
        goals = (Call(Compound("questionRoot", (root,))), query)
        solution = solve_first(kb, registry, goals, config)
        if solution is None:
            continue
        elements, _ = list_elements(solution[nodes.name])
        atoms = tuple(e.text for e in elements if isinstance(e, Atom))
        return FocusResult(pattern_id, atoms)
    return None


def detect_answer_type(facts: Sequence[Clause], rules: SourceProgram,
                       registry: ExternalRegistry, focus_nodes: Sequence[str],
                       config: SolveConfig = DEFAULT_CONFIG,
                       declarations: Sequence[Tuple[str, int]] = ()) -> Optional[AnswerTypeResult]:
    """First answerType proof given the focus node list, or None."""
    kb = _assemble_kb(facts, rules.clauses, declarations)
    source = VarSource()
    root = source.fresh("Root")
    pattern = source.fresh("Pattern")
    types = source.fresh("Types")
    focus_list = _node_list(focus_nodes)
    goals = (
        Call(Compound("questionRoot", (root,))),
        Call(Compound("answerType", (root, focus_list, pattern, types))),
    )
    solution = solve_first(kb, registry, goals, config)
    if solution is None:
        return None
    pattern_term = solution[pattern.name]
    elements, _ = list_elements(solution[types.name])
    return AnswerTypeResult(
        pattern_term.text if isinstance(pattern_term, Atom) else str(pattern_term),
        tuple(e.text for e in elements if isinstance(e, Atom)))


def _node_list(atoms: Sequence[str]) -> Term:
    return make_list([Atom(a) for a in atoms])


def analyze_question(facts: Sequence[Clause], focus_rules: SourceProgram,
                     answer_type_rules: SourceProgram, registry: ExternalRegistry,
                     config: SolveConfig = DEFAULT_CONFIG,
                     focus_pattern_names: Optional[Sequence[str]] = None,
                     declarations: Sequence[Tuple[str, int]] = ()) -> QuestionAnalysis:
    focus = detect_focus(facts, focus_rules, registry, config,
                         focus_pattern_names, declarations)
    if focus is None:
        return QuestionAnalysis(None, None)
    answer_type = detect_answer_type(facts, answer_type_rules, registry,
                                     focus.nodes, config, declarations)
    return QuestionAnalysis(focus, answer_type)


class QuestionAnnotator:
    """Runs focus and answer-type detection over a document and writes the
    results back as annotations."""

    def __init__(self, resources: LexicalResources,
                 focus_rules: Optional[SourceProgram] = None,
                 answer_type_rules: Optional[SourceProgram] = None,
                 config: SolveConfig = DEFAULT_CONFIG,
                 focus_pattern_names: Optional[Sequence[str]] = None,
                 input_predicates: Sequence[str] = ()) -> None:
        self.resources = resources
        self.focus_rules = focus_rules or shipped_focus_rules()
        self.answer_type_rules = answer_type_rules or shipped_answer_type_rules()
        self.config = config
        self.focus_pattern_names = focus_pattern_names
        self.input_predicates = tuple(input_predicates)
        self.registry = register_lexicon_predicates(ExternalRegistry(), resources)

    def process(self, cas: Cas, extra_facts: Sequence[Clause] = ()) -> List[str]:
        """Annotate ``cas`` in place; returns diagnostics (empty on success)."""
        table = node_table(cas)
        facts = list(cas_to_facts(cas, table)) + list(extra_facts)
        analysis = analyze_question(facts, self.focus_rules, self.answer_type_rules,
                                    self.registry, self.config,
                                    self.focus_pattern_names,
                                    input_predicate_keys(self.input_predicates))
        if analysis.focus is None:
            return ["no-pattern"]

        focus_list = _node_list(analysis.focus.nodes)
        bindings_to_annotations(
            cas, OUTPUT_SPEC, FOCUS_KEY, [(ROOT_ATOM, focus_list)], table,
            extra_features={"patternId": analysis.focus.pattern_id})
        if analysis.answer_type is not None:
            types_list = _node_list(analysis.answer_type.types)
            bindings_to_annotations(
                cas, OUTPUT_SPEC, ANSWER_TYPE_KEY,
                [(ROOT_ATOM, focus_list, Atom(analysis.answer_type.pattern_id), types_list)],
                table)
        return []


def annotate_question(cas: Cas, resources: LexicalResources,
                      config: SolveConfig = DEFAULT_CONFIG,
                      report: Optional[List[str]] = None) -> Cas:
    """Full question analysis over ``cas`` with the shipped rules.  When no
    pattern matches, nothing is written and a "no-pattern" diagnostic is
    appended to ``report`` (when given)."""
    diagnostics = QuestionAnnotator(resources, config=config).process(cas)
    if report is not None:
        report.extend(diagnostics)
    return cas
