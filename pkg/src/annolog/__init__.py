"""Rule-based annotation over parsed text.

Documents carry typed, span-bearing annotations; annotations are
flattened into ground facts; Horn-clause rules are solved by top-down
resolution; and the solutions flow back into the annotation store.
Shipped on top of that core: question focus / answer-type detection,
shallow relation extraction, and an evaluation harness.
"""

from .annotations import Annotation, Cas, TypeSystem, default_type_system
from .bridge import (
    NodeTable,
    OutputEntry,
    OutputSpec,
    bindings_to_annotations,
    cas_to_facts,
    fact_base,
    node_table,
)
from .dsl import ParseError, SourceProgram, format_clause, format_term, parse_program, parse_query
from .engine import (
    ExternalRegistry,
    KnowledgeBase,
    ResourceExhaustedError,
    SolveConfig,
    Solution,
    UnknownPredicateError,
    solve,
    solve_first,
)
from .evaluation import EvalReport, Verdict, classify_prediction, evaluate, score
from .lexicon import (
    LexicalResources,
    MiniWordNet,
    TypeTaxonomy,
    load_lexicon,
    load_taxonomy,
    register_lexicon_predicates,
)
from .pipeline import PipelineConfig, load_document, load_pipeline_config, run_pipeline
from .qparse import (
    QuestionAnalysis,
    QuestionAnnotator,
    annotate_question,
    detect_answer_type,
    detect_focus,
)
from .relations import RelationAnnotator, RelationResult, extract_relations
from .terms import (
    Atom,
    Call,
    Clause,
    Compound,
    Cut,
    Goal,
    Integer,
    Negation,
    Substitution,
    Term,
    Var,
    VarSource,
    make_list,
    list_elements,
    rename_apart,
    unify,
)

__version__ = "0.1.0"
