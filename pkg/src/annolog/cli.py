"""Command-line surface.

Three subcommands:

* ``annolog run --pipeline cfg.json --input dir-or-file --output dir``
  runs the configured annotators over every document and writes one
  output JSON per input.
* ``annolog query [--doc doc.json] [--rules file.pl ...] [--lexicon dir] "goal"``
  prints each solution's bindings, one per line, then "no." or
  "N solutions.".
* ``annolog eval --pred pred.json --gold gold.json --taxonomy tax.tsv [--json]``
  prints the verdict table (or machine-readable JSON).

Exit codes: 1 usage, 2 schema/resource problems, 3 rule-load failures,
4 runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence

from .annotations import Cas, default_type_system
from .bridge import (
    SchemaViolationError,
    UngroundOutputError,
    UnknownNodeError,
    declare_fact_schema,
    fact_base,
)
from .dsl import ParseError, format_term, parse_program, parse_query
from .engine import (
    ExternalRegistry,
    KnowledgeBase,
    ResourceExhaustedError,
    UnknownPredicateError,
    solve,
)
from .errors import AnnologError
from .evaluation import (
    EmptyGoldError,
    IdMismatchError,
    evaluate,
    format_report,
)
from .lexicon import LexiconError, load_lexicon, load_taxonomy, register_lexicon_predicates
from .pipeline import (
    PipelineConfigError,
    SchemaError,
    dump_document,
    load_document,
    load_pipeline_config,
    output_document,
    run_pipeline,
)

EXIT_USAGE = 1
EXIT_SCHEMA = 2
EXIT_RULES = 3
EXIT_RUNTIME = 4


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="annolog",
                             description="Rule-based annotation over parsed text.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a pipeline over documents")
    run.add_argument("--pipeline", required=True, help="pipeline config JSON")
    run.add_argument("--input", required=True, help="document file or directory")
    run.add_argument("--output", required=True, help="output directory")

    query = sub.add_parser("query", help="solve a goal over a document and rules")
    query.add_argument("goal", help="goal sequence, e.g. 'focus(R, F)'")
    query.add_argument("--doc", help="document JSON providing facts")
    query.add_argument("--rules", action="append", default=[],
                       help="rule file (repeatable)")
    query.add_argument("--lexicon", help="lexicon directory")

    evaluate_cmd = sub.add_parser("eval", help="score predictions against gold")
    evaluate_cmd.add_argument("--pred", required=True, help="predictions JSON")
    evaluate_cmd.add_argument("--gold", required=True, help="gold JSON")
    evaluate_cmd.add_argument("--taxonomy", required=True, help="taxonomy TSV")
    evaluate_cmd.add_argument("--json", action="store_true",
                              help="print the report as JSON")
    return parser


def _input_paths(input_arg: str) -> List[str]:
    if os.path.isdir(input_arg):
        names = sorted(n for n in os.listdir(input_arg) if n.endswith(".json"))
        if not names:
            raise CliError(f"no .json documents in {input_arg}", EXIT_SCHEMA)
        return [os.path.join(input_arg, n) for n in names]
    if not os.path.exists(input_arg):
        raise CliError(f"no such input: {input_arg}", EXIT_SCHEMA)
    return [input_arg]


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_pipeline_config(args.pipeline)
    paths = _input_paths(args.input)
    raws = []
    documents: List[Cas] = []
    for path in paths:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        raws.append(raw)
        documents.append(load_document(path))
    annotated, report = run_pipeline(config, documents)
    os.makedirs(args.output, exist_ok=True)
    for path, raw, cas in zip(paths, raws, annotated):
        out_path = os.path.join(args.output, os.path.basename(path))
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(dump_document(output_document(raw, cas)))
    print(report.summary())
    if any(doc.error for doc in report.documents):
        return EXIT_RUNTIME
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    goals = parse_query(args.goal)

    kb = KnowledgeBase()
    registry = ExternalRegistry()
    if args.doc:
        document = load_document(args.doc)
        kb = fact_base(document)
    else:
        declare_fact_schema(kb)
    for rule_path in args.rules:
        try:
            with open(rule_path, encoding="utf-8") as handle:
                program = parse_program(handle.read())
        except FileNotFoundError:
            raise CliError(f"rule file not found: {rule_path}", EXIT_RULES) from None
        except ParseError as exc:
            raise CliError(f"rule file {rule_path}: {exc}", EXIT_RULES) from exc
        kb.assert_clauses(program.clauses, provenance="static")
    if args.lexicon:
        register_lexicon_predicates(registry, load_lexicon(args.lexicon))

    count = 0
    for solution in solve(kb, registry, goals):
        count += 1
        if solution.bindings:
            line = ", ".join(f"{name} = {format_term(term)}"
                             for name, term in solution.bindings.items())
        else:
            line = "true"
        print(line)
    if count == 0:
        print("no.")
    else:
        print(f"{count} solutions.")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    taxonomy = load_taxonomy(args.taxonomy)
    report = evaluate(args.pred, args.gold, taxonomy)
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    else:
        print(format_report(report))
    return 0


_SCHEMA_ERRORS = (SchemaError, SchemaViolationError, LexiconError,
                  IdMismatchError, EmptyGoldError)
_RULE_ERRORS = (ParseError, PipelineConfigError)
_RUNTIME_ERRORS = (ResourceExhaustedError, UnknownPredicateError,
                   UngroundOutputError, UnknownNodeError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "query":
            return _cmd_query(args)
        return _cmd_eval(args)
    except CliError as exc:
        print(f"annolog: {exc}", file=sys.stderr)
        return exc.code
    except _RULE_ERRORS as exc:
        print(f"annolog: {exc}", file=sys.stderr)
        return EXIT_RULES
    except _SCHEMA_ERRORS as exc:
        print(f"annolog: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except _RUNTIME_ERRORS as exc:
        print(f"annolog: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except AnnologError as exc:
        print(f"annolog: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
