"""Document I/O, pipeline configuration and the workflow runner.

Documents are one JSON object per file:

    {"id": str, "text": str, "root": int,
     "nodes": [{"id": int, "begin": int, "end": int, "lemma": str,
                "pennTag": str, "semanticTypes": [str]}],
     "edges": [{"type": "subj"|"pred"|"modifier"|"objprep"|"whadv"|"child",
                "from": int, "to": int}]}

Output documents add ``"annotations": [{"type", "begin", "end",
"features"}]`` holding everything the annotators derived.

A pipeline is an ordered list of annotators; each sees a fresh fact base
built from the document plus facts re-translated from earlier annotators'
output (per its declared input predicates).  Documents are independent:
an error aborts only the document it occurred on.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .annotations import (
    Cas,
    PARSE_EDGE,
    PARSE_NODE,
    PARSE_ROOT,
    RELATION_TYPE,
    TypeSystem,
    default_type_system,
)
from .bridge import (
    EDGE_PREDICATES,
    OutputEntry,
    OutputSpec,
    facts_from_annotations,
    node_table,
)
from .dsl import ParseError, SourceProgram, parse_program
from .engine import DEFAULT_CONFIG, SolveConfig
from .errors import AnnologError
from .lexicon import LexicalResources, load_lexicon
from .qparse import QuestionAnnotator
from .relations import RelationAnnotator


class SchemaError(AnnologError):
    """A document or configuration file does not match its schema; the
    message carries a JSON-path to the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{message} at {path}")
        self.path = path


class PipelineConfigError(AnnologError):
    pass


BUILTIN_PREFIX = "builtin:"


def builtin_resource_path(*parts: str) -> str:
    return str(importlib_resources.files("annolog").joinpath("resources", *parts))


def builtin_lexicon_dir() -> str:
    return builtin_resource_path("lexicon")


def builtin_fixture_dir(*parts: str) -> str:
    return builtin_resource_path("fixtures", *parts)


def _resolve_path(path: str, base_dir: Optional[str]) -> str:
    if path.startswith(BUILTIN_PREFIX):
        return builtin_resource_path("rules", path[len(BUILTIN_PREFIX):])
    if os.path.isabs(path) or base_dir is None:
        return path
    return os.path.join(base_dir, path)


# -- document loading ----------------------------------------------------------


def _require(data: dict, key: str, kind, path: str):
    if key not in data:
        raise SchemaError(f"{path}.{key}", "missing required field")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__}")
    return value


def document_from_dict(data: dict, type_system: Optional[TypeSystem] = None) -> Cas:
    """Build a Cas from a parsed document object; raises SchemaError with a
    field path on the first violation."""
    if not isinstance(data, dict):
        raise SchemaError("$", "expected a JSON object")
    doc_id = _require(data, "id", str, "$")
    text = _require(data, "text", str, "$")
    root = _require(data, "root", int, "$")
    nodes = _require(data, "nodes", list, "$")
    edges = data.get("edges", [])
    if not isinstance(edges, list):
        raise SchemaError("$.edges", "expected list")

    cas = Cas(text, view=doc_id, type_system=type_system or default_type_system())
    annotation_ids: Dict[int, int] = {}
    for index, node in enumerate(nodes):
        path = f"$.nodes[{index}]"
        if not isinstance(node, dict):
            raise SchemaError(path, "expected a JSON object")
        node_id = _require(node, "id", int, path)
        begin = _require(node, "begin", int, path)
        end = _require(node, "end", int, path)
        lemma = _require(node, "lemma", str, path)
        penn_tag = _require(node, "pennTag", str, path)
        semantic_types = node.get("semanticTypes", [])
        if not isinstance(semantic_types, list) or \
                not all(isinstance(t, str) for t in semantic_types):
            raise SchemaError(f"{path}.semanticTypes", "expected a list of strings")
        if node_id in annotation_ids:
            raise SchemaError(f"{path}.id", f"duplicate node id {node_id}")
        if not 0 <= begin <= end <= len(text):
            raise SchemaError(f"{path}.begin", f"span [{begin}, {end}) out of range")
        annotation_ids[node_id] = cas.add_annotation(
            PARSE_NODE, begin, end,
            {"lemma": lemma, "pennTag": penn_tag, "semanticTypes": list(semantic_types)})

    for index, edge in enumerate(edges):
        path = f"$.edges[{index}]"
        if not isinstance(edge, dict):
            raise SchemaError(path, "expected a JSON object")
        label = _require(edge, "type", str, path)
        if label not in EDGE_PREDICATES:
            raise SchemaError(f"{path}.type", f"unknown edge type {label!r}")
        source = _require(edge, "from", int, path)
        target = _require(edge, "to", int, path)
        for key, endpoint in (("from", source), ("to", target)):
            if endpoint not in annotation_ids:
                raise SchemaError(f"{path}.{key}", f"unknown node id {endpoint}")
        node_annotations = [cas.get(annotation_ids[source]), cas.get(annotation_ids[target])]
        begin = min(a.begin for a in node_annotations)
        end = max(a.end for a in node_annotations)
        cas.add_annotation(PARSE_EDGE, begin, end, {
            "label": label,
            "source": annotation_ids[source],
            "target": annotation_ids[target]})

    if nodes:
        if root not in annotation_ids:
            raise SchemaError("$.root", f"root {root} is not a node id")
        cas.add_annotation(PARSE_ROOT, 0, len(text), {"node": annotation_ids[root]})
    return cas


def load_document(path: str, type_system: Optional[TypeSystem] = None) -> Cas:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return document_from_dict(data, type_system)


_DERIVED_EXCLUDES = {PARSE_NODE, PARSE_EDGE, PARSE_ROOT}


def derived_annotations_to_dicts(cas: Cas) -> List[dict]:
    """The annotator-produced annotations (everything except parse input),
    in span order, as plain dicts."""
    out = []
    for annotation in cas.annotations():
        if annotation.type in _DERIVED_EXCLUDES:
            continue
        out.append({
            "type": annotation.type,
            "begin": annotation.begin,
            "end": annotation.end,
            "features": dict(annotation.features),
        })
    return out


def output_document(raw: dict, cas: Cas) -> dict:
    merged = dict(raw)
    merged["annotations"] = derived_annotations_to_dicts(cas)
    return merged


def dump_document(data: dict) -> str:
    """Serialize with fully stable formatting so repeated runs are
    byte-identical."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


# -- pipeline configuration ------------------------------------------------------


@dataclass
class AnnotatorEntry:
    name: str
    kind: str  # "qparse" | "relations"
    rule_paths: Tuple[str, ...]
    focus_rule_paths: Tuple[str, ...]
    atype_rule_paths: Tuple[str, ...]
    outputs: OutputSpec
    inputs: Tuple[str, ...]
    solver: SolveConfig


@dataclass
class PipelineConfig:
    annotators: List[AnnotatorEntry]
    lexicon_dir: str

    @property
    def names(self) -> List[str]:
        return [entry.name for entry in self.annotators]


def _parse_output_entry(raw: dict, path: str) -> Tuple[Tuple[str, int], OutputEntry]:
    predicate = _require(raw, "predicate", str, path)
    if "/" not in predicate:
        raise SchemaError(f"{path}.predicate", "expected functor/arity")
    functor, arity_text = predicate.rsplit("/", 1)
    try:
        arity = int(arity_text)
    except ValueError:
        raise SchemaError(f"{path}.predicate", "expected functor/arity") from None
    type_name = _require(raw, "type", str, path)
    span_args = _require(raw, "span_args", list, path)
    features_raw = raw.get("features", {})
    features: Dict[int, Tuple[str, str]] = {}
    for key, value in features_raw.items():
        if not (isinstance(value, list) and len(value) == 2):
            raise SchemaError(f"{path}.features.{key}", "expected [name, kind]")
        features[int(key)] = (value[0], value[1])
    return (functor, arity), OutputEntry(type_name, tuple(span_args), features)


def _as_paths(value: Union[str, List[str], None], base_dir: Optional[str],
              default: Tuple[str, ...]) -> Tuple[str, ...]:
    if value is None:
        return default
    if isinstance(value, str):
        value = [value]
    return tuple(_resolve_path(p, base_dir) for p in value)


def _solver_config(raw: Optional[dict], path: str) -> SolveConfig:
    if not raw:
        return DEFAULT_CONFIG
    try:
        return SolveConfig(
            max_resolution_steps=raw.get("max_resolution_steps",
                                         DEFAULT_CONFIG.max_resolution_steps),
            max_depth=raw.get("max_depth", DEFAULT_CONFIG.max_depth))
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"bad solver config: {exc}") from exc


def load_pipeline_config(path: str) -> PipelineConfig:
    """Load and validate a pipeline configuration; all rule files must
    exist and parse now, before any document runs."""
    base_dir = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from exc
    return pipeline_config_from_dict(data, base_dir)


def pipeline_config_from_dict(data: dict, base_dir: Optional[str] = None) -> PipelineConfig:
    if not isinstance(data, dict):
        raise SchemaError("$", "expected a JSON object")
    raw_annotators = _require(data, "annotators", list, "$")
    lexicon_value = data.get("lexicon", "builtin:")
    if lexicon_value == BUILTIN_PREFIX or lexicon_value == "builtin:lexicon":
        lexicon_dir = builtin_lexicon_dir()
    else:
        lexicon_dir = _resolve_path(lexicon_value, base_dir)

    entries: List[AnnotatorEntry] = []
    seen_names = set()
    for index, raw in enumerate(raw_annotators):
        path = f"$.annotators[{index}]"
        if not isinstance(raw, dict):
            raise SchemaError(path, "expected a JSON object")
        name = _require(raw, "name", str, path)
        kind = _require(raw, "kind", str, path)
        if kind not in ("qparse", "relations"):
            raise SchemaError(f"{path}.kind", f"unknown annotator kind {kind!r}")
        if name in seen_names:
            raise SchemaError(f"{path}.name", f"duplicate annotator name {name!r}")
        seen_names.add(name)

        outputs: OutputSpec = {}
        for out_index, raw_output in enumerate(raw.get("outputs", [])):
            key, entry = _parse_output_entry(raw_output, f"{path}.outputs[{out_index}]")
            outputs[key] = entry

        entries.append(AnnotatorEntry(
            name=name,
            kind=kind,
            rule_paths=_as_paths(raw.get("rules"), base_dir,
                                 (builtin_resource_path("rules", "relations.pl"),)),
            focus_rule_paths=_as_paths(raw.get("focus_rules"), base_dir,
                                       (builtin_resource_path("rules", "qparse_focus.pl"),)),
            atype_rule_paths=_as_paths(raw.get("atype_rules"), base_dir,
                                       (builtin_resource_path("rules", "qparse_atype.pl"),)),
            outputs=outputs,
            inputs=tuple(raw.get("inputs", [])),
            solver=_solver_config(raw.get("solver"), f"{path}.solver"),
        ))

    config = PipelineConfig(entries, lexicon_dir)
    _validate_rule_files(config)
    return config


def _load_rules(paths: Sequence[str]) -> SourceProgram:
    clauses = []
    positions = []
    for path in paths:
        try:
            with open(path, encoding="utf-8") as handle:
                program = parse_program(handle.read())
        except FileNotFoundError:
            raise PipelineConfigError(f"rule file not found: {path}") from None
        except ParseError as exc:
            raise PipelineConfigError(f"rule file {path} does not parse: {exc}") from exc
        clauses.extend(program.clauses)
        positions.extend(program.positions)
    return SourceProgram(tuple(clauses), tuple(positions))


def _validate_rule_files(config: PipelineConfig) -> None:
    for entry in config.annotators:
        if entry.kind == "relations":
            _load_rules(entry.rule_paths)
        else:
            _load_rules(entry.focus_rule_paths)
            _load_rules(entry.atype_rule_paths)


# -- running -------------------------------------------------------------------


@dataclass
class DocumentReport:
    doc_id: str
    annotation_counts: Dict[str, int] = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)
    error: Optional[str] = None


@dataclass
class RunReport:
    documents: List[DocumentReport] = field(default_factory=list)

    def merged(self) -> List[DocumentReport]:
        return sorted(self.documents, key=lambda d: d.doc_id)

    def summary(self) -> str:
        lines = []
        for doc in self.merged():
            if doc.error is not None:
                lines.append(f"{doc.doc_id}: ERROR {doc.error}")
                continue
            counts = ", ".join(f"{name}={count}"
                               for name, count in doc.annotation_counts.items())
            note = f" [{'; '.join(doc.diagnostics)}]" if doc.diagnostics else ""
            lines.append(f"{doc.doc_id}: {counts}{note}")
        return "\n".join(lines)


def _build_annotators(config: PipelineConfig, resources: LexicalResources) -> List[tuple]:
    annotators = []
    for entry in config.annotators:
        if entry.kind == "qparse":
            annotator = QuestionAnnotator(
                resources,
                focus_rules=_load_rules(entry.focus_rule_paths),
                answer_type_rules=_load_rules(entry.atype_rule_paths),
                config=entry.solver,
                input_predicates=entry.inputs)
        else:
            annotator = RelationAnnotator(
                entry.outputs,
                rules=_load_rules(entry.rule_paths),
                resources=resources,
                config=entry.solver,
                input_predicates=entry.inputs)
        annotators.append((entry, annotator))
    return annotators


def _ensure_output_types(cas: Cas, outputs: OutputSpec) -> None:
    for entry in outputs.values():
        if cas.type_system.has_type(entry.type_name):
            continue
        features = {feature: kind for feature, kind in entry.features.values()}
        if cas.type_system.has_type(RELATION_TYPE):
            # rel.Relation already declares ruleId; inherit it
            cas.type_system.declare(entry.type_name, supertype=RELATION_TYPE,
                                    features=features)
        else:
            features["ruleId"] = "string"
            cas.type_system.declare(entry.type_name, features=features)


def run_pipeline(config: PipelineConfig, documents: Sequence[Cas],
                 resources: Optional[LexicalResources] = None) -> Tuple[List[Cas], RunReport]:
    """Apply the configured annotators in order to each document.

    Each annotator sees a fresh fact base: the document's own facts plus
    facts re-translated from earlier annotators' output annotations, per
    its declared input predicates.  An annotator error aborts that
    document (recorded in the report); other documents proceed.
    """
    resources = resources or load_lexicon(config.lexicon_dir)
    annotators = _build_annotators(config, resources)
    report = RunReport()
    for cas in documents:
        doc_report = DocumentReport(doc_id=cas.view)
        report.documents.append(doc_report)
        for entry, annotator in annotators:
            try:
                if entry.outputs:
                    _ensure_output_types(cas, entry.outputs)
                table = node_table(cas)
                extra = facts_from_annotations(cas, table, entry.inputs)
                before = len(cas)
                diagnostics = annotator.process(cas, extra_facts=extra)
                doc_report.annotation_counts[entry.name] = len(cas) - before
                doc_report.diagnostics.extend(
                    f"{entry.name}: {d}" for d in diagnostics)
            except AnnologError as exc:
                doc_report.error = f"{entry.name}: {exc}"
                break
    return list(documents), report
