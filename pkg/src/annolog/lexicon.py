"""Immutable lexical resources and their solver bindings.

Four resource kinds back the rule sets: a miniature WordNet (lemma ->
synsets in sense order, synset -> hypernyms), verb lookup tables keyed by
lemma, wh-word lists, and the semantic type taxonomy used for answer
types.  All of them load from UTF-8 TSV files:

* ``synsets.tsv``    lemma <TAB> synsetId        (sense order = line order)
* ``hypernyms.tsv``  synsetId <TAB> hypernymId
* ``tables.tsv``     tableName <TAB> key <TAB> type1,type2,...
* ``wordlists.tsv``  listName <TAB> word
* ``taxonomy.tsv``   type [<TAB> supertype]      (roots omit the supertype)

Once loaded the resources are immutable and safe to share.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .engine import ExternalRegistry
from .errors import AnnologError
from .terms import Atom, Substitution, Term, make_list, list_elements, unify, EMPTY_LIST


class LexiconError(AnnologError):
    pass


class UnknownLemmaError(LexiconError):
    def __init__(self, lemma: str) -> None:
        super().__init__(f"lemma {lemma!r} not in the wordnet fixture")
        self.lemma = lemma


class UnknownTableError(LexiconError):
    def __init__(self, table: str) -> None:
        super().__init__(f"no lookup table named {table!r}")
        self.table = table


class TypeTaxonomy:
    """Answer-type names with optional supertypes; the graph is a forest."""

    def __init__(self, edges: Dict[str, Optional[str]]) -> None:
        self._supertype = dict(edges)
        for name in self._supertype:
            self._chain(name)  # validates acyclicity and closed references

    def has_type(self, name: str) -> bool:
        return name in self._supertype

    def require(self, name: str) -> None:
        if name not in self._supertype:
            raise LexiconError(f"unknown semantic type {name!r}")

    def _chain(self, name: str) -> List[str]:
        chain = []
        seen = set()
        current: Optional[str] = name
        while current is not None:
            if current in seen:
                raise LexiconError(f"taxonomy cycle through {current!r}")
            if current not in self._supertype:
                raise LexiconError(f"taxonomy references undeclared type {current!r}")
            seen.add(current)
            chain.append(current)
            current = self._supertype[current]
        return chain

    def subsumes(self, general: str, specific: str) -> bool:
        self.require(general)
        self.require(specific)
        return general in self._chain(specific)

    def strictly_subsumes(self, general: str, specific: str) -> bool:
        return general != specific and self.subsumes(general, specific)

    def type_names(self) -> List[str]:
        return list(self._supertype)


class MiniWordNet:
    """Lemma -> synsets in sense order, plus a hypernym graph."""

    def __init__(self, senses: Dict[str, List[str]],
                 hypernyms: Dict[str, List[str]]) -> None:
        self._senses = {k: list(v) for k, v in senses.items()}
        self._hypernyms = {k: list(v) for k, v in hypernyms.items()}
        self._validate()

    def _validate(self) -> None:
        defined = set()
        for synsets in self._senses.values():
            defined.update(synsets)
        for synset, targets in self._hypernyms.items():
            if synset not in defined:
                defined.add(synset)  # hypernym-only synsets are fine
            defined.update(targets)
        for synset in defined:
            self._walk_chain(synset)  # raises on cycles

    def _walk_chain(self, synset: str) -> List[str]:
        chain = [synset]
        seen = {synset}
        current = synset
        while self._hypernyms.get(current):
            current = self._hypernyms[current][0]  # first edge in file order
            if current in seen:
                raise LexiconError(f"hypernym cycle through {current!r}")
            seen.add(current)
            chain.append(current)
        return chain

    def has_lemma(self, lemma: str) -> bool:
        return lemma in self._senses

    def synsets(self, lemma: str) -> List[str]:
        return list(self._senses.get(lemma, ()))

    def synonym(self, lemma: str, candidates: Sequence[str]) -> bool:
        """True iff ``lemma`` equals a candidate or shares a synset with one.
        Unknown lemmas degrade to the equality check."""
        if lemma in candidates:
            return True
        own = set(self._senses.get(lemma, ()))
        if not own:
            return False
        for candidate in candidates:
            if own.intersection(self._senses.get(candidate, ())):
                return True
        return False

    def hypernym_chain(self, lemma: str) -> List[str]:
        """First-sense synset followed by hypernyms up to a root, taking the
        first hypernym edge (file order) at every step."""
        if lemma not in self._senses or not self._senses[lemma]:
            raise UnknownLemmaError(lemma)
        return self._walk_chain(self._senses[lemma][0])


@dataclass(frozen=True)
class WordLists:
    lists: Dict[str, frozenset]

    def contains(self, list_name: str, word: str) -> bool:
        members = self.lists.get(list_name)
        if members is None:
            raise LexiconError(f"unknown word list {list_name!r}")
        return word in members


class LookupTables:
    """Named tables of lemma -> answer-type-name sequences."""

    # the synset table maps synset ids, not lemmas, and is consumed by the
    # wordnet type lookup rather than exposed as a solver predicate
    SYNSET_TABLE = "synsetType"

    def __init__(self, tables: Dict[str, Dict[str, List[str]]],
                 taxonomy: TypeTaxonomy) -> None:
        self._tables = {name: {k: list(v) for k, v in entries.items()}
                        for name, entries in tables.items()}
        for name, entries in self._tables.items():
            for key, types in entries.items():
                for type_name in types:
                    if not taxonomy.has_type(type_name):
                        raise LexiconError(
                            f"table {name!r} entry {key!r} names unknown type {type_name!r}")

    def lookup(self, table: str, key: str) -> Optional[List[str]]:
        if table not in self._tables:
            raise UnknownTableError(table)
        value = self._tables[table].get(key)
        return list(value) if value is not None else None

    def table_names(self) -> List[str]:
        return list(self._tables)


@dataclass(frozen=True)
class LexicalResources:
    wordnet: MiniWordNet
    tables: LookupTables
    wordlists: WordLists
    taxonomy: TypeTaxonomy


def _read_tsv(path: str) -> Iterable[List[str]]:
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            yield line.split("\t")


def load_taxonomy(path: str) -> TypeTaxonomy:
    edges: Dict[str, Optional[str]] = {}
    for fields in _read_tsv(path):
        if len(fields) == 1:
            edges[fields[0]] = None
        elif len(fields) == 2:
            edges[fields[0]] = fields[1]
        else:
            raise LexiconError(f"bad taxonomy row: {fields!r}")
    return TypeTaxonomy(edges)


def load_lexicon(directory: str) -> LexicalResources:
    """Load the five-file lexicon layout from ``directory``."""
    taxonomy = load_taxonomy(os.path.join(directory, "taxonomy.tsv"))

    senses: Dict[str, List[str]] = {}
    for fields in _read_tsv(os.path.join(directory, "synsets.tsv")):
        if len(fields) != 2:
            raise LexiconError(f"bad synsets row: {fields!r}")
        senses.setdefault(fields[0], []).append(fields[1])

    hypernyms: Dict[str, List[str]] = {}
    for fields in _read_tsv(os.path.join(directory, "hypernyms.tsv")):
        if len(fields) != 2:
            raise LexiconError(f"bad hypernyms row: {fields!r}")
        hypernyms.setdefault(fields[0], []).append(fields[1])

    tables: Dict[str, Dict[str, List[str]]] = {}
    for fields in _read_tsv(os.path.join(directory, "tables.tsv")):
        if len(fields) != 3:
            raise LexiconError(f"bad tables row: {fields!r}")
        name, key, value = fields
        types = [t for t in value.split(",") if t]
        tables.setdefault(name, {})[key] = types

    lists: Dict[str, set] = {}
    for fields in _read_tsv(os.path.join(directory, "wordlists.tsv")):
        if len(fields) != 2:
            raise LexiconError(f"bad wordlists row: {fields!r}")
        lists.setdefault(fields[0], set()).add(fields[1])

    wordnet = MiniWordNet(senses, hypernyms)
    # Synset-type rows are keyed by synset id; everything else by lemma.
    lookup = LookupTables(tables, taxonomy)
    wordlists = WordLists({name: frozenset(words) for name, words in lists.items()})
    return LexicalResources(wordnet, lookup, wordlists, taxonomy)


def wordnet_type_lookup(resources: LexicalResources, lemma: str) -> Optional[List[str]]:
    """Answer types for ``lemma`` via its first-sense hypernym chain: the
    first synset on the chain with a ``synsetType`` table entry wins."""
    if not resources.wordnet.has_lemma(lemma):
        return None
    if LookupTables.SYNSET_TABLE not in resources.tables.table_names():
        return None
    for synset in resources.wordnet.hypernym_chain(lemma):
        types = resources.tables.lookup(LookupTables.SYNSET_TABLE, synset)
        if types:
            return types
    return None


# -- solver bindings ---------------------------------------------------------


def _ground_atom_text(term: Term) -> Optional[str]:
    return term.text if isinstance(term, Atom) else None


def _atom_list_texts(term: Term) -> Optional[List[str]]:
    elements, tail = list_elements(term)
    if tail != EMPTY_LIST:
        return None
    texts = []
    for element in elements:
        if not isinstance(element, Atom):
            return None
        texts.append(element.text)
    return texts


def register_lexicon_predicates(registry: ExternalRegistry,
                                resources: LexicalResources) -> ExternalRegistry:
    """Expose the resources as external predicates.

    Registers wordNet:synonym/2, wordNet:typeLookup/2, timeTableLookup/2,
    howVerbTableLookup/2, whatWord/1, wh_time/1 and howMuchMany/1.  Lookup
    misses are goal failures, never errors.
    """

    def synonym_handler(args: Tuple[Term, ...], subst: Substitution):
        lemma = _ground_atom_text(args[0])
        candidates = _atom_list_texts(args[1])
        if lemma is None or candidates is None:
            return
        if resources.wordnet.synonym(lemma, candidates):
            yield subst

    def type_lookup_handler(args: Tuple[Term, ...], subst: Substitution):
        lemma = _ground_atom_text(args[0])
        if lemma is None:
            return
        types = wordnet_type_lookup(resources, lemma)
        if types is None:
            return
        unified = unify(args[1], make_list([Atom(t) for t in types]), subst)
        if unified is not None:
            yield unified

    def table_handler(table_name: str):
        def handler(args: Tuple[Term, ...], subst: Substitution):
            key = _ground_atom_text(args[0])
            if key is None:
                return
            types = resources.tables.lookup(table_name, key)
            if types is None:
                return
            unified = unify(args[1], make_list([Atom(t) for t in types]), subst)
            if unified is not None:
                yield unified
        return handler

    def wordlist_handler(list_name: str):
        def handler(args: Tuple[Term, ...], subst: Substitution):
            word = _ground_atom_text(args[0])
            if word is not None and resources.wordlists.contains(list_name, word):
                yield subst
        return handler

    registry.register("wordNet", "synonym", 2, synonym_handler)
    registry.register("wordNet", "typeLookup", 2, type_lookup_handler)
    registry.register(None, "timeTableLookup", 2, table_handler("timeTable"))
    registry.register(None, "howVerbTableLookup", 2, table_handler("howVerbTable"))
    registry.register(None, "whatWord", 1, wordlist_handler("whatWord"))
    registry.register(None, "wh_time", 1, wordlist_handler("wh_time"))
    registry.register(None, "howMuchMany", 1, wordlist_handler("howMuchMany"))
    return registry
