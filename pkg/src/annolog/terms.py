"""Logic terms, substitutions and unification.

Everything the rule engine manipulates is built from four term shapes:
variables, atoms, integers and compounds.  Lists are ordinary compounds
("."/2 cells ending in the atom "[]"), with helpers below to build and
take them apart.  Substitutions are immutable; binding returns a new one,
which keeps backtracking in the solver trivially correct.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple


class Term:
    """Base class for all term shapes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    """A logic variable.  Identity is the numeric id; the name is for display."""

    name: str
    id: int

    def __repr__(self) -> str:
        return f"Var({self.name}#{self.id})"


@dataclass(frozen=True, slots=True)
class Atom(Term):
    """A constant symbol.  Equality is by text; quoting in source is irrelevant."""

    text: str

    def __repr__(self) -> str:
        return f"Atom({self.text!r})"


@dataclass(frozen=True, slots=True)
class Integer(Term):
    value: int

    def __repr__(self) -> str:
        return f"Integer({self.value})"


@dataclass(frozen=True, slots=True)
class Compound(Term):
    functor: str
    args: Tuple[Term, ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError("compound terms need at least one argument; use Atom for arity 0")

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {self.args!r})"


EMPTY_LIST = Atom("[]")
LIST_FUNCTOR = "."


def cons(head: Term, tail: Term) -> Compound:
    return Compound(LIST_FUNCTOR, (head, tail))


def make_list(items: Sequence[Term], tail: Term = EMPTY_LIST) -> Term:
    """Build a list term from ``items``, ending in ``tail``."""
    result = tail
    for item in reversed(items):
        result = cons(item, result)
    return result


def list_elements(term: Term) -> Tuple[Tuple[Term, ...], Term]:
    """Decompose a list term into (elements, tail).

    A proper list has tail EMPTY_LIST; a partial list ends in a variable;
    anything else (including a non-list term) is returned as a zero-element
    spine with itself as the tail.
    """
    elements = []
    while isinstance(term, Compound) and term.functor == LIST_FUNCTOR and len(term.args) == 2:
        elements.append(term.args[0])
        term = term.args[1]
    return tuple(elements), term


def is_proper_list(term: Term) -> bool:
    _, tail = list_elements(term)
    return tail == EMPTY_LIST


class VarSource:
    """Issues fresh variable ids.  One source is confined to one derivation."""

    def __init__(self, start: int = 0) -> None:
        self._counter = itertools.count(start)

    def fresh(self, name: str = "_G") -> Var:
        return Var(name, next(self._counter))

    def next_id(self) -> int:
        return next(self._counter)


@dataclass(frozen=True, slots=True)
class Goal:
    """Base class for clause-body elements."""


@dataclass(frozen=True, slots=True)
class Call(Goal):
    """An ordinary goal, optionally qualified with a module name."""

    term: Term
    module: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.term, (Atom, Compound)):
            raise ValueError(f"goal must be an atom or compound, got {self.term!r}")


@dataclass(frozen=True, slots=True)
class Cut(Goal):
    """The commit operator: discards choice points made since clause entry."""


@dataclass(frozen=True, slots=True)
class Negation(Goal):
    """Negation as failure over an inner goal sequence."""

    goals: Tuple[Goal, ...]


@dataclass(frozen=True, slots=True)
class Clause:
    """A rule ``head :- body`` or, with an empty body, a fact."""

    head: Term
    body: Tuple[Goal, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.head, (Atom, Compound)):
            raise ValueError(f"clause head must be an atom or compound, got {self.head!r}")

    @property
    def key(self) -> Tuple[str, int]:
        return predicate_key(self.head)

    @property
    def is_fact(self) -> bool:
        return not self.body


def predicate_key(term: Term) -> Tuple[str, int]:
    """(functor, arity) of a callable term."""
    if isinstance(term, Atom):
        return term.text, 0
    if isinstance(term, Compound):
        return term.functor, len(term.args)
    raise ValueError(f"not a callable term: {term!r}")


class Substitution:
    """An immutable mapping from variable ids to terms.

    Bindings never form cycles when built through :func:`unify` without an
    occurs check only because the shipped rule sets cannot create them; the
    optional check is there for tests and cautious callers.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[dict] = None) -> None:
        self._bindings = bindings or {}

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._bindings == other._bindings

    def __repr__(self) -> str:
        items = ", ".join(f"{k}->{v!r}" for k, v in self._bindings.items())
        return f"Substitution({{{items}}})"

    def bind(self, var: Var, term: Term) -> "Substitution":
        new = dict(self._bindings)
        new[var.id] = term
        return Substitution(new)

    def walk(self, term: Term) -> Term:
        """Shallow dereference: follow variable bindings to the first non-variable
        (or unbound variable)."""
        while isinstance(term, Var):
            bound = self._bindings.get(term.id)
            if bound is None:
                return term
            term = bound
        return term

    def apply(self, term: Term) -> Term:
        """Deep dereference: replace every bound variable in ``term`` transitively."""
        term = self.walk(term)
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(self.apply(a) for a in term.args))
        return term


EMPTY_SUBSTITUTION = Substitution()


def _occurs(var: Var, term: Term, subst: Substitution) -> bool:
    term = subst.walk(term)
    if isinstance(term, Var):
        return term.id == var.id
    if isinstance(term, Compound):
        return any(_occurs(var, a, subst) for a in term.args)
    return False


def unify(a: Term, b: Term, subst: Substitution = EMPTY_SUBSTITUTION,
          occurs_check: bool = False) -> Optional[Substitution]:
    """Most general unifier of ``a`` and ``b`` extending ``subst``; None on failure."""
    a = subst.walk(a)
    b = subst.walk(b)
    if isinstance(a, Var):
        if isinstance(b, Var) and b.id == a.id:
            return subst
        if occurs_check and _occurs(a, b, subst):
            return None
        return subst.bind(a, b)
    if isinstance(b, Var):
        if occurs_check and _occurs(b, a, subst):
            return None
        return subst.bind(b, a)
    if isinstance(a, Atom) and isinstance(b, Atom):
        return subst if a.text == b.text else None
    if isinstance(a, Integer) and isinstance(b, Integer):
        return subst if a.value == b.value else None
    if isinstance(a, Compound) and isinstance(b, Compound):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            result = unify(x, y, subst, occurs_check)
            if result is None:
                return None
            subst = result
        return subst
    return None


def term_variables(term: Term) -> Iterator[Var]:
    """All variable occurrences in ``term``, left to right (with repeats)."""
    if isinstance(term, Var):
        yield term
    elif isinstance(term, Compound):
        for arg in term.args:
            yield from term_variables(arg)


def goal_variables(goal: Goal) -> Iterator[Var]:
    if isinstance(goal, Call):
        yield from term_variables(goal.term)
    elif isinstance(goal, Negation):
        for inner in goal.goals:
            yield from goal_variables(inner)


def clause_variables(clause: Clause) -> Iterator[Var]:
    yield from term_variables(clause.head)
    for goal in clause.body:
        yield from goal_variables(goal)


def _rename_term(term: Term, mapping: dict, source: VarSource) -> Term:
    if isinstance(term, Var):
        new = mapping.get(term.id)
        if new is None:
            new = source.fresh(term.name)
            mapping[term.id] = new
        return new
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_rename_term(a, mapping, source) for a in term.args))
    return term


def _rename_goal(goal: Goal, mapping: dict, source: VarSource) -> Goal:
    if isinstance(goal, Call):
        return Call(_rename_term(goal.term, mapping, source), goal.module)
    if isinstance(goal, Negation):
        return Negation(tuple(_rename_goal(g, mapping, source) for g in goal.goals))
    return goal


def rename_apart(clause: Clause, source: VarSource) -> Clause:
    """An alpha-equivalent copy of ``clause`` whose variable ids all come from
    ``source`` (hence disjoint from anything issued elsewhere)."""
    mapping: dict = {}
    head = _rename_term(clause.head, mapping, source)
    body = tuple(_rename_goal(g, mapping, source) for g in clause.body)
    return Clause(head, body)


def alpha_equal(a: Term, b: Term, mapping: Optional[dict] = None) -> bool:
    """Structural equality up to a consistent renaming of variables."""
    if mapping is None:
        mapping = {}
    if isinstance(a, Var) and isinstance(b, Var):
        if a.id in mapping:
            return mapping[a.id] == b.id
        if b.id in mapping.values():
            return False
        mapping[a.id] = b.id
        return True
    if isinstance(a, Atom) and isinstance(b, Atom):
        return a.text == b.text
    if isinstance(a, Integer) and isinstance(b, Integer):
        return a.value == b.value
    if isinstance(a, Compound) and isinstance(b, Compound):
        return (a.functor == b.functor and len(a.args) == len(b.args)
                and all(alpha_equal(x, y, mapping) for x, y in zip(a.args, b.args)))
    return False


def goals_alpha_equal(a: Sequence[Goal], b: Sequence[Goal], mapping: Optional[dict] = None) -> bool:
    if mapping is None:
        mapping = {}
    if len(a) != len(b):
        return False
    for ga, gb in zip(a, b):
        if isinstance(ga, Cut) and isinstance(gb, Cut):
            continue
        if isinstance(ga, Negation) and isinstance(gb, Negation):
            if not goals_alpha_equal(ga.goals, gb.goals, mapping):
                return False
            continue
        if isinstance(ga, Call) and isinstance(gb, Call):
            if ga.module != gb.module or not alpha_equal(ga.term, gb.term, mapping):
                return False
            continue
        return False
    return True


def clauses_alpha_equal(a: Clause, b: Clause) -> bool:
    mapping: dict = {}
    return alpha_equal(a.head, b.head, mapping) and goals_alpha_equal(a.body, b.body, mapping)
