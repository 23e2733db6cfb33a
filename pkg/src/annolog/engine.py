"""Top-down resolution over a knowledge base.

The solver does classic SLD resolution: depth-first search, leftmost goal
selection, clauses tried in assertion order.  Cut commits to the clause
being proved (standard transparent clause-level scoping), ``\\+`` is
negation as failure, and calls can be dispatched to external handlers
(lexical resources and the like) registered by (module, functor, arity).

The machine is iterative — an explicit choice-point stack instead of
recursive generators — so deep derivations are bounded by the configured
depth budget, not by the Python stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .dsl import format_goal, parse_program
from .errors import AnnologError
from .terms import (
    Atom,
    Call,
    Clause,
    Compound,
    Cut,
    Goal,
    Negation,
    Substitution,
    Term,
    Var,
    VarSource,
    goal_variables,
    predicate_key,
    rename_apart,
    unify,
)


class UnknownPredicateError(AnnologError):
    """A called predicate has no clauses, no built-in and no external handler.

    This almost always means a rule/fact-schema mismatch (a typo in a
    predicate name or arity), so it is an error rather than silent failure.
    """

    def __init__(self, module: Optional[str], functor: str, arity: int) -> None:
        name = f"{module}:{functor}/{arity}" if module else f"{functor}/{arity}"
        super().__init__(f"unknown predicate {name}")
        self.module = module
        self.functor = functor
        self.arity = arity


class ResourceExhaustedError(AnnologError):
    """The step or depth budget ran out — the query is likely non-terminating."""


@dataclass(frozen=True)
class SolveConfig:
    """Budgets for one solve.  Steps count clause-head unification attempts,
    which makes the measure independent of how the machine is implemented."""

    max_resolution_steps: int = 1_000_000
    max_depth: int = 10_000

    def __post_init__(self) -> None:
        if self.max_resolution_steps <= 0 or self.max_depth <= 0:
            raise ValueError("solve budgets must be positive")


DEFAULT_CONFIG = SolveConfig()


@dataclass(frozen=True)
class Solution:
    """Bindings for the named variables of a query, in first-occurrence order."""

    bindings: Dict[str, Term] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Term:
        return self.bindings[name]

    def __contains__(self, name: str) -> bool:
        return name in self.bindings


# An external handler receives the call's fully dereferenced argument terms
# plus the current substitution and yields zero or more extending
# substitutions.  Handlers must be deterministic and must not touch the
# knowledge base.
ExternalHandler = Callable[[Tuple[Term, ...], Substitution], Iterable[Substitution]]


class ExternalRegistry:
    """Dispatch table for externally implemented predicates."""

    def __init__(self) -> None:
        self._handlers: Dict[Tuple[Optional[str], str, int], ExternalHandler] = {}

    def register(self, module: Optional[str], functor: str, arity: int,
                 handler: ExternalHandler) -> None:
        self._handlers[(module, functor, arity)] = handler

    def lookup(self, module: Optional[str], functor: str, arity: int) -> Optional[ExternalHandler]:
        return self._handlers.get((module, functor, arity))

    def __len__(self) -> int:
        return len(self._handlers)


# Always-loaded library rules.  member/2 is the textbook definition;
# getDescendantNodes/2 walks child/2 edges depth-first, children in
# assertion order, which yields document pre-order when child facts are
# asserted in document order.  The root itself is not a descendant.
BASE_LIBRARY = """\
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).

getDescendantNodes(Node, Desc) :-
    child(Node, Kid),
    getDescendantOrSelf(Kid, Desc).

getDescendantOrSelf(Node, Node).
getDescendantOrSelf(Node, Desc) :-
    child(Node, Kid),
    getDescendantOrSelf(Kid, Desc).
"""

STATIC = "static"
DYNAMIC = "dynamic"


class KnowledgeBase:
    """Clauses indexed by (functor, arity), in assertion order.

    Predicates can also be *declared*: a declared predicate with no clauses
    fails instead of raising :class:`UnknownPredicateError`.  The fact
    translator declares its whole schema so that rules probing an absent
    edge type simply fail.
    """

    def __init__(self, include_base_library: bool = True) -> None:
        self._clauses: Dict[Tuple[str, int], List[Clause]] = {}
        self._provenance: Dict[Tuple[str, int], List[str]] = {}
        self._declared: set = set()
        if include_base_library:
            self.assert_clauses(parse_program(BASE_LIBRARY).clauses, provenance=STATIC)
            self.declare("child", 2)  # referenced by the library rules

    def declare(self, functor: str, arity: int) -> None:
        self._declared.add((functor, arity))

    def is_known(self, functor: str, arity: int) -> bool:
        key = (functor, arity)
        return key in self._clauses or key in self._declared

    def assert_clauses(self, clauses: Sequence[Clause], provenance: str = DYNAMIC) -> "KnowledgeBase":
        """Append ``clauses`` in order.  Must not be called while a solve over
        this knowledge base is running."""
        for clause in clauses:
            key = clause.key
            self._clauses.setdefault(key, []).append(clause)
            self._provenance.setdefault(key, []).append(provenance)
        return self

    def clauses_for(self, functor: str, arity: int) -> List[Clause]:
        return self._clauses.get((functor, arity), [])

    def provenance_for(self, functor: str, arity: int) -> List[str]:
        return self._provenance.get((functor, arity), [])

    def predicates(self) -> List[Tuple[str, int]]:
        return list(self._clauses.keys())


_TRUE = ("true", 0)
_FAIL = ("fail", 0)
_UNIFY = ("=", 2)
_STRUCT_EQ = ("==", 2)
_BUILTIN_KEYS = {_TRUE, _FAIL, _UNIFY, _STRUCT_EQ}


@dataclass(frozen=True)
class _Entry:
    """One pending goal: the goal itself, its call depth, and the choice-point
    barrier a cut in the same clause body resets the stack to."""

    goal: Goal
    depth: int
    barrier: int


# Resolvents are persistent linked lists of entries — (head, rest) pairs
# ending in None — so choice points can share their continuations.
_Resolvent = Optional[tuple]


def _push_goals(goals: Sequence[Goal], depth: int, barrier: int, rest: _Resolvent) -> _Resolvent:
    resolvent = rest
    for goal in reversed(goals):
        resolvent = (_Entry(goal, depth, barrier), resolvent)
    return resolvent


class _ClauseChoice:
    """Remaining clauses to try for one predicate call."""

    __slots__ = ("call_term", "clauses", "index", "rest", "subst", "depth", "barrier")

    def __init__(self, call_term: Term, clauses: List[Clause], rest: _Resolvent,
                 subst: Substitution, depth: int, barrier: int) -> None:
        self.call_term = call_term
        self.clauses = clauses
        self.index = 0
        self.rest = rest
        self.subst = subst
        self.depth = depth
        self.barrier = barrier

    def next_alternative(self, machine: "_Machine"):
        while self.index < len(self.clauses):
            clause = self.clauses[self.index]
            self.index += 1
            machine.count_step()
            renamed = rename_apart(clause, machine.fresh)
            subst = unify(self.call_term, renamed.head, self.subst)
            if subst is None:
                continue
            body_depth = self.depth + 1
            if renamed.body and body_depth > machine.config.max_depth:
                raise ResourceExhaustedError(
                    f"depth budget exceeded ({machine.config.max_depth})")
            resolvent = _push_goals(renamed.body, body_depth, self.barrier, self.rest)
            return resolvent, subst
        return None


class _ExternalChoice:
    """Precomputed alternative substitutions from an external handler."""

    __slots__ = ("substs", "index", "rest")

    def __init__(self, substs: List[Substitution], rest: _Resolvent) -> None:
        self.substs = substs
        self.index = 0
        self.rest = rest

    def next_alternative(self, machine: "_Machine"):
        if self.index < len(self.substs):
            subst = self.substs[self.index]
            self.index += 1
            return self.rest, subst
        return None


class _Machine:
    """One derivation: owns the fresh-variable source and the budgets."""

    def __init__(self, kb: KnowledgeBase, registry: Optional[ExternalRegistry],
                 config: SolveConfig, fresh: VarSource) -> None:
        self.kb = kb
        self.registry = registry or ExternalRegistry()
        self.config = config
        self.fresh = fresh
        self.steps = 0

    def count_step(self) -> None:
        self.steps += 1
        if self.steps > self.config.max_resolution_steps:
            raise ResourceExhaustedError(
                f"step budget exceeded ({self.config.max_resolution_steps})")

    def run(self, goals: Sequence[Goal], subst: Substitution, depth: int) -> Iterator[Substitution]:
        resolvent = _push_goals(goals, depth, 0, None)
        choice_points: List[object] = []

        def backtrack() -> Optional[Tuple[_Resolvent, Substitution]]:
            while choice_points:
                alternative = choice_points[-1].next_alternative(self)
                if alternative is not None:
                    return alternative
                choice_points.pop()
            return None

        while True:
            if resolvent is None:
                yield subst
                step = backtrack()
                if step is None:
                    return
                resolvent, subst = step
                continue

            entry, rest = resolvent
            goal = entry.goal

            if isinstance(goal, Cut):
                del choice_points[entry.barrier:]
                resolvent = rest
                continue

            if isinstance(goal, Negation):
                inner_depth = entry.depth + 1
                if inner_depth > self.config.max_depth:
                    raise ResourceExhaustedError(
                        f"depth budget exceeded ({self.config.max_depth})")
                refuted = True
                for _ in self.run(goal.goals, subst, inner_depth):
                    refuted = False
                    break
                if refuted:
                    resolvent = rest
                    continue
                step = backtrack()
                if step is None:
                    return
                resolvent, subst = step
                continue

            # Ordinary call.
            functor, arity = predicate_key(goal.term)
            outcome = self._dispatch(goal, functor, arity, rest, subst, entry,
                                     choice_points)
            if outcome is None:
                step = backtrack()
                if step is None:
                    return
                resolvent, subst = step
            else:
                resolvent, subst = outcome

    def _dispatch(self, goal: Call, functor: str, arity: int, rest: _Resolvent,
                  subst: Substitution, entry: _Entry,
                  choice_points: List[object]):
        """Resolve one call.  Returns the next (resolvent, substitution) or
        None to trigger backtracking."""
        if goal.module is None:
            key = (functor, arity)
            if key in _BUILTIN_KEYS:
                return self._builtin(key, goal, rest, subst)
            if self.kb.is_known(functor, arity):
                barrier = len(choice_points)
                choice = _ClauseChoice(goal.term, self.kb.clauses_for(functor, arity),
                                       rest, subst, entry.depth, barrier)
                choice_points.append(choice)
                return choice.next_alternative(self)

        handler = self.registry.lookup(goal.module, functor, arity)
        if handler is not None:
            args = self._call_args(goal.term, subst)
            substs = list(handler(args, subst))
            if not substs:
                return None
            choice = _ExternalChoice(substs, rest)
            choice_points.append(choice)
            return choice.next_alternative(self)

        raise UnknownPredicateError(goal.module, functor, arity)

    @staticmethod
    def _call_args(term: Term, subst: Substitution) -> Tuple[Term, ...]:
        if isinstance(term, Compound):
            return tuple(subst.apply(a) for a in term.args)
        return ()

    def _builtin(self, key: Tuple[str, int], goal: Call, rest: _Resolvent,
                 subst: Substitution):
        if key == _TRUE:
            return rest, subst
        if key == _FAIL:
            return None
        args = goal.term.args  # arity-2 builtins below
        if key == _UNIFY:
            unified = unify(args[0], args[1], subst)
            if unified is None:
                return None
            return rest, unified
        if key == _STRUCT_EQ:
            if subst.apply(args[0]) == subst.apply(args[1]):
                return rest, subst
            return None
        raise AssertionError(f"unhandled builtin {key}")


def _named_query_variables(goals: Sequence[Goal]) -> List[Var]:
    seen = set()
    ordered: List[Var] = []
    for goal in goals:
        for var in goal_variables(goal):
            if var.name != "_" and var.id not in seen:
                seen.add(var.id)
                ordered.append(var)
    return ordered


def _max_variable_id(goals: Sequence[Goal]) -> int:
    highest = -1
    for goal in goals:
        for var in goal_variables(goal):
            highest = max(highest, var.id)
    return highest


def solve(kb: KnowledgeBase, registry: Optional[ExternalRegistry],
          goals: Sequence[Goal], config: SolveConfig = DEFAULT_CONFIG) -> Iterator[Solution]:
    """Lazily enumerate solutions of ``goals`` in derivation order.

    Raises :class:`ResourceExhaustedError` when a budget runs out and
    :class:`UnknownPredicateError` on calls to predicates nobody defines.
    """
    query_vars = _named_query_variables(goals)
    fresh = VarSource(_max_variable_id(goals) + 1)
    machine = _Machine(kb, registry, config, fresh)
    for subst in machine.run(tuple(goals), Substitution(), 0):
        yield Solution({var.name: subst.apply(var) for var in query_vars})


def solve_first(kb: KnowledgeBase, registry: Optional[ExternalRegistry],
                goals: Sequence[Goal],
                config: SolveConfig = DEFAULT_CONFIG) -> Optional[Solution]:
    """First solution of ``goals``, or None."""
    for solution in solve(kb, registry, goals, config):
        return solution
    return None


def describe_goals(goals: Sequence[Goal]) -> str:
    return ", ".join(format_goal(g) for g in goals)
