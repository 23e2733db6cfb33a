"""Parser and printer for the Horn-clause rule language.

The accepted syntax is a small Prolog subset:

* a program is a sequence of clauses, each ending with ``.``
* ``Head.`` is a fact, ``Head :- G1, ..., Gn.`` a rule
* atoms are lowercase-initial identifiers or double-quoted strings
  (both denote the same atom; quoting is purely lexical)
* variables are uppercase/underscore-initial identifiers; a bare ``_``
  is anonymous and fresh at every occurrence
* integers, lists ``[a, b]`` / ``[H|T]``, cut ``!``, negation ``\\+ G``,
  and module-qualified goals ``mod:goal(...)``
* ``%`` starts a line comment

Clause order is preserved exactly: the solver's behaviour depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .errors import AnnologError
from .terms import (
    Atom,
    Call,
    Clause,
    Compound,
    Cut,
    EMPTY_LIST,
    Goal,
    Integer,
    LIST_FUNCTOR,
    Negation,
    Term,
    Var,
    VarSource,
    list_elements,
)


class ParseError(AnnologError):
    """Raised on the first syntax error; carries position and expectation."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class SourcePosition:
    line: int
    column: int


@dataclass(frozen=True)
class SourceProgram:
    """Parsed clauses in file order, with the position at which each starts."""

    clauses: Tuple[Clause, ...]
    positions: Tuple[SourcePosition, ...]

    def __len__(self) -> int:
        return len(self.clauses)


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ",": "COMMA",
    "|": "BAR",
    "!": "CUT",
    ".": "DOT",
}


@dataclass(frozen=True)
class _Token:
    kind: str  # ATOM VAR INT STRING NECK COLON NOT <punct kinds> EOF
    value: str
    line: int
    column: int


def _is_atom_start(c: str) -> bool:
    return c.isalpha() and c.islower()


def _is_var_start(c: str) -> bool:
    return c == "_" or (c.isalpha() and c.isupper())


def _is_name_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def error(message: str) -> ParseError:
        return ParseError(message, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c == ":":
            if i + 1 < n and text[i + 1] == "-":
                tokens.append(_Token("NECK", ":-", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(_Token("COLON", ":", start_line, start_col))
                i += 1
                col += 1
            continue
        if c == "\\":
            if i + 1 < n and text[i + 1] == "+":
                tokens.append(_Token("NOT", "\\+", start_line, start_col))
                i += 2
                col += 2
                continue
            raise error("unexpected '\\' (expected '\\+')")
        if c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, start_line, start_col))
            i += 1
            col += 1
            continue
        if c == '"':
            i += 1
            col += 1
            chars: List[str] = []
            while i < n and text[i] != '"':
                ch = text[i]
                if ch == "\n":
                    raise error("unterminated string")
                if ch == "\\" and i + 1 < n:
                    nxt = text[i + 1]
                    if nxt in ('"', "\\"):
                        chars.append(nxt)
                        i += 2
                        col += 2
                        continue
                chars.append(ch)
                i += 1
                col += 1
            if i >= n:
                raise error("unterminated string")
            i += 1
            col += 1
            tokens.append(_Token("STRING", "".join(chars), start_line, start_col))
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("INT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if _is_atom_start(c) or _is_var_start(c):
            j = i
            while j < n and _is_name_char(text[j]):
                j += 1
            word = text[i:j]
            kind = "ATOM" if _is_atom_start(c) else "VAR"
            tokens.append(_Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        raise error(f"unexpected character {c!r}")

    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0
        self.source = VarSource()
        self.scope: dict = {}

    # -- token plumbing ---------------------------------------------------

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "EOF":
            self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            raise self.error(f"expected {what}", token)
        return self.advance()

    def error(self, message: str, token: Optional[_Token] = None) -> ParseError:
        token = token or self.peek()
        found = token.value or token.kind
        return ParseError(f"{message}, found {found!r}", token.line, token.column)

    # -- variable scoping -------------------------------------------------

    def begin_clause(self) -> None:
        self.scope = {}

    def variable(self, name: str) -> Var:
        if name == "_":
            return self.source.fresh("_")
        var = self.scope.get(name)
        if var is None:
            var = self.source.fresh(name)
            self.scope[name] = var
        return var

    # -- grammar ------------------------------------------------------------

    def parse_term(self) -> Term:
        token = self.peek()
        if token.kind == "VAR":
            self.advance()
            return self.variable(token.value)
        if token.kind == "STRING":
            self.advance()
            return Atom(token.value)
        if token.kind == "INT":
            self.advance()
            return Integer(int(token.value))
        if token.kind == "ATOM":
            self.advance()
            if self.peek().kind == "LPAREN":
                return Compound(token.value, self.parse_arguments())
            return Atom(token.value)
        if token.kind == "LBRACKET":
            return self.parse_list()
        raise self.error("expected a term")

    def parse_arguments(self) -> Tuple[Term, ...]:
        self.expect("LPAREN", "'('")
        args = [self.parse_term()]
        while self.peek().kind == "COMMA":
            self.advance()
            args.append(self.parse_term())
        self.expect("RPAREN", "')'")
        return tuple(args)

    def parse_list(self) -> Term:
        self.expect("LBRACKET", "'['")
        if self.peek().kind == "RBRACKET":
            self.advance()
            return EMPTY_LIST
        items = [self.parse_term()]
        while self.peek().kind == "COMMA":
            self.advance()
            items.append(self.parse_term())
        tail: Term = EMPTY_LIST
        if self.peek().kind == "BAR":
            self.advance()
            tail = self.parse_term()
        self.expect("RBRACKET", "']'")
        result = tail
        for item in reversed(items):
            result = Compound(LIST_FUNCTOR, (item, result))
        return result

    def parse_goal(self) -> Goal:
        token = self.peek()
        if token.kind == "CUT":
            self.advance()
            return Cut()
        if token.kind == "NOT":
            self.advance()
            if self.peek().kind == "LPAREN":
                self.advance()
                inner = [self.parse_goal()]
                while self.peek().kind == "COMMA":
                    self.advance()
                    inner.append(self.parse_goal())
                self.expect("RPAREN", "')'")
                return Negation(tuple(inner))
            return Negation((self.parse_goal(),))
        if token.kind in ("ATOM", "STRING"):
            module: Optional[str] = None
            if token.kind == "ATOM" and self.peek(1).kind == "COLON":
                module = token.value
                self.advance()
                self.advance()
            term = self.parse_term()
            if not isinstance(term, (Atom, Compound)):
                raise self.error("expected a callable goal", token)
            return Call(term, module)
        raise self.error("expected a goal")

    def parse_goal_sequence(self) -> Tuple[Goal, ...]:
        goals = [self.parse_goal()]
        while self.peek().kind == "COMMA":
            self.advance()
            goals.append(self.parse_goal())
        return tuple(goals)

    def parse_clause(self) -> Tuple[Clause, SourcePosition]:
        self.begin_clause()
        start = self.peek()
        head = self.parse_term()
        if not isinstance(head, (Atom, Compound)):
            raise self.error("clause head must be an atom or compound", start)
        body: Tuple[Goal, ...] = ()
        if self.peek().kind == "NECK":
            self.advance()
            body = self.parse_goal_sequence()
        self.expect("DOT", "'.'")
        return Clause(head, body), SourcePosition(start.line, start.column)

    def parse_program(self) -> SourceProgram:
        clauses: List[Clause] = []
        positions: List[SourcePosition] = []
        while self.peek().kind != "EOF":
            clause, position = self.parse_clause()
            clauses.append(clause)
            positions.append(position)
        return SourceProgram(tuple(clauses), tuple(positions))

    def parse_query(self) -> Tuple[Goal, ...]:
        self.begin_clause()
        goals = self.parse_goal_sequence()
        if self.peek().kind == "DOT":  # the trailing period is optional
            self.advance()
        self.expect("EOF", "end of query")
        return goals


def parse_program(text: str) -> SourceProgram:
    """Parse a full rule file; raises :class:`ParseError` on the first error."""
    return _Parser(text).parse_program()


def parse_query(text: str) -> Tuple[Goal, ...]:
    """Parse a comma-separated goal sequence (trailing period optional)."""
    return _Parser(text).parse_query()


# -- printing ---------------------------------------------------------------


def _atom_needs_quotes(text: str) -> bool:
    if text == "[]":
        return False
    if not text or not _is_atom_start(text[0]):
        return True
    return not all(_is_name_char(c) for c in text)


def _quote_atom(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def format_term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Integer):
        return str(term.value)
    if isinstance(term, Atom):
        return _quote_atom(term.text) if _atom_needs_quotes(term.text) else term.text
    if isinstance(term, Compound):
        if term.functor == LIST_FUNCTOR and len(term.args) == 2:
            elements, tail = list_elements(term)
            inner = ", ".join(format_term(e) for e in elements)
            if tail == EMPTY_LIST:
                return f"[{inner}]"
            return f"[{inner}|{format_term(tail)}]"
        functor = _quote_atom(term.functor) if _atom_needs_quotes(term.functor) else term.functor
        args = ", ".join(format_term(a) for a in term.args)
        return f"{functor}({args})"
    raise TypeError(f"not a term: {term!r}")


def format_goal(goal: Goal) -> str:
    if isinstance(goal, Cut):
        return "!"
    if isinstance(goal, Negation):
        inner = ", ".join(format_goal(g) for g in goal.goals)
        if len(goal.goals) == 1:
            return f"\\+ {inner}"
        return f"\\+ ({inner})"
    if isinstance(goal, Call):
        text = format_term(goal.term)
        return f"{goal.module}:{text}" if goal.module else text
    raise TypeError(f"not a goal: {goal!r}")


def format_clause(clause: Clause) -> str:
    head = format_term(clause.head)
    if not clause.body:
        return f"{head}."
    body = ", ".join(format_goal(g) for g in clause.body)
    return f"{head} :- {body}."


def format_program(program: SourceProgram) -> str:
    return "\n".join(format_clause(c) for c in program.clauses) + "\n"
