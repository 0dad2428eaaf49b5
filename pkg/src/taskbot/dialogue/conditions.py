"""Boolean condition expressions used by policy decision trees.

Grammar (|| lowest precedence, then &&, then !):

    expr   := term ('||' term)*
    term   := factor ('&&' factor)*
    factor := '!' factor | '(' expr ')' | path op literal | path | literal
    op     := '==' | '!=' | '<' | '<=' | '>' | '>='

Paths are dotted names over the state snapshot (e.g. ``single.got_intent``,
``tree.stack_depth``). Literals are true/false, integers, and quoted strings.
Relational operators apply to numbers only; a comparison against a
non-number quietly evaluates to false rather than blowing up a turn.
"""

import re
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Tuple, Union

from taskbot.errors import ConditionSyntaxError, UnknownPath

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op>==|!=|<=|>=|<|>|&&|\|\||!|\(|\))
  | (?P<int>-?\d+)
  | (?P<str>'[^']*'|"[^"]*")
  | (?P<path>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)
    """,
    re.VERBOSE,
)

_COMPARE_OPS = ("==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class Token:
    kind: str  # op | int | str | path | bool | end
    text: str
    position: int


def _tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ConditionSyntaxError("unexpected character %r" % source[pos], pos)
        kind = match.lastgroup
        text = match.group()
        if kind != "ws":
            if kind == "path" and text in ("true", "false"):
                kind = "bool"
            tokens.append(Token(kind, text, pos))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


# --- AST --------------------------------------------------------------------

class ConditionExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Literal(ConditionExpr):
    value: Union[bool, int, str]


@dataclass(frozen=True)
class PathExpr(ConditionExpr):
    path: str


@dataclass(frozen=True)
class Compare(ConditionExpr):
    path: str
    op: str
    value: Union[bool, int, str]


@dataclass(frozen=True)
class NotExpr(ConditionExpr):
    operand: ConditionExpr


@dataclass(frozen=True)
class AndExpr(ConditionExpr):
    left: ConditionExpr
    right: ConditionExpr


@dataclass(frozen=True)
class OrExpr(ConditionExpr):
    left: ConditionExpr
    right: ConditionExpr


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, text: str) -> None:
        token = self.current
        if token.kind != "op" or token.text != text:
            raise ConditionSyntaxError("expected %r, got %r" % (text, token.text or "end of input"), token.position)
        self.advance()

    def parse(self) -> ConditionExpr:
        expr = self.parse_or()
        if self.current.kind != "end":
            raise ConditionSyntaxError("unexpected trailing input %r" % self.current.text, self.current.position)
        return expr

    def parse_or(self) -> ConditionExpr:
        left = self.parse_and()
        while self.current.kind == "op" and self.current.text == "||":
            self.advance()
            left = OrExpr(left, self.parse_and())
        return left

    def parse_and(self) -> ConditionExpr:
        left = self.parse_factor()
        while self.current.kind == "op" and self.current.text == "&&":
            self.advance()
            left = AndExpr(left, self.parse_factor())
        return left

    def _literal(self, token: Token) -> Union[bool, int, str]:
        if token.kind == "bool":
            return token.text == "true"
        if token.kind == "int":
            return int(token.text)
        return token.text[1:-1]  # strip quotes

    def parse_factor(self) -> ConditionExpr:
        token = self.current
        if token.kind == "op" and token.text == "!":
            self.advance()
            return NotExpr(self.parse_factor())
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.parse_or()
            self.expect_op(")")
            return inner
        if token.kind in ("bool", "int", "str"):
            self.advance()
            return Literal(self._literal(token))
        if token.kind == "path":
            self.advance()
            nxt = self.current
            if nxt.kind == "op" and nxt.text in _COMPARE_OPS:
                self.advance()
                value = self.current
                if value.kind not in ("bool", "int", "str"):
                    raise ConditionSyntaxError(
                        "comparison needs a literal on the right, got %r" % (value.text or "end of input"),
                        value.position,
                    )
                self.advance()
                return Compare(token.text, nxt.text, self._literal(value))
            return PathExpr(token.text)
        raise ConditionSyntaxError("expected an expression, got %r" % (token.text or "end of input"), token.position)


def parse_condition(source: str) -> ConditionExpr:
    """Parse a condition; raises ConditionSyntaxError with the bad position."""
    return _Parser(_tokenize(source)).parse()


def iter_paths(expr: ConditionExpr) -> Iterable[str]:
    if isinstance(expr, PathExpr):
        yield expr.path
    elif isinstance(expr, Compare):
        yield expr.path
    elif isinstance(expr, NotExpr):
        yield from iter_paths(expr.operand)
    elif isinstance(expr, (AndExpr, OrExpr)):
        yield from iter_paths(expr.left)
        yield from iter_paths(expr.right)


def validate_paths(expr: ConditionExpr, known: Iterable[str], location: str = "") -> None:
    known_set = set(known)
    for path in iter_paths(expr):
        if path not in known_set:
            raise UnknownPath(location, "unknown state path %r" % path)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def evaluate(expr: ConditionExpr, snapshot: Mapping[str, object]) -> bool:
    """Evaluate against a flat path → value snapshot. Total: never raises
    for value-shaped surprises, only for paths missing from the snapshot."""
    if isinstance(expr, Literal):
        return bool(expr.value)
    if isinstance(expr, PathExpr):
        if expr.path not in snapshot:
            raise UnknownPath("", "snapshot has no path %r" % expr.path)
        return bool(snapshot[expr.path])
    if isinstance(expr, Compare):
        if expr.path not in snapshot:
            raise UnknownPath("", "snapshot has no path %r" % expr.path)
        lhs = snapshot[expr.path]
        rhs = expr.value
        if expr.op == "==":
            return lhs == rhs
        if expr.op == "!=":
            return lhs != rhs
        if not (_is_number(lhs) and _is_number(rhs)):
            return False
        if expr.op == "<":
            return lhs < rhs
        if expr.op == "<=":
            return lhs <= rhs
        if expr.op == ">":
            return lhs > rhs
        return lhs >= rhs
    if isinstance(expr, NotExpr):
        return not evaluate(expr.operand, snapshot)
    if isinstance(expr, AndExpr):
        return evaluate(expr.left, snapshot) and evaluate(expr.right, snapshot)
    if isinstance(expr, OrExpr):
        return evaluate(expr.left, snapshot) or evaluate(expr.right, snapshot)
    raise TypeError("not a condition expression: %r" % (expr,))


def fold_constant(expr: ConditionExpr) -> Optional[bool]:
    """Return the expression's value if it is the same for every snapshot,
    else None. Used to prove a policy tree always reaches some action."""
    if isinstance(expr, Literal):
        return bool(expr.value)
    if isinstance(expr, NotExpr):
        inner = fold_constant(expr.operand)
        return None if inner is None else not inner
    if isinstance(expr, AndExpr):
        left, right = fold_constant(expr.left), fold_constant(expr.right)
        if left is False or right is False:
            return False
        if left is True and right is True:
            return True
        return None
    if isinstance(expr, OrExpr):
        left, right = fold_constant(expr.left), fold_constant(expr.right)
        if left is True or right is True:
            return True
        if left is False and right is False:
            return False
        return None
    return None
