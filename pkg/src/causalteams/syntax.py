"""Formula language: AST, concrete grammar, fragments, complementation.

Concrete tokens: `&` (conjunction), `|` (tensor disjunction), `++`
(intuitionistic disjunction), `=>` (selective implication), `do <bindings>
[]->` (interventionist counterfactual), `!` (dual negation), `dep(Xs; Y)`,
`ndep(Xs; Y)`, `indep(X, Y)`, and probability comparisons `Pr(f) <= c`,
`Pr(f) >= Pr(g)` with `<`, `>`, `=` as abbreviations.  Precedence, tightest
first: `!`, `&`, `|`, `++`, then the two implications (right associative).

Probability constants are exact rationals: decimal literals and `p/q` both
parse into `fractions.Fraction`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from .errors import (
    AntecedentNotClassical,
    AntecedentNotConjunctionOfEq,
    FormulaSyntaxError,
    NotInCO,
)

Atom = Union[int, str]


# --------------------------------------------------------------------------- AST


@dataclass(frozen=True)
class Eq:
    var: str
    value: Atom


@dataclass(frozen=True)
class Neq:
    var: str
    value: Atom


@dataclass(frozen=True)
class Dep:
    """Functional dependence =(Xs; Y); empty Xs is the constancy atom."""

    xs: Tuple[str, ...]
    y: str


@dataclass(frozen=True)
class NDep:
    """Contradictory negation of the dependence atom."""

    xs: Tuple[str, ...]
    y: str


@dataclass(frozen=True)
class MargIndep:
    """Marginal team-semantic independence of two variables."""

    x: str
    y: str


@dataclass(frozen=True)
class DualNeg:
    inner: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class TensorOr:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class IntuitOr:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Selective:
    antecedent: "Formula"
    consequent: "Formula"


@dataclass(frozen=True)
class Counterfactual:
    bindings: Tuple[Tuple[str, Atom], ...]
    consequent: "Formula"


@dataclass(frozen=True)
class ProbCmp:
    """Pr(target) rel bound, rel one of '<=', '>=', bound a rational constant
    or a second formula whose probability is compared."""

    target: "Formula"
    rel: str
    bound: Union[Fraction, "Formula"]


Formula = Union[
    Eq, Neq, Dep, NDep, MargIndep, DualNeg, And, TensorOr, IntuitOr,
    Selective, Counterfactual, ProbCmp,
]


def conjoin(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def big_intuit_or(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = IntuitOr(out, p)
    return out


def big_tensor_or(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = TensorOr(out, p)
    return out


# ------------------------------------------------------------------- fragments


def is_classical(f: Formula) -> bool:
    """Atoms V=v / V!=v combined with & and | only."""
    if isinstance(f, (Eq, Neq)):
        return True
    if isinstance(f, (And, TensorOr)):
        return is_classical(f.left) and is_classical(f.right)
    return False


def _uses_only(f: Formula, kinds, *, prob_neg_ok=False) -> bool:
    if isinstance(f, (Eq, Neq)):
        return True
    if isinstance(f, DualNeg):
        if DualNeg not in kinds and not (prob_neg_ok and is_prob_literal(f)):
            return False
        return is_prob_literal(f) or _uses_only(f.inner, kinds, prob_neg_ok=prob_neg_ok)
    if isinstance(f, (Dep, NDep, MargIndep)):
        return type(f) in kinds
    if isinstance(f, ProbCmp):
        if ProbCmp not in kinds:
            return False
        ok = in_co(f.target)
        if isinstance(f.bound, Fraction):
            return ok
        return ok and in_co(f.bound)
    if isinstance(f, (And, TensorOr, IntuitOr)):
        if type(f) not in kinds:
            return False
        return _uses_only(f.left, kinds, prob_neg_ok=prob_neg_ok) and _uses_only(
            f.right, kinds, prob_neg_ok=prob_neg_ok
        )
    if isinstance(f, Selective):
        if Selective not in kinds:
            return False
        return is_classical(f.antecedent) and _uses_only(
            f.consequent, kinds, prob_neg_ok=prob_neg_ok
        )
    if isinstance(f, Counterfactual):
        if Counterfactual not in kinds:
            return False
        return _uses_only(f.consequent, kinds, prob_neg_ok=prob_neg_ok)
    return False


_BOOL = {And, TensorOr}


def in_c(f):
    return _uses_only(f, _BOOL | {Counterfactual})


def in_cneg(f):
    return _uses_only(f, _BOOL | {Counterfactual, DualNeg})


def in_co(f):
    return _uses_only(f, _BOOL | {Counterfactual, Selective})


def in_coneg(f):
    return _uses_only(f, _BOOL | {Counterfactual, Selective, DualNeg})


def in_cd(f):
    return _uses_only(f, _BOOL | {Counterfactual, Selective, Dep})


def in_cu(f):
    """Boolean combinations of literals and counterfactuals with
    counterfactual-free consequents."""
    if not in_cneg(f):
        return False

    def no_nested(g, inside_cf):
        if isinstance(g, (Eq, Neq)):
            return True
        if isinstance(g, DualNeg):
            return no_nested(g.inner, inside_cf)
        if isinstance(g, (And, TensorOr)):
            return no_nested(g.left, inside_cf) and no_nested(g.right, inside_cf)
        if isinstance(g, Counterfactual):
            return not inside_cf and no_nested(g.consequent, True)
        return False

    return no_nested(f, False)


_PROB_KINDS = _BOOL | {IntuitOr, Selective, Counterfactual, ProbCmp}


def in_pcd(f):
    return _uses_only(f, _PROB_KINDS, prob_neg_ok=True)


def in_pc(f):
    return _uses_only(f, _PROB_KINDS - {Selective}, prob_neg_ok=True)


def in_po(f):
    return _uses_only(f, _PROB_KINDS - {Counterfactual}, prob_neg_ok=True)


def in_p(f):
    return _uses_only(f, _PROB_KINDS - {Selective, Counterfactual}, prob_neg_ok=True)


def is_prob_literal(f) -> bool:
    """A probability comparison or its dual negation."""
    if isinstance(f, ProbCmp):
        return True
    return isinstance(f, DualNeg) and is_prob_literal(f.inner)


def is_flat(f) -> bool:
    """Fragment guaranteed to reduce to per-assignment truth."""
    return in_coneg(f)


def is_downward_closed(f) -> bool:
    """Syntactic guarantee of downward closure: no probability atoms, no
    contradictory dependence negation, no independence atom; dual negation
    only over flat subformulas."""

    if isinstance(f, (Eq, Neq, Dep)):
        return True
    if isinstance(f, DualNeg):
        return in_coneg(f.inner)
    if isinstance(f, (And, TensorOr, IntuitOr)):
        return is_downward_closed(f.left) and is_downward_closed(f.right)
    if isinstance(f, Selective):
        return is_classical(f.antecedent) and is_downward_closed(f.consequent)
    if isinstance(f, Counterfactual):
        return is_downward_closed(f.consequent)
    return False


_FRAGMENTS = (
    ("C", in_c),
    ("C_u", in_cu),
    ("C_neg", in_cneg),
    ("CO", in_co),
    ("CO_neg", in_coneg),
    ("CD", in_cd),
    ("P", in_p),
    ("PC", in_pc),
    ("PO", in_po),
    ("PCD", in_pcd),
)


def classify(f: Formula) -> str:
    """Smallest named fragment containing the formula.

    Resolution order: C, C_u, C_neg, CO, CO_neg, CD, then the probabilistic
    fragments P, PC, PO, PCD; anything else (ndep, indep, or mixes outside
    every named grammar) is 'extended'.
    """
    for name, member in _FRAGMENTS:
        if member(f):
            return name
    return "extended"


# ---------------------------------------------------------------- complement


def complement(f: Formula) -> Formula:
    """Canonical complementary negation of a causal-observational formula.

    Exact on singleton teams: every singleton satisfies exactly one of the
    formula and its complement.
    """
    if isinstance(f, Eq):
        return Neq(f.var, f.value)
    if isinstance(f, Neq):
        return Eq(f.var, f.value)
    if isinstance(f, And):
        return TensorOr(complement(f.left), complement(f.right))
    if isinstance(f, TensorOr):
        return And(complement(f.left), complement(f.right))
    if isinstance(f, Selective):
        return And(f.antecedent, complement(f.consequent))
    if isinstance(f, Counterfactual):
        return Counterfactual(f.bindings, complement(f.consequent))
    raise NotInCO(f"complementation is defined on CO formulas, got {type(f).__name__}")


# ------------------------------------------------------------------- parsing


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#.*)
  | (?P<cfarrow>\[\]->)
  | (?P<selarrow>=>)
  | (?P<iou>\+\+)
  | (?P<le><=) | (?P<ge>>=) | (?P<lt><) | (?P<gt>>)
  | (?P<neq>!=) | (?P<bang>!)
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<lpar>\() | (?P<rpar>\)) | (?P<semi>;) | (?P<comma>,)
  | (?P<eq>=) | (?P<amp>&) | (?P<bar>\|) | (?P<slash>/)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"do", "dep", "ndep", "indep", "Pr"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(
                f"expected {what or kind}, found {tok[1]!r}", tok[2]
            )
        return tok

    def fail(self, message):
        tok = self.peek()
        raise FormulaSyntaxError(message, tok[2])

    # grammar ---------------------------------------------------------------

    def parse(self) -> Formula:
        f = self.implication()
        tok = self.peek()
        if tok[0] != "eof":
            self.fail(f"trailing input {tok[1]!r}")
        return f

    def implication(self) -> Formula:
        if self.peek()[0] == "ident" and self.peek()[1] == "do":
            self.next()
            bindings = self.cf_bindings()
            self.expect("cfarrow", "'[]->'")
            return Counterfactual(bindings, self.implication())
        left = self.intuit()
        if self.peek()[0] == "selarrow":
            tok = self.next()
            if not is_classical(left):
                raise AntecedentNotClassical(
                    "selective antecedent must be classical", tok[2]
                )
            return Selective(left, self.implication())
        return left

    def cf_bindings(self):
        bindings = [self.one_binding()]
        while self.peek()[0] == "amp":
            self.next()
            bindings.append(self.one_binding())
        return tuple(bindings)

    def one_binding(self):
        tok = self.peek()
        if tok[0] != "ident" or tok[1] in _KEYWORDS:
            raise AntecedentNotConjunctionOfEq(
                "counterfactual antecedent must conjoin V=v atoms", tok[2]
            )
        var = self.next()[1]
        if self.peek()[0] != "eq":
            raise AntecedentNotConjunctionOfEq(
                "counterfactual antecedent must conjoin V=v atoms", self.peek()[2]
            )
        self.next()
        return (var, self.value())

    def intuit(self) -> Formula:
        f = self.tensor()
        while self.peek()[0] == "iou":
            self.next()
            f = IntuitOr(f, self.tensor())
        return f

    def tensor(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "bar":
            self.next()
            f = TensorOr(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "amp":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.peek()[0] == "bang":
            tok = self.next()
            inner = self.unary()
            if not (in_coneg(inner) or is_prob_literal(inner)):
                raise FormulaSyntaxError(
                    "dual negation applies to CO_neg subformulas or single "
                    "probability comparisons",
                    tok[2],
                )
            return DualNeg(inner)
        return self.primary()

    def primary(self) -> Formula:
        kind, text, pos = self.peek()
        if kind == "lpar":
            self.next()
            f = self.implication()
            self.expect("rpar", "')'")
            return f
        if kind == "ident" and text == "dep":
            return self.dep_atom(Dep)
        if kind == "ident" and text == "ndep":
            return self.dep_atom(NDep, allow_empty=False)
        if kind == "ident" and text == "indep":
            self.next()
            self.expect("lpar", "'('")
            x = self.expect("ident", "variable")[1]
            self.expect("comma", "','")
            y = self.expect("ident", "variable")[1]
            self.expect("rpar", "')'")
            return MargIndep(x, y)
        if kind == "ident" and text == "Pr":
            return self.prob_atom()
        if kind == "ident" and text == "do":
            return self.implication()
        if kind == "ident":
            var = self.next()[1]
            op = self.next()
            if op[0] == "eq":
                return Eq(var, self.value())
            if op[0] == "neq":
                return Neq(var, self.value())
            raise FormulaSyntaxError(f"expected '=' or '!=', found {op[1]!r}", op[2])
        self.fail(f"expected a formula, found {text!r}")

    def dep_atom(self, node, allow_empty=True):
        self.next()
        self.expect("lpar", "'('")
        xs = []
        if self.peek()[0] == "ident":
            xs.append(self.next()[1])
            while self.peek()[0] == "comma":
                self.next()
                xs.append(self.expect("ident", "variable")[1])
        if not xs and not allow_empty:
            self.fail("ndep needs at least one determining variable")
        self.expect("semi", "';'")
        y = self.expect("ident", "variable")[1]
        self.expect("rpar", "')'")
        return node(tuple(xs), y)

    def prob_atom(self) -> Formula:
        self.next()  # Pr
        self.expect("lpar", "'('")
        target = self.implication()
        self.expect("rpar", "')'")
        if not in_co(target):
            raise NotInCO("probability arguments must be CO formulas")
        rel_tok = self.next()
        bound = self.prob_bound()
        if rel_tok[0] == "le":
            return ProbCmp(target, "<=", bound)
        if rel_tok[0] == "ge":
            return ProbCmp(target, ">=", bound)
        if rel_tok[0] == "eq":
            return And(ProbCmp(target, "<=", bound), ProbCmp(target, ">=", bound))
        if rel_tok[0] == "lt":
            return And(
                ProbCmp(target, "<=", bound),
                DualNeg(ProbCmp(target, ">=", bound)),
            )
        if rel_tok[0] == "gt":
            return And(
                ProbCmp(target, ">=", bound),
                DualNeg(ProbCmp(target, "<=", bound)),
            )
        raise FormulaSyntaxError(
            f"expected a comparison after Pr(...), found {rel_tok[1]!r}", rel_tok[2]
        )

    def prob_bound(self):
        kind, text, pos = self.peek()
        if kind == "ident" and text == "Pr":
            self.next()
            self.expect("lpar", "'('")
            other = self.implication()
            self.expect("rpar", "')'")
            if not in_co(other):
                raise NotInCO("probability arguments must be CO formulas")
            return other
        if kind == "number":
            self.next()
            if self.peek()[0] == "slash":
                self.next()
                den = self.expect("number", "denominator")
                if "." in text or "." in den[1]:
                    raise FormulaSyntaxError("p/q takes integers", den[2])
                value = Fraction(int(text), int(den[1]))
            else:
                value = Fraction(text)
            if not 0 <= value <= 1:
                raise FormulaSyntaxError(
                    f"probability constant {text} out of [0,1]", pos
                )
            return value
        self.fail("expected a rational constant or Pr(...)")

    def value(self) -> Atom:
        kind, text, pos = self.next()
        if kind == "number":
            if "." in text:
                raise FormulaSyntaxError("values are integer or string tokens", pos)
            return int(text)
        if kind == "ident":
            return text
        raise FormulaSyntaxError(f"expected a value, found {text!r}", pos)


def parse(text: str) -> Formula:
    """Parse one formula; raises FormulaSyntaxError with a position."""
    return _Parser(text).parse()


# ------------------------------------------------------------------- printing

_LEVEL_IMPL, _LEVEL_IOU, _LEVEL_TENSOR, _LEVEL_AND, _LEVEL_UNARY = 0, 1, 2, 3, 4


def _value_text(v: Atom) -> str:
    return str(v)


def _bound_text(b) -> str:
    if isinstance(b, Fraction):
        return str(b)
    return f"Pr({to_text(b)})"


def _paren(text: str, level: int, minimum: int) -> str:
    return f"({text})" if level < minimum else text


def _render(f: Formula):
    if isinstance(f, Eq):
        return f"{f.var}={_value_text(f.value)}", _LEVEL_UNARY
    if isinstance(f, Neq):
        return f"{f.var}!={_value_text(f.value)}", _LEVEL_UNARY
    if isinstance(f, Dep):
        return f"dep({','.join(f.xs)}; {f.y})", _LEVEL_UNARY
    if isinstance(f, NDep):
        return f"ndep({','.join(f.xs)}; {f.y})", _LEVEL_UNARY
    if isinstance(f, MargIndep):
        return f"indep({f.x}, {f.y})", _LEVEL_UNARY
    if isinstance(f, ProbCmp):
        return f"Pr({to_text(f.target)}) {f.rel} {_bound_text(f.bound)}", _LEVEL_UNARY
    if isinstance(f, DualNeg):
        text, lvl = _render(f.inner)
        return f"!{_paren(text, lvl, _LEVEL_UNARY)}", _LEVEL_UNARY
    if isinstance(f, And):
        lt, ll = _render(f.left)
        rt, rl = _render(f.right)
        return (
            f"{_paren(lt, ll, _LEVEL_AND)} & {_paren(rt, rl, _LEVEL_AND + 1)}",
            _LEVEL_AND,
        )
    if isinstance(f, TensorOr):
        lt, ll = _render(f.left)
        rt, rl = _render(f.right)
        return (
            f"{_paren(lt, ll, _LEVEL_TENSOR)} | {_paren(rt, rl, _LEVEL_TENSOR + 1)}",
            _LEVEL_TENSOR,
        )
    if isinstance(f, IntuitOr):
        lt, ll = _render(f.left)
        rt, rl = _render(f.right)
        return (
            f"{_paren(lt, ll, _LEVEL_IOU)} ++ {_paren(rt, rl, _LEVEL_IOU + 1)}",
            _LEVEL_IOU,
        )
    if isinstance(f, Selective):
        lt, ll = _render(f.antecedent)
        rt, rl = _render(f.consequent)
        return (
            f"{_paren(lt, ll, _LEVEL_IOU)} => {_paren(rt, rl, _LEVEL_IMPL)}",
            _LEVEL_IMPL,
        )
    if isinstance(f, Counterfactual):
        bind = " & ".join(f"{v}={_value_text(x)}" for v, x in f.bindings)
        rt, rl = _render(f.consequent)
        return f"do {bind} []-> {_paren(rt, rl, _LEVEL_IMPL)}", _LEVEL_IMPL
    raise TypeError(f"not a formula: {f!r}")


def to_text(f: Formula) -> str:
    """Canonical concrete syntax; `parse(to_text(f)) == f`."""
    return _render(f)[0]
