"""Parser for the surface language (see syntax module docstring).

Hand-written recursive descent. The only ambiguity — a parenthesized
term starting a comparison vs. a parenthesized formula — is resolved by
backtracking: at atom position we first try `term cmp term` and fall
back to the formula alternatives. Name kinds are known before the
theory block is parsed, so mis-starts fail fast.

Bound variables that would shadow an outer binder (or reuse a name
within the sentence) are alpha-renamed with a numeric suffix; shadowing
a vocabulary symbol is an error.
"""

from __future__ import annotations

import re

from .syntax import (
    INT, RESERVED_WORDS, Arith, BoolLit, Card, Compare, Connective,
    FuncApp, IntLit, Not, Pos, PredApp, Problem, ProblemError, Quant,
    SumAgg, Var, Vocabulary, typecheck,
)


class ParseError(ProblemError):
    pass


class _Backtrack(Exception):
    """Internal: abandon the tentative term-comparison parse."""


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|=>|~=|=<|>=|[=<>~&|!?:.,+\-*/#(){}])
""", re.VERBOSE)


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"{self.kind}({self.text!r})@{self.pos}"


def _tokenize(src: str):
    toks = []
    line, col, i = 1, 1, 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", Pos(line, col))
        text = m.group(0)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, text, Pos(line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    toks.append(_Tok("eof", "", Pos(line, col)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0
        self.types: list = []
        self.cards: dict = {}
        self.preds: dict = {}
        self.funcs: dict = {}
        self.backtracking = 0

    # -- token plumbing

    def peek(self, ahead=0) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def fail(self, msg, pos=None):
        if self.backtracking:
            raise _Backtrack()
        raise ParseError(msg, pos or self.peek().pos)

    def expect(self, text) -> _Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.peek().text!r}")
        return self.next()

    def name(self, what="name") -> _Tok:
        t = self.peek()
        if t.kind != "name":
            self.fail(f"expected {what}, found {t.text!r}")
        return self.next()

    # -- declarations

    def fresh_symbol(self, tok):
        if tok.text in RESERVED_WORDS:
            raise ParseError(f"{tok.text!r} is a reserved word", tok.pos)
        if tok.text in self.types or tok.text in self.preds or tok.text in self.funcs:
            raise ParseError(f"duplicate declaration of {tok.text}", tok.pos)
        return tok.text

    def type_name(self):
        t = self.name("type name")
        if t.text == INT:
            return INT
        if t.text not in self.types:
            self.fail(f"unknown type {t.text}", t.pos)
        return t.text

    def parse_decls(self):
        while not self.at("theory"):
            t = self.peek()
            if t.kind == "eof":
                raise ParseError("expected a theory block", t.pos)
            if self.accept("type"):
                name = self.fresh_symbol(self.name("type name"))
                n = None
                if self.accept("size"):
                    num = self.peek()
                    if num.kind != "int":
                        self.fail("expected a size")
                    n = int(self.next().text)
                self.types.append(name)
                self.cards[name] = n
            elif self.accept("pred"):
                name = self.fresh_symbol(self.name("predicate name"))
                self.expect("(")
                args = []
                if not self.at(")"):
                    args.append(self.arg_type())
                    while self.accept(","):
                        args.append(self.arg_type())
                self.expect(")")
                self.preds[name] = tuple(args)
            elif self.accept("func"):
                name = self.fresh_symbol(self.name("function name"))
                self.expect("(")
                args = []
                if not self.at(")"):
                    args.append(self.arg_type())
                    while self.accept(","):
                        args.append(self.arg_type())
                self.expect(")")
                self.expect("-")
                self.expect(">")
                self.funcs[name] = (tuple(args), self.type_name())
            elif self.accept("const"):
                name = self.fresh_symbol(self.name("constant name"))
                self.expect("-")
                self.expect(">")
                self.funcs[name] = ((), self.type_name())
            else:
                raise ParseError(f"expected a declaration, found {t.text!r}", t.pos)

    def arg_type(self):
        t = self.name("type name")
        if t.text == INT:
            raise ParseError("Int is not allowed as an argument type", t.pos)
        if t.text not in self.types:
            raise ParseError(f"unknown type {t.text}", t.pos)
        return t.text

    # -- binders and scope

    def var_name(self):
        t = self.name("variable")
        if t.text in RESERVED_WORDS:
            self.fail(f"{t.text!r} is a reserved word", t.pos)
        if t.text in self.preds or t.text in self.funcs or t.text in self.types:
            self.fail(f"variable {t.text} shadows a declared symbol", t.pos)
        return t

    def parse_binders(self, scope):
        """`x in T` / `x, y in T` / `x in T, y in U`; returns ((name, ty), ...)
        with names alpha-renamed against this sentence's earlier binders."""
        out = []
        while True:
            group = [self.var_name()]
            while self.accept(","):
                group.append(self.var_name())
                if self.at("in"):
                    break
            self.expect("in")
            ty = self.type_name()
            if ty == INT:
                self.fail("cannot quantify or aggregate over Int", group[0].pos)
            for g in group:
                fresh = g.text
                k = 2
                while fresh in self.sentence_names:
                    fresh = f"{g.text}_{k}"
                    k += 1
                self.sentence_names.add(fresh)
                scope[g.text] = (fresh, ty)
                out.append((fresh, ty))
            if not self.accept(","):
                break
        return tuple(out)

    def with_binders(self, scope):
        return dict(scope)

    # -- formulas

    def parse_sentence(self):
        self.sentence_names = set()
        f = self.parse_formula({})
        self.expect(".")
        return f

    def parse_formula(self, scope):
        return self.parse_iff(scope)

    def parse_iff(self, scope):
        f = self.parse_implies(scope)
        while self.at("<=>"):
            pos = self.next().pos
            f = Connective("<=>", f, self.parse_implies(scope), pos)
        return f

    def parse_implies(self, scope):
        f = self.parse_or(scope)
        if self.at("=>"):
            pos = self.next().pos
            return Connective("=>", f, self.parse_implies(scope), pos)
        return f

    def parse_or(self, scope):
        f = self.parse_and(scope)
        while self.at("|"):
            pos = self.next().pos
            f = Connective("|", f, self.parse_and(scope), pos)
        return f

    def parse_and(self, scope):
        f = self.parse_unary(scope)
        while self.at("&"):
            pos = self.next().pos
            f = Connective("&", f, self.parse_unary(scope), pos)
        return f

    def parse_unary(self, scope):
        t = self.peek()
        if self.accept("~"):
            return Not(self.parse_unary(scope), t.pos)
        if t.text in ("!", "?"):
            self.next()
            inner = self.with_binders(scope)
            binders = self.parse_binders(inner)
            self.expect(":")
            kind = "forall" if t.text == "!" else "exists"
            return Quant(kind, binders, self.parse_formula(inner), t.pos)
        return self.parse_atom(scope)

    def parse_atom(self, scope):
        t = self.peek()
        # tentative: term followed by a comparison operator
        mark = self.i
        self.backtracking += 1
        try:
            left = self.parse_term(scope)
            op = self.peek()
            if op.text not in ("=", "~=", "<", ">", "=<", ">="):
                raise _Backtrack()
        except _Backtrack:
            self.backtracking -= 1
            self.i = mark
        else:
            # committed: the right-hand side parses outside the guard
            self.backtracking -= 1
            self.next()
            right = self.parse_term(scope)
            return Compare(op.text, left, right, op.pos)

        if self.accept("true"):
            return BoolLit(True, t.pos)
        if self.accept("false"):
            return BoolLit(False, t.pos)
        if self.accept("("):
            f = self.parse_formula(scope)
            self.expect(")")
            return f
        if t.kind == "name" and t.text in self.preds:
            self.next()
            args = self.parse_args(scope) if self.at("(") else ()
            return PredApp(t.text, args, t.pos)
        self.fail(f"expected a formula, found {t.text!r}")

    def parse_args(self, scope):
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_term(scope))
            while self.accept(","):
                args.append(self.parse_term(scope))
        self.expect(")")
        return tuple(args)

    # -- terms

    def parse_term(self, scope):
        t = self.parse_mul(scope)
        while self.peek().text in ("+", "-"):
            op = self.next()
            t = Arith(op.text, t, self.parse_mul(scope), op.pos)
        return t

    def parse_mul(self, scope):
        t = self.parse_term_atom(scope)
        while self.peek().text in ("*", "/"):
            op = self.next()
            rhs = self.parse_term_atom(scope)
            if op.text == "/" and isinstance(rhs, IntLit) and rhs.value == 0:
                raise ParseError("division by zero", op.pos)
            t = Arith(op.text, t, rhs, op.pos)
        return t

    def parse_term_atom(self, scope):
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text), t.pos)
        if self.accept("-"):
            sub = self.parse_term_atom(scope)
            if isinstance(sub, IntLit):
                return IntLit(-sub.value, t.pos)
            return Arith("-", IntLit(0), sub, t.pos)
        if self.accept("("):
            inner = self.parse_term(scope)
            self.expect(")")
            return inner
        if self.accept("#"):
            self.expect("{")
            inner = self.with_binders(scope)
            binders = self.parse_binders(inner)
            self.expect(":")
            filt = self.parse_formula(inner)
            self.expect("}")
            return Card(binders, filt, t.pos)
        if t.text == "sum":
            self.next()
            self.expect("{")
            self.expect("{")
            inner = self.with_binders(scope)
            binders = self.parse_binders(inner)
            self.expect(":")
            filt = self.parse_formula(inner)
            self.expect(":")
            body = self.parse_term(inner)
            self.expect("}")
            self.expect("}")
            return SumAgg(binders, filt, body, t.pos)
        if t.kind == "name":
            if t.text in scope:
                self.next()
                fresh, ty = scope[t.text]
                return Var(fresh, ty, t.pos)
            if t.text in self.funcs:
                self.next()
                sig_args, sig_res = self.funcs[t.text]
                args = self.parse_args(scope) if self.at("(") else ()
                return FuncApp(t.text, args, sig_res, t.pos)
            if t.text in RESERVED_WORDS or t.text in self.preds or t.text in self.types:
                self.fail(f"expected a term, found {t.text!r}")
            self.fail(f"unknown symbol {t.text}")
        self.fail(f"expected a term, found {t.text!r}")

    # -- entry

    def parse_problem(self):
        self.parse_decls()
        self.expect("theory")
        self.expect("{")
        sentences = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise ParseError("unterminated theory block", self.peek().pos)
            sentences.append(self.parse_sentence())
        self.expect("}")
        if self.peek().kind != "eof":
            raise ParseError(f"trailing input {self.peek().text!r}", self.peek().pos)
        if not sentences:
            raise ParseError("theory block has no sentences", self.peek().pos)
        voc = Vocabulary(tuple(self.types), dict(self.preds), dict(self.funcs))
        return Problem(voc, dict(self.cards), tuple(sentences))


def parse_problem(src: str, check: bool = True) -> Problem:
    """Parse (and by default typecheck) a problem from source text."""
    p = _Parser(src).parse_problem()
    if check:
        typecheck(p)
    return p


def parse_formula_in(problem: Problem, src: str):
    """Parse a single sentence against an existing problem's vocabulary
    (test helper)."""
    q = _Parser("")
    q.types = list(problem.vocabulary.types)
    q.cards = dict(problem.cardinalities)
    q.preds = dict(problem.vocabulary.predicates)
    q.funcs = dict(problem.vocabulary.functions)
    q.toks = _tokenize(src)
    q.i = 0
    q.sentence_names = set()
    f = q.parse_formula({})
    if q.peek().kind != "eof":
        raise ParseError(f"trailing input {q.peek().text!r}", q.peek().pos)
    return f
