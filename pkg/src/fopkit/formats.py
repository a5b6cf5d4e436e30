"""Text formats: formulas (.fof), vocabularies (.fovoc), structures
(.fostr) and structure transformers (.fop).

Formulas use an S-expression grammar; the other formats are line-oriented
headers with brace-delimited bodies.  Each printer emits one canonical
spacing so byte-level golden tests are meaningful, and parse(print(v)) is
the identity on every value the toolkit produces.  `#` starts a line
comment in every format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    ArityMismatch,
    MissingConstant,
    ParseError,
    UnknownSymbol,
    UnknownVocabulary,
)
from .logic import (
    And,
    Atom,
    Const,
    Exists,
    ExistsRel,
    ForAll,
    ForAllRel,
    Formula,
    Iff,
    Implies,
    Not,
    Num,
    NUMERIC_RELATIONS,
    Or,
    Truth,
    Var,
    Vocabulary,
)
from .structures import Structure


@dataclass(frozen=True)
class SourceSpan:
    begin: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        assert self.begin <= self.end


@dataclass(frozen=True)
class Token:
    kind: str  # "(", ")", "{", "}", ";", ",", "/", "op", "symbol", "number"
    text: str
    span: SourceSpan


_PUNCT = "(){};,/"
_SYMBOL = re.compile(r"[A-Za-z_][A-Za-z0-9_'-]*")
_NUMBER = re.compile(r"[0-9]+")
_OPS = ("<->", "->", "<=", "=")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        col = i - line_start + 1
        if ch in _PUNCT:
            tokens.append(Token(ch, ch, SourceSpan(i, i + 1, line, col)))
            i += 1
            continue
        matched = False
        for op in _OPS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, SourceSpan(i, i + len(op), line, col)))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(Token("number", m.group(), SourceSpan(i, m.end(), line, col)))
            i = m.end()
            continue
        m = _SYMBOL.match(text, i)
        if m:
            tokens.append(Token("symbol", m.group(), SourceSpan(i, m.end(), line, col)))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(i, i + 1, line, col))
    eof = SourceSpan(n, n, line, n - line_start + 1)
    tokens.append(Token("eof", "", eof))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.span)
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == "eof"


# ---------------------------------------------------------------------------
# Formulas

_QUANTIFIERS = {"forall": ForAll, "exists": Exists}
_SO_QUANTIFIERS = {"forall2": ForAllRel, "exists2": ExistsRel}


def _parse_term(tok: Token, voc: Vocabulary, bound_vars: set[str]):
    if tok.kind == "number":
        return Num(int(tok.text))
    if tok.kind != "symbol":
        raise ParseError(f"expected a term, found {tok.text!r}", tok.span)
    name = tok.text
    if name == "max":
        return Num("max")
    if voc.has_constant(name):
        return Const(name)
    if name in ("true", "false") or name in NUMERIC_RELATIONS:
        raise ParseError(f"{name!r} cannot be used as a term", tok.span)
    if voc.has_relation(name):
        raise ParseError(f"relation {name!r} cannot be used as a term", tok.span)
    return Var(name)


def _parse_formula(cur: _Cursor, voc: Vocabulary, so_bound: dict[str, int],
                   bound_vars: set[str]) -> Formula:
    tok = cur.next()
    if tok.kind == "symbol" and tok.text == "true":
        return Truth(True)
    if tok.kind == "symbol" and tok.text == "false":
        return Truth(False)
    if tok.kind != "(":
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}", tok.span)
    head = cur.next()
    if head.kind == "op" or (head.kind == "symbol" and head.text in ("bit", "suc")):
        name = head.text
        if name in ("->", "<->"):
            left = _parse_formula(cur, voc, so_bound, bound_vars)
            right = _parse_formula(cur, voc, so_bound, bound_vars)
            cur.expect(")")
            return Implies(left, right) if name == "->" else Iff(left, right)
        args = []
        while cur.peek().kind != ")":
            args.append(_parse_term(cur.next(), voc, bound_vars))
        cur.expect(")")
        if len(args) != 2:
            raise ArityMismatch(name, 2, len(args), head.span)
        return Atom(name, tuple(args))
    if head.kind != "symbol":
        raise ParseError(f"expected a connective or relation, found {head.text!r}", head.span)
    name = head.text
    if name == "not":
        sub = _parse_formula(cur, voc, so_bound, bound_vars)
        cur.expect(")")
        return Not(sub)
    if name in ("and", "or"):
        parts = []
        while cur.peek().kind != ")":
            parts.append(_parse_formula(cur, voc, so_bound, bound_vars))
        cur.expect(")")
        if len(parts) < 2:
            raise ParseError(f"{name!r} needs at least two operands", head.span)
        return And(tuple(parts)) if name == "and" else Or(tuple(parts))
    if name in _QUANTIFIERS:
        cur.expect("(")
        names = []
        while cur.peek().kind != ")":
            vtok = cur.expect("symbol")
            if voc.has_constant(vtok.text) or vtok.text in ("max", "true", "false"):
                raise ParseError(
                    f"{vtok.text!r} cannot be bound as a variable", vtok.span
                )
            names.append(vtok.text)
        cur.expect(")")
        if not names:
            raise ParseError("empty variable list", head.span)
        body = _parse_formula(cur, voc, so_bound, bound_vars | set(names))
        cur.expect(")")
        node = _QUANTIFIERS[name]
        for v in reversed(names):
            body = node(v, body)
        return body
    if name in _SO_QUANTIFIERS:
        cur.expect("(")
        rtok = cur.expect("symbol")
        atok = cur.expect("number")
        cur.expect(")")
        arity = int(atok.text)
        if arity < 1:
            raise ParseError("relation arity must be positive", atok.span)
        if voc.has_relation(rtok.text) or voc.has_constant(rtok.text):
            raise ParseError(
                f"{rtok.text!r} collides with a vocabulary symbol", rtok.span
            )
        inner = dict(so_bound)
        inner[rtok.text] = arity
        body = _parse_formula(cur, voc, inner, bound_vars)
        cur.expect(")")
        return _SO_QUANTIFIERS[name](rtok.text, arity, body)
    # relation atom
    args = []
    while cur.peek().kind != ")":
        args.append(_parse_term(cur.next(), voc, bound_vars))
    cur.expect(")")
    if name in so_bound:
        expected = so_bound[name]
    elif voc.has_relation(name):
        expected = voc.arity(name)
    else:
        raise UnknownSymbol(name, head.span)
    if len(args) != expected:
        raise ArityMismatch(name, expected, len(args), head.span)
    return Atom(name, tuple(args))


def parse_formula(text: str, voc: Vocabulary) -> Formula:
    cur = _Cursor(tokenize(text))
    f = _parse_formula(cur, voc, {}, set())
    tok = cur.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.span)
    return f


def print_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Num):
        return "max" if t.value == "max" else str(t.value)
    raise TypeError(f"not a term: {t!r}")


def print_formula(f: Formula) -> str:
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        inner = " ".join([f.rel] + [print_term(t) for t in f.args])
        return f"({inner})"
    if isinstance(f, Not):
        return f"(not {print_formula(f.sub)})"
    if isinstance(f, And):
        return "(and " + " ".join(print_formula(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(print_formula(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"(-> {print_formula(f.left)} {print_formula(f.right)})"
    if isinstance(f, Iff):
        return f"(<-> {print_formula(f.left)} {print_formula(f.right)})"
    if isinstance(f, (ForAll, Exists)):
        word = "forall" if isinstance(f, ForAll) else "exists"
        names = [f.var]
        body = f.body
        while isinstance(body, type(f)):
            names.append(body.var)
            body = body.body
        return f"({word} ({' '.join(names)}) {print_formula(body)})"
    if isinstance(f, (ExistsRel, ForAllRel)):
        word = "exists2" if isinstance(f, ExistsRel) else "forall2"
        return f"({word} ({f.rel} {f.arity}) {print_formula(f.body)})"
    raise TypeError(f"not a formula node: {f!r}")


# ---------------------------------------------------------------------------
# Vocabularies


def parse_vocabularies(text: str) -> list[Vocabulary]:
    """Parse `vocab NAME { E/2; s }` blocks."""
    cur = _Cursor(tokenize(text))
    out = []
    while not cur.at_end():
        cur.expect("symbol", "vocab")
        name = cur.expect("symbol").text
        cur.expect("{")
        relations = []
        constants = []
        while cur.peek().kind != "}":
            sym = cur.expect("symbol")
            if cur.peek().kind == "/":
                cur.next()
                arity = int(cur.expect("number").text)
                relations.append((sym.text, arity))
            else:
                constants.append(sym.text)
            if cur.peek().kind == ";":
                cur.next()
        cur.expect("}")
        out.append(Vocabulary(tuple(relations), tuple(constants), name=name))
    return out


def print_vocabulary(voc: Vocabulary) -> str:
    entries = [f"{r}/{a}" for r, a in voc.relations] + list(voc.constants)
    return f"vocab {voc.name} {{ " + "; ".join(entries) + " }"


# ---------------------------------------------------------------------------
# Structures


def _parse_tuple(cur: _Cursor, arity_hint=None) -> tuple[int, ...]:
    cur.expect("(")
    values = []
    while cur.peek().kind != ")":
        values.append(int(cur.expect("number").text))
        if cur.peek().kind == ",":
            cur.next()
    cur.expect(")")
    return tuple(values)


def parse_structure(text: str, registry: dict[str, Vocabulary]) -> Structure:
    """Parse `structure size=N vocab=NAME { E = {(0,1)}; s = 0 }`.

    Relations omitted from the body are empty; every vocabulary constant
    must be assigned.
    """
    cur = _Cursor(tokenize(text))
    cur.expect("symbol", "structure")
    cur.expect("symbol", "size")
    cur.expect("op", "=")
    n = int(cur.expect("number").text)
    vtok = cur.expect("symbol", "vocab")
    cur.expect("op", "=")
    name_tok = cur.next()
    if name_tok.kind != "symbol":
        raise ParseError("expected a vocabulary name", name_tok.span)
    if name_tok.text not in registry:
        raise UnknownVocabulary(name_tok.text, name_tok.span)
    voc = registry[name_tok.text]
    cur.expect("{")
    relations: dict[str, set] = {}
    constants: dict[str, int] = {}
    while cur.peek().kind != "}":
        sym = cur.expect("symbol")
        cur.expect("op", "=")
        if voc.has_relation(sym.text):
            cur.expect("{")
            table = set()
            while cur.peek().kind != "}":
                table.add(_parse_tuple(cur))
                if cur.peek().kind == ",":
                    cur.next()
            cur.expect("}")
            arity = voc.arity(sym.text)
            for t in table:
                if len(t) != arity:
                    raise ArityMismatch(sym.text, arity, len(t), sym.span)
            relations[sym.text] = table
        elif voc.has_constant(sym.text):
            constants[sym.text] = int(cur.expect("number").text)
        else:
            raise UnknownSymbol(sym.text, sym.span)
        if cur.peek().kind == ";":
            cur.next()
    cur.expect("}")
    tok = cur.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.span)
    for c in voc.constants:
        if c not in constants:
            raise MissingConstant(c)
    return Structure(voc, n, relations, constants)


def print_structure(a: Structure) -> str:
    parts = []
    for rel, _ in a.vocabulary.relations:
        tuples = sorted(a.relations[rel])
        body = ",".join("(" + ",".join(str(x) for x in t) + ")" for t in tuples)
        parts.append(f"{rel} = {{{body}}}")
    for c in a.vocabulary.constants:
        parts.append(f"{c} = {a.constants[c]}")
    name = a.vocabulary.name or "unnamed"
    return f"structure size={a.n} vocab={name} {{ " + "; ".join(parts) + " }"


# ---------------------------------------------------------------------------
# Structure transformers (guarded-projection queries)


def parse_fop(text: str, registry: dict[str, Vocabulary]):
    """Parse `fop NAME arity=K from=V to=W { R = <formula>; ... }`.

    The body must define every target symbol exactly once, over the
    canonical variables x1, x2, ...  Returns a Fop.
    """
    from .fops import Fop

    cur = _Cursor(tokenize(text))
    cur.expect("symbol", "fop")
    name = cur.expect("symbol").text
    cur.expect("symbol", "arity")
    cur.expect("op", "=")
    arity = int(cur.expect("number").text)

    def vocab_ref() -> Vocabulary:
        tok = cur.next()
        if tok.kind != "symbol":
            raise ParseError("expected a vocabulary name", tok.span)
        if tok.text not in registry:
            raise UnknownVocabulary(tok.text, tok.span)
        return registry[tok.text]

    cur.expect("symbol", "from")
    cur.expect("op", "=")
    source = vocab_ref()
    cur.expect("symbol", "to")
    cur.expect("op", "=")
    target = vocab_ref()
    cur.expect("{")
    defs: dict[str, Formula] = {}
    while cur.peek().kind != "}":
        sym = cur.expect("symbol")
        if not (target.has_relation(sym.text) or target.has_constant(sym.text)):
            raise UnknownSymbol(sym.text, sym.span)
        if sym.text in defs:
            raise ParseError(f"{sym.text!r} defined twice", sym.span)
        cur.expect("op", "=")
        defs[sym.text] = _parse_formula(cur, source, {}, set())
        if cur.peek().kind == ";":
            cur.next()
    cur.expect("}")
    missing = [
        s
        for s in [r for r, _ in target.relations] + list(target.constants)
        if s not in defs
    ]
    if missing:
        raise MissingConstant(missing[0])
    rel_formulas = tuple(defs[r] for r, _ in target.relations)
    const_formulas = tuple(defs[c] for c in target.constants)
    return Fop(source, target, arity, rel_formulas, const_formulas, name=name)


def print_fop(q) -> str:
    lines = [
        f"fop {q.name or 'unnamed'} arity={q.arity} "
        f"from={q.source.name or 'unnamed'} to={q.target.name or 'unnamed'} {{"
    ]
    entries = []
    for (rel, _), formula in zip(q.target.relations, q.relation_formulas):
        entries.append(f"  {rel} = {print_formula(formula)}")
    for c, formula in zip(q.target.constants, q.constant_formulas):
        entries.append(f"  {c} = {print_formula(formula)}")
    lines.append(";\n".join(entries))
    lines.append("}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# File helpers


def load_vocabularies(path: str, registry: dict[str, Vocabulary] | None = None):
    registry = dict(registry or {})
    with open(path, "r", encoding="utf-8") as fh:
        for voc in parse_vocabularies(fh.read()):
            registry[voc.name] = voc
    return registry


def load_formula(path: str, voc: Vocabulary) -> Formula:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_formula(fh.read(), voc)


def load_structure(path: str, registry: dict[str, Vocabulary]) -> Structure:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_structure(fh.read(), registry)


def load_fop(path: str, registry: dict[str, Vocabulary]):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_fop(fh.read(), registry)
