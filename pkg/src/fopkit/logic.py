"""Vocabularies, terms, formula ASTs and syntactic classification.

Formulas are immutable trees.  The built-in numeric symbols =, <=, bit and
suc (binary relations) and the numeric constants 0, 1 and max are always
available; their interpretations depend only on the universe size, never on
a structure's relation tables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (
    ArityMismatch,
    InvalidVocabulary,
    NotUniversal,
    UnknownSymbol,
)

NUMERIC_RELATIONS = {"=": 2, "<=": 2, "bit": 2, "suc": 2}
NUMERIC_CONSTANTS = ("0", "1", "max")
RESERVED_NAMES = frozenset(NUMERIC_RELATIONS) | frozenset(NUMERIC_CONSTANTS)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_'-]*$")


@dataclass(frozen=True)
class Vocabulary:
    """Relation symbols with arities plus constant symbols.

    The name is only used by the text formats; two vocabularies are equal
    iff they declare the same symbols.
    """

    relations: tuple[tuple[str, int], ...]
    constants: tuple[str, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        names = [r for r, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise InvalidVocabulary(f"duplicate symbol names in {names}")
        for sym in names:
            if sym in RESERVED_NAMES:
                raise InvalidVocabulary(f"{sym!r} collides with a numeric symbol")
            if not _IDENT.match(sym):
                raise InvalidVocabulary(f"{sym!r} is not a valid symbol name")
        for rel, arity in self.relations:
            if not isinstance(arity, int) or arity < 1:
                raise InvalidVocabulary(f"relation {rel!r} has arity {arity}")

    def arity(self, rel: str) -> int:
        for name, arity in self.relations:
            if name == rel:
                return arity
        raise UnknownSymbol(rel)

    def has_relation(self, name: str) -> bool:
        return any(r == name for r, _ in self.relations)

    def has_constant(self, name: str) -> bool:
        return name in self.constants

    def relation_index(self, name: str) -> int:
        for i, (r, _) in enumerate(self.relations):
            if r == name:
                return i
        raise UnknownSymbol(name)

    def constant_index(self, name: str) -> int:
        return self.constants.index(name)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """A vocabulary constant symbol."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Num:
    """A numeric value term: a literal element of the universe, or `max`.

    `max` always denotes n - 1.  Plain numerals denote themselves and are
    only valid on universes large enough to contain them.
    """

    value: int | str  # an int, or the string "max"

    def __str__(self):
        return str(self.value)


Term = Var | Const | Num

ZERO = Num(0)
ONE = Num(1)
MAX = Num("max")


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ExistsRel(Formula):
    """Second-order existential quantifier over a relation of fixed arity."""

    rel: str
    arity: int
    body: Formula


@dataclass(frozen=True)
class ForAllRel(Formula):
    rel: str
    arity: int
    body: Formula


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def eq(a: Term, b: Term) -> Atom:
    return Atom("=", (a, b))


def neq(a: Term, b: Term) -> Formula:
    return Not(eq(a, b))


def forall(names: Iterable[str], body: Formula) -> Formula:
    for name in reversed(tuple(names)):
        body = ForAll(name, body)
    return body


def exists(names: Iterable[str], body: Formula) -> Formula:
    for name in reversed(tuple(names)):
        body = Exists(name, body)
    return body


# ---------------------------------------------------------------------------
# Well-formedness and variable bookkeeping


def check_formula(f: Formula, voc: Vocabulary, so_bound: dict[str, int] | None = None):
    """Validate atoms against the vocabulary, the numeric symbols and any
    second-order bound relations.  Raises UnknownSymbol or ArityMismatch."""
    so_bound = dict(so_bound or {})

    def walk(g: Formula, bound: dict[str, int]):
        if isinstance(g, Truth):
            return
        if isinstance(g, Atom):
            if g.rel in NUMERIC_RELATIONS:
                expected = NUMERIC_RELATIONS[g.rel]
            elif g.rel in bound:
                expected = bound[g.rel]
            elif voc.has_relation(g.rel):
                expected = voc.arity(g.rel)
            else:
                raise UnknownSymbol(g.rel)
            if len(g.args) != expected:
                raise ArityMismatch(g.rel, expected, len(g.args))
            for t in g.args:
                if isinstance(t, Const) and not voc.has_constant(t.name):
                    raise UnknownSymbol(t.name)
            return
        if isinstance(g, Not):
            walk(g.sub, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (ForAll, Exists)):
            walk(g.body, bound)
        elif isinstance(g, (ExistsRel, ForAllRel)):
            inner = dict(bound)
            inner[g.rel] = g.arity
            walk(g.body, inner)
        else:
            raise TypeError(f"not a formula node: {g!r}")

    walk(f, so_bound)


def free_variables(f: Formula) -> tuple[str, ...]:
    """Free first-order variables in first-use order."""
    seen: list[str] = []

    def walk(g: Formula, bound: frozenset[str]):
        if isinstance(g, Atom):
            for t in g.args:
                if isinstance(t, Var) and t.name not in bound and t.name not in seen:
                    seen.append(t.name)
        elif isinstance(g, Not):
            walk(g.sub, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (ForAll, Exists)):
            walk(g.body, bound | {g.var})
        elif isinstance(g, (ExistsRel, ForAllRel)):
            walk(g.body, bound)

    walk(f, frozenset())
    return tuple(seen)


def free_so_relations(f: Formula, voc: Vocabulary) -> tuple[str, ...]:
    """Relation symbols used by atoms that are neither numeric, in the
    vocabulary, nor bound by a second-order quantifier."""
    seen: list[str] = []

    def walk(g, bound):
        if isinstance(g, Atom):
            if (
                g.rel not in NUMERIC_RELATIONS
                and not voc.has_relation(g.rel)
                and g.rel not in bound
                and g.rel not in seen
            ):
                seen.append(g.rel)
        elif isinstance(g, Not):
            walk(g.sub, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, (Implies, Iff)):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (ForAll, Exists)):
            walk(g.body, bound)
        elif isinstance(g, (ExistsRel, ForAllRel)):
            walk(g.body, bound | {g.rel})

    walk(f, frozenset())
    return tuple(seen)


def is_sentence(f: Formula, voc: Vocabulary) -> bool:
    return not free_variables(f) and not free_so_relations(f, voc)


def substitute(f: Formula, mapping: dict[str, Term]) -> Formula:
    """Capture-avoiding only in the sense needed here: quantified variables
    shadow the mapping; mapped terms must not contain shadowed variables."""

    def walk(g, mapping):
        if isinstance(g, (Truth,)):
            return g
        if isinstance(g, Atom):
            args = tuple(
                mapping.get(t.name, t) if isinstance(t, Var) else t for t in g.args
            )
            return Atom(g.rel, args)
        if isinstance(g, Not):
            return Not(walk(g.sub, mapping))
        if isinstance(g, And):
            return And(tuple(walk(p, mapping) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, mapping) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left, mapping), walk(g.right, mapping))
        if isinstance(g, Iff):
            return Iff(walk(g.left, mapping), walk(g.right, mapping))
        if isinstance(g, (ForAll, Exists)):
            inner = {k: v for k, v in mapping.items() if k != g.var}
            body = walk(g.body, inner)
            return type(g)(g.var, body)
        if isinstance(g, (ExistsRel, ForAllRel)):
            return type(g)(g.rel, g.arity, walk(g.body, mapping))
        raise TypeError(f"not a formula node: {g!r}")

    return walk(f, dict(mapping))


# ---------------------------------------------------------------------------
# Syntactic classification


@dataclass(frozen=True)
class SyntacticClass:
    kind: str
    sign: Optional[str] = None  # literals: "positive" | "negative"
    numeric: Optional[bool] = None  # literals: True iff the atom is numeric
    k: Optional[int] = None  # parametric classes report the least width

    def __str__(self):
        if self.kind == "literal":
            num = "numeric" if self.numeric else "non-numeric"
            return f"literal({self.sign}, {num})"
        if self.k is not None:
            return f"{self.kind}({self.k})"
        return self.kind


def _flat_parts(f: Formula, node_type) -> tuple[Formula, ...]:
    """Flatten nested conjunctions/disjunctions of the same connective."""
    if isinstance(f, node_type):
        out = []
        for p in f.parts:
            out.extend(_flat_parts(p, node_type))
        return tuple(out)
    return (f,)


def is_atomic(f: Formula) -> bool:
    return isinstance(f, Atom)


def literal_atom(f: Formula) -> Optional[Atom]:
    """The underlying atom if f is a literal, else None."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not) and isinstance(f.sub, Atom):
        return f.sub
    return None


def is_literal(f: Formula) -> bool:
    return literal_atom(f) is not None


def atom_is_numeric(atom: Atom, voc: Vocabulary) -> bool:
    return atom.rel in NUMERIC_RELATIONS


def is_numeric(f: Formula, voc: Vocabulary) -> bool:
    """True iff every atom uses a numeric relation.  Vocabulary constants may
    still appear as terms; the truth value then depends only on the universe
    size and the constant assignment."""

    def walk(g) -> bool:
        if isinstance(g, Truth):
            return True
        if isinstance(g, Atom):
            return g.rel in NUMERIC_RELATIONS
        if isinstance(g, Not):
            return walk(g.sub)
        if isinstance(g, (And, Or)):
            return all(walk(p) for p in g.parts)
        if isinstance(g, (Implies, Iff)):
            return walk(g.left) and walk(g.right)
        if isinstance(g, (ForAll, Exists)):
            return walk(g.body)
        return False  # second-order quantifiers are outside the numeric fragment

    return walk(f)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Truth, Atom)):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.sub)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(p) for p in f.parts)
    if isinstance(f, (Implies, Iff)):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    return False


def is_first_order(f: Formula) -> bool:
    if isinstance(f, (Truth, Atom)):
        return True
    if isinstance(f, Not):
        return is_first_order(f.sub)
    if isinstance(f, (And, Or)):
        return all(is_first_order(p) for p in f.parts)
    if isinstance(f, (Implies, Iff)):
        return is_first_order(f.left) and is_first_order(f.right)
    if isinstance(f, (ForAll, Exists)):
        return is_first_order(f.body)
    return False


def clause_literals(f: Formula) -> Optional[tuple[Formula, ...]]:
    """The literals of f viewed as a clause (disjunction of literals)."""
    parts = _flat_parts(f, Or)
    if all(is_literal(p) for p in parts):
        return parts
    return None


def implicant_literals(f: Formula) -> Optional[tuple[Formula, ...]]:
    parts = _flat_parts(f, And)
    if all(is_literal(p) for p in parts):
        return parts
    return None


def cnf_clauses(f: Formula) -> Optional[tuple[tuple[Formula, ...], ...]]:
    """The clauses of f viewed as a CNF, or None if f is not in CNF."""
    out = []
    for part in _flat_parts(f, And):
        lits = clause_literals(part)
        if lits is None:
            return None
        out.append(lits)
    return tuple(out)


def dnf_implicants(f: Formula) -> Optional[tuple[tuple[Formula, ...], ...]]:
    out = []
    for part in _flat_parts(f, Or):
        lits = implicant_literals(part)
        if lits is None:
            return None
        out.append(lits)
    return tuple(out)


def _strip_universal_prefix(f: Formula) -> tuple[tuple[str, ...], Formula]:
    names = []
    while isinstance(f, ForAll):
        names.append(f.var)
        f = f.body
    return tuple(names), f


def is_universal_fo(f: Formula) -> bool:
    """Universal prefix over a quantifier-free first-order matrix."""
    _, matrix = _strip_universal_prefix(f)
    return is_quantifier_free(matrix)


def is_sigma11(f: Formula) -> bool:
    """Existential second-order prefix (possibly empty) over a first-order
    matrix."""
    while isinstance(f, ExistsRel):
        f = f.body
    return is_first_order(f)


def classify(f: Formula, voc: Vocabulary) -> frozenset[SyntacticClass]:
    """All syntactic classes f belongs to.

    Parametric classes appear with their least parameter; wider memberships
    follow from the inclusions (a width-k CNF is a width-k' CNF for k' >= k).
    """
    check_formula(f, voc)
    out: set[SyntacticClass] = set()

    atom = literal_atom(f)
    if atom is not None:
        sign = "positive" if isinstance(f, Atom) else "negative"
        out.add(
            SyntacticClass(
                "literal", sign=sign, numeric=atom_is_numeric(atom, voc)
            )
        )

    if clause_literals(f) is not None:
        out.add(SyntacticClass("clause"))
    if implicant_literals(f) is not None:
        out.add(SyntacticClass("implicant"))

    clauses = cnf_clauses(f)
    if clauses is not None:
        width = max((len(c) for c in clauses), default=0)
        nn_width = max(
            (
                sum(1 for lit in c if not atom_is_numeric(literal_atom(lit), voc))
                for c in clauses
            ),
            default=0,
        )
        out.add(SyntacticClass("CNF", k=width))
        out.add(SyntacticClass("cnf", k=nn_width))

    implicants = dnf_implicants(f)
    if implicants is not None:
        width = max((len(c) for c in implicants), default=0)
        nn_width = max(
            (
                sum(1 for lit in c if not atom_is_numeric(literal_atom(lit), voc))
                for c in implicants
            ),
            default=0,
        )
        out.add(SyntacticClass("DNF", k=width))
        out.add(SyntacticClass("dnf", k=nn_width))

    if is_numeric(f, voc):
        out.add(SyntacticClass("numeric"))
    if is_projective(f, voc):
        out.add(SyntacticClass("projective"))
    if is_universal_fo(f):
        out.add(SyntacticClass("universal-fo"))
    if is_sigma11(f):
        out.add(SyntacticClass("sigma11"))
    return frozenset(out)


# ---------------------------------------------------------------------------
# Projective shape (guarded disjunctions of single literals)


@dataclass(frozen=True)
class ProjectiveParts:
    """Decomposition alpha0 | (alpha1 & lam1) | ... of a guarded disjunction.

    alpha0 collects the purely numeric disjuncts (None if there are none);
    cases pair each remaining disjunct's numeric guard with its single
    non-numeric literal.
    """

    alpha0: Optional[Formula]
    cases: tuple[tuple[Formula, Formula], ...]

    @property
    def guards(self) -> tuple[Formula, ...]:
        gs = () if self.alpha0 is None else (self.alpha0,)
        return gs + tuple(a for a, _ in self.cases)


def projective_parts(f: Formula, voc: Vocabulary) -> Optional[ProjectiveParts]:
    """Decompose f if it is a disjunction whose disjuncts are numeric
    formulas or conjunctions of a numeric guard with one non-numeric
    literal.  Returns None otherwise."""
    numeric_disjuncts: list[Formula] = []
    cases: list[tuple[Formula, Formula]] = []
    for d in _flat_parts(f, Or):
        if is_numeric(d, voc):
            numeric_disjuncts.append(d)
            continue
        lits: list[Formula] = []
        guards: list[Formula] = []
        for part in _flat_parts(d, And):
            if is_numeric(part, voc):
                guards.append(part)
            elif is_literal(part):
                lits.append(part)
            else:
                return None
        if len(lits) != 1:
            return None
        cases.append((conj(guards), lits[0]))
    alpha0 = disj(numeric_disjuncts) if numeric_disjuncts else None
    return ProjectiveParts(alpha0, tuple(cases))


def is_projective(f: Formula, voc: Vocabulary) -> bool:
    return projective_parts(f, voc) is not None


# ---------------------------------------------------------------------------
# Negation normal form, prenexing, CNF/DNF conversion


def to_nnf(f: Formula) -> Formula:
    """Eliminate -> and <-> and push negations onto atoms."""

    def pos(g):
        if isinstance(g, (Truth, Atom)):
            return g
        if isinstance(g, Not):
            return neg(g.sub)
        if isinstance(g, And):
            return And(tuple(pos(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(pos(p) for p in g.parts))
        if isinstance(g, Implies):
            return disj([neg(g.left), pos(g.right)])
        if isinstance(g, Iff):
            return conj(
                [disj([neg(g.left), pos(g.right)]), disj([pos(g.left), neg(g.right)])]
            )
        if isinstance(g, ForAll):
            return ForAll(g.var, pos(g.body))
        if isinstance(g, Exists):
            return Exists(g.var, pos(g.body))
        if isinstance(g, ExistsRel):
            return ExistsRel(g.rel, g.arity, pos(g.body))
        if isinstance(g, ForAllRel):
            return ForAllRel(g.rel, g.arity, pos(g.body))
        raise TypeError(f"not a formula node: {g!r}")

    def neg(g):
        if isinstance(g, Truth):
            return FALSE if g.value else TRUE
        if isinstance(g, Atom):
            return Not(g)
        if isinstance(g, Not):
            return pos(g.sub)
        if isinstance(g, And):
            return Or(tuple(neg(p) for p in g.parts))
        if isinstance(g, Or):
            return And(tuple(neg(p) for p in g.parts))
        if isinstance(g, Implies):
            return conj([pos(g.left), neg(g.right)])
        if isinstance(g, Iff):
            return pos(Iff(g.left, Not(g.right)))
        if isinstance(g, ForAll):
            return Exists(g.var, neg(g.body))
        if isinstance(g, Exists):
            return ForAll(g.var, neg(g.body))
        if isinstance(g, ExistsRel):
            return ForAllRel(g.rel, g.arity, neg(g.body))
        if isinstance(g, ForAllRel):
            return ExistsRel(g.rel, g.arity, neg(g.body))
        raise TypeError(f"not a formula node: {g!r}")

    return pos(f)


def _fresh_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    i = 0
    while f"{base}_{i}" in used:
        i += 1
    return f"{base}_{i}"


def to_cnf_formula(f: Formula) -> Formula:
    """CNF of a quantifier-free formula by distribution.

    Exponential in the worst case; intended for the small matrices handled
    here.  Tautological clauses and duplicate literals are dropped, which
    preserves equivalence.
    """
    g = to_nnf(f)

    def clauses_of(h) -> list[frozenset[Formula]] | None:
        # None encodes "true" (no clauses); a frozenset is one clause.
        if isinstance(h, Truth):
            return None if h.value else [frozenset()]
        if is_literal(h):
            return [frozenset([h])]
        if isinstance(h, And):
            out = []
            for p in h.parts:
                cs = clauses_of(p)
                if cs is not None:
                    out.extend(cs)
            return out or None
        if isinstance(h, Or):
            branches = [clauses_of(p) for p in h.parts]
            acc: list[frozenset[Formula]] | None = [frozenset()]
            for cs in branches:
                if cs is None:  # true disjunct
                    return None
                acc = [a | c for a in acc for c in cs]
            return acc
        raise NotUniversal(f"quantifier inside matrix: {h!r}")

    def is_tautological(clause: frozenset[Formula]) -> bool:
        atoms = {lit for lit in clause if isinstance(lit, Atom)}
        return any(
            isinstance(lit, Not) and lit.sub in atoms for lit in clause
        ) or any(lit == TRUE for lit in clause)

    cs = clauses_of(g)
    if cs is None:
        return TRUE
    seen = set()
    clauses = []
    for c in cs:
        c = frozenset(lit for lit in c if lit != FALSE)
        if is_tautological(c):
            continue
        if not c:
            return FALSE
        if c not in seen:
            seen.add(c)
            clauses.append(c)
    if not clauses:
        return TRUE
    return conj([disj(sorted(c, key=repr)) for c in clauses])


def to_dnf_formula(f: Formula) -> Formula:
    """DNF by duality with the CNF conversion."""
    g = to_cnf_formula(to_nnf(Not(f)))
    return to_nnf(Not(g))


@dataclass(frozen=True)
class PrenexUniversal:
    variables: tuple[str, ...]
    matrix: Formula  # CNF
    r: int  # least r with the matrix's clauses holding <= r non-numeric literals

    def formula(self) -> Formula:
        return forall(self.variables, self.matrix)


def to_prenex_universal(f: Formula, voc: Vocabulary) -> PrenexUniversal:
    """Rewrite a universal first-order sentence as a universal prefix over a
    CNF matrix.  Raises NotUniversal if an existential quantifier survives
    negation normalisation or the input is second order."""
    check_formula(f, voc)
    if not is_first_order(f):
        raise NotUniversal("second-order quantifier present")
    if free_variables(f):
        raise NotUniversal("input must be a sentence")
    g = to_nnf(f)

    used: set[str] = set()
    prefix: list[str] = []

    def pull(h: Formula) -> Formula:
        # NNF input: quantifiers, and/or, literals.  Hoist every universal
        # quantifier to the prefix, renaming on collision.
        if isinstance(h, Exists):
            raise NotUniversal(f"essential existential quantifier over {h.var!r}")
        if isinstance(h, ForAll):
            name = _fresh_name(h.var, used)
            used.add(name)
            prefix.append(name)
            body = h.body
            if name != h.var:
                body = substitute(body, {h.var: Var(name)})
            return pull(body)
        if isinstance(h, And):
            return And(tuple(pull(p) for p in h.parts))
        if isinstance(h, Or):
            return Or(tuple(pull(p) for p in h.parts))
        if isinstance(h, Not) and not isinstance(h.sub, Atom):
            raise NotUniversal("negation not in normal form")
        return h

    matrix = pull(g)
    cnf = to_cnf_formula(matrix)
    clauses = cnf_clauses(cnf) or ()
    r = max(
        (
            sum(1 for lit in c if not atom_is_numeric(literal_atom(lit), voc))
            for c in clauses
        ),
        default=0,
    )
    return PrenexUniversal(tuple(prefix), cnf, r)
