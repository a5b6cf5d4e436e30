"""First-order queries and projections as executable structure
transformers.

A query of arity k maps a structure with universe [n] to one with universe
[n^k]; image tuples are flattened through the lexicographic tuple order.
A projection additionally requires every defining formula to be a guarded
disjunction: an optional numeric disjunct plus cases pairing a numeric
guard with one source literal, all guards pairwise mutually exclusive.
Guard exclusivity is an n-dependent semantic property, so it is validated
by exhaustive evaluation up to a bound rather than proved.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import (
    ConstantNotUnique,
    NotLiteral,
    NotProjective,
    VocabularyMismatch,
)
from .evaluate import compile_program, compiled_evaluator, eval_fo, tables_for
from .logic import (
    And,
    Atom,
    Const,
    Formula,
    Not,
    Or,
    ProjectiveParts,
    Truth,
    Var,
    Vocabulary,
    conj,
    disj,
    free_variables,
    check_formula,
    is_numeric,
    literal_atom,
    projective_parts,
    substitute,
)
from .structures import Structure, tuple_index, tuple_unindex


def query_variables(count: int) -> tuple[str, ...]:
    """The canonical variable names x1..x<count> used by query formulas."""
    return tuple(f"x{i + 1}" for i in range(count))


@dataclass(frozen=True)
class FoQuery:
    """A tuple of formulas defining a structure transformer.

    relation_formulas[i] has free variables among x1..x(k*arity_i) and
    defines the i-th target relation; constant_formulas[j] has free
    variables among x1..xk and must have exactly one satisfying tuple.
    """

    source: Vocabulary
    target: Vocabulary
    arity: int
    relation_formulas: tuple[Formula, ...]
    constant_formulas: tuple[Formula, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.arity < 1:
            raise VocabularyMismatch("query arity must be at least 1")
        if len(self.relation_formulas) != len(self.target.relations):
            raise VocabularyMismatch("one formula per target relation required")
        if len(self.constant_formulas) != len(self.target.constants):
            raise VocabularyMismatch("one formula per target constant required")
        k = self.arity
        for (rel, rarity), f in zip(self.target.relations, self.relation_formulas):
            check_formula(f, self.source)
            allowed = set(query_variables(k * rarity))
            extra = [v for v in free_variables(f) if v not in allowed]
            if extra:
                raise VocabularyMismatch(
                    f"formula for {rel!r} uses {extra[0]!r} beyond x1..x{k * rarity}"
                )
        for c, f in zip(self.target.constants, self.constant_formulas):
            check_formula(f, self.source)
            allowed = set(query_variables(k))
            extra = [v for v in free_variables(f) if v not in allowed]
            if extra:
                raise VocabularyMismatch(
                    f"formula for {c!r} uses {extra[0]!r} beyond x1..x{k}"
                )

    def formula_for(self, symbol: str) -> Formula:
        if self.target.has_relation(symbol):
            return self.relation_formulas[self.target.relation_index(symbol)]
        if self.target.has_constant(symbol):
            return self.constant_formulas[self.target.constant_index(symbol)]
        raise VocabularyMismatch(f"no target symbol {symbol!r}")


@dataclass(frozen=True)
class Fop(FoQuery):
    """A query whose formulas are all guarded disjunctions (checked
    syntactically on construction; guard exclusivity is semantic and is
    checked by validate_fop)."""

    def __post_init__(self):
        super().__post_init__()
        for symbol, f in self._all_formulas():
            if projective_parts(f, self.source) is None:
                raise NotProjective(f"formula for {symbol!r} is not a guarded disjunction")

    def _all_formulas(self):
        for (rel, _), f in zip(self.target.relations, self.relation_formulas):
            yield rel, f
        for c, f in zip(self.target.constants, self.constant_formulas):
            yield c, f

    def parts_for(self, symbol: str) -> ProjectiveParts:
        return projective_parts(self.formula_for(symbol), self.source)


# ---------------------------------------------------------------------------
# Application


def apply(q: FoQuery, a: Structure) -> Structure:
    """The image structure: universe [n^k], relations and constants defined
    by the query's formulas evaluated over the source."""
    if a.vocabulary != q.source:
        raise VocabularyMismatch("structure is not over the query's source vocabulary")
    n = a.n
    k = q.arity
    image_n = n**k

    relations: dict[str, set] = {}
    for (rel, rarity), f in zip(q.target.relations, q.relation_formulas):
        nvars = k * rarity
        names = query_variables(nvars)
        run = compiled_evaluator(a, f)
        table = set()
        for flat in _all_tuples(n, nvars):
            if run(dict(zip(names, flat))):
                table.add(
                    tuple(
                        tuple_index(flat[i * k : (i + 1) * k], n)
                        for i in range(rarity)
                    )
                )
        relations[rel] = table

    constants: dict[str, int] = {}
    for c, f in zip(q.target.constants, q.constant_formulas):
        names = query_variables(k)
        run = compiled_evaluator(a, f)
        hits = [flat for flat in _all_tuples(n, k) if run(dict(zip(names, flat)))]
        if len(hits) != 1:
            raise ConstantNotUnique(c, len(hits))
        constants[c] = tuple_index(hits[0], n)

    return Structure(q.target, image_n, relations, constants)


def _all_tuples(n: int, k: int):
    tup = [0] * k
    total = n**k
    for idx in range(total):
        yield tuple(tuple_unindex(idx, k, n))


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ExclusivityViolation:
    symbol: str
    n: int
    assignment: tuple[int, ...]
    first: Formula
    second: Formula


@dataclass
class FopValidationReport:
    projective: bool
    issues: list[str]
    violations: list[ExclusivityViolation]
    exclusivity_bound: int

    @property
    def valid(self) -> bool:
        return self.projective and not self.violations


def validate_fop(q: FoQuery, exclusivity_bound: int = 6) -> FopValidationReport:
    """Check the guarded-disjunction shape and, by exhaustive evaluation
    over every universe size 2..exclusivity_bound and every constant
    assignment and argument tuple, the pairwise mutual exclusivity of the
    guards.  Exclusivity beyond the bound is not certified."""
    issues: list[str] = []
    violations: list[ExclusivityViolation] = []
    symbols = [(rel, k_arity * q.arity) for (rel, k_arity) in q.target.relations]
    symbols += [(c, q.arity) for c in q.target.constants]

    decomposed = []
    for symbol, _ in symbols:
        parts = projective_parts(q.formula_for(symbol), q.source)
        if parts is None:
            issues.append(f"formula for {symbol!r} is not a guarded disjunction")
        decomposed.append((symbol, parts))
    projective = not issues

    if projective:
        dummy_rels = {rel: set() for rel, _ in q.source.relations}
        for symbol, parts in decomposed:
            guards = parts.guards
            nvars = (
                q.arity * q.target.arity(symbol)
                if q.target.has_relation(symbol)
                else q.arity
            )
            names = query_variables(nvars)
            for n in range(2, exclusivity_bound + 1):
                for const_vals in _all_tuples(n, len(q.source.constants)):
                    a = Structure(
                        q.source,
                        n,
                        dummy_rels,
                        dict(zip(q.source.constants, const_vals)),
                    )
                    runs = [compiled_evaluator(a, g) for g in guards]
                    for flat in _all_tuples(n, nvars):
                        env = dict(zip(names, flat))
                        hot = [i for i, run in enumerate(runs) if run(env)]
                        if len(hot) > 1:
                            violations.append(
                                ExclusivityViolation(
                                    symbol, n, flat, guards[hot[0]], guards[hot[1]]
                                )
                            )
    return FopValidationReport(projective, issues, violations, exclusivity_bound)


# ---------------------------------------------------------------------------
# Literal pullback


def _rename_to(f: Formula, names: tuple[str, ...]) -> Formula:
    mapping = {
        old: Var(new) for old, new in zip(query_variables(len(names)), names)
    }
    return substitute(f, mapping)


def pullback_relation(q: Fop, rel: str, positive: bool = True,
                      names: Optional[tuple[str, ...]] = None) -> Formula:
    """A source formula equivalent to the (possibly negated) target relation
    literal: the image satisfies the literal on a flattened argument tuple
    iff the source satisfies the result on the same elements.

    The positive direction is the defining disjunction itself; the negative
    direction is its complement, which guard exclusivity turns into a
    disjunction of mutually exclusive cases, each either numeric or a
    numeric guard with one negated literal.
    """
    if not q.target.has_relation(rel):
        raise NotLiteral(f"no target relation {rel!r}")
    nvars = q.arity * q.target.arity(rel)
    names = names or query_variables(nvars)
    if len(names) != nvars:
        raise NotLiteral(f"{rel!r} needs {nvars} argument names")
    f = q.formula_for(rel)
    out = f if positive else _complement(q.parts_for(rel))
    return _rename_to(out, tuple(names))


def pullback_constant(q: Fop, const: str,
                      names: Optional[tuple[str, ...]] = None) -> Formula:
    """Source formula equivalent to `the target constant equals the image
    element with this k-tuple of coordinates'."""
    if not q.target.has_constant(const):
        raise NotLiteral(f"no target constant {const!r}")
    names = names or query_variables(q.arity)
    if len(names) != q.arity:
        raise NotLiteral(f"{const!r} needs {q.arity} argument names")
    return _rename_to(q.formula_for(const), tuple(names))


def _complement(parts: ProjectiveParts) -> Formula:
    negated_guards = [Not(g) for g in parts.guards]
    cases: list[Formula] = [conj(negated_guards)]
    for alpha, lam in parts.cases:
        atom = literal_atom(lam)
        neg_lam = atom if isinstance(lam, Not) else Not(atom)
        cases.append(And((alpha, neg_lam)))
    return disj(cases)


def pullback(q: Fop, eta: Formula, exclusivity_bound: int = 0) -> Formula:
    """Pull a target literal back through the projection.

    eta must be a relation literal over the target whose arguments are
    distinct variables (one block of q.arity names per relation position),
    or for arity-1 queries an equation between a target constant and a
    variable.  When exclusivity_bound > 0 the guards are first re-validated
    up to that universe size.
    """
    if exclusivity_bound:
        report = validate_fop(q, exclusivity_bound)
        if not report.valid:
            raise NotProjective(
                f"guards are not mutually exclusive up to n={exclusivity_bound}"
            )
    positive = True
    core = eta
    if isinstance(core, Not):
        positive = False
        core = core.sub
    if not isinstance(core, Atom):
        raise NotLiteral(f"not a literal: {eta!r}")
    if core.rel == "=" and positive and q.arity == 1:
        sides = core.args
        consts = [t for t in sides if isinstance(t, Const) and q.target.has_constant(t.name)]
        variables = [t for t in sides if isinstance(t, Var)]
        if len(consts) == 1 and len(variables) == 1:
            return pullback_constant(q, consts[0].name, (variables[0].name,))
        raise NotLiteral("constant equation must relate one constant and one variable")
    if not q.target.has_relation(core.rel):
        raise NotLiteral(f"{core.rel!r} is not a target relation")
    names = []
    for t in core.args:
        if not isinstance(t, Var) or t.name in names:
            raise NotLiteral("literal arguments must be distinct variables")
        names.append(t.name)
    flat = tuple(f"{v}_{i + 1}" for v in names for i in range(q.arity)) \
        if q.arity > 1 else tuple(names)
    return pullback_relation(q, core.rel, positive, flat)


@dataclass(frozen=True)
class PullbackCase:
    guard: Formula
    shape: Formula  # numeric, or a numeric guard conjoined with one literal


def pullback_cases(q: Fop, rel: str, positive: bool = True) -> tuple[PullbackCase, ...]:
    """The mutually exclusive case split behind pullback_relation: under
    each case's guard the pullback simplifies to the stated shape."""
    parts = q.parts_for(rel)
    out = []
    if positive:
        if parts.alpha0 is not None:
            out.append(PullbackCase(parts.alpha0, parts.alpha0))
        for alpha, lam in parts.cases:
            out.append(PullbackCase(alpha, And((alpha, lam))))
    else:
        gamma = conj([Not(g) for g in parts.guards])
        out.append(PullbackCase(gamma, gamma))
        for alpha, lam in parts.cases:
            atom = literal_atom(lam)
            neg_lam = atom if isinstance(lam, Not) else Not(atom)
            out.append(PullbackCase(alpha, And((alpha, neg_lam))))
    return tuple(out)
