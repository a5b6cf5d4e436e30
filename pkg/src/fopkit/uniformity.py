"""Uniformity verification.

A problem S is (n, k)-uniform when, for every size m >= n, every
satisfiable conjunction of at most k ground literals and constant bindings
that has a size-m model also has one inside S.  The checker enumerates the
canonical conjunctions (sets of ground conjuncts, contradictions skipped as
trivially unsatisfiable) and establishes membership witnesses either by
exhaustive first-witness search or by the constructive witness builders,
whose outputs are always re-checked against the problem decider and the
conjunction itself.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Iterable, Iterator, Optional

from .backends._ids import K_CO_MONO_TRIANGLE, K_MONO_TRIANGLE
from .errors import (
    BudgetExceeded,
    ContradictoryWitnessBuilder,
    FopkitError,
    NoFreshVertex,
    NoWitnessBuilder,
    OutOfUniverse,
)
from .evaluate import (
    DEFAULT_BUDGET,
    ground_constraints,
    search_constrained,
    und_graph_constant,
    _Contradiction,
)
from .formats import print_formula, print_structure
from .logic import And, Atom, Const, Formula, Not, Num, Truth, Var, conj, eq
from .logic import _flat_parts, literal_atom
from .structures import Structure, tuple_index, tuple_unindex, unpack_structure
from . import backends


# ---------------------------------------------------------------------------
# Ground conjunctions


@dataclass(frozen=True)
class Conjunct:
    kind: str  # "lit" | "bind"
    symbol: str
    values: tuple[int, ...]
    positive: bool = True

    def formula(self) -> Formula:
        if self.kind == "bind":
            return eq(Const(self.symbol), Num(self.values[0]))
        atom = Atom(self.symbol, tuple(Num(v) for v in self.values))
        return atom if self.positive else Not(atom)


Conjunction = tuple[Conjunct, ...]


def conjunction_formula(conjunction: Conjunction) -> Formula:
    return conj([c.formula() for c in conjunction])


def conjunction_from_formula(f: Formula, voc) -> Conjunction:
    """Parse a ground conjunction of literals and constant bindings."""
    out = []
    for lit in _flat_parts(f, And):
        if isinstance(lit, Truth) and lit.value:
            continue
        atom = literal_atom(lit)
        if atom is None:
            raise FopkitError(f"not a ground conjunction: {print_formula(f)}")
        positive = isinstance(lit, Atom)

        def value(t):
            if isinstance(t, Num) and t.value != "max":
                return t.value
            raise FopkitError(f"argument {t!r} is not a plain numeral")

        if voc.has_relation(atom.rel):
            out.append(
                Conjunct("lit", atom.rel, tuple(value(t) for t in atom.args), positive)
            )
        elif atom.rel == "=" and positive:
            const = [t for t in atom.args if isinstance(t, Const)]
            nums = [t for t in atom.args if isinstance(t, Num)]
            if len(const) == 1 and len(nums) == 1:
                out.append(Conjunct("bind", const[0].name, (value(nums[0]),)))
            else:
                raise FopkitError("binding must equate one constant and one numeral")
        else:
            raise FopkitError(f"unsupported conjunct {print_formula(lit)}")
    return tuple(out)


def conjunction_items(voc, m: int) -> list[Conjunct]:
    """Every ground literal and constant binding over [m], in canonical
    order: relations (vocabulary order, positive before negative, argument
    tuples ascending), then constants with ascending values."""
    items: list[Conjunct] = []
    for rel, arity in voc.relations:
        for positive in (True, False):
            for idx in range(m**arity):
                items.append(
                    Conjunct("lit", rel, tuple_unindex(idx, arity, m), positive)
                )
    for c in voc.constants:
        for b in range(m):
            items.append(Conjunct("bind", c, (b,)))
    return items


def iter_conjunctions(items: list[Conjunct], k: int) -> Iterator[Conjunction]:
    for size in range(0, k + 1):
        yield from itertools.combinations(items, size)


def count_conjunctions(n_items: int, k: int) -> int:
    return sum(math.comb(n_items, size) for size in range(0, k + 1))


def is_contradictory(conjunction: Conjunction) -> bool:
    lits: dict[tuple, bool] = {}
    binds: dict[str, int] = {}
    for c in conjunction:
        if c.kind == "lit":
            key = (c.symbol, c.values)
            if lits.setdefault(key, c.positive) != c.positive:
                return True
        else:
            if binds.setdefault(c.symbol, c.values[0]) != c.values[0]:
                return True
    return False


def conjunction_holds(a: Structure, conjunction: Conjunction) -> bool:
    """Ground evaluation of the conjunction; mirrors eval_fo on the
    conjunction's formula."""
    for c in conjunction:
        if c.kind == "lit":
            if (c.values in a.relations[c.symbol]) != c.positive:
                return False
        else:
            if a.constants[c.symbol] != c.values[0]:
                return False
    return True


def constrained_elements(conjunction: Conjunction) -> frozenset[int]:
    """Elements a conjunction refers to: literal arguments and bound
    constant values."""
    out = set()
    for c in conjunction:
        out.update(c.values)
    return frozenset(out)


def minimal_witness(voc, m: int, conjunction: Conjunction) -> Structure:
    """The size-m structure whose relations are exactly the positive
    literals, with bound constants as given.

    Unbound constants default to 0, except that an unbound member of an
    s/t pair copies the other one; any value would do, and this choice
    keeps the designated vertices together whenever the conjunction does
    not separate them.
    """
    relations: dict[str, set] = {rel: set() for rel, _ in voc.relations}
    bound: dict[str, int] = {}
    for c in conjunction:
        if c.kind == "lit":
            if c.positive:
                relations[c.symbol].add(c.values)
        else:
            bound[c.symbol] = c.values[0]
    constants: dict[str, int] = {}
    if voc.has_constant("s") and voc.has_constant("t"):
        s = bound.get("s")
        t = bound.get("t")
        if s is None:
            s = t if t is not None else 0
        if t is None:
            t = s
        constants["s"], constants["t"] = s, t
    for c in voc.constants:
        if c not in constants:
            constants[c] = bound.get(c, 0)
    return Structure(voc, m, relations, constants)


# ---------------------------------------------------------------------------
# Witness builders


def _fresh_vertex(n: int, constrained: Iterable[int]) -> int:
    taken = set(constrained)
    for v in range(n):
        if v not in taken:
            return v
    raise NoFreshVertex(f"all {n} vertices are constrained")


def witness_reach(a: Structure, constrained: Iterable[int]) -> Structure:
    """Route the designated source to the designated target through one
    unconstrained vertex; every added edge touches that vertex, so no
    literal over the constrained elements can be disturbed."""
    fresh = _fresh_vertex(a.n, constrained)
    s, t = a.constants["s"], a.constants["t"]
    return a.with_edges("E", {(s, fresh), (fresh, t)})


def witness_altreach(a: Structure, constrained: Iterable[int]) -> Structure:
    """Same routing, plus an edge from every constrained vertex to the
    fresh one so that universal vertices keep all their successors
    accessible."""
    constrained = frozenset(constrained)
    fresh = _fresh_vertex(a.n, constrained)
    s, t = a.constants["s"], a.constants["t"]
    extra = {(s, fresh), (fresh, t)}
    extra.update((c, fresh) for c in sorted(constrained))
    return a.with_edges("E", extra)


def witness_hp(
    a: Structure,
    constrained: Iterable[int],
    forbidden: Optional[frozenset[tuple[int, int]]] = None,
    declared_k: Optional[int] = None,
) -> Structure:
    """Add the edges of a Hamiltonian path from 0 to max that interleaves
    constrained vertices with unconstrained ones.

    forbidden lists directed pairs that must not become edges (the
    negatively asserted ones); without it every pair of constrained
    vertices that is not already an edge is treated as off limits.  The
    path is built greedily, spending an unconstrained separator only where
    the direct arc is not usable, with a backtracking fallback.
    """
    constrained = frozenset(constrained)
    n = a.n
    if declared_k is not None and n < 4 * declared_k:
        raise NoFreshVertex(f"universe of size {n} is below 4k = {4 * declared_k}")
    if declared_k is None and len(constrained) > 0 and n < 2 * len(constrained):
        raise NoFreshVertex(
            f"universe of size {n} cannot thread {len(constrained)} constrained vertices"
        )
    edges = a.relations["E"]
    if forbidden is None:
        forbidden = frozenset(
            (u, v)
            for u in constrained
            for v in constrained
            if (u, v) not in edges
        )

    def allowed(u: int, v: int) -> bool:
        return (u, v) in edges or (u, v) not in forbidden

    interior_constrained = sorted(constrained - {0, n - 1})
    fresh = sorted(set(range(1, n - 1)) - constrained)

    seq = [0]
    pool = list(fresh)
    ok = True
    for c in interior_constrained:
        if allowed(seq[-1], c):
            seq.append(c)
            continue
        sep = next(
            (f for f in pool if allowed(seq[-1], f) and allowed(f, c)), None
        )
        if sep is None:
            ok = False
            break
        pool.remove(sep)
        seq.append(sep)
        seq.append(c)
    if ok:
        for f in pool:
            if not allowed(seq[-1], f):
                ok = False
                break
            seq.append(f)
    if ok and not allowed(seq[-1], n - 1):
        ok = False
    if ok:
        seq.append(n - 1)

    if not ok:
        seq = _hp_backtrack(n, allowed)
        if seq is None:
            raise ContradictoryWitnessBuilder(
                "no admissible Hamiltonian path exists for this conjunction"
            )
    path_edges = {(seq[i], seq[i + 1]) for i in range(len(seq) - 1)}
    return a.with_edges("E", path_edges)


def _hp_backtrack(n: int, allowed) -> Optional[list[int]]:
    target = n - 1
    seq = [0]
    used = {0, target}

    def rec() -> bool:
        if len(seq) == n - 1:
            return allowed(seq[-1], target)
        for v in range(1, n - 1):
            if v in used or not allowed(seq[-1], v):
                continue
            used.add(v)
            seq.append(v)
            if rec():
                return True
            seq.pop()
            used.remove(v)
        return False

    if rec():
        return seq + [target]
    return None


def witness_comono(a: Structure, constrained: Iterable[int]) -> Structure:
    """Add a complete graph on six unconstrained vertices; every 2-coloring
    of the result then contains a monochromatic triangle."""
    constrained = frozenset(constrained)
    fresh = [v for v in range(a.n) if v not in constrained][:6]
    if len(fresh) < 6:
        raise NoFreshVertex("need six unconstrained vertices")
    extra = {(u, v) for u in fresh for v in fresh if u != v}
    return a.with_edges("E", extra)


def _negative_pairs(conjunction: Conjunction) -> frozenset[tuple[int, int]]:
    return frozenset(
        c.values for c in conjunction if c.kind == "lit" and not c.positive
    )


def _build_witness(problem, minimal: Structure, conjunction: Conjunction,
                   k: int) -> Structure:
    constrained = constrained_elements(conjunction)
    name = problem.name
    if name == "reach":
        return witness_reach(minimal, constrained)
    if name == "altreach":
        return witness_altreach(minimal, constrained)
    if name == "hp_0max":
        return witness_hp(
            minimal, constrained, forbidden=_negative_pairs(conjunction),
            declared_k=k,
        )
    if name == "co_mono_triangle":
        return witness_comono(minimal, constrained)
    raise NoWitnessBuilder(name)


# ---------------------------------------------------------------------------
# The checker


@dataclass(frozen=True)
class UniformityQuery:
    problem_name: str
    n: int
    k: int
    m_range: tuple[int, ...]
    mode: str = "exhaustive"  # or "constructive"

    def __post_init__(self):
        if self.k < 0:
            raise FopkitError("k must be non-negative")
        if self.n < 2:
            raise OutOfUniverse(self.n, 2)
        for m in self.m_range:
            if m < self.n:
                raise FopkitError(f"m = {m} is below n = {self.n}")
        if self.mode not in ("exhaustive", "constructive"):
            raise FopkitError(f"unknown mode {self.mode!r}")


@dataclass
class NoWitnessProof:
    structures_examined: int
    distinct_graphs: Optional[int] = None
    colorings_checked: Optional[int] = None

    def render(self) -> str:
        parts = [f"structures={self.structures_examined}"]
        if self.distinct_graphs is not None:
            parts.append(f"distinct-graphs={self.distinct_graphs}")
        if self.colorings_checked is not None:
            parts.append(f"colorings={self.colorings_checked}")
        return " ".join(parts)


@dataclass
class Counterexample:
    m: int
    conjunction: Conjunction
    witness: Structure  # plain consistency witness
    proof: NoWitnessProof


@dataclass
class MVerdict:
    m: int
    verdict: str  # "uniform" | "counterexample" | "inconclusive"
    conjunctions: int
    contradictory: int
    counterexample: Optional[Counterexample] = None
    budget_needed: Optional[int] = None


@dataclass
class UniformityReport:
    query: UniformityQuery
    verdicts: list[MVerdict]

    @property
    def uniform(self) -> bool:
        return all(v.verdict == "uniform" for v in self.verdicts)

    def render(self, fmt: str = "text") -> str:
        q = self.query
        lines = []
        if fmt == "tsv":
            for v in self.verdicts:
                fields = [q.problem_name, str(q.n), str(q.k), str(v.m), v.verdict]
                if v.counterexample is not None:
                    fields.append(
                        print_formula(conjunction_formula(v.counterexample.conjunction))
                    )
                lines.append("\t".join(fields))
            return "\n".join(lines) + "\n"
        lines.append(
            f"UNIFORMITY problem={q.problem_name} n={q.n} k={q.k} mode={q.mode}"
        )
        for v in self.verdicts:
            if v.verdict == "uniform":
                lines.append(
                    f"VERDICT m={v.m} uniform conjunctions={v.conjunctions} "
                    f"contradictory={v.contradictory}"
                )
            elif v.verdict == "inconclusive":
                lines.append(
                    f"VERDICT m={v.m} inconclusive budget-needed={v.budget_needed}"
                )
            else:
                ce = v.counterexample
                lines.append(f"VERDICT m={v.m} counterexample")
                lines.append(
                    "CONJUNCTION "
                    + print_formula(conjunction_formula(ce.conjunction))
                )
                lines.append("WITNESS " + print_structure(ce.witness))
                lines.append("NO-WITNESS-IN-PROBLEM " + ce.proof.render())
        lines.append(
            "NOTE verified for the listed m only; larger m remain an assumption"
        )
        return "\n".join(lines) + "\n"


def _problem_from_spec(spec):
    from .problems import get_problem, pad

    name, threshold = spec
    p = get_problem(name)
    return pad(p, threshold) if threshold else p


def _check_one(
    problem, voc, m: int, k: int, mode: str, conjunction: Conjunction,
    budget: int,
) -> Optional[NoWitnessProof]:
    """None when the conjunction is fine, a proof object when it has a model
    but none inside the problem."""
    minimal = minimal_witness(voc, m, conjunction)
    if mode == "constructive":
        try:
            built = _build_witness(problem, minimal, conjunction, k)
        except (NoFreshVertex, ContradictoryWitnessBuilder) as exc:
            raise ContradictoryWitnessBuilder(
                f"builder failed on {print_formula(conjunction_formula(conjunction))}: {exc}"
            ) from exc
        if not conjunction_holds(built, conjunction):
            raise ContradictoryWitnessBuilder(
                "builder output violates the conjunction "
                + print_formula(conjunction_formula(conjunction))
            )
        if not problem.decider(built):
            raise ContradictoryWitnessBuilder(
                "builder output rejected by the decider on "
                + print_formula(conjunction_formula(conjunction))
            )
        return None

    f = conjunction_formula(conjunction)
    packed = None
    try:
        packed = ground_constraints(f, {}, voc, m)
    except _Contradiction:  # callers skip contradictions; defensive
        return None
    required, forbidden, const_fixed = packed
    kind = problem.search_kind(m)
    found, _, _, examined = search_constrained(
        voc, m, required, forbidden, const_fixed, kind, budget
    )
    if found:
        return None
    proof = NoWitnessProof(structures_examined=examined)
    if kind == K_MONO_TRIANGLE and und_graph_constant(m, required[0], forbidden[0]):
        kern = backends.active
        und = kern.und_rows_from_mask(m, required[0])
        all_mono, checked = kern.all_colorings_monochromatic(m, und)
        if all_mono:
            proof.distinct_graphs = 1
            proof.colorings_checked = checked
    return proof


def _slice_worker(args):
    (spec, voc_spec, m, k, mode, lo, hi, budget) = args
    problem = _problem_from_spec(spec)
    voc = problem.vocabulary
    items = conjunction_items(voc, m)
    contradictory = 0
    failure = None
    stream = itertools.islice(enumerate(iter_conjunctions(items, k)), lo, hi)
    for index, conjunction in stream:
        if is_contradictory(conjunction):
            contradictory += 1
            continue
        try:
            proof = _check_one(problem, voc, m, k, mode, conjunction, budget)
        except BudgetExceeded as exc:
            return {"budget": exc.needed, "contradictory": contradictory}
        if proof is not None:
            failure = index
            break
    return {"failure": failure, "contradictory": contradictory}


def check_uniformity(
    query: UniformityQuery,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    probe: Optional[Conjunction] = None,
) -> UniformityReport:
    """Run the conjunction sweep (or a single probe conjunction) for every
    m in the query's range.  Results are independent of the worker count:
    the counterexample reported is always the first one in canonical
    order."""
    problem = _problem_from_spec(_spec_of(query.problem_name))
    voc = problem.vocabulary
    if probe is not None and len(probe) > query.k:
        raise FopkitError(
            f"probe has {len(probe)} conjuncts, the query allows k = {query.k}"
        )

    verdicts = []
    for m in query.m_range:
        if probe is not None:
            verdicts.append(
                _verdict_for_conjunctions(
                    problem, voc, m, query, [(0, probe)], 1, budget
                )
            )
            continue
        items = conjunction_items(voc, m)
        total = count_conjunctions(len(items), query.k)
        if workers > 1:
            verdict = _parallel_verdict(problem, voc, m, query, total, budget, workers)
        else:
            stream = enumerate(iter_conjunctions(items, query.k))
            verdict = _verdict_for_conjunctions(
                problem, voc, m, query, stream, total, budget
            )
        verdicts.append(verdict)
    return UniformityReport(query, verdicts)


def _spec_of(problem_name: str):
    if "@" in problem_name:
        base, threshold = problem_name.split("@", 1)
        return (base, int(threshold))
    return (problem_name, None)


def _verdict_for_conjunctions(
    problem, voc, m: int, query: UniformityQuery, stream, total: int, budget: int
) -> MVerdict:
    contradictory = 0
    for index, conjunction in stream:
        if is_contradictory(conjunction):
            contradictory += 1
            continue
        try:
            proof = _check_one(
                problem, voc, m, query.k, query.mode, conjunction, budget
            )
        except BudgetExceeded as exc:
            return MVerdict(
                m, "inconclusive", total, contradictory, budget_needed=exc.needed
            )
        if proof is not None:
            witness = minimal_witness(voc, m, conjunction)
            return MVerdict(
                m,
                "counterexample",
                total,
                contradictory,
                counterexample=Counterexample(m, conjunction, witness, proof),
            )
    return MVerdict(m, "uniform", total, contradictory)


def _parallel_verdict(
    problem, voc, m: int, query: UniformityQuery, total: int, budget: int,
    workers: int,
) -> MVerdict:
    spec = _spec_of(query.problem_name)
    bounds = [round(i * total / workers) for i in range(workers + 1)]
    jobs = [
        (spec, None, m, query.k, query.mode, bounds[i], bounds[i + 1], budget)
        for i in range(workers)
    ]
    ctx = get_context("fork")
    with ctx.Pool(workers) as pool:
        results = pool.map(_slice_worker, jobs)
    contradictory = 0
    budget_needed = None
    first_failure = None
    for r in results:
        contradictory += r.get("contradictory", 0)
        if "budget" in r:
            budget_needed = r["budget"] if budget_needed is None else min(
                budget_needed, r["budget"]
            )
        elif r.get("failure") is not None:
            f = r["failure"]
            first_failure = f if first_failure is None else min(first_failure, f)
    if budget_needed is not None:
        return MVerdict(m, "inconclusive", total, contradictory,
                        budget_needed=budget_needed)
    if first_failure is None:
        return MVerdict(m, "uniform", total, contradictory)
    items = conjunction_items(voc, m)
    conjunction = next(
        itertools.islice(iter_conjunctions(items, query.k), first_failure, None)
    )
    proof = _check_one(problem, voc, m, query.k, query.mode, conjunction, budget)
    witness = minimal_witness(voc, m, conjunction)
    return MVerdict(
        m,
        "counterexample",
        total,
        contradictory,
        counterexample=Counterexample(m, conjunction, witness, proof),
    )
