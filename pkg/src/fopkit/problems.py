"""Catalog of decision problems and the reductions between them.

Each problem pairs a canonical vocabulary with an exact decider (explicit
search, exponential-time where needed); a few also carry a logical
definition used as a cross-check, never as ground truth.  The padded
variants accept every structure below a size threshold, and the
autoreductions are projections whose images always exceed that threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import backends
from .backends._ids import (
    K_ALTREACH,
    K_CO_MONO_TRIANGLE,
    K_HP_0MAX,
    K_HP_01,
    K_HP_TWO_POINTS,
    K_LONGEST_PATH,
    K_MONO_TRIANGLE,
    K_NONE,
    K_REACH,
    K_THREE_DM,
)
from .errors import UnknownProblem, VocabularyMismatch
from .evaluate import compiled_evaluator
from .fops import Fop, apply, query_variables
from .logic import (
    And,
    Atom,
    Const,
    Exists,
    ExistsRel,
    ForAll,
    Formula,
    Iff,
    Implies,
    MAX,
    Not,
    Num,
    Or,
    Truth,
    Var,
    Vocabulary,
    ZERO,
    conj,
    disj,
    eq,
    exists,
    forall,
    neq,
    to_prenex_universal,
    literal_atom,
    clause_literals,
    cnf_clauses,
)
from .structures import (
    Structure,
    enumerate_structures,
    pack_structure,
    tuple_unindex,
)

GRAPH = Vocabulary((("E", 2),), (), name="graph")
ST_GRAPH = Vocabulary((("E", 2),), ("s", "t"), name="st-graph")
ALT_GRAPH = Vocabulary((("E", 2), ("U", 1)), ("s", "t"), name="alt-graph")
MATCHING = Vocabulary((("M", 3),), (), name="matching")
LP_GRAPH = Vocabulary((("L", 3), ("E", 2), ("K", 1)), ("s", "t"), name="lp-graph")

BUILTIN_VOCABULARIES = {
    v.name: v for v in (GRAPH, ST_GRAPH, ALT_GRAPH, MATCHING, LP_GRAPH)
}


def _kernels_for_structure(a: Structure):
    kern = backends.active
    if kern.NAME != "pure":
        bits = max((a.n**ar for _, ar in a.vocabulary.relations), default=0)
        if bits > 63 or a.n > 63:
            return backends.pure
    return kern


@dataclass(frozen=True)
class Problem:
    """A named decision problem over its canonical vocabulary."""

    name: str
    vocabulary: Vocabulary
    kind: int
    definition: Optional[Formula] = None
    complexity: str = ""

    def decider(self, a: Structure) -> bool:
        if a.vocabulary != self.vocabulary:
            raise VocabularyMismatch(
                f"{self.name} expects vocabulary {self.vocabulary.name!r}"
            )
        masks, consts = pack_structure(a)
        return bool(_kernels_for_structure(a).decide(self.kind, a.n, masks, consts))

    def search_kind(self, m: int) -> int:
        return self.kind

    def __contains__(self, a: Structure) -> bool:
        return self.decider(a)


@dataclass(frozen=True)
class PaddedProblem:
    """The base problem together with every structure below the threshold."""

    base: Problem
    threshold: int

    @property
    def name(self) -> str:
        return f"{self.base.name}@{self.threshold}"

    @property
    def vocabulary(self) -> Vocabulary:
        return self.base.vocabulary

    def decider(self, a: Structure) -> bool:
        return a.n < self.threshold or self.base.decider(a)

    def search_kind(self, m: int) -> int:
        return K_NONE if m < self.threshold else self.base.kind


def pad(p: Problem, n: int) -> PaddedProblem:
    if n < 2:
        raise ValueError("padding threshold must be at least 2")
    return PaddedProblem(p, n)


# ---------------------------------------------------------------------------
# Logical definitions


def _three_dm_sentence() -> Formula:
    x1, x2, x3 = Var("x1"), Var("x2"), Var("x3")
    y1, y2, y3 = Var("y1"), Var("y2"), Var("y3")
    x = Var("x")
    containment = forall(
        ("x1", "x2", "x3"),
        Implies(Atom("R", (x1, x2, x3)), Atom("M", (x1, x2, x3))),
    )
    coverage = ForAll(
        "x",
        And(
            (
                exists(("x2", "x3"), Atom("R", (x, x2, x3))),
                exists(("x1", "x3"), Atom("R", (x1, x, x3))),
                exists(("x1", "x2"), Atom("R", (x1, x2, x))),
            )
        ),
    )
    distinct = forall(
        ("x1", "x2", "x3", "y1", "y2", "y3"),
        Implies(
            And(
                (
                    Atom("R", (x1, x2, x3)),
                    Atom("R", (y1, y2, y3)),
                    Not(And((eq(x1, y1), eq(x2, y2), eq(x3, y3)))),
                )
            ),
            And((neq(x1, y1), neq(x2, y2), neq(x3, y3))),
        ),
    )
    return ExistsRel("R", 3, And((containment, coverage, distinct)))


def _hp_0max_sentence() -> Formula:
    x, y, z = Var("x"), Var("y"), Var("z")
    irreflexive = ForAll("x", Not(Atom("P", (x, x))))
    transitive = forall(
        ("x", "y", "z"),
        Implies(And((Atom("P", (x, y)), Atom("P", (y, z)))), Atom("P", (x, z))),
    )
    linear = forall(
        ("x", "y"), Implies(neq(x, y), Or((Atom("P", (x, y)), Atom("P", (y, x)))))
    )
    consecutive = forall(
        ("x", "y"),
        Implies(
            And(
                (
                    Atom("P", (x, y)),
                    Not(Exists("z", And((Atom("P", (x, z)), Atom("P", (z, y)))))),
                )
            ),
            Atom("E", (x, y)),
        ),
    )
    first = ForAll("x", Implies(neq(x, ZERO), Atom("P", (ZERO, x))))
    last = ForAll("x", Implies(neq(x, MAX), Atom("P", (x, MAX))))
    return ExistsRel(
        "P", 2, And((irreflexive, transitive, linear, consecutive, first, last))
    )


# ---------------------------------------------------------------------------
# Catalog

PROBLEMS: dict[str, Problem] = {}


def _register(p: Problem) -> Problem:
    PROBLEMS[p.name] = p
    return p


reach = _register(Problem("reach", ST_GRAPH, K_REACH, complexity="NLSPACE-complete"))
altreach = _register(
    Problem("altreach", ALT_GRAPH, K_ALTREACH, complexity="PTIME-complete")
)
hp_0max = _register(
    Problem(
        "hp_0max",
        GRAPH,
        K_HP_0MAX,
        definition=_hp_0max_sentence(),
        complexity="NP-complete",
    )
)
hp_01 = _register(Problem("hp_01", GRAPH, K_HP_01, complexity="NP-complete"))
hp_two_points = _register(
    Problem("hp_two_points", ST_GRAPH, K_HP_TWO_POINTS, complexity="NP-complete")
)
mono_triangle = _register(
    Problem("mono_triangle", GRAPH, K_MONO_TRIANGLE, complexity="NP-complete")
)
co_mono_triangle = _register(
    Problem(
        "co_mono_triangle", GRAPH, K_CO_MONO_TRIANGLE, complexity="coNP-complete"
    )
)
three_dm = _register(
    Problem(
        "three_dm",
        MATCHING,
        K_THREE_DM,
        definition=_three_dm_sentence(),
        complexity="NP-complete",
    )
)
longest_path = _register(
    Problem("longest_path", LP_GRAPH, K_LONGEST_PATH, complexity="NP-complete")
)


def get_problem(name: str) -> Problem:
    if name not in PROBLEMS:
        raise UnknownProblem(name)
    return PROBLEMS[name]


# ---------------------------------------------------------------------------
# Catalog projections


def identity_fop(voc: Vocabulary) -> Fop:
    rel_formulas = tuple(
        Atom(rel, tuple(Var(v) for v in query_variables(arity)))
        for rel, arity in voc.relations
    )
    const_formulas = tuple(eq(Var("x1"), Const(c)) for c in voc.constants)
    return Fop(voc, voc, 1, rel_formulas, const_formulas, name="identity")


def swap_one_max_fop() -> Fop:
    """Relabel a graph by exchanging vertex 1 with vertex max (the identity
    when they coincide); reduces the 0-to-1 Hamiltonian path problem to the
    0-to-max one."""

    def cases(var: Var):
        is_one = And((eq(var, ONE_T), Not(eq(var, MAX))))
        is_max = eq(var, MAX)
        other = And((Not(eq(var, ONE_T)), Not(eq(var, MAX))))
        return ((is_one, MAX), (is_max, ONE_T), (other, var))

    ONE_T = Num(1)
    x1, x2 = Var("x1"), Var("x2")
    disjuncts = []
    for guard1, image1 in cases(x1):
        for guard2, image2 in cases(x2):
            disjuncts.append(And((guard1, guard2, Atom("E", (image1, image2)))))
    return Fop(GRAPH, GRAPH, 1, (Or(tuple(disjuncts)),), (), name="swap-1-max")


def _padding_arity(n: int) -> int:
    # least k with 2^k > n
    return n.bit_length()


def autoreduction(name: str, n: int) -> Fop:
    """A projection reducing the named problem to its padded variant, with
    every image of size greater than n.

    reach and altreach embed the input as the all-zero-prefix block and
    leave everything else disconnected; hp_0max chains one copy of the
    input per prefix, joining each copy's max vertex to the next copy's
    zero vertex; co_mono_triangle takes the disjoint copies without
    connections.
    """
    if name not in ("reach", "altreach", "hp_0max", "co_mono_triangle"):
        raise UnknownProblem(name)
    k = _padding_arity(n)
    u = query_variables(2 * k)  # x1..xk = block+vertex of the source endpoint
    head, tail = u[:k], u[k:]

    def zeros(names) -> list[Formula]:
        return [eq(Var(v), ZERO) for v in names]

    def prefix_equal() -> list[Formula]:
        return [eq(Var(a), Var(b)) for a, b in zip(head[:-1], tail[:-1])]

    e_atom = Atom("E", (Var(head[-1]), Var(tail[-1])))

    if name in ("reach", "altreach"):
        guard = zeros(head[:-1]) + zeros(tail[:-1])
        phi_e = And(tuple(guard + [e_atom])) if guard else e_atom
        consts = tuple(
            And(tuple(zeros(head[:-1]) + [eq(Var(head[-1]), Const(c))]))
            for c in ("s", "t")
        )
        if name == "reach":
            return Fop(ST_GRAPH, ST_GRAPH, k, (phi_e,), consts, name=f"reach-pad-{n}")
        u_guard = zeros(head[:-1]) + [Atom("U", (Var(head[-1]),))]
        phi_u = And(tuple(u_guard))
        return Fop(
            ALT_GRAPH, ALT_GRAPH, k, (phi_e, phi_u), consts, name=f"altreach-pad-{n}"
        )

    same_block = prefix_equal()
    copy_edges = And(tuple(same_block + [e_atom])) if same_block else e_atom
    if name == "co_mono_triangle":
        return Fop(GRAPH, GRAPH, k, (copy_edges,), (), name=f"co-mono-pad-{n}")

    rolls = []
    for p in range(k - 1):
        parts: list[Formula] = [
            eq(Var(head[j]), Var(tail[j])) for j in range(p)
        ]
        parts.append(Atom("suc", (Var(head[p]), Var(tail[p]))))
        for j in range(p + 1, k - 1):
            parts.append(eq(Var(head[j]), MAX))
            parts.append(eq(Var(tail[j]), ZERO))
        parts.append(eq(Var(head[-1]), MAX))
        parts.append(eq(Var(tail[-1]), ZERO))
        rolls.append(conj(parts))
    phi_e = Or((disj(rolls), copy_edges))
    return Fop(GRAPH, GRAPH, k, (phi_e,), (), name=f"hp-0max-pad-{n}")


def fop_catalog() -> dict[str, Fop]:
    """The named projections exercised by the verification harnesses."""
    return {
        "identity": identity_fop(ST_GRAPH),
        "swap-1-max": swap_one_max_fop(),
        "reach-pad-3": autoreduction("reach", 3),
        "altreach-pad-3": autoreduction("altreach", 3),
        "hp-0max-pad-3": autoreduction("hp_0max", 3),
        "co-mono-pad-3": autoreduction("co_mono_triangle", 3),
    }


def declared_reductions() -> dict[str, tuple]:
    """fop name -> (source problem, target problem) for the reduction
    property: source membership must equal target membership of the image."""
    return {
        "identity": (reach, reach),
        "swap-1-max": (hp_01, hp_0max),
        "reach-pad-3": (reach, pad(reach, 3)),
        "altreach-pad-3": (altreach, pad(altreach, 3)),
        "hp-0max-pad-3": (hp_0max, pad(hp_0max, 3)),
        "co-mono-pad-3": (co_mono_triangle, pad(co_mono_triangle, 3)),
    }


# ---------------------------------------------------------------------------
# Universal-sentence preservation harness


@dataclass
class SuperfluityReport:
    holds: bool
    structures_checked: int
    size_bound: int
    counterexample: Optional[Structure] = None
    falsified_assignment: Optional[dict[str, int]] = None
    falsified_clause: Optional[Formula] = None
    falsifying_implicant: Optional[Formula] = None


def check_superfluous_wrt_fop(
    psi: Formula, rho: Fop, size_bound: int = 3
) -> SuperfluityReport:
    """Verify that every image of the projection satisfies the universal
    sentence, for all source structures up to size_bound.  On failure the
    report carries the source structure, the falsified clause instance and
    the implicant (the negated clause) that holds on the image."""
    prenex = to_prenex_universal(psi, rho.target)
    variables = prenex.variables
    if prenex.matrix == Truth(True):
        clauses: tuple = ()
    elif prenex.matrix == Truth(False):
        clauses = ((),)  # the empty clause: falsified by every assignment
    else:
        clauses = cnf_clauses(prenex.matrix)
        if clauses is None:
            raise VocabularyMismatch("matrix did not normalise to clauses")

    checked = 0
    for n in range(2, size_bound + 1):
        for a in enumerate_structures(rho.source, n):
            checked += 1
            image = apply(rho, a)
            runs = [
                (clause, compiled_evaluator(image, disj(clause)))
                for clause in clauses
            ]
            for values in _assignments(image.n, len(variables)):
                env = dict(zip(variables, values))
                for clause, run in runs:
                    if not run(env):
                        implicant = conj(tuple(_negate_literal(l) for l in clause))
                        return SuperfluityReport(
                            holds=False,
                            structures_checked=checked,
                            size_bound=size_bound,
                            counterexample=a,
                            falsified_assignment=env,
                            falsified_clause=disj(clause),
                            falsifying_implicant=implicant,
                        )
    return SuperfluityReport(True, checked, size_bound)


def _assignments(n: int, k: int):
    if k == 0:
        yield ()
        return
    total = n**k
    for idx in range(total):
        yield tuple(tuple_unindex(idx, k, n))


def _negate_literal(lit: Formula) -> Formula:
    atom = literal_atom(lit)
    return atom if isinstance(lit, Not) else Not(atom)


def block_zero_guard() -> Formula:
    """Every edge of a reach-padding image stays inside the zero-prefix
    block.  Valid for source sizes 2 and 3 (image sizes 4 and 9): the two
    branches are selected by bit 1 of max, which distinguishes max = 3
    from max = 8.  Larger images are outside this sentence's scope; the
    preservation harness is explicitly bounded."""
    x, y = Var("x"), Var("y")

    def in_block_4(z):
        return Not(Atom("bit", (z, ONE_T)))

    def in_block_9(z):
        return And(
            (
                Not(Atom("bit", (z, Num(3)))),
                Not(Atom("bit", (z, Num(2)))),
                Not(And((Atom("bit", (z, ZERO)), Atom("bit", (z, ONE_T))))),
            )
        )

    ONE_T = Num(1)
    small = Atom("bit", (MAX, ONE_T))
    body = Implies(
        Atom("E", (x, y)),
        Or(
            (
                And((small, in_block_4(x), in_block_4(y))),
                And((Not(small), in_block_9(x), in_block_9(y))),
            )
        ),
    )
    return forall(("x", "y"), body)


def no_edges_sentence() -> Formula:
    x, y = Var("x"), Var("y")
    return forall(("x", "y"), Not(Atom("E", (x, y))))


# ---------------------------------------------------------------------------
# Application harnesses


@dataclass
class HarnessReport:
    name: str
    cases: int
    disagreements: list

    @property
    def holds(self) -> bool:
        return not self.disagreements


def longest_path_restriction() -> tuple[Formula, Callable[[int], HarnessReport]]:
    """The sentence forcing unit edge lengths and a bound equal to max,
    plus a harness asserting that on its unit-length models the longest
    path decider agrees with the two-point Hamiltonian path decider.

    The harness domain is the structures where the length table is exactly
    {(x, y, 0) : (x, y) edge}: the sentence alone also admits length-0
    edges, on which the equivalence genuinely fails.
    """
    x, y, z = Var("x"), Var("y"), Var("z")
    psi1 = forall(("x", "y", "z"), Implies(Atom("L", (x, y, z)), eq(z, ZERO)))
    psi2 = ForAll("x", Iff(Atom("K", (x,)), Atom("bit", (MAX, x))))
    psi = And((psi1, psi2))

    def harness(size_bound: int = 3) -> HarnessReport:
        cases = 0
        disagreements = []
        for n in range(2, size_bound + 1):
            k_table = {(i,) for i in range(n) if ((n - 1) >> i) & 1}
            for e_mask in range(1 << (n * n)):
                e_table = {
                    (u, v)
                    for u in range(n)
                    for v in range(n)
                    if (e_mask >> (u * n + v)) & 1
                }
                l_table = {(u, v, 0) for (u, v) in e_table}
                for s in range(n):
                    for t in range(n):
                        a = Structure(
                            LP_GRAPH,
                            n,
                            {"L": l_table, "E": e_table, "K": k_table},
                            {"s": s, "t": t},
                        )
                        projected = Structure(
                            ST_GRAPH, n, {"E": e_table}, {"s": s, "t": t}
                        )
                        cases += 1
                        lp = longest_path.decider(a)
                        hp = hp_two_points.decider(projected)
                        if lp != hp:
                            disagreements.append((a, lp, hp))
        return HarnessReport("longest-path", cases, disagreements)

    return psi, harness


def symmetry_sentence() -> Formula:
    x, y = Var("x"), Var("y")
    return forall(("x", "y"), Implies(Atom("E", (x, y)), Atom("E", (y, x))))


def _und_hp_decider(a: Structure) -> bool:
    """Hamiltonian path between the designated vertices along the
    symmetric closure of the edge relation."""
    kern = _kernels_for_structure(a)
    masks, consts = pack_structure(a)
    rows = kern.und_rows_from_mask(a.n, masks[0])
    return bool(kern.hamiltonian_path(a.n, rows, consts[0], consts[1]))


def _und_reach_decider(a: Structure) -> bool:
    kern = _kernels_for_structure(a)
    masks, consts = pack_structure(a)
    rows = kern.und_rows_from_mask(a.n, masks[0])
    return bool(kern.reach(a.n, rows, consts[0], consts[1]))


UNDIRECTED_TWINS = {
    "hp_two_points": _und_hp_decider,
    "reach": _und_reach_decider,
}


def definition_agreement_harness(
    samples: int = 200,
    seed: int = 0,
    budget: Optional[int] = None,
    problem_names: Optional[list[str]] = None,
) -> HarnessReport:
    """Cross-check every catalog decider that has a logical definition:
    table-enumeration evaluation must agree on all size-2 structures, on
    `samples` seeded size-3 structures, and (where the table space is small
    enough) exhaustively at size 3."""
    import random

    from .evaluate import DEFAULT_BUDGET, eval_so
    from .structures import count_structures, structure_at

    budget = budget or DEFAULT_BUDGET
    cases = 0
    disagreements = []
    names = problem_names or [
        name for name, p in PROBLEMS.items() if p.definition is not None
    ]

    def compare(p: Problem, a: Structure):
        nonlocal cases
        cases += 1
        by_definition = eval_so(a, p.definition, budget=budget)
        by_decider = p.decider(a)
        if by_definition != by_decider:
            disagreements.append((p.name, a, by_decider, by_definition))

    for name in sorted(names):
        p = PROBLEMS[name]
        for a in enumerate_structures(p.vocabulary, 2):
            compare(p, a)
        rng = random.Random(seed)
        total3 = count_structures(p.vocabulary, 3)
        for _ in range(samples):
            compare(p, structure_at(p.vocabulary, 3, rng.randrange(total3)))
        if name == "hp_0max":
            # small table space: every size-3 structure, not just samples
            for a in enumerate_structures(p.vocabulary, 3):
                compare(p, a)
    return HarnessReport("definitions", cases, disagreements)


def directed_version_harness(
    problem_name: str = "hp_two_points",
) -> Callable[[int], HarnessReport]:
    """On symmetric graphs (models of the symmetry sentence), the decider
    that follows edge directions must agree with the one that reads the
    edge relation as undirected."""
    p = get_problem(problem_name)
    if problem_name not in UNDIRECTED_TWINS:
        raise UnknownProblem(f"{problem_name} has no undirected twin")
    und = UNDIRECTED_TWINS[problem_name]

    def harness(size_bound: int = 4) -> HarnessReport:
        cases = 0
        disagreements = []
        for n in range(2, size_bound + 1):
            pairs = [(u, v) for u in range(n) for v in range(u, n)]
            for choice in range(1 << len(pairs)):
                e_table = set()
                for i, (u, v) in enumerate(pairs):
                    if (choice >> i) & 1:
                        e_table.add((u, v))
                        e_table.add((v, u))
                for s in range(n):
                    for t in range(n):
                        a = Structure(ST_GRAPH, n, {"E": e_table}, {"s": s, "t": t})
                        cases += 1
                        d = p.decider(a)
                        u = und(a)
                        if d != u:
                            disagreements.append((a, d, u))
        return HarnessReport(f"directed-{problem_name}", cases, disagreements)

    return harness
