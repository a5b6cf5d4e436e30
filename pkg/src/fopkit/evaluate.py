"""Model checking.

eval_fo is a direct recursive interpreter over the AST and is the
correctness oracle for everything else.  Hot paths compile formulas to a
small instruction program executed by the active kernel backend; the two
must always agree, and the test suite enforces that.

Second-order evaluation enumerates relation tables as subset counters.
Tables are restricted to the tuples not excluded by guard conjuncts of the
shape  forall x̄ (R(x̄) -> delta(x̄))  with delta independent of the
quantified relations; every excluded table falsifies the matrix, so the
result is the same as enumerating all 2^(n^a) tables while the work often
is not.  The enumeration budget is checked up front against the exact
number of tables the enumeration could visit.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Callable, Optional

from . import backends
from .backends._ids import (
    K_CO_MONO_TRIANGLE,
    K_MONO_TRIANGLE,
    K_NONE,
    OP_AND,
    OP_ATOM,
    OP_BIT,
    OP_EQ,
    OP_EXISTS,
    OP_FALSE,
    OP_FORALL,
    OP_IFF,
    OP_IMPLIES,
    OP_LE,
    OP_NOT,
    OP_OR,
    OP_SUC,
    OP_TRUE,
)
from .errors import (
    BudgetExceeded,
    NotFirstOrder,
    OutOfUniverse,
    UnboundVariable,
    UnknownSymbol,
    VocabularyMismatch,
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
    check_formula,
    free_so_relations,
    free_variables,
    is_first_order,
    literal_atom,
    _flat_parts,
)
from .structures import (
    Structure,
    count_structures,
    enumerate_structures,
    tuple_index,
    tuple_unindex,
    unpack_structure,
)

DEFAULT_BUDGET = 1 << 26

Assignment = dict[str, int]


def _term_value(t, a: Structure, env: dict[str, int]) -> int:
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(t.name)
        return env[t.name]
    if isinstance(t, Const):
        if t.name not in a.constants:
            raise VocabularyMismatch(f"constant {t.name!r} not interpreted")
        return a.constants[t.name]
    if isinstance(t, Num):
        if t.value == "max":
            return a.n - 1
        if not 0 <= t.value < a.n:
            raise OutOfUniverse(t.value, a.n)
        return t.value
    raise TypeError(f"not a term: {t!r}")


def eval_fo(a: Structure, f: Formula, asg: Optional[Assignment] = None) -> bool:
    """Straightforward recursive model checking; quantifiers enumerate the
    whole universe."""
    try:
        check_formula(f, a.vocabulary)
    except UnknownSymbol as exc:
        raise VocabularyMismatch(str(exc)) from exc
    env: dict[str, int] = dict(asg or {})
    for v in free_variables(f):
        if v not in env:
            raise UnboundVariable(v)

    n = a.n

    def ev(g: Formula, env: dict[str, int]) -> bool:
        if isinstance(g, Truth):
            return g.value
        if isinstance(g, Atom):
            if g.rel in NUMERIC_RELATIONS:
                x = _term_value(g.args[0], a, env)
                y = _term_value(g.args[1], a, env)
                if g.rel == "=":
                    return x == y
                if g.rel == "<=":
                    return x <= y
                if g.rel == "bit":
                    return (x >> y) & 1 == 1
                return y == x + 1  # suc
            if g.rel not in a.relations:
                raise VocabularyMismatch(f"relation {g.rel!r} not interpreted")
            tup = tuple(_term_value(t, a, env) for t in g.args)
            return tup in a.relations[g.rel]
        if isinstance(g, Not):
            return not ev(g.sub, env)
        if isinstance(g, And):
            return all(ev(p, env) for p in g.parts)
        if isinstance(g, Or):
            return any(ev(p, env) for p in g.parts)
        if isinstance(g, Implies):
            return (not ev(g.left, env)) or ev(g.right, env)
        if isinstance(g, Iff):
            return ev(g.left, env) == ev(g.right, env)
        if isinstance(g, (ForAll, Exists)):
            want_all = isinstance(g, ForAll)
            for v in range(n):
                inner = dict(env)
                inner[g.var] = v
                r = ev(g.body, inner)
                if want_all and not r:
                    return False
                if not want_all and r:
                    return True
            return want_all
        if isinstance(g, (ExistsRel, ForAllRel)):
            raise NotFirstOrder(
                f"second-order quantifier over {g.rel!r}; use eval_so"
            )
        raise TypeError(f"not a formula node: {g!r}")

    return ev(f, env)


# ---------------------------------------------------------------------------
# Compilation to the kernel instruction format


@dataclass
class Program:
    ops: array
    root: int
    terms: array
    offsets: array
    rel_order: tuple[tuple[str, int], ...]  # vocabulary relations, then quantified
    n: int
    table_size: int
    var_slots: dict[str, int]
    nslots: int

    def blank_env(self) -> list[int]:
        return [0] * max(self.nslots, 1)


def compile_program(
    f: Formula,
    voc: Vocabulary,
    n: int,
    const_values: dict[str, int],
    so_rels: tuple[tuple[str, int], ...] = (),
) -> Program:
    """Flatten a formula into instruction arrays for the kernel VM.

    Vocabulary constants and numeric terms are resolved to concrete values,
    so a program is specific to a universe size and constant assignment.
    """
    rel_order = tuple(voc.relations) + tuple(so_rels)
    rel_slot = {name: i for i, (name, _) in enumerate(rel_order)}
    rel_arity = {name: a for name, a in rel_order}
    offsets = []
    off = 0
    for name, arity in rel_order:
        offsets.append(off)
        off += n**arity
    table_size = off

    ops: list[int] = []
    terms: list[int] = []
    var_slots: dict[str, int] = {}
    next_slot = 0

    for v in free_variables(f):
        var_slots[v] = next_slot
        next_slot = next_slot + 1

    def term_code(t, scope: dict[str, int]) -> int:
        if isinstance(t, Var):
            if t.name not in scope:
                raise UnboundVariable(t.name)
            return scope[t.name]
        if isinstance(t, Const):
            if t.name not in const_values:
                raise VocabularyMismatch(f"constant {t.name!r} not interpreted")
            return -const_values[t.name] - 1
        if isinstance(t, Num):
            v = n - 1 if t.value == "max" else t.value
            if not 0 <= v < n:
                raise OutOfUniverse(t.value, n)
            return -v - 1
        raise TypeError(f"not a term: {t!r}")

    def emit(op: int, a: int = 0, b: int = 0, c: int = 0) -> int:
        ops.extend((op, a, b, c))
        return len(ops) // 4 - 1

    _numeric_op = {"=": OP_EQ, "<=": OP_LE, "bit": OP_BIT, "suc": OP_SUC}

    def walk(g: Formula, scope: dict[str, int]) -> int:
        nonlocal next_slot
        if isinstance(g, Truth):
            return emit(OP_TRUE if g.value else OP_FALSE)
        if isinstance(g, Atom):
            if g.rel in NUMERIC_RELATIONS:
                return emit(
                    _numeric_op[g.rel],
                    term_code(g.args[0], scope),
                    term_code(g.args[1], scope),
                )
            if g.rel not in rel_slot:
                raise VocabularyMismatch(f"relation {g.rel!r} not interpreted")
            if len(g.args) != rel_arity[g.rel]:
                raise VocabularyMismatch(f"arity mismatch on {g.rel!r}")
            toff = len(terms)
            for t in g.args:
                terms.append(term_code(t, scope))
            return emit(OP_ATOM, rel_slot[g.rel], toff, len(g.args))
        if isinstance(g, Not):
            return emit(OP_NOT, walk(g.sub, scope))
        if isinstance(g, (And, Or)):
            op = OP_AND if isinstance(g, And) else OP_OR
            if not g.parts:
                return emit(OP_TRUE if isinstance(g, And) else OP_FALSE)
            node = walk(g.parts[0], scope)
            for p in g.parts[1:]:
                node = emit(op, node, walk(p, scope))
            return node
        if isinstance(g, Implies):
            left = walk(g.left, scope)
            return emit(OP_IMPLIES, left, walk(g.right, scope))
        if isinstance(g, Iff):
            left = walk(g.left, scope)
            return emit(OP_IFF, left, walk(g.right, scope))
        if isinstance(g, (ForAll, Exists)):
            slot = next_slot
            next_slot += 1
            inner = dict(scope)
            inner[g.var] = slot
            body = walk(g.body, inner)
            op = OP_FORALL if isinstance(g, ForAll) else OP_EXISTS
            return emit(op, slot, body)
        if isinstance(g, (ExistsRel, ForAllRel)):
            raise NotFirstOrder("matrix must be first order")
        raise TypeError(f"not a formula node: {g!r}")

    root = walk(f, dict(var_slots))
    return Program(
        array("q", ops),
        root,
        array("q", terms),
        array("q", offsets),
        rel_order,
        n,
        max(table_size, 1),
        var_slots,
        next_slot,
    )


def tables_for(a: Structure, prog: Program) -> bytearray:
    """A table buffer holding the structure's relation contents; regions for
    quantified relations stay zeroed."""
    buf = bytearray(prog.table_size)
    for slot, (name, arity) in enumerate(prog.rel_order):
        if name in a.relations:
            base = prog.offsets[slot]
            for t in a.relations[name]:
                buf[base + tuple_index(t, a.n)] = 1
    return buf


def compiled_evaluator(
    a: Structure, f: Formula
) -> Callable[[dict[str, int]], bool]:
    """Compile once against a structure, then evaluate under many variable
    assignments.  Semantically identical to eval_fo."""
    prog = compile_program(f, a.vocabulary, a.n, a.constants)
    tables = tables_for(a, prog)
    kern = backends.active
    ops, root, terms, offsets, n = prog.ops, prog.root, prog.terms, prog.offsets, prog.n
    slots = prog.var_slots
    env_template = prog.blank_env()

    def run(asg: dict[str, int]) -> bool:
        env = list(env_template)
        for name, slot in slots.items():
            env[slot] = asg[name]
        return bool(kern.vm_eval(ops, root, terms, offsets, n, tables, env))

    return run


# ---------------------------------------------------------------------------
# Second-order evaluation


def _strip_so_prefix(f: Formula):
    quants = []
    while isinstance(f, (ExistsRel, ForAllRel)):
        quants.append((isinstance(f, ForAllRel), f.rel, f.arity))
        f = f.body
    return quants, f


def _guard_allowed(
    a: Structure, matrix: Formula, rel: str, arity: int, so_names: set[str]
) -> list[int]:
    """Tuple indices of rel not excluded by guard conjuncts of the matrix.

    A guard is a conjunct  forall v̄ (rel(pattern) -> delta)  or
    forall v̄ not rel(pattern)  whose delta mentions no quantified relation.
    Tables containing an excluded tuple falsify the matrix, so restricting
    the enumeration to the allowed tuples cannot change any result.
    """
    n = a.n
    guards = []
    for conjunct in _flat_parts(matrix, And):
        chain = []
        body = conjunct
        while isinstance(body, ForAll):
            chain.append(body.var)
            body = body.body
        if isinstance(body, Implies):
            head, delta = body.left, body.right
        elif isinstance(body, Not):
            head, delta = body.sub, Truth(False)
        else:
            continue
        if not isinstance(head, Atom) or head.rel != rel:
            continue
        if not all(isinstance(t, Var) and t.name in chain for t in head.args):
            continue
        rest = [v for v in chain if all(
            not (isinstance(t, Var) and t.name == v) for t in head.args
        )]
        from .logic import forall as _forall

        residual = _forall(rest, delta)
        if any(r in so_names for r in free_so_relations(residual, a.vocabulary)):
            continue
        guards.append((tuple(t.name for t in head.args), residual))

    allowed = []
    for idx in range(n**arity):
        tup = tuple_unindex(idx, arity, n)
        ok = True
        for pattern, residual in guards:
            env: dict[str, int] = {}
            matches = True
            for name, value in zip(pattern, tup):
                if env.setdefault(name, value) != value:
                    matches = False
                    break
            if matches and not eval_fo(a, residual, env):
                ok = False
                break
        if ok:
            allowed.append(idx)
    return allowed


def so_enumeration_size(a: Structure, f: Formula) -> int:
    """The exact number of table combinations eval_so would enumerate."""
    quants, matrix = _strip_so_prefix(f)
    so_names = {rel for _, rel, _ in quants}
    needed = 1
    for is_forall, rel, arity in quants:
        if is_forall:
            free = a.n**arity
        else:
            free = len(_guard_allowed(a, matrix, rel, arity, so_names))
        needed <<= free
    return needed


def eval_so(a: Structure, f: Formula, budget: int = DEFAULT_BUDGET) -> bool:
    """Evaluate a sentence with a second-order quantifier prefix by
    enumerating relation tables; raises BudgetExceeded (with the exact
    count) when the enumeration would exceed the budget."""
    try:
        check_formula(f, a.vocabulary)
    except UnknownSymbol as exc:
        raise VocabularyMismatch(str(exc)) from exc
    if free_variables(f):
        raise UnboundVariable(free_variables(f)[0])
    quants, matrix = _strip_so_prefix(f)
    if not is_first_order(matrix):
        raise NotFirstOrder("quantifier prefix must be a leading block")
    so_names = {rel for _, rel, _ in quants}

    allowed_per_quant = []
    needed = 1
    for is_forall, rel, arity in quants:
        if is_forall:
            allowed = list(range(a.n**arity))
        else:
            allowed = _guard_allowed(a, matrix, rel, arity, so_names)
        allowed_per_quant.append(allowed)
        needed <<= len(allowed)
    if needed > budget:
        raise BudgetExceeded(needed, budget)

    so_rels = tuple((rel, arity) for _, rel, arity in quants)
    prog = compile_program(matrix, a.vocabulary, a.n, a.constants, so_rels)
    tables = tables_for(a, prog)
    nrels = len(a.vocabulary.relations)
    quant_specs = []
    for i, (is_forall, rel, arity) in enumerate(quants):
        slot = nrels + i
        quant_specs.append(
            (
                1 if is_forall else 0,
                prog.offsets[slot],
                a.n**arity,
                allowed_per_quant[i],
            )
        )
    kern = backends.active
    return bool(
        kern.so_check(
            prog.ops, prog.root, prog.terms, prog.offsets, a.n, tables, quant_specs
        )
    )


# ---------------------------------------------------------------------------
# Consistency search


class _Contradiction(Exception):
    pass


def _ground_value(t, asg: Assignment, m: int) -> int:
    if isinstance(t, Var):
        if t.name not in asg:
            raise UnboundVariable(t.name)
        v = asg[t.name]
    elif isinstance(t, Num):
        v = m - 1 if t.value == "max" else t.value
    else:
        return -1  # vocabulary constant: not ground
    if not 0 <= v < m:
        raise OutOfUniverse(v, m)
    return v


def ground_constraints(
    f: Formula, asg: Assignment, voc: Vocabulary, m: int
):
    """Decompose a conjunction of ground literals into packed constraints.

    Returns (required, forbidden, const_fixed) or None when the formula is
    not such a conjunction.  Raises _Contradiction when the conjunction is
    unsatisfiable on syntactic grounds (complementary literals, one constant
    bound to two values, or a false ground numeric literal).
    """
    required = [0] * len(voc.relations)
    forbidden = [0] * len(voc.relations)
    const_fixed = [-1] * len(voc.constants)

    for lit in _flat_parts(f, And):
        if isinstance(lit, Truth):
            if not lit.value:
                raise _Contradiction
            continue
        atom = literal_atom(lit)
        if atom is None:
            return None
        positive = isinstance(lit, Atom)
        if voc.has_relation(atom.rel):
            values = []
            for t in atom.args:
                v = _ground_value(t, asg, m)
                if v < 0:
                    return None
                values.append(v)
            bit = 1 << tuple_index(tuple(values), m)
            i = voc.relation_index(atom.rel)
            if positive:
                if forbidden[i] & bit:
                    raise _Contradiction
                required[i] |= bit
            else:
                if required[i] & bit:
                    raise _Contradiction
                forbidden[i] |= bit
            continue
        if atom.rel == "=":
            sides = atom.args
            const_side = [t for t in sides if isinstance(t, Const)]
            if len(const_side) == 1 and positive:
                c = const_side[0]
                other = sides[0] if sides[1] is c else sides[1]
                v = _ground_value(other, asg, m)
                if v < 0:
                    return None
                j = voc.constant_index(c.name)
                if const_fixed[j] not in (-1, v):
                    raise _Contradiction
                const_fixed[j] = v
                continue
            if len(const_side) > 0:
                return None
        if atom.rel in NUMERIC_RELATIONS:
            x = _ground_value(atom.args[0], asg, m)
            y = _ground_value(atom.args[1], asg, m)
            if x < 0 or y < 0:
                return None
            if atom.rel == "=":
                value = x == y
            elif atom.rel == "<=":
                value = x <= y
            elif atom.rel == "bit":
                value = (x >> y) & 1 == 1
            else:
                value = y == x + 1
            if value != positive:
                raise _Contradiction
            continue
        return None
    return required, forbidden, const_fixed


def search_space_size(
    voc: Vocabulary, m: int, required, forbidden, const_fixed
) -> int:
    total = 1
    for (name, arity), req, forb in zip(voc.relations, required, forbidden):
        total <<= m**arity - bin(req | forb).count("1")
    for v in const_fixed:
        if v < 0:
            total *= m
    return total


def _kernels_for(rel_bits, n: int):
    kern = backends.active
    if kern.NAME != "pure" and (max(rel_bits, default=0) > 63 or n > 63):
        return backends.pure
    return kern


def und_graph_constant(m: int, e_required: int, e_forbidden: int) -> bool:
    """True when every free bit of the binary edge table is either a
    self-loop or the mirror of a required edge, so the simple undirected
    graph is the same for all structures in the constrained subspace."""
    for u in range(m):
        for v in range(m):
            if u == v:
                continue
            p = u * m + v
            if (e_required >> p) & 1 or (e_forbidden >> p) & 1:
                continue
            if not (e_required >> (v * m + u)) & 1:
                return False
    return True


def search_constrained(
    voc: Vocabulary,
    m: int,
    required,
    forbidden,
    const_fixed,
    kind: int,
    budget: int = DEFAULT_BUDGET,
):
    """First-witness search over the constrained structure subspace.

    Returns (found, masks, consts, examined).  When the decider only
    depends on the simple undirected graph and no free table bit can change
    it, the verdict is constant over the subspace and a single decider call
    settles the search.
    """
    rel_bits = [m**arity for _, arity in voc.relations]
    total = search_space_size(voc, m, required, forbidden, const_fixed)
    if total > budget:
        raise BudgetExceeded(total, budget)

    if kind in (K_MONO_TRIANGLE, K_CO_MONO_TRIANGLE):
        if und_graph_constant(m, required[0], forbidden[0]):
            masks = tuple(required)
            consts = tuple(v if v >= 0 else 0 for v in const_fixed)
            kern = _kernels_for(rel_bits, m)
            if kern.decide(kind, m, masks, consts):
                return True, masks, consts, 1
            return False, masks, consts, total

    kern = _kernels_for(rel_bits, m)
    return kern.search_witness(
        m, rel_bits, list(required), list(forbidden), list(const_fixed), kind
    )


def is_consistent(
    voc: Vocabulary,
    f: Formula,
    asg: Optional[Assignment],
    m: int,
    within=None,
    budget: int = DEFAULT_BUDGET,
) -> Optional[Structure]:
    """A size-m witness structure satisfying f under asg (and belonging to
    `within` when given), or None.  The search is exhaustive in enumeration
    order; the first witness is returned."""
    if m < 2:
        raise OutOfUniverse(m, 2)
    asg = dict(asg or {})
    check_formula(f, voc)
    if within is not None and within.vocabulary != voc:
        raise VocabularyMismatch(
            f"problem {within.name!r} is over a different vocabulary"
        )

    try:
        packed = ground_constraints(f, asg, voc, m)
    except _Contradiction:
        return None

    if packed is not None:
        required, forbidden, const_fixed = packed
        kind = K_NONE if within is None else within.search_kind(m)
        if kind is not None:
            found, masks, consts, _ = search_constrained(
                voc, m, required, forbidden, const_fixed, kind, budget
            )
            if not found:
                return None
            return unpack_structure(voc, m, masks, consts)

    for a in enumerate_structures(voc, m, budget=budget, size_cap=m):
        if eval_fo(a, f, asg) and (within is None or within.decider(a)):
            return a
    return None
