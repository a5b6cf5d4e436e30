"""Pure-Python compute kernels.

This module is the reference implementation of the kernel contract; the
compiled extension mirrors it instruction for instruction.  Everything here
works on packed data: relation tables as tuple-index bitmasks, graphs as
per-vertex successor bitmasks, formulas as flat instruction arrays.
"""

from __future__ import annotations

from ._ids import (
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

NAME = "pure"


def rows_from_mask(n: int, mask: int) -> list[int]:
    """Successor bitmask per vertex from a binary-relation table mask."""
    full = (1 << n) - 1
    return [(mask >> (u * n)) & full for u in range(n)]


def und_rows_from_mask(n: int, mask: int) -> list[int]:
    """Symmetric closure without self-loops, as adjacency bitmasks."""
    rows = rows_from_mask(n, mask)
    out = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if (rows[u] >> v) & 1 or (rows[v] >> u) & 1:
                out[u] |= 1 << v
                out[v] |= 1 << u
    return out


# ---------------------------------------------------------------------------
# Graph deciders


def reach(n: int, rows: list[int], s: int, t: int) -> bool:
    reached = 1 << s
    while True:
        new = reached
        m = reached
        while m:
            low = m & -m
            new |= rows[low.bit_length() - 1]
            m ^= low
        if new == reached:
            break
        reached = new
    return bool((reached >> t) & 1)


def altreach(n: int, rows: list[int], u_mask: int, s: int, t: int) -> bool:
    """Alternating accessibility: an existential vertex needs one successor
    that reaches t, a universal vertex needs at least one successor and all
    of them reaching t."""
    acc = 1 << t
    changed = True
    while changed:
        changed = False
        for u in range(n):
            if (acc >> u) & 1:
                continue
            succ = rows[u]
            if (u_mask >> u) & 1:
                ok = succ != 0 and succ & ~acc == 0
            else:
                ok = succ & acc != 0
            if ok:
                acc |= 1 << u
                changed = True
    return bool((acc >> s) & 1)


def hamiltonian_path(n: int, rows: list[int], s: int, t: int) -> bool:
    """Directed Hamiltonian path from s to t by backtracking."""
    if s == t:
        return False
    full = (1 << n) - 1

    def rec(u: int, visited: int) -> bool:
        if visited == full:
            return u == t
        if u == t:
            return False
        m = rows[u] & ~visited
        while m:
            low = m & -m
            v = low.bit_length() - 1
            if rec(v, visited | low):
                return True
            m ^= low
        return False

    return rec(s, 1 << s)


def good_coloring_exists(n: int, und_rows: list[int]) -> bool:
    """Is there a 2-coloring of the undirected edges with no monochromatic
    triangle?  Backtracking over edges with conflict pruning."""
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if (und_rows[u] >> v) & 1
    ]
    index = {e: i for i, e in enumerate(edges)}
    colors = [-1] * len(edges)

    def rec(i: int) -> bool:
        if i == len(edges):
            return True
        u, v = edges[i]
        common = und_rows[u] & und_rows[v]
        for c in (0, 1):
            ok = True
            m = common
            while m:
                low = m & -m
                w = low.bit_length() - 1
                m ^= low
                e1 = index[(u, w) if u < w else (w, u)]
                e2 = index[(v, w) if v < w else (w, v)]
                if colors[e1] == c and colors[e2] == c:
                    ok = False
                    break
            if ok:
                colors[i] = c
                if rec(i + 1):
                    return True
                colors[i] = -1
        return False

    return rec(0)


def all_colorings_monochromatic(n: int, und_rows: list[int]) -> tuple[bool, int]:
    """Exhaustively enumerate every 2-coloring of the undirected edges.

    Returns (every coloring contains a monochromatic triangle, number of
    colorings examined); the count equals 2^edges on a True verdict.
    """
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if (und_rows[u] >> v) & 1
    ]
    index = {e: i for i, e in enumerate(edges)}
    triangles = []
    for u in range(n):
        for v in range(u + 1, n):
            if not (und_rows[u] >> v) & 1:
                continue
            both = und_rows[u] & und_rows[v]
            w = both >> (v + 1)
            base = v + 1
            while w:
                low = w & -w
                x = base + low.bit_length() - 1
                triangles.append((index[(u, v)], index[(u, x)], index[(v, x)]))
                w ^= low
    checked = 0
    for coloring in range(1 << len(edges)):
        checked += 1
        mono = False
        for e1, e2, e3 in triangles:
            c1 = (coloring >> e1) & 1
            if c1 == (coloring >> e2) & 1 and c1 == (coloring >> e3) & 1:
                mono = True
                break
        if not mono:
            return False, checked
    return True, checked


def three_dm(n: int, m_mask: int) -> bool:
    """Perfect three-dimensional matching inside the triple table."""
    nn = n * n
    by_first: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if (m_mask >> (a * nn + b * n + c)) & 1:
                    by_first[a].append((b, c))

    def rec(a: int, used_b: int, used_c: int) -> bool:
        if a == n:
            return True
        for b, c in by_first[a]:
            if not (used_b >> b) & 1 and not (used_c >> c) & 1:
                if rec(a + 1, used_b | (1 << b), used_c | (1 << c)):
                    return True
        return False

    return rec(0, 0, 0)


def longest_path(
    n: int,
    e_rows: list[int],
    lengths: list[list[int]],
    bound: int,
    s: int,
    t: int,
) -> bool:
    """Simple directed path from s to t with total length at least bound."""

    def rec(u: int, visited: int, total: int) -> bool:
        if u == t:
            return total >= bound
        m = e_rows[u] & ~visited
        while m:
            low = m & -m
            v = low.bit_length() - 1
            if rec(v, visited | low, total + lengths[u][v]):
                return True
            m ^= low
        return False

    return rec(s, 1 << s, 0)


def _lengths_from_mask(n: int, l_mask: int) -> list[list[int]]:
    nn = n * n
    out = [[0] * n for _ in range(n)]
    for x in range(n):
        for y in range(n):
            length = 0
            for i in range(n):
                if (l_mask >> (x * nn + y * n + i)) & 1:
                    length |= 1 << i
            out[x][y] = length
    return out


def decide(kind: int, n: int, masks: tuple[int, ...], consts: tuple[int, ...]) -> bool:
    """Dispatch to a decider; masks and consts follow the catalog's
    canonical vocabulary order for the given kind."""
    if kind == K_REACH:
        return reach(n, rows_from_mask(n, masks[0]), consts[0], consts[1])
    if kind == K_ALTREACH:
        return altreach(n, rows_from_mask(n, masks[0]), masks[1], consts[0], consts[1])
    if kind == K_HP_0MAX:
        return hamiltonian_path(n, rows_from_mask(n, masks[0]), 0, n - 1)
    if kind == K_HP_01:
        return hamiltonian_path(n, rows_from_mask(n, masks[0]), 0, 1)
    if kind == K_HP_TWO_POINTS:
        return hamiltonian_path(n, rows_from_mask(n, masks[0]), consts[0], consts[1])
    if kind == K_MONO_TRIANGLE:
        return good_coloring_exists(n, und_rows_from_mask(n, masks[0]))
    if kind == K_CO_MONO_TRIANGLE:
        return not good_coloring_exists(n, und_rows_from_mask(n, masks[0]))
    if kind == K_THREE_DM:
        return three_dm(n, masks[0])
    if kind == K_LONGEST_PATH:
        return longest_path(
            n,
            rows_from_mask(n, masks[1]),
            _lengths_from_mask(n, masks[0]),
            masks[2],
            consts[0],
            consts[1],
        )
    raise ValueError(f"unknown problem kind {kind}")


# ---------------------------------------------------------------------------
# First-witness search over the structure enumeration


def search_witness(
    n: int,
    rel_bits: list[int],
    required: list[int],
    forbidden: list[int],
    const_fixed: list[int],
    kind: int,
):
    """First structure, in enumeration order, whose relation tables contain
    all required bits, avoid all forbidden bits, match the fixed constants,
    and (when kind is not K_NONE) is accepted by the kind's decider.

    Returns (found, masks, consts, examined).
    """
    free_positions = []
    for bits, req, forb in zip(rel_bits, required, forbidden):
        free_positions.append(
            [
                i
                for i in range(bits)
                if not ((req >> i) & 1) and not ((forb >> i) & 1)
            ]
        )
    const_choices = [list(range(n)) if v < 0 else [v] for v in const_fixed]

    nrels = len(rel_bits)
    masks = [0] * nrels
    consts = [0] * len(const_fixed)
    examined = 0

    def scatter(counter: int, positions: list[int], base: int) -> int:
        m = base
        for p in positions:
            if counter & 1:
                m |= 1 << p
            counter >>= 1
        return m

    def rec_consts(j: int):
        nonlocal examined
        if j == len(const_fixed):
            examined += 1
            if kind == K_NONE or decide(kind, n, tuple(masks), tuple(consts)):
                return True
            return False
        for v in const_choices[j]:
            consts[j] = v
            if rec_consts(j + 1):
                return True
        return False

    def rec_rels(i: int):
        if i == nrels:
            return rec_consts(0)
        pos = free_positions[i]
        for counter in range(1 << len(pos)):
            masks[i] = scatter(counter, pos, required[i])
            if rec_rels(i + 1):
                return True
        return False

    found = rec_rels(0)
    if not found:
        masks = list(required)
        consts = [v if v >= 0 else 0 for v in const_fixed]
    return found, tuple(masks), tuple(consts), examined


def count_search_space(
    n: int, rel_bits: list[int], required: list[int], forbidden: list[int],
    const_fixed: list[int],
) -> int:
    total = 1
    for bits, req, forb in zip(rel_bits, required, forbidden):
        free = bits - bin(req | forb).count("1")
        total <<= free
    for v in const_fixed:
        if v < 0:
            total *= n
    return total


# ---------------------------------------------------------------------------
# Formula VM


def vm_eval(
    ops: list[int],
    root: int,
    terms: list[int],
    offsets: list[int],
    n: int,
    tables: bytearray,
    env: list[int],
) -> int:
    def term(code: int) -> int:
        return env[code] if code >= 0 else -code - 1

    def ev(i: int) -> int:
        base = 4 * i
        op = ops[base]
        a = ops[base + 1]
        b = ops[base + 2]
        if op == OP_ATOM:
            arity = ops[base + 3]
            idx = 0
            for j in range(arity):
                idx = idx * n + term(terms[b + j])
            return tables[offsets[a] + idx]
        if op == OP_AND:
            return ev(b) if ev(a) else 0
        if op == OP_OR:
            return 1 if ev(a) else ev(b)
        if op == OP_NOT:
            return 0 if ev(a) else 1
        if op == OP_IMPLIES:
            return ev(b) if ev(a) else 1
        if op == OP_IFF:
            return 1 if ev(a) == ev(b) else 0
        if op == OP_FORALL:
            for v in range(n):
                env[a] = v
                if not ev(b):
                    return 0
            return 1
        if op == OP_EXISTS:
            for v in range(n):
                env[a] = v
                if ev(b):
                    return 1
            return 0
        if op == OP_EQ:
            return 1 if term(a) == term(b) else 0
        if op == OP_LE:
            return 1 if term(a) <= term(b) else 0
        if op == OP_BIT:
            return (term(a) >> term(b)) & 1
        if op == OP_SUC:
            return 1 if term(b) == term(a) + 1 else 0
        if op == OP_TRUE:
            return 1
        if op == OP_FALSE:
            return 0
        raise ValueError(f"bad opcode {op}")

    return ev(root)


def so_check(
    ops: list[int],
    root: int,
    terms: list[int],
    offsets: list[int],
    n: int,
    tables: bytearray,
    quants: list[tuple[int, int, int, list[int]]],
) -> int:
    """Evaluate a second-order quantifier prefix over the VM matrix.

    quants holds (is_forall, table_offset, table_size, allowed_positions)
    per quantifier, outermost first.  Tables are enumerated as subset
    counters over the allowed positions, in ascending order, with
    incremental byte flips.
    """
    nq = len(quants)

    def level(q: int) -> int:
        if q == nq:
            return vm_eval(ops, root, terms, offsets, n, tables, env)
        is_all, off, size, pos = quants[q]
        for i in range(size):
            tables[off + i] = 0
        r = level(q + 1)
        if is_all and not r:
            return 0
        if not is_all and r:
            return 1
        for counter in range(1, 1 << len(pos)):
            diff = (counter - 1) ^ counter
            j = 0
            while diff:
                if diff & 1:
                    tables[off + pos[j]] ^= 1
                diff >>= 1
                j += 1
            r = level(q + 1)
            if is_all and not r:
                return 0
            if not is_all and r:
                return 1
        return 1 if is_all else 0

    nvars = 0
    for i in range(0, len(ops), 4):
        if ops[i] in (OP_FORALL, OP_EXISTS):
            nvars = max(nvars, ops[i + 1] + 1)
    env = [0] * max(nvars, _max_term_slot(ops, terms) + 1, 1)
    return level(0)


def _max_term_slot(ops: list[int], terms: list[int]) -> int:
    slot = -1
    for i in range(0, len(ops), 4):
        op = ops[i]
        if op == OP_ATOM:
            b = ops[i + 2]
            for j in range(ops[i + 3]):
                if terms[b + j] >= 0:
                    slot = max(slot, terms[b + j])
        elif op in (OP_EQ, OP_LE, OP_BIT, OP_SUC):
            for code in (ops[i + 1], ops[i + 2]):
                if code >= 0:
                    slot = max(slot, code)
    return slot
