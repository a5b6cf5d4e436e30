# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled compute kernels.

Instruction-for-instruction mirror of the pure backend (see pure.py for
the contract); graphs are capped at 63 vertices and relation tables at 63
bits here, which the callers enforce before dispatching.
"""

import array as _array

from cpython cimport array

from ._ids import (
    K_REACH,
    K_ALTREACH,
    K_HP_0MAX,
    K_HP_01,
    K_HP_TWO_POINTS,
    K_MONO_TRIANGLE,
    K_CO_MONO_TRIANGLE,
    K_THREE_DM,
    K_LONGEST_PATH,
    K_NONE,
    OP_FALSE,
    OP_TRUE,
    OP_NOT,
    OP_AND,
    OP_OR,
    OP_IMPLIES,
    OP_IFF,
    OP_FORALL,
    OP_EXISTS,
    OP_ATOM,
    OP_EQ,
    OP_LE,
    OP_BIT,
    OP_SUC,
)

NAME = "native"

ctypedef unsigned long long u64

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

cdef int K_REACH_C = K_REACH
cdef int K_ALTREACH_C = K_ALTREACH
cdef int K_HP_0MAX_C = K_HP_0MAX
cdef int K_HP_01_C = K_HP_01
cdef int K_HP_TWO_POINTS_C = K_HP_TWO_POINTS
cdef int K_MONO_TRIANGLE_C = K_MONO_TRIANGLE
cdef int K_CO_MONO_TRIANGLE_C = K_CO_MONO_TRIANGLE
cdef int K_THREE_DM_C = K_THREE_DM
cdef int K_LONGEST_PATH_C = K_LONGEST_PATH
cdef int K_NONE_C = K_NONE

cdef int OP_FALSE_C = OP_FALSE
cdef int OP_TRUE_C = OP_TRUE
cdef int OP_NOT_C = OP_NOT
cdef int OP_AND_C = OP_AND
cdef int OP_OR_C = OP_OR
cdef int OP_IMPLIES_C = OP_IMPLIES
cdef int OP_IFF_C = OP_IFF
cdef int OP_FORALL_C = OP_FORALL
cdef int OP_EXISTS_C = OP_EXISTS
cdef int OP_ATOM_C = OP_ATOM
cdef int OP_EQ_C = OP_EQ
cdef int OP_LE_C = OP_LE
cdef int OP_BIT_C = OP_BIT
cdef int OP_SUC_C = OP_SUC


def rows_from_mask(int n, mask):
    full = (1 << n) - 1
    return [(mask >> (u * n)) & full for u in range(n)]


def und_rows_from_mask(int n, mask):
    rows = rows_from_mask(n, mask)
    out = [0] * n
    for u in range(n):
        for v in range(u + 1, n):
            if (rows[u] >> v) & 1 or (rows[v] >> u) & 1:
                out[u] |= 1 << v
                out[v] |= 1 << u
    return out


cdef void _fill_rows(int n, object rows, u64* out):
    cdef int u
    for u in range(n):
        out[u] = rows[u]


# ---------------------------------------------------------------------------
# Graph deciders


cdef bint c_reach(int n, u64* rows, int s, int t) noexcept:
    cdef u64 reached = (<u64>1) << s
    cdef u64 new_, m, low
    while True:
        new_ = reached
        m = reached
        while m:
            low = m & (~m + 1)
            new_ |= rows[__builtin_ctzll(low)]
            m ^= low
        if new_ == reached:
            break
        reached = new_
    return (reached >> t) & 1


cdef bint c_altreach(int n, u64* rows, u64 u_mask, int s, int t) noexcept:
    cdef u64 acc = (<u64>1) << t
    cdef u64 succ
    cdef bint changed = True, ok
    cdef int u
    while changed:
        changed = False
        for u in range(n):
            if (acc >> u) & 1:
                continue
            succ = rows[u]
            if (u_mask >> u) & 1:
                ok = succ != 0 and (succ & ~acc) == 0
            else:
                ok = (succ & acc) != 0
            if ok:
                acc |= (<u64>1) << u
                changed = True
    return (acc >> s) & 1


cdef bint c_hp_rec(u64* rows, int u, int t, u64 visited, u64 full) noexcept:
    cdef u64 m, low
    if visited == full:
        return u == t
    if u == t:
        return False
    m = rows[u] & ~visited
    while m:
        low = m & (~m + 1)
        if c_hp_rec(rows, __builtin_ctzll(low), t, visited | low, full):
            return True
        m ^= low
    return False


cdef bint c_hp(int n, u64* rows, int s, int t) noexcept:
    if s == t:
        return False
    return c_hp_rec(rows, s, t, (<u64>1) << s, ((<u64>1) << n) - 1)


cdef bint c_good_coloring_rec(
    int i, int nedges, int* eu, int* ev, int* eidx, signed char* colors,
    u64* und, int n,
) noexcept:
    cdef int u, v, w, e1, e2, c
    cdef u64 common, low, m
    cdef bint ok
    if i == nedges:
        return True
    u = eu[i]
    v = ev[i]
    common = und[u] & und[v]
    for c in range(2):
        ok = True
        m = common
        while m:
            low = m & (~m + 1)
            w = __builtin_ctzll(low)
            m ^= low
            e1 = eidx[(u if u < w else w) * n + (w if u < w else u)]
            e2 = eidx[(v if v < w else w) * n + (w if v < w else v)]
            if colors[e1] == c and colors[e2] == c:
                ok = False
                break
        if ok:
            colors[i] = c
            if c_good_coloring_rec(i + 1, nedges, eu, ev, eidx, colors, und, n):
                return True
            colors[i] = -1
    return False


cdef bint c_good_coloring(int n, u64* und) noexcept:
    cdef int eu[2048]
    cdef int ev[2048]
    cdef int eidx[4096]
    cdef signed char colors[2048]
    cdef int nedges = 0
    cdef int u, v
    for u in range(n):
        for v in range(u + 1, n):
            if (und[u] >> v) & 1:
                eu[nedges] = u
                ev[nedges] = v
                eidx[u * n + v] = nedges
                colors[nedges] = -1
                nedges += 1
    return c_good_coloring_rec(0, nedges, eu, ev, eidx, colors, und, n)


def good_coloring_exists(int n, und_rows):
    cdef u64 und[64]
    _fill_rows(n, und_rows, und)
    return bool(c_good_coloring(n, und))


def all_colorings_monochromatic(int n, und_rows):
    cdef u64 und[64]
    _fill_rows(n, und_rows, und)
    cdef int eidx[4096]
    cdef int t1[8192]
    cdef int t2[8192]
    cdef int t3[8192]
    cdef int nedges = 0, ntris = 0
    cdef int u, v, w
    for u in range(n):
        for v in range(u + 1, n):
            if (und[u] >> v) & 1:
                eidx[u * n + v] = nedges
                nedges += 1
    if nedges > 62:
        raise OverflowError("too many edges for exhaustive coloring enumeration")
    for u in range(n):
        for v in range(u + 1, n):
            if not (und[u] >> v) & 1:
                continue
            for w in range(v + 1, n):
                if (und[u] >> w) & 1 and (und[v] >> w) & 1:
                    t1[ntris] = eidx[u * n + v]
                    t2[ntris] = eidx[u * n + w]
                    t3[ntris] = eidx[v * n + w]
                    ntris += 1
    cdef u64 coloring, total = (<u64>1) << nedges
    cdef u64 checked = 0
    cdef bint mono
    cdef int i, c1
    for coloring in range(total):
        checked += 1
        mono = False
        for i in range(ntris):
            c1 = (coloring >> t1[i]) & 1
            if c1 == ((coloring >> t2[i]) & 1) and c1 == ((coloring >> t3[i]) & 1):
                mono = True
                break
        if not mono:
            return False, int(checked)
    return True, int(checked)


cdef bint c_three_dm_rec(
    int a, int n, int* nb, int* tb, int* tc, u64 used_b, u64 used_c
) noexcept:
    cdef int i, b, c
    if a == n:
        return True
    for i in range(nb[a], nb[a + 1]):
        b = tb[i]
        c = tc[i]
        if not (used_b >> b) & 1 and not (used_c >> c) & 1:
            if c_three_dm_rec(
                a + 1, n, nb, tb, tc,
                used_b | ((<u64>1) << b), used_c | ((<u64>1) << c),
            ):
                return True
    return False


cdef bint c_three_dm(int n, u64 m_mask) noexcept:
    cdef int nb[65]
    cdef int tb[64]
    cdef int tc[64]
    cdef int a, b, c, count = 0
    cdef int nn = n * n
    for a in range(n):
        nb[a] = count
        for b in range(n):
            for c in range(n):
                if (m_mask >> (a * nn + b * n + c)) & 1:
                    tb[count] = b
                    tc[count] = c
                    count += 1
    nb[n] = count
    return c_three_dm_rec(0, n, nb, tb, tc, 0, 0)


cdef bint c_longest_rec(
    int u, int t, u64 visited, long long total, long long bound,
    int n, u64* rows, long long* lengths,
) noexcept:
    cdef u64 m, low
    cdef int v
    if u == t:
        return total >= bound
    m = rows[u] & ~visited
    while m:
        low = m & (~m + 1)
        v = __builtin_ctzll(low)
        if c_longest_rec(v, t, visited | low, total + lengths[u * n + v],
                         bound, n, rows, lengths):
            return True
        m ^= low
    return False


# ---------------------------------------------------------------------------
# Decider dispatch over packed tables


cdef bint c_decide(int kind, int n, masks, consts) except? -1:
    cdef u64 rows[64]
    cdef u64 und[64]
    cdef long long lengths[4096]
    cdef u64 l_mask, e_mask
    cdef int x, y, i
    cdef long long length
    if kind == K_REACH_C:
        _fill_rows(n, rows_from_mask(n, masks[0]), rows)
        return c_reach(n, rows, consts[0], consts[1])
    if kind == K_ALTREACH_C:
        _fill_rows(n, rows_from_mask(n, masks[0]), rows)
        return c_altreach(n, rows, masks[1], consts[0], consts[1])
    if kind == K_HP_0MAX_C:
        _fill_rows(n, rows_from_mask(n, masks[0]), rows)
        return c_hp(n, rows, 0, n - 1)
    if kind == K_HP_01_C:
        _fill_rows(n, rows_from_mask(n, masks[0]), rows)
        return c_hp(n, rows, 0, 1)
    if kind == K_HP_TWO_POINTS_C:
        _fill_rows(n, rows_from_mask(n, masks[0]), rows)
        return c_hp(n, rows, consts[0], consts[1])
    if kind == K_MONO_TRIANGLE_C or kind == K_CO_MONO_TRIANGLE_C:
        _fill_rows(n, und_rows_from_mask(n, masks[0]), und)
        if kind == K_MONO_TRIANGLE_C:
            return c_good_coloring(n, und)
        return not c_good_coloring(n, und)
    if kind == K_THREE_DM_C:
        return c_three_dm(n, masks[0])
    if kind == K_LONGEST_PATH_C:
        l_mask = masks[0]
        _fill_rows(n, rows_from_mask(n, masks[1]), rows)
        for x in range(n):
            for y in range(n):
                length = 0
                for i in range(n):
                    if (l_mask >> (x * n * n + y * n + i)) & 1:
                        length |= (<long long>1) << i
                lengths[x * n + y] = length
        return c_longest_rec(consts[0], consts[1], (<u64>1) << consts[0], 0,
                             masks[2], n, rows, lengths)
    raise ValueError(f"unknown problem kind {kind}")


def decide(int kind, int n, masks, consts):
    return bool(c_decide(kind, n, masks, consts))


# ---------------------------------------------------------------------------
# First-witness search


def search_witness(int n, rel_bits, required, forbidden, const_fixed, int kind):
    cdef int nrels = len(rel_bits)
    cdef int nconsts = len(const_fixed)
    if nrels > 8 or nconsts > 8:
        raise ValueError("too many relations or constants for this kernel")
    cdef u64 req[8]
    cdef u64 cur[8]
    cdef int nfree[8]
    cdef int free_pos[8][64]
    cdef int cfix[8]
    cdef int cval[8]
    cdef int i, j, bits
    cdef u64 reqm, forbm
    for i in range(nrels):
        bits = rel_bits[i]
        reqm = required[i]
        forbm = forbidden[i]
        req[i] = reqm
        nfree[i] = 0
        for j in range(bits):
            if not (reqm >> j) & 1 and not (forbm >> j) & 1:
                free_pos[i][nfree[i]] = j
                nfree[i] += 1
    for i in range(nconsts):
        cfix[i] = const_fixed[i]

    cdef long long examined = 0
    cdef bint found = _search_rec(
        0, n, nrels, nconsts, req, cur, nfree, free_pos, cfix, cval, kind,
        &examined,
    )
    masks = tuple(int(cur[i]) for i in range(nrels)) if found else tuple(
        int(req[i]) for i in range(nrels)
    )
    consts = tuple(
        int(cval[i]) for i in range(nconsts)
    ) if found else tuple(max(cfix[i], 0) for i in range(nconsts))
    return bool(found), masks, consts, int(examined)


cdef bint _search_rec(
    int axis, int n, int nrels, int nconsts, u64* req, u64* cur, int* nfree,
    int free_pos[8][64], int* cfix, int* cval, int kind, long long* examined,
) except? -1:
    cdef u64 counter, total, mask, bitval
    cdef int j, v
    if axis == nrels + nconsts:
        examined[0] += 1
        if kind == K_NONE_C:
            return True
        return c_decide(
            kind, n,
            tuple(int(cur[j]) for j in range(nrels)),
            tuple(int(cval[j]) for j in range(nconsts)),
        )
    if axis < nrels:
        total = (<u64>1) << nfree[axis]
        for counter in range(total):
            mask = req[axis]
            bitval = counter
            j = 0
            while bitval:
                if bitval & 1:
                    mask |= (<u64>1) << free_pos[axis][j]
                bitval >>= 1
                j += 1
            cur[axis] = mask
            if _search_rec(axis + 1, n, nrels, nconsts, req, cur, nfree,
                           free_pos, cfix, cval, kind, examined):
                return True
        return False
    j = axis - nrels
    if cfix[j] >= 0:
        cval[j] = cfix[j]
        return _search_rec(axis + 1, n, nrels, nconsts, req, cur, nfree,
                           free_pos, cfix, cval, kind, examined)
    for v in range(n):
        cval[j] = v
        if _search_rec(axis + 1, n, nrels, nconsts, req, cur, nfree,
                       free_pos, cfix, cval, kind, examined):
            return True
    return False


# ---------------------------------------------------------------------------
# Formula VM


cdef int c_vm(long long* ops, int node, long long* terms, long long* offsets,
              int n, unsigned char* tables, long long* env) noexcept:
    cdef long long op, a, b, c
    cdef long long idx, code, x, y
    cdef int j, v
    cdef int base = 4 * node
    op = ops[base]
    a = ops[base + 1]
    b = ops[base + 2]
    if op == OP_ATOM_C:
        c = ops[base + 3]
        idx = 0
        for j in range(c):
            code = terms[b + j]
            idx = idx * n + (env[code] if code >= 0 else -code - 1)
        return tables[offsets[a] + idx]
    if op == OP_AND_C:
        if not c_vm(ops, <int>a, terms, offsets, n, tables, env):
            return 0
        return c_vm(ops, <int>b, terms, offsets, n, tables, env)
    if op == OP_OR_C:
        if c_vm(ops, <int>a, terms, offsets, n, tables, env):
            return 1
        return c_vm(ops, <int>b, terms, offsets, n, tables, env)
    if op == OP_NOT_C:
        return 0 if c_vm(ops, <int>a, terms, offsets, n, tables, env) else 1
    if op == OP_IMPLIES_C:
        if not c_vm(ops, <int>a, terms, offsets, n, tables, env):
            return 1
        return c_vm(ops, <int>b, terms, offsets, n, tables, env)
    if op == OP_IFF_C:
        return (c_vm(ops, <int>a, terms, offsets, n, tables, env)
                == c_vm(ops, <int>b, terms, offsets, n, tables, env))
    if op == OP_FORALL_C:
        for v in range(n):
            env[a] = v
            if not c_vm(ops, <int>b, terms, offsets, n, tables, env):
                return 0
        return 1
    if op == OP_EXISTS_C:
        for v in range(n):
            env[a] = v
            if c_vm(ops, <int>b, terms, offsets, n, tables, env):
                return 1
        return 0
    x = env[a] if a >= 0 else -a - 1
    y = env[b] if b >= 0 else -b - 1
    if op == OP_EQ_C:
        return x == y
    if op == OP_LE_C:
        return x <= y
    if op == OP_BIT_C:
        return (x >> y) & 1
    if op == OP_SUC_C:
        return y == x + 1
    if op == OP_TRUE_C:
        return 1
    return 0


cdef array.array _LL_TEMPLATE = _array.array("q", [])


cdef array.array _as_ll(obj):
    if isinstance(obj, _array.array) and obj.typecode == "q":
        return obj
    return _array.array("q", obj)


def vm_eval(ops, int root, terms, offsets, int n, tables, env):
    cdef array.array ops_a = _as_ll(ops)
    cdef array.array terms_a = _as_ll(terms if len(terms) else [0])
    cdef array.array offs_a = _as_ll(offsets if len(offsets) else [0])
    cdef array.array env_a = _array.array("q", env if len(env) else [0])
    cdef long long* ops_p = ops_a.data.as_longlongs
    cdef long long* terms_p = terms_a.data.as_longlongs
    cdef long long* offs_p = offs_a.data.as_longlongs
    cdef long long* env_p = env_a.data.as_longlongs
    cdef unsigned char[::1] tv = tables
    cdef unsigned char* tp = &tv[0] if len(tables) else NULL
    return bool(c_vm(ops_p, root, terms_p, offs_p, n, tp, env_p))


def so_check(ops, int root, terms, offsets, int n, tables, quants):
    """Mirror of the pure backend: enumerate quantified relation tables as
    ascending subset counters over the allowed positions, with incremental
    byte flips, evaluating the matrix at every leaf."""
    cdef array.array ops_a = _as_ll(ops)
    cdef array.array terms_a = _as_ll(terms if len(terms) else [0])
    cdef array.array offs_a = _as_ll(offsets if len(offsets) else [0])
    cdef long long* ops_p = ops_a.data.as_longlongs
    cdef long long* terms_p = terms_a.data.as_longlongs
    cdef long long* offs_p = offs_a.data.as_longlongs
    cdef unsigned char[::1] tv = tables
    cdef unsigned char* tp = &tv[0] if len(tables) else NULL

    # environment size: one slot per quantifier plus term slots
    cdef int nops = len(ops_a) // 4
    cdef int nvars = 1
    cdef int i, j
    for i in range(nops):
        if ops_a[4 * i] == OP_FORALL_C or ops_a[4 * i] == OP_EXISTS_C:
            nvars = max(nvars, <int>ops_a[4 * i + 1] + 2)
        elif ops_a[4 * i] == OP_ATOM_C:
            for j in range(<int>ops_a[4 * i + 3]):
                if terms_a[<int>ops_a[4 * i + 2] + j] >= 0:
                    nvars = max(nvars, <int>terms_a[<int>ops_a[4 * i + 2] + j] + 2)
        elif ops_a[4 * i] >= OP_EQ_C:
            if ops_a[4 * i + 1] >= 0:
                nvars = max(nvars, <int>ops_a[4 * i + 1] + 2)
            if ops_a[4 * i + 2] >= 0:
                nvars = max(nvars, <int>ops_a[4 * i + 2] + 2)
    cdef array.array env_a = _array.array("q", [0] * nvars)
    cdef long long* env_p = env_a.data.as_longlongs

    cdef int nq = len(quants)
    cdef array.array is_all_a = _array.array("q", [q[0] for q in quants] or [0])
    cdef array.array off_a = _array.array("q", [q[1] for q in quants] or [0])
    cdef array.array size_a = _array.array("q", [q[2] for q in quants] or [0])
    positions = []
    pos_off = []
    for q in quants:
        pos_off.append(len(positions))
        positions.extend(q[3])
    pos_off.append(len(positions))
    cdef array.array pos_a = _array.array("q", positions or [0])
    cdef array.array pos_off_a = _array.array("q", pos_off)

    return bool(
        _so_level(
            0, nq,
            is_all_a.data.as_longlongs, off_a.data.as_longlongs,
            size_a.data.as_longlongs,
            pos_a.data.as_longlongs, pos_off_a.data.as_longlongs,
            ops_p, root, terms_p, offs_p, n, tp, env_p,
        )
    )


cdef int _so_level(
    int q, int nq, long long* is_all, long long* off, long long* size,
    long long* pos, long long* pos_off,
    long long* ops, int root, long long* terms, long long* offsets,
    int n, unsigned char* tables, long long* env,
) noexcept:
    cdef int r, j
    cdef long long i
    cdef u64 counter, total, diff
    cdef long long base, npos
    if q == nq:
        return c_vm(ops, root, terms, offsets, n, tables, env)
    base = pos_off[q]
    npos = pos_off[q + 1] - base
    for i in range(size[q]):
        tables[off[q] + i] = 0
    r = _so_level(q + 1, nq, is_all, off, size, pos, pos_off,
                  ops, root, terms, offsets, n, tables, env)
    if is_all[q] and not r:
        return 0
    if not is_all[q] and r:
        return 1
    total = (<u64>1) << npos
    for counter in range(1, total):
        diff = (counter - 1) ^ counter
        j = 0
        while diff:
            if diff & 1:
                tables[off[q] + pos[base + j]] ^= 1
            diff >>= 1
            j += 1
        r = _so_level(q + 1, nq, is_all, off, size, pos, pos_off,
                      ops, root, terms, offsets, n, tables, env)
        if is_all[q] and not r:
            return 0
        if not is_all[q] and r:
            return 1
    return 1 if is_all[q] else 0


# mirror of the pure helpers used by a few callers


def reach(int n, rows, int s, int t):
    cdef u64 crows[64]
    _fill_rows(n, rows, crows)
    return bool(c_reach(n, crows, s, t))


def altreach(int n, rows, u_mask, int s, int t):
    cdef u64 crows[64]
    _fill_rows(n, rows, crows)
    return bool(c_altreach(n, crows, u_mask, s, t))


def hamiltonian_path(int n, rows, int s, int t):
    cdef u64 crows[64]
    _fill_rows(n, rows, crows)
    return bool(c_hp(n, crows, s, t))


def three_dm(int n, m_mask):
    return bool(c_three_dm(n, m_mask))
