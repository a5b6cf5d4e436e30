"""Finite structures over initial-segment universes.

A structure interprets every vocabulary relation as a set of tuples over
[n] = {0, ..., n-1} and every constant as an element of [n].  The numeric
relations (=, <=, bit, suc) and numeric constants are computed from n and
are never stored.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .errors import (
    BudgetExceeded,
    InvalidStructure,
    MissingConstant,
    OutOfUniverse,
    UniverseTooSmall,
)
from .logic import Vocabulary

DEFAULT_ENUMERATION_SIZE_CAP = 8


def tuple_index(tup: tuple[int, ...], n: int) -> int:
    """Rank of a tuple in the lexicographic order of [n]^k, leftmost
    coordinate most significant."""
    idx = 0
    for u in tup:
        if not 0 <= u < n:
            raise OutOfUniverse(u, n)
        idx = idx * n + u
    return idx


def tuple_unindex(idx: int, k: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        out.append(idx % n)
        idx //= n
    return tuple(reversed(out))


class Structure:
    """An immutable finite structure.

    Equality and hashing are extensional: same vocabulary symbols, size,
    relation tables and constant assignments.
    """

    __slots__ = ("vocabulary", "n", "relations", "constants", "_hash")

    def __init__(
        self,
        vocabulary: Vocabulary,
        n: int,
        relations: dict[str, set | frozenset] | None = None,
        constants: dict[str, int] | None = None,
    ):
        if n < 2:
            raise UniverseTooSmall(f"universe size {n}; must be at least 2")
        relations = relations or {}
        constants = constants or {}
        tables: dict[str, frozenset] = {}
        for rel, arity in vocabulary.relations:
            table = frozenset(tuple(t) for t in relations.get(rel, ()))
            for t in table:
                if len(t) != arity:
                    raise InvalidStructure(
                        f"tuple {t} has wrong length for {rel!r}/{arity}"
                    )
                for u in t:
                    if not 0 <= u < n:
                        raise OutOfUniverse(u, n)
            tables[rel] = table
        for rel in relations:
            if rel not in tables:
                raise InvalidStructure(f"relation {rel!r} not in vocabulary")
        values: dict[str, int] = {}
        for c in vocabulary.constants:
            if c not in constants:
                raise MissingConstant(c)
            v = constants[c]
            if not 0 <= v < n:
                raise OutOfUniverse(v, n)
            values[c] = v
        for c in constants:
            if c not in values:
                raise InvalidStructure(f"constant {c!r} not in vocabulary")
        object.__setattr__(self, "vocabulary", vocabulary)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "relations", tables)
        object.__setattr__(self, "constants", values)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("structures are immutable")

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and self.n == other.n
            and self.relations == other.relations
            and self.constants == other.constants
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(
                (
                    self.vocabulary,
                    self.n,
                    tuple(sorted((r, tuple(sorted(t))) for r, t in self.relations.items())),
                    tuple(sorted(self.constants.items())),
                )
            )
            object.__setattr__(self, "_hash", h)
        return h

    def __reduce__(self):
        return (
            Structure,
            (
                self.vocabulary,
                self.n,
                {r: set(t) for r, t in self.relations.items()},
                dict(self.constants),
            ),
        )

    def __repr__(self):
        rels = ", ".join(
            f"{r}={sorted(t)}" for r, t in sorted(self.relations.items())
        )
        consts = ", ".join(f"{c}={v}" for c, v in sorted(self.constants.items()))
        body = "; ".join(x for x in (rels, consts) if x)
        return f"Structure(n={self.n}, {body})"

    # numeric built-ins -----------------------------------------------------

    def _check(self, *values: int):
        for v in values:
            if not 0 <= v < self.n:
                raise OutOfUniverse(v, self.n)

    def bit(self, i: int, j: int) -> bool:
        """True iff bit j (least significant bit is position 0) of i is 1."""
        self._check(i, j)
        return (i >> j) & 1 == 1

    def suc(self, i: int, j: int) -> bool:
        """True iff j = i + 1; there is no wraparound."""
        self._check(i, j)
        return j == i + 1

    def leq(self, i: int, j: int) -> bool:
        self._check(i, j)
        return i <= j

    @property
    def max_element(self) -> int:
        return self.n - 1

    def holds(self, rel: str, tup: tuple[int, ...]) -> bool:
        return tuple(tup) in self.relations[rel]

    def with_edges(self, rel: str, extra) -> "Structure":
        """A copy with additional tuples in one relation."""
        rels = {r: set(t) for r, t in self.relations.items()}
        rels[rel] |= {tuple(t) for t in extra}
        return Structure(self.vocabulary, self.n, rels, dict(self.constants))


# ---------------------------------------------------------------------------
# Packed representation (bitmask tables) used by the compute kernels


def pack_structure(a: Structure) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Relation tables as tuple-index bitmasks (vocabulary order) plus the
    constant values (vocabulary order)."""
    masks = []
    for rel, arity in a.vocabulary.relations:
        mask = 0
        for t in a.relations[rel]:
            mask |= 1 << tuple_index(t, a.n)
        masks.append(mask)
    consts = tuple(a.constants[c] for c in a.vocabulary.constants)
    return tuple(masks), consts


def unpack_structure(
    voc: Vocabulary, n: int, masks: tuple[int, ...], consts: tuple[int, ...]
) -> Structure:
    rels = {}
    for (rel, arity), mask in zip(voc.relations, masks):
        table = set()
        while mask:
            low = mask & -mask
            idx = low.bit_length() - 1
            table.add(tuple_unindex(idx, arity, n))
            mask ^= low
        rels[rel] = table
    constants = dict(zip(voc.constants, consts))
    return Structure(voc, n, rels, constants)


# ---------------------------------------------------------------------------
# Enumeration


def count_structures(voc: Vocabulary, n: int) -> int:
    """2^(sum of n^arity over relations) * n^(number of constants)."""
    if n < 2:
        raise UniverseTooSmall(f"universe size {n}; must be at least 2")
    bits = sum(n**arity for _, arity in voc.relations)
    return (1 << bits) * n ** len(voc.constants)


def enumerate_structures(
    voc: Vocabulary,
    n: int,
    budget: Optional[int] = None,
    size_cap: int = DEFAULT_ENUMERATION_SIZE_CAP,
) -> Iterator[Structure]:
    """Every structure of size n exactly once, in a fixed order.

    Relation tables run as bitmask counters with the first relation most
    significant; constant assignments vary fastest, in lexicographic order
    with the first constant most significant.  Raises BudgetExceeded when
    the total count exceeds the budget, and treats size_cap as a guard
    against accidental blow-ups.
    """
    total = count_structures(voc, n)
    if n > size_cap:
        raise BudgetExceeded(total, 0)
    if budget is not None and total > budget:
        raise BudgetExceeded(total, budget)
    for masks, consts in iter_packed(voc, n):
        yield unpack_structure(voc, n, masks, consts)


def structure_at(voc: Vocabulary, n: int, index: int) -> Structure:
    """The index-th structure in enumeration order."""
    total = count_structures(voc, n)
    if not 0 <= index < total:
        raise OutOfUniverse(index, total)
    consts = []
    for _ in voc.constants:
        consts.append(index % n)
        index //= n
    consts.reverse()
    masks = []
    for _, arity in reversed(voc.relations):
        bits = n**arity
        masks.append(index & ((1 << bits) - 1))
        index >>= bits
    masks.reverse()
    return unpack_structure(voc, n, tuple(masks), tuple(consts))


def iter_packed(
    voc: Vocabulary, n: int
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The enumeration order of enumerate_structures, on packed values."""
    rel_bits = [n**arity for _, arity in voc.relations]
    n_consts = len(voc.constants)

    def rec_rels(i: int, masks: list[int]):
        if i == len(rel_bits):
            yield from rec_consts(0, masks, [])
            return
        for mask in range(1 << rel_bits[i]):
            masks.append(mask)
            yield from rec_rels(i + 1, masks)
            masks.pop()

    def rec_consts(j: int, masks: list[int], consts: list[int]):
        if j == n_consts:
            yield tuple(masks), tuple(consts)
            return
        for v in range(n):
            consts.append(v)
            yield from rec_consts(j + 1, masks, consts)
            consts.pop()

    yield from rec_rels(0, [])
