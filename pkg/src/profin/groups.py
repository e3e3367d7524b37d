"""Finite groups as Cayley tables, and group-valued labellings.

Element 0 is always the identity.  Permutation-backed groups remember the
concrete permutations so automorphism computations can act with them.
"""

from __future__ import annotations

from math import lcm
from typing import Iterable, Mapping, Sequence


class FinGroup:
    """Finite group given by a full multiplication table."""

    __slots__ = ("order", "table", "inverse", "names", "perms")

    def __init__(
        self,
        table: Sequence[Sequence[int]],
        names: Sequence[str] | None = None,
        perms: Sequence[Sequence[int]] | None = None,
        validate: bool = True,
    ):
        n = len(table)
        if n == 0:
            raise ValueError("group must be nonempty")
        tbl = tuple(tuple(int(x) for x in row) for row in table)
        for row in tbl:
            if len(row) != n or any(not 0 <= x < n for x in row):
                raise ValueError("malformed Cayley table")
        if validate:
            for x in range(n):
                if tbl[0][x] != x or tbl[x][0] != x:
                    raise ValueError("element 0 is not an identity")
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        if tbl[tbl[a][b]][c] != tbl[a][tbl[b][c]]:
                            raise ValueError(
                                f"associativity fails at ({a},{b},{c})")
        inv = [-1] * n
        for a in range(n):
            for b in range(n):
                if tbl[a][b] == 0 and tbl[b][a] == 0:
                    inv[a] = b
                    break
            if inv[a] < 0:
                raise ValueError(f"element {a} has no inverse")
        self.order = n
        self.table = tbl
        self.inverse = tuple(inv)
        self.names = tuple(names) if names else tuple(str(i) for i in range(n))
        self.perms = (tuple(tuple(p) for p in perms) if perms is not None
                      else None)

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def element_order(self, a: int) -> int:
        x, k = a, 1
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k

    def elements(self) -> range:
        return range(self.order)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinGroup):
            return NotImplemented
        return self.table == other.table

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"FinGroup(order={self.order})"


def exponent(t: FinGroup) -> int:
    """Least t >= 1 with g^t = 1 for all g (lcm of element orders)."""
    return lcm(*(t.element_order(a) for a in t.elements()))


def product_along(t: FinGroup, elems: Sequence[int]) -> int:
    """Left-to-right product of a nonempty element sequence."""
    if not elems:
        raise ValueError("product_along requires a nonempty sequence")
    acc = elems[0]
    for g in elems[1:]:
        acc = t.table[acc][g]
    return acc


def compose_perms(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Composition p after q: (p∘q)(x) = p(q(x))."""
    return tuple(p[q[x]] for x in range(len(p)))


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for x, y in enumerate(p):
        out[y] = x
    return tuple(out)


def perm_group_from_generators(gens: Iterable[Sequence[int]],
                               degree: int | None = None) -> FinGroup:
    """Closure of permutations under composition, as a Cayley table.

    Elements are ordered identity first, then lexicographically, so the
    result is deterministic.  The concrete permutations are kept in
    ``perms``.
    """
    gen_list = [tuple(int(x) for x in g) for g in gens]
    if degree is None:
        if not gen_list:
            raise ValueError("need a degree when there are no generators")
        degree = len(gen_list[0])
    ident = tuple(range(degree))
    for g in gen_list:
        if sorted(g) != list(range(degree)):
            raise ValueError(f"{g} is not a permutation of {degree} points")
    closure = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gen_list:
                q = compose_perms(g, p)
                if q not in closure:
                    closure.add(q)
                    nxt.append(q)
        frontier = nxt
    elems = [ident] + sorted(closure - {ident})
    index = {p: i for i, p in enumerate(elems)}
    table = [[index[compose_perms(a, b)] for b in elems] for a in elems]
    names = ["".join(map(str, p)) for p in elems]
    return FinGroup(table, names=names, perms=elems, validate=False)


def subgroup_closure(t: FinGroup, elems: Iterable[int]) -> frozenset[int]:
    """Subgroup generated by the given elements (indices)."""
    closure = {0} | set(elems)
    frontier = list(closure)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(closure):
                for c in (t.table[a][b], t.table[b][a], t.inverse[a]):
                    if c not in closure:
                        closure.add(c)
                        nxt.append(c)
        frontier = nxt
    return frozenset(closure)


def cyclic_group(k: int) -> FinGroup:
    if k < 1:
        raise ValueError("order must be >= 1")
    table = [[(i + j) % k for j in range(k)] for i in range(k)]
    return FinGroup(table, names=[str(i) for i in range(k)], validate=False)


_PRESET_BUILDERS = {
    "Z1": lambda: cyclic_group(1),
    "Z2": lambda: cyclic_group(2),
    "Z3": lambda: cyclic_group(3),
    "Z4": lambda: cyclic_group(4),
    "S3": lambda: perm_group_from_generators([(1, 0, 2), (1, 2, 0)]),
    "A4": lambda: perm_group_from_generators([(1, 0, 3, 2), (1, 2, 0, 3)]),
}

GROUP_PRESETS = tuple(sorted(_PRESET_BUILDERS))


def preset_group(name: str) -> FinGroup:
    try:
        return _PRESET_BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown group preset {name!r}; "
                         f"known: {', '.join(GROUP_PRESETS)}") from None


class Labelling:
    """Total map from a vertex carrier into T^width (width 1 or m)."""

    __slots__ = ("carrier", "group", "width", "values")

    def __init__(
        self,
        carrier: Iterable[int],
        group: FinGroup,
        width: int,
        values: Mapping[int, int | Sequence[int]],
    ):
        if width < 1:
            raise ValueError("width must be >= 1")
        car = frozenset(carrier)
        vals: dict[int, tuple[int, ...]] = {}
        for v in car:
            if v not in values:
                raise ValueError(f"labelling misses vertex {v}")
            raw = values[v]
            tup = (int(raw),) if isinstance(raw, int) else tuple(
                int(x) for x in raw)
            if len(tup) != width:
                raise ValueError(
                    f"value for vertex {v} has width {len(tup)}, "
                    f"expected {width}")
            for g in tup:
                if not 0 <= g < group.order:
                    raise ValueError(f"label {g} outside the group")
            vals[v] = tup
        self.carrier = car
        self.group = group
        self.width = width
        self.values = vals

    def value(self, v: int) -> tuple[int, ...]:
        return self.values[v]

    def component(self, v: int, i: int) -> int:
        return self.values[v][i]

    def shifted(self, g: int) -> "Labelling":
        """Left-multiply every value by g (width-1 labellings only)."""
        if self.width != 1:
            raise ValueError("shifted is defined for width-1 labellings")
        op = self.group.table
        return Labelling(self.carrier, self.group, 1,
                         {v: (op[g][val[0]],) for v, val in
                          self.values.items()})
