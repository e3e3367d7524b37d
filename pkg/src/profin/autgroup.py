"""Automorphism-style bijections of a finite power A^X pinned at marked
points, split into coordinate shuffles and pointwise kernels, with the
labelled conjugator construction turning kernel translates of a shuffle
tuple into conjugates.

Composition convention is right-to-left: (u * v)(f) = u(v(f)), and the
conjugate of h by c is c^-1 o h o c (c applied first).  Identities are
checked by exhaustive evaluation on the full function space D, held as a
numpy array with one row per function and one column per point.

Set-mode: the carrier A is a plain finite set and kernel values are
arbitrary permutations of it.  Algebra-mode: A is a FinAlgebra and kernel
values must preserve its operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .algebra import BooleanPowerSpace, FinAlgebra, preserves_operations
from .errors import VerificationError
from .groups import (FinGroup, Labelling, compose_perms, exponent,
                     invert_perm, subgroup_closure)
from .maps import StructMap, check_epimorphism
from .spirals import QPWitness, Spiral, _propagate_mu, verify_qp
from .structures import FinStructure, Partition, disjoint_union, quotient


@lru_cache(maxsize=8)
def _function_table(a_size: int, points: int, marked: tuple[int, ...],
                    pins: tuple[int, ...]) -> np.ndarray:
    """All pinned functions X -> A as rows, free coordinates in lex order."""
    free = [x for x in range(points) if x not in set(marked)]
    count = a_size ** len(free)
    arr = np.zeros((count, points), dtype=np.int16)
    for x, e in zip(marked, pins):
        arr[:, x] = e
    ticks = np.arange(count)
    for rank, x in enumerate(reversed(free)):
        arr[:, x] = (ticks // (a_size ** rank)) % a_size
    return arr


def function_space(space: BooleanPowerSpace, a_size: int) -> np.ndarray:
    """Read-only array of every element of D (one function per row)."""
    arr = _function_table(a_size, space.points, space.marked, space.pins)
    arr.setflags(write=False)
    return arr


def _carrier_size(carrier: FinAlgebra | int) -> int:
    return carrier.size if isinstance(carrier, FinAlgebra) else int(carrier)


class AutElement:
    """Bijection of the pinned function space D."""

    def act(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "AutElement":
        raise NotImplementedError

    def _app_order(self) -> list["AutElement"]:
        return [self]


class Hbar(AutElement):
    """Coordinate shuffle: (hbar f)(x) = f(psi^-1(x))."""

    __slots__ = ("space", "a_size", "perm", "_inv_cols")

    def __init__(self, space: BooleanPowerSpace, carrier: FinAlgebra | int,
                 perm: Sequence[int]):
        p = tuple(int(x) for x in perm)
        if sorted(p) != list(range(space.points)):
            raise ValueError("not a permutation of the point set")
        for x in space.marked:
            if p[x] != x:
                raise ValueError(f"marked point {x} is moved")
        self.space = space
        self.a_size = _carrier_size(carrier)
        self.perm = p
        self._inv_cols = list(invert_perm(p))

    def act(self, arr: np.ndarray) -> np.ndarray:
        return arr[:, self._inv_cols]

    def inverse(self) -> "Hbar":
        return Hbar(self.space, self.a_size, invert_perm(self.perm))

    def __repr__(self) -> str:
        return f"Hbar({self.perm})"


class Khat(AutElement):
    """Pointwise kernel: (khat f)(x) = psi(x)(f(x)) off the marked points."""

    __slots__ = ("space", "a_size", "values", "carrier")

    def __init__(self, space: BooleanPowerSpace, carrier: FinAlgebra | int,
                 values: Mapping[int, Sequence[int]]):
        a_size = _carrier_size(carrier)
        free = set(space.free_points())
        vals: dict[int, tuple[int, ...]] = {}
        for x in free:
            if x not in values:
                raise ValueError(f"kernel map misses point {x}")
            p = tuple(int(v) for v in values[x])
            if sorted(p) != list(range(a_size)):
                raise ValueError(f"value at point {x} is not a permutation")
            vals[x] = p
        extra = set(values) - free
        if extra:
            raise ValueError(f"kernel map defined on marked points {extra}")
        if isinstance(carrier, FinAlgebra):
            for x, p in vals.items():
                if not preserves_operations(carrier, p):
                    raise ValueError(
                        f"value at point {x} is not an automorphism")
        self.space = space
        self.a_size = a_size
        self.values = vals
        self.carrier = carrier

    def act(self, arr: np.ndarray) -> np.ndarray:
        out = arr.copy()
        for x, p in self.values.items():
            out[:, x] = np.asarray(p, dtype=np.int16)[arr[:, x]]
        return out

    def inverse(self) -> "Khat":
        return Khat(self.space, self.carrier if isinstance(
            self.carrier, FinAlgebra) else self.a_size,
            {x: invert_perm(p) for x, p in self.values.items()})

    def __repr__(self) -> str:
        return f"Khat({len(self.values)} points)"


class ProductAut(AutElement):
    """Composition of factors, rightmost applied first."""

    __slots__ = ("factors",)

    def __init__(self, factors: Sequence[AutElement]):
        if not factors:
            raise ValueError("empty product")
        self.factors = tuple(factors)

    def act(self, arr: np.ndarray) -> np.ndarray:
        for f in reversed(self.factors):
            arr = f.act(arr)
        return arr

    def inverse(self) -> "ProductAut":
        return ProductAut([f.inverse() for f in reversed(self.factors)])

    def _app_order(self) -> list[AutElement]:
        out: list[AutElement] = []
        for f in reversed(self.factors):
            out.extend(f._app_order())
        return out

    def __repr__(self) -> str:
        return f"ProductAut({len(self.factors)} factors)"


def hbar(space: BooleanPowerSpace, carrier: FinAlgebra | int,
         perm: Sequence[int]) -> Hbar:
    return Hbar(space, carrier, perm)


def khat(space: BooleanPowerSpace, carrier: FinAlgebra | int,
         values: Mapping[int, Sequence[int]]) -> Khat:
    return Khat(space, carrier, values)


def identity_khat(space: BooleanPowerSpace,
                  carrier: FinAlgebra | int) -> Khat:
    n = _carrier_size(carrier)
    ident = tuple(range(n))
    return Khat(space, carrier, {x: ident for x in space.free_points()})


def elements_equal(e1: AutElement, e2: AutElement, space: BooleanPowerSpace,
                   carrier: FinAlgebra | int) -> bool:
    """Exhaustive comparison on every element of D."""
    table = function_space(space, _carrier_size(carrier))
    return bool(np.array_equal(e1.act(table), e2.act(table)))


def conjugate(h: AutElement, c: AutElement) -> ProductAut:
    """c^-1 o h o c, with c applied first."""
    return ProductAut([c.inverse(), h, c])


def conjugation_identity_check(space: BooleanPowerSpace,
                               carrier: FinAlgebra | int,
                               values: Mapping[int, Sequence[int]],
                               h_perm: Sequence[int]) -> bool:
    """hbar khat hbar^-1 agrees with the kernel map composed with h^-1.

    Witnesses normality of the kernel side by exhaustive evaluation.
    """
    h = Hbar(space, carrier, h_perm)
    k = Khat(space, carrier, values)
    hinv = invert_perm(h.perm)
    moved = {x: values[hinv[x]] for x in space.free_points()}
    lhs = ProductAut([h, k, h.inverse()])
    rhs = Khat(space, carrier, moved)
    return elements_equal(lhs, rhs, space, carrier)


def preserves_filtered_operations(elem: AutElement, a: FinAlgebra,
                                  space: BooleanPowerSpace) -> bool:
    """Exhaustively check the element is an algebra automorphism of D."""
    table = function_space(space, a.size)
    image = elem.act(table)
    rows = {tuple(int(v) for v in row): k for k, row in enumerate(table)}
    perm = [rows[tuple(int(v) for v in row)] for row in image]
    if sorted(perm) != list(range(len(table))):
        return False
    for j, (arity, _) in enumerate(a.ops):
        for args in np.ndindex(*([len(table)] * arity)):
            fx = tuple(a.apply(j, tuple(int(table[k][x]) for k in args))
                       for x in range(space.points))
            lhs = perm[rows[fx]]
            rhs = tuple(a.apply(j, tuple(int(image[k][x]) for k in args))
                        for x in range(space.points))
            if lhs != rows[rhs]:
                return False
    return True


def decompose(g: AutElement) -> tuple[Khat, Hbar]:
    """Normal form g = hbar(d) o khat(k), re-verified by evaluation.

    Shuffles are pushed left through kernels with the conjugation identity
    hbar^-1 khat(chi) hbar = khat(chi o h).
    """
    prims = g._app_order()
    sample = prims[0]
    space = sample.space  # type: ignore[attr-defined]
    a_size = sample.a_size  # type: ignore[attr-defined]
    d = tuple(range(space.points))
    ident = tuple(range(a_size))
    k = {x: ident for x in space.free_points()}
    for w in prims:
        if isinstance(w, Hbar):
            d = compose_perms(w.perm, d)
        elif isinstance(w, Khat):
            k = {x: compose_perms(w.values[d[x]], k[x]) for x in k}
        else:
            raise ValueError(f"cannot decompose factor {w!r}")
    k_part = Khat(space, a_size, k)
    d_part = Hbar(space, a_size, d)
    if not elements_equal(g, ProductAut([d_part, k_part]), space, a_size):
        raise VerificationError("normal form disagrees with the element")
    return k_part, d_part


@dataclass
class TransconjInstance:
    """Certified input for the translate-to-conjugate construction.

    The kernel tuple acts blockwise by fixed permutations, the labelled
    cover (phi2, lam, mu) satisfies the quotient property over the block
    quotient, and psi maps the point structure into the cover compatibly
    with the projection.
    """

    space: BooleanPowerSpace
    a_size: int
    group: FinGroup
    action: tuple[tuple[int, ...], ...]
    h: tuple[tuple[int, ...], ...]
    partition: Partition
    block_structure: FinStructure
    proj: StructMap
    q: FinStructure
    phi2: StructMap
    lam: Labelling
    mu: Labelling
    psi: dict[int, int]
    kernel: tuple[Khat, ...]

    @property
    def m(self) -> int:
        return len(self.h)

    def point_structure(self) -> FinStructure:
        rels = [{(x, p[x]) for x in range(self.space.points)}
                for p in self.h]
        return FinStructure(len(self.h), range(self.space.points), rels,
                            constants=self.space.marked)

    def verify(self) -> None:
        """Re-check every invariant, naming the first violation."""
        pts = list(range(self.space.points))
        for i, p in enumerate(self.h):
            if sorted(p) != pts:
                raise VerificationError(f"h[{i}] is not a permutation")
            for x in self.space.marked:
                if p[x] != x:
                    raise VerificationError(f"h[{i}] moves marked point {x}")
        if len(self.action) != self.group.order:
            raise VerificationError("action size differs from group order")
        for g1 in range(self.group.order):
            for g2 in range(self.group.order):
                if (compose_perms(self.action[g1], self.action[g2])
                        != self.action[self.group.table[g1][g2]]):
                    raise VerificationError("action is not a homomorphism")
        if len(set(self.action)) != self.group.order:
            raise VerificationError("action is not faithful")
        xs = self.point_structure()
        blk, proj = quotient(xs, self.partition)
        if blk != self.block_structure or proj != self.proj:
            raise VerificationError(
                "stored block quotient differs from the recomputed one")
        if self.phi2.codomain != self.block_structure:
            raise VerificationError(
                "phi2 does not land in the block quotient")
        if self.phi2.domain != self.q:
            raise VerificationError("phi2 is not defined on the cover")
        if not check_epimorphism(self.phi2):
            raise VerificationError("phi2 is not an epimorphism")
        if set(self.psi) != set(pts):
            raise VerificationError("psi is not total on the points")
        for i in range(self.m):
            rel = self.q.relations[i]
            for x in pts:
                if (self.psi[x], self.psi[self.h[i][x]]) not in rel:
                    raise VerificationError(
                        f"psi is not a homomorphism: point {x}, "
                        f"relation {i}")
        for j, x in enumerate(self.space.marked):
            if self.psi[x] != self.q.constants[j]:
                raise VerificationError(
                    f"psi does not send marked point {x} to the cover "
                    "constant")
        for x in pts:
            if self.phi2.mapping[self.psi[x]] != self.proj.mapping[x]:
                raise VerificationError(
                    f"phi2 o psi differs from the projection at point {x}")
        rep = verify_qp(QPWitness(self.phi2, self.lam, self.mu))
        if not rep:
            raise VerificationError(
                f"quotient property fails on edge {rep.edge} of "
                f"relation {rep.relation}")
        if len(self.kernel) != self.m:
            raise VerificationError("kernel tuple arity mismatch")
        for i, k in enumerate(self.kernel):
            for x in self.space.free_points():
                blk_id = self.proj.mapping[x]
                want = self.action[self.group.inverse[
                    self.lam.component(blk_id, i)]]
                if k.values[x] != want:
                    raise VerificationError(
                        f"kernel[{i}] does not act as the inverse block "
                        f"label at point {x}")


def qp_conjugator(inst: TransconjInstance,
                  carrier: FinAlgebra | int | None = None) -> Khat:
    """Kernel element c with a_i o hbar_i = c^-1 o hbar_i o c for all i.

    The instance is re-verified first; the conjugator value at x is the
    action of mu(psi(x)).  The identity is then checked by exhaustive
    evaluation over all of D.
    """
    inst.verify()
    if carrier is None:
        carrier = inst.a_size
    c = Khat(inst.space, carrier,
             {x: inst.action[inst.mu.component(inst.psi[x], 0)]
              for x in inst.space.free_points()})
    for i in range(inst.m):
        hb = Hbar(inst.space, inst.a_size, inst.h[i])
        lhs = ProductAut([inst.kernel[i], hb])
        rhs = conjugate(hb, c)
        if not elements_equal(lhs, rhs, inst.space, inst.a_size):
            raise VerificationError(
                f"translate/conjugate identity fails for relation {i}")
    return c


def check_action(group: FinGroup, action: Sequence[Sequence[int]],
                 a_size: int) -> tuple[tuple[int, ...], ...]:
    acts = tuple(tuple(int(v) for v in p) for p in action)
    if len(acts) != group.order:
        raise ValueError("action must give one permutation per element")
    for p in acts:
        if sorted(p) != list(range(a_size)):
            raise ValueError("action value is not a permutation of A")
    for g1 in range(group.order):
        for g2 in range(group.order):
            if compose_perms(acts[g1], acts[g2]) != acts[group.table[g1][g2]]:
                raise ValueError("action is not a homomorphism")
    if len(set(acts)) != group.order:
        raise ValueError("action is not faithful")
    return acts


def natural_action(group: FinGroup) -> tuple[tuple[int, ...], ...]:
    """The stored permutation realization of a permutation-backed group."""
    if group.perms is None:
        raise ValueError("group carries no permutation realization")
    return group.perms


def regular_action(group: FinGroup) -> tuple[tuple[int, ...], ...]:
    """Left-translation action on the group's own elements (faithful)."""
    return tuple(tuple(group.table[g][x] for x in range(group.order))
                 for g in range(group.order))


def cycle_cover_instance(p: int, q: int, r: int, group: FinGroup,
                         action: Sequence[Sequence[int]], a_size: int,
                         lam: Labelling, ell: int = 1,
                         alpha: int = 0) -> TransconjInstance:
    """Cyclic shuffle on Z_{ell*t*p} with a blockwise kernel tuple (m=1).

    The points wind ell times around the block p-cycle; the cover is the
    spiral S(tp, q, tr) collapsed onto that cycle, carrying the propagated
    labelling.  The c-cycle must wind fully, so p must divide r.  The
    spiral labelling must be constant on collapse fibres (vertices at the
    same cycle position).
    """
    base = Spiral(p, q, r)
    if r % p != 0:
        raise ValueError("p must divide r so the c-cycle winds fully")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    acts = check_action(group, action, a_size)
    if lam.width != 1 or lam.carrier != base.structure.vertices:
        raise ValueError("lam must be a width-1 labelling of the base "
                         "spiral")
    path = base.path_vertices()
    for idx, v in enumerate(path):
        if lam.values[v] != lam.values[path[idx % p]]:
            raise ValueError(
                f"labelling is not constant on cycle position {idx % p}"
                f" (vertex {base.structure.label_of(v)})")

    t = exponent(group)
    n_pts = ell * t * p
    succ = tuple((k + 1) % n_pts for k in range(n_pts))
    space = BooleanPowerSpace(n_pts)
    part = Partition([{k for k in range(n_pts) if k % p == j}
                      for j in range(p)])
    xs = FinStructure(1, range(n_pts),
                      [{(k, succ[k]) for k in range(n_pts)}])
    blk, proj = quotient(xs, part)

    cover = Spiral(t * p, q, t * r)
    cover_path = cover.path_vertices()
    phi2 = StructMap(cover.structure, blk,
                     {v: idx % p for idx, v in enumerate(cover_path)})
    lam_blocks = Labelling(blk.vertices, group, 1,
                           {j: lam.values[path[j]] for j in range(p)})
    mu = _propagate_mu(cover, phi2, lam_blocks, 0, group, cover.a(1), alpha)
    witness = QPWitness(phi2, lam_blocks, mu)
    rep = verify_qp(witness)
    if not rep:
        raise VerificationError(f"cover labelling fails QP: {rep.reason}")

    kernel = Khat(space, a_size,
                  {x: acts[group.inverse[lam_blocks.component(x % p, 0)]]
                   for x in range(n_pts)})
    psi = {k: cover.a((k % (t * p)) + 1) for k in range(n_pts)}
    inst = TransconjInstance(
        space=space, a_size=a_size, group=group, action=acts,
        h=(succ,), partition=part, block_structure=blk, proj=proj,
        q=cover.structure, phi2=phi2, lam=lam_blocks, mu=mu, psi=psi,
        kernel=(kernel,))
    inst.verify()
    return inst


def pinned_union_instance(far: TransconjInstance, near: TransconjInstance,
                          pin: int) -> tuple[TransconjInstance,
                                             frozenset[int]]:
    """Join two unmarked m=1 instances and adjoin one pinned fixed point.

    ``near`` plays the finite stand-in for the component cluster adjacent
    to the marked point; its kernel values must stabilise the pin, which
    forces the conjugator values there into the stabiliser as well.
    Returns the combined instance and the set of near points.
    """
    if far.space.marked or near.space.marked:
        raise ValueError("sub-instances must have no marked points")
    if far.m != 1 or near.m != 1:
        raise ValueError("sub-instances must have one relation")
    if far.a_size != near.a_size or far.group != near.group \
            or far.action != near.action:
        raise ValueError("sub-instances must share carrier, group and "
                         "action")
    if not 0 <= pin < near.a_size:
        raise ValueError("pin is not a carrier element")
    for x, perm in near.kernel[0].values.items():
        if perm[pin] != pin:
            raise ValueError(
                f"near kernel value at point {x} does not stabilise the pin")
    for v in near.mu.values.values():
        if near.action[v[0]][pin] != pin:
            raise ValueError("near labelling leaves the pin stabiliser")

    n_far, n_near = far.space.points, near.space.points
    n_pts = n_far + n_near + 1
    star = n_pts - 1
    space = BooleanPowerSpace(n_pts, marked=(star,), pins=(pin,))
    shift = n_far

    h = tuple(
        [far.h[0][k] for k in range(n_far)]
        + [near.h[0][k] + shift for k in range(n_near)]
        + [star])
    part = Partition(
        [set(b) for b in far.partition.blocks]
        + [{x + shift for x in b} for b in near.partition.blocks]
        + [{star}])
    xs_rel = {(k, h[k]) for k in range(n_pts)}
    xs = FinStructure(1, range(n_pts), [xs_rel], constants=(star,))
    blk, proj = quotient(xs, part)

    def new_block(old_part: Partition, old_id: int, off: int) -> int:
        member = min(old_part.blocks[old_id]) + off
        return proj.mapping[member]

    q_far, q_near = far.q, near.q
    star_q = FinStructure(1, [0], [{(0, 0)}], constants=[0],
                          labels={0: "qstar"})
    union_q, (inj_f, inj_n, inj_s) = disjoint_union([q_far, q_near, star_q])

    phi2_map = {}
    for v in q_far.vertices:
        phi2_map[inj_f[v]] = new_block(far.partition, far.phi2.mapping[v], 0)
    for v in q_near.vertices:
        phi2_map[inj_n[v]] = new_block(near.partition,
                                       near.phi2.mapping[v], shift)
    phi2_map[inj_s[0]] = proj.mapping[star]
    phi2 = StructMap(union_q, blk, phi2_map)

    lam_vals = {}
    for j in range(len(far.partition)):
        lam_vals[new_block(far.partition, j, 0)] = far.lam.values[j]
    for j in range(len(near.partition)):
        lam_vals[new_block(near.partition, j, shift)] = near.lam.values[j]
    lam_vals[proj.mapping[star]] = (0,)
    lam = Labelling(blk.vertices, far.group, 1, lam_vals)

    mu_vals = {inj_f[v]: far.mu.values[v] for v in q_far.vertices}
    mu_vals.update({inj_n[v]: near.mu.values[v] for v in q_near.vertices})
    mu_vals[inj_s[0]] = (0,)
    mu = Labelling(union_q.vertices, far.group, 1, mu_vals)

    psi = {k: inj_f[far.psi[k]] for k in range(n_far)}
    psi.update({k + shift: inj_n[near.psi[k]] for k in range(n_near)})
    psi[star] = inj_s[0]

    kernel_vals = {k: far.kernel[0].values[k] for k in range(n_far)}
    kernel_vals.update({k + shift: near.kernel[0].values[k]
                        for k in range(n_near)})
    kernel = Khat(space, far.a_size, kernel_vals)

    inst = TransconjInstance(
        space=space, a_size=far.a_size, group=far.group, action=far.action,
        h=(h,), partition=part, block_structure=blk, proj=proj,
        q=union_q, phi2=phi2, lam=lam, mu=mu, psi=psi, kernel=(kernel,))
    inst.verify()
    near_points = frozenset(range(shift, shift + n_near))
    return inst, near_points


def conjugator_values_in_stabiliser(c: Khat, points: frozenset[int],
                                    pin: int) -> bool:
    return all(c.values[x][pin] == pin for x in points)


def mu_subgroup_check(inst: TransconjInstance) -> bool:
    """mu values lie in the subgroup generated by the block labels."""
    gens = {v[0] for v in inst.lam.values.values()}
    closure = subgroup_closure(inst.group, gens)
    return all(v[0] in closure for v in inst.mu.values.values())


__all__ = [
    "AutElement", "Hbar", "Khat", "ProductAut", "TransconjInstance",
    "check_action", "conjugate", "conjugation_identity_check",
    "conjugator_values_in_stabiliser", "cycle_cover_instance", "decompose",
    "elements_equal", "function_space", "hbar", "identity_khat", "khat",
    "mu_subgroup_check", "natural_action", "pinned_union_instance",
    "preserves_filtered_operations", "qp_conjugator",
]
