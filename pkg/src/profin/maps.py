"""Structure maps: homomorphism and epimorphism checks, backtracking search,
fibre products, joint-projection and amalgamation witnesses, and covers
landing in the restricted families.

An epimorphism is a vertex-surjective homomorphism whose relation images are
exact: phi(s_i of the domain) equals s_i of the codomain, with constants
preserved.  Witness-producing functions re-verify their output before
returning it.
"""

from __future__ import annotations

from itertools import product as iproduct
from typing import Mapping

from .errors import CapExhausted, VerificationError
from .structures import (F, F0, F0N, FN, FinStructure, connected_components,
                         disjoint_union, expand_constants, in_family, induced,
                         surjective_core)

DEFAULT_BUDGET = 10_000_000


class StructMap:
    """Total vertex map between two finite structures."""

    __slots__ = ("domain", "codomain", "mapping")

    def __init__(self, domain: FinStructure, codomain: FinStructure,
                 mapping: Mapping[int, int]):
        mp = {int(v): int(w) for v, w in mapping.items()}
        if set(mp.keys()) != set(domain.vertices):
            raise ValueError("map is not total on the domain vertices")
        for v, w in mp.items():
            if w not in codomain.vertices:
                raise ValueError(f"image {w} of vertex {v} is not a "
                                 "codomain vertex")
        self.domain = domain
        self.codomain = codomain
        self.mapping = mp

    def __call__(self, v: int) -> int:
        return self.mapping[v]

    def as_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.mapping.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StructMap):
            return NotImplemented
        return (self.domain == other.domain
                and self.codomain == other.codomain
                and self.mapping == other.mapping)

    def __repr__(self) -> str:
        return (f"StructMap(|dom|={len(self.domain.vertices)}, "
                f"|cod|={len(self.codomain.vertices)})")


def identity_map(s: FinStructure) -> StructMap:
    return StructMap(s, s, {v: v for v in s.vertices})


def compose(outer: StructMap, inner: StructMap) -> StructMap:
    """outer after inner."""
    if inner.codomain != outer.domain:
        raise ValueError("composition mismatch: inner codomain differs "
                         "from outer domain")
    return StructMap(inner.domain, outer.codomain,
                     {v: outer.mapping[w] for v, w in inner.mapping.items()})


def _check_arities(phi: StructMap) -> None:
    if phi.domain.m != phi.codomain.m:
        raise ValueError(f"arity mismatch: m={phi.domain.m} vs "
                         f"m={phi.codomain.m}")
    if phi.domain.n != phi.codomain.n:
        raise ValueError(f"arity mismatch: n={phi.domain.n} vs "
                         f"n={phi.codomain.n}")


def check_homomorphism(phi: StructMap) -> bool:
    """Relation pairs map into the codomain relation; constants preserved."""
    _check_arities(phi)
    mp = phi.mapping
    for i in range(phi.domain.m):
        cod = phi.codomain.relations[i]
        for a, b in phi.domain.relations[i]:
            if (mp[a], mp[b]) not in cod:
                return False
    for j in range(phi.domain.n):
        if mp[phi.domain.constants[j]] != phi.codomain.constants[j]:
            return False
    return True


def check_epimorphism(phi: StructMap) -> bool:
    """Vertex-surjective homomorphism with exact relation images."""
    _check_arities(phi)
    if not check_homomorphism(phi):
        return False
    if set(phi.mapping.values()) != set(phi.codomain.vertices):
        return False
    mp = phi.mapping
    for i in range(phi.domain.m):
        image = {(mp[a], mp[b]) for a, b in phi.domain.relations[i]}
        if image != phi.codomain.relations[i]:
            return False
    return True


def _forced_constants(a: FinStructure, b: FinStructure) -> dict[int, int] | None:
    """Constant assignments, or None when they conflict."""
    forced: dict[int, int] = {}
    for j in range(a.n):
        v, w = a.constants[j], b.constants[j]
        if forced.get(v, w) != w:
            return None
        forced[v] = w
    return forced


def _search_map(a: FinStructure, b: FinStructure, budget: int,
                surjective: bool) -> StructMap | None:
    """Backtracking vertex-map search, deterministic.

    Domain vertices are processed in decreasing total degree (ties by id);
    candidate images in increasing id order.  ``budget`` counts assignment
    attempts; exceeding it raises CapExhausted, while a completed search
    returning None is a proof of nonexistence.
    """
    if a.m != b.m or a.n != b.n:
        raise ValueError("arity mismatch")
    if not a.vertices:
        if surjective and b.vertices:
            return None
        return StructMap(a, b, {})
    if not b.vertices:
        return None

    def total_degree(v: int) -> int:
        return sum(len(a.out_neighbors(i, v)) + len(a.in_neighbors(i, v))
                   for i in range(a.m))

    order = sorted(a.vertices, key=lambda v: (-total_degree(v), v))
    pos = {v: k for k, v in enumerate(order)}
    forced = _forced_constants(a, b)
    if forced is None:
        return None
    candidates = sorted(b.vertices)
    assignment: dict[int, int] = {}
    image_count: dict[int, int] = {w: 0 for w in b.vertices}
    spent = 0

    def consistent(v: int, w: int) -> bool:
        for i in range(a.m):
            cod = b.relations[i]
            for u in a.out_neighbors(i, v):
                if u in assignment and (w, assignment[u]) not in cod:
                    return False
                if u == v and (w, w) not in cod:
                    return False
            for u in a.in_neighbors(i, v):
                if u in assignment and (assignment[u], w) not in cod:
                    return False
        return True

    def extend(k: int) -> StructMap | None:
        nonlocal spent
        if k == len(order):
            phi = StructMap(a, b, dict(assignment))
            if surjective:
                return phi if check_epimorphism(phi) else None
            return phi
        v = order[k]
        opts = [forced[v]] if v in forced else candidates
        remaining = len(order) - k
        for w in opts:
            spent += 1
            if spent > budget:
                raise CapExhausted(
                    f"map search exceeded budget of {budget} expansions",
                    budget=budget)
            if surjective:
                uncovered = sum(1 for x in image_count.values() if x == 0)
                if image_count[w] > 0 and uncovered >= remaining:
                    continue
            if not consistent(v, w):
                continue
            assignment[v] = w
            image_count[w] += 1
            found = extend(k + 1)
            if found is not None:
                return found
            del assignment[v]
            image_count[w] -= 1
        return None

    return extend(0)


def find_homomorphism(a: FinStructure, b: FinStructure,
                      budget: int = DEFAULT_BUDGET) -> StructMap | None:
    return _search_map(a, b, budget, surjective=False)


def find_epimorphism(a: FinStructure, b: FinStructure,
                     budget: int = DEFAULT_BUDGET) -> StructMap | None:
    """First epimorphism in canonical search order, or None if none exists."""
    return _search_map(a, b, budget, surjective=True)


def fibre_product(phi1: StructMap, phi2: StructMap):
    """Pullback of two maps with common codomain.

    Vertices are the pairs (x, y) with phi1(x) = phi2(y), relations are
    componentwise, constants are paired.  Returns (C, pi1, pi2).
    """
    if phi1.codomain != phi2.codomain:
        raise ValueError("codomain mismatch")
    a1, a2 = phi1.domain, phi2.domain
    pairs = [(x, y) for x in a1.sorted_vertices() for y in a2.sorted_vertices()
             if phi1.mapping[x] == phi2.mapping[y]]
    index = {pr: i for i, pr in enumerate(pairs)}
    by_image: dict[int, list[int]] = {}
    for y in a2.vertices:
        by_image.setdefault(phi2.mapping[y], []).append(y)
    rels = []
    for i in range(a1.m):
        rel2 = a2.relations[i]
        edges = set()
        for x, xp in a1.relations[i]:
            for y in by_image.get(phi1.mapping[x], ()):
                for yp in a2.out_neighbors(i, y):
                    if (phi2.mapping[yp] == phi1.mapping[xp]
                            and (y, yp) in rel2):
                        edges.add((index[(x, y)], index[(xp, yp)]))
        rels.append(edges)
    consts = [index[(a1.constants[j], a2.constants[j])] for j in range(a1.n)]
    labels = {i: f"({a1.label_of(x)},{a2.label_of(y)})"
              for (x, y), i in index.items()}
    c = FinStructure(a1.m, range(len(pairs)), rels, constants=consts,
                     labels=labels)
    pi1 = StructMap(c, a1, {index[pr]: pr[0] for pr in pairs})
    pi2 = StructMap(c, a2, {index[pr]: pr[1] for pr in pairs})
    return c, pi1, pi2


def _restrict_map(phi: StructMap, sub: FinStructure) -> StructMap:
    return StructMap(sub, phi.codomain,
                     {v: phi.mapping[v] for v in sub.vertices})


def _core_candidate(phi1: StructMap, phi2: StructMap):
    """Surjective core of the fibre product with restricted projections.

    Any amalgamation witness whose relations are everywhere surjective
    factors through this core, so the core deciding the question is exact
    for the surjective families.  Returns None when the core is empty.
    """
    c, pi1, pi2 = fibre_product(phi1, phi2)
    alive = surjective_core(c)
    if not alive:
        return None
    core = induced(c, alive)
    return core, _restrict_map(pi1, core), _restrict_map(pi2, core)


def _verify_witness(family: str, c: FinStructure, psi1: StructMap,
                    psi2: StructMap, phi1: StructMap | None,
                    phi2: StructMap | None) -> None:
    rep = in_family(c, family)
    if not rep:
        raise VerificationError(f"witness not in {family}: {rep.reason}")
    if not check_epimorphism(psi1) or not check_epimorphism(psi2):
        raise VerificationError("witness projection is not an epimorphism")
    if phi1 is not None and phi2 is not None:
        if compose(phi1, psi1) != compose(phi2, psi2):
            raise VerificationError("witness square does not commute")


def _require_family(s: FinStructure, family: str, role: str) -> None:
    rep = in_family(s, family)
    if not rep:
        raise ValueError(f"{role} is not in {family}: {rep.reason}")


def _strip_fn(phi: StructMap):
    """Remove constant preimages from an Fn-epimorphism.

    Returns the restricted F-level epimorphism plus the components of the
    domain that map onto constant points (each with the constant index it
    hits); those components must be re-covered separately.
    """
    a, b = phi.domain, phi.codomain
    const_points = set(b.constants)
    pre = {v for v in a.vertices if phi.mapping[v] in const_points}
    a_rest = induced(a, a.vertices - pre, keep_constants=False)
    b_rest = induced(b, b.vertices - const_points, keep_constants=False)
    phi_rest = StructMap(a_rest, b_rest,
                         {v: phi.mapping[v] for v in a_rest.vertices})
    fixups = []
    extra = pre - set(a.constants)
    if extra:
        sub = induced(a, extra, keep_constants=False)
        for blk in connected_components(sub).blocks:
            comp = induced(sub, blk)
            j = b.constants.index(phi.mapping[min(blk)])
            fixups.append((comp, j))
    return phi_rest, fixups


def _reattach_fn(core: FinStructure, psi1: StructMap, psi2: StructMap,
                 fix1, fix2, a1: FinStructure, a2: FinStructure):
    """Assemble the Fn witness from the F-level one plus fixup copies.

    Each fixup component maps identically onto its own side and collapses
    to the matching constant point on the other side, keeping the square
    commuting over the constant fibres.
    """
    parts = [core] + [comp for comp, _ in fix1] + [comp for comp, _ in fix2]
    union, injs = disjoint_union(parts)
    n = a1.n
    full = expand_constants(union, n)
    inv0 = {w: v for v, w in injs[0].items()}
    map1 = {injs[0][v]: psi1.mapping[v] for v in core.vertices}
    map2 = {injs[0][v]: psi2.mapping[v] for v in core.vertices}
    k = 1
    for comp, j in fix1:
        for v in comp.vertices:
            map1[injs[k][v]] = v
            map2[injs[k][v]] = a2.constants[j]
        k += 1
    for comp, j in fix2:
        for v in comp.vertices:
            map1[injs[k][v]] = a1.constants[j]
            map2[injs[k][v]] = v
        k += 1
    fresh = full.constants
    for j in range(n):
        map1[fresh[j]] = a1.constants[j]
        map2[fresh[j]] = a2.constants[j]
    del inv0
    return full, StructMap(full, a1, map1), StructMap(full, a2, map2)


def _f_member_stock(m: int) -> list[FinStructure]:
    """Small known members of F, used to seed cover searches."""
    if m != 1:
        return []
    xy = FinStructure(1, [0, 1], [{(0, 0), (0, 1), (1, 1)}],
                      labels={0: "x", 1: "y"})
    return [xy]


def _enumerate_f_members(m: int, size: int):
    """All F structures on ``size`` vertices (feasible only at toy sizes)."""
    verts = list(range(size))
    pair_list = [(a, b) for a in verts for b in verts]
    for masks in iproduct(range(1 << len(pair_list)), repeat=m):
        rels = []
        for mask in masks:
            rels.append({pair_list[k] for k in range(len(pair_list))
                         if mask >> k & 1})
        try:
            cand = FinStructure(m, verts, rels)
        except ValueError:
            continue
        if in_family(cand, F):
            yield cand


def _f_cover_search(s: FinStructure, size_cap: int,
                    budget: int) -> tuple[FinStructure, StructMap] | None:
    """Bounded search for an F member covering ``s`` by an epimorphism.

    Tries the structure itself, then stock members, then exhaustive
    enumeration at toy sizes.  Raises CapExhausted when the bounded space
    is exhausted without an answer either way.
    """
    if in_family(s, F):
        return s, identity_map(s)
    for cand in _f_member_stock(s.m):
        if len(cand.vertices) <= size_cap:
            epi = find_epimorphism(cand, s, budget)
            if epi is not None:
                return cand, epi
    max_enum = 4 if s.m == 1 else 3
    for size in range(max(1, len(s.vertices)), min(size_cap, max_enum) + 1):
        if s.m * size * size > 18:
            break
        for cand in _enumerate_f_members(s.m, size):
            epi = find_epimorphism(cand, s, budget)
            if epi is not None:
                return cand, epi
    raise CapExhausted(
        f"no F cover of a {len(s.vertices)}-vertex structure found within "
        f"size cap {size_cap}", budget=size_cap)


def pap_witness(phi1: StructMap, phi2: StructMap, family: str,
                size_cap: int | None = None, budget: int = DEFAULT_BUDGET):
    """Projective amalgamation witness (C, psi1, psi2) in the family.

    For the surjective families the core of the fibre product decides the
    question exactly: it is returned when its projections are epimorphisms
    and None is returned otherwise (no witness exists at all).  For F the
    core is the seed; when it misses the family, a bounded search for an F
    cover of the core runs, reporting CapExhausted when inconclusive.  For
    Fn the constant fibres are stripped first and re-attached afterwards.
    """
    if phi1.codomain != phi2.codomain:
        raise ValueError("codomain mismatch")
    a1, a2, base = phi1.domain, phi2.domain, phi1.codomain
    for s, role in ((a1, "left domain"), (a2, "right domain"),
                    (base, "codomain")):
        _require_family(s, family, role)
    for phi, role in ((phi1, "left map"), (phi2, "right map")):
        if not check_epimorphism(phi):
            raise ValueError(f"{role} is not an epimorphism")
    if size_cap is None:
        size_cap = len(a1.vertices) * len(a2.vertices) * 4

    if phi1 == phi2:
        out = (a1, identity_map(a1), identity_map(a1))
        _verify_witness(family, *out, phi1, phi2)
        return out

    if family in (F0, F0N):
        got = _core_candidate(phi1, phi2)
        if got is None:
            return None
        core, psi1, psi2 = got
        if not (check_epimorphism(psi1) and check_epimorphism(psi2)
                and in_family(core, family)):
            return None
        _verify_witness(family, core, psi1, psi2, phi1, phi2)
        return core, psi1, psi2

    if family == F:
        got = _core_candidate(phi1, phi2)
        if got is None or not (check_epimorphism(got[1])
                               and check_epimorphism(got[2])):
            return None
        core, psi1, psi2 = got
        if in_family(core, F):
            _verify_witness(F, core, psi1, psi2, phi1, phi2)
            return core, psi1, psi2
        found = _f_cover_search(core, size_cap, budget)
        cov, h = found
        out = (cov, compose(psi1, h), compose(psi2, h))
        _verify_witness(F, *out, phi1, phi2)
        return out

    if family == FN:
        phi1_rest, fix1 = _strip_fn(phi1)
        phi2_rest, fix2 = _strip_fn(phi2)
        inner = pap_witness(phi1_rest, phi2_rest, F, size_cap, budget)
        if inner is None:
            return None
        core, psi1, psi2 = inner
        out = _reattach_fn(core, psi1, psi2, fix1, fix2, a1, a2)
        _verify_witness(FN, *out, phi1, phi2)
        return out

    raise ValueError(f"unknown family {family!r}")


def _terminal_structure(m: int, n: int) -> FinStructure:
    return FinStructure(m, [0], [{(0, 0)} for _ in range(m)],
                        constants=[0] * n)


def jpp_witness(a1: FinStructure, a2: FinStructure, family: str,
                size_cap: int | None = None, budget: int = DEFAULT_BUDGET):
    """Joint projection witness (B, psi1, psi2): epimorphisms onto both.

    Surjective families reduce to amalgamation over the one-point structure
    (the full product always works there).  For F the tactics are, in
    order: equal inputs, disjoint union glued by cross homomorphisms, the
    product core, then CapExhausted.
    """
    _require_family(a1, family, "left structure")
    _require_family(a2, family, "right structure")
    if a1.m != a2.m or a1.n != a2.n:
        raise ValueError("arity mismatch")
    if size_cap is None:
        size_cap = len(a1.vertices) * len(a2.vertices) * 4

    if a1 == a2:
        out = (a1, identity_map(a1), identity_map(a1))
        _verify_witness(family, *out, None, None)
        return out

    if family in (F0, F0N):
        term = _terminal_structure(a1.m, a1.n)
        to1 = StructMap(a1, term, {v: 0 for v in a1.vertices})
        to2 = StructMap(a2, term, {v: 0 for v in a2.vertices})
        got = pap_witness(to1, to2, family, size_cap, budget)
        if got is None:
            return None
        return got

    if family == F:
        h21 = find_homomorphism(a2, a1, budget)
        h12 = find_homomorphism(a1, a2, budget)
        if h21 is not None and h12 is not None:
            union, (inj1, inj2) = disjoint_union([a1, a2])
            map1 = {inj1[v]: v for v in a1.vertices}
            map1.update({inj2[v]: h21.mapping[v] for v in a2.vertices})
            map2 = {inj2[v]: v for v in a2.vertices}
            map2.update({inj1[v]: h12.mapping[v] for v in a1.vertices})
            out = (union, StructMap(union, a1, map1),
                   StructMap(union, a2, map2))
            _verify_witness(F, *out, None, None)
            return out
        term = _terminal_structure(a1.m, 0)
        to1 = StructMap(a1, term, {v: 0 for v in a1.vertices})
        to2 = StructMap(a2, term, {v: 0 for v in a2.vertices})
        got = _core_candidate(to1, to2)
        if got is not None and in_family(got[0], F) \
                and check_epimorphism(got[1]) and check_epimorphism(got[2]):
            _verify_witness(F, *got, None, None)
            return got
        raise CapExhausted("joint projection tactics exhausted for F",
                           budget=size_cap)

    if family == FN:
        n = a1.n
        s1 = induced(a1, a1.vertices - set(a1.constants),
                     keep_constants=False)
        s2 = induced(a2, a2.vertices - set(a2.constants),
                     keep_constants=False)
        core, psi1, psi2 = jpp_witness(s1, s2, F, size_cap, budget)
        full = expand_constants(core, n)
        map1 = dict(psi1.mapping)
        map2 = dict(psi2.mapping)
        for j in range(n):
            map1[full.constants[j]] = a1.constants[j]
            map2[full.constants[j]] = a2.constants[j]
        out = (full, StructMap(full, a1, map1), StructMap(full, a2, map2))
        _verify_witness(FN, *out, None, None)
        return out

    raise ValueError(f"unknown family {family!r}")


def coinitial_cover(s: FinStructure, target: str,
                    size_cap: int = 16, budget: int = DEFAULT_BUDGET):
    """Cover of a surjective structure by a member of the target family.

    Target F0n always succeeds: the constant-free reduct gets a disjoint
    spiral-union cover and fresh constant points are re-attached over the
    old ones.  Target Fn needs F covers of the reduct components, found by
    bounded search; a cap exhaustion is reported as unknown.
    """
    from .groups import Labelling, preset_group
    from .spirals import surj_qp_cover

    if target not in (F0N, FN):
        raise ValueError("target must be F0n or Fn")
    _require_family(s, F0N, "structure")
    if target == FN and in_family(s, FN):
        return s, identity_map(s)

    reduct = induced(s, s.vertices, keep_constants=False)

    if target == F0N:
        triv = preset_group("Z1")
        lam = Labelling(reduct.vertices, triv, reduct.m,
                        {v: (0,) * reduct.m for v in reduct.vertices})
        wit = surj_qp_cover(reduct, lam, triv)
        cover, phi = wit.phi.domain, wit.phi
    else:
        comps = connected_components(reduct)
        pieces = []
        piece_maps = []
        for blk in comps.blocks:
            comp = induced(reduct, blk)
            cov, epi = _f_cover_search(comp, size_cap, budget)
            pieces.append(cov)
            piece_maps.append(epi)
        cover, injs = disjoint_union(pieces)
        mapping: dict[int, int] = {}
        for inj, epi in zip(injs, piece_maps):
            for v, w in inj.items():
                mapping[w] = epi.mapping[v]
        phi = StructMap(cover, reduct, mapping)

    full = expand_constants(cover, s.n)
    mapping = dict(phi.mapping)
    for j in range(s.n):
        mapping[full.constants[j]] = s.constants[j]
    out_map = StructMap(full, s, mapping)
    rep = in_family(full, target)
    if not rep:
        raise VerificationError(f"cover not in {target}: {rep.reason}")
    if not check_epimorphism(out_map):
        raise VerificationError("cover map is not an epimorphism")
    return full, out_map
