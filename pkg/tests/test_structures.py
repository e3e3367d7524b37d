import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import profin as pf
from profin import (F, F0, F0N, FN, FinStructure, Partition,
                    PartitionRelationTuple)

from conftest import (loop_structure, random_f0, random_partition,
                      two_cycle, xy_member)


class TestFinStructure:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            FinStructure(1, [0], [{(0, 1)}])
        with pytest.raises(ValueError):
            FinStructure(1, [0], [{(0, 0)}], constants=[5])
        with pytest.raises(ValueError):
            FinStructure(0, [0], [])
        with pytest.raises(ValueError):
            FinStructure(2, [0], [{(0, 0)}])

    def test_equality_ignores_labels(self):
        a = FinStructure(1, [0, 1], [{(0, 1)}], labels={0: "u"})
        b = FinStructure(1, [0, 1], [{(0, 1)}])
        assert a == b


class TestConnectedComponents:
    def test_edgeless_two_singletons(self):
        s = FinStructure(1, [0, 1], [set()])
        assert pf.connected_components(s).blocks == (
            frozenset({0}), frozenset({1}))

    def test_constant_block_is_singleton(self, rng):
        for _ in range(10):
            s = pf.expand_constants(random_f0(rng), 1)
            p = pf.connected_components(s)
            assert p.blocks[p.block_of(s.constants[0])] == frozenset(
                {s.constants[0]})

    def test_spiral_single_block(self):
        s = pf.make_spiral(2, 1, 2).structure
        p = pf.connected_components(s)
        assert len(p) == 1 and len(p.blocks[0]) == 3

    def test_loops_do_not_connect(self):
        s = FinStructure(1, [0, 1], [{(0, 0), (1, 1)}])
        assert len(pf.connected_components(s)) == 2


class TestSurjectiveRelation:
    def test_loop(self):
        assert pf.is_surjective_relation(loop_structure(), 0)

    def test_path_fails(self):
        s = FinStructure(1, [0, 1], [{(0, 1)}])
        assert not pf.is_surjective_relation(s, 0)

    @pytest.mark.parametrize("p,q,r", [(2, 1, 2), (3, 2, 4), (5, 1, 2)])
    def test_spirals_by_degree_oracle(self, p, q, r):
        s = pf.make_spiral(p, q, r).structure
        rel = s.relations[0]
        oracle = all(
            any(x == a for x, _ in rel) and any(y == a for _, y in rel)
            for a in s.vertices)
        assert oracle
        assert pf.is_surjective_relation(s, 0) == oracle

    def test_index_error(self):
        with pytest.raises(IndexError):
            pf.is_surjective_relation(loop_structure(), 1)


class TestOutgoing:
    def test_isolated_loop_empty(self):
        assert pf.outgoing_classification(loop_structure(), 0) == set()

    def test_spiral_junction_empty(self):
        sp = pf.make_spiral(2, 1, 2)
        assert pf.outgoing_classification(sp.structure, sp.a(2)) == set()

    def test_xy_tags(self):
        s = xy_member()
        assert pf.outgoing_classification(s, 0) == {(0, "fwd")}
        assert pf.outgoing_classification(s, 1) == {(0, "inv")}

    def test_unknown_vertex(self):
        with pytest.raises(ValueError):
            pf.outgoing_classification(loop_structure(), 9)


class TestFamilies:
    def test_two_cycle(self):
        assert pf.in_family(two_cycle(), F0).ok
        rep = pf.in_family(two_cycle(), F)
        assert not rep.ok and "outgoing" in rep.reason

    def test_xy_in_f(self):
        assert pf.in_family(xy_member(), F).ok

    def test_expand_lands_in_fn(self):
        assert pf.in_family(pf.expand_constants(xy_member(), 2), FN).ok

    def test_requires_n0(self):
        s = pf.expand_constants(xy_member(), 1)
        with pytest.raises(ValueError):
            pf.in_family(s, F0)

    def test_f0n_constant_loop_required(self):
        s = FinStructure(1, [0, 1], [{(0, 1), (1, 0)}], constants=[0])
        rep = pf.in_family(s, F0N)
        assert not rep.ok and "loop" in rep.reason

    def test_f0n_allows_nonsingleton_constants(self):
        rel = {(0, 0), (0, 1), (1, 1), (1, 0)}
        s = FinStructure(1, [0, 1], [rel], constants=[0])
        assert pf.in_family(s, F0N).ok
        assert not pf.in_family(s, FN).ok

    def test_f_implies_f0(self, rng):
        for _ in range(50):
            s = random_f0(rng, max_size=5)
            if pf.in_family(s, F).ok:
                assert pf.in_family(s, F0).ok

    def test_component_locality(self, rng):
        for _ in range(30):
            parts = [random_f0(rng, max_size=4) for _ in range(
                rng.randint(2, 3))]
            m = parts[0].m
            parts = [p for p in parts if p.m == m]
            union, _ = pf.disjoint_union(parts)
            for fam in (F0, F):
                whole = pf.in_family(union, fam).ok
                each = all(pf.in_family(p, fam).ok for p in parts)
                assert whole == each

    def test_first_violation_named(self):
        s = FinStructure(1, [0, 1], [{(0, 1), (1, 1)}])
        rep = pf.in_family(s, F0)
        assert rep.vertex == 0 and rep.relation == 0


class TestExpandConstants:
    def test_zero_is_identity(self):
        s = xy_member()
        assert pf.expand_constants(s, 0) is s

    def test_adds_loop_singletons(self):
        s = pf.expand_constants(two_cycle(), 3)
        assert len(s.vertices) == 5 and s.n == 3
        comp = pf.connected_components(s)
        for c in s.constants:
            assert comp.blocks[comp.block_of(c)] == frozenset({c})
            for rel in s.relations:
                assert (c, c) in rel

    def test_rejects_existing_constants(self):
        s = pf.expand_constants(xy_member(), 1)
        with pytest.raises(ValueError):
            pf.expand_constants(s, 1)

    def test_singleton_constant_count(self, rng):
        for _ in range(10):
            k = rng.randint(0, 3)
            s = pf.expand_constants(random_f0(rng), k)
            comp = pf.connected_components(s)
            singles = sum(
                1 for c in s.constants
                if comp.blocks[comp.block_of(c)] == frozenset({c}))
            assert singles == k


class TestQuotient:
    def test_discrete_is_isomorphism(self, rng):
        for _ in range(10):
            s = random_f0(rng)
            p = Partition([{v} for v in s.vertices])
            q, proj = pf.quotient(s, p)
            assert pf.check_epimorphism(proj)
            assert len(q.vertices) == len(s.vertices)
            assert len(set(proj.mapping.values())) == len(s.vertices)

    def test_single_block_gives_loops(self):
        s = two_cycle()
        q, proj = pf.quotient(s, Partition([{0, 1}]))
        assert q.relations[0] == frozenset({(0, 0)})
        assert pf.check_epimorphism(proj)

    def test_spiral_example(self):
        sp = pf.make_spiral(2, 1, 2)
        p = Partition([{sp.a(1)}, {sp.a(2), sp.c(2)}])
        q, _ = pf.quotient(sp.structure, p)
        assert q.relations[0] == frozenset({(0, 1), (1, 1), (1, 0)})

    def test_constants_cannot_merge(self):
        s = pf.expand_constants(two_cycle(), 2)
        c1, c2 = s.constants
        with pytest.raises(ValueError):
            pf.quotient(s, Partition([{0, 1}, {c1, c2}]))

    def test_quotient_preserves_f0(self, rng):
        for _ in range(30):
            s = random_f0(rng, max_size=5)
            q, _ = pf.quotient(s, random_partition(rng, s))
            assert pf.in_family(q, F0).ok


class TestRestrictMap:
    def test_identity_gives_diagonal(self):
        p = Partition([{0, 1}, {2}])
        f = {v: v for v in range(3)}
        assert pf.restrict_map_to_partition(f, p) == frozenset(
            {(0, 0), (1, 1)})

    def test_four_cycle_two_blocks(self):
        f = {1: 2, 2: 3, 3: 4, 4: 1}
        p = Partition([{1, 2}, {3, 4}])
        assert pf.restrict_map_to_partition(f, p) == frozenset(
            {(0, 0), (0, 1), (1, 1), (1, 0)})

    def test_single_block_loop(self, rng):
        verts = list(range(5))
        rng.shuffle(verts)
        f = dict(zip(range(5), verts))
        p = Partition([set(range(5))])
        assert pf.restrict_map_to_partition(f, p) == frozenset({(0, 0)})

    def test_non_bijection_rejected(self):
        with pytest.raises(ValueError):
            pf.restrict_map_to_partition({0: 0, 1: 0}, Partition([{0, 1}]))

    @given(st.permutations(list(range(6))), st.integers(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_always_surjective_block_relation(self, perm, k):
        f = dict(enumerate(perm))
        blocks = [list(range(6))[i::k] for i in range(k)]
        p = Partition([b for b in blocks if b])
        rel = pf.restrict_map_to_partition(f, p)
        assert {a for a, _ in rel} == set(range(len(p)))
        assert {b for _, b in rel} == set(range(len(p)))

    def test_fixed_points_give_fixed_block_loops(self, rng):
        # bijections fixing marked points restrict into the admissible set
        for _ in range(20):
            free = list(range(1, 6))
            rng.shuffle(free)
            f = {0: 0, **dict(zip(range(1, 6), free))}
            p = Partition([{0, 1}, {2, 3}, {4, 5}])
            rel = pf.restrict_map_to_partition(f, p)
            prt = PartitionRelationTuple(p, [rel], fixed_blocks=[0])
            assert prt.is_admissible()


class TestBasicOpen:
    def test_identity_diagonal(self):
        p = Partition([{0}, {1}])
        diag = frozenset({(0, 0), (1, 1)})
        prt = PartitionRelationTuple(p, [diag, diag])
        h = [{0: 0, 1: 1}, {0: 0, 1: 1}]
        assert pf.in_basic_open(h, p, prt)

    def test_off_diagonal_rejected(self):
        p = Partition([{0}, {1}])
        prt = PartitionRelationTuple(p, [frozenset({(0, 0), (1, 1),
                                                    (0, 1)})])
        assert not pf.in_basic_open([{0: 0, 1: 1}], p, prt)

    def test_round_trip(self):
        f = {1: 2, 2: 3, 3: 4, 4: 1}
        p = Partition([{1, 2}, {3, 4}])
        rel = pf.restrict_map_to_partition(f, p)
        prt = PartitionRelationTuple(p, [rel])
        assert pf.in_basic_open([f], p, prt)

    def test_arity_mismatch(self):
        p = Partition([{0}])
        prt = PartitionRelationTuple(p, [frozenset({(0, 0)})])
        with pytest.raises(ValueError):
            pf.in_basic_open([{0: 0}, {0: 0}], p, prt)


class TestPartition:
    def test_validation(self):
        with pytest.raises(ValueError):
            Partition([{0, 1}, {1, 2}])
        with pytest.raises(ValueError):
            Partition([set()])

    def test_canonical_block_order(self):
        p = Partition([{5, 3}, {0, 9}])
        assert p.blocks == (frozenset({0, 9}), frozenset({3, 5}))


class TestSurjectiveCore:
    def test_full_on_f0(self, rng):
        for _ in range(10):
            s = random_f0(rng)
            assert pf.surjective_core(s) == s.vertices

    def test_prunes_dead_tail(self):
        s = FinStructure(1, [0, 1], [{(0, 0), (0, 1)}])
        assert pf.surjective_core(s) == frozenset({0})

    def test_empty_when_relation_empty(self):
        s = FinStructure(2, [0], [{(0, 0)}, set()])
        assert pf.surjective_core(s) == frozenset()
