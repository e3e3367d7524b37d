from itertools import permutations

import numpy as np
import pytest

import profin as pf
from profin import (BooleanPowerSpace, Labelling, ProductAut,
                    VerificationError)
from profin.autgroup import (conjugate, conjugator_values_in_stabiliser,
                             function_space, identity_khat,
                             mu_subgroup_check, natural_action,
                             preserves_filtered_operations)
from profin.groups import compose_perms, invert_perm


def space(points, marked=(), pins=()):
    return BooleanPowerSpace(points, marked, pins)


def rand_perm(rng, n):
    p = list(range(n))
    rng.shuffle(p)
    return tuple(p)


def rand_fixing_perm(rng, sp):
    free = list(sp.free_points())
    img = free[:]
    rng.shuffle(img)
    p = list(range(sp.points))
    for x, y in zip(free, img):
        p[x] = y
    return tuple(p)


def rand_kernel(rng, sp, a_size):
    return {x: rand_perm(rng, a_size) for x in sp.free_points()}


class TestFunctionSpace:
    def test_counts_and_pins(self):
        sp = space(3, marked=(1,), pins=(2,))
        table = function_space(sp, 3)
        assert table.shape == (9, 3)
        assert set(table[:, 1].tolist()) == {2}
        rows = {tuple(r) for r in table.tolist()}
        assert len(rows) == 9


class TestHbar:
    def test_identity(self):
        sp = space(3)
        table = function_space(sp, 2)
        h = pf.hbar(sp, 2, (0, 1, 2))
        assert np.array_equal(h.act(table), table)

    def test_swap_is_coordinate_swap(self):
        sp = space(2)
        table = function_space(sp, 3)
        h = pf.hbar(sp, 3, (1, 0))
        swapped = h.act(table)
        assert np.array_equal(swapped[:, 0], table[:, 1])
        assert np.array_equal(swapped[:, 1], table[:, 0])

    def test_marked_point_must_stay(self):
        sp = space(2, marked=(0,), pins=(0,))
        with pytest.raises(ValueError):
            pf.hbar(sp, 2, (1, 0))

    def test_group_embedding(self, rng):
        sp = space(3)
        for _ in range(20):
            p1, p2 = rand_perm(rng, 3), rand_perm(rng, 3)
            lhs = ProductAut([pf.hbar(sp, 2, p1), pf.hbar(sp, 2, p2)])
            rhs = pf.hbar(sp, 2, compose_perms(p1, p2))
            assert pf.elements_equal(lhs, rhs, sp, 2)


class TestKhat:
    def test_identity(self):
        sp = space(3)
        table = function_space(sp, 2)
        k = identity_khat(sp, 2)
        assert np.array_equal(k.act(table), table)

    def test_single_point_acts_as_sigma(self):
        sp = space(1)
        k = pf.khat(sp, 3, {0: (1, 2, 0)})
        table = function_space(sp, 3)
        out = k.act(table)
        assert out[:, 0].tolist() == [1, 2, 0]

    def test_pins_untouched(self, rng):
        sp = space(3, marked=(2,), pins=(1,))
        for _ in range(10):
            k = pf.khat(sp, 2, rand_kernel(rng, sp, 2))
            out = k.act(function_space(sp, 2))
            assert set(out[:, 2].tolist()) == {1}

    def test_non_permutation_rejected(self):
        sp = space(1)
        with pytest.raises(ValueError):
            pf.khat(sp, 2, {0: (0, 0)})

    def test_algebra_mode_requires_automorphisms(self):
        sp = space(1)
        a = pf.preset_algebra("Z3")
        pf.khat(sp, a, {0: (0, 2, 1)})
        with pytest.raises(ValueError):
            pf.khat(sp, a, {0: (1, 0, 2)})

    def test_algebra_mode_preserves_filtered_power(self):
        a = pf.preset_algebra("Z3")
        sp = space(2, marked=(0,), pins=(0,))
        k = pf.khat(sp, a, {1: (0, 2, 1)})
        assert preserves_filtered_operations(k, a, sp)

    def test_group_embedding_pointwise(self, rng):
        sp = space(2)
        for _ in range(20):
            k1 = rand_kernel(rng, sp, 3)
            k2 = rand_kernel(rng, sp, 3)
            lhs = ProductAut([pf.khat(sp, 3, k1), pf.khat(sp, 3, k2)])
            rhs = pf.khat(sp, 3, {x: compose_perms(k1[x], k2[x])
                                  for x in k1})
            assert pf.elements_equal(lhs, rhs, sp, 3)


class TestConjugationIdentity:
    def test_trivial_h(self, rng):
        sp = space(3)
        values = rand_kernel(rng, sp, 2)
        assert pf.conjugation_identity_check(sp, 2, values, (0, 1, 2))

    def test_random_instances(self, rng):
        sp = space(3)
        for _ in range(50):
            assert pf.conjugation_identity_check(
                sp, 2, rand_kernel(rng, sp, 2), rand_perm(rng, 3))

    def test_with_marked_points(self, rng):
        sp = space(4, marked=(3,), pins=(0,))
        for _ in range(20):
            assert pf.conjugation_identity_check(
                sp, 2, rand_kernel(rng, sp, 2), rand_fixing_perm(rng, sp))

    def test_kh_intersection_trivial(self):
        sp = space(3)
        ident = (0, 1, 2)
        table = function_space(sp, 2)
        flip = (1, 0)
        ident2 = (0, 1)
        for h_perm in permutations(range(3)):
            h = pf.hbar(sp, 2, h_perm)
            for bits in range(8):
                values = {x: (flip if bits >> x & 1 else ident2)
                          for x in range(3)}
                k = pf.khat(sp, 2, values)
                if np.array_equal(h.act(table), k.act(table)):
                    assert h_perm == ident
                    assert all(v == ident2 for v in values.values())


class TestDecompose:
    def test_pure_shuffle(self, rng):
        sp = space(3)
        h = pf.hbar(sp, 2, rand_perm(rng, 3))
        k_part, d_part = pf.decompose(ProductAut([h]))
        assert d_part.perm == h.perm
        assert all(v == (0, 1) for v in k_part.values.values())

    def test_normal_form_matches_evaluation(self, rng):
        sp = space(3)
        for _ in range(20):
            factors = []
            for _ in range(rng.randint(1, 4)):
                if rng.random() < 0.5:
                    factors.append(pf.hbar(sp, 2, rand_perm(rng, 3)))
                else:
                    factors.append(pf.khat(sp, 2, rand_kernel(rng, sp, 2)))
            g = ProductAut(factors)
            k_part, d_part = pf.decompose(g)
            assert pf.elements_equal(
                g, ProductAut([d_part, k_part]), sp, 2)

    def test_conjugate_shuffle_k_part_formula(self, rng):
        # h^(dc) = c^-1 (h^d c (h^d)^-1) h^d: the k-part of the conjugate
        sp = space(3)
        for _ in range(10):
            h = pf.hbar(sp, 2, rand_perm(rng, 3))
            d = pf.hbar(sp, 2, rand_perm(rng, 3))
            c = pf.khat(sp, 2, rand_kernel(rng, sp, 2))
            g = ProductAut([d, c])
            k_part, d_part = pf.decompose(conjugate(h, g))
            u = compose_perms(compose_perms(invert_perm(d.perm), h.perm),
                              d.perm)
            assert d_part.perm == u
            hd = pf.hbar(sp, 2, u)
            formula = ProductAut([hd.inverse(), c.inverse(), hd, c])
            assert pf.elements_equal(ProductAut([k_part]), formula, sp, 2)


def z2_flip():
    return pf.preset_group("Z2"), ((0, 1), (1, 0))


def worked_lam(group):
    sp = pf.make_spiral(2, 1, 2)
    g = 1 if group.order > 1 else 0
    return Labelling(sp.structure.vertices, group, 1,
                     {sp.a(1): g, sp.a(2): 0, sp.c(2): g})


class TestCycleCoverInstance:
    def test_trivial_group_gives_identity_kernel(self):
        triv = pf.preset_group("Z1")
        inst = pf.cycle_cover_instance(2, 1, 2, triv, ((0, 1),), 2,
                                       worked_lam(triv))
        assert all(v == (0, 1) for v in inst.kernel[0].values.values())

    def test_z2_shape(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        assert inst.space.points == 4
        assert inst.h[0] == (1, 2, 3, 0)
        cover = pf.make_spiral(4, 1, 4)
        assert inst.psi[0] == cover.a(1)
        assert inst.psi[3] == cover.a(4)

    def test_ell_multiplier_winds_twice(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group), ell=2)
        assert inst.space.points == 8
        inst.verify()

    def test_non_faithful_rejected(self):
        z2 = pf.preset_group("Z2")
        with pytest.raises(ValueError):
            pf.cycle_cover_instance(2, 1, 2, z2, ((0, 1), (0, 1)), 2,
                                    worked_lam(z2))

    def test_fibre_constancy_required(self):
        z2 = pf.preset_group("Z2")
        sp = pf.make_spiral(2, 1, 2)
        bad = Labelling(sp.structure.vertices, z2, 1,
                        {sp.a(1): 1, sp.a(2): 0, sp.c(2): 0})
        with pytest.raises(ValueError):
            pf.cycle_cover_instance(2, 1, 2, z2, ((0, 1), (1, 0)), 2, bad)

    def test_p_must_divide_r(self):
        z3 = pf.preset_group("Z3")
        sp = pf.make_spiral(3, 1, 2)
        lam = Labelling(sp.structure.vertices, z3, 1,
                        {v: 0 for v in sp.structure.vertices})
        with pytest.raises(ValueError):
            pf.cycle_cover_instance(3, 1, 2, z3, natural_action(z3), 3, lam)

    def test_mu_stays_in_label_subgroup(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        assert mu_subgroup_check(inst)


class TestQpConjugator:
    def test_identity_labels_give_identity_conjugator(self):
        group, action = z2_flip()
        sp = pf.make_spiral(2, 1, 2)
        lam = Labelling(sp.structure.vertices, group, 1,
                        {v: 0 for v in sp.structure.vertices})
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2, lam)
        c = pf.qp_conjugator(inst)
        assert all(v == (0, 1) for v in c.values.values())

    def test_worked_z2_instance(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        c = pf.qp_conjugator(inst)
        hb = pf.hbar(inst.space, 2, inst.h[0])
        lhs = ProductAut([inst.kernel[0], hb])
        assert pf.elements_equal(lhs, conjugate(hb, c), inst.space, 2)

    def test_s3_instance(self):
        s3 = pf.preset_group("S3")
        inst = pf.cycle_cover_instance(2, 1, 2, s3, natural_action(s3), 3,
                                       worked_lam(s3), alpha=2)
        pf.qp_conjugator(inst)

    def test_identity_is_direction_sensitive(self):
        # with an order-3 kernel both the product order and the conjugation
        # direction matter, so the exhaustive check is not vacuous
        from profin.autgroup import regular_action
        z3 = pf.preset_group("Z3")
        inst = pf.cycle_cover_instance(2, 1, 2, z3, regular_action(z3), 3,
                                       worked_lam(z3))
        c = pf.qp_conjugator(inst)
        hb = pf.hbar(inst.space, 3, inst.h[0])
        lhs = ProductAut([inst.kernel[0], hb])
        assert pf.elements_equal(lhs, conjugate(hb, c), inst.space, 3)
        assert not pf.elements_equal(
            lhs, ProductAut([c, hb, c.inverse()]), inst.space, 3)
        assert not pf.elements_equal(
            lhs, ProductAut([hb, inst.kernel[0]]), inst.space, 3)

    def test_tampered_mu_is_named(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        cover = pf.make_spiral(4, 1, 4)
        vals = dict(inst.mu.values)
        vals[cover.a(2)] = (1 - vals[cover.a(2)][0],)
        inst.mu = Labelling(inst.mu.carrier, group, 1, vals)
        with pytest.raises(VerificationError, match="quotient property"):
            pf.qp_conjugator(inst)

    def test_tampered_psi_is_named(self):
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        cover = pf.make_spiral(4, 1, 4)
        inst.psi = dict(inst.psi)
        inst.psi[1] = cover.a(4)
        with pytest.raises(VerificationError):
            pf.qp_conjugator(inst)

    def test_pinned_union_with_stabiliser(self):
        group, action = z2_flip()
        far = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                      worked_lam(group))
        sp = pf.make_spiral(2, 1, 2)
        lam_id = Labelling(sp.structure.vertices, group, 1,
                           {v: 0 for v in sp.structure.vertices})
        near = pf.cycle_cover_instance(2, 1, 2, group, action, 2, lam_id)
        inst, near_pts = pf.pinned_union_instance(far, near, pin=0)
        c = pf.qp_conjugator(inst)
        assert conjugator_values_in_stabiliser(c, near_pts, 0)
        assert inst.space.marked == (8,)

    def test_pinned_union_rejects_non_stabilising_near(self):
        group, action = z2_flip()
        far = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                      worked_lam(group))
        with pytest.raises(ValueError):
            pf.pinned_union_instance(far, far, pin=0)


class TestInstanceJson:
    def test_round_trip_and_verify(self):
        from profin import jsonio
        group, action = z2_flip()
        inst = pf.cycle_cover_instance(2, 1, 2, group, action, 2,
                                       worked_lam(group))
        blob = jsonio.instance_to_json(inst)
        again = jsonio.instance_from_json(blob)
        pf.qp_conjugator(again)
        assert jsonio.instance_to_json(again) == blob
