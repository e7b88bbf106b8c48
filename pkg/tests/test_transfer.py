import random
from fractions import Fraction

import pytest

from treetrace.algebra import GGroupRingElement, GroupAlgebraElement, tr_G
from treetrace.errors import BudgetExceeded, IncompatibleSupports
from treetrace.graph_of_groups import SIDE_B
from treetrace.scalars import GaussianRational
from treetrace.transfer import (
    DELTA,
    OrbitOperator,
    act_on_vector,
    defect_columns,
    defect_operator,
    defect_support,
    inner_product,
    inner_product_invariance,
    lift_to_delta,
    lift_to_omega,
    polynomial_calculus_defect,
    tr_H_orbit,
    trace_cyclicity,
    verify_transfer,
)
from treetrace.tree import STAR


def rand_element(spec, rnd, support=4, length=3):
    pool = spec.enumerate_ball(length)
    picks = rnd.sample(pool, support)
    return GGroupRingElement(
        spec, {g: GaussianRational(Fraction(rnd.randint(-3, 3), rnd.randint(1, 3)), rnd.randint(-2, 2)) for g in picks}
    )


def test_lift_of_one(spec_and_tree):
    spec, tree = spec_and_tree
    cols = [tree.v0] + [w for _, w in tree.neighbors(tree.v0)]
    op = lift_to_delta(tree, GGroupRingElement.one(spec), cols)
    assert op == OrbitOperator.identity(DELTA, spec.H, cols)
    assert tr_H_orbit(op) == len(cols)


def test_lift_of_group_element(spec_and_tree):
    spec, tree = spec_and_tree
    g = spec.enumerate_ball(2)[-1]
    op = lift_to_delta(tree, GGroupRingElement.of(spec, g), [tree.v0])
    assert op.entries == {(tree.act(g, tree.v0), tree.v0): GroupAlgebraElement.basis(spec.H, spec.alpha(g))}


def test_omega_lift(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(4)
    a = rand_element(spec, rnd)
    e = tree.neighbors(tree.v0)[0][0]
    assert lift_to_omega(tree, a, [STAR]).entries == {}
    assert lift_to_omega(tree, GGroupRingElement.one(spec), [e]).entries == {(e, e): GroupAlgebraElement.one(spec.H)}
    g = spec.enumerate_ball(2)[-1]
    op = lift_to_omega(tree, GGroupRingElement.of(spec, g), [e])
    assert op.entries == {(tree.act_edge(g, e), e): GroupAlgebraElement.basis(spec.H, spec.alpha(g))}


def test_lift_is_linear(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(5)
    a, b = rand_element(spec, rnd), rand_element(spec, rnd)
    cols = [v for v in tree.ball(2).vertices][:6]
    assert lift_to_delta(tree, a + b.scale(3), cols) == lift_to_delta(tree, a, cols) + lift_to_delta(tree, b, cols).scale(3)


def test_defect_of_one(spec_and_tree):
    spec, tree = spec_and_tree
    d = defect_operator(tree, GGroupRingElement.one(spec))
    assert d.entries == {(tree.v0, tree.v0): GroupAlgebraElement.one(spec.H)}
    assert tr_H_orbit(d) == 1


def test_defect_vanishes_off_support(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(6)
    ball = tree.ball(5).vertices
    for _ in range(5):
        a = rand_element(spec, rnd, support=3)
        full = defect_columns(tree, a, ball)
        assert full.column_support() <= defect_support(tree, a)
        assert full.restrict_columns(defect_support(tree, a)) == defect_operator(tree, a)


def test_defect_matches_hand_computation(amalgam, amalgam_tree):
    """g = b in B minus U: the defect lives on the two geodesic vertices v0 and the B vertex."""
    tree = amalgam_tree
    b = amalgam.normalize([(SIDE_B, amalgam.B.index_of([0, 2, 1]))])
    H = amalgam.H
    d = defect_operator(tree, GGroupRingElement.of(amalgam, b))
    hb = GroupAlgebraElement.basis(H, amalgam.alpha(b))
    vb = tree.vertex("B", amalgam.identity())
    # column v0: a_Delta sends v0 to b v0, phi^* a_Omega phi is zero on the star column
    assert d.column(tree.v0) == {tree.act(b, tree.v0): hb}
    # column vB: b fixes vB, jv(vB) is the edge U; b U is a different edge with far endpoint b v0
    assert d.column(vb) == {vb: hb, tree.act(b, tree.v0): -hb}
    assert tr_H_orbit(d) == 0


def test_trace_of_zero_and_identity(amalgam, amalgam_tree):
    H = amalgam.H
    assert tr_H_orbit(OrbitOperator.zero(DELTA, H, [amalgam_tree.v0])) == 0
    cols = amalgam_tree.ball(1).vertices
    assert tr_H_orbit(OrbitOperator.identity(DELTA, H, cols)) == len(cols)


def test_verify_transfer_basics(spec_and_tree):
    spec, tree = spec_and_tree
    rep = verify_transfer(tree, GGroupRingElement.one(spec))
    assert rep.lhs == rep.rhs == 1 and rep.equal and rep.r == 1
    for g in spec.enumerate_ball(3)[1:40]:
        rep = verify_transfer(tree, GGroupRingElement.of(spec, g))
        assert rep.lhs == rep.rhs == 0


def test_verify_transfer_random(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(7)
    for _ in range(40):
        a = rand_element(spec, rnd, support=rnd.randint(1, 8), length=4)
        rep = verify_transfer(tree, a)
        assert rep.equal, rep.to_json()


def test_averaging_idempotent(amalgam, amalgam_tree):
    s = amalgam.normalize([(SIDE_B, amalgam.B.index_of([0, 2, 1]))])
    a = GGroupRingElement.averaging(amalgam, [amalgam.identity(), s])
    rep = verify_transfer(amalgam_tree, a)
    assert rep.lhs == rep.rhs == Fraction(1, 2)


def test_several_star_orbits(hnn, hnn_tree):
    a = GGroupRingElement.averaging(hnn, [hnn.normalize([("H", h)]) for h in hnn.U.members])
    rep = verify_transfer(hnn_tree, a, copies=2)
    assert rep.r == 2 and rep.lhs == rep.rhs == Fraction(2, 3)


def test_transfer_report_json(amalgam, amalgam_tree):
    rep = verify_transfer(amalgam_tree, GGroupRingElement.one(amalgam).scale(GaussianRational(Fraction(1, 2), -1)))
    js = rep.to_json(timing=False)
    assert set(js) == {"element", "lhs", "rhs", "r", "equal", "support"}
    assert js["lhs"] == "1/2-1*i" and js["rhs"] == "1/2-1*i"
    assert "ms" in rep.to_json()


def test_inner_product(spec_and_tree):
    spec, tree = spec_and_tree
    H = spec.H
    x = {tree.v0: GroupAlgebraElement.one(H)}
    one = GroupAlgebraElement.one(H)
    for g in spec.enumerate_ball(2)[:20]:
        assert inner_product(act_on_vector(tree, g, x), act_on_vector(tree, g, x), H) == one
    w = tree.neighbors(tree.v0)[0][1]
    y = {w: GroupAlgebraElement.basis(H, 1)}
    assert not inner_product(x, y, H)
    rnd = random.Random(8)
    pool = spec.enumerate_ball(3)
    verts = tree.ball(2).vertices
    for _ in range(30):
        vec = {v: GroupAlgebraElement(H, {rnd.randrange(H.order): rnd.randint(-3, 3)}) for v in rnd.sample(verts, 3)}
        assert inner_product_invariance(tree, vec, rnd.choice(pool))
        assert inner_product_invariance(tree, x, rnd.choice(pool), y)


def test_trace_cyclicity(spec_and_tree):
    spec, tree = spec_and_tree
    g = spec.enumerate_ball(2)[-1]
    x = lift_to_delta(tree, GGroupRingElement.of(spec, g), [tree.v0])
    y = lift_to_delta(tree, GGroupRingElement.of(spec, spec.invert(g)), [tree.act(g, tree.v0)])
    assert trace_cyclicity(x, x)
    assert trace_cyclicity(x, y)
    rnd = random.Random(9)
    verts = tree.ball(2).vertices
    for _ in range(20):
        a, b = rand_element(spec, rnd, 3, 2), rand_element(spec, rnd, 3, 2)
        assert trace_cyclicity(lift_to_delta(tree, a, rnd.sample(verts, 3)), lift_to_delta(tree, b, rnd.sample(verts, 3)))


def test_delta_lift_is_star_homomorphism(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(10)
    verts = tree.ball(2).vertices
    for _ in range(15):
        a, b = rand_element(spec, rnd, 3, 2), rand_element(spec, rnd, 3, 2)
        cols = rnd.sample(verts, 2)
        lb = lift_to_delta(tree, b, cols)
        la = lift_to_delta(tree, a, lb.rows | set(cols))
        assert la @ lb == lift_to_delta(tree, a * b, cols)
        src = {tree.act(spec.invert(g), v) for g in a.coeffs for v in cols}
        assert lift_to_delta(tree, a, src).adjoint().restrict_columns(cols) == lift_to_delta(tree, a.star(), cols)


def test_strict_compose_and_columns(amalgam, amalgam_tree):
    H = amalgam.H
    with pytest.raises(IncompatibleSupports):
        OrbitOperator(DELTA, H, {(amalgam_tree.v0, amalgam_tree.v0): GroupAlgebraElement.one(H)}, [])
    g = amalgam.enumerate_ball(2)[-1]
    x = lift_to_delta(amalgam_tree, GGroupRingElement.of(amalgam, g), [amalgam_tree.v0])
    with pytest.raises(IncompatibleSupports):
        x @ x


def test_rebase_keeps_trace(hnn, hnn_tree):
    rnd = random.Random(11)
    a = rand_element(hnn, rnd)
    d = defect_operator(hnn_tree, a)
    shifts = {c: rnd.randrange(hnn.H.order) for c in d.columns | d.rows}
    assert tr_H_orbit(d.rebase(shifts)) == tr_H_orbit(d)


def test_polynomial_calculus(spec_and_tree):
    spec, tree = spec_and_tree
    rnd = random.Random(12)
    a = rand_element(spec, rnd, 3, 2)
    assert polynomial_calculus_defect(tree, a, [0, 1]).to_json(False)["rhs"] == verify_transfer(tree, a).to_json(False)["rhs"]
    g = spec.enumerate_ball(2)[-1]
    rep = polynomial_calculus_defect(tree, GGroupRingElement.of(spec, g), [0, 0, 1])
    assert rep.equal
    assert rep.lhs == tr_G(GGroupRingElement.of(spec, spec.multiply(g, g)))
    for _ in range(10):
        a = rand_element(spec, rnd, 2, 2)
        coeffs = [GaussianRational(rnd.randint(-2, 2), rnd.randint(-1, 1)) for _ in range(rnd.randint(1, 4))]
        rep = polynomial_calculus_defect(tree, a, coeffs)
        assert rep.equal, rep.to_json()
        assert rep.details["routes_agree"]


def test_polynomial_kills_idempotent(hnn, hnn_tree):
    e = GGroupRingElement.averaging(hnn, [hnn.normalize([("H", h)]) for h in hnn.U.members])
    rep = polynomial_calculus_defect(hnn_tree, e, [0, -1, 1])
    assert rep.lhs == rep.rhs == 0 and rep.equal
    assert rep.element == GGroupRingElement(hnn, {}).describe()


def test_polynomial_constant_term_correction(amalgam, amalgam_tree):
    a = GGroupRingElement.of(amalgam, amalgam.enumerate_ball(1)[-1])
    rep = polynomial_calculus_defect(amalgam_tree, a, [3, 1])
    assert rep.details["constant_correction"] == "3+0*i"
    assert rep.details["operator_route_trace"] == "0+0*i"
    assert rep.lhs == rep.rhs == 3


def test_polynomial_degree_budget(amalgam, amalgam_tree):
    with pytest.raises(BudgetExceeded):
        polynomial_calculus_defect(amalgam_tree, GGroupRingElement.one(amalgam), [1, 1, 1, 1, 1])
