"""End-to-end acceptance checks, one per criterion.

Each check prints a single PASS/FAIL line (collected into the pytest terminal
summary by ``conftest.py``). Run ``python tests/test_acceptance.py`` to get the
lines without pytest.
"""

import time
from fractions import Fraction
from pathlib import Path

import pytest

from treetrace.algebra import GGroupRingElement
from treetrace.groups import symmetric_group
from treetrace.index import (
    generate_projection_pair,
    h_index,
    h_trace,
    kasparov_compactness_check,
    norm_inequalities_check,
    random_module_matrix,
)
from treetrace.runner import (
    _vertex_group_subgroups,
    check_julg_valette_ball,
    random_element,
    random_h_element,
    random_scalar,
    rng_for,
)
from treetrace.scalars import GaussianRational
from treetrace.scenario import parse_scenario
from treetrace.transfer import (
    inner_product_invariance,
    lift_to_delta,
    polynomial_calculus_defect,
    trace_cyclicity,
    verify_transfer,
)
from treetrace.tree import BassSerreTree

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
GROUP_SCENARIOS = ("s3_c2_s3.json", "hnn_s3_c3.json")

TRANSFER_TRIALS = 500
MAX_SUPPORT = 8
MAX_WORD_LENGTH = 4
TRANSFER_SECONDS = 60.0
JV_MAX_RADIUS = 5
JV_SAMPLES = 500
JV_SECONDS = 60.0
INDEX_PAIRS = 200
INDEX_MAX_M = 4
INDEX_MAX_N = 2
INDEX_SECONDS = 120.0
STRUCTURE_TRIALS = 100
POLY_TRIALS = 50
POLY_MAX_DEGREE = 3
NORM_TRIALS = 100
NORM_TOLERANCE = 1e-9
NORM_SECONDS = 30.0

LINES: list[str] = []


def report(number: int, ok: bool, text: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    LINES.append(line)
    print(line)


def load(name):
    sc = parse_scenario(SCENARIOS / name)
    return sc, BassSerreTree(sc.spec)


# -- 1 ---------------------------------------------------------------------


def check_transfer_identity():
    results = []
    for name in GROUP_SCENARIOS:
        sc, tree = load(name)
        spec = sc.spec
        t0 = time.perf_counter()
        pool = spec.enumerate_ball(MAX_WORD_LENGTH)
        bad = 0
        for trial in range(TRANSFER_TRIALS):
            a = random_element(rng_for(sc.run.seed, "transfer", trial), spec, pool, MAX_SUPPORT)
            assert len(a.coeffs) <= MAX_SUPPORT and all(g.length <= MAX_WORD_LENGTH for g in a.coeffs)
            rep = verify_transfer(tree, a)
            bad += not (rep.equal and rep.lhs == rep.rhs and rep.r == 1)
        secs = time.perf_counter() - t0
        results.append((sc.name, bad, secs))
    ok = all(bad == 0 and secs < TRANSFER_SECONDS for _, bad, secs in results)
    detail = "; ".join(f"{n}: {TRANSFER_TRIALS - b}/{TRANSFER_TRIALS} exact in {s:.1f}s" for n, b, s in results)
    report(1, ok, f"tr_G(a) = tr_H(a_Delta - phi* a_Omega phi) [{detail}; limit {TRANSFER_SECONDS:.0f}s each]")
    return ok


# -- 2 ---------------------------------------------------------------------


def check_averaging_idempotents():
    checked, bad = 0, 0
    for name in GROUP_SCENARIOS:
        sc, tree = load(name)
        spec = sc.spec
        pool = spec.enumerate_ball(3)
        for i, (_, forms) in enumerate(_vertex_group_subgroups(spec)):
            rng = rng_for(sc.run.seed, "averaging", i)
            conjugators = [spec.identity()] + [pool[int(j)] for j in rng.choice(len(pool), size=3)]
            for g in conjugators:
                elems = [spec.multiply(spec.multiply(g, k), spec.invert(g)) for k in forms]
                rep = verify_transfer(tree, GGroupRingElement.averaging(spec, elems))
                expected = Fraction(1, len(forms))
                lattice = (expected * spec.H.order).denominator == 1
                checked += 1
                bad += not (rep.lhs == expected and rep.rhs == expected and lattice)
    ok = bad == 0
    report(2, ok, f"averaging idempotents give lhs = rhs = 1/|K| in (1/|H|)Z [{checked - bad}/{checked} subgroups and conjugates]")
    return ok


# -- 3 ---------------------------------------------------------------------


def check_julg_valette():
    parts, ok = [], True
    for name in GROUP_SCENARIOS:
        sc, tree = load(name)
        spec = sc.spec
        t0 = time.perf_counter()
        balls = [check_julg_valette_ball(tree, r) for r in range(JV_MAX_RADIUS + 1)]
        pool = spec.enumerate_ball(MAX_WORD_LENGTH)
        bad = 0
        for trial in range(JV_SAMPLES):
            g = pool[int(rng_for(sc.run.seed, "jv", trial).integers(len(pool)))]
            geo = tree.geodesic(tree.v0, tree.act(spec.invert(g), tree.v0))
            bad += not tree.defect_set(g, JV_MAX_RADIUS) <= set(geo.vertices)
        secs = time.perf_counter() - t0
        ball_ok = all(b["ok"] for b in balls)
        ok = ok and ball_ok and bad == 0 and secs < JV_SECONDS
        parts.append(f"{sc.name}: balls r<=5 {'bijective' if ball_ok else 'BROKEN'}, "
                     f"{JV_SAMPLES - bad}/{JV_SAMPLES} defect sets on geodesic, {secs:.1f}s")
    report(3, ok, f"Julg-Valette map [{'; '.join(parts)}; limit {JV_SECONDS:.0f}s]")
    return ok


# -- 4 ---------------------------------------------------------------------


def check_trace_equals_index():
    sc = parse_scenario(SCENARIOS / "index_c2_c3_s3.json")
    groups = sc.index_groups
    assert sorted(H.order for H in groups) == [2, 3, 6]
    t0 = time.perf_counter()
    bad_index = bad_decomp = bad_kasparov = bad_doubling = 0
    for trial in range(INDEX_PAIRS):
        rng = rng_for(sc.run.seed, "index", trial)
        H = groups[trial % len(groups)]
        m = int(rng.integers(1, INDEX_MAX_M + 1))
        n = int(rng.integers(1, INDEX_MAX_N + 1))
        P, Q = generate_projection_pair(0, H, m, n, rng=rng)
        rep = h_index(P, Q)
        PQP, QPQ = P @ Q @ P, Q @ P @ Q
        bad_index += not (h_trace(P - Q) == rep.dim_ker - rep.dim_coker)
        bad_decomp += not (h_trace(P - Q) == h_trace(P - PQP) - h_trace(Q - QPQ))
        bad_kasparov += not kasparov_compactness_check(P, Q)
        bad_doubling += h_index(P.pad_truncation(2 * m), Q.pad_truncation(2 * m)).to_json() != rep.to_json()
    secs = time.perf_counter() - t0
    ok = not (bad_index or bad_decomp or bad_kasparov or bad_doubling) and secs < INDEX_SECONDS
    report(4, ok, f"trace = index on {INDEX_PAIRS} pairs over C2, C3, S3 [index mismatches {bad_index}, "
                  f"decomposition {bad_decomp}, kasparov {bad_kasparov}, doubling {bad_doubling}; "
                  f"{secs:.1f}s, limit {INDEX_SECONDS:.0f}s]")
    return ok


# -- 5 ---------------------------------------------------------------------


def check_structure():
    counts = {"cyclicity": 0, "lift": 0, "inner": 0}
    bad = dict(counts)
    for name in GROUP_SCENARIOS:
        sc, tree = load(name)
        spec = sc.spec
        pool = spec.enumerate_ball(2)
        verts = tree.ball(2).vertices

        def cols(rng, k):
            return [verts[int(i)] for i in sorted(rng.choice(len(verts), size=k, replace=False))]

        for trial in range(STRUCTURE_TRIALS):
            rng = rng_for(sc.run.seed, "cyclicity", trial)
            a, b = random_element(rng, spec, pool, 3), random_element(rng, spec, pool, 3)
            counts["cyclicity"] += 1
            bad["cyclicity"] += not trace_cyclicity(lift_to_delta(tree, a, cols(rng, 3)), lift_to_delta(tree, b, cols(rng, 3)))

            rng = rng_for(sc.run.seed, "lift", trial)
            a, b = random_element(rng, spec, pool, 3), random_element(rng, spec, pool, 3)
            c = cols(rng, 2)
            lb = lift_to_delta(tree, b, c)
            la = lift_to_delta(tree, a, lb.rows | set(c))
            src = {tree.act(spec.invert(g), v) for g in a.coeffs for v in c}
            mult = la @ lb == lift_to_delta(tree, a * b, c)
            star = lift_to_delta(tree, a, src).adjoint().restrict_columns(c) == lift_to_delta(tree, a.star(), c)
            counts["lift"] += 1
            bad["lift"] += not (mult and star)

            rng = rng_for(sc.run.seed, "inner", trial)
            vec = {v: random_h_element(rng, spec.H) for v in cols(rng, 3)}
            g = pool[int(rng.integers(len(pool)))]
            counts["inner"] += 1
            bad["inner"] += not inner_product_invariance(tree, vec, g)
    ok = not any(bad.values()) and all(v >= STRUCTURE_TRIALS for v in counts.values())
    detail = ", ".join(f"{k} {counts[k] - bad[k]}/{counts[k]}" for k in counts)
    report(5, ok, f"trace cyclicity, *-homomorphic Delta lift, inner-product invariance [{detail}]")
    return ok


# -- 6 ---------------------------------------------------------------------


def check_polynomial_calculus():
    total, bad = 0, 0
    for name in GROUP_SCENARIOS:
        sc, tree = load(name)
        spec = sc.spec
        pool = spec.enumerate_ball(2)
        for trial in range(POLY_TRIALS):
            rng = rng_for(sc.run.seed, "poly", trial)
            a = random_element(rng, spec, pool, 3)
            deg = int(rng.integers(POLY_MAX_DEGREE + 1))
            coeffs = [random_scalar(rng) for _ in range(deg + 1)]
            rep = polynomial_calculus_defect(tree, a, coeffs, degree_budget=POLY_MAX_DEGREE)
            corrected = GaussianRational.parse(rep.details["operator_route_trace"]) + coeffs[0]
            total += 1
            bad += not (rep.equal and rep.details["routes_agree"] and corrected == rep.lhs == rep.rhs)
    ok = bad == 0
    report(6, ok, f"polynomial calculus defect: certified support and transfer identity with constant-term "
                  f"correction [{total - bad}/{total}, deg <= {POLY_MAX_DEGREE}]")
    return ok


# -- 7 ---------------------------------------------------------------------


def check_norm_inequalities():
    S3 = symmetric_group(3)
    t0 = time.perf_counter()
    bad, worst = 0, float("-inf")
    for trial in range(NORM_TRIALS):
        rng = rng_for(20240611, "norms", trial)
        n, m = int(rng.integers(1, 3)), int(rng.integers(1, 4))
        A, B, C = (random_module_matrix(rng, S3, n, m) for _ in range(3))
        rep = norm_inequalities_check(A, B, C, tol=NORM_TOLERANCE)
        bad += not rep.ok
        worst = max(worst, (rep.triangle_lhs - rep.triangle_rhs) / max(1.0, rep.triangle_rhs),
                    (rep.holder_lhs - rep.holder_rhs) / max(1.0, rep.holder_rhs))
    secs = time.perf_counter() - t0
    ok = bad == 0 and secs < NORM_SECONDS
    report(7, ok, f"norm inequalities over S3 within {NORM_TOLERANCE:g} relative [{NORM_TRIALS - bad}/{NORM_TRIALS}, "
                  f"worst excess {worst:.2e}, {secs:.1f}s, limit {NORM_SECONDS:.0f}s]")
    return ok


CHECKS = [
    check_transfer_identity,
    check_averaging_idempotents,
    check_julg_valette,
    check_trace_equals_index,
    check_structure,
    check_polynomial_calculus,
    check_norm_inequalities,
]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, len(CHECKS) + 1)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [check() for check in CHECKS]
    raise SystemExit(0 if all(results) else 1)
