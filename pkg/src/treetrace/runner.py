"""Seeded verification suites and the run report."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .algebra import GGroupRingElement, GroupAlgebraElement
from .errors import BudgetExceeded, TreeTraceError, ValidationError
from .graph_of_groups import AMALGAM, HLETTER, SIDE_A, SIDE_B, NormalForm
from .groups import all_subgroups
from .index import (
    generate_projection_pair,
    h_index,
    kasparov_compactness_check,
    norm_inequalities_check,
    random_module_matrix,
)
from .scalars import GaussianRational
from .scenario import Scenario
from .transfer import (
    act_on_vector,
    inner_product_invariance,
    lift_to_delta,
    polynomial_calculus_defect,
    trace_cyclicity,
    verify_transfer,
)
from .tree import STAR, BassSerreTree, vertex_key

SUITE_IDS = {
    "transfer": 1,
    "averaging": 2,
    "jv": 3,
    "poly": 4,
    "cyclicity": 5,
    "inner": 6,
    "lift": 7,
    "index": 8,
    "norms": 9,
}
SUITES = ("transfer", "jv", "index", "poly", "cyclicity", "norms")
TREE_SUITES = frozenset({"transfer", "jv", "poly", "cyclicity"})
MAX_COUNTEREXAMPLES = 10

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def rng_for(seed: int, stream: str, trial: int) -> np.random.Generator:
    """Independent Philox stream per (seed, suite, trial)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, SUITE_IDS[stream], trial])))


def default_suites(scenario: Scenario) -> list[str]:
    if scenario.spec is None:
        return ["index", "norms"]
    return list(SUITES)


# -- random inputs --------------------------------------------------------


def random_scalar(rng: np.random.Generator) -> GaussianRational:
    re = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
    im = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) if rng.integers(2) else Fraction(0)
    if not re and not im:
        re = Fraction(1)
    return GaussianRational(re, im)


def random_element(rng: np.random.Generator, spec, pool: list[NormalForm], max_support: int) -> GGroupRingElement:
    k = int(rng.integers(1, min(max_support, len(pool)) + 1))
    picks = rng.choice(len(pool), size=k, replace=False)
    return GGroupRingElement(spec, {pool[int(i)]: random_scalar(rng) for i in sorted(picks)})


def random_h_element(rng: np.random.Generator, H) -> GroupAlgebraElement:
    k = int(rng.integers(1, 3))
    return GroupAlgebraElement(H, {int(rng.integers(H.order)): random_scalar(rng) for _ in range(k)})


# -- report ---------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    trials: int = 0
    failures: int = 0
    counterexamples: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    error: Optional[str] = None
    budget_exceeded: bool = False
    ms: float = 0.0
    _digest: "hashlib._Hash" = field(default_factory=hashlib.sha256, repr=False)

    def record(self, ok: bool, payload: dict) -> None:
        """One trial; ``payload`` must be timing-free so the digest is reproducible."""
        self.trials += 1
        self._digest.update(json.dumps(payload, sort_keys=True).encode())
        self._digest.update(b"\n")
        if not ok:
            self.failures += 1
            self.passed = False
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append(payload)

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "passed": self.passed,
            "trials": self.trials,
            "failures": self.failures,
            "counterexamples": self.counterexamples,
            "summary": self.summary,
            "trials_sha256": self._digest.hexdigest(),
        }
        if self.error is not None:
            out["error"] = self.error
            out["budget_exceeded"] = self.budget_exceeded
        if timing:
            out["ms"] = round(self.ms, 3)
        return out


@dataclass
class RunReport:
    scenario: dict
    seed: int
    suites: dict

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites.values())

    @property
    def exit_code(self) -> int:
        if self.passed:
            return EXIT_OK
        if any(s.failures for s in self.suites.values()):
            return EXIT_COUNTEREXAMPLE
        if any(s.budget_exceeded for s in self.suites.values()):
            return EXIT_BUDGET
        return EXIT_COUNTEREXAMPLE

    def to_json(self, timing: bool = True) -> dict:
        from . import __version__

        return {
            "version": __version__,
            "scenario": self.scenario,
            "seed": self.seed,
            "suites": {k: self.suites[k].to_json(timing) for k in sorted(self.suites)},
            "passed": self.passed,
            "exit_code": self.exit_code,
        }

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True) + "\n"

    def to_text(self, timing: bool = True) -> str:
        lines = [f"scenario {self.scenario['name']} ({self.scenario['kind']}), seed {self.seed}"]
        for name in sorted(self.suites):
            s = self.suites[name]
            status = "PASS" if s.passed else "FAIL"
            line = f"  {status} {name}: {s.trials - s.failures}/{s.trials} trials"
            if timing:
                line += f" in {s.ms / 1000:.2f}s"
            if s.error:
                line += f" [error: {s.error}]"
            lines.append(line)
            for cx in s.counterexamples[:3]:
                lines.append(f"    counterexample: {json.dumps(cx, sort_keys=True)}")
        lines.append(f"exit status {self.exit_code}")
        return "\n".join(lines) + "\n"


# -- suites ---------------------------------------------------------------


def _element_pool(scenario: Scenario, max_word_length: int) -> list[NormalForm]:
    return scenario.spec.enumerate_ball(max_word_length, scenario.run.ball_budget)


def _vertex_group_subgroups(spec) -> list[tuple[str, list[NormalForm]]]:
    """Subgroups of the vertex groups at the identity vertices, as lists of G elements."""
    out = []
    if spec.kind == AMALGAM:
        for side, G in ((SIDE_A, spec.A), (SIDE_B, spec.B)):
            for K in all_subgroups(G):
                forms = [spec.normalize([(side, k)]) for k in K.members]
                out.append((f"{'AB'[side]}{list(K.members)}", forms))
    else:
        for K in all_subgroups(spec.H):
            out.append((f"H{list(K.members)}", [spec.normalize([(HLETTER, k)]) for k in K.members]))
    return out


def suite_transfer(scenario: Scenario, tree: BassSerreTree, res: SuiteResult, conjugates: int = 3) -> None:
    run, spec = scenario.run, scenario.spec
    pool = _element_pool(scenario, run.max_word_length)
    for trial in range(run.trials):
        rng = rng_for(run.seed, "transfer", trial)
        a = random_element(rng, spec, pool, run.max_support)
        rep = verify_transfer(tree, a)
        res.record(rep.equal, {"trial": trial, **rep.to_json(timing=False)})

    # averaging idempotents of finite subgroups, also conjugated into other vertex groups
    H = spec.H
    checked = 0
    for label, forms in _vertex_group_subgroups(spec):
        rng = rng_for(run.seed, "averaging", checked)
        checked += 1
        conjs = [None] + [pool[int(i)] for i in rng.choice(len(pool), size=conjugates)]
        for g in conjs:
            elems = forms if g is None else [spec.multiply(spec.multiply(g, k), spec.invert(g)) for k in forms]
            a = GGroupRingElement.averaging(spec, elems)
            rep = verify_transfer(tree, a)
            expected = GaussianRational(Fraction(1, len(forms)))
            in_lattice = H.order % len(forms) == 0
            ok = rep.equal and rep.lhs == expected and rep.rhs == expected and in_lattice
            res.record(ok, {
                "averaging": label,
                "conjugator": None if g is None else spec.format(g),
                "expected": str(expected),
                "in_lattice": in_lattice,
                **rep.to_json(timing=False),
            })
    res.summary = {"random_trials": run.trials, "averaging_checks": res.trials - run.trials}


def check_julg_valette_ball(tree: BassSerreTree, radius: int) -> dict:
    """Exhaustive bijectivity of jv between ball vertices and ball edges plus ``*``."""
    ball = tree.ball(radius)
    star_ok = tree.julg_valette(tree.v0) is STAR
    images = {}
    for v in ball.distance:
        if v != tree.v0:
            images.setdefault(tree.julg_valette(v), []).append(v)
    injective = all(len(vs) == 1 for vs in images.values())
    onto = set(images) == set(ball.edges)
    inverse_ok = all(tree.julg_valette_inverse(e) == vs[0] for e, vs in images.items())
    return {
        "radius": radius,
        "vertices": len(ball.distance),
        "edges": len(ball.edges),
        "star": star_ok,
        "injective": injective,
        "onto_ball_edges": onto,
        "inverse": inverse_ok,
        "ok": star_ok and injective and onto and inverse_ok,
    }


def suite_jv(scenario: Scenario, tree: BassSerreTree, res: SuiteResult) -> None:
    run, spec = scenario.run, scenario.spec
    for r in range(run.radius + 1):
        info = check_julg_valette_ball(tree, r)
        res.record(info["ok"], info)
    pool = _element_pool(scenario, min(run.max_word_length, run.radius))
    ball_vertices = set(tree.ball(run.radius).distance)
    sizes = {}
    for trial in range(run.jv_samples):
        rng = rng_for(run.seed, "jv", trial)
        g = pool[int(rng.integers(len(pool)))]
        geo = tree.geodesic(tree.v0, tree.act(spec.invert(g), tree.v0))
        if len(geo) > run.radius:
            res.record(True, {"trial": trial, "g": spec.format(g), "skipped": "geodesic leaves the ball"})
            continue
        # exhaustive scan of the ball, written out independently of defect_set
        scanned = frozenset(
            v for v in ball_vertices if tree.julg_valette(tree.act(g, v)) != tree.act_edge(g, tree.julg_valette(v))
        )
        fast = tree.defect_set(g)
        ok = scanned <= set(geo.vertices) and scanned == fast
        sizes[len(scanned)] = sizes.get(len(scanned), 0) + 1
        res.record(ok, {
            "trial": trial,
            "g": spec.format(g),
            "defect": [tree.vertex_label(v) for v in sorted(scanned, key=vertex_key)],
            "geodesic_length": len(geo),
        })
    res.summary = {"radii": run.radius, "defect_size_histogram": {str(k): sizes[k] for k in sorted(sizes)}}


def suite_poly(scenario: Scenario, tree: BassSerreTree, res: SuiteResult) -> None:
    run, spec = scenario.run, scenario.spec
    pool = _element_pool(scenario, run.poly_max_word_length)
    for trial in range(run.poly_trials):
        rng = rng_for(run.seed, "poly", trial)
        a = random_element(rng, spec, pool, run.poly_max_support)
        deg = int(rng.integers(run.poly_degree + 1))
        coeffs = [random_scalar(rng) if rng.integers(3) else GaussianRational(0) for _ in range(deg)]
        coeffs.append(random_scalar(rng))
        rep = polynomial_calculus_defect(tree, a, coeffs, degree_budget=run.poly_degree)
        res.record(rep.equal, {"trial": trial, "a": a.describe(), **rep.to_json(timing=False)})


def _random_columns(rng, vertices, k):
    idx = rng.choice(len(vertices), size=min(k, len(vertices)), replace=False)
    return [vertices[int(i)] for i in sorted(idx)]


def suite_cyclicity(scenario: Scenario, tree: BassSerreTree, res: SuiteResult) -> None:
    """Trace cyclicity, the *-homomorphism property of the Delta lift, and inner-product invariance."""
    run, spec = scenario.run, scenario.spec
    H = spec.H
    pool = _element_pool(scenario, min(run.max_word_length, 2))
    vertices = tree.ball(min(run.radius, 2)).vertices
    counts = {"cyclicity": 0, "lift": 0, "inner": 0}
    for trial in range(run.cyclicity_trials):
        rng = rng_for(run.seed, "cyclicity", trial)
        a = random_element(rng, spec, pool, 3)
        b = random_element(rng, spec, pool, 3)
        x = lift_to_delta(tree, a, _random_columns(rng, vertices, 3))
        y = lift_to_delta(tree, b, _random_columns(rng, vertices, 3))
        ok = trace_cyclicity(x, y)
        counts["cyclicity"] += 1
        res.record(ok, {"check": "cyclicity", "trial": trial, "a": a.describe(), "b": b.describe()})

        rng = rng_for(run.seed, "lift", trial)
        a = random_element(rng, spec, pool, 3)
        b = random_element(rng, spec, pool, 3)
        cols = _random_columns(rng, vertices, 2)
        lb = lift_to_delta(tree, b, cols)
        la = lift_to_delta(tree, a, lb.rows | set(cols))
        product = la.compose(lb) == lift_to_delta(tree, a * b, cols)
        src = {tree.act(spec.invert(g), v) for g in a.coeffs for v in cols}
        star = lift_to_delta(tree, a, src).adjoint().restrict_columns(cols) == lift_to_delta(tree, a.star(), cols)
        additive = lift_to_delta(tree, a + b, cols) == lift_to_delta(tree, a, cols) + lb
        counts["lift"] += 1
        res.record(product and star and additive, {
            "check": "lift", "trial": trial, "a": a.describe(), "b": b.describe(),
            "multiplicative": product, "star": star, "additive": additive,
        })

    for trial in range(run.cyclicity_trials):
        rng = rng_for(run.seed, "inner", trial)
        vec = {v: random_h_element(rng, H) for v in _random_columns(rng, vertices, 3)}
        other = {v: random_h_element(rng, H) for v in _random_columns(rng, vertices, 3)}
        g = pool[int(rng.integers(len(pool)))]
        ok = inner_product_invariance(tree, vec, g) and inner_product_invariance(tree, vec, g, other)
        # translating twice by g and g^-1 must return the vector
        back = act_on_vector(tree, spec.invert(g), act_on_vector(tree, g, vec)) == vec
        counts["inner"] += 1
        res.record(ok and back, {"check": "inner", "trial": trial, "g": spec.format(g), "support": len(vec)})
    res.summary = counts


def suite_index(scenario: Scenario, tree, res: SuiteResult) -> None:
    run = scenario.run
    groups = scenario.index_groups
    per_group: dict = {}
    for trial in range(run.index_pairs):
        rng = rng_for(run.seed, "index", trial)
        H = groups[trial % len(groups)]
        m = int(rng.integers(1, run.index_max_m + 1))
        n = int(rng.integers(1, run.index_max_n + 1))
        P, Q = generate_projection_pair(0, H, m, n, budget=run.scalar_budget, rng=rng)
        rep = h_index(P, Q)
        kasparov = kasparov_compactness_check(P, Q)
        doubled = h_index(P.pad_truncation(2 * m), Q.pad_truncation(2 * m))
        same = doubled.to_json() == rep.to_json()
        ok = rep.equal and kasparov and same
        key = f"order{H.order}"
        per_group[key] = per_group.get(key, 0) + 1
        res.record(ok, {
            "trial": trial, "H_order": H.order, "m": m, "n": n,
            **rep.to_json(), "kasparov": kasparov, "doubling_identical": same,
        })
    res.summary = {"pairs_per_group": dict(sorted(per_group.items()))}


def suite_norms(scenario: Scenario, tree, res: SuiteResult) -> None:
    run = scenario.run
    groups = scenario.index_groups
    worst = 0.0
    for trial in range(run.norm_trials):
        rng = rng_for(run.seed, "norms", trial)
        H = groups[trial % len(groups)]
        n = int(rng.integers(1, 3))
        m = int(rng.integers(1, 4))
        A, B, C = (random_module_matrix(rng, H, n, m) for _ in range(3))
        rep = norm_inequalities_check(A, B, C)
        for lhs, rhs in ((rep.triangle_lhs, rep.triangle_rhs), (rep.holder_lhs, rep.holder_rhs)):
            worst = max(worst, (lhs - rhs) / max(1.0, rhs))
        # floats are rounded so the report stays byte-stable across BLAS builds
        res.record(rep.ok, {
            "trial": trial, "H_order": H.order, "n": n, "m": m,
            "triangle_ok": rep.triangle_ok, "holder_ok": rep.holder_ok,
            "triangle": [round(rep.triangle_lhs, 6), round(rep.triangle_rhs, 6)],
            "holder": [round(rep.holder_lhs, 6), round(rep.holder_rhs, 6)],
        })
    res.summary = {"tolerance": 1e-9, "worst_relative_excess": round(worst, 6)}


SUITE_FUNCS: dict[str, Callable] = {
    "transfer": suite_transfer,
    "jv": suite_jv,
    "index": suite_index,
    "poly": suite_poly,
    "cyclicity": suite_cyclicity,
    "norms": suite_norms,
}


def run(scenario: Scenario, suites: Optional[Iterable[str]] = None, basepoint: Optional[NormalForm] = None) -> RunReport:
    """Run the selected suites in a fixed order; one suite failing never stops the rest."""
    names = default_suites(scenario) if suites is None else sorted(set(suites))
    unknown = [s for s in names if s not in SUITE_FUNCS]
    if unknown:
        raise ValidationError(f"unknown suites: {', '.join(unknown)}")
    if scenario.spec is None and TREE_SUITES.intersection(names):
        raise ValidationError(f"suites {sorted(TREE_SUITES.intersection(names))} need an amalgam or hnn scenario")
    tree = BassSerreTree(scenario.spec, basepoint) if scenario.spec is not None else None
    results = {}
    for name in sorted(names):
        res = SuiteResult(name)
        t0 = time.perf_counter()
        try:
            SUITE_FUNCS[name](scenario, tree, res)
        except BudgetExceeded as exc:
            res.passed, res.error, res.budget_exceeded = False, str(exc), True
        except TreeTraceError as exc:
            res.passed, res.error = False, f"{type(exc).__name__}: {exc}"
        res.ms = (time.perf_counter() - t0) * 1000
        results[name] = res
    return RunReport(scenario.echo(), scenario.run.seed, results)
