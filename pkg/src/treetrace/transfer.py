"""Orbit operators over C[H] and the trace-transfer identity.

``Delta = V x H`` and ``Omega = (E + {*}) x H`` carry commuting actions
``g (x, u) h = (g x, alpha(g) u h)``; on ``{*} x H`` the group acts trivially.
With the H-bases ``T = V x {1}`` and ``S = E x {1} + {(*, 1)}`` an operator
commuting with the right H-action is a matrix whose ``(row, col)`` entry is an
element of C[H] acting by left multiplication on the H-coordinate. Only
finitely many columns are ever stored; every operator records which columns
it covers.

The Julg-Valette bijection ``jv: V -> E + {*}`` gives ``phi(v, u) = (jv(v), u)``.
For ``a`` in C[G] the defect ``a_Delta - phi^* a_Omega phi`` vanishes outside
the columns ``{v0}`` and the defect sets of the group elements in ``supp(a)``,
and its H-trace equals ``tr_G(a)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .algebra import GGroupRingElement, GroupAlgebraElement, evaluate_polynomial, tr_G
from .errors import BudgetExceeded, CertificationError, IncompatibleSupports
from .groups import FiniteGroup
from .scalars import GaussianRational
from .tree import STAR, BassSerreTree, TreeVertex, edge_key, vertex_key

DELTA = "Delta"
OMEGA = "Omega"
DEFAULT_POLY_DEGREE_BUDGET = 3


def _index_key(k):
    if isinstance(k, TreeVertex):
        return (0, vertex_key(k))
    if isinstance(k, tuple) and len(k) == 2 and isinstance(k[0], int):  # (copy, index)
        return (1, k[0], _index_key(k[1]))
    return (2, edge_key(k))


class OrbitOperator:
    """Finitely supported H-equivariant operator on ``Delta`` or ``Omega``."""

    __slots__ = ("side", "group", "entries", "columns")

    def __init__(self, side: str, group: FiniteGroup, entries: Mapping, columns: Iterable):
        self.side = side
        self.group = group
        self.entries = {k: v for k, v in dict(entries).items() if v}
        self.columns = frozenset(columns)
        stray = {c for _, c in self.entries} - self.columns
        if stray:
            raise IncompatibleSupports(f"entries in undeclared columns: {stray}")

    @classmethod
    def zero(cls, side, group, columns=()):
        return cls(side, group, {}, columns)

    @classmethod
    def identity(cls, side, group, columns):
        one = GroupAlgebraElement.one(group)
        return cls(side, group, {(c, c): one for c in columns}, columns)

    @property
    def rows(self) -> frozenset:
        return frozenset(r for r, _ in self.entries)

    def column(self, c) -> dict:
        return {r: x for (r, cc), x in self.entries.items() if cc == c}

    def column_support(self) -> frozenset:
        return frozenset(c for _, c in self.entries)

    def __getitem__(self, rc) -> GroupAlgebraElement:
        x = self.entries.get(rc)
        return x if x is not None else GroupAlgebraElement.zero(self.group)

    def _same_side(self, other):
        if self.side != other.side or self.group is not other.group:
            raise IncompatibleSupports(f"{self.side} operator combined with {other.side} operator")

    def __eq__(self, other):
        if not isinstance(other, OrbitOperator):
            return NotImplemented
        return self.side == other.side and self.entries == other.entries

    def __add__(self, other: "OrbitOperator") -> "OrbitOperator":
        self._same_side(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return OrbitOperator(self.side, self.group, out, self.columns | other.columns)

    def __neg__(self):
        return OrbitOperator(self.side, self.group, {k: -v for k, v in self.entries.items()}, self.columns)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "OrbitOperator":
        return OrbitOperator(self.side, self.group, {k: v.scale(c) for k, v in self.entries.items()}, self.columns)

    def compose(self, other: "OrbitOperator", strict: bool = True) -> "OrbitOperator":
        """``self @ other``; with ``strict`` every row of ``other`` must be a column of ``self``."""
        self._same_side(other)
        if strict:
            missing = other.rows - self.columns
            if missing:
                raise IncompatibleSupports(f"{len(missing)} rows of the right factor are not covered")
        by_col: dict = {}
        for (r, c), x in self.entries.items():
            by_col.setdefault(c, []).append((r, x))
        out: dict = {}
        for (k, c), y in other.entries.items():
            for r, x in by_col.get(k, ()):
                p = x * y
                out[(r, c)] = out[(r, c)] + p if (r, c) in out else p
        return OrbitOperator(self.side, self.group, out, other.columns)

    __matmul__ = compose

    def adjoint(self, columns: Optional[Iterable] = None) -> "OrbitOperator":
        """Conjugate transpose with the C[H] involution on entries."""
        entries = {(c, r): x.star() for (r, c), x in self.entries.items()}
        cols = self.rows if columns is None else frozenset(columns)
        return OrbitOperator(self.side, self.group, entries, cols | self.rows)

    def restrict_columns(self, columns: Iterable) -> "OrbitOperator":
        cols = frozenset(columns)
        return OrbitOperator(self.side, self.group, {k: v for k, v in self.entries.items() if k[1] in cols}, cols)

    def pad(self, index_set: Iterable) -> "OrbitOperator":
        """Same entries, declared on the larger column set."""
        return OrbitOperator(self.side, self.group, self.entries, self.columns | frozenset(index_set))

    def rebase(self, shifts: Mapping) -> "OrbitOperator":
        """Rewrite in the basis ``t' = t * shifts[t]`` (entries become h_r^-1 a h_c)."""
        H = self.group
        out = {}
        for (r, c), x in self.entries.items():
            hr, hc = shifts.get(r, 0), shifts.get(c, 0)
            left = GroupAlgebraElement.basis(H, H.inv(hr))
            right = GroupAlgebraElement.basis(H, hc)
            out[(r, c)] = left * x * right
        return OrbitOperator(self.side, H, out, self.columns)

    @staticmethod
    def direct_sum(ops: list["OrbitOperator"]) -> "OrbitOperator":
        """Block sum; basis indices become ``(block, index)``."""
        first = ops[0]
        entries, cols = {}, set()
        for i, op in enumerate(ops):
            op._same_side(first)
            for (r, c), x in op.entries.items():
                entries[((i, r), (i, c))] = x
            cols.update((i, c) for c in op.columns)
        return OrbitOperator(first.side, first.group, entries, cols)

    def sorted_entries(self):
        return sorted(self.entries.items(), key=lambda kv: (_index_key(kv[0][1]), _index_key(kv[0][0])))

    def __repr__(self):
        return f"OrbitOperator({self.side}, {len(self.entries)} entries, {len(self.columns)} columns)"


def tr_H_orbit(op: OrbitOperator) -> GaussianRational:
    """sum over the basis of <t, A t>: identity coefficients of diagonal entries."""
    total = GaussianRational(0)
    for (r, c), x in op.entries.items():
        if r == c:
            total = total + x.trace()
    return total


# -- lifts of C[G] --------------------------------------------------------


def _alpha_terms(tree: BassSerreTree, a: GGroupRingElement):
    spec = tree.spec
    H = spec.H
    for g in a.support:
        yield g, GroupAlgebraElement.basis(H, spec.alpha(g), a.coeffs[g])


def _accumulate(out: dict, key, x: GroupAlgebraElement):
    if key in out:
        s = out[key] + x
        if s:
            out[key] = s
        else:
            del out[key]
    else:
        out[key] = x


def lift_to_delta(tree: BassSerreTree, a: GGroupRingElement, columns: Iterable[TreeVertex]) -> OrbitOperator:
    cols = frozenset(columns)
    out: dict = {}
    terms = list(_alpha_terms(tree, a))
    for v in cols:
        for g, x in terms:
            _accumulate(out, (tree.act(g, v), v), x)
    return OrbitOperator(DELTA, tree.spec.H, out, cols)


def lift_to_omega(tree: BassSerreTree, a: GGroupRingElement, columns: Iterable) -> OrbitOperator:
    """Lift on edge columns; ``STAR`` columns are identically zero."""
    cols = frozenset(columns)
    out: dict = {}
    terms = list(_alpha_terms(tree, a))
    for e in cols:
        if e is STAR:
            continue
        for g, x in terms:
            _accumulate(out, (tree.act_edge(g, e), e), x)
    return OrbitOperator(OMEGA, tree.spec.H, out, cols)


def pull_back(tree: BassSerreTree, op: OrbitOperator) -> OrbitOperator:
    """``phi^* op phi``: relabel Omega rows and columns through jv^-1."""
    if op.side != OMEGA:
        raise IncompatibleSupports("pull_back expects an Omega operator")
    inv = tree.julg_valette_inverse
    entries = {(inv(r), inv(c)): x for (r, c), x in op.entries.items()}
    return OrbitOperator(DELTA, op.group, entries, (inv(c) for c in op.columns))


def push_forward(tree: BassSerreTree, op: OrbitOperator) -> OrbitOperator:
    """``phi op phi^*``."""
    if op.side != DELTA:
        raise IncompatibleSupports("push_forward expects a Delta operator")
    jv = tree.julg_valette
    entries = {(jv(r), jv(c)): x for (r, c), x in op.entries.items()}
    return OrbitOperator(OMEGA, op.group, entries, (jv(c) for c in op.columns))


# -- the defect operator --------------------------------------------------


def defect_support(tree: BassSerreTree, a: GGroupRingElement) -> frozenset:
    """``{v0}`` together with the defect sets of all group elements in ``supp(a)``."""
    cols = {tree.v0}
    for g in a.coeffs:
        cols |= tree.defect_set(g)
    return frozenset(cols)


def defect_columns(tree: BassSerreTree, a: GGroupRingElement, columns: Iterable[TreeVertex]) -> OrbitOperator:
    """``a_Delta - phi^* a_Omega phi`` evaluated on arbitrary given columns."""
    cols = frozenset(columns)
    delta = lift_to_delta(tree, a, cols)
    omega = lift_to_omega(tree, a, {tree.julg_valette(v) for v in cols})
    return delta - pull_back(tree, omega)


def defect_operator(tree: BassSerreTree, a: GGroupRingElement) -> OrbitOperator:
    """The defect on its certified column support; all other columns vanish."""
    return defect_columns(tree, a, defect_support(tree, a))


@dataclass
class TransferReport:
    element: str
    lhs: GaussianRational
    rhs: GaussianRational
    r: int
    equal: bool
    support: int
    ms: float
    details: dict = field(default_factory=dict)

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "element": self.element,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "r": self.r,
            "equal": self.equal,
            "support": self.support,
        }
        if timing:
            out["ms"] = round(self.ms, 3)
        if self.details:
            out["details"] = self.details
        return out


def verify_transfer(tree: BassSerreTree, a: GGroupRingElement, copies: int = 1) -> TransferReport:
    """Compare ``r tr_G(a)`` with ``tr_H`` of the defect.

    The tree construction has one H-orbit in ``{*} x H`` so ``copies=1`` is the
    faithful case; ``copies=r`` runs the same construction on ``r`` disjoint
    copies of ``Delta`` and ``Omega``, giving ``r`` orbits of stars.
    """
    if copies < 1:
        raise ValueError("copies must be >= 1")
    t0 = time.perf_counter()
    d = defect_operator(tree, a)
    if copies > 1:
        d = OrbitOperator.direct_sum([d] * copies)
    lhs = tr_G(a) * copies
    rhs = tr_H_orbit(d)
    ms = (time.perf_counter() - t0) * 1000
    return TransferReport(a.describe(), lhs, rhs, copies, lhs == rhs, len(d.columns), ms)


# -- Hilbert-module structure ---------------------------------------------


def inner_product(x: Mapping, y: Mapping, group: FiniteGroup) -> GroupAlgebraElement:
    """C[H]-valued ``<x, y> = sum_t x_t^* y_t`` for vectors over the basis."""
    total = GroupAlgebraElement.zero(group)
    for t, xt in x.items():
        yt = y.get(t)
        if yt is not None:
            total = total + xt.star() * yt
    return total


def act_on_vector(tree: BassSerreTree, g, x: Mapping) -> dict:
    """``g (sum_t t x_t) = sum_t (g t) alpha(g) x_t``."""
    h = tree.spec.alpha(g)
    return {tree.act(g, v): xv.left_translate(h) for v, xv in x.items()}


def inner_product_invariance(tree: BassSerreTree, x: Mapping, g, y: Optional[Mapping] = None) -> bool:
    y = x if y is None else y
    H = tree.spec.H
    before = inner_product(x, y, H)
    after = inner_product(act_on_vector(tree, g, x), act_on_vector(tree, g, y), H)
    return before == after


def trace_cyclicity(x: OrbitOperator, y: OrbitOperator) -> bool:
    """Exact ``tr_H(xy) == tr_H(yx)`` for the finite matrices on the joint support."""
    x._same_side(y)
    joint = x.columns | y.columns | x.rows | y.rows
    xp, yp = x.pad(joint), y.pad(joint)
    return tr_H_orbit(xp.compose(yp, strict=False)) == tr_H_orbit(yp.compose(xp, strict=False))


# -- polynomial functional calculus ---------------------------------------


def _apply(tree: BassSerreTree, a_terms, vec: dict, side: str) -> dict:
    out: dict = {}
    for k, xk in vec.items():
        if side == OMEGA and k is STAR:
            continue
        for g, x in a_terms:
            target = tree.act(g, k) if side == DELTA else tree.act_edge(g, k)
            _accumulate(out, target, x * xk)
    return out


def _operator_polynomial_column(tree, a_terms, coeffs, start, side) -> dict:
    """Column of ``p(A)`` at basis vector ``start``, with ``A^0 = identity`` (unital)."""
    H = tree.spec.H
    vec = {start: GroupAlgebraElement.one(H)}
    out: dict = {}
    for k, c in enumerate(coeffs):
        if k:
            vec = _apply(tree, a_terms, vec, side)
        if c:
            for key, x in vec.items():
                _accumulate(out, key, x.scale(c))
    return out


def polynomial_calculus_defect(
    tree: BassSerreTree,
    a: GGroupRingElement,
    coeffs,
    degree_budget: int = DEFAULT_POLY_DEGREE_BUDGET,
) -> TransferReport:
    """Transfer identity for ``p(a)`` checked two ways.

    Route 1 lifts the element ``p(a)`` of C[G]. Route 2 applies ``p`` to the
    lifted operators, where ``p(a_Omega)`` is unital and so acts as the
    constant term ``c`` on the star column; hence
    ``p(a)_Delta - phi^* p(a)_Omega phi = [p(a_Delta) - phi^* p(a_Omega) phi] + c E_{v0,v0}``
    and route 2's trace needs ``+ c`` (one star orbit) to match ``tr_G(p(a))``.
    Route 2 is also evaluated on a one-step shell around the support to
    certify it vanishes there.
    """
    coeffs = [GaussianRational.coerce(c) for c in coeffs]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    if len(coeffs) - 1 > degree_budget:
        raise BudgetExceeded(len(coeffs) - 1, degree_budget, "polynomial degree")
    t0 = time.perf_counter()
    pa = evaluate_polynomial(coeffs, a)
    d1 = defect_operator(tree, pa)
    support = d1.columns
    const = coeffs[0] if coeffs else GaussianRational(0)

    shell = set()
    for v in support:
        shell.update(w for _, w in tree.neighbors(v))
    shell -= support
    terms = list(_alpha_terms(tree, a))
    H = tree.spec.H
    inv = tree.julg_valette_inverse
    d2_entries: dict = {}
    for v in support | shell:
        col_delta = _operator_polynomial_column(tree, terms, coeffs, v, DELTA)
        col_omega = _operator_polynomial_column(tree, terms, coeffs, tree.julg_valette(v), OMEGA)
        for r, x in col_delta.items():
            _accumulate(d2_entries, (r, v), x)
        for r, x in col_omega.items():
            _accumulate(d2_entries, (inv(r), v), -x)
    d2 = OrbitOperator(DELTA, H, d2_entries, support | shell)
    leaked = d2.column_support() - support
    if leaked:
        raise CertificationError(f"operator-calculus defect is nonzero off the certified support: {len(leaked)} columns")
    correction = OrbitOperator(DELTA, H, {(tree.v0, tree.v0): GroupAlgebraElement.one(H).scale(const)}, [tree.v0])
    routes_agree = (d2 + correction).restrict_columns(support) == d1

    lhs = tr_G(pa)
    rhs = tr_H_orbit(d1)
    rhs_operator = tr_H_orbit(d2) + const
    ms = (time.perf_counter() - t0) * 1000
    equal = lhs == rhs and lhs == rhs_operator and routes_agree
    details = {
        "polynomial": [str(c) for c in coeffs],
        "constant_correction": str(const),
        "operator_route_trace": str(tr_H_orbit(d2)),
        "routes_agree": routes_agree,
        "shell_columns": len(shell),
    }
    return TransferReport(pa.describe(), lhs, rhs, 1, equal, len(support), ms, details)
