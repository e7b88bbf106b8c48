"""Trace equals index for pairs of projections over C[H], H finite.

An ``HModuleMatrix`` is an operator on ``E^n`` truncated to ``m`` basis
elements, i.e. an ``(n*m) x (n*m)`` matrix over C[H]; index ``i*m + j`` is
amplification slot ``i``, summand ``j``. Dimensions are von Neumann
dimensions: complex rank of the left-regular image divided by ``|H|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .algebra import GroupAlgebraElement
from .errors import BudgetExceeded, NotAProjection, NotHEquivariant, NumericalFailure
from .groups import FiniteGroup, all_subgroups
from .linalg import exact_rank
from .scalars import ZERO, GaussianRational

DEFAULT_SCALAR_BUDGET = 512  # max n*m*|H|
NORM_TOLERANCE = 1e-9


class HModuleMatrix:
    __slots__ = ("group", "n", "m", "entries")

    def __init__(self, group: FiniteGroup, n: int, m: int, entries):
        self.group = group
        self.n, self.m = n, m
        size = n * m
        entries = [list(row) for row in entries]
        if len(entries) != size or any(len(row) != size for row in entries):
            raise ValueError(f"expected a {size}x{size} matrix")
        self.entries = entries

    @property
    def size(self) -> int:
        return self.n * self.m

    @classmethod
    def zero(cls, group, n, m):
        z = GroupAlgebraElement.zero(group)
        return cls(group, n, m, [[z] * (n * m) for _ in range(n * m)])

    @classmethod
    def identity(cls, group, n, m):
        out = cls.zero(group, n, m)
        one = GroupAlgebraElement.one(group)
        for i in range(n * m):
            out.entries[i][i] = one
        return out

    def _like(self, entries):
        return HModuleMatrix(self.group, self.n, self.m, entries)

    def __eq__(self, other):
        if not isinstance(other, HModuleMatrix):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and self.entries == other.entries

    def __add__(self, other):
        return self._like([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other):
        return self._like([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self._like([[-a for a in r] for r in self.entries])

    def __matmul__(self, other: "HModuleMatrix") -> "HModuleMatrix":
        z = GroupAlgebraElement.zero(self.group)
        cols = list(zip(*other.entries))
        out = []
        for row in self.entries:
            new = []
            for col in cols:
                acc = z
                for a, b in zip(row, col):
                    if a and b:
                        acc = acc + a * b
                new.append(acc)
            out.append(new)
        return self._like(out)

    def adjoint(self) -> "HModuleMatrix":
        return self._like([[self.entries[j][i].star() for j in range(self.size)] for i in range(self.size)])

    def first_difference(self, other) -> Optional[tuple[int, int]]:
        for i, j in itertools.product(range(self.size), repeat=2):
            if self.entries[i][j] != other.entries[i][j]:
                return (i, j)
        return None

    def pad_truncation(self, new_m: int) -> "HModuleMatrix":
        """Embed into ``new_m >= m`` summands per slot, zeros elsewhere."""
        if new_m < self.m:
            raise ValueError("cannot shrink a truncation")
        out = HModuleMatrix.zero(self.group, self.n, new_m)
        for i, j in itertools.product(range(self.size), repeat=2):
            x = self.entries[i][j]
            if x:
                out.entries[(i // self.m) * new_m + i % self.m][(j // self.m) * new_m + j % self.m] = x
        return out

    def is_zero(self) -> bool:
        return not any(x for row in self.entries for x in row)

    def __repr__(self):
        return f"HModuleMatrix(n={self.n}, m={self.m}, |H|={self.group.order})"


def block_matrix(blocks: Sequence[Sequence[HModuleMatrix]]) -> HModuleMatrix:
    """Square block matrix of equally sized blocks (amplification grows)."""
    k = len(blocks)
    b0 = blocks[0][0]
    rows = []
    for brow in blocks:
        for i in range(b0.size):
            rows.append([x for blk in brow for x in blk.entries[i]])
    return HModuleMatrix(b0.group, b0.n * k, b0.m, rows)


@dataclass
class ScalarMatrix:
    """Left-regular image: ``blocks x blocks`` grid of ``|H| x |H|`` blocks."""

    group: FiniteGroup
    row_blocks: int
    col_blocks: int
    rows: list  # list of lists of GaussianRational


def regular_representation(x: GroupAlgebraElement) -> list[list[GaussianRational]]:
    """Matrix of left multiplication by ``x`` in the group basis: ``L[a][b] = x(a b^-1)``."""
    H = x.group
    inv, table = H.inverses, H.table
    return [[x[table[a][inv[b]]] for b in H.elements()] for a in H.elements()]


def to_scalar(M: HModuleMatrix) -> ScalarMatrix:
    H = M.group
    k = H.order
    rows = [[ZERO] * (M.size * k) for _ in range(M.size * k)]
    for I in range(M.size):
        for J in range(M.size):
            x = M.entries[I][J]
            if not x:
                continue
            blk = regular_representation(x)
            for a in range(k):
                rows[I * k + a][J * k : (J + 1) * k] = blk[a]
    return ScalarMatrix(H, M.size, M.size, rows)


def is_H_equivariant(S: ScalarMatrix) -> bool:
    """Commutes with the right-regular action ``e_b -> e_{bh}`` in every block."""
    H = S.group
    k = H.order
    for h in H.elements():
        if not h:
            continue
        col = H.table  # b -> b*h is col[b][h]
        for I in range(S.row_blocks):
            for a in range(k):
                row = S.rows[I * k + a]
                row_h = S.rows[I * k + col[a][h]]
                for J in range(S.col_blocks):
                    base = J * k
                    for b in range(k):
                        if row[base + b] != row_h[base + col[b][h]]:
                            return False
    return True


def vn_dimension(S, kind: str = "image") -> Fraction:
    """von Neumann dimension of the image or kernel of an H-equivariant matrix."""
    if isinstance(S, HModuleMatrix):
        S = to_scalar(S)
    if not is_H_equivariant(S):
        raise NotHEquivariant("matrix does not commute with the right H-action")
    k = S.group.order
    r = exact_rank(S.rows)
    if kind == "image":
        return Fraction(r, k)
    if kind == "kernel":
        return Fraction(S.col_blocks * k - r, k)
    raise ValueError(f"kind must be 'image' or 'kernel', not {kind!r}")


def h_trace(x: HModuleMatrix) -> GaussianRational:
    total = GaussianRational(0)
    for i in range(x.size):
        total = total + x.entries[i][i].trace()
    return total


def check_projection(P: HModuleMatrix, which: str = "P") -> None:
    diff = (P @ P).first_difference(P)
    if diff is not None:
        raise NotAProjection(which, diff, "P^2 != P")
    diff = P.adjoint().first_difference(P)
    if diff is not None:
        raise NotAProjection(which, diff, "P* != P")


def restricted_kernel_dimension(T: HModuleMatrix, P: HModuleMatrix) -> Fraction:
    """``dim_H ker(T restricted to P E)`` by rank-nullity on ``P E``."""
    return vn_dimension(P) - vn_dimension(T @ P)


@dataclass
class IndexReport:
    trace_diff: GaussianRational
    dim_ker: Fraction
    dim_coker: Fraction
    index: Fraction
    equal: bool
    intermediate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "trace_diff": str(self.trace_diff),
            "dim_ker": str(self.dim_ker),
            "dim_coker": str(self.dim_coker),
            "index": str(self.index),
            "equal": self.equal,
            "intermediate": {k: str(v) if not isinstance(v, bool) else v for k, v in self.intermediate.items()},
        }


def h_index(P: HModuleMatrix, Q: HModuleMatrix) -> IndexReport:
    """``tr_H(P - Q)`` against ``dim_H ker(QP: PE -> QE) - dim_H ker(PQ: QE -> PE)``.

    Also checks ``tr(P-Q) = tr(P-PQP) - tr(Q-QPQ)`` and reports the traces of
    ``T0 = 1 - PQP - alpha_P`` on ``PE`` and ``T1 = 1 - QPQ - alpha_Q`` on ``QE``,
    which must agree.
    """
    check_projection(P, "P")
    check_projection(Q, "Q")
    PQ, QP = P @ Q, Q @ P
    PQP, QPQ = PQ @ P, QP @ Q
    trace_diff = h_trace(P - Q)
    dim_ker = restricted_kernel_dimension(QP, P)
    dim_coker = restricted_kernel_dimension(PQ, Q)
    index = dim_ker - dim_coker
    tr_p = h_trace(P - PQP)
    tr_q = h_trace(Q - QPQ)
    single_out = trace_diff == tr_p - tr_q
    t0, t1 = tr_p - dim_ker, tr_q - dim_coker
    equal = trace_diff == index and single_out and t0 == t1
    intermediate = {
        "tr_P_minus_PQP": tr_p,
        "tr_Q_minus_QPQ": tr_q,
        "tr_T0": t0,
        "tr_T1": t1,
        "single_out_kernel": single_out,
    }
    return IndexReport(trace_diff, dim_ker, dim_coker, index, equal, intermediate)


def kasparov_compactness_check(P: HModuleMatrix, Q: HModuleMatrix) -> bool:
    """Finite-rank form of the Kasparov-triple conditions for ``F = [[0, PQ], [QP, 0]]``.

    ``F`` must be self-adjoint with ``F*F = F^2 = FF* = diag(PQP, QPQ)``, and
    ``1 - PQP`` on ``PE`` (that is ``P - PQP``) and ``Q - QPQ`` must have rank
    at most ``rank(P - Q)``.
    """
    check_projection(P, "P")
    check_projection(Q, "Q")
    H = P.group
    Z = HModuleMatrix.zero(H, P.n, P.m)
    PQ, QP = P @ Q, Q @ P
    F = block_matrix([[Z, PQ], [QP, Z]])
    Fs = F.adjoint()
    F2 = F @ F
    diag = block_matrix([[PQ @ P, Z], [Z, QP @ Q]])
    if not (Fs == F and F2 == diag and Fs @ F == diag and F @ Fs == diag):
        return False
    bound = exact_rank(to_scalar(P - Q).rows)
    return (
        exact_rank(to_scalar(P - PQ @ P).rows) <= bound
        and exact_rank(to_scalar(Q - QP @ Q).rows) <= bound
    )


# -- random projection pairs ----------------------------------------------

_UNITS = (GaussianRational(1), GaussianRational(-1), GaussianRational(0, 1), GaussianRational(0, -1))


def _monomial_unitary(rng: np.random.Generator, H: FiniteGroup, n: int, m: int, complex_units: bool):
    size = n * m
    perm = rng.permutation(size)
    out = HModuleMatrix.zero(H, n, m)
    for i in range(size):
        unit = _UNITS[int(rng.integers(4 if complex_units else 2))]
        out.entries[int(perm[i])][i] = GroupAlgebraElement.basis(H, int(rng.integers(H.order)), unit)
    return out


def _block_projection(rng: np.random.Generator, H: FiniteGroup, subgroups, n: int, m: int):
    """Direct sum of 0, 1, averaging idempotents and 2x2 twisted blocks."""
    size = n * m
    D = HModuleMatrix.zero(H, n, m)
    i = 0
    half = GaussianRational(1, 0) / 2
    while i < size:
        kind = int(rng.integers(4 if i + 1 < size else 3))
        if kind == 1:
            D.entries[i][i] = GroupAlgebraElement.one(H)
        elif kind == 2:
            K = subgroups[int(rng.integers(len(subgroups)))]
            D.entries[i][i] = GroupAlgebraElement.averaging(K)
        elif kind == 3:
            # (1/2) [[1, h], [h^-1, 1]]
            h = int(rng.integers(H.order))
            D.entries[i][i] = GroupAlgebraElement.basis(H, 0, half)
            D.entries[i + 1][i + 1] = GroupAlgebraElement.basis(H, 0, half)
            D.entries[i][i + 1] = GroupAlgebraElement.basis(H, h, half)
            D.entries[i + 1][i] = GroupAlgebraElement.basis(H, H.inv(h), half)
            i += 1
        i += 1
    return D


def _conjugate(u: HModuleMatrix, D: HModuleMatrix) -> HModuleMatrix:
    return u @ D @ u.adjoint()


def generate_projection_pair(
    seed: int,
    H: FiniteGroup,
    m: int,
    n: int,
    budget: int = DEFAULT_SCALAR_BUDGET,
    rng: Optional[np.random.Generator] = None,
) -> tuple[HModuleMatrix, HModuleMatrix]:
    """Deterministic pair of distinct exact projections on ``(C[H]^m)^n``.

    Each is a direct sum of elementary projections conjugated by a random
    monomial unitary (signed or Gaussian-unit permutation with group
    elements). A third of the time ``Q`` is a conjugate of ``P`` instead.
    """
    if n * m * H.order > budget:
        raise BudgetExceeded(n * m * H.order, budget, "scalar matrix size")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(seed))
    subgroups = all_subgroups(H)
    complex_units = bool(rng.integers(2))
    for _ in range(100):
        P = _conjugate(_monomial_unitary(rng, H, n, m, complex_units), _block_projection(rng, H, subgroups, n, m))
        if rng.integers(3) == 0:
            Q = _conjugate(_monomial_unitary(rng, H, n, m, complex_units), P)
        else:
            Q = _conjugate(
                _monomial_unitary(rng, H, n, m, complex_units), _block_projection(rng, H, subgroups, n, m)
            )
        if P != Q:
            check_projection(P, "P")
            check_projection(Q, "Q")
            return P, Q
    raise RuntimeError("could not draw two distinct projections")


# -- floating-point norm inequalities -------------------------------------


def to_complex_array(M: HModuleMatrix) -> np.ndarray:
    return np.array([[complex(x) for x in row] for row in to_scalar(M).rows], dtype=complex)


def _abs(X: np.ndarray) -> np.ndarray:
    try:
        w, V = np.linalg.eigh(X.conj().T @ X)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def _op_norm(X: np.ndarray) -> float:
    if not X.size:
        return 0.0
    try:
        return float(np.linalg.norm(X, 2))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


@dataclass
class NormReport:
    triangle_lhs: float
    triangle_rhs: float
    holder_lhs: float
    holder_rhs: float
    tolerance: float
    triangle_ok: bool
    holder_ok: bool

    @property
    def ok(self) -> bool:
        return self.triangle_ok and self.holder_ok

    def to_json(self) -> dict:
        return dict(self.__dict__)


def norm_inequalities_check(A: HModuleMatrix, B: HModuleMatrix, C: HModuleMatrix, tol: float = NORM_TOLERANCE) -> NormReport:
    """``|tr(A+B)| <= tr|A| + tr|B|`` and ``tr|CAB| <= |C| |B| tr|A|`` in floating point.

    ``tr`` is the H-trace of the scalar image, i.e. its ordinary trace over
    ``|H|``; the slack is ``tol * max(1, rhs)``.
    """
    k = A.group.order
    a, b, c = to_complex_array(A), to_complex_array(B), to_complex_array(C)
    tr = lambda X: np.trace(X) / k
    t_lhs = float(abs(tr(a + b)))
    t_rhs = float(tr(_abs(a)).real + tr(_abs(b)).real)
    h_lhs = float(tr(_abs(c @ a @ b)).real)
    h_rhs = _op_norm(c) * _op_norm(b) * float(tr(_abs(a)).real)
    return NormReport(
        t_lhs,
        t_rhs,
        h_lhs,
        h_rhs,
        tol,
        bool(t_lhs <= t_rhs + tol * max(1.0, t_rhs)),
        bool(h_lhs <= h_rhs + tol * max(1.0, h_rhs)),
    )


def random_module_matrix(rng: np.random.Generator, H: FiniteGroup, n: int, m: int, density: float = 0.5, span: int = 3):
    """Random matrix with small Gaussian-rational C[H] entries."""
    M = HModuleMatrix.zero(H, n, m)
    for i in range(M.size):
        for j in range(M.size):
            if rng.random() < density:
                coeffs = {}
                for _ in range(int(rng.integers(1, 3))):
                    h = int(rng.integers(H.order))
                    coeffs[h] = GaussianRational(
                        Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 4))),
                        Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 4))),
                    )
                M.entries[i][j] = GroupAlgebraElement(H, coeffs)
    return M
