"""Exact rank over Q(i) by fraction-free (Bareiss) elimination."""

from __future__ import annotations

import math
from typing import Sequence

from .scalars import GaussianRational


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix; ``rows`` is consumed.

    Fraction-free elimination with column skipping: every intermediate entry
    is a minor of the input, so the divisions by the previous pivot are exact.
    """
    nrows = len(rows)
    if not nrows:
        return 0
    ncols = len(rows[0])
    rank, prev = 0, 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        prow = rows[rank]
        p = prow[col]
        tail = prow[col + 1 :]
        for r in range(rank + 1, nrows):
            row = rows[r]
            f = row[col]
            if f:
                row[col + 1 :] = [(p * x - f * y) // prev for x, y in zip(row[col + 1 :], tail)]
            elif prev != p:
                row[col + 1 :] = [(p * x) // prev for x in row[col + 1 :]]
            row[col] = 0
        prev = p
        rank += 1
    return rank


def _strip_zero_lines(rows: list[list]) -> list[list]:
    rows = [r for r in rows if any(r)]
    if not rows:
        return rows
    keep = [j for j in range(len(rows[0])) if any(r[j] for r in rows)]
    if len(keep) == len(rows[0]):
        return rows
    return [[r[j] for j in keep] for r in rows]


def _integer_rows(rows: Sequence[Sequence[GaussianRational]]):
    """Clear denominators row by row; returns (real rows, imaginary rows or None)."""
    complex_ = any(x.im for row in rows for x in row)
    re_rows, im_rows = [], []
    for row in rows:
        den = 1
        for x in row:
            den = math.lcm(den, x.re.denominator, x.im.denominator)
        re_rows.append([x.re.numerator * (den // x.re.denominator) for x in row])
        if complex_:
            im_rows.append([x.im.numerator * (den // x.im.denominator) for x in row])
    return re_rows, (im_rows if complex_ else None)


def exact_rank(rows: Sequence[Sequence[GaussianRational]]) -> int:
    """Rank over Q(i) of a matrix of Gaussian rationals.

    A complex matrix ``A + iB`` has rank ``rank_Q [[A, -B], [B, A]] / 2``, so
    the integer routine covers both cases.
    """
    rows = _strip_zero_lines([list(r) for r in rows])
    if not rows:
        return 0
    re_rows, im_rows = _integer_rows(rows)
    if im_rows is None:
        return _bareiss_rank(re_rows)
    real = [a + [-y for y in b] for a, b in zip(re_rows, im_rows)]
    real += [b + a for a, b in zip(re_rows, im_rows)]
    r = _bareiss_rank(real)
    assert r % 2 == 0
    return r // 2


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    return _bareiss_rank(_strip_zero_lines([list(r) for r in rows]))
