"""Finite groups as validated Cayley tables.

Elements are the integers ``0..order-1`` and ``0`` is always the identity.
Groups can be built from an explicit table (:func:`check_group_axioms`) or
from permutation generators (:func:`from_permutations`); both end in the same
canonical table form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import (
    IndexOutOfRange,
    InputError,
    NoIdentity,
    NoInverse,
    NotAssociative,
    SubgroupNotInSource,
)

# exhaustive associativity check up to this order; Light's test above it
FULL_ASSOCIATIVITY_LIMIT = 200


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    order: int
    table: tuple[tuple[int, ...], ...]
    inverses: tuple[int, ...]
    labels: Optional[tuple[str, ...]] = None
    # one-line permutations, only when built from generators
    perms: Optional[tuple[tuple[int, ...], ...]] = field(default=None, repr=False)

    identity = 0

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def elements(self) -> range:
        return range(self.order)

    def prod(self, items: Iterable[int]) -> int:
        acc = 0
        for x in items:
            acc = self.table[acc][x]
        return acc

    def conj(self, g: int, x: int) -> int:
        """Return g x g^-1."""
        return self.table[self.table[g][x]][self.inverses[g]]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels else str(a)

    def index_of(self, ref) -> int:
        """Resolve an element reference: an index, or a one-line permutation."""
        if isinstance(ref, bool):
            raise IndexOutOfRange(ref, self.order)
        if isinstance(ref, int):
            if not 0 <= ref < self.order:
                raise IndexOutOfRange(ref, self.order)
            return ref
        if isinstance(ref, (list, tuple)) and self.perms is not None:
            try:
                return self.perms.index(tuple(ref))
            except ValueError:
                raise InputError(f"permutation {list(ref)} is not an element of the group") from None
        if isinstance(ref, str) and self.labels is not None and ref in self.labels:
            return self.labels.index(ref)
        raise IndexOutOfRange(ref, self.order)

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order})"


def _relabel_identity(table: list[list[int]], e: int, labels):
    """Swap element ``e`` with ``0`` so that the identity sits at index 0."""
    n = len(table)
    sigma = list(range(n))
    sigma[0], sigma[e] = e, 0
    new = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            new[sigma[a]][sigma[b]] = sigma[table[a][b]]
    if labels is not None:
        labels = list(labels)
        labels[0], labels[e] = labels[e], labels[0]
    return new, labels, sigma


def _generating_set(table: Sequence[Sequence[int]]) -> list[int]:
    n = len(table)
    gens: list[int] = []
    reached = {0}
    for a in range(n):
        if a in reached:
            continue
        gens.append(a)
        frontier = list(reached)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = table[x][g]
                    if y not in reached:
                        reached.add(y)
                        nxt.append(y)
            frontier = nxt
    return gens


def check_group_axioms(table: Sequence[Sequence[int]], labels=None, perms=None) -> FiniteGroup:
    """Validate a Cayley table and return the group it defines.

    If the identity is not at index 0 it is swapped there (and ``labels`` /
    ``perms`` are permuted along with it).
    """
    n = len(table)
    if n == 0:
        raise InputError("empty table")
    rows = []
    for i, row in enumerate(table):
        row = list(row)
        if len(row) != n:
            raise InputError(f"row {i} has length {len(row)}, expected {n}")
        for x in row:
            if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < n:
                raise IndexOutOfRange(x, n)
        rows.append(row)

    e = next(
        (c for c in range(n) if all(rows[c][a] == a and rows[a][c] == a for a in range(n))),
        None,
    )
    if e is None:
        raise NoIdentity()
    if e != 0:
        rows, labels, sigma = _relabel_identity(rows, e, labels)
        if perms is not None:
            perms = list(perms)
            perms[0], perms[e] = perms[e], perms[0]

    inverses = []
    for a in range(n):
        b = next((b for b in range(n) if rows[a][b] == 0 and rows[b][a] == 0), None)
        if b is None:
            raise NoInverse(a)
        inverses.append(b)

    if n <= FULL_ASSOCIATIVITY_LIMIT:
        middles: Iterable[int] = range(n)
    else:
        # Light's test: enough to check middle elements from a generating set
        middles = _generating_set(rows)
    for b in middles:
        for a in range(n):
            ab = rows[a][b]
            for c in range(n):
                if rows[ab][c] != rows[a][rows[b][c]]:
                    raise NotAssociative(a, b, c)

    return FiniteGroup(
        order=n,
        table=tuple(tuple(r) for r in rows),
        inverses=tuple(inverses),
        labels=None if labels is None else tuple(labels),
        perms=None if perms is None else tuple(tuple(p) for p in perms),
    )


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Permutation product p*q acting on the left: (p*q)(i) = p(q(i))."""
    return tuple(p[i] for i in q)


def from_permutations(generators: Sequence[Sequence[int]], degree: Optional[int] = None) -> FiniteGroup:
    """Close a set of one-line permutations under composition.

    Elements are numbered in breadth-first order from the identity,
    multiplying by generators on the right in the order given.
    """
    gens = [tuple(g) for g in generators]
    if degree is None:
        degree = max((len(g) for g in gens), default=1)
    for g in gens:
        if len(g) != degree or sorted(g) != list(range(degree)):
            raise InputError(f"not a permutation of {degree} points: {list(g)}")
    ident = tuple(range(degree))
    elements = [ident]
    index = {ident: 0}
    i = 0
    while i < len(elements):
        x = elements[i]
        for g in gens:
            y = compose(x, g)
            if y not in index:
                index[y] = len(elements)
                elements.append(y)
        i += 1
    table = [[index[compose(x, y)] for y in elements] for x in elements]
    labels = ["".join(map(str, p)) if degree <= 10 else ",".join(map(str, p)) for p in elements]
    return check_group_axioms(table, labels=labels, perms=elements)


def cyclic_group(n: int) -> FiniteGroup:
    return check_group_axioms([[(a + b) % n for b in range(n)] for a in range(n)])


def symmetric_group(n: int) -> FiniteGroup:
    if n < 2:
        return from_permutations([], degree=max(n, 1))
    gens = [tuple([1, 0] + list(range(2, n)))]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    return from_permutations(gens)


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    members: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, a: int) -> bool:
        return a in self._member_set

    @property
    def _member_set(self) -> frozenset:
        s = self.__dict__.get("_ms")
        if s is None:
            s = frozenset(self.members)
            object.__setattr__(self, "_ms", s)
        return s

    def as_group(self) -> tuple[FiniteGroup, "GroupHom"]:
        """Return the subgroup as an abstract group plus its inclusion map."""
        pos = {a: i for i, a in enumerate(self.members)}
        g = self.parent
        table = [[pos[g.mul(a, b)] for b in self.members] for a in self.members]
        labels = [g.label(a) for a in self.members] if g.labels else None
        abstract = check_group_axioms(table, labels=labels)
        return abstract, GroupHom(abstract, g, tuple(self.members))


def subgroup_generated(group: FiniteGroup, generators: Iterable[int]) -> Subgroup:
    gens = list(generators)
    for x in gens:
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < group.order:
            raise IndexOutOfRange(x, group.order)
    reached = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = group.mul(x, g)
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        frontier = nxt
    return Subgroup(group, tuple(sorted(reached)))


def whole_group(group: FiniteGroup) -> Subgroup:
    return Subgroup(group, tuple(group.elements()))


def all_subgroups(group: FiniteGroup) -> list[Subgroup]:
    """Every subgroup, found by closing over pairs of generators.

    Good enough for the small (2-generated subgroup) groups used here; the
    result is sorted by (order, members).
    """
    seen = {}
    for a, b in itertools.combinations_with_replacement(group.elements(), 2):
        s = subgroup_generated(group, {a, b})
        seen.setdefault(s.members, s)
    # add joins so subgroups needing more generators are not missed
    changed = True
    while changed:
        changed = False
        current = list(seen.values())
        for s, t in itertools.combinations(current, 2):
            j = subgroup_generated(group, set(s.members) | set(t.members))
            if j.members not in seen:
                seen[j.members] = j
                changed = True
    return sorted(seen.values(), key=lambda s: (s.order, s.members))


@dataclass(frozen=True, eq=False)
class Transversal:
    subgroup: Subgroup
    side: str  # "left" (cosets aU) or "right" (cosets Ua)
    reps: tuple[int, ...]
    # element -> index into reps of its coset
    coset_of: tuple[int, ...] = field(repr=False)

    def rep_of(self, a: int) -> int:
        return self.reps[self.coset_of[a]]


def build_transversal(subgroup: Subgroup, side: str = "right") -> Transversal:
    """Minimal-index representative of each coset, in increasing order."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    g = subgroup.parent
    coset_of = [-1] * g.order
    reps: list[int] = []
    for a in g.elements():
        if coset_of[a] != -1:
            continue
        k = len(reps)
        reps.append(a)
        for u in subgroup.members:
            coset_of[g.mul(u, a) if side == "right" else g.mul(a, u)] = k
    return Transversal(subgroup, side, tuple(reps), tuple(coset_of))


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    images: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return self.images[a]


def check_hom(source: FiniteGroup, target: FiniteGroup, images: Sequence[int]) -> GroupHom:
    images = tuple(images)
    if len(images) != source.order:
        raise InputError(f"homomorphism needs {source.order} images, got {len(images)}")
    for x in images:
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < target.order:
            raise IndexOutOfRange(x, target.order)
    if images[0] != 0:
        raise InputError("homomorphism must send identity to identity")
    for a in source.elements():
        for b in source.elements():
            if images[source.mul(a, b)] != target.mul(images[a], images[b]):
                raise InputError(f"not a homomorphism: f({a}*{b}) != f({a})*f({b})")
    return GroupHom(source, target, images)


def identity_hom(group: FiniteGroup) -> GroupHom:
    return GroupHom(group, group, tuple(group.elements()))


class Injectivity(NamedTuple):
    injective: bool
    witness: Optional[tuple[int, int]] = None


def is_injective_on(hom: GroupHom, sub: Subgroup) -> Injectivity:
    """Check that ``hom`` separates the members of ``sub``.

    On failure the witness is a pair ``(a, b)``, a < b, with equal images;
    ``a^-1 b`` is then a non-trivial kernel element.
    """
    if sub.parent is not hom.source:
        raise SubgroupNotInSource("subgroup does not live in the homomorphism's source")
    first: dict[int, int] = {}
    for a in sub.members:
        img = hom.images[a]
        if img in first:
            return Injectivity(False, (first[img], a))
        first[img] = a
    return Injectivity(True)
