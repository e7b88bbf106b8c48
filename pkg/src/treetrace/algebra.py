"""Group rings with Gaussian-rational coefficients.

``GroupAlgebraElement`` lives in C[H] for a finite group ``H``;
``GGroupRingElement`` is a finitely supported element of C[G] for an
amalgam/HNN group ``G``, keyed by normal forms.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .graph_of_groups import GraphOfGroups, NormalForm
from .groups import FiniteGroup, Subgroup
from .scalars import ZERO, GaussianRational


def _clean(coeffs: dict) -> dict:
    return {k: v for k, v in coeffs.items() if v}


class GroupAlgebraElement:
    """Sparse element of C[H]; no zero coefficients are stored."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: FiniteGroup, coeffs: Mapping[int, object] = ()):
        self.group = group
        self.coeffs = _clean({h: GaussianRational.coerce(c) for h, c in dict(coeffs).items()})

    @classmethod
    def _raw(cls, group, coeffs):
        x = cls.__new__(cls)
        x.group = group
        x.coeffs = coeffs
        return x

    @classmethod
    def zero(cls, group):
        return cls._raw(group, {})

    @classmethod
    def one(cls, group):
        return cls.basis(group, 0)

    @classmethod
    def basis(cls, group, h: int, coeff=1):
        c = GaussianRational.coerce(coeff)
        return cls._raw(group, {h: c} if c else {})

    @classmethod
    def averaging(cls, sub: Subgroup) -> "GroupAlgebraElement":
        """The idempotent (1/|K|) sum_{k in K} k."""
        c = GaussianRational(1) / sub.order
        return cls._raw(sub.parent, {k: c for k in sub.members})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self.group is other.group and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __getitem__(self, h: int) -> GaussianRational:
        return self.coeffs.get(h, ZERO)

    def __add__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        out = dict(self.coeffs)
        for h, c in other.coeffs.items():
            s = out.get(h)
            s = c if s is None else s + c
            if s:
                out[h] = s
            else:
                out.pop(h, None)
        return GroupAlgebraElement._raw(self.group, out)

    def __neg__(self):
        return GroupAlgebraElement._raw(self.group, {h: -c for h, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "GroupAlgebraElement":
        c = GaussianRational.coerce(c)
        if not c:
            return GroupAlgebraElement.zero(self.group)
        return GroupAlgebraElement._raw(self.group, {h: v * c for h, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, GroupAlgebraElement):
            return self.scale(other)
        table = self.group.table
        out: dict = {}
        for a, x in self.coeffs.items():
            row = table[a]
            for b, y in other.coeffs.items():
                k = row[b]
                s = out.get(k)
                out[k] = x * y if s is None else s + x * y
        return GroupAlgebraElement._raw(self.group, _clean(out))

    def __rmul__(self, c):
        return self.scale(c)

    def left_translate(self, h: int) -> "GroupAlgebraElement":
        """h * self, a permutation of coefficients."""
        row = self.group.table[h]
        return GroupAlgebraElement._raw(self.group, {row[a]: c for a, c in self.coeffs.items()})

    def star(self) -> "GroupAlgebraElement":
        """Involution: sum c_h h -> sum conj(c_h) h^-1."""
        inv = self.group.inverses
        return GroupAlgebraElement._raw(self.group, {inv[h]: c.conjugate() for h, c in self.coeffs.items()})

    def trace(self) -> GaussianRational:
        """Coefficient of the identity."""
        return self.coeffs.get(0, ZERO)

    def __repr__(self) -> str:
        items = sorted(self.coeffs.items())
        return "CH(" + ", ".join(f"{self.group.label(h)}: {c}" for h, c in items) + ")"


def tr_H_algebra(x: GroupAlgebraElement) -> GaussianRational:
    return x.trace()


class GGroupRingElement:
    """Finitely supported element of C[G], keyed by canonical normal forms."""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: GraphOfGroups, coeffs: Mapping[NormalForm, object] = ()):
        self.spec = spec
        out: dict = {}
        for g, c in dict(coeffs).items():
            c = GaussianRational.coerce(c)
            if g.kind != spec.kind:
                raise TypeError("normal form from a different kind of spec")
            out[g] = out[g] + c if g in out else c
        self.coeffs = _clean(out)

    @classmethod
    def _raw(cls, spec, coeffs):
        x = cls.__new__(cls)
        x.spec = spec
        x.coeffs = coeffs
        return x

    @classmethod
    def one(cls, spec):
        return cls._raw(spec, {spec.identity(): GaussianRational(1)})

    @classmethod
    def of(cls, spec, g: NormalForm, coeff=1):
        c = GaussianRational.coerce(coeff)
        return cls._raw(spec, {g: c} if c else {})

    @classmethod
    def averaging(cls, spec, elements: Iterable[NormalForm]) -> "GGroupRingElement":
        elements = set(elements)
        c = GaussianRational(1) / len(elements)
        return cls._raw(spec, {g: c for g in elements})

    @property
    def support(self) -> list[NormalForm]:
        return sorted(self.coeffs, key=NormalForm.key)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, GGroupRingElement):
            return NotImplemented
        return self.spec is other.spec and self.coeffs == other.coeffs

    def __add__(self, other):
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            s = out[g] + c if g in out else c
            if s:
                out[g] = s
            else:
                out.pop(g, None)
        return GGroupRingElement._raw(self.spec, out)

    def __neg__(self):
        return GGroupRingElement._raw(self.spec, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = GaussianRational.coerce(c)
        if not c:
            return GGroupRingElement._raw(self.spec, {})
        return GGroupRingElement._raw(self.spec, {g: v * c for g, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, GGroupRingElement):
            return self.scale(other)
        mul = self.spec.multiply
        out: dict = {}
        for a, x in self.coeffs.items():
            for b, y in other.coeffs.items():
                k = mul(a, b)
                out[k] = out[k] + x * y if k in out else x * y
        return GGroupRingElement._raw(self.spec, _clean(out))

    def __rmul__(self, c):
        return self.scale(c)

    def star(self) -> "GGroupRingElement":
        inv = self.spec.invert
        return GGroupRingElement._raw(self.spec, {inv(g): c.conjugate() for g, c in self.coeffs.items()})

    def power(self, k: int) -> "GGroupRingElement":
        acc = GGroupRingElement.one(self.spec)
        for _ in range(k):
            acc = acc * self
        return acc

    def describe(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"({self.coeffs[g]})*[{self.spec.format(g)}]" for g in self.support)

    def __repr__(self):
        return f"CG({self.describe()})"


def tr_G(a: GGroupRingElement) -> GaussianRational:
    return a.coeffs.get(a.spec.identity(), ZERO)


def evaluate_polynomial(coeffs, a: GGroupRingElement) -> GGroupRingElement:
    """sum_k coeffs[k] a^k in C[G] (Horner); coeffs[0] is the constant term."""
    coeffs = [GaussianRational.coerce(c) for c in coeffs]
    acc = GGroupRingElement._raw(a.spec, {})
    one = GGroupRingElement.one(a.spec)
    for c in reversed(coeffs):
        acc = acc * a + one.scale(c)
    return acc
