"""Normal forms for amalgamated products and HNN extensions of finite groups.

Two one-edge graphs of groups are supported:

* the segment, ``G = A *_U B``, with a subduing map ``alpha: G -> H`` given by
  homomorphisms ``A -> H`` and ``B -> H`` that agree on ``U``;
* the loop, ``G = HNN(H, U, phi)`` with ``phi(u) = g u g^-1`` for a fixed
  conjugator ``g`` in ``H``; the relation is ``t u t^-1 = phi(u)`` and the
  subduing map is the identity on ``H`` with ``t -> g``.

Normal forms are right-handed. An amalgam element is ``u t_1 ... t_k`` with
``u`` in ``U`` and each ``t_i`` a non-identity minimal representative of a
right coset ``U t_i`` in ``A`` or ``B``, sides alternating. An HNN element is
``h_0 t^e_1 r_1 ... t^e_k r_k`` where ``r_i`` represents a right coset of
``U`` (if ``e_i = +1``) or of ``phi(U)`` (if ``e_i = -1``), and ``r_i`` is
not the identity whenever ``e_i != e_{i+1}`` (no pinches).
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import BudgetExceeded, InvalidLetter, SpecMismatch, ValidationError
from .groups import (
    FiniteGroup,
    GroupHom,
    Subgroup,
    Transversal,
    build_transversal,
    is_injective_on,
    whole_group,
)

DEFAULT_BALL_BUDGET = 200_000

AMALGAM = "amalgam"
HNN = "hnn"

# amalgam letters are (side, element) with side 0 = A, 1 = B;
# hnn letters are (HLETTER, h) or (TLETTER, +-1)
SIDE_A, SIDE_B = 0, 1
HLETTER, TLETTER = "H", "t"


class NormalForm(NamedTuple):
    kind: str
    head: int
    letters: tuple

    @property
    def length(self) -> int:
        return len(self.letters)

    def key(self) -> tuple:
        return (len(self.letters), self.head, self.letters)

    def is_identity(self) -> bool:
        return self.head == 0 and not self.letters


class GraphOfGroups:
    """Shared word arithmetic; subclasses supply ``mul_letter`` and friends."""

    kind: str
    H: FiniteGroup

    def identity(self) -> NormalForm:
        return NormalForm(self.kind, 0, ())

    def _check(self, x: NormalForm) -> None:
        if x.kind != self.kind:
            raise SpecMismatch(f"{x.kind} form used with {self.kind} spec")

    def normalize(self, word: Iterable) -> NormalForm:
        x = self.identity()
        for letter in word:
            x = self.mul_letter(x, self.check_letter(letter))
        return x

    def multiply(self, x: NormalForm, y: NormalForm) -> NormalForm:
        self._check(x)
        self._check(y)
        for letter in self.word(y):
            x = self.mul_letter(x, letter)
        return x

    def invert(self, x: NormalForm) -> NormalForm:
        self._check(x)
        return self.normalize(self.invert_letter(l) for l in reversed(self.word(x)))

    def power(self, x: NormalForm, k: int) -> NormalForm:
        if k < 0:
            x, k = self.invert(x), -k
        acc = self.identity()
        for _ in range(k):
            acc = self.multiply(acc, x)
        return acc

    def generators(self) -> list:
        """Every single letter, for random words and exhaustive checks."""
        raise NotImplementedError

    def ball_size(self, max_length: int) -> int:
        raise NotImplementedError

    def enumerate_ball(self, max_length: int, budget: int = DEFAULT_BALL_BUDGET) -> list[NormalForm]:
        """All elements whose normal form has at most ``max_length`` letters."""
        if max_length < 0:
            raise ValueError("max_length must be >= 0")
        count = self.ball_size(max_length)
        if count > budget:
            raise BudgetExceeded(count, budget, "ball size")
        forms = list(self._iter_ball(max_length))
        forms.sort(key=NormalForm.key)
        return forms


class AmalgamSpec(GraphOfGroups):
    """``A *_U B`` with subduing homomorphisms into ``H``.

    ``embed_A`` and ``embed_B`` are injective maps from the abstract edge group
    ``U``; ``alpha_A`` and ``alpha_B`` must be injective and agree on ``U``.
    """

    kind = AMALGAM

    def __init__(
        self,
        A: FiniteGroup,
        B: FiniteGroup,
        U: FiniteGroup,
        embed_A: GroupHom,
        embed_B: GroupHom,
        H: FiniteGroup,
        alpha_A: GroupHom,
        alpha_B: GroupHom,
        name: str = "",
    ):
        self.A, self.B, self.U, self.H = A, B, U, H
        self.name = name or "A*_U B"
        self.sides = (A, B)
        self.embeds = (embed_A, embed_B)
        self.alphas = (alpha_A, alpha_B)
        for which, emb in (("A", embed_A), ("B", embed_B)):
            if emb.source is not U or emb.target is not self.sides["AB".index(which)]:
                raise ValidationError(f"embedding of U into {which} has wrong source/target")
            ok = is_injective_on(emb, whole_group(U))
            if not ok.injective:
                raise ValidationError(f"embedding of U into {which} is not injective", ok.witness)
        for which, alpha in (("A", alpha_A), ("B", alpha_B)):
            if alpha.target is not H:
                raise ValidationError(f"alpha on {which} does not land in H")
            ok = is_injective_on(alpha, whole_group(alpha.source))
            if not ok.injective:
                raise ValidationError(f"alpha not injective on vertex group {which}", ok.witness)
        for u in U.elements():
            if alpha_A(embed_A(u)) != alpha_B(embed_B(u)):
                raise ValidationError("alpha_A and alpha_B disagree on U", u)

        self.edge_subgroups = tuple(
            Subgroup(G, tuple(sorted(emb.images))) for G, emb in zip(self.sides, self.embeds)
        )
        self.transversals: tuple[Transversal, Transversal] = tuple(
            build_transversal(S, "right") for S in self.edge_subgroups
        )
        # dec[s][a] = (u, r) with a = embed_s(u) * r, r the minimal coset rep
        self._dec = []
        for G, emb, T in zip(self.sides, self.embeds, self.transversals):
            pre = {img: u for u, img in enumerate(emb.images)}
            table = []
            for a in G.elements():
                r = T.rep_of(a)
                table.append((pre[G.mul(a, G.inv(r))], r))
            self._dec.append(tuple(table))
        self._dec = tuple(self._dec)
        self._nonid_reps = tuple(tuple(r for r in T.reps if r != 0) for T in self.transversals)

    def check_letter(self, letter):
        try:
            side, a = letter
        except (TypeError, ValueError):
            raise InvalidLetter(f"not an amalgam letter: {letter!r}") from None
        if side in ("A", "B"):
            side = "AB".index(side)
        if side not in (SIDE_A, SIDE_B):
            raise InvalidLetter(f"unknown side {letter[0]!r}")
        if isinstance(a, bool) or not isinstance(a, int) or not 0 <= a < self.sides[side].order:
            raise InvalidLetter(f"element {a!r} not in factor {'AB'[side]}")
        return (side, a)

    def invert_letter(self, letter):
        s, a = letter
        return (s, self.sides[s].inv(a))

    def word(self, x: NormalForm) -> list:
        out = [(SIDE_A, self.embeds[SIDE_A](x.head))] if x.head else []
        out.extend(x.letters)
        return out

    def mul_letter(self, x: NormalForm, letter) -> NormalForm:
        s, c = letter
        G = self.sides[s]
        head = x.head
        letters = list(x.letters)
        if letters and letters[-1][0] == s:
            c = G.mul(letters.pop()[1], c)
        elif not letters:
            c = G.mul(self.embeds[s](head), c)
            head = 0
        u, r = self._dec[s][c]
        if u:
            for i in range(len(letters) - 1, -1, -1):
                si, ti = letters[i]
                u, ri = self._dec[si][self.sides[si].mul(ti, self.embeds[si](u))]
                letters[i] = (si, ri)
                if not u:
                    break
            head = self.U.mul(head, u)
        if r:
            letters.append((s, r))
        return NormalForm(AMALGAM, head, tuple(letters))

    def alpha(self, x: NormalForm) -> int:
        self._check(x)
        H = self.H
        acc = self.alphas[SIDE_A](self.embeds[SIDE_A](x.head))
        for s, t in x.letters:
            acc = H.mul(acc, self.alphas[s](t))
        return acc

    def alpha_letter(self, letter) -> int:
        s, a = letter
        return self.alphas[s](a)

    def generators(self) -> list:
        return [(s, a) for s in (SIDE_A, SIDE_B) for a in self.sides[s].elements() if a]

    def ball_size(self, max_length: int) -> int:
        na, nb = (len(r) for r in self._nonid_reps)
        total = 1
        for n in range(1, max_length + 1):
            half, rest = n // 2, n - n // 2
            total += na ** rest * nb ** half + nb ** rest * na ** half
        return total * self.U.order

    def _iter_ball(self, max_length: int):
        seqs = [()]
        level = [()]
        for _ in range(max_length):
            nxt = []
            for seq in level:
                sides = (SIDE_A, SIDE_B) if not seq else (1 - seq[-1][0],)
                for s in sides:
                    for r in self._nonid_reps[s]:
                        nxt.append(seq + ((s, r),))
            seqs.extend(nxt)
            level = nxt
        for u in self.U.elements():
            for seq in seqs:
                yield NormalForm(AMALGAM, u, seq)

    def format(self, x: NormalForm) -> str:
        parts = []
        if x.head:
            parts.append("A:" + self.A.label(self.embeds[SIDE_A](x.head)))
        parts.extend("AB"[s] + ":" + self.sides[s].label(t) for s, t in x.letters)
        return " ".join(parts) or "1"


class HNNSpec(GraphOfGroups):
    """HNN extension of ``H`` along ``phi: U -> gUg^-1``, ``phi(u) = g u g^-1``."""

    kind = HNN

    def __init__(self, H: FiniteGroup, U: Subgroup, conjugator: int, phi=None, name: str = ""):
        if U.parent is not H:
            raise ValidationError("U is not a subgroup of H")
        self.H, self.U, self.conjugator = H, U, conjugator
        self.name = name or "HNN(H, U, phi)"
        expected = {u: H.conj(conjugator, u) for u in U.members}
        if phi is not None:
            phi = dict(phi)
            for u in U.members:
                if phi.get(u) != expected[u]:
                    raise ValidationError(
                        "phi is not conjugation by the conjugator", (u, phi.get(u), expected[u])
                    )
        self.phi = expected
        self.phi_inv = {v: u for u, v in expected.items()}
        self.phi_U = Subgroup(H, tuple(sorted(expected.values())))
        # index 0 <-> e = +1 (cosets of U), index 1 <-> e = -1 (cosets of phi(U))
        self.transversals = (build_transversal(U, "right"), build_transversal(self.phi_U, "right"))
        self._dec = []
        for T in self.transversals:
            self._dec.append(tuple((H.mul(h, H.inv(T.rep_of(h))), T.rep_of(h)) for h in H.elements()))
        self._dec = tuple(self._dec)

    @staticmethod
    def _slot(e: int) -> int:
        return 0 if e == 1 else 1

    def check_letter(self, letter):
        try:
            tag, a = letter
        except (TypeError, ValueError):
            raise InvalidLetter(f"not an hnn letter: {letter!r}") from None
        if tag == TLETTER:
            if a not in (1, -1):
                raise InvalidLetter(f"stable letter exponent must be +-1, got {a!r}")
            return (TLETTER, a)
        if tag == HLETTER:
            if isinstance(a, bool) or not isinstance(a, int) or not 0 <= a < self.H.order:
                raise InvalidLetter(f"element {a!r} not in H")
            return (HLETTER, a)
        raise InvalidLetter(f"unknown letter tag {tag!r}")

    def invert_letter(self, letter):
        tag, a = letter
        return (TLETTER, -a) if tag == TLETTER else (HLETTER, self.H.inv(a))

    def word(self, x: NormalForm) -> list:
        out = [(HLETTER, x.head)] if x.head else []
        for e, r in x.letters:
            out.append((TLETTER, e))
            if r:
                out.append((HLETTER, r))
        return out

    def mul_letter(self, x: NormalForm, letter) -> NormalForm:
        tag, a = letter
        H = self.H
        if tag == TLETTER:
            if x.letters and x.letters[-1] == (-a, 0):
                return NormalForm(HNN, x.head, x.letters[:-1])
            return NormalForm(HNN, x.head, x.letters + ((a, 0),))
        if not x.letters:
            return NormalForm(HNN, H.mul(x.head, a), ())
        letters = list(x.letters)
        e, r = letters[-1]
        w, r = self._dec[self._slot(e)][H.mul(r, a)]
        letters[-1] = (e, r)
        for i in range(len(letters) - 1, -1, -1):
            if not w:
                break
            e = letters[i][0]
            w = self.phi[w] if e == 1 else self.phi_inv[w]
            if i == 0:
                break
            ep, rp = letters[i - 1]
            w, rp = self._dec[self._slot(ep)][H.mul(rp, w)]
            letters[i - 1] = (ep, rp)
        head = H.mul(x.head, w) if w else x.head
        return NormalForm(HNN, head, tuple(letters))

    def alpha(self, x: NormalForm) -> int:
        self._check(x)
        H, g, gi = self.H, self.conjugator, self.H.inv(self.conjugator)
        acc = x.head
        for e, r in x.letters:
            acc = H.mul(H.mul(acc, g if e == 1 else gi), r)
        return acc

    def alpha_letter(self, letter) -> int:
        tag, a = letter
        if tag == TLETTER:
            return self.conjugator if a == 1 else self.H.inv(self.conjugator)
        return a

    def generators(self) -> list:
        return [(HLETTER, h) for h in self.H.elements() if h] + [(TLETTER, 1), (TLETTER, -1)]

    def _continuations(self, prev):
        """(e, r) letters allowed after ``prev`` (None at the start)."""
        out = []
        for e in (1, -1):
            for r in self.transversals[self._slot(e)].reps:
                out.append((e, r))
        if prev is None:
            return out
        pe, pr = prev
        # the previous r may need to be non-trivial; it is fixed already, so
        # forbid only a sign flip after a trivial r
        return [(e, r) for e, r in out if not (pr == 0 and e != pe)]

    def ball_size(self, max_length: int) -> int:
        # count sequences by last letter
        counts: dict = {None: 1}
        total = 1
        for _ in range(max_length):
            nxt: dict = {}
            for prev, c in counts.items():
                for let in self._continuations(prev):
                    nxt[let] = nxt.get(let, 0) + c
            counts = nxt
            total += sum(counts.values())
        return total * self.H.order

    def _iter_ball(self, max_length: int):
        seqs = [()]
        level = [()]
        for _ in range(max_length):
            nxt = []
            for seq in level:
                for let in self._continuations(seq[-1] if seq else None):
                    nxt.append(seq + (let,))
            seqs.extend(nxt)
            level = nxt
        for h in self.H.elements():
            for seq in seqs:
                yield NormalForm(HNN, h, seq)

    def format(self, x: NormalForm) -> str:
        parts = [self.H.label(x.head)] if x.head else []
        for e, r in x.letters:
            parts.append("t" if e == 1 else "t^-1")
            if r:
                parts.append(self.H.label(r))
        return " ".join(parts) or "1"


def is_normal_form(spec: GraphOfGroups, x: NormalForm) -> bool:
    """Structural check of the normal-form invariants (not via normalize)."""
    if x.kind != spec.kind:
        return False
    if spec.kind == AMALGAM:
        if not 0 <= x.head < spec.U.order:
            return False
        prev = None
        for s, t in x.letters:
            if s not in (SIDE_A, SIDE_B) or s == prev:
                return False
            T = spec.transversals[s]
            if t == 0 or not 0 <= t < spec.sides[s].order or T.rep_of(t) != t:
                return False
            prev = s
        return True
    if not 0 <= x.head < spec.H.order:
        return False
    for i, (e, r) in enumerate(x.letters):
        if e not in (1, -1) or spec.transversals[spec._slot(e)].rep_of(r) != r:
            return False
        if i + 1 < len(x.letters) and x.letters[i + 1][0] != e and r == 0:
            return False
    return True


def letters_from_word(spec: GraphOfGroups, word: Sequence) -> list:
    return [spec.check_letter(l) for l in word]
