"""The Bass-Serre tree of a one-edge graph of groups, built lazily from cosets.

Amalgam ``A *_U B``: vertices are cosets ``xA`` and ``xB``, edges are cosets
``xU`` joining ``xA`` to ``xB``.

HNN extension: vertices are cosets ``xH``, edges are cosets ``xU`` joining
``xH`` (origin) to ``x t^-1 H`` (terminus).

Every coset is labelled by the normal form of its smallest member under
``NormalForm.key``, so two vertices (edges) are equal iff their labels are.
Nothing global is materialized; all lookups are memoized per tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

from .errors import CertificationError, RadiusTooSmall, SpecMismatch
from .graph_of_groups import AMALGAM, HLETTER, SIDE_A, SIDE_B, TLETTER, GraphOfGroups, NormalForm


class TreeVertex(NamedTuple):
    kind: str  # "A" / "B" for amalgams, "H" for hnn
    rep: NormalForm


class TreeEdge(NamedTuple):
    rep: NormalForm


class _Star:
    """The extra point that the basepoint is sent to."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "STAR"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()

JVImage = Union[TreeEdge, _Star]


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple[TreeVertex, ...]
    edges: tuple[TreeEdge, ...]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Ball:
    center: TreeVertex
    radius: int
    distance: dict  # TreeVertex -> distance from center
    edges: dict  # TreeEdge -> (endpoint, endpoint), both inside the ball

    @property
    def vertices(self) -> list[TreeVertex]:
        return sorted(self.distance, key=lambda v: (self.distance[v], vertex_key(v)))


def vertex_key(v: TreeVertex) -> tuple:
    return (v.kind, v.rep.key())


def edge_key(e) -> tuple:
    return (0,) if e is STAR else (1, e.rep.key())


class BassSerreTree:
    def __init__(self, spec: GraphOfGroups, basepoint: Optional[NormalForm] = None):
        self.spec = spec
        self.is_amalgam = spec.kind == AMALGAM
        self._vcache: dict = {}
        self._ecache: dict = {}
        self._pcache: dict = {}
        self._dcache: dict = {}
        self._balls: dict = {}
        if self.is_amalgam:
            self._edge_letters = [(SIDE_A, spec.embeds[SIDE_A](u)) for u in spec.U.elements()]
            self._vertex_letters = {
                "A": [(SIDE_A, a) for a in spec.A.elements()],
                "B": [(SIDE_B, b) for b in spec.B.elements()],
            }
            self._strip_letters = {
                s: [(s, spec.embeds[s](u)) for u in spec.U.elements()] for s in (SIDE_A, SIDE_B)
            }
        else:
            self._edge_letters = [(HLETTER, u) for u in spec.U.members]
            self._vertex_letters = {"H": [(HLETTER, h) for h in spec.H.elements()]}
            self._strip_letters = {
                1: [(HLETTER, u) for u in spec.U.members],
                -1: [(HLETTER, u) for u in spec.phi_U.members],
            }
        self.origin = self.vertex("A" if self.is_amalgam else "H", spec.identity())
        self.base = basepoint if basepoint is not None and not basepoint.is_identity() else None
        self._base_inv = spec.invert(self.base) if self.base is not None else None
        self.v0 = self.origin if self.base is None else self.act(self.base, self.origin)

    # -- canonical labels -------------------------------------------------

    def _min_form(self, x: NormalForm, letters) -> NormalForm:
        mul = self.spec.mul_letter
        return min((mul(x, l) for l in letters), key=NormalForm.key)

    def vertex(self, kind: str, x: NormalForm) -> TreeVertex:
        """The vertex ``x K`` where ``K`` is the vertex group named by ``kind``."""
        ck = (kind, x)
        v = self._vcache.get(ck)
        if v is not None:
            return v
        if self.is_amalgam:
            s = SIDE_A if kind == "A" else SIDE_B
            if kind not in ("A", "B"):
                raise SpecMismatch(f"vertex kind {kind!r} invalid for an amalgam")
            if not x.letters:
                rep = self.spec.identity()
            else:
                y = NormalForm(x.kind, x.head, x.letters[:-1]) if x.letters[-1][0] == s else x
                rep = self._min_form(y, self._strip_letters[s])
        else:
            if kind != "H":
                raise SpecMismatch(f"vertex kind {kind!r} invalid for an hnn extension")
            if not x.letters:
                rep = self.spec.identity()
            else:
                e = x.letters[-1][0]
                y = NormalForm(x.kind, x.head, x.letters[:-1] + ((e, 0),))
                rep = self._min_form(y, self._strip_letters[e])
        v = TreeVertex(kind, rep)
        self._vcache[ck] = v
        return v

    def edge(self, x: NormalForm) -> TreeEdge:
        """The edge ``x U``."""
        e = self._ecache.get(x)
        if e is None:
            e = TreeEdge(self._min_form(x, self._edge_letters))
            self._ecache[x] = e
        return e

    def endpoints(self, e: TreeEdge) -> tuple[TreeVertex, TreeVertex]:
        if self.is_amalgam:
            return self.vertex("A", e.rep), self.vertex("B", e.rep)
        return self.vertex("H", e.rep), self.vertex("H", self.spec.mul_letter(e.rep, (TLETTER, -1)))

    # -- action -----------------------------------------------------------

    def act(self, g: NormalForm, v: TreeVertex) -> TreeVertex:
        if g.kind != self.spec.kind:
            raise SpecMismatch("group element from a different spec")
        if g.is_identity():
            return v
        return self.vertex(v.kind, self.spec.multiply(g, v.rep))

    def act_edge(self, g: NormalForm, e):
        """Act on an edge; the extra point ``STAR`` is fixed by everything."""
        if e is STAR or g.is_identity():
            return e
        return self.edge(self.spec.multiply(g, e.rep))

    # -- tree structure relative to the identity vertex -------------------

    def parent(self, v: TreeVertex):
        """``(next vertex towards the identity vertex, edge used)``, or None there."""
        if v in self._pcache:
            return self._pcache[v]
        y = v.rep
        spec = self.spec
        if self.is_amalgam:
            if not y.letters:
                res = None if v.kind == "A" else (self.vertex("A", y), self.edge(y))
            else:
                other = "AB"[y.letters[-1][0]]
                res = (self.vertex(other, y), self.edge(y))
        else:
            if not y.letters:
                res = None
            else:
                shorter = NormalForm(y.kind, y.head, y.letters[:-1])
                e = y.letters[-1][0]
                edge_rep = shorter if e == -1 else spec.mul_letter(shorter, (TLETTER, 1))
                res = (self.vertex("H", shorter), self.edge(edge_rep))
        self._pcache[v] = res
        return res

    def _root_path(self, v: TreeVertex):
        verts, edges = [v], []
        p = self.parent(v)
        while p is not None:
            verts.append(p[0])
            edges.append(p[1])
            p = self.parent(p[0])
        return verts, edges

    def depth(self, v: TreeVertex) -> int:
        d = self._dcache.get(v)
        if d is None:
            p = self.parent(v)
            d = 0 if p is None else self.depth(p[0]) + 1
            self._dcache[v] = d
        return d

    def neighbors(self, v: TreeVertex) -> list[tuple[TreeEdge, TreeVertex]]:
        """Incident edges with their far endpoints, in a deterministic order."""
        spec = self.spec
        out: dict = {}
        if self.is_amalgam:
            other = "B" if v.kind == "A" else "A"
            for l in self._vertex_letters[v.kind]:
                z = spec.mul_letter(v.rep, l)
                e = self.edge(z)
                if e not in out:
                    out[e] = self.vertex(other, z)
        else:
            for l in self._vertex_letters["H"]:
                z = spec.mul_letter(v.rep, l)
                e = self.edge(z)
                if e not in out:
                    out[e] = self.vertex("H", spec.mul_letter(z, (TLETTER, -1)))
                z = spec.mul_letter(z, (TLETTER, 1))
                e = self.edge(z)
                if e not in out:
                    out[e] = self.vertex("H", z)
        return sorted(out.items(), key=lambda item: edge_key(item[0]))

    # -- geodesics and the Julg-Valette map -------------------------------

    def geodesic(self, a: TreeVertex, b: TreeVertex) -> GeodesicPath:
        va, ea = self._root_path(a)
        vb, eb = self._root_path(b)
        # strip the common tail (the shared path to the identity vertex)
        i, j = len(va) - 1, len(vb) - 1
        while i > 0 and j > 0 and va[i - 1] == vb[j - 1]:
            i -= 1
            j -= 1
        verts = va[: i + 1] + vb[:j][::-1]
        edges = ea[:i] + eb[:j][::-1]
        return GeodesicPath(tuple(verts), tuple(edges))

    def distance(self, a: TreeVertex, b: TreeVertex) -> int:
        return len(self.geodesic(a, b))

    def julg_valette(self, v: TreeVertex) -> JVImage:
        """Last edge of the geodesic from ``v0`` to ``v``; ``STAR`` at ``v0``."""
        if self.base is None:
            p = self.parent(v)
            return STAR if p is None else p[1]
        if v == self.v0:
            return STAR
        return self.act_edge(self.base, self.parent(self.act(self._base_inv, v))[1])

    def julg_valette_inverse(self, e: JVImage) -> TreeVertex:
        """The endpoint of ``e`` farther from ``v0`` (``v0`` itself for ``STAR``)."""
        if e is STAR:
            return self.v0
        if self.base is not None:
            return self.act(self.base, self._far_endpoint(self.act_edge(self._base_inv, e)))
        return self._far_endpoint(e)

    def _far_endpoint(self, e: TreeEdge) -> TreeVertex:
        p, q = self.endpoints(e)
        return p if self.depth(p) > self.depth(q) else q

    def defect_set(self, g: NormalForm, radius: Optional[int] = None) -> frozenset:
        """Vertices ``v`` with ``jv(g v) != g jv(v)``.

        With ``radius`` the whole ball around ``v0`` is scanned; without it only
        the geodesic from ``v0`` to ``g^-1 v0`` is. Either way the result is
        checked to lie on that geodesic.
        """
        target = self.act(self.spec.invert(g), self.v0)
        geo = self.geodesic(self.v0, target)
        if radius is None:
            candidates = geo.vertices
        else:
            if radius < len(geo):
                raise RadiusTooSmall(len(geo), radius)
            candidates = self.ball(radius).distance
        found = frozenset(
            v
            for v in candidates
            if self.julg_valette(self.act(g, v)) != self.act_edge(g, self.julg_valette(v))
        )
        if not found <= set(geo.vertices):
            raise CertificationError(f"defect vertices off the geodesic: {sorted(found - set(geo.vertices), key=vertex_key)}")
        return found

    def ball(self, radius: int) -> Ball:
        """BFS ball around ``v0``; cached per radius, so treat the result as read-only."""
        if radius in self._balls:
            return self._balls[radius]
        dist = {self.v0: 0}
        edges: dict = {}
        queue = deque([self.v0])
        while queue:
            v = queue.popleft()
            for e, w in self.neighbors(v):
                if w not in dist:
                    if dist[v] == radius:
                        continue
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if e not in edges:
                    edges[e] = (v, w)
        ball = self._balls[radius] = Ball(self.v0, radius, dist, edges)
        return ball

    def vertex_label(self, v: TreeVertex) -> str:
        return f"{v.kind}[{self.spec.format(v.rep)}]"

    def edge_label(self, e) -> str:
        return "*" if e is STAR else f"U[{self.spec.format(e.rep)}]"


def export_ball_text(tree: BassSerreTree, radius: int) -> str:
    """Plain adjacency listing: one line per vertex, then one per edge."""
    b = tree.ball(radius)
    lines = [f"# ball of radius {radius} around {tree.vertex_label(b.center)}"]
    for v in b.vertices:
        lines.append(f"vertex {tree.vertex_label(v)} depth={b.distance[v]}")
    for e in sorted(b.edges, key=edge_key):
        p, q = b.edges[e]
        lines.append(f"edge {tree.edge_label(e)}: {tree.vertex_label(p)} -- {tree.vertex_label(q)}")
    return "\n".join(lines) + "\n"


def export_ball_dot(tree: BassSerreTree, radius: int) -> str:
    b = tree.ball(radius)
    ids = {v: i for i, v in enumerate(b.vertices)}
    out = ["graph ball {"]
    for v, i in ids.items():
        shape = "doublecircle" if v == b.center else "ellipse"
        out.append(f'  v{i} [label="{tree.vertex_label(v)}", shape={shape}];')
    for e in sorted(b.edges, key=edge_key):
        p, q = b.edges[e]
        out.append(f'  v{ids[p]} -- v{ids[q]} [label="{tree.edge_label(e)}"];')
    out.append("}")
    return "\n".join(out) + "\n"
