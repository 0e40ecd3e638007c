"""Two-colored graphs with bitmask adjacency rows.

Vertices are dense ints 0..n-1, each colored "red" or "blue".  Adjacency is
stored as one Python int per vertex (bit u of ``adjacency[v]`` set iff u~v),
which keeps neighborhood algebra (intersections, complements, candidate
filtering) cheap without external dependencies.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import GraphFormatError, PreconditionError, SearchBudgetExceeded

RED = "red"
BLUE = "blue"
COLORS = (RED, BLUE)

_SHORT = {RED: "r", BLUE: "b"}
_LONG = {"r": RED, "b": BLUE}


def other_color(color: str) -> str:
    return BLUE if color == RED else RED


class _UnboundedType:
    """Distinguished 'no finite bound' value, larger than every int."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unbounded"

    def __eq__(self, other) -> bool:
        return isinstance(other, _UnboundedType)

    def __hash__(self) -> int:
        return hash("__unbounded__")

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return isinstance(other, _UnboundedType)

    def __gt__(self, other) -> bool:
        return not isinstance(other, _UnboundedType)

    def __ge__(self, other) -> bool:
        return True


UNBOUNDED = _UnboundedType()

# A clique bound: either a nonnegative int or UNBOUNDED.
CliqueBound = int | _UnboundedType


def bound_to_json(b: CliqueBound):
    return "inf" if b == UNBOUNDED else int(b)


def bound_from_json(obj) -> CliqueBound:
    if obj in ("inf", "Unbounded", "unbounded", None):
        return UNBOUNDED
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise GraphFormatError(f"bad bound value: {obj!r}")
    if obj < 0:
        raise GraphFormatError(f"bound must be nonnegative: {obj!r}")
    return obj


def bit_indices(mask: int) -> Iterator[int]:
    """Yield set bit positions of mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


# ============================================================
# core graph type
# ============================================================


@dataclass(frozen=True)
class ColoredGraph:
    colors: tuple[str, ...]
    adjacency: tuple[int, ...]

    def __post_init__(self):
        n = len(self.colors)
        if len(self.adjacency) != n:
            raise GraphFormatError("colors/adjacency length mismatch")
        full = (1 << n) - 1
        for v, row in enumerate(self.adjacency):
            if row & ~full:
                raise GraphFormatError(f"adjacency row {v} has out-of-range bits")
            if row >> v & 1:
                raise GraphFormatError(f"self-loop at vertex {v}")
        for v in range(n):
            for u in bit_indices(self.adjacency[v]):
                if not self.adjacency[u] >> v & 1:
                    raise GraphFormatError(f"asymmetric edge {v}-{u}")
        for c in self.colors:
            if c not in COLORS:
                raise GraphFormatError(f"bad color {c!r}")

    # ---- construction helpers ----

    @classmethod
    def from_edges(cls, colors: Sequence[str], edges: Iterable[tuple[int, int]]) -> "ColoredGraph":
        n = len(colors)
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise GraphFormatError(f"bad edge ({u},{v}) for n={n}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(tuple(colors), tuple(rows))

    @classmethod
    def empty(cls) -> "ColoredGraph":
        return cls((), ())

    def with_vertex(self, color: str, adj_mask: int) -> "ColoredGraph":
        """Return a copy with one appended vertex adjacent to adj_mask."""
        n = self.n
        if adj_mask & ~((1 << n) - 1):
            raise PreconditionError("adj_mask has bits beyond existing vertices")
        new_bit = 1 << n
        rows = [row | new_bit if adj_mask >> v & 1 else row for v, row in enumerate(self.adjacency)]
        rows.append(adj_mask)
        return ColoredGraph(self.colors + (color,), tuple(rows))

    # ---- basic accessors ----

    @property
    def n(self) -> int:
        return len(self.colors)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def red_mask(self) -> int:
        return mask_of(v for v in range(self.n) if self.colors[v] == RED)

    @cached_property
    def blue_mask(self) -> int:
        return self.full_mask & ~self.red_mask

    def color_mask(self, color: str) -> int:
        return self.red_mask if color == RED else self.blue_mask

    def adj(self, v: int) -> int:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u] >> v & 1)

    def same_adj(self, v: int) -> int:
        return self.adjacency[v] & self.color_mask(self.colors[v])

    def cross_adj(self, v: int) -> int:
        return self.adjacency[v] & self.color_mask(other_color(self.colors[v]))

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bit_indices(self.adjacency[u]) if u < v]

    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.adjacency) // 2

    def vertices_of(self, color: str) -> list[int]:
        return [v for v in range(self.n) if self.colors[v] == color]


# ============================================================
# text / JSON formats
# ============================================================


def to_text(g: ColoredGraph) -> str:
    lines = [f"n {g.n}"]
    if g.n:
        lines.append("colors " + "".join(_SHORT[c] for c in g.colors))
    lines += [f"e {u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ColoredGraph:
    n = None
    colors: tuple[str, ...] | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
            elif parts[0] == "colors" and len(parts) == 2:
                colors = tuple(_LONG[ch] for ch in parts[1])
            elif parts[0] == "e" and len(parts) == 3:
                edges.append((int(parts[1]), int(parts[2])))
            else:
                raise KeyError
        except (KeyError, ValueError):
            raise GraphFormatError(f"line {lineno}: cannot parse {raw!r}") from None
    if n is None:
        raise GraphFormatError("missing 'n' line")
    if n == 0 and colors is None:
        colors = ()
    if colors is None or len(colors) != n:
        raise GraphFormatError("missing or wrong-length 'colors' line")
    return ColoredGraph.from_edges(colors, edges)


def to_json_obj(g: ColoredGraph) -> dict:
    return {
        "vertices": [{"id": v, "color": g.colors[v]} for v in range(g.n)],
        "edges": [[u, v] for u, v in g.edges()],
    }


def from_json_obj(obj: dict) -> ColoredGraph:
    try:
        verts = obj["vertices"]
        ids = [v["id"] for v in verts]
        if ids != list(range(len(verts))):
            raise GraphFormatError("vertex ids must be dense 0..n-1 in order")
        colors = tuple(v["color"] for v in verts)
        edges = [(int(e[0]), int(e[1])) for e in obj["edges"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise GraphFormatError(f"bad graph JSON: {exc}") from None
    return ColoredGraph.from_edges(colors, edges)


def dumps(g: ColoredGraph) -> str:
    return json.dumps(to_json_obj(g), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> ColoredGraph:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_json_obj(json.loads(text))
    return from_text(text)


def load_graph_file(path) -> ColoredGraph:
    from pathlib import Path

    return loads(Path(path).read_text())


# ============================================================
# subgraphs, relabelings, composition
# ============================================================


def induced_subgraph(g: ColoredGraph, vertices: Sequence[int]) -> ColoredGraph:
    """Induced subgraph on the given vertices, renumbered densely in order."""
    vs = list(vertices)
    if len(set(vs)) != len(vs):
        raise PreconditionError("duplicate vertices")
    pos = {v: i for i, v in enumerate(vs)}
    rows = []
    for v in vs:
        row = 0
        for u in bit_indices(g.adjacency[v]):
            if u in pos:
                row |= 1 << pos[u]
        rows.append(row)
    return ColoredGraph(tuple(g.colors[v] for v in vs), tuple(rows))


def relabel(g: ColoredGraph, perm: Sequence[int]) -> ColoredGraph:
    """Relabel: vertex v of g becomes perm[v] of the result."""
    n = g.n
    if sorted(perm) != list(range(n)):
        raise PreconditionError("perm is not a permutation")
    colors = [RED] * n
    rows = [0] * n
    for v in range(n):
        colors[perm[v]] = g.colors[v]
        row = 0
        for u in bit_indices(g.adjacency[v]):
            row |= 1 << perm[u]
        rows[perm[v]] = row
    return ColoredGraph(tuple(colors), tuple(rows))


def swap_colors(g: ColoredGraph) -> ColoredGraph:
    return ColoredGraph(tuple(other_color(c) for c in g.colors), g.adjacency)


def cross_complement(g: ColoredGraph) -> ColoredGraph:
    """Flip exactly the adjacencies between differently colored vertices."""
    rows = []
    for v in range(g.n):
        other = g.color_mask(other_color(g.colors[v]))
        rows.append((g.adjacency[v] & ~other) | (~g.adjacency[v] & other & ~(1 << v)))
    return ColoredGraph(g.colors, tuple(rows))


def class_complement(g: ColoredGraph, color: str) -> ColoredGraph:
    """Flip exactly the adjacencies inside the given color class."""
    cmask = g.color_mask(color)
    rows = []
    for v in range(g.n):
        if g.colors[v] == color:
            same = cmask & ~(1 << v)
            rows.append((g.adjacency[v] & ~same) | (~g.adjacency[v] & same))
        else:
            rows.append(g.adjacency[v])
    return ColoredGraph(g.colors, tuple(rows))


def disjoint_union(g: ColoredGraph, h: ColoredGraph) -> ColoredGraph:
    shift = g.n
    rows = list(g.adjacency) + [row << shift for row in h.adjacency]
    return ColoredGraph(g.colors + h.colors, tuple(rows))


def join(g: ColoredGraph, h: ColoredGraph) -> ColoredGraph:
    """Disjoint union plus all edges between the two parts."""
    u = disjoint_union(g, h)
    gm = (1 << g.n) - 1
    hm = u.full_mask & ~gm
    rows = [row | (hm if v < g.n else gm) for v, row in enumerate(u.adjacency)]
    return ColoredGraph(u.colors, tuple(rows))


# ============================================================
# color class profiles
# ============================================================


@dataclass(frozen=True)
class ColorClassProfile:
    """Observed shape of both color classes plus the cross structure."""

    red_cliques: tuple[tuple[int, ...], ...]
    blue_cliques: tuple[tuple[int, ...], ...]
    red_p3_free: bool
    blue_p3_free: bool
    omega_red: int
    omega_blue: int
    alpha_red: int
    alpha_blue: int
    cross_all: bool
    cross_none: bool

    def cliques(self, color: str) -> tuple[tuple[int, ...], ...]:
        return self.red_cliques if color == RED else self.blue_cliques

    def p3_free(self, color: str) -> bool:
        return self.red_p3_free if color == RED else self.blue_p3_free

    def omega(self, color: str) -> int:
        return self.omega_red if color == RED else self.omega_blue

    def alpha(self, color: str) -> int:
        return self.alpha_red if color == RED else self.alpha_blue

    @property
    def homogeneously_connected(self) -> bool:
        return self.cross_all or self.cross_none


def _class_components(g: ColoredGraph, color: str) -> list[int]:
    """Connected components (as masks) of the subgraph induced on one class."""
    cmask = g.color_mask(color)
    comps = []
    seen = 0
    for v in range(g.n):
        bit = 1 << v
        if not cmask >> v & 1 or seen & bit:
            continue
        comp = bit
        frontier = bit
        while frontier:
            nxt = 0
            for u in bit_indices(frontier):
                nxt |= g.adjacency[u] & cmask & ~comp
            comp |= nxt
            frontier = nxt
        seen |= comp
        comps.append(comp)
    return comps


def class_profile(g: ColoredGraph) -> ColorClassProfile:
    out = {}
    for color in COLORS:
        comps = _class_components(g, color)
        cliques = []
        p3_free = True
        for comp in comps:
            members = list(bit_indices(comp))
            is_clique = all(
                g.adjacency[v] & comp == comp & ~(1 << v) for v in members
            )
            if not is_clique:
                p3_free = False
            cliques.append(tuple(members))
        # the clique partition is only meaningful for a disjoint union of cliques
        out[color] = (tuple(cliques) if p3_free else (), p3_free)
    cross_pairs = 0
    cross_edges = 0
    for v in range(g.n):
        om = g.color_mask(other_color(g.colors[v]))
        cross_pairs += om.bit_count()
        cross_edges += (g.adjacency[v] & om).bit_count()
    red_cliques, red_p3 = out[RED]
    blue_cliques, blue_p3 = out[BLUE]
    return ColorClassProfile(
        red_cliques=red_cliques,
        blue_cliques=blue_cliques,
        red_p3_free=red_p3,
        blue_p3_free=blue_p3,
        omega_red=max((len(c) for c in red_cliques), default=0),
        omega_blue=max((len(c) for c in blue_cliques), default=0),
        alpha_red=len(red_cliques),
        alpha_blue=len(blue_cliques),
        cross_all=cross_edges == cross_pairs,
        cross_none=cross_edges == 0,
    )


# ============================================================
# blow-ups
# ============================================================


def blow_up(g: ColoredGraph, color: str, i: int) -> ColoredGraph:
    """Replace every vertex of the (independent) color class by an i-clique of twins."""
    if i < 1:
        raise PreconditionError("blow-up factor must be >= 1")
    cmask = g.color_mask(color)
    for v in bit_indices(cmask):
        if g.adjacency[v] & cmask:
            raise PreconditionError(f"color class {color} is not independent (edge at {v})")
    # new ids: vertex v expands to a block of i (if colored `color`) else stays single
    starts = []
    nxt = 0
    for v in range(g.n):
        starts.append(nxt)
        nxt += i if g.colors[v] == color else 1
    total = nxt

    def block(v: int) -> int:
        width = i if g.colors[v] == color else 1
        return ((1 << width) - 1) << starts[v]

    colors: list[str] = []
    rows = [0] * total
    for v in range(g.n):
        width = i if g.colors[v] == color else 1
        colors += [g.colors[v]] * width
        nbr_mask = 0
        for u in bit_indices(g.adjacency[v]):
            nbr_mask |= block(u)
        for k in range(width):
            idx = starts[v] + k
            rows[idx] = nbr_mask | (block(v) & ~(1 << idx))
    return ColoredGraph(tuple(colors), tuple(rows))


def detect_blow_up(g: ColoredGraph) -> tuple[ColoredGraph, str, int] | None:
    """Detect a maximal blow-up of one color class.

    Returns (core, color, i) with i >= 2 maximal such that g == blow_up(core, color, i)
    up to the id convention (one representative per clique of twins), or None.
    Red is preferred when both classes qualify.
    """
    prof = class_profile(g)
    if not (prof.red_p3_free and prof.blue_p3_free):
        raise PreconditionError("both color classes must be disjoint unions of cliques")
    for color in COLORS:
        cliques = prof.cliques(color)
        if not cliques:
            continue
        sizes = {len(c) for c in cliques}
        if len(sizes) != 1:
            continue
        i = sizes.pop()
        if i < 2:
            continue
        if any(g.adjacency[c[0]] & ~g.color_mask(color) != g.adjacency[v] & ~g.color_mask(color)
               for c in cliques for v in c[1:]):
            continue
        reps = sorted(
            [c[0] for c in cliques]
            + [v for v in range(g.n) if g.colors[v] != color]
        )
        core = induced_subgraph(g, reps)
        return core, color, i
    return None


# ============================================================
# partial maps
# ============================================================


@dataclass(frozen=True)
class PartialMap:
    """Injective partial vertex map, kept sorted by source."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_dict(cls, d: dict[int, int]) -> "PartialMap":
        return cls(tuple(sorted(d.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    @property
    def domain(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.pairs)

    @property
    def image(self) -> tuple[int, ...]:
        return tuple(sorted(t for _, t in self.pairs))

    def validate(self, g: ColoredGraph, h: ColoredGraph) -> bool:
        """True iff this is a color- and adjacency-preserving injective map g -> h."""
        d = self.as_dict()
        if len(set(d.values())) != len(d):
            return False
        for s, t in d.items():
            if not (0 <= s < g.n and 0 <= t < h.n):
                return False
            if g.colors[s] != h.colors[t]:
                return False
        for s1, t1 in d.items():
            for s2, t2 in d.items():
                if s1 < s2 and g.has_edge(s1, s2) != h.has_edge(t1, t2):
                    return False
        return True

    def extend(self, src: int, dst: int) -> "PartialMap":
        return PartialMap(tuple(sorted(self.pairs + ((src, dst),))))


# ============================================================
# refinement, isomorphism, canonical keys
# ============================================================


def _refine_jointly(graphs: Sequence[ColoredGraph]) -> list[list[int]]:
    """Iterated degree/color refinement with ranks shared across graphs."""
    labels = []
    for g in graphs:
        labels.append([
            (g.colors[v], g.same_adj(v).bit_count(), g.cross_adj(v).bit_count())
            for v in range(g.n)
        ])
    # re-rank to ints
    while True:
        sigs = []
        for gi, g in enumerate(graphs):
            cur = labels[gi]
            gsig = []
            for v in range(g.n):
                same = tuple(sorted(cur[u] for u in bit_indices(g.same_adj(v))))
                cross = tuple(sorted(cur[u] for u in bit_indices(g.cross_adj(v))))
                gsig.append((cur[v], same, cross))
            sigs.append(gsig)
        ranks = {s: i for i, s in enumerate(sorted({s for gsig in sigs for s in gsig}))}
        new = [[ranks[s] for s in gsig] for gsig in sigs]
        if new == labels:
            return new
        labels = new


def _color_bijections(g: ColoredGraph, h: ColoredGraph) -> Iterator[Sequence[int]]:
    """All color-preserving bijections V(g) -> V(h), as target lists."""
    g_reds, g_blues = g.vertices_of(RED), g.vertices_of(BLUE)
    h_reds, h_blues = h.vertices_of(RED), h.vertices_of(BLUE)
    if len(g_reds) != len(h_reds) or len(g_blues) != len(h_blues):
        return
    for pr in itertools.permutations(h_reds):
        for pb in itertools.permutations(h_blues):
            perm = [0] * g.n
            for src, dst in zip(g_reds, pr):
                perm[src] = dst
            for src, dst in zip(g_blues, pb):
                perm[src] = dst
            yield perm


def _iso_search(g: ColoredGraph, h: ColoredGraph, *, find_all: bool,
                budget: int = 2_000_000) -> list[dict[int, int]]:
    if g.n != h.n or sorted(g.colors) != sorted(h.colors):
        return []
    if g.n == 0:
        return [{}]
    lg, lh = _refine_jointly([g, h])
    if sorted(lg) != sorted(lh):
        return []
    cands = {v: [w for w in range(h.n) if lh[w] == lg[v]] for v in range(g.n)}
    # order: rarest label first, then prefer vertices attached to those already placed
    order: list[int] = []
    remaining = set(range(g.n))
    placed_mask = 0
    while remaining:
        v = min(
            remaining,
            key=lambda x: (-(g.adjacency[x] & placed_mask).bit_count(), len(cands[x]), x),
        )
        order.append(v)
        remaining.remove(v)
        placed_mask |= 1 << v
    results: list[dict[int, int]] = []
    assign: dict[int, int] = {}
    used = 0
    nodes = 0

    def backtrack(k: int) -> bool:
        nonlocal used, nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded("isomorphism search budget exceeded")
        if k == len(order):
            results.append(dict(assign))
            return not find_all
        v = order[k]
        for w in cands[v]:
            if used >> w & 1:
                continue
            ok = True
            for u, x in assign.items():
                if (g.adjacency[v] >> u & 1) != (h.adjacency[w] >> x & 1):
                    ok = False
                    break
            if not ok:
                continue
            assign[v] = w
            used |= 1 << w
            if backtrack(k + 1):
                return True
            del assign[v]
            used &= ~(1 << w)
        return False

    backtrack(0)
    return results


def is_isomorphic(g: ColoredGraph, h: ColoredGraph, *, use_oracle: bool = False
                  ) -> PartialMap | None:
    """A color-preserving isomorphism g -> h as a PartialMap, or None.

    With use_oracle=True the answer is found by brute force over all
    color-preserving permutations (exponential; cross-validation only).
    """
    if use_oracle:
        if g.n != h.n or sorted(g.colors) != sorted(h.colors):
            return None
        for perm in _color_bijections(g, h):
            if all(
                g.has_edge(u, v) == h.has_edge(perm[u], perm[v])
                for u in range(g.n) for v in range(u + 1, g.n)
            ):
                return PartialMap.from_dict({v: perm[v] for v in range(g.n)})
        return None
    found = _iso_search(g, h, find_all=False)
    return PartialMap.from_dict(found[0]) if found else None


def automorphisms(g: ColoredGraph) -> list[dict[int, int]]:
    """All color-preserving automorphisms (small graphs only)."""
    return _iso_search(g, g, find_all=True)


def canonical_key(g: ColoredGraph) -> tuple:
    """A canonical invariant: equal keys iff graphs are color-isomorphic.

    Vertices are grouped by refined label; within the group order the
    adjacency bitstring is minimized by backtracking.
    """
    n = g.n
    if n == 0:
        return ((), b"")
    labels = _refine_jointly([g])[0]
    # group vertices by refined label (labels separate colors already)
    groups: list[list[int]] = []
    slot_colors: list[str] = []
    for lab, color in sorted({(labels[v], g.colors[v]) for v in range(n)}):
        members = [v for v in range(n) if labels[v] == lab]
        groups.append(members)
        slot_colors += [color] * len(members)
    best: list[int] | None = None  # best adjacency rows (prefix-minimized)
    order: list[int] = []
    used = set()

    def backtrack(gi: int, pos: int, prefix: list[int]):
        nonlocal best
        if gi == len(groups):
            if best is None or prefix < best:
                best = list(prefix)
            return
        group = groups[gi]
        rem = [v for v in group if v not in used]
        if not rem:
            backtrack(gi + 1, pos, prefix)
            return
        scored = []
        for v in rem:
            row = 0
            for j, u in enumerate(order):
                if g.has_edge(v, u):
                    row |= 1 << j
            scored.append((row, v))
        scored.sort()
        for row, v in scored:
            if best is not None and prefix + [row] > best[: pos + 1]:
                break  # rows are sorted; later ones are worse still
            used.add(v)
            order.append(v)
            backtrack(gi if len(rem) > 1 else gi + 1, pos + 1, prefix + [row])
            order.pop()
            used.remove(v)

    backtrack(0, 0, [])
    assert best is not None
    return (tuple(slot_colors), bytes(str(best), "ascii"))


# ============================================================
# induced-embedding search (pattern containment)
# ============================================================


def find_induced_embeddings(host: ColoredGraph, pattern: ColoredGraph, *,
                            limit: int | None = 1,
                            fixed: dict[int, int] | None = None) -> list[dict[int, int]]:
    """Induced, color-preserving embeddings pattern -> host (up to `limit`).

    `fixed` pins pattern vertices to prescribed host vertices; only embeddings
    extending it are returned.
    """
    k = pattern.n
    fixed = fixed or {}
    if k == 0:
        return [{}]
    if k > host.n:
        return []
    host_color = {RED: host.red_mask, BLUE: host.blue_mask}
    # order pattern vertices: pinned first, then most-constrained-by-placed
    order: list[int] = []
    remaining = set(range(k))
    placed_mask = 0
    while remaining:
        v = max(remaining, key=lambda x: (x in fixed,
                                          (pattern.adjacency[x] & placed_mask).bit_count(),
                                          pattern.degree(x), -x))
        order.append(v)
        remaining.remove(v)
        placed_mask |= 1 << v
    results: list[dict[int, int]] = []
    image: list[int] = []
    used = 0

    def backtrack(idx: int) -> bool:
        nonlocal used
        if idx == k:
            results.append({order[i]: image[i] for i in range(k)})
            return limit is not None and len(results) >= limit
        v = order[idx]
        cand = host_color[pattern.colors[v]] & ~used
        if v in fixed:
            cand &= 1 << fixed[v]
        for j in range(idx):
            u = order[j]
            if pattern.has_edge(v, u):
                cand &= host.adjacency[image[j]]
            else:
                cand &= ~host.adjacency[image[j]]
            if not cand:
                return False
        for w in bit_indices(cand):
            image.append(w)
            used |= 1 << w
            if backtrack(idx + 1):
                return True
            image.pop()
            used &= ~(1 << w)
        return False

    backtrack(0)
    return results
