"""Named small patterns, induced-subgraph search, minimally-omitted sets.

The fixed catalog entries are the three-vertex shapes built from one
monochromatic edge plus an opposite-color vertex (all/none/one of the edge's
ends adjacent to it), the two four-vertex shapes built from a red and a blue
edge with three resp. one cross edges, and the monochromatic paths.  The
parametric entries are monochromatic cliques and independent sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphFormatError
from .graphs import (
    BLUE,
    COLORS,
    RED,
    ColoredGraph,
    PartialMap,
    canonical_key,
    cross_complement,
    find_induced_embeddings,
    induced_subgraph,
)

# ============================================================
# constructors
# ============================================================


def mono_clique(color: str, n: int) -> ColoredGraph:
    """K(color, n): n mutually adjacent vertices of one color."""
    return ColoredGraph.from_edges(
        (color,) * n, [(u, v) for u in range(n) for v in range(u + 1, n)]
    )


def mono_independent(color: str, n: int) -> ColoredGraph:
    """Kbar(color, n): n pairwise non-adjacent vertices of one color."""
    return ColoredGraph.from_edges((color,) * n, [])


def mono_path3(color: str) -> ColoredGraph:
    """P3 of one color: the minimal witness that a class is not a clique union."""
    return ColoredGraph.from_edges((color,) * 3, [(0, 1), (1, 2)])


def _fixed_patterns() -> dict[str, ColoredGraph]:
    rr_b = (RED, RED, BLUE)
    r_bb = (RED, BLUE, BLUE)
    rr_bb = (RED, RED, BLUE, BLUE)
    return {
        # red edge + blue vertex: adjacent to both / neither / one end
        "Tr": ColoredGraph.from_edges(rr_b, [(0, 1), (0, 2), (1, 2)]),
        "Tr~": ColoredGraph.from_edges(rr_b, [(0, 1)]),
        "Qr": ColoredGraph.from_edges(rr_b, [(0, 1), (0, 2)]),
        # blue edge + red vertex, same three shapes
        "Tb": ColoredGraph.from_edges(r_bb, [(1, 2), (0, 1), (0, 2)]),
        "Tb~": ColoredGraph.from_edges(r_bb, [(1, 2)]),
        "Qb": ColoredGraph.from_edges(r_bb, [(1, 2), (0, 1)]),
        # red edge + blue edge with 3 resp. 1 cross edges
        "D": ColoredGraph.from_edges(rr_bb, [(0, 1), (2, 3), (0, 2), (0, 3), (1, 2)]),
        "D~": ColoredGraph.from_edges(rr_bb, [(0, 1), (2, 3), (1, 3)]),
        "P3_red": mono_path3(RED),
        "P3_blue": mono_path3(BLUE),
    }


_FIXED = _fixed_patterns()

_TILDE = {
    "Tr": "Tr~", "Tr~": "Tr",
    "Tb": "Tb~", "Tb~": "Tb",
    "D": "D~", "D~": "D",
    "Qr": "Qr", "Qb": "Qb",
    "P3_red": "P3_red", "P3_blue": "P3_blue",
}


@dataclass(frozen=True)
class Pattern:
    name: str
    graph: ColoredGraph
    tilde_partner: str
    parametric: bool = False


def pattern_by_name(name: str) -> ColoredGraph:
    """Resolve a pattern name: fixed names, 'K:<color>:<n>' or 'Kbar:<color>:<n>'."""
    if name in _FIXED:
        return _FIXED[name]
    parts = name.split(":")
    if len(parts) == 3 and parts[0] in ("K", "Kbar") and parts[1] in COLORS:
        try:
            n = int(parts[2])
        except ValueError:
            raise GraphFormatError(f"bad pattern name {name!r}") from None
        if n < 1:
            raise GraphFormatError(f"bad pattern size in {name!r}")
        make = mono_clique if parts[0] == "K" else mono_independent
        return make(parts[1], n)
    raise GraphFormatError(f"unknown pattern name {name!r}")


def catalog() -> list[Pattern]:
    """All twelve named families (parametric ones instantiated at n=3, red)."""
    out = [Pattern(name, g, _TILDE[name]) for name, g in _FIXED.items()]
    out.append(Pattern("K:red:3", mono_clique(RED, 3), "K:red:3", parametric=True))
    out.append(Pattern("Kbar:red:3", mono_independent(RED, 3), "Kbar:red:3", parametric=True))
    return out


def match_catalog_name(g: ColoredGraph) -> str | None:
    """Catalog name of g up to isomorphism, if any (K/Kbar for monochromatic shapes)."""
    key = canonical_key(g)
    for name, pat in _FIXED.items():
        if canonical_key(pat) == key:
            return name
    colors = set(g.colors)
    if len(colors) == 1 and g.n >= 1:
        color = colors.pop()
        pairs = g.n * (g.n - 1) // 2
        if g.edge_count() == pairs:
            return f"K:{color}:{g.n}"
        if g.edge_count() == 0:
            return f"Kbar:{color}:{g.n}"
    return None


# ============================================================
# induced containment
# ============================================================


def contains_induced(g: ColoredGraph, h: ColoredGraph) -> PartialMap | None:
    """An induced embedding of h into g as a total PartialMap, or None."""
    found = find_induced_embeddings(g, h, limit=1)
    return PartialMap.from_dict(found[0]) if found else None


# ============================================================
# isomorph-free enumeration (orderly generation by vertex extension)
# ============================================================


def enumerate_colored_graphs(max_n: int, *, colors: tuple[str, ...] = COLORS,
                             keep=None) -> dict[int, list[ColoredGraph]]:
    """Canonical representatives of all colored graphs with 1..max_n vertices.

    `keep` may prune to a hereditary class (pruned graphs are never extended,
    which is complete exactly because the class is closed under induced
    subgraphs).  Output lists are in canonical order.
    """
    reps: dict[int, list[ColoredGraph]] = {}
    level: dict[tuple, ColoredGraph] = {}
    for color in colors:
        g = ColoredGraph((color,), (0,))
        if keep is not None and not keep(g):
            continue
        level[canonical_key(g)] = g
    reps[1] = [g for _, g in sorted(level.items())]
    for m in range(2, max_n + 1):
        level = {}
        for base in reps[m - 1]:
            for color in colors:
                for mask in range(1 << (m - 1)):
                    cand = base.with_vertex(color, mask)
                    if keep is not None and not keep(cand):
                        continue
                    key = canonical_key(cand)
                    if key not in level:
                        level[key] = cand
        reps[m] = [g for _, g in sorted(level.items())]
    return reps


# ============================================================
# minimally omitted sets
# ============================================================


@dataclass(frozen=True)
class OmittedSet:
    """Minimal omitted patterns of a host graph, up to a size bound."""

    bound: int
    members: tuple[ColoredGraph, ...]

    def names(self) -> tuple[str | None, ...]:
        return tuple(match_catalog_name(g) for g in self.members)

    def name_set(self) -> set[str]:
        return {n for n in self.names() if n is not None}

    def canonical_keys(self) -> set[tuple]:
        return {canonical_key(g) for g in self.members}


def minimally_omitted(g: ColoredGraph, k: int = 4, *,
                      colors: tuple[str, ...] = COLORS) -> OmittedSet:
    """All ≤ k-vertex graphs omitted in g whose proper induced subgraphs are realized.

    `colors` restricts the candidate universe (e.g. to one color when the host's
    class has no vertices of the other color by construction).  Results on an
    approximant are only meaningful up to its saturation level.
    """
    if k < 1:
        raise GraphFormatError("bound must be >= 1")
    reps = enumerate_colored_graphs(k, colors=colors)
    realized: dict[tuple, bool] = {}
    members: list[ColoredGraph] = []
    for m in range(1, k + 1):
        for cand in reps[m]:
            key = canonical_key(cand)
            if m > 1:
                sub_omitted = False
                for v in range(m):
                    sub = induced_subgraph(cand, [u for u in range(m) if u != v])
                    if not realized[canonical_key(sub)]:
                        sub_omitted = True
                        break
                if sub_omitted:
                    # omitted by inheritance, hence not minimal
                    realized[key] = False
                    continue
            hit = find_induced_embeddings(g, cand, limit=1)
            realized[key] = bool(hit)
            if not hit:
                members.append(cand)
    return OmittedSet(bound=k, members=tuple(members))


def minimality_witnesses(g: ColoredGraph, member: ColoredGraph) -> dict[int, PartialMap]:
    """For each vertex of an omitted member, an embedding of the remainder into g."""
    out: dict[int, PartialMap] = {}
    for v in range(member.n):
        rest = induced_subgraph(member, [u for u in range(member.n) if u != v])
        emb = contains_induced(g, rest)
        if emb is None:
            raise GraphFormatError(f"member is not minimal: deleting {v} stays omitted")
        out[v] = emb
    return out


# ============================================================
# structural checks on omitted sets
# ============================================================


@dataclass(frozen=True)
class StructureReport:
    passed: bool
    violations: tuple[str, ...]


def _twins(g: ColoredGraph, u: int, v: int) -> bool:
    bu, bv = 1 << u, 1 << v
    return g.adjacency[u] & ~bv == g.adjacency[v] & ~bu


def check_omitted_structure(o: OmittedSet) -> StructureReport:
    """Each color side of every 2-colored member must be a clique of twins of
    size >= 3, a single edge, or independent."""
    violations: list[str] = []
    for idx, h in enumerate(o.members):
        if len(set(h.colors)) < 2:
            continue
        for color in COLORS:
            side = [v for v in range(h.n) if h.colors[v] == color]
            edges = [(u, v) for u in side for v in side if u < v and h.has_edge(u, v)]
            if not edges:
                continue  # independent
            clique = len(edges) == len(side) * (len(side) - 1) // 2
            if clique and len(side) == 2:
                continue  # a single monochromatic edge
            if clique and len(side) >= 3 and all(_twins(h, u, v) for u, v in edges):
                continue  # clique of twins
            name = match_catalog_name(h) or f"member#{idx}"
            violations.append(f"{name}: {color} side is not clique-of-twins/K2/independent")
    return StructureReport(passed=not violations, violations=tuple(violations))


def tilde_consistency(o_g: OmittedSet, o_gt: OmittedSet) -> bool:
    """True iff o_gt is exactly the cross-complemented image of o_g (up to iso)."""
    if o_g.bound != o_gt.bound:
        return False
    image = {canonical_key(cross_complement(h)) for h in o_g.members}
    return image == o_gt.canonical_keys()
