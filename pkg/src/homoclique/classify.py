"""Ultrahomogeneity checks, piece scans, and the family classifier.

The exact ultrahomogeneity test works on the twin quotient: vertices that
agree everywhere else are interchangeable, so ordered tuples collapse to
sequences of twin-class ids with multiplicity caps.  A graph is
ultrahomogeneous iff, level by level, any two tuple sequences with the same
internal shape see the same set of outside one-vertex patterns; a mismatch
at any level is a partial isomorphism with no one-step extension, and if no
level mismatches, every partial isomorphism extends vertex by vertex to an
automorphism.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .amalgam import ClassSpec
from .errors import PreconditionError, SearchBudgetExceeded, UnclassifiableAtLevel
from .graphs import (
    BLUE,
    COLORS,
    RED,
    UNBOUNDED,
    ColorClassProfile,
    ColoredGraph,
    automorphisms,
    canonical_key,
    class_complement,
    class_profile,
    detect_blow_up,
    induced_subgraph,
    is_isomorphic,
    mask_of,
    other_color,
)
from .limits import Approximant, _realizers, build_family
from .patterns import OmittedSet, contains_induced, minimally_omitted, pattern_by_name

# ============================================================
# exact finite ultrahomogeneity
# ============================================================

UH_SIZE_BOUND = 12
_UH_NODE_BUDGET = 3_000_000


def _twin_classes(g: ColoredGraph) -> list[tuple[int, ...]]:
    """Partition vertices into classes of mutual twins (same color, same
    neighborhood off the pair).  Swapping two twins is an automorphism, so
    any tuple of vertices is equivalent to any other tuple with the same
    class sequence."""
    classes: list[tuple[int, ...]] = []
    assigned = [False] * g.n
    for v in range(g.n):
        if assigned[v]:
            continue
        members = [v]
        assigned[v] = True
        for u in range(v + 1, g.n):
            if assigned[u] or g.colors[u] != g.colors[v]:
                continue
            bu, bv = 1 << u, 1 << v
            if g.adjacency[u] & ~bv == g.adjacency[v] & ~bu:
                members.append(u)
                assigned[u] = True
        classes.append(tuple(members))
    return classes


def _single_clique_pair(g: ColoredGraph) -> tuple[list[int], list[int]] | None:
    """(reds, blues) when each color class is one clique (both nonempty)."""
    prof = class_profile(g)
    if not (prof.red_p3_free and prof.blue_p3_free):
        return None
    if prof.alpha_red != 1 or prof.alpha_blue != 1:
        return None
    return list(prof.red_cliques[0]), list(prof.blue_cliques[0])


def _is_cross_matching(g: ColoredGraph, reds: list[int], blues: list[int],
                       complemented: bool) -> bool:
    if len(reds) != len(blues):
        return False
    bm = mask_of(blues)
    want = len(blues) - 1 if complemented else 1
    partners = set()
    for r in reds:
        row = g.adjacency[r] & bm
        if row.bit_count() != want:
            return False
        partners.add(row if not complemented else bm & ~row)
    return len(partners) == len(reds)


def is_ultrahomogeneous_finite(g: ColoredGraph) -> bool:
    """Exact check that every partial isomorphism between induced subgraphs
    extends to an automorphism, for graphs on at most 12 vertices.

    A clique pair whose cross edges form a perfect matching (or its
    complement) is accepted directly: such a map pins partner pairs, and any
    injective partner-consistent assignment completes to a permutation that
    swaps whole pairs, which preserves all edges.  Everything else runs the
    twin-quotient level scan described in the module docstring."""
    if g.n > UH_SIZE_BOUND:
        raise PreconditionError(
            f"ultrahomogeneity search is bounded at {UH_SIZE_BOUND} vertices, got {g.n}")
    if g.n <= 1:
        return True
    pair = _single_clique_pair(g)
    if pair is not None:
        reds, blues = pair
        if _is_cross_matching(g, reds, blues, complemented=False):
            return True
        if _is_cross_matching(g, reds, blues, complemented=True):
            return True
    return _uh_level_scan(g)


def _uh_level_scan(g: ColoredGraph, budget: int = _UH_NODE_BUDGET) -> bool:
    classes = _twin_classes(g)
    p = len(classes)
    caps = [len(c) for c in classes]
    color = [g.colors[c[0]] for c in classes]
    # quotient adjacency: classes are uniform inside (clique or independent)
    # and across (all or no edges), because twins share neighborhoods
    rep = [c[0] for c in classes]
    adj = [[0] * p for _ in range(p)]
    for i in range(p):
        for j in range(p):
            if i == j:
                adj[i][j] = 1 if caps[i] > 1 and g.has_edge(classes[i][0], classes[i][1]) else 0
            else:
                adj[i][j] = 1 if g.has_edge(rep[i], rep[j]) else 0
    # frontier: sequences of class ids; level k maps internal shape -> the
    # set of outside patterns (pairs (class color, adjacency bits to the
    # sequence)) that remain available given class capacities
    frontier: list[tuple[int, ...]] = [()]
    nodes = 0
    for _level in range(sum(caps)):
        shapes: dict[tuple, frozenset] = {}
        nxt: list[tuple[int, ...]] = []
        for seq in frontier:
            used = [0] * p
            for c in seq:
                used[c] += 1
            avail = [c for c in range(p) if used[c] < caps[c]]
            if not avail:
                continue
            sig = frozenset(
                (color[c], sum(adj[c][ci] << i for i, ci in enumerate(seq)))
                for c in avail
            )
            shape = (
                tuple(color[c] for c in seq),
                tuple(adj[seq[i]][seq[j]] for i in range(len(seq)) for j in range(i)),
            )
            prev = shapes.get(shape)
            if prev is None:
                shapes[shape] = sig
            elif prev != sig:
                return False  # two isomorphic tuples with different one-step options
            for c in avail:
                nodes += 1
                if nodes > budget:
                    raise SearchBudgetExceeded(
                        "ultrahomogeneity scan exceeded its node budget")
                nxt.append(seq + (c,))
        frontier = nxt
        if not frontier:
            break
    return True


# ============================================================
# k-homogeneity of approximants
# ============================================================


def k_homogeneity(g: ColoredGraph, k: int) -> bool:
    """One-step back-and-forth over all partial isomorphisms with domains of
    at most k vertices: every adjacency pattern realized over one subset must
    have a realizer over every isomorphic subset (in both map directions).

    Subsets are bucketed by canonical form; patterns are transported through
    one isomorphism per subset and closed under the automorphisms of the
    bucket representative, which covers every choice of map.  Intended for
    test-scale graphs (the subset enumeration is exhaustive)."""
    if k <= 0 or g.n == 0:
        return True
    for size in range(1, min(k, g.n) + 1):
        buckets: dict[tuple, list[tuple[int, ...]]] = {}
        for s in itertools.combinations(range(g.n), size):
            buckets.setdefault(canonical_key(induced_subgraph(g, s)), []).append(s)
        for members in buckets.values():
            base = induced_subgraph(g, members[0])
            auts = [[a[i] for i in range(size)] for a in automorphisms(base)]
            realized_union: set[tuple[str, int]] = set()
            realizable_all: set[tuple[str, int]] | None = None
            for s in members:
                j = induced_subgraph(g, s)
                iso = is_isomorphic(j, base)
                pos = [p for _, p in iso.pairs]  # position i of s -> position in base
                smask = mask_of(s)

                def transport(mu: int) -> set[int]:
                    mu0 = 0
                    for i in range(size):
                        if mu >> i & 1:
                            mu0 |= 1 << pos[i]
                    out = set()
                    for a in auts:
                        out.add(sum((mu0 >> i & 1) << a[i] for i in range(size)))
                    return out

                realized: set[tuple[str, int]] = set()
                realizable: set[tuple[str, int]] = set()
                for color in COLORS:
                    for mu in range(1 << size):
                        if _realizers(g, s, color, mu) & ~smask:
                            for m0 in transport(mu):
                                realizable.add((color, m0))
                for v in range(g.n):
                    if smask >> v & 1:
                        continue
                    mu = sum((g.adjacency[v] >> s[i] & 1) << i for i in range(size))
                    for m0 in transport(mu):
                        realized.add((g.colors[v], m0))
                realized_union |= realized
                realizable_all = (realizable if realizable_all is None
                                  else realizable_all & realizable)
            if not realized_union <= (realizable_all or set()):
                return False
    return True


# ============================================================
# piece scans (one maximal clique of each color)
# ============================================================


def _st_demand_scan(g: ColoredGraph, side: list[int], other: list[int],
                    max_pattern: int) -> bool:
    """Every adjacency demand over at most max_pattern vertices of `side`
    has a realizer inside `other` (all-of-S, none-of-T for disjoint S, T)."""
    for total in range(1, max_pattern + 1):
        for subset in itertools.combinations(side, total):
            for bits in range(1 << total):
                want = [v for i, v in enumerate(subset) if bits >> i & 1]
                avoid = [v for i, v in enumerate(subset) if not bits >> i & 1]
                for w in other:
                    row = g.adjacency[w]
                    if all(row >> v & 1 for v in want) and not any(row >> v & 1 for v in avoid):
                        break
                else:
                    return False
    return True


def _piece_taxonomy(piece: ColoredGraph, level: int) -> bool:
    """Large-piece verdict: the cross relation must be all/none, a perfect
    matching, its complement, or pass the genericity demand scan on both
    sides at the given level.  The four shapes are closed under cross
    complementation, so scanning the piece directly is equivalent to
    scanning its complement."""
    pair = _single_clique_pair(piece)
    if pair is None:
        raise PreconditionError("a piece must be one clique of each color")
    reds, blues = pair
    bm = mask_of(blues)
    cross = [piece.adjacency[r] & bm for r in reds]
    if all(row == bm for row in cross) or not any(cross):
        return True
    if _is_cross_matching(piece, reds, blues, complemented=False):
        return True
    if _is_cross_matching(piece, reds, blues, complemented=True):
        return True
    max_pattern = max(1, level - 1)
    return (_st_demand_scan(piece, reds, blues, max_pattern)
            and _st_demand_scan(piece, blues, reds, max_pattern))


def _piece_verdict(args: tuple[ColoredGraph, int]) -> bool:
    piece, level = args
    if piece.n <= UH_SIZE_BOUND:
        return is_ultrahomogeneous_finite(piece)
    return _piece_taxonomy(piece, level)


def piecewise_check(g: ColoredGraph, *, level: int = 3, jobs: int = 1) -> bool:
    """True iff the union of every maximal red clique with every maximal
    blue clique induces an ultrahomogeneous graph: exactly (search) for
    pieces of at most 12 vertices, by the taxonomy scan above for larger
    ones.  jobs > 1 spreads the pieces over worker processes."""
    prof = class_profile(g)
    if not (prof.red_p3_free and prof.blue_p3_free):
        raise PreconditionError("both color classes must be disjoint unions of cliques")
    pieces = [induced_subgraph(g, sorted(mr + mb))
              for mr in prof.red_cliques for mb in prof.blue_cliques]
    if jobs > 1 and len(pieces) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return all(pool.map(_piece_verdict, ((p, level) for p in pieces),
                                chunksize=max(1, len(pieces) // (4 * jobs))))
    return all(_piece_verdict((p, level)) for p in pieces)


# ============================================================
# the D / D~ criterion
# ============================================================


def _looks_like_f22(g: ColoredGraph, prof: ColorClassProfile) -> bool:
    """Degenerate-case gate: both classes are unions of edges and every
    vertex meets exactly one end of every opposite 2-clique."""
    if prof.omega_red != 2 or prof.omega_blue != 2:
        return False
    for color in COLORS:
        for clique in prof.cliques(color):
            if len(clique) != 2:
                return False
            u, v = clique
            om = g.color_mask(other_color(color))
            if (g.adjacency[u] ^ g.adjacency[v]) & om != om:
                return False
    return True


def theorem_a_predicate(g: ColoredGraph) -> bool:
    """Both of the two four-vertex mixed-edge patterns (one red edge, one
    blue edge, three resp. one cross edges) occur as induced subgraphs.

    Preconditions: classes are clique unions, no blow-up reduction applies,
    each class has at least two maximal cliques, the all-cliques-trivial
    (bipartite-like) case is excluded, and so is the degenerate
    matched-pairs shape handled separately by the classifier."""
    prof = class_profile(g)
    if not (prof.red_p3_free and prof.blue_p3_free):
        raise PreconditionError("both color classes must be disjoint unions of cliques")
    if detect_blow_up(g) is not None:
        raise PreconditionError("a blow-up reduction applies; classify the core instead")
    if prof.alpha_red < 2 or prof.alpha_blue < 2:
        raise PreconditionError("each color class needs at least two maximal cliques")
    if prof.omega_red == 1 and prof.omega_blue == 1:
        raise PreconditionError("both classes are independent sets; use the bipartite cases")
    if _looks_like_f22(g, prof):
        raise PreconditionError("degenerate matched-pairs shape is excluded")
    return (contains_induced(g, pattern_by_name("D")) is not None
            and contains_induced(g, pattern_by_name("D~")) is not None)


# ============================================================
# family labels and classification evidence
# ============================================================


@dataclass(frozen=True)
class FamilyLabel:
    """Base family name plus outermost-first reduction wrappers."""

    value: str
    wrappers: tuple[tuple, ...] = ()
    observed_bounds: bool = False

    def render(self) -> str:
        out = self.value
        for w in reversed(self.wrappers):
            if w[0] == "BlowUpOf":
                out = f"BlowUpOf({out}, {w[1]}, {w[2]})"
            elif w[0] == "ClassComplementOf":
                out = f"ClassComplementOf({out}, {'+'.join(w[1])})"
            else:
                out = f"ColorsSwapped({out})"
        if self.observed_bounds:
            out += " [observed-bounds]"
        return out

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class ClassificationEvidence:
    profile: ColorClassProfile
    d_realized: bool
    dtilde_realized: bool
    omitted: OmittedSet | None
    reductions: tuple[str, ...]
    piecewise: bool | None
    observed_bounds: bool = False
    consistent: tuple[str, ...] = ()

    def to_json_obj(self) -> dict:
        return {
            "alpha_red": _bound_json(self.profile.alpha_red),
            "alpha_blue": _bound_json(self.profile.alpha_blue),
            "omega_red": self.profile.omega_red,
            "omega_blue": self.profile.omega_blue,
            "d_realized": self.d_realized,
            "dtilde_realized": self.dtilde_realized,
            "omitted_names": sorted(self.omitted.name_set()) if self.omitted else None,
            "omitted_bound": self.omitted.bound if self.omitted else None,
            "reductions": list(self.reductions),
            "piecewise": self.piecewise,
            "observed_bounds": self.observed_bounds,
            "consistent": list(self.consistent),
        }


def _bound_json(b):
    return "inf" if b == UNBOUNDED else int(b)


# signature table: exact minimally-omitted name sets at bound 4, written for
# the orientation that constrains the blue side; the variants with a finite
# number of red cliques add the corresponding red independent set
_BASE_SIGNATURES: tuple[tuple[str, frozenset[str]], ...] = (
    ("F(2,1)", frozenset({"P3_red", "K:red:3", "K:blue:2", "Tr", "Tr~"})),
    ("F(2,2)", frozenset({"P3_red", "P3_blue", "K:red:3", "K:blue:3",
                          "Tr", "Tr~", "Tb", "Tb~"})),
    ("F(inf,1)", frozenset({"P3_red", "K:blue:2"})),
    ("F(inf,2)", frozenset({"P3_red", "P3_blue", "K:blue:3", "Tb", "Tb~"})),
    ("F(inf,inf)", frozenset({"P3_red", "P3_blue", "D", "D~"})),
)

_K_VARIANT_BASES = ("F(inf,1)", "F(inf,2)")


def _signature_rows() -> list[tuple[str, frozenset[str]]]:
    rows = list(_BASE_SIGNATURES)
    for base, sig in _BASE_SIGNATURES:
        if base in _K_VARIANT_BASES:
            for k in (1, 2, 3):
                rows.append((f"{base[:-1]},k={k})", sig | {f"Kbar:red:{k + 1}"}))
    return rows


def _swap_name(name: str) -> str:
    if name.startswith(("K:", "Kbar:")):
        head, color, n = name.split(":")
        return f"{head}:{other_color(color)}:{n}"
    table = {"Tr": "Tb", "Tb": "Tr", "Tr~": "Tb~", "Tb~": "Tr~",
             "Qr": "Qb", "Qb": "Qr", "P3_red": "P3_blue", "P3_blue": "P3_red",
             "D": "D", "D~": "D~"}
    return table[name]


def _normalize(g: ColoredGraph) -> tuple[ColoredGraph, list[tuple], list[str]]:
    """Peel complement and blow-up reductions until the graph is in union
    orientation with no uniform-twin-class expansion left."""
    wrappers: list[tuple] = []
    notes: list[str] = []
    for _round in range(8):
        prof = class_profile(g)
        comp = []
        for color in COLORS:
            side = [v for v in range(g.n) if g.colors[v] == color]
            if not prof.p3_free(color):
                comp.append(color)
            elif (prof.alpha(color) == 1 and len(side) >= 2
                  and prof.omega(color) == len(side)):
                # a single clique is the complemented picture of an
                # independent class; prefer the many-cliques orientation
                comp.append(color)
        if comp:
            for color in comp:
                g = class_complement(g, color)
            prof = class_profile(g)
            if not (prof.red_p3_free and prof.blue_p3_free):
                raise PreconditionError(
                    "color classes are not clique unions, even up to complementation")
            wrappers.append(("ClassComplementOf", tuple(comp)))
            notes.append(f"class-complemented: {'+'.join(comp)}")
            continue
        found = detect_blow_up(g)
        if found is not None:
            g, color, factor = found
            wrappers.append(("BlowUpOf", color, factor))
            notes.append(f"collapsed blow-up: {color} x{factor}")
            continue
        return g, wrappers, notes
    raise PreconditionError("reduction loop did not stabilize")


def _bipartite_label(g: ColoredGraph, prof: ColorClassProfile, level: int,
                     evidence: dict) -> str:
    reds = [v for v in range(g.n) if g.colors[v] == RED]
    blues = [v for v in range(g.n) if g.colors[v] == BLUE]
    if prof.homogeneously_connected:
        return "HomogeneouslyConnected"
    if _is_cross_matching(g, reds, blues, complemented=False):
        return "Matching"
    if _is_cross_matching(g, reds, blues, complemented=True):
        return "CoMatching"
    max_pattern = max(1, level - 1)
    if (_st_demand_scan(g, reds, blues, max_pattern)
            and _st_demand_scan(g, blues, reds, max_pattern)):
        return "GenericBipartite"
    raise UnclassifiableAtLevel(
        "bipartite-like input is neither homogeneously connected, a matching, "
        "its complement, nor generic at the scan level", evidence)


def classify(x: Approximant | ClassSpec | ColoredGraph, *,
             t: int = 4, budget: int = 200, seed: int = 0
             ) -> tuple[FamilyLabel, ClassificationEvidence]:
    """Decision tree over the countable families, run on finite data.

    Reductions first (complement orientation, blow-up collapse), then the
    all-trivial-cliques cases, then the two four-vertex mixed patterns
    (both realized means the cross structure is generic for the observed
    clique counts), and finally exact matching of the minimally-omitted
    signature at bound 4.  Raises UnclassifiableAtLevel when the finite
    data matches nothing exactly."""
    spec: ClassSpec | None = None
    if isinstance(x, ClassSpec):
        spec = x
        x = build_family(spec, t=t, budget=budget, seed=seed)
    if isinstance(x, Approximant):
        spec = x.spec if spec is None else spec
        g, level = x.graph, max(x.level, 2)
    else:
        g, level = x, t
    if g.n == 0:
        raise PreconditionError("cannot classify the empty graph")

    core, wrappers, notes = _normalize(g)
    prof = class_profile(core)
    if wrappers:
        spec = None  # the spec describes the input, not the reduced core
    d_hit = contains_induced(core, pattern_by_name("D")) is not None
    dt_hit = contains_induced(core, pattern_by_name("D~")) is not None
    omitted = minimally_omitted(core, 4)
    pw = piecewise_check(core)
    observed = spec is None

    def finish(value: str, extra: tuple[tuple, ...] = ()) -> tuple[FamilyLabel, ClassificationEvidence]:
        label = FamilyLabel(value=value, wrappers=tuple(wrappers) + extra,
                            observed_bounds=observed and value not in
                            ("HomogeneouslyConnected", "Matching", "CoMatching",
                             "GenericBipartite", "F(inf,inf)", "F(2,1)", "F(2,2)"))
        ev = ClassificationEvidence(
            profile=prof, d_realized=d_hit, dtilde_realized=dt_hit,
            omitted=omitted, reductions=tuple(notes), piecewise=pw,
            observed_bounds=label.observed_bounds)
        return label, ev

    ev_dict = {
        "omitted_names": sorted(omitted.name_set()),
        "d_realized": d_hit, "dtilde_realized": dt_hit,
        "reductions": notes,
    }

    if prof.omega_red <= 1 and prof.omega_blue <= 1:
        return finish(_bipartite_label(core, prof, min(level, 4), ev_dict))

    if d_hit and dt_hit:
        if spec is not None:
            r, b = spec.count_cap_red, spec.count_cap_blue
        else:
            r, b = prof.alpha_red, prof.alpha_blue
        return finish(f"G({_bound_json(r)},{_bound_json(b)})")

    names = frozenset(omitted.name_set())
    rows = _signature_rows()
    for swapped in (False, True):
        probe = frozenset(_swap_name(n) for n in names) if swapped else names
        for value, sig in rows:
            if probe != sig:
                continue
            if spec is not None and value in _K_VARIANT_BASES:
                cap = (spec.count_cap_blue if swapped else spec.count_cap_red)
                if cap != UNBOUNDED:
                    value = f"{value[:-1]},k={_bound_json(cap)})"
            extra = (("ColorsSwapped",),) if swapped else ()
            return finish(value, extra)

    consistent = sorted({value for value, sig in rows
                         for probe in (names, frozenset(_swap_name(n) for n in names))
                         if sig <= probe})
    ev_dict["consistent"] = consistent
    raise UnclassifiableAtLevel(
        "minimally-omitted signature matches no family exactly; "
        "the input may be unsaturated at this level", ev_dict)


# ============================================================
# structural scans used as classification cross-checks
# ============================================================


def red_edge_blue_clique_scan(g: ColoredGraph) -> list[tuple]:
    """Inside every (red edge, blue clique of size >= 3) configuration, the
    blue clique must offer a vertex adjacent to both ends, one adjacent to
    neither, and one adjacent to exactly each end.  Returns violations."""
    prof = class_profile(g)
    out: list[tuple] = []
    red_edges = [(u, v) for clique in prof.red_cliques
                 for u, v in itertools.combinations(clique, 2)]
    for clique in prof.blue_cliques:
        if len(clique) < 3:
            continue
        for u, v in red_edges:
            got = {(g.adjacency[w] >> u & 1, g.adjacency[w] >> v & 1) for w in clique}
            for want in ((1, 1), (0, 0), (1, 0), (0, 1)):
                if want not in got:
                    out.append((u, v, clique[0], want))
    return out


def small_clique_shatter_violations(g: ColoredGraph, t: int) -> list[tuple]:
    """For every maximal clique C with at most t-1 vertices, every subset of
    C must occur as the exact C-neighborhood of some vertex in every maximal
    clique of the other color.  Returns the unmet (clique, subset,
    opposite-clique) triples; vacuous when all cliques are large."""
    prof = class_profile(g)
    out: list[tuple] = []
    for color in COLORS:
        opp = prof.cliques(other_color(color))
        for c in prof.cliques(color):
            if len(c) > t - 1:
                continue
            for size in range(len(c) + 1):
                for s in itertools.combinations(c, size):
                    want = mask_of(s)
                    cm = mask_of(c)
                    for m in opp:
                        if not any(g.adjacency[v] & cm == want for v in m):
                            out.append((c, s, m))
    return out
