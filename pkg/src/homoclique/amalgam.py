"""Class specifications, membership, and amalgamation engines.

A ClassSpec describes a hereditary class of 2-colored graphs: monochromatic
P3s are always forbidden (both classes must be disjoint unions of cliques),
plus optional per-color caps on clique size / clique count and further
forbidden induced patterns.  Caps and forbidden monochromatic cliques /
independent sets are two views of the same constraint and are kept
consistent by folding the pattern view into effective caps.
"""

from __future__ import annotations

import functools
import itertools
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import InternalInvariantError, PreconditionError, SpecFormatError
from .graphs import (
    BLUE,
    COLORS,
    RED,
    UNBOUNDED,
    CliqueBound,
    ColoredGraph,
    PartialMap,
    automorphisms,
    bit_indices,
    bound_from_json,
    bound_to_json,
    canonical_key,
    class_profile,
    find_induced_embeddings,
    from_json_obj,
    mask_of,
    other_color,
    swap_colors,
    to_json_obj,
)
from .patterns import (
    enumerate_colored_graphs,
    match_catalog_name,
    mono_clique,
    mono_independent,
    mono_path3,
    pattern_by_name,
)

# ============================================================
# class specifications
# ============================================================


@dataclass(frozen=True)
class ClassSpec:
    forbidden: tuple[ColoredGraph, ...] = ()
    forbidden_labels: tuple[str, ...] = ()
    size_cap_red: CliqueBound = UNBOUNDED
    size_cap_blue: CliqueBound = UNBOUNDED
    count_cap_red: CliqueBound = UNBOUNDED
    count_cap_blue: CliqueBound = UNBOUNDED
    name: str | None = None

    def __post_init__(self):
        if len(self.forbidden_labels) != len(self.forbidden):
            labels = tuple(match_catalog_name(g) or "custom" for g in self.forbidden)
            object.__setattr__(self, "forbidden_labels", labels)

    def size_cap(self, color: str) -> CliqueBound:
        return self.size_cap_red if color == RED else self.size_cap_blue

    def count_cap(self, color: str) -> CliqueBound:
        return self.count_cap_red if color == RED else self.count_cap_blue


def make_spec(forbidden: list[str | ColoredGraph] = (), *,
              size_caps: dict[str, CliqueBound] | None = None,
              count_caps: dict[str, CliqueBound] | None = None,
              name: str | None = None) -> ClassSpec:
    graphs, labels = [], []
    for item in forbidden:
        if isinstance(item, str):
            graphs.append(pattern_by_name(item))
            labels.append(item)
        else:
            graphs.append(item)
            labels.append(match_catalog_name(item) or "custom")
    size_caps = size_caps or {}
    count_caps = count_caps or {}

    def cap(d: dict[str, CliqueBound], color: str) -> CliqueBound:
        v = d.get(color, UNBOUNDED)
        return UNBOUNDED if v is None else v

    return ClassSpec(
        forbidden=tuple(graphs),
        forbidden_labels=tuple(labels),
        size_cap_red=cap(size_caps, RED),
        size_cap_blue=cap(size_caps, BLUE),
        count_cap_red=cap(count_caps, RED),
        count_cap_blue=cap(count_caps, BLUE),
        name=name,
    )


def _mono_shape(g: ColoredGraph) -> tuple[str, str, int] | None:
    """('K'|'Kbar', color, n) when g is a monochromatic clique or independent set."""
    colors = set(g.colors)
    if len(colors) != 1 or g.n == 0:
        return None
    color = colors.pop()
    pairs = g.n * (g.n - 1) // 2
    if g.edge_count() == pairs:
        return ("K", color, g.n)
    if g.edge_count() == 0:
        return ("Kbar", color, g.n)
    return None


@functools.lru_cache(maxsize=None)
def _effective(spec: ClassSpec) -> tuple[dict, dict, tuple[ColoredGraph, ...]]:
    """Fold forbidden mono cliques/independent sets into caps; keep the rest for search."""
    size = {c: spec.size_cap(c) for c in COLORS}
    count = {c: spec.count_cap(c) for c in COLORS}
    search = []
    for g in spec.forbidden:
        shape = _mono_shape(g)
        if shape is None:
            if g.n >= 1:
                search.append(g)
            continue
        kind, color, n = shape
        if kind == "K" and n >= 2:
            size[color] = min(size[color], n - 1)
        elif kind == "Kbar" and n >= 2:
            count[color] = min(count[color], n - 1)
        else:  # single vertex forbidden: color cannot occur at all
            size[color] = 0
            count[color] = 0
    # dedup search patterns up to isomorphism
    seen, uniq = set(), []
    for g in search:
        key = canonical_key(g)
        if key not in seen:
            seen.add(key)
            uniq.append(g)
    return size, count, tuple(uniq)


def effective_size_cap(spec: ClassSpec, color: str) -> CliqueBound:
    return _effective(spec)[0][color]


def effective_count_cap(spec: ClassSpec, color: str) -> CliqueBound:
    return _effective(spec)[1][color]


def search_patterns(spec: ClassSpec) -> tuple[ColoredGraph, ...]:
    return _effective(spec)[2]


def effective_forbidden(spec: ClassSpec) -> tuple[ColoredGraph, ...]:
    """All forbidden patterns as graphs: P3 baseline, cap equivalents, the rest.

    The independent-set equivalents express count caps correctly only
    alongside the P3 patterns (cliques = components there), which is how the
    tuple is meant to be consumed.
    """
    size, count, search = _effective(spec)
    out = [mono_path3(RED), mono_path3(BLUE)]
    for color in COLORS:
        if size[color] != UNBOUNDED:
            out.append(mono_clique(color, size[color] + 1))
        if count[color] != UNBOUNDED:
            out.append(mono_independent(color, count[color] + 1))
    out.extend(search)
    seen, uniq = set(), []
    for g in out:
        key = canonical_key(g)
        if key not in seen:
            seen.add(key)
            uniq.append(g)
    return tuple(uniq)


def member(spec: ClassSpec, g: ColoredGraph) -> bool:
    """True iff g omits every forbidden pattern and respects all caps."""
    prof = class_profile(g)
    if not (prof.red_p3_free and prof.blue_p3_free):
        return False
    size, count, search = _effective(spec)
    for color in COLORS:
        if prof.omega(color) > size[color] or prof.alpha(color) > count[color]:
            return False
    for pat in search:
        if find_induced_embeddings(g, pat, limit=1):
            return False
    return True


def allowed_colors(spec: ClassSpec) -> tuple[str, ...]:
    """Colors whose single-vertex graph is in the class."""
    size, count, _ = _effective(spec)
    return tuple(c for c in COLORS if size[c] >= 1 and count[c] >= 1)


def swap_spec(spec: ClassSpec) -> ClassSpec:
    return ClassSpec(
        forbidden=tuple(swap_colors(g) for g in spec.forbidden),
        forbidden_labels=(),
        size_cap_red=spec.size_cap_blue,
        size_cap_blue=spec.size_cap_red,
        count_cap_red=spec.count_cap_blue,
        count_cap_blue=spec.count_cap_red,
        name=spec.name,
    )


# ---- family constructors ----


def spec_f21() -> ClassSpec:
    return make_spec(["Tr", "Tr~"], size_caps={RED: 2, BLUE: 1}, name="F(2,1)")


def spec_f22() -> ClassSpec:
    return make_spec(["Tr", "Tr~", "Tb", "Tb~"], size_caps={RED: 2, BLUE: 2},
                     name="F(2,2)")


def spec_f_inf_1(k: CliqueBound = UNBOUNDED) -> ClassSpec:
    name = "F(inf,1)" if k == UNBOUNDED else f"F(inf,1,k={k})"
    return make_spec([], size_caps={BLUE: 1}, count_caps={RED: k}, name=name)


def spec_f_inf_2(k: CliqueBound = UNBOUNDED) -> ClassSpec:
    name = "F(inf,2)" if k == UNBOUNDED else f"F(inf,2,k={k})"
    return make_spec(["Tb", "Tb~"], size_caps={BLUE: 2}, count_caps={RED: k}, name=name)


def spec_f_inf_inf() -> ClassSpec:
    return make_spec(["D", "D~"], name="F(inf,inf)")


def _bound_str(b: CliqueBound) -> str:
    return "inf" if b == UNBOUNDED else str(b)


def spec_a_rb(r: CliqueBound, b: CliqueBound) -> ClassSpec:
    return make_spec([], count_caps={RED: r, BLUE: b},
                     name=f"A({_bound_str(r)},{_bound_str(b)})")


def spec_bipartite() -> ClassSpec:
    return make_spec([], size_caps={RED: 1, BLUE: 1}, name="bipartite")


def spec_mono(color: str, s: CliqueBound, t: CliqueBound) -> ClassSpec:
    """Single-color class: at most s cliques of size at most t."""
    return make_spec([], size_caps={color: t},
                     count_caps={color: s, other_color(color): 0},
                     name=f"mono({color},{_bound_str(s)},{_bound_str(t)})")


FAMILY_SPECS = {
    "f21": spec_f21,
    "f22": spec_f22,
    "f_inf_1": spec_f_inf_1,
    "f_inf_2": spec_f_inf_2,
    "f_inf_inf": spec_f_inf_inf,
    "bipartite": spec_bipartite,
}


# ---- spec JSON ----


def spec_to_json_obj(spec: ClassSpec) -> dict:
    forbidden = []
    for g, label in zip(spec.forbidden, spec.forbidden_labels):
        if label == "custom":
            forbidden.append({"custom": to_json_obj(g)})
        else:
            forbidden.append(label)
    obj = {
        "forbidden": forbidden,
        "max_clique_size": {c: bound_to_json(spec.size_cap(c)) for c in COLORS},
        "max_clique_count": {c: bound_to_json(spec.count_cap(c)) for c in COLORS},
    }
    if spec.name:
        obj["name"] = spec.name
    return obj


def spec_from_json_obj(obj: dict) -> ClassSpec:
    try:
        graphs, labels = [], []
        for item in obj.get("forbidden", []):
            if isinstance(item, str):
                graphs.append(pattern_by_name(item))
                labels.append(item)
            elif isinstance(item, dict) and "custom" in item:
                g = from_json_obj(item["custom"])
                graphs.append(g)
                labels.append(match_catalog_name(g) or "custom")
            else:
                raise SpecFormatError(f"bad forbidden entry: {item!r}")
        size = obj.get("max_clique_size", {})
        count = obj.get("max_clique_count", {})
        return ClassSpec(
            forbidden=tuple(graphs),
            forbidden_labels=tuple(labels),
            size_cap_red=bound_from_json(size.get(RED, "inf")),
            size_cap_blue=bound_from_json(size.get(BLUE, "inf")),
            count_cap_red=bound_from_json(count.get(RED, "inf")),
            count_cap_blue=bound_from_json(count.get(BLUE, "inf")),
            name=obj.get("name"),
        )
    except SpecFormatError:
        raise
    except Exception as exc:
        raise SpecFormatError(f"bad spec JSON: {exc}") from None


def dumps_spec(spec: ClassSpec) -> str:
    return json.dumps(spec_to_json_obj(spec), indent=2, sort_keys=True) + "\n"


def load_spec_file(path) -> ClassSpec:
    return spec_from_json_obj(json.loads(Path(path).read_text()))


# ============================================================
# amalgamation problems and results
# ============================================================


@dataclass(frozen=True)
class AmalgamProblem:
    j: ColoredGraph
    a1: ColoredGraph
    a2: ColoredGraph
    iota1: PartialMap
    iota2: PartialMap

    def new_vertices(self) -> list[int]:
        """a2 vertices outside iota2's image, red first, then by id."""
        image = set(self.iota2.as_dict().values())
        fresh = [v for v in range(self.a2.n) if v not in image]
        fresh.sort(key=lambda v: (self.a2.colors[v] != RED, v))
        return fresh


@dataclass(frozen=True)
class AmalgamResult:
    a: ColoredGraph
    kappa1: PartialMap
    kappa2: PartialMap


def _check_embedding(m: PartialMap, src: ColoredGraph, dst: ColoredGraph, what: str):
    d = m.as_dict()
    if sorted(d) != list(range(src.n)):
        raise PreconditionError(f"{what}: not total on the source")
    if not m.validate(src, dst):
        raise PreconditionError(f"{what}: not an induced color-preserving embedding")


def validate_problem(spec: ClassSpec, p: AmalgamProblem):
    _check_embedding(p.iota1, p.j, p.a1, "iota1")
    _check_embedding(p.iota2, p.j, p.a2, "iota2")
    for tag, g in (("j", p.j), ("a1", p.a1), ("a2", p.a2)):
        if not member(spec, g):
            raise PreconditionError(f"{tag} is not in the class")


def validate_result(spec: ClassSpec, p: AmalgamProblem, r: AmalgamResult, *,
                    full_membership: bool = True):
    """Commuting square + induced embeddings + membership.  Raises on failure."""
    _check_embedding(r.kappa1, p.a1, r.a, "kappa1")
    _check_embedding(r.kappa2, p.a2, r.a, "kappa2")
    k1, k2 = r.kappa1.as_dict(), r.kappa2.as_dict()
    i1, i2 = p.iota1.as_dict(), p.iota2.as_dict()
    for x in range(p.j.n):
        if k1[i1[x]] != k2[i2[x]]:
            raise InternalInvariantError(f"square does not commute at j-vertex {x}")
    if full_membership and not member(spec, r.a):
        raise InternalInvariantError("amalgam left the class")


# ============================================================
# generic search amalgamation
# ============================================================


def _identity_map(n: int) -> PartialMap:
    return PartialMap.from_dict({v: v for v in range(n)})


def generic_amalgam(spec: ClassSpec, p: AmalgamProblem, *,
                    free_bit_choices=None,
                    placement_rng: random.Random | None = None,
                    check_problem: bool = True,
                    validate_each: bool = True) -> AmalgamResult | None:
    """Search amalgamation: a1 is kept intact, a2's new vertices are placed one
    by one, trying (i) identification with an existing compatible vertex,
    (ii) joining an existing clique of its color or opening a new one,
    (iii) every cross-edge assignment to unconstrained vertices.

    `free_bit_choices(graph, color, same_mask, forced1, forced0, free_bits)`
    may restrict/reorder step (iii) by yielding masks over `free_bits`; the
    default enumerates all of them, all-zeros first.  Every accepted candidate
    passes member(), so a restricting hook can only lose completeness, never
    soundness.  With the default hook, None means the search space is exhausted.

    Unconstrained clique placement tries smaller cliques first (opening a new
    one last); `placement_rng` shuffles ties so repeated builds spread growth
    instead of piling onto one clique.
    """
    if check_problem:
        validate_problem(spec, p)
    i1, i2 = p.iota1.as_dict(), p.iota2.as_dict()
    placed0 = {i2[x]: i1[x] for x in range(p.j.n)}
    fresh = p.new_vertices()
    size_caps = {c: effective_size_cap(spec, c) for c in COLORS}
    count_caps = {c: effective_count_cap(spec, c) for c in COLORS}

    def solve(g: ColoredGraph, placed: dict[int, int]):
        if len(placed) == p.j.n + len(fresh):
            return g, placed
        v = fresh[len(placed) - p.j.n]
        color = p.a2.colors[v]
        forced = [(placed[x], p.a2.adjacency[v] >> x & 1) for x in placed]
        used = set(placed.values())
        # (i) identification
        for u in range(g.n):
            if u in used or g.colors[u] != color:
                continue
            if all((g.adjacency[u] >> y & 1) == bit for y, bit in forced):
                out = solve(g, {**placed, v: u})
                if out:
                    return out
        # (ii)+(iii) new vertex
        forced1 = mask_of(y for y, bit in forced if bit)
        forced0 = mask_of(y for y, bit in forced if not bit)
        prof = class_profile(g)
        cmask = g.color_mask(color)
        same1 = forced1 & cmask
        placement_masks: list[int] = []
        if same1:
            for c in prof.cliques(color):
                cm = mask_of(c)
                if same1 & ~cm:
                    continue  # same-color forced neighbors span two cliques: dead
                if cm & forced0:
                    continue  # clique contains a forced non-neighbor
                placement_masks.append(cm)
                break  # the clique containing same1 is unique
        else:
            cands = [c for c in prof.cliques(color) if not mask_of(c) & forced0]
            if placement_rng is not None:
                placement_rng.shuffle(cands)
            cands.sort(key=len)  # stable, so the shuffle only breaks size ties
            placement_masks.extend(mask_of(c) for c in cands)
            placement_masks.append(0)  # open a new clique
        other = g.color_mask(other_color(color))
        free = other & ~forced1 & ~forced0
        free_bits = list(bit_indices(free))
        for same_mask in placement_masks:
            # cap pre-checks prune placements member() would reject anyway
            if same_mask == 0:
                if size_caps[color] < 1 or len(prof.cliques(color)) + 1 > count_caps[color]:
                    continue
            elif same_mask.bit_count() + 1 > size_caps[color]:
                continue
            base = same_mask | (forced1 & other)
            if free_bit_choices is not None:
                masks = free_bit_choices(g, color, same_mask, forced1, forced0, free_bits)
            else:
                masks = (mask_of(itertools.compress(free_bits, bits))
                         for bits in itertools.product((0, 1), repeat=len(free_bits)))
            for fmask in masks:
                cand = g.with_vertex(color, base | fmask)
                if not member(spec, cand):
                    continue
                out = solve(cand, {**placed, v: g.n})
                if out:
                    return out
        return None

    solved = solve(p.a1, dict(placed0))
    if solved is None:
        return None
    g, placed = solved
    result = AmalgamResult(
        a=g,
        kappa1=_identity_map(p.a1.n),
        kappa2=PartialMap.from_dict(placed),
    )
    if validate_each:
        validate_result(spec, p, result)
    return result


# ============================================================
# bespoke one-point engines
# ============================================================


def _single_new_vertex(p: AmalgamProblem) -> int | None:
    fresh = p.new_vertices()
    if len(fresh) > 1:
        raise PreconditionError("engine handles at most one new vertex")
    return fresh[0] if fresh else None


def _degenerate(p: AmalgamProblem) -> AmalgamResult:
    i1, i2 = p.iota1.as_dict(), p.iota2.as_dict()
    placed = {i2[x]: i1[x] for x in range(p.j.n)}
    return AmalgamResult(a=p.a1, kappa1=_identity_map(p.a1.n),
                         kappa2=PartialMap.from_dict(placed))


def _forced_bits(p: AmalgamProblem, v: int) -> dict[int, int]:
    """a1-vertex -> required adjacency bit for the new a2-vertex v."""
    i1, i2 = p.iota1.as_dict(), p.iota2.as_dict()
    return {i1[x]: p.a2.adjacency[v] >> i2[x] & 1 for x in range(p.j.n)}


def _clique_partner(g: ColoredGraph, u: int) -> int | None:
    same = g.same_adj(u)
    if same.bit_count() == 1:
        return next(bit_indices(same))
    if same.bit_count() > 1:
        raise InternalInvariantError("clique larger than 2 where caps say otherwise")
    return None


def _mono_pairs(g: ColoredGraph, color: str) -> list[tuple[int, int]]:
    return [(u, v) for u, v in g.edges() if g.colors[u] == color == g.colors[v]]


def _amalgam_add_red(spec: ClassSpec, p: AmalgamProblem, v: int) -> AmalgamResult:
    """Shared red-vertex procedure for the two bespoke engines.

    The class caps red cliques at 2 and forbids a blue vertex from being
    adjacent to both or neither end of a red edge, which forces the new
    vertex's cross row to complement its red neighbor's.  Blue pairs (present
    only under the symmetric spec) are covered one end at a time.
    """
    a1 = p.a1
    forced = _forced_bits(p, v)
    placed = {p.iota2.as_dict()[x]: p.iota1.as_dict()[x] for x in range(p.j.n)}
    red_nbrs = [u for u, bit in forced.items() if bit and a1.colors[u] == RED]
    if len(red_nbrs) > 1:
        raise InternalInvariantError("new red vertex with two red neighbors survived membership")
    if red_nbrs:
        r = red_nbrs[0]
        partner = _clique_partner(a1, r)
        if partner is not None:
            # the partner's cross row already complements r's, so it matches v
            for u, bit in forced.items():
                if a1.colors[u] == BLUE and (a1.adjacency[partner] >> u & 1) != bit:
                    raise InternalInvariantError("partner reuse incompatible with forced bits")
            if partner in placed.values():
                raise InternalInvariantError("partner already used by the joint part")
            return AmalgamResult(a=a1, kappa1=_identity_map(a1.n),
                                 kappa2=PartialMap.from_dict({**placed, v: partner}))
        # join r, complement r's blue row
        row = 1 << r
        for b in range(a1.n):
            if a1.colors[b] == BLUE and not a1.adjacency[r] >> b & 1:
                row |= 1 << b
        for u, bit in forced.items():
            if a1.colors[u] == BLUE and (row >> u & 1) != bit:
                raise InternalInvariantError("complement row incompatible with forced bits")
        g = a1.with_vertex(RED, row)
        return AmalgamResult(a=g, kappa1=_identity_map(a1.n),
                             kappa2=PartialMap.from_dict({**placed, v: a1.n}))
    # no red neighbor: open a red singleton; adjacency = forced blue neighbors,
    # then cover each blue 2-clique still lacking a neighbor (symmetric spec only)
    row = mask_of(u for u, bit in forced.items() if bit)
    if effective_size_cap(spec, BLUE) >= 2:
        marked = mask_of(u for u, bit in forced.items()
                         if not bit and a1.colors[u] == BLUE)
        for b1, b2 in _mono_pairs(a1, BLUE):
            have = (row >> b1 & 1) + (row >> b2 & 1)
            if have == 2:
                raise InternalInvariantError("both ends of a blue pair forced adjacent")
            if have == 1:
                continue
            free = [b for b in (b1, b2) if not marked >> b & 1]
            if not free:
                raise InternalInvariantError("both ends of a blue pair marked")
            row |= 1 << free[0]
    g = a1.with_vertex(RED, row)
    return AmalgamResult(a=g, kappa1=_identity_map(a1.n),
                         kappa2=PartialMap.from_dict({**placed, v: a1.n}))


def _swap_problem(p: AmalgamProblem) -> AmalgamProblem:
    return AmalgamProblem(j=swap_colors(p.j), a1=swap_colors(p.a1),
                          a2=swap_colors(p.a2), iota1=p.iota1, iota2=p.iota2)


def amalgam_f21(p: AmalgamProblem) -> AmalgamResult:
    """One-point amalgamation where red cliques cap at 2 and blues are independent.

    Red vertex: reuse the red neighbor's clique partner when present, else add
    a vertex whose cross row complements the neighbor's; without a red
    neighbor, add a singleton with exactly the forced cross edges.  Blue
    vertex: join the forced red neighbors, then give every still-uncovered red
    pair exactly one edge, avoiding reds the joint part forbids (lowest id
    among the permitted ends).
    """
    spec = spec_f21()
    validate_problem(spec, p)
    v = _single_new_vertex(p)
    if v is None:
        return _degenerate(p)
    if p.a2.colors[v] == RED:
        result = _amalgam_add_red(spec, p, v)
    else:
        result = _blue_into_f21(spec, p, v)
    validate_result(spec, p, result)
    return result


def _blue_into_f21(spec: ClassSpec, p: AmalgamProblem, v: int) -> AmalgamResult:
    a1 = p.a1
    forced = _forced_bits(p, v)
    placed = {p.iota2.as_dict()[x]: p.iota1.as_dict()[x] for x in range(p.j.n)}
    row = mask_of(u for u, bit in forced.items() if bit)
    marked = mask_of(u for u, bit in forced.items() if not bit and a1.colors[u] == RED)
    for r1, r2 in _mono_pairs(a1, RED):
        have = (row >> r1 & 1) + (row >> r2 & 1)
        if have == 2:
            raise InternalInvariantError("both ends of a red pair forced adjacent")
        if have == 1:
            continue
        free = [r for r in (r1, r2) if not marked >> r & 1]
        if not free:
            raise InternalInvariantError("both ends of a red pair marked")
        row |= 1 << free[0]
    g = a1.with_vertex(BLUE, row)
    return AmalgamResult(a=g, kappa1=_identity_map(a1.n),
                         kappa2=PartialMap.from_dict({**placed, v: a1.n}))


def amalgam_f22(p: AmalgamProblem) -> AmalgamResult:
    """One-point amalgamation where both classes cap cliques at 2 and every
    vertex must meet each opposite pair in exactly one end.  Red vertices are
    handled directly; blue vertices by color symmetry."""
    spec = spec_f22()
    validate_problem(spec, p)
    v = _single_new_vertex(p)
    if v is None:
        return _degenerate(p)
    if p.a2.colors[v] == RED:
        result = _amalgam_add_red(spec, p, v)
    else:
        swapped = _amalgam_add_red(swap_spec(spec), _swap_problem(p), v)
        result = AmalgamResult(a=swap_colors(swapped.a), kappa1=swapped.kappa1,
                               kappa2=swapped.kappa2)
    validate_result(spec, p, result)
    return result


# ============================================================
# exhaustive amalgamation-property verification
# ============================================================


_ENUM_CACHE: dict[tuple, dict[int, list[ColoredGraph]]] = {}


def enumerate_in_spec(spec: ClassSpec, max_n: int) -> dict[int, list[ColoredGraph]]:
    key = (spec, max_n)
    if key not in _ENUM_CACHE:
        _ENUM_CACHE[key] = enumerate_colored_graphs(
            max_n, colors=allowed_colors(spec) or COLORS,
            keep=lambda g: member(spec, g))
    return _ENUM_CACHE[key]


def _subset_orbits(g: ColoredGraph, auts: list[dict[int, int]]) -> list[tuple[int, ...]]:
    """Vertex subsets of g up to automorphism, each as a sorted tuple."""
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    for size in range(g.n + 1):
        for sub in itertools.combinations(range(g.n), size):
            if sub in seen:
                continue
            orbit = {tuple(sorted(a[x] for x in sub)) for a in auts}
            seen |= orbit
            out.append(sub)
    return out


def _embedding_orbits(j: ColoredGraph, a2: ColoredGraph,
                      gamma: list[dict[int, int]],
                      auts2: list[dict[int, int]]) -> list[dict[int, int]]:
    embs = find_induced_embeddings(a2, j, limit=None)
    seen: set[tuple[int, ...]] = set()
    out: list[dict[int, int]] = []
    for emb in embs:
        sig = tuple(emb[x] for x in range(j.n))
        if sig in seen:
            continue
        orbit = {tuple(b[emb[g_[x]]] for x in range(j.n))
                 for g_ in gamma for b in auts2}
        seen |= orbit
        out.append(emb)
    return out


def _permute_mask(mask: int, perm: dict[int, int]) -> int:
    out = 0
    for x, y in perm.items():
        if mask >> x & 1:
            out |= 1 << y
    return out


def iter_one_point_problems(spec: ClassSpec, max_a1: int):
    """All problems (up to symmetry) with |a1| <= max_a1 and a2 = j plus one vertex.

    Extensions of j are deduplicated under the automorphisms of a1 that fix j
    setwise, so each yielded problem is a genuinely distinct instance.
    """
    reps = enumerate_in_spec(spec, max_a1)
    colors = allowed_colors(spec)
    for m in range(1, max_a1 + 1):
        for a1 in reps[m]:
            auts = automorphisms(a1)
            for sub in _subset_orbits(a1, auts):
                j = ColoredGraph(
                    tuple(a1.colors[x] for x in sub),
                    tuple(_restrict_row(a1.adjacency[x], sub) for x in sub),
                )
                iota1 = PartialMap.from_dict({i: x for i, x in enumerate(sub)})
                iota2 = _identity_map(j.n)
                gamma = _setwise_stabilizer_restrictions(sub, auts)
                seen: set[tuple[str, int]] = set()
                for color in colors:
                    for mask in range(1 << j.n):
                        key = min((color, _permute_mask(mask, g_)) for g_ in gamma)
                        if key in seen:
                            continue
                        seen.add(key)
                        a2 = j.with_vertex(color, mask)
                        if not member(spec, a2):
                            continue
                        yield AmalgamProblem(j=j, a1=a1, a2=a2,
                                             iota1=iota1, iota2=iota2)


@dataclass(frozen=True)
class AmalgamationCertificate:
    spec_name: str
    max_size: int
    holds_up_to: int | None
    counterexample: AmalgamProblem | None
    problems_checked: int

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def check_amalgamation_property(spec: ClassSpec, n: int,
                                progress=None) -> AmalgamationCertificate:
    """Exhaustively verify amalgamation over in-class triples with |a_i| <= n.

    Embedding pairs are quotiented by automorphisms; every produced amalgam is
    validated.  Returns the first counterexample in enumeration order, if any.
    The result never claims anything beyond size n.
    """
    reps = enumerate_in_spec(spec, n)
    all_graphs = [g for m in range(1, n + 1) for g in reps[m]]
    auts = {idx: automorphisms(g) for idx, g in enumerate(all_graphs)}
    checked = 0
    use_f21 = spec == spec_f21()
    use_f22 = spec == spec_f22()
    for idx1, a1 in enumerate(all_graphs):
        for sub in _subset_orbits(a1, auts[idx1]):
            j = ColoredGraph(
                tuple(a1.colors[x] for x in sub),
                tuple(_restrict_row(a1.adjacency[x], sub) for x in sub),
            )
            iota1 = PartialMap.from_dict({i: x for i, x in enumerate(sub)})
            gamma = _setwise_stabilizer_restrictions(sub, auts[idx1])
            for idx2, a2 in enumerate(all_graphs):
                if idx2 < idx1:
                    continue  # unordered pairs: the mirrored problem is equivalent
                for emb in _embedding_orbits(j, a2, gamma, auts[idx2]):
                    problem = AmalgamProblem(j=j, a1=a1, a2=a2, iota1=iota1,
                                             iota2=PartialMap.from_dict(emb))
                    checked += 1
                    if progress is not None and checked % 2000 == 0:
                        progress(checked)
                    result = None
                    if (use_f21 or use_f22) and len(problem.new_vertices()) <= 1:
                        result = (amalgam_f21 if use_f21 else amalgam_f22)(problem)
                    else:
                        result = generic_amalgam(spec, problem)
                    if result is None:
                        return AmalgamationCertificate(
                            spec_name=spec.name or "anonymous", max_size=n,
                            holds_up_to=None, counterexample=problem,
                            problems_checked=checked)
    return AmalgamationCertificate(spec_name=spec.name or "anonymous", max_size=n,
                                   holds_up_to=n, counterexample=None,
                                   problems_checked=checked)


def _restrict_row(row: int, sub: tuple[int, ...]) -> int:
    out = 0
    for i, x in enumerate(sub):
        if row >> x & 1:
            out |= 1 << i
    return out


def _setwise_stabilizer_restrictions(sub: tuple[int, ...],
                                     auts: list[dict[int, int]]) -> list[dict[int, int]]:
    """Restrictions (in j-coordinates) of automorphisms stabilizing sub setwise."""
    pos = {x: i for i, x in enumerate(sub)}
    out = []
    seen = set()
    for a in auts:
        if all(a[x] in pos for x in sub):
            restr = {pos[x]: pos[a[x]] for x in sub}
            sig = tuple(sorted(restr.items()))
            if sig not in seen:
                seen.add(sig)
                out.append(restr)
    return out


# ============================================================
# brute-force amalgam existence oracle (for tests / absent re-verification)
# ============================================================


def brute_amalgam_exists(spec: ClassSpec, p: AmalgamProblem, *,
                         max_extra: int | None = None) -> bool:
    """Independent check: does ANY amalgam on at most |a1|+|a2|-|j| vertices exist?

    Builds every extension of a1 by up to |a2|-|j| vertices of any colors and
    adjacency, keeps in-class ones, and looks for an embedding of a2 that
    agrees with iota1 on j.  Exponential; test-scale only.
    """
    validate_problem(spec, p)
    i1, i2 = p.iota1.as_dict(), p.iota2.as_dict()
    fixed = {i2[x]: i1[x] for x in range(p.j.n)}
    k2 = p.a2.n - p.j.n
    if max_extra is None:
        max_extra = k2

    def has_square_embedding(g: ColoredGraph) -> bool:
        return bool(find_induced_embeddings(g, p.a2, limit=1, fixed=fixed))

    frontier = [p.a1]
    for depth in range(max_extra + 1):
        nxt = []
        for g in frontier:
            if has_square_embedding(g):
                return True
            if depth == max_extra:
                continue
            for color in COLORS:
                for mask in range(1 << g.n):
                    cand = g.with_vertex(color, mask)
                    if member(spec, cand):
                        nxt.append(cand)
        frontier = nxt
    return False
