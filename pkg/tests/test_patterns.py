"""Pattern catalog, induced containment, minimally-omitted computation."""

import itertools
import random

import pytest

from homoclique.errors import GraphFormatError
from homoclique.graphs import (
    BLUE,
    COLORS,
    RED,
    ColoredGraph,
    canonical_key,
    cross_complement,
    find_induced_embeddings,
    induced_subgraph,
    is_isomorphic,
    relabel,
)
from homoclique.patterns import (
    OmittedSet,
    catalog,
    check_omitted_structure,
    contains_induced,
    enumerate_colored_graphs,
    match_catalog_name,
    minimality_witnesses,
    minimally_omitted,
    mono_clique,
    mono_independent,
    mono_path3,
    pattern_by_name,
    tilde_consistency,
)


def _random_graph(rng: random.Random, n: int, p: float = 0.5) -> ColoredGraph:
    colors = [rng.choice((RED, BLUE)) for _ in range(n)]
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return ColoredGraph.from_edges(colors, edges)


# ============================================================
# oracles (independent re-derivations used for cross-checks)
# ============================================================


def _all_graphs_upto(max_n: int, colors: tuple[str, ...] = COLORS) -> dict[int, list[ColoredGraph]]:
    """Isomorph-free lists by brute dedupe over every labeled graph."""
    out: dict[int, list[ColoredGraph]] = {}
    for n in range(1, max_n + 1):
        seen: dict[tuple, ColoredGraph] = {}
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for cs in itertools.product(colors, repeat=n):
            for mask in range(1 << len(pairs)):
                g = ColoredGraph.from_edges(
                    cs, [p for k, p in enumerate(pairs) if mask >> k & 1])
                seen.setdefault(canonical_key(g), g)
        out[n] = list(seen.values())
    return out


def _minimally_omitted_reference(g: ColoredGraph, k: int,
                                 colors: tuple[str, ...] = COLORS) -> set[tuple]:
    """Omitted graphs all of whose one-vertex deletions are realized."""

    def realized(h: ColoredGraph) -> bool:
        return bool(find_induced_embeddings(g, h, limit=1))

    keys: set[tuple] = set()
    for n, reps in _all_graphs_upto(k, colors).items():
        for cand in reps:
            if realized(cand):
                continue
            minimal = all(
                realized(induced_subgraph(cand, [u for u in range(n) if u != v]))
                for v in range(n))
            if minimal:
                keys.add(canonical_key(cand))
    return keys


# ============================================================
# catalog
# ============================================================


def test_catalog_is_frozen():
    pats = catalog()
    assert [p.name for p in pats] == [
        "Tr", "Tr~", "Qr", "Tb", "Tb~", "Qb", "D", "D~",
        "P3_red", "P3_blue", "K:red:3", "Kbar:red:3",
    ]
    by_name = {p.name: p for p in pats}
    assert by_name["D"].graph.n == 4 and by_name["D"].graph.edge_count() == 5
    assert by_name["D~"].graph.n == 4 and by_name["D~"].graph.edge_count() == 3
    for name in ("Tr", "Tr~", "Qr", "Tb", "Tb~", "Qb"):
        assert by_name[name].graph.n == 3
    assert sum(p.parametric for p in pats) == 2
    assert by_name["K:red:3"].parametric and by_name["Kbar:red:3"].parametric
    # partner map is an involution and fixed points are the self-dual shapes
    assert all(by_name[p.tilde_partner].tilde_partner == p.name for p in pats)
    fixed_points = {p.name for p in pats if p.tilde_partner == p.name}
    assert fixed_points == {"Qr", "Qb", "P3_red", "P3_blue", "K:red:3", "Kbar:red:3"}


def test_tilde_partner_is_cross_complement():
    for p in catalog():
        image = cross_complement(p.graph)
        partner = pattern_by_name(p.tilde_partner)
        assert is_isomorphic(image, partner) is not None, p.name


def test_catalog_graphs_pairwise_nonisomorphic():
    keys = [canonical_key(p.graph) for p in catalog()]
    assert len(keys) == len(set(keys))


# ============================================================
# name resolution and recognition
# ============================================================


def test_pattern_by_name_fixed_and_parametric():
    d = pattern_by_name("D")
    assert d.n == 4 and d.edge_count() == 5
    k4 = pattern_by_name("K:red:4")
    assert k4.n == 4 and k4.edge_count() == 6 and set(k4.colors) == {RED}
    kbar2 = pattern_by_name("Kbar:blue:2")
    assert kbar2.n == 2 and kbar2.edge_count() == 0 and set(kbar2.colors) == {BLUE}


@pytest.mark.parametrize("bad", ["X", "K:red:x", "K:red:0", "K:purple:3", "K:red", "Q"])
def test_pattern_by_name_rejects(bad):
    with pytest.raises(GraphFormatError):
        pattern_by_name(bad)


def test_match_catalog_name_round_trip():
    rng = random.Random(11)
    for p in catalog():
        g = p.graph
        perm = list(range(g.n))
        rng.shuffle(perm)
        assert match_catalog_name(relabel(g, perm)) == p.name


def test_match_catalog_name_negative_and_mono():
    p4 = ColoredGraph.from_edges([RED] * 4, [(0, 1), (1, 2), (2, 3)])
    assert match_catalog_name(p4) is None
    assert match_catalog_name(mono_clique(BLUE, 2)) == "K:blue:2"
    assert match_catalog_name(mono_independent(BLUE, 4)) == "Kbar:blue:4"
    assert match_catalog_name(ColoredGraph((RED,), (0,))) == "K:red:1"


# ============================================================
# induced containment
# ============================================================


def test_contains_induced_hand_cases():
    d = pattern_by_name("D")
    hit = contains_induced(d, pattern_by_name("Qr"))
    assert hit is not None and hit.validate(pattern_by_name("Qr"), d)
    assert contains_induced(d, pattern_by_name("Tr")) is not None
    assert contains_induced(d, pattern_by_name("Tr~")) is None
    assert contains_induced(d, pattern_by_name("D~")) is None
    assert contains_induced(d, d) is not None


def test_contains_induced_requires_induced_not_sub():
    # K3 contains P3 as a subgraph but not as an induced one
    assert contains_induced(mono_clique(RED, 3), mono_path3(RED)) is None
    assert contains_induced(ColoredGraph.from_edges([RED] * 3, [(0, 1), (1, 2)]),
                            mono_path3(RED)) is not None


# ============================================================
# isomorph-free enumeration
# ============================================================


def test_enumerate_counts_match_brute_dedupe():
    reps = enumerate_colored_graphs(3)
    brute = _all_graphs_upto(3)
    for n in (1, 2, 3):
        assert len(reps[n]) == len(brute[n])
        assert {canonical_key(g) for g in reps[n]} == {
            canonical_key(g) for g in brute[n]}
    # frozen counts: 2 colors, 1..3 vertices
    assert [len(reps[n]) for n in (1, 2, 3)] == [2, 6, 20]


def test_enumerate_single_color_counts():
    reps = enumerate_colored_graphs(4, colors=(RED,))
    # unlabeled simple graphs: 1, 2, 4, 11
    assert [len(reps[n]) for n in (1, 2, 3, 4)] == [1, 2, 4, 11]


def test_enumerate_with_hereditary_prune():
    def keep(g: ColoredGraph) -> bool:
        return not find_induced_embeddings(g, mono_clique(RED, 3), limit=1)

    reps = enumerate_colored_graphs(4, colors=(RED,), keep=keep)
    full = enumerate_colored_graphs(4, colors=(RED,))
    for n in range(1, 5):
        expect = {canonical_key(g) for g in full[n] if keep(g)}
        assert {canonical_key(g) for g in reps[n]} == expect


# ============================================================
# minimally omitted sets
# ============================================================


def test_minimally_omitted_single_vertex_host():
    host = ColoredGraph((RED,), (0,))
    o = minimally_omitted(host, 2)
    assert o.bound == 2
    assert o.name_set() == {"K:blue:1", "K:red:2", "Kbar:red:2"}
    assert len(o.members) == 3
    assert None not in o.names()


def test_minimally_omitted_mono_triangle():
    o = minimally_omitted(mono_clique(RED, 3), 3, colors=(RED,))
    assert o.name_set() == {"Kbar:red:2"}


def test_minimally_omitted_rejects_bad_bound():
    with pytest.raises(GraphFormatError):
        minimally_omitted(ColoredGraph((RED,), (0,)), 0)


def test_minimally_omitted_matches_reference_sweep():
    rng = random.Random(2024)
    for trial in range(12):
        host = _random_graph(rng, rng.randint(1, 5))
        got = minimally_omitted(host, 3).canonical_keys()
        want = _minimally_omitted_reference(host, 3)
        assert got == want, f"trial {trial}"


def test_minimally_omitted_single_color_matches_reference():
    rng = random.Random(5)
    for _ in range(6):
        n = rng.randint(1, 5)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.5]
        host = ColoredGraph.from_edges([RED] * n, edges)
        got = minimally_omitted(host, 3, colors=(RED,)).canonical_keys()
        want = _minimally_omitted_reference(host, 3, colors=(RED,))
        assert got == want


def test_minimality_witnesses_cover_every_deletion():
    host = ColoredGraph((RED,), (0,))
    member = mono_clique(RED, 2)
    wit = minimality_witnesses(host, member)
    assert set(wit) == {0, 1}
    for v, emb in wit.items():
        rest = induced_subgraph(member, [u for u in range(member.n) if u != v])
        assert emb.validate(rest, host) and len(emb.as_dict()) == rest.n


def test_minimality_witnesses_rejects_non_minimal():
    host = ColoredGraph((RED,), (0,))
    non_minimal = ColoredGraph.from_edges([RED, BLUE], [(0, 1)])
    with pytest.raises(GraphFormatError):
        minimality_witnesses(host, non_minimal)


# ============================================================
# structural checks
# ============================================================


def test_check_omitted_structure_accepts_catalog_shapes():
    members = tuple(pattern_by_name(n) for n in ("D", "D~", "Tr", "Tb~", "P3_red"))
    report = check_omitted_structure(OmittedSet(bound=4, members=members))
    assert report.passed and report.violations == ()


def test_check_omitted_structure_flags_non_clique_side():
    bad = ColoredGraph.from_edges(
        [RED, RED, RED, BLUE], [(0, 1), (1, 2), (0, 3), (1, 3), (2, 3)])
    report = check_omitted_structure(OmittedSet(bound=4, members=(bad,)))
    assert not report.passed
    assert len(report.violations) == 1 and "red" in report.violations[0]


def test_check_omitted_structure_flags_clique_of_non_twins():
    # red K3 with a blue vertex seeing only two of the reds
    bad = ColoredGraph.from_edges(
        [RED, RED, RED, BLUE], [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
    report = check_omitted_structure(OmittedSet(bound=4, members=(bad,)))
    assert not report.passed


def test_check_omitted_structure_accepts_clique_of_twins():
    ok = ColoredGraph.from_edges(
        [RED, RED, RED, BLUE], [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)])
    report = check_omitted_structure(OmittedSet(bound=4, members=(ok,)))
    assert report.passed


# ============================================================
# cross-complement consistency
# ============================================================


def test_tilde_consistency_random_hosts():
    rng = random.Random(77)
    for _ in range(8):
        host = _random_graph(rng, rng.randint(2, 5))
        o = minimally_omitted(host, 3)
        ot = minimally_omitted(cross_complement(host), 3)
        assert tilde_consistency(o, ot)


def test_tilde_consistency_rejects_mismatches():
    host = pattern_by_name("D")
    o3 = minimally_omitted(host, 3)
    o2 = minimally_omitted(host, 2)
    assert not tilde_consistency(o3, o2)  # bound mismatch
    other = minimally_omitted(mono_clique(RED, 3), 3)
    assert not tilde_consistency(o3, other)
