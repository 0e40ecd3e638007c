"""Finite approximants of the countable ultrahomogeneous 2-colored graphs
whose color classes are disjoint unions of cliques, with an executable
classifier for the family they approximate."""

from .amalgam import (
    AmalgamationCertificate,
    AmalgamProblem,
    AmalgamResult,
    ClassSpec,
    amalgam_f21,
    amalgam_f22,
    brute_amalgam_exists,
    check_amalgamation_property,
    dumps_spec,
    enumerate_in_spec,
    generic_amalgam,
    iter_one_point_problems,
    load_spec_file,
    make_spec,
    member,
    spec_a_rb,
    spec_bipartite,
    spec_f21,
    spec_f22,
    spec_f_inf_1,
    spec_f_inf_2,
    spec_f_inf_inf,
    spec_from_json_obj,
    spec_mono,
    spec_to_json_obj,
    swap_spec,
    validate_problem,
    validate_result,
)
from .classify import (
    ClassificationEvidence,
    FamilyLabel,
    classify,
    is_ultrahomogeneous_finite,
    k_homogeneity,
    piecewise_check,
    red_edge_blue_clique_scan,
    small_clique_shatter_violations,
    theorem_a_predicate,
)
from .errors import (
    GraphFormatError,
    InternalInvariantError,
    PreconditionError,
    SearchBudgetExceeded,
    SpecFormatError,
    UnclassifiableAtLevel,
)
from .graphs import (
    BLUE,
    COLORS,
    RED,
    UNBOUNDED,
    ColorClassProfile,
    ColoredGraph,
    PartialMap,
    automorphisms,
    blow_up,
    canonical_key,
    class_complement,
    class_profile,
    cross_complement,
    detect_blow_up,
    find_induced_embeddings,
    from_text,
    induced_subgraph,
    is_isomorphic,
    load_graph_file,
    swap_colors,
    to_text,
)
from .limits import (
    APPROXIMANT_FORMAT,
    Approximant,
    build_family,
    build_g_rb,
    build_generic_bipartite,
    clique_genericity_violations,
    dumps_approximant,
    extension_closure,
    load_approximant_file,
    missing_extensions,
    verify_extension_property,
)
from .patterns import (
    OmittedSet,
    Pattern,
    catalog,
    check_omitted_structure,
    contains_induced,
    enumerate_colored_graphs,
    match_catalog_name,
    minimality_witnesses,
    minimally_omitted,
    pattern_by_name,
    tilde_consistency,
)

__version__ = "0.1.0"
