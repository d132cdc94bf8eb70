"""Ends of infinite graphs at desk scale: region sequences, relative end
degrees, dominating vertices, and dense-subgraph-or-subdivision extraction."""

from .core import (
    EmptyExpansionError,
    EndHandle,
    GraphPresentation,
    Region,
    Truncation,
    build_truncation,
    format_vid,
    make_region,
    parse_vid,
)
from .enddegree import (
    DegreeEstimate,
    NotFoundAtDepth,
    RegionSequence,
    cut_off_region,
    ratio_profile,
    region_sequence,
    relative_degree_estimate,
)
from .extraction import (
    ExtractionOutcome,
    LayeredGraph,
    cut_off_all_ends,
    extract_dense_or_tkk,
    iterate_cutoffs,
    koenig_ray,
)
from .families import FamilySpec, make_presentation
from .minors import (
    MinorWitness,
    NotFound,
    TopoWitness,
    find_clique_minor,
    find_topological_clique,
    tkk_from_dominators,
    verify_minor_witness,
    verify_topo_witness,
)
from .separators import domination_certificate, min_vertex_separator, minimalize_separator

__all__ = [name for name in dir() if not name.startswith("_")]
