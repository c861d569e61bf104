"""Gene module mining by consistent multi-view NMF over two ontology levels.

The pipeline: parse gene-phenotype associations and the phenotype
hierarchy, split the associations into parent-level and child-level views,
jointly factorize the two views with a shared gene factor (optionally tied
across levels by the hierarchy mapping penalty), threshold the gene factor
into overlapping clusters, and score the implied co-clustered gene pairs
against known gene relationships.
"""

__version__ = "0.1.0"

from .clusters import ClusterAssignment, co_membership_pairs, extract_clusters
from .exceptions import (
    CmnmfError,
    CycleError,
    EmptyInputError,
    EmptyViewError,
    LevelError,
    NumericalError,
    ParameterError,
    ParseError,
    ShapeMismatchError,
    UniverseError,
    UnknownTermError,
)
from .factorize import (
    FactorizationState,
    HierarchyMapping,
    HyperParams,
    fit_cmnmf,
    fit_nmf,
    normalize,
    objective,
)
from .grid import DEFAULT_GRID, GridResult, GridSpec, emit_heatmap, run_grid
from .metrics import (
    GroundTruthPairs,
    PairConfusion,
    confusion,
    ground_truth,
    indices,
    pathways_to_pairs,
)
from .ontology import (
    LabeledAssociations,
    OntologyHierarchy,
    SplitViews,
    build_associations,
    build_hierarchy,
    parse_associations,
    parse_hierarchy,
    parse_pathways,
    parse_truth_pairs,
    split_by_levels,
    true_path_enrich,
)
from .oracle import PlantedInstance, plant, planted_pairs

__all__ = [
    "__version__",
    "ClusterAssignment",
    "co_membership_pairs",
    "extract_clusters",
    "CmnmfError",
    "CycleError",
    "EmptyInputError",
    "EmptyViewError",
    "LevelError",
    "NumericalError",
    "ParameterError",
    "ParseError",
    "ShapeMismatchError",
    "UniverseError",
    "UnknownTermError",
    "FactorizationState",
    "HierarchyMapping",
    "HyperParams",
    "fit_cmnmf",
    "fit_nmf",
    "normalize",
    "objective",
    "DEFAULT_GRID",
    "GridResult",
    "GridSpec",
    "emit_heatmap",
    "run_grid",
    "GroundTruthPairs",
    "PairConfusion",
    "confusion",
    "ground_truth",
    "indices",
    "pathways_to_pairs",
    "LabeledAssociations",
    "OntologyHierarchy",
    "SplitViews",
    "build_associations",
    "build_hierarchy",
    "parse_associations",
    "parse_hierarchy",
    "parse_pathways",
    "parse_truth_pairs",
    "split_by_levels",
    "true_path_enrich",
    "PlantedInstance",
    "plant",
    "planted_pairs",
]
