"""arbor: a finite-quotient laboratory for groups acting on rooted trees."""

from .errors import (
    ArborError,
    CapacityError,
    InvariantViolation,
    ParseError,
    UnsupportedError,
)
from .groupdef import GroupDef, evaluate_word, parse_group, parse_word, print_group, project
from .haar import (
    BoundLedger,
    DensityRecord,
    TorsionEstimate,
    TorsionProfile,
    bound_ledger,
    capped_census,
    census_P,
    check_fiber_uniformity,
    density_curve,
    estimate_torsion_density,
    haar_of_cylinder,
    orbit_spectrum,
    sample_uniform,
    section_product_check,
    torsion_profile,
)
from .catalog import (
    AbstractSemidirectQuotient,
    abstract_quotient,
    catalog_names,
    full_aut,
    grigorchuk,
    gupta_sidki,
    load_catalog_group,
    odometer,
    paper_realization,
    torsion_fraction,
    torsion_fraction_closed_form,
    verify_power_identity,
)
from .portraits import Portrait, psi_compose, random_portrait
from .quotients import (
    DEFAULT_ELEMENT_CAP,
    EnumeratedQuotient,
    FiniteQuotient,
    StabChainQuotient,
    SubgroupHandle,
    build_stab_chain,
    enumerate_quotient,
    index,
    is_branch_at,
    is_level_transitive,
    is_weakly_branch_at,
    level_stabilizer,
    metadata_rist_level,
    normal_closure,
    orbits,
    profinite_rist_projection,
    rigid_level_stabilizer,
    rigid_stabilizer,
    section_set,
    subgroup_generated,
)
from .trees import TreeShape, Vertex, format_vertex, parse_vertex

__version__ = "0.1.0"

__all__ = [
    "ArborError",
    "CapacityError",
    "InvariantViolation",
    "ParseError",
    "UnsupportedError",
    "GroupDef",
    "parse_group",
    "print_group",
    "parse_word",
    "project",
    "evaluate_word",
    "TreeShape",
    "Vertex",
    "format_vertex",
    "parse_vertex",
    "Portrait",
    "psi_compose",
    "random_portrait",
    "FiniteQuotient",
    "EnumeratedQuotient",
    "StabChainQuotient",
    "SubgroupHandle",
    "enumerate_quotient",
    "build_stab_chain",
    "level_stabilizer",
    "rigid_stabilizer",
    "rigid_level_stabilizer",
    "profinite_rist_projection",
    "metadata_rist_level",
    "normal_closure",
    "subgroup_generated",
    "orbits",
    "is_level_transitive",
    "is_weakly_branch_at",
    "is_branch_at",
    "section_set",
    "index",
    "DEFAULT_ELEMENT_CAP",
    "DensityRecord",
    "TorsionProfile",
    "TorsionEstimate",
    "BoundLedger",
    "haar_of_cylinder",
    "check_fiber_uniformity",
    "torsion_profile",
    "census_P",
    "capped_census",
    "density_curve",
    "bound_ledger",
    "orbit_spectrum",
    "section_product_check",
    "sample_uniform",
    "estimate_torsion_density",
    "grigorchuk",
    "gupta_sidki",
    "odometer",
    "full_aut",
    "paper_realization",
    "AbstractSemidirectQuotient",
    "abstract_quotient",
    "torsion_fraction",
    "torsion_fraction_closed_form",
    "verify_power_identity",
    "catalog_names",
    "load_catalog_group",
]
