"""Almost flat Cech cocycles, stably relative bundles, and quasi-representations."""

from .policy import DEFAULT_POLICY, NumericPolicy
from .complexes import (
    SimplicialPair,
    StarCover,
    NerveTree,
    GeneratorData,
    build_star_cover,
    build_tree,
    generators,
    loop_fill,
    orient_surface,
)
from .cocycles import (
    CechCocycle,
    PartitionRoot,
    Morphism,
    ExactIntertwiner,
    Frame,
    identity_cocycle,
    identity_morphism,
    flatness,
    triangle_defect,
    hom_defect,
    frame,
    unitary_act,
    normalize_tree,
    trivialize_simply_connected,
    gauge_correct,
    gauge_homotopy,
    polar_round,
    extend_subcover,
    extend_morphism,
    pullback,
)
from .relative import (
    StablyRelativeCocycle,
    FlatnessCertificate,
    SurfaceKClass,
    measure,
    direct_sum,
    inverse,
    k_class,
    move_collapse,
    move_kill,
    homotopy_path,
    build_cylinder,
    cylinder_flatten,
    dist_bundle,
)
from .quasireps import (
    QuasiRep,
    StablyRelativeQuasiRep,
    WordOracle,
    rep_defect,
    intertwiner_defect,
    alpha,
    beta,
    bold_alpha,
    bold_beta,
    dist_rep,
    normalize_relative_rep,
)
from .constructions import (
    DoubleComplex,
    build_double,
    unfold_to_double,
    fold_to_relative,
    amalgam_rep,
    FiniteCovering,
    covering_pushforward,
    DiscreteConnection,
    curvature_defect,
    holonomy_to_cech,
)

__version__ = "0.1.0"
