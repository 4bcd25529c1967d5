"""Split horospherical varieties as coloured fans: exact Mori-cone
machinery, contractions and flips with divisor tracking, the positive
root inequality, the rank-one classification, and low-degree curve
certificates produced by the reduction pipeline."""

from . import errors
from .divisors import (
    BDivisor,
    CartierData,
    anticanonical,
    cartier_data,
    divisor_basis,
    evaluate_pl,
    is_nef,
    picard_rank,
    picard_rank_via_principal,
)
from .fans import (
    Colour,
    ColouredCone,
    ColouredFan,
    ColouredLattice,
    Wall,
    cone,
    dimension,
    fan,
    orbit_closure_fan,
    star_subdivision,
    toric_lattice,
    validate_fan,
    walls,
)
from .mmp import (
    ApproximationCertificate,
    CurveCertificate,
    MMPStep,
    MMPTrace,
    OrbitMarker,
    find_approximation_curve,
    flag_curve,
    is_projective_space,
    nef_threshold,
    picard1_classify,
    picard1_curve,
    run_reduction,
)
from .mori import (
    ContractionResult,
    CurveClass,
    ExtremalRay,
    FlipTower,
    MoriCone,
    colour_curve_class,
    contract,
    fibre_fan,
    flip,
    flip_tower,
    mori_generators,
    wall_curve_class,
)
from .problem import ProblemFile, Report, load_problem, parse_problem, serialize_problem
from .rootsys import (
    DynkinDiagram,
    ParabolicChoice,
    RootSystem,
    b_coefficients,
    build_root_system,
    diagram,
    flag_dimension,
    is_product_of_projective_spaces,
    omega,
    pairing,
    root_system,
    verify_root_inequality,
)

__version__ = "0.1.0"
