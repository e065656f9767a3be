"""Matrix moment sequences on a real interval: cone tests, admissible
next-moment intervals, extensions, and identity verification."""

from .matrix_core import (
    BOUNDARY,
    DEFAULT_TOL,
    INSIDE,
    OUTSIDE,
    ClassVerdict,
    Tolerances,
    is_pd,
    is_psd,
    loewner_leq,
    parallel_sum,
    pinv,
    verdict_all,
)
from .hankel import (
    HankelView,
    MomentSequence,
    SchurChain,
    StructuralMatrices,
    build_hankel,
    reflected,
    schur_chain,
    structural,
    theta,
)
from .classes import (
    REPORT_KEYS,
    ClassReport,
    DerivedSequences,
    class_report,
    derive,
    is_F_nnd,
    is_F_pd,
    is_hankel_nnd,
    is_hankel_nnd_extendable,
    is_hankel_pd,
    is_K_nnd,
    is_K_nnd_extendable,
    is_L_nnd,
    is_L_nnd_extendable,
    reflect_class_dual,
)
from .intervals import (
    SectionInterval,
    all_sections,
    ball_coordinate,
    ball_point,
    endpoints,
    is_completely_degenerate,
    length_recursion,
    membership,
    verify_parallel_identity,
)
from .extensions import (
    DegenerateTailReport,
    ExtensionPolicy,
    degenerate_tail_check,
    extend,
    random_F,
)

__version__ = "0.1.0"

__all__ = [
    "BOUNDARY",
    "DEFAULT_TOL",
    "INSIDE",
    "OUTSIDE",
    "ClassVerdict",
    "Tolerances",
    "is_pd",
    "is_psd",
    "loewner_leq",
    "parallel_sum",
    "pinv",
    "verdict_all",
    "HankelView",
    "MomentSequence",
    "SchurChain",
    "StructuralMatrices",
    "build_hankel",
    "reflected",
    "schur_chain",
    "structural",
    "theta",
    "REPORT_KEYS",
    "ClassReport",
    "DerivedSequences",
    "class_report",
    "derive",
    "is_F_nnd",
    "is_F_pd",
    "is_hankel_nnd",
    "is_hankel_nnd_extendable",
    "is_hankel_pd",
    "is_K_nnd",
    "is_K_nnd_extendable",
    "is_L_nnd",
    "is_L_nnd_extendable",
    "reflect_class_dual",
    "SectionInterval",
    "all_sections",
    "ball_coordinate",
    "ball_point",
    "endpoints",
    "is_completely_degenerate",
    "length_recursion",
    "membership",
    "verify_parallel_identity",
    "DegenerateTailReport",
    "ExtensionPolicy",
    "degenerate_tail_check",
    "extend",
    "random_F",
    "__version__",
]
