"""fiber-atlas: fiber topology of real polynomial maps along arcs.

Exact polynomial algebra with real-root isolation, Gauss-Newton fiber
sampling, Vietoris-Rips homology over Z/2, constrained Morse data, and
arc-scan machinery that looks for atypical fibers, packaged with a built-in
verification case whose endpoint fiber is atypical yet homologically
indistinguishable from its neighbors.
"""

__version__ = "0.1.0"

from .poly import (
    BatchEvaluator,
    BatchMap,
    Polynomial,
    PolynomialMap,
    UnivariatePolynomial,
    hessian,
    parse_polynomial,
)
from .realroots import (
    RootIsolationResult,
    count_real_roots,
    isolate_real_roots,
    square_free_part,
)
from .variety import (
    CriticalPoint,
    CriticalPointResult,
    FiberEmptyWithinBall,
    FiberSample,
    InconclusiveMargin,
    MaxIterExceeded,
    MilnorReport,
    RestrictedFunction,
    SingularStep,
    SingularityCertificate,
    certify_no_singularity_on_arc,
    constrained_critical_points,
    estimate_milnor_radius,
    project_to_fiber,
    sample_fiber,
)
from .rips import (
    ComplexTooLarge,
    DegenerateCloud,
    LoopNotCycle,
    PersistenceSummary,
    RipsComplex,
    betti_summary,
    euler_estimate,
    farthest_point_subsample,
    loop_is_boundary,
    persistence_pairs,
    rips_betti1,
    rips_components,
    select_scale,
)
from .arcscan import (
    Arc,
    ArcReport,
    ChainingAmbiguity,
    CutLocusNotACircle,
    LoopTrace,
    LoopTraceConfig,
    ScanConfig,
    VerdictRecord,
    atypicality_verdict,
    detect_vanishing_components,
    scan_arc,
    track_loop_along_arc,
)
from .showcase import (
    ShowcaseBundle,
    ShowcaseConfig,
    ShowcaseReport,
    build_bundle,
    verify_all,
)

__all__ = [name for name in dir() if not name.startswith("_")]
