"""Kernel estimation of persistence intensities and densities, linear
representations of persistence measures, and optimal transport between them.
"""
from .core import (
    DiagramSample,
    OmegaBox,
    PersistenceDiagram,
    PersistencePair,
    diag_distance,
    diag_projection,
    mass_above,
    omega_weighted_volume,
    total_persistence,
)
from .errors import PDError
from .generators import (
    CircleSpec,
    OrbitSpec,
    SyntheticMeasureSpec,
    gen_circle,
    gen_counterexample_pair,
    gen_orbit,
    gen_synthetic_sample,
)
from .harness import ConvergenceConfig, RateReport, fit_rate, reproduce_figure, run_convergence
from .kde import (
    GridSpec,
    KernelSpec,
    ScalarField,
    estimate_density,
    estimate_intensity,
    weighted_sup_error,
)
from .representations import (
    BettiQuery,
    SurfaceSpec,
    betti_curve,
    betti_empirical,
    betti_from_field,
    linear_functional,
    persistence_surface,
)
from .transport import (
    Atoms,
    TransportPlan,
    constructed_transport,
    ot_distance,
    ot_distance_bruteforce,
    ot_weighted,
    sandwich_check,
    theorem1_bound,
)
from .vr import FiltrationSpec, PointCloud, batch_rips, rips_persistence

__version__ = "0.1.0"
