"""Point-vortex dynamics on closed two-dimensional surfaces.

Surfaces carry conformal metrics in holomorphic charts; vortex motion
couples the positions to circulation variables around homology cycles
through the Green function of the Laplace-Beltrami operator.  Built-in
surfaces: the round sphere, flat tori, and the Schottky double of the
unit disk.
"""

from .connections import (
    HolomorphicMap,
    affine_from_metric,
    bracket,
    compose,
    gaussian_curvature,
    holomorphic_derivative,
    identity_map,
    laplacian,
    mobius_inverse,
    mobius_map,
    projective_from_affine,
    transform_connection,
    wirtinger_dz,
)
from .dynamics import (
    CirculationState,
    PhaseState,
    Trajectory,
    VortexSystem,
    circulation_rates,
    circulation_state,
    flow_field,
    hamiltonian,
    vortex_velocities,
)
from .errors import (
    ChartError,
    CoincidentPointsError,
    CollisionError,
    ConfigError,
    InvalidMetricError,
    QuadratureError,
    SingularMapError,
    StepFailureError,
    VortexOnCycleError,
    VortexSurfError,
)
from .greens import (
    GreenModel,
    RegularExpansion,
    SphereGreen,
    TorusGreen,
    green_mean,
    green_model,
    numerical_regular_coeffs,
)
from .homology import (
    Cycle,
    HarmonicBasis,
    PeriodMatrix,
    conjugate_green_periods,
    contour_integral,
    harmonic_basis,
    integrate_one_form,
    period_matrix,
    star_basis_transform,
)
from .pairlab import (
    PairDiagnostics,
    PairRun,
    center_arrow,
    dipole_field,
    integrate_pair,
    kimura_deviation,
    kimura_table,
    pair_diagnostics,
    q_robin,
)
from .schottky import (
    DiskDouble,
    boundary_geodesic_residual,
    double_connection,
    double_green,
    double_metric,
    reflect,
    schwarz_function,
)
from .surface import (
    ChartPoint,
    FlatTorus,
    GeodesicState,
    Sphere,
    Surface,
    geodesic_integrate,
    geodesic_residual,
    metric_speed,
)

__version__ = "0.1.0"
