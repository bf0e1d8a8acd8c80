"""Phase structure of a mean-field cell gas.

A fluid of particles in N cells of volume upsilon, with uniform pairwise
attraction and a stronger in-cell repulsion, admits an exact
large-deviation description in a single collective field.  This package
computes that description: occupation series and their cumulants, the
stationary-point structure of the free-energy landscape, spinodal and
coexistence loci, the critical point, thermodynamic observables, and
exact finite-N partition functions used to validate the N -> infinity
limit.

Hot numeric kernels are compiled (Cython) with a pure-Python fallback;
set CW_PHASE_PURE_PYTHON=1 to force the fallback.
"""

from ._backend import backend_name
from .errors import (
    CwPhaseError,
    InvalidParamsError,
    NoConvergenceError,
    PreconditionError,
)
from .oracle import (
    ConvergenceRow,
    FiniteNResult,
    cell_weight,
    convergence_report,
    exact_log_xi,
    laplace_log_xi,
)
from .params import DEFAULT_ACCURACY, ModelParams, SeriesAccuracy, ThermoPoint
from .phase import (
    CoexistenceResult,
    CriticalPoint,
    PhaseClassification,
    branch_energies,
    classify,
    coexistence_mu,
    critical_point,
    d_of_mu,
    line_is_single_phase,
)
from .series import MomentSums, big_e, e1, e2, moment_sums, tail_variance_limit
from .stationary import (
    SpinodalInterval,
    StationaryPoint,
    mu_bar,
    small_p_bound,
    spinodal,
    stationary_points,
    x_of_y,
)
from .thermo import (
    IsothermPoint,
    OccupationDistribution,
    density,
    isotherm,
    occupation_distribution,
    pressure,
)

__version__ = "0.1.0"

__all__ = [
    "CwPhaseError",
    "InvalidParamsError",
    "NoConvergenceError",
    "PreconditionError",
    "ModelParams",
    "ThermoPoint",
    "SeriesAccuracy",
    "DEFAULT_ACCURACY",
    "MomentSums",
    "moment_sums",
    "big_e",
    "e1",
    "e2",
    "tail_variance_limit",
    "StationaryPoint",
    "SpinodalInterval",
    "x_of_y",
    "mu_bar",
    "stationary_points",
    "spinodal",
    "small_p_bound",
    "PhaseClassification",
    "CoexistenceResult",
    "CriticalPoint",
    "classify",
    "branch_energies",
    "d_of_mu",
    "coexistence_mu",
    "critical_point",
    "line_is_single_phase",
    "OccupationDistribution",
    "IsothermPoint",
    "pressure",
    "density",
    "occupation_distribution",
    "isotherm",
    "cell_weight",
    "exact_log_xi",
    "laplace_log_xi",
    "convergence_report",
    "FiniteNResult",
    "ConvergenceRow",
    "backend_name",
    "__version__",
]
