"""Minimum squared Hellinger distance to the frontier Gaussian as a market invariant."""

__version__ = "0.1.0"

from .density import EmpiricalDensity, bin_density, portfolio_series
from .errors import ConfigError, DomainError, InvariantError, NumericalError, ParseError
from .hellinger import hellinger_sq, hellinger_sq_quadrature_oracle, sqrt_normal_integral
from .market_data import (
    PriceCsvFormat,
    ReturnMatrix,
    SimulationSpec,
    load_prices,
    random_correlation,
    simulate_student_market,
)
from .markowitz import FrontierPoint, feasible_return_range, solve_min_variance
from .optimizer import (
    InvariantReport,
    OptimizerConfig,
    frontier_scan,
    project_to_constraint_set,
    solve_min_hellinger,
)
from .sensitivity import (
    PerturbationSpec,
    SensitivityReport,
    perturb_returns,
    sensitivity_binning,
    sensitivity_perturbation,
)
from .stats_core import NormalTarget, normal_cdf, sample_mean_cov
