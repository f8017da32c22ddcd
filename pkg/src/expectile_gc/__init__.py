"""Model-free Granger causality tests in expectiles via M-vine copulas."""

__version__ = "0.1.0"

from .bicop import BivariateCopula, CopulaFamily, fit_mle, select_family
from .dgp import DGP_TABLE, DgpSpec, p3_analytic_oracles, simulate_dgp, skewed_t_sample
from .errors import DomainError, EGError, ModelStateError, NumericError, SchemaError
from .expectile import (
    ExpectileLevel,
    ExpectileSolveSettings,
    asymmetric_loss,
    empirical_expectile,
    loss_derivative,
    mean_expectile_loss,
    normal_expectile,
)
from .gctest import (
    GcTestResult,
    TestConfig,
    bootstrap_p_value,
    gc_statistic,
    linear_f_test,
    run_joint_test,
    run_pairwise_test,
)
from .marginals import EmpiricalMarginal, fit_empirical, log_returns
from .mc import McReport, mc_study
from .mvine import (
    MVineModel,
    SeriesPanel,
    conditional_predictive_sample,
    fit,
    simulate_null_sample,
    simulate_path,
)
from .rng import RandomStream
