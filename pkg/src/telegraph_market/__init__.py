"""Pricing and hedging in markets driven by jump telegraph processes."""

from .errors import ArbitrageError, BudgetError, DivergenceError, TruncationError
from .model import (
    ModelParams,
    MomentConstants,
    RegimePath,
    bond_price,
    conditional_means,
    jump_value,
    kappa,
    linear_transform_coeffs,
    martingale_defect,
    regime_at,
    sample_path,
    stock_price,
    switch_count,
    telegraph_value,
)
from .densities import (
    DensityParams,
    DensityValue,
    density_total,
    kolmogorov_residual,
    mgf,
    p_n,
    p_n_continuous,
    p_n_table,
    q_n,
)
from .measure import (
    MartingaleIntensities,
    NoArbitrageReport,
    girsanov_density,
    martingale_intensities,
    no_arbitrage_check,
)
from .pricing import (
    CallSpec,
    PriceBreakdown,
    SeriesControls,
    call_price,
    call_value_surface,
    european_price_F,
    merton_price,
    symmetric_price_check,
)
from .hedging import (
    HedgePosition,
    ReplicationStats,
    hedge_ratio,
    hedge_ratio_at_jump,
    make_call_pricer,
    pde_residual,
    replication_backtest,
)
from .quantile import (
    Budget,
    QuantileSolution,
    insurance_budget,
    solve_budget_gamma,
    solve_dual,
    success_probability,
    threshold_z,
)
from .mc import (
    ArbitrageDemoResult,
    McEstimate,
    arbitrage_demo,
    limit_scaling_check,
    mc_price,
    mc_price_girsanov,
    mc_success_probability,
)

__all__ = [
    "ArbitrageError",
    "BudgetError",
    "DivergenceError",
    "TruncationError",
    "ModelParams",
    "MomentConstants",
    "RegimePath",
    "bond_price",
    "conditional_means",
    "jump_value",
    "kappa",
    "linear_transform_coeffs",
    "martingale_defect",
    "regime_at",
    "sample_path",
    "stock_price",
    "switch_count",
    "telegraph_value",
    "DensityParams",
    "DensityValue",
    "density_total",
    "kolmogorov_residual",
    "mgf",
    "p_n",
    "p_n_continuous",
    "p_n_table",
    "q_n",
    "MartingaleIntensities",
    "NoArbitrageReport",
    "girsanov_density",
    "martingale_intensities",
    "no_arbitrage_check",
    "CallSpec",
    "PriceBreakdown",
    "SeriesControls",
    "call_price",
    "call_value_surface",
    "european_price_F",
    "merton_price",
    "symmetric_price_check",
    "HedgePosition",
    "ReplicationStats",
    "hedge_ratio",
    "hedge_ratio_at_jump",
    "make_call_pricer",
    "pde_residual",
    "replication_backtest",
    "Budget",
    "QuantileSolution",
    "insurance_budget",
    "solve_budget_gamma",
    "solve_dual",
    "success_probability",
    "threshold_z",
    "ArbitrageDemoResult",
    "McEstimate",
    "arbitrage_demo",
    "limit_scaling_check",
    "mc_price",
    "mc_price_girsanov",
    "mc_success_probability",
]
