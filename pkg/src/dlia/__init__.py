"""Link-level Monte Carlo simulator for downlink cellular interference alignment."""

from .channel import ChannelDrop, draw_drop, drop_seed
from .layout import CellLayout, LinkBudget, build_layout, kappa_policy, link_budget, link_budget_from_gamma, path_loss_db
from .scheduler import ScheduleDecision, schedule
from .schemes import FrontPrecoder, SchemeConfig, TxRxState, build_front_precoder, run_scheme
from .simulator import (
    ExperimentSpec,
    RateCurve,
    dof_slope,
    evaluate_sum_rate,
    resource_partitioning_curve,
    run_experiment,
    simulate_cell,
)

__version__ = "0.1.0"
