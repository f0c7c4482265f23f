"""Single-cell closed forms, multi-cell algorithms and the uniform-power baseline."""

from .fixed_point import CellUpdate, PmIterate, PmResult, run_fixed_point
from .power_min import dtapc_pm, interference_map, per_cell_pm
from .properties import (
    find_feasibility_edge,
    fixed_point_residual,
    interference_property_check,
    minimality_check,
    uniqueness_check,
)
from .rate_max import (
    CellCompliance,
    RmResult,
    coupled_power_cap,
    dtapc_rm,
    effective_gain,
    effective_gains,
    per_cell_rm,
)
from .single_cell import (
    KktResiduals,
    SingleCellProblem,
    SingleCellSolution,
    kkt_residuals,
    min_power_of_demands,
    pm_sc,
    rm_sc,
)
from .status import RmMode, SolveStatus
from .uniform_power import opv_pm, per_cell_opv

__all__ = [
    "CellCompliance",
    "CellUpdate",
    "KktResiduals",
    "PmIterate",
    "PmResult",
    "RmMode",
    "RmResult",
    "SingleCellProblem",
    "SingleCellSolution",
    "SolveStatus",
    "coupled_power_cap",
    "dtapc_pm",
    "dtapc_rm",
    "effective_gain",
    "effective_gains",
    "find_feasibility_edge",
    "fixed_point_residual",
    "interference_map",
    "interference_property_check",
    "kkt_residuals",
    "min_power_of_demands",
    "minimality_check",
    "opv_pm",
    "per_cell_opv",
    "per_cell_pm",
    "per_cell_rm",
    "pm_sc",
    "rm_sc",
    "run_fixed_point",
    "uniqueness_check",
]
