"""Coinless (staggered) quantum walks on the line and on even cycles."""

from .core import (
    CycleState,
    LineState,
    NormalizationError,
    TopologyError,
    WalkParams,
    initial_state,
    pdf,
    write_rows,
)
from .tessellation import (
    Block,
    GeneralizedHop,
    Tessellation,
    reflection_operator,
    three_site_tessellations,
    two_site_tessellations,
    validate_generalized,
    validate_tessellation,
)
from .evolution import (
    CoinedState,
    CoinParams,
    coinless_to_coined,
    step_blockvec,
    step_coined,
    step_coinless2,
    step_coinless3,
)
from .spectral import localization_weight, reduced2, reduced4, spectral_window
from .asymptotics import asymptotic_pdf, envelope, saddle
from .cycle import (
    cycle_spectrum,
    limiting_pdf,
    mixing_time,
    termf_decomposition,
    time_averaged_pdf,
    tvd,
    tvd_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
