"""Agent-based local energy market simulator.

Households with PV, battery, EV and heat-pump devices are scheduled by a
per-agent optimizer, trade on a periodic double-sided auction and settle
imbalances against a retailer.  Runs are fully deterministic for a given
seed; paired runs with and without the local market quantify its effect on
average energy prices and transformer peak loads.
"""

__version__ = "0.1.0"

from .core import (
    MarketParams,
    HemsParams,
    GridTopology,
    Scenario,
    SimConfig,
    TimeSeries,
    cash_microeur,
    validate_config,
)

__all__ = [
    "MarketParams",
    "HemsParams",
    "GridTopology",
    "Scenario",
    "SimConfig",
    "TimeSeries",
    "cash_microeur",
    "validate_config",
    "__version__",
]
