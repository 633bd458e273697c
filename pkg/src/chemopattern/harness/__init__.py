from .catalog import scenario_catalog
from .config import (ConfigError, InitField, InitSpec, ScenarioConfig,
                     format_config, initial_state, parse_config, with_axis_value)
from .reports import (AnalyticsReport, analyze_config, simulate_config,
                      summarize_run, sweep_config)

__all__ = [
    "AnalyticsReport", "ConfigError", "InitField", "InitSpec", "ScenarioConfig",
    "analyze_config", "format_config", "initial_state", "parse_config",
    "scenario_catalog", "simulate_config", "summarize_run", "sweep_config",
    "with_axis_value",
]
