from ._energyshield import (
    BarrierConfig,
    Config,
    ConfigError,
    ControlInput,
    EmptySafeSet,
    VehicleParams,
    VehicleState,
    barrier_h,
    calibrate,
    delta_max,
    r_min,
    run,
    run_episode,
    shield,
    solve_nu,
    validate_monitor,
)

__all__ = [
    "BarrierConfig",
    "Config",
    "ConfigError",
    "ControlInput",
    "EmptySafeSet",
    "VehicleParams",
    "VehicleState",
    "barrier_h",
    "calibrate",
    "delta_max",
    "r_min",
    "run",
    "run_episode",
    "shield",
    "solve_nu",
    "validate_monitor",
]
