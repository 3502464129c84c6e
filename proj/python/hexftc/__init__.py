from ._core import (
    ConfigError,
    HexftcError,
    allocate,
    analyze,
    controllability_rank,
    mix,
    mixer_matrix,
    run,
    scenarios,
    select_model,
    solve_lyapunov,
    sweep,
)

__all__ = [
    "ConfigError",
    "HexftcError",
    "allocate",
    "analyze",
    "controllability_rank",
    "mix",
    "mixer_matrix",
    "run",
    "scenarios",
    "select_model",
    "solve_lyapunov",
    "sweep",
]
