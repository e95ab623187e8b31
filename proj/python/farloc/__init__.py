"""Far-memory placement simulator."""

from ._core import (
    BenchConfig,
    BenchReport,
    CapacityExhausted,
    ConfigError,
    LinkComposition,
    SwapStats,
    UsageError,
    ZipfSampler,
    fnv64,
    run_benchmark,
    variants,
)


def run(variant="plain", L_percent=50.0, alpha=0.8, update_ratio=0.05, **overrides):
    """Runs one benchmark cell; keyword overrides set other BenchConfig fields."""
    cfg = BenchConfig()
    cfg.variant = variant
    cfg.L_percent = L_percent
    cfg.alpha = alpha
    cfg.update_ratio = update_ratio
    for name, value in overrides.items():
        if not hasattr(cfg, name):
            raise AttributeError(f"BenchConfig has no field {name!r}")
        setattr(cfg, name, value)
    return run_benchmark(cfg)


__all__ = [
    "BenchConfig",
    "BenchReport",
    "CapacityExhausted",
    "ConfigError",
    "LinkComposition",
    "SwapStats",
    "UsageError",
    "ZipfSampler",
    "fnv64",
    "run",
    "run_benchmark",
    "variants",
]
