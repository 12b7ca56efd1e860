"""
DGBO Harness Module
Run configuration, sweeps, verification checks and CLI command bodies.
"""

from .run_config import (
    RunConfig,
    load_run_config,
    apply_overrides,
    config_hash,
)
from .sweep import (
    SweepCell,
    SweepResult,
    run_sweep,
)
from .verify import (
    CHECKS,
    CheckResult,
    VerifyContext,
    run_checks,
)
from .commands import (
    cmd_ground_state,
    cmd_evolve,
    cmd_threshold,
    cmd_sweep,
    cmd_verify,
)


__all__ = [
    'RunConfig',
    'load_run_config',
    'apply_overrides',
    'config_hash',
    'SweepCell',
    'SweepResult',
    'run_sweep',
    'CHECKS',
    'CheckResult',
    'VerifyContext',
    'run_checks',
    'cmd_ground_state',
    'cmd_evolve',
    'cmd_threshold',
    'cmd_sweep',
    'cmd_verify',
]
