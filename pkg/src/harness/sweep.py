"""
DGBO Sweep
Threshold classification over a (beta, k, amplitude) grid.

Cells are grouped by (beta, k) so each group computes its ground state
once. Groups run in a process pool when more than one worker is allowed;
results are sorted by (beta, k, amplitude) so the output does not depend
on scheduling.
"""
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src.core.evolution import EvolutionConfig, evolve
from src.core.exceptions import DGBOError
from src.core.ground_state import PetviashviliConfig, petviashvili_solve
from src.core.spectral import ModelParams, make_grid
from src.core.threshold import ThresholdConfig, check_conditions, verify_apriori_bound, with_trajectory
from src.harness.initial_data import base_profile
from src.harness.run_config import InitialDataSection, RunConfig

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "beta",
    "k",
    "amplitude",
    "status",
    "admissible",
    "certified",
    "energy_ratio",
    "gradient_ratio",
    "lhs_energy_mass",
    "rhs_energy_mass",
    "lhs_gradient_mass",
    "rhs_gradient_mass",
    "x0",
    "f_x0",
    "trajectory_ok",
    "error",
]


@dataclass(frozen=True)
class SweepCell:
    beta: float
    k: int
    amplitude: float
    status: str
    report: Optional[Dict[str, Any]] = None
    error: Optional[str] = None

    @property
    def key(self) -> Tuple[float, int, float]:
        return (self.beta, self.k, self.amplitude)

    def row(self) -> Dict[str, Any]:
        report = self.report or {}
        values: Dict[str, Any] = {"beta": self.beta, "k": self.k, "amplitude": self.amplitude, "status": self.status}
        for column in CSV_COLUMNS[4:-1]:
            values[column] = report.get(column)
        values["error"] = self.error
        return values


@dataclass(frozen=True)
class SweepResult:
    cells: Tuple[SweepCell, ...]
    monotone_boundary: Dict[Tuple[float, int], bool] = field(default_factory=dict)

    @property
    def succeeded(self) -> int:
        return sum(1 for cell in self.cells if cell.status == "ok")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cells": [
                {"beta": c.beta, "k": c.k, "amplitude": c.amplitude, "status": c.status, "error": c.error, "report": c.report}
                for c in self.cells
            ],
            "monotone_boundary": [
                {"beta": beta, "k": k, "monotone": flag} for (beta, k), flag in sorted(self.monotone_boundary.items())
            ],
        }


def _group_tasks(config: RunConfig) -> List[Dict[str, Any]]:
    sweep = config.sweep
    amplitudes = sorted(set(sweep.amplitudes))
    return [
        {
            "beta": float(beta),
            "k": int(k),
            "amplitudes": amplitudes,
            "n_points": config.grid.n_points,
            "length": config.grid.length,
            "ground_state": config.ground_state.model_dump(),
            "initial_data": config.initial_data.model_dump(),
            "threshold": config.threshold.certification().model_dump(),
            "evolution": config.evolution.model_dump() if config.threshold.run_evolution else None,
        }
        for beta, k in itertools.product(sorted(set(sweep.betas)), sorted(set(sweep.ks)))
    ]


def evaluate_group(task: Dict[str, Any]) -> List[SweepCell]:
    """Classify every amplitude of one (beta, k) group."""
    beta, k, amplitudes = task["beta"], task["k"], task["amplitudes"]

    def failed(status: str, message: str) -> List[SweepCell]:
        return [SweepCell(beta, k, amplitude, status, error=message) for amplitude in amplitudes]

    params = ModelParams(beta, k)
    if not params.theorem_applies:
        return failed("inapplicable", f"k={k} <= 2*beta={2 * beta:g}")
    grid = make_grid(task["n_points"], task["length"])
    try:
        state = petviashvili_solve(params, grid, PetviashviliConfig(**task["ground_state"]))
    except DGBOError as exc:
        logger.error(f"Ground state failed for beta={beta}, k={k}: {exc}")
        return failed("error", str(exc))

    certification = ThresholdConfig(**task["threshold"])
    shape = base_profile(InitialDataSection(**task["initial_data"]), grid, state)
    evolution = EvolutionConfig(**task["evolution"]) if task["evolution"] else None
    cells = []
    for amplitude in amplitudes:
        try:
            u0 = amplitude * shape
            report = check_conditions(u0, state, params, certification)
            if evolution is not None and report.admissible:
                record = evolve(u0, params, evolution)
                report = with_trajectory(report, verify_apriori_bound(record, report, state))
            cells.append(SweepCell(beta, k, amplitude, "ok", report=report.to_dict()))
        except DGBOError as exc:
            logger.error(f"Cell beta={beta}, k={k}, amplitude={amplitude} failed: {exc}")
            cells.append(SweepCell(beta, k, amplitude, "error", error=str(exc)))
    return cells


def boundary_is_monotone(cells: List[SweepCell]) -> Dict[Tuple[float, int], bool]:
    """
    Per (beta, k): admissible cells must form a prefix in amplitude order.

    Columns without any successful cell are reported as monotone.
    """
    result: Dict[Tuple[float, int], bool] = {}
    ordered = sorted(cells, key=lambda cell: cell.key)
    for key, group in itertools.groupby(ordered, key=lambda cell: (cell.beta, cell.k)):
        verdicts = [bool(cell.report["admissible"]) for cell in group if cell.status == "ok" and cell.report]
        result[key] = all(earlier or not later for earlier, later in zip(verdicts, verdicts[1:]))
    return result


def run_sweep(config: RunConfig) -> SweepResult:
    """Evaluate the configured sweep; cells keep their own error tags."""
    tasks = _group_tasks(config)
    workers = min(config.threads, len(tasks))
    logger.info(f"Sweep over {len(tasks)} (beta, k) groups with {workers} worker(s)")
    if workers <= 1:
        groups = [evaluate_group(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(evaluate_group, tasks))
    cells = sorted(itertools.chain.from_iterable(groups), key=lambda cell: cell.key)
    return SweepResult(tuple(cells), boundary_is_monotone(cells))
