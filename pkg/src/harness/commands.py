"""
DGBO Harness Commands
One function per CLI subcommand. Each takes a validated RunConfig, writes
its artifacts under the configured output directory and returns the
process exit code. Errors from the numerical core propagate as DGBOError
subclasses and are mapped to exit codes by the CLI.
"""
import csv
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.core.artifacts import (
    NUMBER_FORMAT,
    digest,
    read_json,
    trajectory_summary,
    write_field,
    write_ground_state,
    write_json,
    write_snapshots,
    write_trajectory,
)
from src.core.evolution import evolve
from src.core.exceptions import ConfigError, InapplicableTheoremError
from src.core.ground_state import closed_form_oracle, petviashvili_solve
from src.core.spectral import linf_norm
from src.core.threshold import check_conditions, verify_apriori_bound, with_trajectory
from src.harness.initial_data import build_initial_data, obtain_ground_state
from src.harness.run_config import RunConfig, config_hash
from src.harness.sweep import CSV_COLUMNS, run_sweep
from src.harness.verify import VerifyContext, run_checks

logger = logging.getLogger(__name__)


def provenance(config: RunConfig) -> Dict[str, Any]:
    from src import __version__

    return {
        "version": __version__,
        "config_hash": config_hash(config),
        "seed": config.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _output_dir(config: RunConfig) -> Path:
    directory = Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _wants(config: RunConfig, fmt: str) -> bool:
    return fmt in config.output.formats


def cmd_ground_state(config: RunConfig) -> int:
    """Compute Q and write it with its certificates; exit 1 when a certificate fails."""
    params = config.model.params()
    grid = config.grid.grid()
    state = petviashvili_solve(params, grid, config.ground_state)
    directory = _output_dir(config)

    oracle = closed_form_oracle(params, grid)
    oracle_error = linf_norm(state.profile - oracle) if oracle is not None else None
    meta = provenance(config)
    if oracle_error is not None:
        meta["oracle_linf_error"] = oracle_error
    write_ground_state(directory, state, meta)

    report = state.identity_report
    print(f"Ground state beta={params.beta}, k={params.k}: {state.iterations} iterations, residual {state.residual:.3e}")
    print(f"  mass={state.mass:.15g}  energy={state.energy:.15g}  sharpness={state.sharpness_ratio:.12g}")
    print(f"  max identity residual={report.max_residual:.3e}  trusted={report.trusted}")
    if oracle_error is not None:
        print(f"  closed-form L-infinity error={oracle_error:.3e}")
    if not state.certified:
        print(f"  NOT CERTIFIED: {'; '.join(state.certificate_failures)}")
        return 1
    return 0


def cmd_evolve(config: RunConfig) -> int:
    """Evolve the configured initial data; exit 3 on an integrity breach, 0 otherwise."""
    params = config.model.params()
    grid = config.grid.grid()
    state = obtain_ground_state(config, params) if config.initial_data.kind == "soliton" else None
    u0 = build_initial_data(config.initial_data, grid, state)
    record = evolve(u0, params, config.evolution)

    directory = _output_dir(config)
    summary = trajectory_summary(record)
    summary["provenance"] = provenance(config)
    if _wants(config, "csv"):
        write_trajectory(directory / "trajectory.csv", record)
        write_field(directory / "final.csv", record.final)
    if record.snapshots is not None:
        write_snapshots(directory, record)
    if _wants(config, "json"):
        write_json(directory / "trajectory.json", summary)

    print(f"Evolution {record.status} at t={record.times[-1]:.6g} ({len(record.times)} outputs)")
    print(f"  mass drift={record.mass_drift:.3e}  energy drift={record.energy_drift:.3e}")
    if record.exploratory:
        print("  (exploratory regime: no established local theory)")
    if record.status == "suspected_blowup":
        print("  (suspected blowup: growth past the configured factors, reported as a diagnostic)")
    return 3 if record.status == "integrity_breach" else 0


def cmd_threshold(config: RunConfig) -> int:
    """Classify scaled initial data against the threshold; optionally verify along trajectories."""
    params = config.model.params()
    if not params.theorem_applies:
        raise InapplicableTheoremError("threshold requires k > 2*beta", params.beta, params.k)
    state = obtain_ground_state(config, params)
    shape = build_initial_data(config.initial_data, state.grid, state)
    certification = config.threshold.certification()
    if not state.certified:
        print(f"Ground state NOT CERTIFIED ({'; '.join(state.certificate_failures)}); all data reported inadmissible")

    reports: List[Dict[str, Any]] = []
    for amplitude in sorted(set(config.threshold.amplitudes)):
        u0 = amplitude * shape
        report = check_conditions(u0, state, params, certification)
        if config.threshold.run_evolution and report.admissible:
            record = evolve(u0, params, config.evolution)
            report = with_trajectory(report, verify_apriori_bound(record, report, state))
        payload = report.to_dict()
        payload["amplitude"] = amplitude
        reports.append(payload)
        print(
            f"amplitude={amplitude:g}: admissible={report.admissible} "
            f"2E/f(x0)={report.energy_ratio:.6g} X/x0={report.gradient_ratio:.6g} "
            f"trajectory_ok={report.trajectory_ok}"
        )

    if _wants(config, "json"):
        write_json(_output_dir(config) / "threshold.json", {"provenance": provenance(config), "reports": reports})
    return 0


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return NUMBER_FORMAT % value
    return str(value)


def cmd_sweep(config: RunConfig) -> int:
    """Run the (beta, k, amplitude) sweep; exit 0 when at least one cell succeeded."""
    result = run_sweep(config)
    directory = _output_dir(config)
    if _wants(config, "csv"):
        with open(directory / "sweep.csv", "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for cell in result.cells:
                row = cell.row()
                writer.writerow([_format_cell(row[column]) for column in CSV_COLUMNS])
    if _wants(config, "json"):
        payload = result.to_dict()
        payload["digest"] = digest(payload)
        payload["provenance"] = provenance(config)
        write_json(directory / "sweep.json", payload)

    print(f"Sweep: {result.succeeded}/{len(result.cells)} cells succeeded")
    for (beta, k), monotone in sorted(result.monotone_boundary.items()):
        print(f"  beta={beta:g}, k={k}: monotone boundary={monotone}")
    return 0 if result.succeeded else 1


def cmd_verify(
    config: RunConfig,
    checks: Optional[Sequence[str]] = None,
    compare: Optional[str] = None,
) -> int:
    """Run the verification checks; exit 0 iff all pass (and match a compared run)."""
    names = checks if checks else config.verify.checks
    context = VerifyContext(resolution=config.verify.resolution, seed=config.seed)
    results = [result.to_dict() for result in run_checks(names, context)]
    passed = all(result["passed"] for result in results)
    payload: Dict[str, Any] = {
        "checks": results,
        "passed": passed,
        "resolution": config.verify.resolution,
        "digest": digest(results),
        "config_hash": config_hash(config),
        "provenance": provenance(config),
    }
    write_json(_output_dir(config) / "verify.json", payload)

    for result in results:
        status = "PASS" if result["passed"] else "FAIL"
        print(f"  [{status}] {result['name']}: {result['message']}")
    print(f"Verify: {sum(r['passed'] for r in results)}/{len(results)} checks passed")

    if compare:
        previous = read_json(compare)
        if previous.get("config_hash") != payload["config_hash"]:
            raise ConfigError(f"refusing to compare with {compare}: config hash differs", "compare")
        if previous.get("digest") != payload["digest"]:
            print(f"Results differ from {compare}")
            return 1
        print(f"Results identical to {compare}")
    return 0 if passed else 1
