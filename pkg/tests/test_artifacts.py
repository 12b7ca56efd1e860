"""
Test on-disk formats: JSON helpers, field dumps, ground states and trajectories.
"""
import csv
import json
import math

import numpy as np
import pytest

from src.core.artifacts import (
    FIELD_HEADER,
    canonical_json,
    digest,
    read_field,
    read_ground_state,
    read_json,
    sanitize,
    trajectory_summary,
    write_field,
    write_ground_state,
    write_json,
    write_trajectory,
)
from src.core.evolution import EvolutionConfig, evolve
from src.core.exceptions import InvalidInputError
from src.core.spectral import Field, ModelParams, random_smooth_field


class TestJson:
    """Tests for canonical JSON and digests."""

    def test_sanitize_non_finite(self):
        """NaN and infinities become None, numpy scalars become Python numbers."""
        payload = sanitize({"a": math.nan, "b": [math.inf, np.float64(1.5)], "c": (np.int64(3),)})
        assert payload == {"a": None, "b": [None, 1.5], "c": [3]}
        assert type(payload["b"][1]) is float

    def test_digest_ignores_key_order(self):
        """Digests depend on content only."""
        assert digest({"x": 1, "y": [1.0, 2.0]}) == digest({"y": [1.0, 2.0], "x": 1})
        assert digest({"x": 1}) != digest({"x": 2})

    def test_canonical_form_is_compact(self):
        """Canonical JSON is sorted and has no spaces."""
        assert canonical_json({"b": 1, "a": None}) == '{"a":null,"b":1}'

    def test_write_json(self, tmp_path):
        """write_json creates parent directories and writes strict JSON."""
        path = write_json(tmp_path / "nested" / "out.json", {"value": math.nan, "ok": True})
        assert read_json(path) == {"ok": True, "value": None}
        assert "NaN" not in path.read_text()


class TestFieldDump:
    """Tests for field dumps."""

    def test_round_trip_is_exact(self, tmp_path, small_grid, rng):
        """Seventeen significant digits reproduce every sample."""
        field = random_smooth_field(small_grid, rng)
        path = write_field(tmp_path / "u.csv", field)
        back = read_field(path)
        assert back.grid == field.grid
        assert np.array_equal(back.samples, field.samples)

    def test_layout(self, tmp_path, small_grid):
        """Two header lines, a column row, then one row per node."""
        path = write_field(tmp_path / "u.csv", Field.zeros(small_grid))
        lines = path.read_text().splitlines()
        assert lines[0] == FIELD_HEADER
        assert lines[1].startswith("# n_points=128 ")
        assert lines[2] == "x,value"
        assert len(lines) == 3 + small_grid.n_points

    def test_wrong_header_rejected(self, tmp_path):
        """Files without the header are not field dumps."""
        path = tmp_path / "bad.csv"
        path.write_text("x,value\n0,1\n")
        with pytest.raises(InvalidInputError):
            read_field(path)

    def test_truncated_file_rejected(self, tmp_path, small_grid):
        """Row count must match n_points."""
        path = write_field(tmp_path / "u.csv", Field.zeros(small_grid))
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-5]) + "\n")
        with pytest.raises(InvalidInputError):
            read_field(path)


class TestGroundStateArtifact:
    """Tests for ground-state artifacts."""

    def test_round_trip(self, tmp_path, kdv_state):
        """A written ground state reloads with the same profile and certificates."""
        path = write_ground_state(tmp_path, kdv_state, {"seed": 0})
        payload = read_json(path)
        assert payload["format"] == "dgbo-ground-state"
        assert payload["version"] == 1
        assert payload["provenance"] == {"seed": 0}
        assert (tmp_path / payload["profile_file"]).exists()

        loaded = read_ground_state(path)
        assert loaded.params == kdv_state.params
        assert np.array_equal(loaded.profile.samples, kdv_state.profile.samples)
        assert loaded.mass == kdv_state.mass
        assert loaded.iterations == kdv_state.iterations

    def test_foreign_document_rejected(self, tmp_path):
        """Only ground-state documents are accepted."""
        path = write_json(tmp_path / "other.json", {"format": "something-else", "version": 1})
        with pytest.raises(InvalidInputError):
            read_ground_state(path)


class TestTrajectoryArtifact:
    """Tests for trajectory output."""

    def test_csv_and_summary(self, tmp_path, small_grid):
        """One CSV row per output time and a JSON-ready summary."""
        params = ModelParams(1.5, 2)
        u0 = Field.from_function(small_grid, lambda x: 0.3 * np.exp(-x ** 2))
        record = evolve(u0, params, EvolutionConfig(dt=0.01, t_end=0.05, output_stride=1))
        path = write_trajectory(tmp_path / "trajectory.csv", record)
        with open(path) as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ["t", "mass", "energy", "h_half_beta", "linf"]
        assert len(rows) == 1 + len(record.times)
        assert float(rows[1][1]) == record.conserved[0].mass

        summary = trajectory_summary(record)
        assert summary["status"] == "completed"
        assert summary["outputs"] == len(record.times)
        json.dumps(summary)
