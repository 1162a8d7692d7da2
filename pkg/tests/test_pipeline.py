#!/usr/bin/env python3
"""
Tests for the LangGraph run pipeline: stages, output files and resume
"""

import sys
import os
import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

# Add the project root to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from simulation_pipeline import STAGES, SimulationPipeline, failure_kind, run_simulation
from solvers.base_solver import ChordArcError, ConfigParseError, GridError
from utils.checkpoint_formatter import CheckpointFormatter

CONFIG = """
[numerics]
N = 32
t_end = {t_end}

[initial_data]
kind = cosine
amplitude = 0.01

[output]
record_every = 1
checkpoint_every = 2
"""


def test_failure_classes():
    assert failure_kind(ConfigParseError("bad", 1, 1)) == "config"
    assert failure_kind(FileNotFoundError("x.cfg")) == "config"
    assert failure_kind(ChordArcError("low")) == "gate"
    assert failure_kind(GridError("odd")) == "solver_failure"
    assert failure_kind(RuntimeError("?")) == "other"


def test_zero_length_run_writes_outputs():
    print("Testing a zero-length run...")
    with tempfile.TemporaryDirectory() as tmp:
        state = SimulationPipeline().process(config_text=CONFIG.format(t_end=0.0), output_dir=tmp)
        assert state["failure"] is None, state["failure"]
        assert all(state["stage_status"][stage] == "complete" for stage in STAGES)
        assert len(state["trajectory"].records) == 1

        out = Path(tmp)
        frame = pd.read_csv(out / "diagnostics.csv")
        assert len(frame) == 1 and frame["time"].iloc[0] == 0.0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["termination_reason"] == "completed"
        assert manifest["config"]["numerics"]["N"] == 32
        assert (out / "config.cfg").exists() and (out / "checkpoint_final.txt").exists()
    print("✅ Zero-length run test completed successfully!")


def test_check_only_stops_after_admissibility():
    state = SimulationPipeline().process(config_text=CONFIG.format(t_end=1.0), check_only=True)
    assert state["failure"] is None
    assert state["stage_status"]["Admissibility"] == "complete"
    assert state["stage_status"]["Integration"] == "pending"
    assert state["trajectory"] is None


def test_configuration_failure_stops_graph():
    state = SimulationPipeline().process(config_text="[physics]\ntau = -1\n")
    assert state["failure"]["kind"] == "config"
    assert state["failure"]["stage"] == "Configuration"
    assert state["stage_status"]["Initial Data"] == "pending"


def test_resume_matches_uninterrupted_run():
    print("Testing resume determinism...")
    formatter = CheckpointFormatter()
    with tempfile.TemporaryDirectory() as tmp:
        full_dir = Path(tmp) / "full"
        full = run_simulation(config_text=CONFIG.format(t_end=0.2), output_dir=str(full_dir))
        assert full["failure"] is None, full["failure"]
        final = full["trajectory"].final_state
        print(f"   uninterrupted: {final.step} steps to t={final.time:.6f}")
        assert final.step > 2

        resumed = run_simulation(resume_path=str(full_dir / "checkpoint_00000002.txt"),
                                 output_dir=str(Path(tmp) / "resumed"))
        assert resumed["failure"] is None, resumed["failure"]
        again = resumed["trajectory"].final_state
        assert again.step == final.step
        assert again.time == final.time
        assert np.array_equal(again.surface.theta, final.surface.theta)
        assert np.array_equal(again.gamma, final.gamma)
        assert np.array_equal(again.omega, final.omega)
        assert again.surface.L == final.surface.L
        assert again.surface.base == final.surface.base

        written, _ = formatter.read_checkpoint(Path(tmp) / "resumed" / "checkpoint_final.txt")
        assert np.array_equal(written.gamma, final.gamma)
        manifest = json.loads((Path(tmp) / "resumed" / "manifest.json").read_text())
        assert manifest["resumed_from"].endswith("checkpoint_00000002.txt")
    print("✅ Resume test completed successfully!")


def test_setup_structure_is_complete():
    """Every file the setup script checks for or points the user to ships with the project"""
    import setup

    root = Path(__file__).resolve().parent.parent
    for name in ("app.py", "simulation_pipeline.py", "requirements.txt", *setup.HELP_DOCS):
        assert (root / name).is_file(), name


def main():
    test_failure_classes()
    test_zero_length_run_writes_outputs()
    test_check_only_stops_after_admissibility()
    test_configuration_failure_stops_graph()
    test_resume_matches_uninterrupted_run()
    test_setup_structure_is_complete()
    return True


if __name__ == "__main__":
    main()
