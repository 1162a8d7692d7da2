"""
LangGraph orchestration of a WaveSheet run.

load_config -> build_initial -> admissibility -> integrate -> write_outputs,
with every stage able to stop the graph early by recording a failure.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, TypedDict
import json
import os
import time

from dotenv import load_dotenv
from langgraph.graph import END, StateGraph
from pydantic import ValidationError

from solvers.base_solver import AdmissibilityError, ConfigParseError, ConfigSemanticError, SimulationError
from solvers.time_integrator import TimeIntegrator, Trajectory
from utils.checkpoint_formatter import CheckpointFormatter
from utils.config_parser import RunConfig, format_config, load_config, parse_config
from utils.geometry import FullState, SolidBoundary
from utils.initial_data import build_initial_data, build_solids

load_dotenv()

STAGES = ("Configuration", "Initial Data", "Admissibility", "Integration", "Outputs")


class SimulationState(TypedDict, total=False):
    # Input
    config_path: Optional[str]
    config_text: Optional[str]
    overrides: Dict[str, Dict[str, Any]]
    resume_path: Optional[str]
    output_dir: Optional[str]
    check_only: bool

    # Results
    config: Optional[RunConfig]
    solids: List[SolidBoundary]
    integrator: Optional[TimeIntegrator]
    initial_state: Optional[FullState]
    trajectory: Optional[Trajectory]
    outputs: Dict[str, str]

    # Stage status and failure bookkeeping
    stage_status: Dict[str, str]
    errors: List[str]
    failure: Optional[Dict[str, Any]]
    processing_start_time: Optional[float]


def create_initial_state(config_path: Optional[str] = None, config_text: Optional[str] = None,
                         overrides: Optional[Dict[str, Dict[str, Any]]] = None,
                         resume_path: Optional[str] = None, output_dir: Optional[str] = None,
                         check_only: bool = False) -> SimulationState:
    """Create the initial graph state for one invocation"""
    return {
        "config_path": config_path,
        "config_text": config_text,
        "overrides": overrides or {},
        "resume_path": resume_path,
        "output_dir": output_dir,
        "check_only": check_only,

        "config": None,
        "solids": [],
        "integrator": None,
        "initial_state": None,
        "trajectory": None,
        "outputs": {},

        "stage_status": {stage: "pending" for stage in STAGES},
        "errors": [],
        "failure": None,
        "processing_start_time": None,
    }


def failure_kind(error: Exception) -> str:
    """Exit-status class of an exception: config, gate, solver_failure or other"""
    if isinstance(error, (ConfigParseError, ConfigSemanticError, ValidationError, FileNotFoundError)):
        return "config"
    if isinstance(error, AdmissibilityError):
        return "gate"
    if isinstance(error, SimulationError):
        return "solver_failure"
    return "other"


class SimulationPipeline:
    """LangGraph-based pipeline for one WaveSheet run"""

    def __init__(self):
        self.formatter = CheckpointFormatter()
        self.graph = self._build_graph()

    def _build_graph(self):
        workflow = StateGraph(SimulationState)

        workflow.add_node("load_config", self._load_config_node)
        workflow.add_node("build_initial", self._build_initial_node)
        workflow.add_node("admissibility", self._admissibility_node)
        workflow.add_node("integrate", self._integrate_node)
        workflow.add_node("write_outputs", self._write_outputs_node)

        workflow.set_entry_point("load_config")
        workflow.add_conditional_edges("load_config", self._continue_or_stop,
                                       {"continue": "build_initial", "stop": END})
        workflow.add_conditional_edges("build_initial", self._continue_or_stop,
                                       {"continue": "admissibility", "stop": END})
        workflow.add_conditional_edges("admissibility", self._after_admissibility,
                                       {"continue": "integrate", "stop": END})
        workflow.add_edge("integrate", "write_outputs")
        workflow.add_edge("write_outputs", END)

        return workflow.compile()

    @staticmethod
    def _continue_or_stop(state: SimulationState) -> str:
        return "stop" if state["failure"] else "continue"

    @staticmethod
    def _after_admissibility(state: SimulationState) -> str:
        return "stop" if state["failure"] or state["check_only"] else "continue"

    @staticmethod
    def _fail(state: SimulationState, stage: str, error: Exception):
        state["errors"].append(f"{stage} error: {str(error)}")
        state["stage_status"][stage] = "error"
        detail = error.to_dict() if hasattr(error, "to_dict") else {"type": type(error).__name__,
                                                                    "message": str(error)}
        state["failure"] = {"kind": failure_kind(error), "stage": stage, "detail": detail}

    # ------------------------------------------------------------------ nodes

    def _load_config_node(self, state: SimulationState) -> SimulationState:
        """Parse the configuration and apply command-line overrides"""
        if state["processing_start_time"] is None:
            state["processing_start_time"] = time.time()
        try:
            state["stage_status"]["Configuration"] = "running"

            if state["config_text"] is not None:
                config = parse_config(state["config_text"])
            elif state["config_path"]:
                config = load_config(state["config_path"])
            elif state["resume_path"]:
                # a resumed run reuses the configuration stored next to its checkpoints
                config = load_config(Path(state["resume_path"]).parent / "config.cfg")
            else:
                config = RunConfig()
            if state["overrides"]:
                config = config.with_overrides(**state["overrides"])

            state["config"] = config
            state["stage_status"]["Configuration"] = "complete"

        except Exception as e:
            self._fail(state, "Configuration", e)

        return state

    def _build_initial_node(self, state: SimulationState) -> SimulationState:
        """Build the solid boundaries and the initial (or resumed) state"""
        try:
            state["stage_status"]["Initial Data"] = "running"

            config = state["config"]
            base_dir = Path(state["config_path"]).parent if state["config_path"] else Path(".")
            solids = build_solids(config, base_dir)
            integrator = TimeIntegrator(solids, config.physics, config.numerics, config.damping,
                                        record_every=config.output.record_every)

            if state["resume_path"]:
                initial, _ = self.formatter.read_checkpoint(state["resume_path"])
                if initial.n != config.numerics.N or len(initial.betas) != len(solids) - 1:
                    raise SimulationError(
                        f"checkpoint has N={initial.n} with {len(initial.betas)} obstacle(s); "
                        f"configuration expects N={config.numerics.N} with {len(solids) - 1}")
            else:
                initial = build_initial_data(config, solids, integrator.fredholm, base_dir)

            state["solids"] = solids
            state["integrator"] = integrator
            state["initial_state"] = initial
            state["stage_status"]["Initial Data"] = "complete"

        except Exception as e:
            self._fail(state, "Initial Data", e)

        return state

    def _admissibility_node(self, state: SimulationState) -> SimulationState:
        """Gate the initial state before any time is spent integrating it"""
        try:
            state["stage_status"]["Admissibility"] = "running"
            diagnostics = state["integrator"].check_gates(state["initial_state"])
            state["integrator"].log_activity("initial_admissibility", {
                "chord_arc": diagnostics["chord_arc"],
                "depth": diagnostics["depth"],
                "min_gap": diagnostics["min_gap"],
                "total_energy": diagnostics["energy"].total,
            })
            state["stage_status"]["Admissibility"] = "complete"

        except Exception as e:
            self._fail(state, "Admissibility", e)

        return state

    def _integrate_node(self, state: SimulationState) -> SimulationState:
        """Run the integrator, writing periodic checkpoints on the way"""
        try:
            state["stage_status"]["Integration"] = "running"

            config = state["config"]
            out_dir = self._output_dir(state)
            out_dir.mkdir(parents=True, exist_ok=True)

            def write_checkpoint(current: FullState):
                path = out_dir / f"checkpoint_{current.step:08d}.txt"
                self.formatter.write_checkpoint(path, current, config.physics)
                state["outputs"][path.name] = str(path)

            trajectory = state["integrator"].run(
                state["initial_state"], t_end=config.numerics.t_end,
                on_checkpoint=write_checkpoint, checkpoint_every=config.output.checkpoint_every)
            state["trajectory"] = trajectory

            if trajectory.termination_reason == "completed":
                state["stage_status"]["Integration"] = "complete"
            else:
                state["stage_status"]["Integration"] = "error"
                state["errors"].append(f"Integration stopped: {trajectory.termination_reason}")
                kind = "solver_failure" if trajectory.termination_reason == "solver_failure" else "gate"
                state["failure"] = {"kind": kind, "stage": "Integration",
                                    "detail": trajectory.termination_detail}

        except Exception as e:
            self._fail(state, "Integration", e)

        return state

    def _write_outputs_node(self, state: SimulationState) -> SimulationState:
        """Diagnostics table, manifest, effective configuration and final checkpoint"""
        try:
            state["stage_status"]["Outputs"] = "running"

            config = state["config"]
            trajectory = state["trajectory"]
            out_dir = self._output_dir(state)
            out_dir.mkdir(parents=True, exist_ok=True)

            if trajectory is not None and trajectory.records:
                diagnostics = out_dir / "diagnostics.csv"
                diagnostics.write_text(
                    self.formatter.format_diagnostics(trajectory.to_frame(), config.output.separator),
                    encoding="utf-8")
                state["outputs"]["diagnostics"] = str(diagnostics)

                final = out_dir / "checkpoint_final.txt"
                self.formatter.write_checkpoint(final, trajectory.final_state, config.physics)
                state["outputs"]["checkpoint_final"] = str(final)

            config_copy = out_dir / "config.cfg"
            config_copy.write_text(format_config(config), encoding="utf-8")
            state["outputs"]["config"] = str(config_copy)

            manifest = self.formatter.create_manifest(config, {
                "resumed_from": state["resume_path"],
                "termination_reason": trajectory.termination_reason if trajectory else None,
                "records": len(trajectory.records) if trajectory else 0,
                "final_time": trajectory.records[-1].time if trajectory and trajectory.records else None,
                "wall_time": time.time() - state["processing_start_time"],
            })
            manifest_path = out_dir / "manifest.json"
            manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
            state["outputs"]["manifest"] = str(manifest_path)

            state["stage_status"]["Outputs"] = "complete"

        except Exception as e:
            previous = state["failure"]
            self._fail(state, "Outputs", e)
            # an integration failure outranks a failure to write its outputs
            if previous:
                state["failure"] = previous

        return state

    # ---------------------------------------------------------------- helpers

    @staticmethod
    def _output_dir(state: SimulationState) -> Path:
        if state["output_dir"]:
            return Path(state["output_dir"])
        if state["resume_path"]:
            return Path(state["resume_path"]).parent
        return Path(os.getenv("WAVESHEET_OUTPUT_DIR") or state["config"].output.directory)

    def process(self, **inputs) -> SimulationState:
        """Run the graph on one invocation's inputs and return the final state"""
        state = create_initial_state(**inputs)
        return self.graph.invoke(state)


def run_simulation(config_path: Optional[str] = None, **inputs) -> SimulationState:
    """Convenience wrapper: build a pipeline and run it once"""
    return SimulationPipeline().process(config_path=config_path, **inputs)
