from typing import Any, Dict, Optional, Tuple
from datetime import datetime
from importlib import metadata
from pathlib import Path
import json
import uuid

import numpy as np
import pandas as pd

from solvers.base_solver import CheckpointFormatError
from utils.config_parser import PhysicsParams, RunConfig
from utils.geometry import FullState, SurfaceState

CHECKPOINT_MAGIC = "# wavesheet checkpoint"
CHECKPOINT_VERSION = 1
_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "python-dotenv", "langgraph")


class CheckpointFormatter:
    """Utility class for the run's external text formats: checkpoints, diagnostics and manifest"""

    def __init__(self):
        self.version = CHECKPOINT_VERSION

    def format_checkpoint(self, state: FullState, physics: Optional[PhysicsParams] = None) -> str:
        """
        Render a state as versioned text.

        Floats are written with repr(), which round-trips every double exactly.
        """
        columns = ["theta", "gamma", "omega"] + [f"beta_{p + 1}" for p in range(len(state.betas))]
        table = np.column_stack([state.surface.theta, state.gamma, state.omega] + list(state.betas))
        header = [
            CHECKPOINT_MAGIC,
            f"version = {self.version}",
            f"n = {state.n}",
            f"obstacles = {len(state.betas)}",
            f"step = {state.step}",
            f"time = {float(state.time)!r}",
            f"L = {float(state.surface.L)!r}",
            f"base_re = {float(np.real(state.surface.base))!r}",
            f"base_im = {float(np.imag(state.surface.base))!r}",
        ]
        if physics is not None:
            header.append(f"physics = {json.dumps(physics.model_dump())}")
        header.append("columns = " + " ".join(columns))
        rows = [" ".join(repr(float(value)) for value in row) for row in table]
        return "\n".join(header + rows) + "\n"

    def parse_checkpoint(self, text: str) -> Tuple[FullState, Dict[str, Any]]:
        lines = text.splitlines()
        if not lines or lines[0].strip() != CHECKPOINT_MAGIC:
            raise CheckpointFormatError("missing checkpoint header")
        header: Dict[str, str] = {}
        index = 1
        while index < len(lines):
            key, sep, value = lines[index].partition("=")
            if not sep:
                raise CheckpointFormatError(f"malformed header line {index + 1}")
            header[key.strip()] = value.strip()
            index += 1
            if key.strip() == "columns":
                break
        try:
            version = int(header["version"])
            n = int(header["n"])
            obstacles = int(header["obstacles"])
            if version != self.version:
                raise CheckpointFormatError(f"unsupported checkpoint version {version}")
            rows = [[float(token) for token in line.split()] for line in lines[index:] if line.strip()]
            table = np.array(rows, dtype=float)
            if table.shape != (n, 3 + obstacles):
                raise CheckpointFormatError(f"expected {n} rows of {3 + obstacles} values, got {table.shape}")
            surface = SurfaceState(theta=table[:, 0].copy(), L=float(header["L"]),
                                   base=complex(float(header["base_re"]), float(header["base_im"])),
                                   time=float(header["time"]))
            state = FullState(surface=surface, gamma=table[:, 1].copy(), omega=table[:, 2].copy(),
                              betas=tuple(table[:, 3 + p].copy() for p in range(obstacles)),
                              step=int(header["step"]))
        except (KeyError, ValueError) as exc:
            raise CheckpointFormatError(f"invalid checkpoint: {exc}") from exc
        metadata_fields = {"version": version, "columns": header["columns"].split()}
        if "physics" in header:
            metadata_fields["physics"] = json.loads(header["physics"])
        return state, metadata_fields

    def write_checkpoint(self, path, state: FullState, physics: Optional[PhysicsParams] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.format_checkpoint(state, physics), encoding="utf-8")
        return path

    def read_checkpoint(self, path) -> Tuple[FullState, Dict[str, Any]]:
        return self.parse_checkpoint(Path(path).read_text(encoding="utf-8"))

    def format_diagnostics(self, frame: pd.DataFrame, separator: str = ",") -> str:
        return frame.to_csv(sep=separator, index=False, float_format="%.17g", lineterminator="\n")

    def create_manifest(self, config: RunConfig, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Every effective parameter, defaults included, plus provenance"""
        versions = {}
        for package in _PACKAGES:
            try:
                versions[package] = metadata.version(package)
            except metadata.PackageNotFoundError:
                versions[package] = None
        manifest = {
            "run_id": str(uuid.uuid4()),
            "created": datetime.now().isoformat(),
            "checkpoint_version": self.version,
            "config": config.model_dump(mode="json"),
            "mu_applied": config.numerics.apply_mu,
            "packages": versions,
        }
        manifest.update(extra or {})
        return manifest
