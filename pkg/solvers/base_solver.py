from abc import ABC, abstractmethod
from typing import Any, Dict, Optional
import os
import json
from datetime import datetime
import logging

import numpy as np

# Configure logging
logging.basicConfig(level=os.getenv("WAVESHEET_LOG_LEVEL", "INFO").upper())
logger = logging.getLogger(__name__)


class SimulationError(Exception):
    """Root of all errors raised by the simulator"""

    module = "simulation"

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "module": self.module, "message": str(self)}


class GridError(SimulationError):
    """Grid function with an unusable size (odd, too small, mismatched)"""

    module = "spectral"


class SingularEvaluationError(SimulationError):
    """Kernel evaluated at coincident points"""

    module = "kernels"


class ReparameterizationError(SimulationError):
    """Arclength reparameterization of initial data did not converge"""

    module = "cli_io"


class CheckpointFormatError(SimulationError):
    """Malformed or incompatible checkpoint file"""

    module = "cli_io"


class ConfigParseError(SimulationError):
    """Syntax error in a configuration file"""

    module = "cli_io"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column

    def to_dict(self) -> Dict[str, Any]:
        info = super().to_dict()
        info.update({"line": self.line, "column": self.column})
        return info


class ConfigSemanticError(SimulationError):
    """Well-formed configuration with inadmissible values"""

    module = "cli_io"

    def __init__(self, message: str, location: str = "", line: Optional[int] = None):
        where = f"{location}: " if location else ""
        at = f" (line {line})" if line else ""
        super().__init__(f"{where}{message}{at}")
        self.location = location
        self.line = line


class AdmissibilityError(SimulationError):
    """A state left the admissible set; `gate` names the violated condition"""

    module = "evolution"
    gate = "admissibility"

    def __init__(self, message: str, value: float = float("nan"), threshold: float = float("nan")):
        super().__init__(message)
        self.value = float(value)
        self.threshold = float(threshold)

    def to_dict(self) -> Dict[str, Any]:
        info = super().to_dict()
        info.update({"gate": self.gate, "value": self.value, "threshold": self.threshold})
        return info


class ClearanceError(AdmissibilityError):
    module = "geometry"
    gate = "clearance"


class ChordArcError(AdmissibilityError):
    module = "geometry"
    gate = "chord_arc"


class EnergyCeilingError(AdmissibilityError):
    module = "diagnostics"
    gate = "energy"


class SolverResidualError(AdmissibilityError):
    module = "fredholm_system"
    gate = "residual"


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers for json.dumps"""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class BaseSolver(ABC):
    """Base class for all solvers in the WaveSheet system"""

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(f"{__class__.__module__}.{name}")

    @abstractmethod
    def process(self, input_data: Any) -> Dict[str, Any]:
        """Process input data and return results"""
        pass

    def log_activity(self, activity: str, data: Dict[str, Any] = None, level: int = logging.INFO):
        """Log solver activity"""
        if not self.logger.isEnabledFor(level):
            return
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "solver": self.name,
            "activity": activity,
            "data": _jsonable(data or {})
        }
        self.logger.log(level, json.dumps(log_entry))

    def handle_error(self, error: Exception, context: str = "", fallback: Any = None) -> Dict[str, Any]:
        """Handle errors at a component boundary"""
        if isinstance(error, SimulationError):
            detail = error.to_dict()
        else:
            detail = {"type": type(error).__name__, "module": self.name, "message": str(error)}
        error_info = {
            "error": str(error),
            "detail": _jsonable(detail),
            "context": context,
            "solver": self.name,
            "timestamp": datetime.now().isoformat()
        }
        self.logger.error(json.dumps(error_info))
        return {
            "success": False,
            "error": error_info,
            "fallback_result": fallback if fallback is not None else self.get_fallback_result()
        }

    def get_fallback_result(self) -> Dict[str, Any]:
        """Provide fallback result when processing fails"""
        return {
            "message": f"Solver {self.name} encountered an error",
            "status": "error"
        }
