"""
Run configuration: pydantic models plus a strict sectioned `key = value` parser.

    # comment
    [physics]
    g = 1.0
    tau = 0.1
    z_c = 3.141592653589793, -0.5

    [obstacle.cylinder]
    center = 3.141592653589793, -0.5
    radius = 0.2

Tuples (z_c, center) are comma separated; bottom Fourier modes are `amplitude:wavenumber`
items. Every key maps to a model field; unknown keys are errors.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from solvers.base_solver import ConfigParseError, ConfigSemanticError

SECTIONS = ("physics", "numerics", "damping", "geometry", "initial_data", "output")
OBSTACLE_PREFIX = "obstacle."
# keys holding tuples or lists; every other value is a scalar
SEQUENCE_KEYS = ("z_c", "center", "bottom_modes")


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PhysicsParams(_Frozen):
    """Physical constants (nondimensional units: period 2π, density 1)"""

    g: float = Field(1.0, ge=0.0)
    tau: float = Field(1.0, gt=0.0, description="surface tension coefficient; the formulation requires tau > 0")
    V0: float = 0.0
    a0: float = 0.0
    z_c: Tuple[float, float] = (0.0, 0.0)

    @property
    def chi(self) -> float:
        """Indicator of the background current and cylinder flow"""
        return 1.0 if self.V0 != 0.0 else 0.0

    @property
    def cylinder_center(self) -> complex:
        return complex(self.z_c[0], self.z_c[1])


class NumericsConfig(_Frozen):
    N: int = Field(64, ge=8)
    dt: Optional[float] = Field(None, gt=0.0)
    cfl_factor: float = Field(0.5, gt=0.0)
    t_end: float = Field(1.0, ge=0.0)
    filter_threshold: float = Field(1e-13, gt=0.0)
    mollifier_delta: float = Field(0.0, ge=0.0)
    solver_mode: Literal["full", "model"] = "full"
    linear_solver: Literal["direct", "neumann"] = "direct"
    neumann_relaxation: float = Field(2.0 / 3.0, gt=0.0, le=1.0)
    neumann_max_iter: int = Field(500, ge=1)
    residual_tol: float = Field(1e-10, gt=0.0)
    chord_arc_floor: float = Field(0.05, gt=0.0)
    energy_ceiling: float = Field(1e3, gt=0.0)
    min_depth: float = Field(1e-3, gt=0.0)
    min_obstacle_gap: float = Field(1e-3, gt=0.0)
    j_max: int = Field(3, ge=2)
    apply_mu: bool = True
    tangential_gauge: Literal["mean_zero", "pinned", "fixed_abscissa"] = "mean_zero"
    f_br_method: Literal["decomposed", "direct"] = "decomposed"

    @field_validator("N")
    @classmethod
    def _even_grid(cls, value: int) -> int:
        if value % 2:
            raise ValueError("N must be even")
        return value


class DampingConfig(_Frozen):
    """Damping window [start, end] in the horizontal coordinate with smooth ramps of width `ramp`"""

    enabled: bool = False
    start: float = 0.0
    end: float = 3.141592653589793
    ramp: float = Field(0.5, gt=0.0)


class GeometryConfig(_Frozen):
    depth: float = Field(1.0, gt=0.0)
    bottom_modes: List[Tuple[float, int]] = []
    bottom_file: Optional[str] = None


class ObstacleConfig(_Frozen):
    name: str
    center: Optional[Tuple[float, float]] = None
    radius: Optional[float] = Field(None, gt=0.0)
    file: Optional[str] = None

    @model_validator(mode="after")
    def _one_shape(self) -> "ObstacleConfig":
        circle = self.center is not None and self.radius is not None
        if circle == (self.file is not None):
            raise ValueError("an obstacle needs either center and radius or a boundary file")
        return self


class InitialDataConfig(_Frozen):
    kind: Literal["rest", "cosine", "traveling", "file"] = "rest"
    amplitude: float = 0.0
    wavenumber: int = Field(1, ge=1)
    file: Optional[str] = None
    densities: Literal["neumann", "zero"] = "neumann"

    @model_validator(mode="after")
    def _file_given(self) -> "InitialDataConfig":
        if self.kind == "file" and not self.file:
            raise ValueError("initial data kind 'file' needs a file")
        return self


class OutputConfig(_Frozen):
    directory: str = "runs/default"
    record_every: int = Field(1, ge=1)
    checkpoint_every: int = Field(0, ge=0)
    delimiter: Literal["comma", "tab", "semicolon"] = "comma"

    @property
    def separator(self) -> str:
        return {"comma": ",", "tab": "\t", "semicolon": ";"}[self.delimiter]


class RunConfig(_Frozen):
    physics: PhysicsParams = PhysicsParams()
    numerics: NumericsConfig = NumericsConfig()
    damping: DampingConfig = DampingConfig()
    geometry: GeometryConfig = GeometryConfig()
    obstacles: List[ObstacleConfig] = []
    initial_data: InitialDataConfig = InitialDataConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _current_needs_obstacle(self) -> "RunConfig":
        if self.physics.V0 != 0.0:
            if not self.obstacles:
                raise ValueError("a background current (V0 != 0) requires an obstacle")
            center = self.physics.cylinder_center
            circles = [o for o in self.obstacles if o.radius is not None]
            if circles and len(circles) == len(self.obstacles) and not any(
                    abs(center - complex(*o.center)) < o.radius for o in circles):
                raise ValueError("z_c must lie inside an obstacle")
        return self

    def with_overrides(self, **sections: Dict[str, Any]) -> "RunConfig":
        """Copy with selected fields replaced, e.g. with_overrides(numerics={"N": 128})"""
        data = self.model_dump()
        for section, values in sections.items():
            data[section].update(values)
        return RunConfig.model_validate(data)


def _scalar(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def _value(key: str, text: str) -> Any:
    if text == "":
        return None
    if key not in SEQUENCE_KEYS:
        return _scalar(text)
    items = [item.strip() for item in text.split(",") if item.strip()]
    if any(":" in item for item in items):
        return [tuple(_scalar(part.strip()) for part in item.split(":")) for item in items]
    return [_scalar(item) for item in items]


def parse_config(text: str) -> RunConfig:
    """
    Parse configuration text into a validated RunConfig.

    Raises:
        ConfigParseError: malformed line, duplicate key or section (with line and column)
        ConfigSemanticError: unknown key or inadmissible value (with location and line)
    """
    data: Dict[str, Dict[str, Any]] = {}
    positions: Dict[Tuple[str, str], int] = {}
    section_lines: Dict[str, int] = {}
    section: Optional[str] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigParseError("unterminated section header", number, indent + len(stripped))
            section = stripped[1:-1].strip()
            if section not in SECTIONS and not section.startswith(OBSTACLE_PREFIX):
                raise ConfigParseError(f"unknown section [{section}]", number, indent + 1)
            if section in data:
                raise ConfigParseError(f"duplicate section [{section}]", number, indent + 1)
            data[section] = {}
            section_lines[section] = number
            continue
        if "=" not in stripped:
            raise ConfigParseError("expected 'key = value'", number, indent)
        if section is None:
            raise ConfigParseError("key outside of any section", number, indent)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key or not key.replace("_", "").isalnum():
            raise ConfigParseError(f"invalid key '{key}'", number, indent)
        if key in data[section]:
            raise ConfigParseError(f"duplicate key '{key}'", number, indent)
        data[section][key] = _value(key, value.strip())
        positions[(section, key)] = number

    payload: Dict[str, Any] = {name: values for name, values in data.items() if name in SECTIONS}
    obstacles = []
    for name, values in data.items():
        if name.startswith(OBSTACLE_PREFIX):
            obstacles.append({"name": name[len(OBSTACLE_PREFIX):], **values})
    payload["obstacles"] = obstacles

    try:
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = [str(part) for part in first["loc"]]
        if loc and loc[0] == "obstacles" and len(loc) > 1 and loc[1].isdigit():
            section_name = OBSTACLE_PREFIX + obstacles[int(loc[1])]["name"]
            loc = [section_name] + loc[2:]
        key = loc[1] if len(loc) > 1 else ""
        line = positions.get((loc[0], key)) if loc else None
        if line is None and loc:
            line = section_lines.get(loc[0])
        raise ConfigSemanticError(first["msg"], location=".".join(loc), line=line) from exc


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        if value and isinstance(value[0], (list, tuple)):
            return ", ".join(":".join(_format_value(v) for v in item) for item in value)
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def format_config(config: RunConfig) -> str:
    """Render a RunConfig so that parse_config(format_config(c)) == c"""
    lines = []
    dumped = config.model_dump()
    for section in SECTIONS:
        lines.append(f"[{section}]")
        for key, value in dumped[section].items():
            if value is None or (isinstance(value, list) and not value):
                continue
            lines.append(f"{key} = {_format_value(value)}")
        lines.append("")
    for obstacle in dumped["obstacles"]:
        lines.append(f"[{OBSTACLE_PREFIX}{obstacle['name']}]")
        for key, value in obstacle.items():
            if key == "name" or value is None:
                continue
            lines.append(f"{key} = {_format_value(value)}")
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())
