"""
Surface reconstruction, frames, chord-arc and clearance diagnostics, and the
fixed solid boundaries (bottom and obstacles).

Vector quantities are complex arrays a1 + i a2 throughout.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from solvers.base_solver import ConfigSemanticError, GridError
from utils import spectral


@dataclass(frozen=True, eq=False)
class SurfaceState:
    """Free surface in tangent-angle / length form"""

    theta: np.ndarray
    L: float
    base: complex
    time: float = 0.0

    def __post_init__(self):
        spectral.check_grid(self.theta)
        if not self.L > 0:
            raise ValueError(f"period length must be positive, got {self.L}")

    @property
    def n(self) -> int:
        return len(self.theta)

    @property
    def s_alpha(self) -> float:
        return self.L / (2.0 * np.pi)

    @property
    def zeta(self) -> np.ndarray:
        return reconstruct_curve(self.theta, self.L, self.base)


@dataclass(frozen=True, eq=False)
class SolidBoundary:
    """A fixed boundary sampled on the same grid as the surface"""

    kind: str
    zeta: np.ndarray
    zeta_alpha: np.ndarray
    zeta_alpha_alpha: np.ndarray
    closed: bool
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("bottom", "obstacle"):
            raise ValueError(f"unknown boundary kind '{self.kind}'")
        spectral.check_grid(self.zeta)
        if np.any(self.s_alpha <= 0):
            raise ValueError(f"boundary {self.label} has a degenerate parameterization")

    @property
    def n(self) -> int:
        return len(self.zeta)

    @property
    def s_alpha(self) -> np.ndarray:
        return np.abs(self.zeta_alpha)

    @property
    def normal(self) -> np.ndarray:
        """Unit normal i ζ_α / s_α, pointing into the fluid"""
        return 1j * self.zeta_alpha / self.s_alpha

    @property
    def theta_alpha(self) -> np.ndarray:
        """Rate of turning of the tangent, Im(ζ_αα / ζ_α)"""
        return np.imag(self.zeta_alpha_alpha / self.zeta_alpha)

    @property
    def label(self) -> str:
        return self.name or self.kind

    def resampled(self, m: int) -> "SolidBoundary":
        """The same curve on M nodes, by band-limited interpolation of its periodic part"""
        alpha = spectral.nodes(self.n)
        fine = spectral.nodes(m)
        drift = 0.0 if self.closed else 1.0
        zeta = spectral.resample(self.zeta - drift * alpha, m) + drift * fine
        zeta_alpha = spectral.resample(self.zeta_alpha, m)
        zeta_aa = spectral.resample(self.zeta_alpha_alpha, m)
        return replace(self, zeta=zeta, zeta_alpha=zeta_alpha, zeta_alpha_alpha=zeta_aa)


@dataclass(frozen=True, eq=False)
class FullState:
    """Complete evolution unknowns (θ, L, base) ⊕ (γ, ω, β_1..β_M)"""

    surface: SurfaceState
    gamma: np.ndarray
    omega: np.ndarray
    betas: Tuple[np.ndarray, ...] = ()
    step: int = 0

    def __post_init__(self):
        n = self.surface.n
        sizes = [len(self.gamma), len(self.omega)] + [len(b) for b in self.betas]
        if any(size != n for size in sizes):
            raise GridError(f"all grid functions must share N={n}, got {sizes}")

    @property
    def n(self) -> int:
        return self.surface.n

    @property
    def time(self) -> float:
        return self.surface.time

    def with_fields(self, **changes) -> "FullState":
        surface_changes = {k: changes.pop(k) for k in ("theta", "L", "base", "time") if k in changes}
        surface = replace(self.surface, **surface_changes) if surface_changes else self.surface
        return replace(self, surface=surface, **changes)


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    """Derived surface quantities shared by the velocity and system assembly"""

    zeta: np.ndarray
    zeta_alpha: np.ndarray
    zeta_alpha_alpha: np.ndarray
    theta: np.ndarray
    theta_alpha: np.ndarray
    s_alpha: float
    period: complex
    tangent: np.ndarray = field(repr=False)
    normal: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.zeta)


def reconstruct_curve(theta: np.ndarray, L: float, base: complex) -> np.ndarray:
    """ζ = base + α·mean(ζ_α) + antiderivative of ζ_α, pinned so that ζ(0) = base"""
    if not L > 0:
        raise ValueError(f"period length must be positive, got {L}")
    n = spectral.check_grid(theta)
    alpha = spectral.nodes(n)
    zeta_alpha = L / (2.0 * np.pi) * np.exp(1j * theta)
    periodic_part, average = spectral.antideriv_meanzero(zeta_alpha)
    return base + average * alpha + periodic_part - periodic_part[0]


def frames(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unit tangent and normal as complex arrays"""
    tangent = np.exp(1j * np.asarray(theta))
    return tangent, 1j * tangent


def curvature(theta: np.ndarray, L: float, winding: int = 0) -> np.ndarray:
    """κ = θ_α / s_α; `winding` removes the 2π·winding jump of θ on closed curves"""
    if not L > 0:
        raise ValueError(f"period length must be positive, got {L}")
    alpha = spectral.nodes(spectral.check_grid(theta))
    theta_alpha = spectral.deriv(theta - winding * alpha) + winding
    return 2.0 * np.pi / L * theta_alpha


def surface_geometry(surface: SurfaceState) -> SurfaceGeometry:
    s_alpha = surface.s_alpha
    theta_alpha = spectral.deriv(surface.theta)
    tangent, normal = frames(surface.theta)
    zeta_alpha = s_alpha * tangent
    return SurfaceGeometry(
        zeta=surface.zeta,
        zeta_alpha=zeta_alpha,
        zeta_alpha_alpha=1j * theta_alpha * zeta_alpha,
        theta=surface.theta,
        theta_alpha=theta_alpha,
        s_alpha=s_alpha,
        period=complex(spectral.integrate(zeta_alpha)),
        tangent=tangent,
        normal=normal,
    )


def chord_arc_constant(zeta: np.ndarray, period: complex = 2.0 * np.pi) -> float:
    """
    min |ζ(α) - ζ(α′)| / |α - α′| over node pairs with 0 < |α - α′| ≤ π.

    Args:
        zeta: curve samples
        period: shift ζ(α + 2π) - ζ(α); 2π for the x-periodic surface, 0 for closed curves
    """
    n = spectral.check_grid(zeta)
    spacing = 2.0 * np.pi / n
    index = np.arange(n)
    best = np.inf
    for offset in range(1, n // 2 + 1):
        wrapped = (index + offset) >= n
        ahead = np.roll(zeta, -offset) + period * wrapped
        ratio = np.abs(ahead - zeta) / (offset * spacing)
        best = min(best, float(ratio.min()))
    return best


def clearances(zeta: np.ndarray, solids: Sequence[SolidBoundary]) -> Tuple[float, List[float]]:
    """Depth above the bottom and the vertical gap above each obstacle"""
    eta_min = float(np.min(np.imag(zeta)))
    depth = np.inf
    gaps = []
    for solid in solids:
        top = float(np.max(np.imag(solid.zeta)))
        if solid.kind == "bottom":
            depth = min(depth, eta_min - top)
        else:
            gaps.append(eta_min - top)
    return depth, gaps


def winding_number(boundary: SolidBoundary, z: complex) -> int:
    """Number of times a closed boundary winds around z (negative for clockwise)"""
    angles = np.angle(boundary.zeta - z)
    steps = np.diff(np.append(angles, angles[0]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return int(np.round(steps.sum() / (2.0 * np.pi)))


def flat_bottom(n: int, depth: float) -> SolidBoundary:
    """ζ₁(α) = α - i h"""
    return fourier_bottom(n, depth, ())


def fourier_bottom(n: int, depth: float, modes: Sequence[Tuple[float, int]]) -> SolidBoundary:
    """Graph bottom y = -h + Σ a_m cos(k_m x) parameterized by x = α"""
    if depth <= 0:
        raise ValueError(f"bottom depth must be positive, got {depth}")
    alpha = spectral.nodes(n)
    height = -depth * np.ones(n)
    slope = np.zeros(n)
    bend = np.zeros(n)
    for amplitude, wavenumber in modes:
        height += amplitude * np.cos(wavenumber * alpha)
        slope -= amplitude * wavenumber * np.sin(wavenumber * alpha)
        bend -= amplitude * wavenumber ** 2 * np.cos(wavenumber * alpha)
    return SolidBoundary(
        kind="bottom",
        zeta=alpha + 1j * height,
        zeta_alpha=1.0 + 1j * slope,
        zeta_alpha_alpha=1j * bend,
        closed=False,
        name="bottom",
    )


def circular_obstacle(n: int, center: complex, radius: float, name: str = "obstacle") -> SolidBoundary:
    """Clockwise circle ζ₂ = z_c + r e^{-iα}, so that iζ_α/s_α points out of the disc"""
    if radius <= 0:
        raise ValueError(f"obstacle radius must be positive, got {radius}")
    alpha = spectral.nodes(n)
    rim = np.exp(-1j * alpha)
    return SolidBoundary(
        kind="obstacle",
        zeta=center + radius * rim,
        zeta_alpha=-1j * radius * rim,
        zeta_alpha_alpha=-radius * rim,
        closed=True,
        name=name,
    )


def boundary_from_samples(zeta: np.ndarray, kind: str, name: str = "") -> SolidBoundary:
    """Build a boundary from node samples, differentiating the periodic part spectrally"""
    n = spectral.check_grid(zeta)
    closed = kind == "obstacle"
    drift = 0.0 if closed else 1.0
    periodic = zeta - drift * spectral.nodes(n)
    zeta_alpha = spectral.deriv(periodic) + drift
    zeta_aa = spectral.deriv(periodic, order=2)
    return SolidBoundary(kind=kind, zeta=zeta, zeta_alpha=zeta_alpha,
                         zeta_alpha_alpha=zeta_aa, closed=closed, name=name or kind)


def load_boundary_table(path: Union[str, Path], kind: str, n: int, name: str = "") -> SolidBoundary:
    """
    Read a boundary table: one node per line, "alpha re(zeta) im(zeta)".

    Blank lines and '#' comments are ignored. The node count must equal the grid size.
    """
    path = Path(path)
    rows = []
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 3:
            raise ConfigSemanticError(f"expected 'alpha re im', got {len(parts)} fields",
                                      location=str(path), line=number)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ConfigSemanticError(str(exc), location=str(path), line=number) from exc
    table = np.array(rows)
    if len(table) != n:
        raise ConfigSemanticError(f"table has {len(table)} nodes, grid has {n}", location=str(path))
    if not np.allclose(table[:, 0], spectral.nodes(n), atol=1e-9):
        raise ConfigSemanticError("alpha column must be the equispaced nodes 2πm/N", location=str(path))
    return boundary_from_samples(table[:, 1] + 1j * table[:, 2], kind, name)
