"""
Cotangent-kernel primitives for 2π-periodic layer potentials.

Matrices follow the convention row = target node, column = source node. The
quadrature weight 2π/M is kept out of the entries (see KernelMatrix).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from solvers.base_solver import ChordArcError, SingularEvaluationError
from utils import spectral
from utils.geometry import (FullState, SolidBoundary, SurfaceGeometry, SurfaceState,
                            surface_geometry)

# ½cot(½u) is replaced by its limit ∓i/2 beyond this |Im u|
SATURATION = 40.0
COINCIDENT_TOLERANCE = 1e-14


def cot_kernel(z, w):
    """½cot(½(z - w)), evaluated through exponentials of non-positive real part"""
    u = np.asarray(z, dtype=complex) - np.asarray(w, dtype=complex)
    sign = np.where(u.imag >= 0.0, 1.0, -1.0)
    q = np.exp(1j * sign * u)
    denominator = 1.0 - q
    if np.any(np.abs(denominator) < COINCIDENT_TOLERANCE):
        raise SingularEvaluationError("cot kernel evaluated at coincident points")
    value = -0.5j * sign * (1.0 + q) / denominator
    value = np.where(np.abs(u.imag) > SATURATION, -0.5j * sign, value)
    if value.ndim == 0:
        return complex(value)
    return value


def cot_matrix(targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
    return cot_kernel(targets[:, None], sources[None, :])


def _self_cot_matrix(zeta: np.ndarray) -> np.ndarray:
    """½cot(½(ζ_j - ζ_k)) for a curve with ζ(α+2π) - ζ(α) ∈ {0, 2π}; zero diagonal"""
    differences = zeta[:, None] - zeta[None, :]
    np.fill_diagonal(differences, np.pi)
    values = cot_kernel(differences, 0.0)
    np.fill_diagonal(values, 0.0)
    return values


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Kernel samples plus the trapezoid weight that turns them into an integral"""

    entries: np.ndarray
    weight: float

    def apply(self, density: np.ndarray) -> np.ndarray:
        """∫ k(α, α′) density(α′) dα′"""
        return self.weight * (self.entries @ density)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class BoundaryKernels:
    """
    The interaction kernels of the Neumann conditions.

    k_S1, k_B1, k_C1[q]: bottom targets; surface, bottom and obstacle-q sources.
    k_S2[p], k_B2[p], k_C2[p][q]: obstacle-p targets; the same sources.
    """

    k_S1: KernelMatrix
    k_B1: KernelMatrix
    k_C1: List[KernelMatrix]
    k_S2: List[KernelMatrix]
    k_B2: List[KernelMatrix]
    k_C2: List[List[KernelMatrix]]


def split_solids(solids: Sequence[SolidBoundary]) -> Tuple[SolidBoundary, List[SolidBoundary]]:
    """Return (bottom, obstacles); exactly one bottom is required"""
    bottoms = [s for s in solids if s.kind == "bottom"]
    if len(bottoms) != 1:
        raise ValueError(f"exactly one bottom boundary is required, got {len(bottoms)}")
    return bottoms[0], [s for s in solids if s.kind == "obstacle"]


def density_kernel(target: SolidBoundary, source: SolidBoundary) -> KernelMatrix:
    """Re{i s_src(α′) ζ_tgt,α(α)/s_tgt(α) ½cot(½(ζ_tgt(α) - ζ_src(α′)))}"""
    same = target is source
    cot = _self_cot_matrix(target.zeta) if same else cot_matrix(target.zeta, source.zeta)
    scale = (target.zeta_alpha / target.s_alpha)[:, None] * source.s_alpha[None, :]
    entries = np.real(1j * scale * cot)
    if same:
        np.fill_diagonal(entries, np.real(0.5j * target.zeta_alpha_alpha / target.zeta_alpha))
    return KernelMatrix(entries, 2.0 * np.pi / source.n)


def sheet_kernel(target: SolidBoundary, surface_zeta: np.ndarray) -> KernelMatrix:
    """Re{ζ_tgt,α(α)/s_tgt(α) ½cot(½(ζ_tgt(α) - ζ(α′)))}"""
    cot = cot_matrix(target.zeta, surface_zeta)
    entries = np.real((target.zeta_alpha / target.s_alpha)[:, None] * cot)
    return KernelMatrix(entries, 2.0 * np.pi / len(surface_zeta))


def sheet_kernel_rate(target: SolidBoundary, surface_zeta: np.ndarray,
                      zeta_t: np.ndarray) -> KernelMatrix:
    """Time derivative of sheet_kernel under surface motion ζ_t"""
    cot = cot_matrix(target.zeta, surface_zeta)
    quarter_csc2 = 0.25 + cot ** 2
    entries = np.real((target.zeta_alpha / target.s_alpha)[:, None] * zeta_t[None, :] * quarter_csc2)
    return KernelMatrix(entries, 2.0 * np.pi / len(surface_zeta))


def boundary_kernels(surface_zeta: np.ndarray, solids: Sequence[SolidBoundary]) -> BoundaryKernels:
    bottom, obstacles = split_solids(solids)
    return BoundaryKernels(
        k_S1=sheet_kernel(bottom, surface_zeta),
        k_B1=density_kernel(bottom, bottom),
        k_C1=[density_kernel(bottom, obstacle) for obstacle in obstacles],
        k_S2=[sheet_kernel(obstacle, surface_zeta) for obstacle in obstacles],
        k_B2=[density_kernel(obstacle, bottom) for obstacle in obstacles],
        k_C2=[[density_kernel(p, q) for q in obstacles] for p in obstacles],
    )


def kernel_time_derivatives(state: FullState, solids: Sequence[SolidBoundary],
                            zeta_t: np.ndarray) -> Tuple[KernelMatrix, List[KernelMatrix]]:
    """(k_{S,t}¹, [k_{S,t}² per obstacle]) for the ω and β right-hand sides"""
    zeta = state.surface.zeta
    bottom, obstacles = split_solids(solids)
    return (sheet_kernel_rate(bottom, zeta, zeta_t),
            [sheet_kernel_rate(obstacle, zeta, zeta_t) for obstacle in obstacles])


class SurfaceOperators:
    """
    Self-interaction operators of the free surface for one geometry.

    The integration window is centered at the target node, using the periodic
    extension ζ(α + 2π) = ζ(α) + ∫ζ_α.
    """

    def __init__(self, geometry: SurfaceGeometry):
        self.geometry = geometry
        n = geometry.n
        self.n = n
        self.spacing = 2.0 * np.pi / n
        index = np.arange(n)
        offset = (index[None, :] - index[:, None] + n // 2 - 1) % n - n // 2 + 1
        shift = (index[:, None] + offset - index[None, :]) // n
        differences = geometry.zeta[:, None] - geometry.zeta[None, :] - geometry.period * shift
        np.fill_diagonal(differences, np.pi)
        self.cot = cot_kernel(differences, 0.0)
        np.fill_diagonal(self.cot, 0.0)
        flat = -offset * self.spacing
        np.fill_diagonal(flat, np.pi)
        self.flat_cot = cot_kernel(flat.astype(complex), 0.0).real
        np.fill_diagonal(self.flat_cot, 0.0)
        self.odd = (offset % 2) == 1
        self._k_matrix = None

    @property
    def k_matrix(self) -> np.ndarray:
        """Matrix of K[ζ] acting on node values"""
        if self._k_matrix is None:
            zeta_alpha = self.geometry.zeta_alpha
            bracket = 2.0 * self.cot - 2.0 * self.flat_cot / zeta_alpha[None, :]
            np.fill_diagonal(bracket, -self.geometry.zeta_alpha_alpha / zeta_alpha ** 2)
            if not np.all(np.isfinite(bracket)):
                raise ChordArcError("K operator bracket overflowed; curve is near self-intersection")
            self._k_matrix = self.spacing / (4j * np.pi) * bracket
        return self._k_matrix

    def k_apply(self, f: np.ndarray) -> np.ndarray:
        return self.k_matrix @ f

    @property
    def pvi_matrix(self) -> np.ndarray:
        """(1/4πi) PV∫ f cot(½(ζ(α) - ζ(α′))) dα′ by the alternating-point rule"""
        return self.spacing / (1j * np.pi) * np.where(self.odd, self.cot, 0.0)

    def pvi(self, f: np.ndarray) -> np.ndarray:
        return self.pvi_matrix @ f

    def pvi_decomposed(self, f: np.ndarray) -> np.ndarray:
        """The same integral as (1/2i)ℍ(f/ζ_α) + K[ζ]f"""
        return spectral.hilbert(f / self.geometry.zeta_alpha) / 2j + self.k_apply(f)


def k_operator(surface: SurfaceState, f: np.ndarray) -> np.ndarray:
    return SurfaceOperators(surface_geometry(surface)).k_apply(f)


GreenCurve = Union[SurfaceState, SolidBoundary]


def _green_samples(curve: GreenCurve):
    """(ζ, ζ_α, θ_α, orientation) with orientation +1 when iζ_α points into the fluid"""
    if isinstance(curve, SurfaceState):
        geometry = surface_geometry(curve)
        return geometry.zeta, geometry.zeta_alpha, geometry.theta_alpha, -1.0
    return curve.zeta, curve.zeta_alpha, curve.theta_alpha, 1.0


def kernel_identity(z: complex, curves: Sequence[GreenCurve],
                    on_node: Optional[Tuple[int, int]] = None) -> float:
    """
    ∫ k(z, P) dσ(P) over the listed curves with the fluid-pointing normal.

    Args:
        z: evaluation point
        curves: surface and/or solid boundaries
        on_node: (curve index, node index) when z is that quadrature node

    Returns:
        1 inside the fluid, ½ on its boundary, 0 outside (up to quadrature error)
    """
    total = 0.0
    for index, curve in enumerate(curves):
        zeta, zeta_alpha, theta_alpha, orientation = _green_samples(curve)
        spacing = 2.0 * np.pi / len(zeta)
        if on_node is not None and on_node[0] == index:
            node = on_node[1]
            others = np.arange(len(zeta)) != node
            values = np.real(orientation / (2.0 * np.pi) * 1j * zeta_alpha[others]
                             * cot_kernel(zeta[node], zeta[others]))
            total += spacing * (values.sum() + orientation * theta_alpha[node] / (4.0 * np.pi))
        else:
            values = np.real(orientation / (2.0 * np.pi) * 1j * zeta_alpha * cot_kernel(z, zeta))
            total += spacing * values.sum()
    return float(total)


def double_layer_potential(points: np.ndarray, phi: np.ndarray, boundary: SolidBoundary) -> np.ndarray:
    """u(z) = ∫ k(z, Q) φ(Q) dσ(Q) with the normal iζ_α/s_α, by the trapezoid rule"""
    weights = 1j * boundary.zeta_alpha * phi / (2.0 * np.pi)
    values = np.real(cot_matrix(np.atleast_1d(points), boundary.zeta) @ weights)
    return 2.0 * np.pi / boundary.n * values


def double_layer_boundary_value(phi: np.ndarray, boundary: SolidBoundary) -> np.ndarray:
    """Principal value of the double layer at the nodes, self term θ_α/(4π)"""
    cot = _self_cot_matrix(boundary.zeta)
    entries = np.real(1j * boundary.zeta_alpha[None, :] * cot) / (2.0 * np.pi)
    np.fill_diagonal(entries, boundary.theta_alpha / (4.0 * np.pi))
    return 2.0 * np.pi / boundary.n * (entries @ phi)


def jump_relation_check(phi: np.ndarray, boundary: SolidBoundary, h: float,
                        extrapolate: bool = True) -> Tuple[float, float]:
    """
    Compare off-curve double-layer values with u_± = ±½φ + PV.

    The potential is evaluated at P ± h n_P (and at 2h, 4h when extrapolating)
    on a refined quadrature grid; with `extrapolate` the three distances are
    combined to cancel the O(h) and O(h²) terms.

    Returns:
        (max deviation on the normal side, max deviation on the opposite side)
    """
    if h <= 0:
        raise ValueError("offset h must be positive")
    length = float(np.sum(boundary.s_alpha)) * 2.0 * np.pi / boundary.n
    fine_n = max(boundary.n, int(2 ** np.ceil(np.log2(4.0 * length / h))))
    fine = boundary.resampled(fine_n)
    fine_phi = spectral.resample(phi, fine_n)
    principal = double_layer_boundary_value(phi, boundary)
    normal = boundary.normal

    def side(sign: float) -> np.ndarray:
        offsets = (h, 2.0 * h, 4.0 * h) if extrapolate else (h,)
        samples = [double_layer_potential(boundary.zeta + sign * d * normal, fine_phi, fine)
                   for d in offsets]
        if extrapolate:
            return (8.0 * samples[0] - 6.0 * samples[1] + samples[2]) / 3.0
        return samples[0]

    plus = side(1.0) - (principal + 0.5 * phi)
    minus = side(-1.0) - (principal - 0.5 * phi)
    return float(np.max(np.abs(plus))), float(np.max(np.abs(minus)))
