"""
Three-dimensional apparatus around the ball

Support functions of vertex-defined convex bodies, spherical quadrature,
mean width and the minimal-mean-width residual, the twelve h.c.p. contact
directions and eta(K), the perturbed h.c.p. double lattice, exact Legendre
coefficients of the contact-direction zonal measure, zonal convolution of
spherical-harmonic expansions, the low-eta rotation search, Steiner volumes
and the density lower bound for (1 - lambda) B + lambda K.

NO CLI HERE - reports are printed by cli.py
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial, sqrt
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError
from scipy.spatial.transform import Rotation
from scipy.special import gammaln, lpmv

from config import (
    BALL_BOUND_CONFIG,
    HCP_CONFIG,
    MONTE_CARLO,
    QUADRATURE_CONFIG,
    ROTATION_SEARCH,
    get_tolerance,
)

logger = logging.getLogger(__name__)

BALL_VOLUME = 4 * np.pi / 3
BALL_SURFACE = 4 * np.pi
HCP_DENSITY = np.pi / sqrt(18)
HCP_MEAN_VOLUME = 4 * sqrt(2)


class BodyError(ValueError):
    """Vertex set does not span a three-dimensional convex body."""


class LatticeOptimizationError(ArithmeticError):
    """No admissible lattice basis near the seed (2 x1, 2 x2)."""


class RotationNotFound(ArithmeticError):
    """No rotation brings eta below half the mean width."""


class PreconditionError(ValueError):
    """Input outside the range where a construction or bound applies."""


# =============================================================================
# SPHERICAL QUADRATURE
# =============================================================================

@lru_cache(maxsize=8)
def sphere_quadrature(n_theta: Optional[int] = None, n_phi: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Product Gauss rule split at the coordinate planes.

    Gauss-Legendre in the polar angle on [0, pi/2] and [pi/2, pi], and in the
    azimuth on each quarter turn, so every octant gets its own smooth patch.

    Returns:
        (nodes, weights): unit vectors of shape (N, 3), weights summing to 4 pi
    """
    n_theta = n_theta or QUADRATURE_CONFIG['nodes_per_half_theta']
    n_phi = n_phi or QUADRATURE_CONFIG['nodes_per_quarter_phi']
    gx, gw = np.polynomial.legendre.leggauss(n_theta)
    theta = np.concatenate([(gx + 1) * np.pi / 4, (gx + 3) * np.pi / 4])
    theta_w = np.concatenate([gw, gw]) * np.pi / 4 * np.sin(theta)
    px, pw = np.polynomial.legendre.leggauss(n_phi)
    phi = np.concatenate([(px + 1 + 2 * q) * np.pi / 4 for q in range(4)])
    phi_w = np.tile(pw, 4) * np.pi / 4
    T, P = np.meshgrid(theta, phi, indexing='ij')
    nodes = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    weights = np.outer(theta_w, phi_w).ravel()
    return nodes, weights


def integrate(f: Callable[[np.ndarray], np.ndarray], order: int = 1) -> float:
    """Integral of f over the unit sphere; order 2 doubles the nodes per patch."""
    nodes, weights = sphere_quadrature(QUADRATURE_CONFIG['nodes_per_half_theta'] * order,
                                       QUADRATURE_CONFIG['nodes_per_quarter_phi'] * order)
    return float(weights @ f(nodes))


def quadrature_error(f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Difference between the default and the doubled-order rule."""
    return abs(integrate(f, 2) - integrate(f, 1))


def fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - sqrt(5)) * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


# =============================================================================
# CONVEX BODIES
# =============================================================================

@dataclass(frozen=True, eq=False)
class ConvexBody3:
    """Convex hull of vertices, or a ball when ball_radius is set.

    For a ball the vertices are only a sampled outline; support, volume and
    surface area are exact.
    """

    vertices: np.ndarray
    ball_radius: Optional[float] = None
    name: str = 'body'

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise BodyError(f"vertices must have shape (n, 3), got {vertices.shape}")
        if self.ball_radius is None:
            try:
                hull = ConvexHull(vertices)
            except (QhullError, ValueError) as exc:
                raise BodyError(f"hull is not three-dimensional: {exc}") from exc
            vertices = vertices[hull.vertices]
        elif self.ball_radius <= 0:
            raise BodyError("ball radius must be positive")
        object.__setattr__(self, 'vertices', vertices)

    @cached_property
    def _hull(self) -> ConvexHull:
        return ConvexHull(self.vertices)

    @property
    def is_ball(self) -> bool:
        return self.ball_radius is not None

    @cached_property
    def volume(self) -> float:
        if self.is_ball:
            return BALL_VOLUME * self.ball_radius ** 3
        return float(self._hull.volume)

    @cached_property
    def surface_area(self) -> float:
        if self.is_ball:
            return BALL_SURFACE * self.ball_radius ** 2
        return float(self._hull.area)

    def support(self, x: np.ndarray) -> np.ndarray:
        """h_K(x) = max over vertices of <x, vertex>, for any leading shape of x."""
        x = np.asarray(x, dtype=float)
        if self.is_ball:
            return self.ball_radius * np.linalg.norm(x, axis=-1)
        return np.max(x @ self.vertices.T, axis=-1)

    def scaled(self, factor: float) -> 'ConvexBody3':
        radius = None if self.ball_radius is None else self.ball_radius * factor
        return ConvexBody3(self.vertices * factor, radius, self.name)

    def rotated(self, rotation: Rotation) -> 'ConvexBody3':
        return ConvexBody3(rotation.apply(self.vertices), self.ball_radius, self.name)

    def volume_normalized(self) -> 'ConvexBody3':
        """Dilate to the volume of the unit ball."""
        return self.scaled((BALL_VOLUME / self.volume) ** (1 / 3))

    def to_dict(self) -> Dict:
        out = {'name': self.name, 'vertices': self.vertices.tolist()}
        if self.is_ball:
            out['ball_radius'] = self.ball_radius
        return out


def unit_ball(outline_points: int = 2562) -> ConvexBody3:
    return ConvexBody3(fibonacci_sphere(outline_points), ball_radius=1.0, name='ball')


def box(a: float, b: float, c: float) -> ConvexBody3:
    corners = np.array([[sx * a, sy * b, sz * c] for sx in (-0.5, 0.5) for sy in (-0.5, 0.5) for sz in (-0.5, 0.5)])
    return ConvexBody3(corners, name=f'box:{a:g},{b:g},{c:g}')


def unit_cube() -> ConvexBody3:
    body = box(1.0, 1.0, 1.0)
    return ConvexBody3(body.vertices, name='cube')


def octahedron() -> ConvexBody3:
    return ConvexBody3(np.vstack([np.eye(3), -np.eye(3)]), name='octahedron')


def random_polytope(rng: np.random.Generator, n: int = 20) -> ConvexBody3:
    """Hull of n uniform points on the unit sphere."""
    points = rng.standard_normal((n, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    return ConvexBody3(points, name=f'random:{n}')


def builtin_body(name: str, rng: Optional[np.random.Generator] = None) -> ConvexBody3:
    """Parse a builtin body name ('ball', 'cube', 'octahedron', 'box:a,b,c', 'random:n')."""
    key, _, arg = name.partition(':')
    if key == 'ball' and not arg:
        return unit_ball()
    if key == 'cube' and not arg:
        return unit_cube()
    if key == 'octahedron' and not arg:
        return octahedron()
    try:
        if key == 'box':
            sides = [float(s) for s in arg.split(',')]
            if len(sides) != 3 or min(sides) <= 0:
                raise BodyError(f"box needs three positive sides, got {arg!r}")
            return box(*sides)
        if key == 'random':
            return random_polytope(rng if rng is not None else np.random.default_rng(), int(arg))
    except ValueError as exc:
        if isinstance(exc, BodyError):
            raise
        raise BodyError(f"bad builtin body {name!r}: {exc}") from exc
    raise BodyError(f"unknown builtin body {name!r}")


# =============================================================================
# MEAN WIDTH / POSITION
# =============================================================================

def mean_width(K: ConvexBody3) -> float:
    """w = 2 * average of h_K over the sphere."""
    return 2 * integrate(K.support) / BALL_SURFACE


def min_width_residual(K: ConvexBody3) -> float:
    """Frobenius distance of the second moment of h_K from a multiple of the identity.

    Zero exactly for bodies in minimal-mean-width position.
    """
    nodes, weights = sphere_quadrature()
    h = K.support(nodes)
    moment = np.einsum('n,n,ni,nj->ij', weights, h, nodes, nodes)
    w = 2 * float(weights @ h) / BALL_SURFACE
    return float(np.linalg.norm(moment - (w / 6) * BALL_SURFACE * np.eye(3)))


def mixture_support(K: ConvexBody3, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    """Support function of (1 - lam) B + lam K."""
    def support(x):
        return (1 - lam) * np.linalg.norm(x, axis=-1) + lam * K.support(x)
    return support


def support_additivity_check(K: ConvexBody3, lam: float, directions: int = 500) -> float:
    """Largest gap between the mixture support and that of the explicit Minkowski point cloud.

    Directions are the twelve contact points plus a slice of the quadrature
    nodes; the sphere summand is sampled at those same directions, so its
    support is exact there.
    """
    nodes, _ = sphere_quadrature()
    step = max(1, len(nodes) // directions)
    D = np.vstack([hcp_frame().points, nodes[::step]])
    body_points = K.ball_radius * D if K.is_ball else K.vertices
    cloud = ((1 - lam) * D[:, None, :] + lam * body_points[None, :, :]).reshape(-1, 3)
    explicit = np.max(D @ cloud.T, axis=1)
    return float(np.max(np.abs(explicit - mixture_support(K, lam)(D))))


# =============================================================================
# H.C.P. FRAME AND ETA
# =============================================================================

@dataclass(frozen=True, eq=False)
class HcpFrame:
    """The twelve contact points of the unit ball in the fixed h.c.p. realization."""

    points: np.ndarray

    def __getitem__(self, i: int) -> np.ndarray:
        """1-based access, x_1 .. x_12."""
        return self.points[i - 1]


@lru_cache(maxsize=1)
def hcp_frame() -> HcpFrame:
    x1 = np.array([1.0, 0.0, 0.0])
    x2 = np.array([0.5, sqrt(3) / 2, 0.0])
    x7 = np.array([0.5, 1 / sqrt(12), sqrt(2 / 3)])
    x10 = np.array([0.5, 1 / sqrt(12), -sqrt(2 / 3)])
    points = np.array([
        x1, x2, x2 - x1, -x1, -x2, x1 - x2,
        x7, x7 - x1, x7 - x2,
        x10, x10 - x1, x10 - x2,
    ])
    points.setflags(write=False)
    return HcpFrame(points)


def eta(K: ConvexBody3) -> float:
    """Mean support height over the twelve contact directions."""
    return float(np.mean(K.support(hcp_frame().points)))


def contact_heights(K: ConvexBody3) -> np.ndarray:
    return K.support(hcp_frame().points)


# =============================================================================
# PERTURBED H.C.P. DOUBLE LATTICE
# =============================================================================

@dataclass
class DoubleLattice3D:
    """Translations a1, a2 in the xy-plane and inversion centres c7 = x7', c10 = x10'."""

    a1: np.ndarray
    a2: np.ndarray
    c7: np.ndarray
    c10: np.ndarray
    heights: np.ndarray = field(default_factory=lambda: np.ones(12))

    def __post_init__(self):
        if abs(self.determinant) <= get_tolerance('geometric'):
            raise LatticeOptimizationError("double lattice is degenerate")

    @property
    def a3(self) -> np.ndarray:
        """Composition of the two inversions: translation by 2 (c10 - c7), up to sign."""
        return 2 * (self.c7 - self.c10)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(np.column_stack([self.a1, self.a2, self.a3])))

    @property
    def mean_volume(self) -> float:
        return abs(self.determinant) / 2

    def centers(self, shells: int) -> np.ndarray:
        """Images of the origin: translation lattice points and their inversions about c7."""
        r = np.arange(-shells, shells + 1)
        n = np.stack(np.meshgrid(r, r, r, indexing='ij'), axis=-1).reshape(-1, 3)
        lattice = n @ np.vstack([self.a1, self.a2, self.a3])
        return np.vstack([lattice, 2 * self.c7 - lattice])

    def to_dict(self) -> Dict:
        return {
            'a1': self.a1.tolist(),
            'a2': self.a2.tolist(),
            'c7': self.c7.tolist(),
            'c10': self.c10.tolist(),
            'mean_volume': self.mean_volume,
        }


def _line_meet(n1: np.ndarray, g1: float, n2: np.ndarray, g2: float) -> np.ndarray:
    return np.linalg.solve(np.vstack([n1, n2]), np.array([g1, g2]))


def hexagon_lattice(heights: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Densest lattice basis for the hexagon {<x, x_i> <= h_i, i = 1..6} near (2 x1, 2 x2).

    The lattice packings of the hexagon are those of its central
    symmetrization, whose supports are g_i = (h_i + h_{i+3}) / 2; that hexagon
    tiles, and the tiling translations are sums of consecutive vertices.
    """
    frame = hcp_frame()
    h = np.asarray(heights, dtype=float)
    normals = frame.points[:6, :2]
    g = np.concatenate([(h[:3] + h[3:6]) / 2] * 2)
    if np.any(g <= 0):
        raise LatticeOptimizationError("hexagon supports must be positive")
    vertex = [_line_meet(normals[i], g[i], normals[(i + 1) % 6], g[(i + 1) % 6]) for i in range(6)]
    # vertex[i] joins the faces facing x_{i+1} and x_{i+2}
    edges = np.roll(np.array(vertex), -1, axis=0) - np.array(vertex)
    turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
    if np.any(turns <= 0):
        raise LatticeOptimizationError("symmetrized projection is not a proper hexagon")
    a1 = vertex[5] + vertex[0]
    a2 = vertex[0] + vertex[1]
    radius = HCP_CONFIG['seed_radius']
    for a, seed, label in ((a1, 2 * frame[1][:2], 'a1'), (a2, 2 * frame[2][:2], 'a2')):
        if np.linalg.norm(a - seed) > radius:
            raise LatticeOptimizationError(f"{label} left the seed basin: |{label} - seed| > {radius}")
    return np.append(a1, 0.0), np.append(a2, 0.0)


def _inversion_centre(frame: HcpFrame, h: np.ndarray, first: int, a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    """x' with <x', x_first> = h, <x' - a1/2, x_first+1> = h, <x' - a2/2, x_first+2> = h."""
    idx = [first, first + 1, first + 2]
    A = np.vstack([frame[i] for i in idx])
    rhs = np.array([
        h[first - 1],
        h[first] + frame[first + 1] @ a1 / 2,
        h[first + 1] + frame[first + 2] @ a2 / 2,
    ])
    return np.linalg.solve(A, rhs)


def build_hcp_double_lattice(heights: Sequence[float]) -> DoubleLattice3D:
    """Perturbed h.c.p. double lattice for support heights h_1..h_12 at the contact points."""
    h = np.asarray(heights, dtype=float)
    if h.shape != (12,):
        raise PreconditionError(f"expected twelve heights, got shape {h.shape}")
    spread = float(np.max(np.abs(h - np.mean(h))) / np.mean(h))
    if spread > HCP_CONFIG['max_perturbation']:
        logger.warning(f"heights deviate by {spread:.3g} from their mean; the lattice is only locally valid")
    frame = hcp_frame()
    a1, a2 = hexagon_lattice(h)
    return DoubleLattice3D(
        a1=a1,
        a2=a2,
        c7=_inversion_centre(frame, h, 7, a1, a2),
        c10=_inversion_centre(frame, h, 10, a1, a2),
        heights=h,
    )


def hcp_mean_volume_formula(eta1: float, eta2: float, eta3: float) -> float:
    """Closed-form mean volume in terms of eta_i = h_i + h_{i+3} - 2, valid for sum h = 12."""
    s = eta1 + eta2 + eta3
    q = eta1 ** 2 + eta2 ** 2 + eta3 ** 2
    r2 = sqrt(2)
    return 4 * r2 - r2 / 9 * s ** 2 - 2 * r2 / 3 * q + r2 / 9 * s * (2 * q - s ** 2)


def hcp_quadratic_part(eta1: float, eta2: float, eta3: float) -> float:
    s = eta1 + eta2 + eta3
    q = eta1 ** 2 + eta2 ** 2 + eta3 ** 2
    return -sqrt(2) / 9 * s ** 2 - 2 * sqrt(2) / 3 * q


def pair_etas(heights: Sequence[float]) -> Tuple[float, float, float]:
    h = np.asarray(heights, dtype=float)
    return tuple(float(h[i] + h[i + 3] - 2) for i in range(3))


def normalized_heights(heights: Sequence[float]) -> np.ndarray:
    h = np.asarray(heights, dtype=float)
    return h * 12 / h.sum()


def mean_volume_discrepancy(heights: Sequence[float]) -> float:
    """Determinant mean volume minus the closed formula, after normalizing sum h = 12."""
    h = normalized_heights(heights)
    return build_hcp_double_lattice(h).mean_volume - hcp_mean_volume_formula(*pair_etas(h))


def hcp_admissibility_check(shells: int = 3, lattice: Optional[DoubleLattice3D] = None) -> float:
    """Smallest distance between distinct unit-ball centres of the double lattice."""
    lattice = lattice or build_hcp_double_lattice(np.ones(12))
    centers = lattice.centers(shells)
    # the group acts transitively, so distances from the origin copy suffice
    dist = np.linalg.norm(centers, axis=1)
    return float(np.min(dist[dist > get_tolerance('geometric')]))


@dataclass
class VoronoiReport:
    volume: float
    faces: int
    min_plane_distance: float

    @property
    def passed(self) -> bool:
        return (abs(self.volume - HCP_MEAN_VOLUME) <= 1e-9 and self.faces == 12
                and self.min_plane_distance >= 1 - 1e-12)


def voronoi_cell_check() -> VoronoiReport:
    """Volume and faces of P = {<x, x_i> <= 1}, the Voronoi cell of the h.c.p. structure."""
    X = hcp_frame().points
    halfspaces = np.hstack([X, -np.ones((12, 1))])
    cell = HalfspaceIntersection(halfspaces, np.zeros(3))
    vertices = cell.intersections
    hull = ConvexHull(vertices)
    on_plane = np.abs(vertices @ X.T - 1) <= 1e-9
    faces = int(np.sum(on_plane.sum(axis=0) >= 3))
    distances = 1 / np.linalg.norm(X, axis=1)
    return VoronoiReport(float(hull.volume), faces, float(distances.min()))


# =============================================================================
# LEGENDRE COEFFICIENTS OF THE CONTACT-DIRECTION MEASURE
# =============================================================================

# heights <x7, x_i> as k/6, with multiplicities
CONTACT_NODES = {6: 1, 3: 4, 0: 2, -2: 1, -3: 2, -5: 2}


@lru_cache(maxsize=None)
def rescaled_legendre(k: int, lmax: int) -> Tuple[int, ...]:
    """Q_l(k/6) = 6^l l! P_l(k/6) for l = 0..lmax, in exact integers."""
    values = [1, k]
    for l in range(1, lmax):
        values.append((2 * l + 1) * k * values[l] - 36 * l * l * values[l - 1])
    return tuple(values[:lmax + 1])


@dataclass(frozen=True)
class LegendreCoefficient:
    l: int
    value: Fraction
    scaled: int
    q_values: Dict[int, int]

    def residue(self, k: int, modulus: int) -> int:
        return self.q_values[k] % modulus

    def __float__(self):
        return float(self.value)


def legendre_c(l: int) -> LegendreCoefficient:
    """c_l = sum over contact nodes of multiplicity * P_l(node), exactly."""
    if l < 0:
        raise ValueError("degree must be nonnegative")
    q_values = {k: rescaled_legendre(k, l)[l] for k in range(-6, 7)}
    scaled = sum(mult * q_values[k] for k, mult in CONTACT_NODES.items())
    return LegendreCoefficient(l, Fraction(scaled, 6 ** l * factorial(l)), scaled, q_values)


def legendre_table(lmax: int) -> pd.DataFrame:
    rows = []
    for l in range(lmax + 1):
        c = legendre_c(l)
        rows.append({'l': l, 'c_l': f'{c.value.numerator}/{c.value.denominator}', 'value': float(c.value)})
    return pd.DataFrame(rows)


@dataclass
class ResidueReport:
    l_max: int
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures


def residue_pattern_check(l_max: int) -> ResidueReport:
    """The mod 8 / mod 16 residue pattern showing c_l != 0 for l >= 3."""
    if l_max < 4:
        raise ValueError("l_max must be at least 4")
    half = (1, 3, 7, 1)
    five_sixths = (1, 5, 7, 7)
    failures = []
    for l in range(l_max + 1):
        c = legendre_c(l)
        if c.residue(3, 8) != half[l % 4]:
            failures.append(f'Q_{l}(1/2) = {c.residue(3, 8)} mod 8')
        if c.residue(5, 8) != five_sixths[l % 4]:
            failures.append(f'Q_{l}(5/6) = {c.residue(5, 8)} mod 8')
        if l < 3:
            continue
        for k in (0, 2, 6):
            if c.residue(k, 8):
                failures.append(f'Q_{l}({k}/6) = {c.residue(k, 8)} mod 8')
        expected = (4, 8) if l % 2 else (8, 16)
        if c.scaled % expected[1] != expected[0]:
            failures.append(f'6^{l} {l}! c_{l} = {c.scaled % expected[1]} mod {expected[1]}')
    if failures:
        logger.warning(f"residue pattern: {len(failures)} failures, first {failures[0]}")
    return ResidueReport(l_max, failures)


# =============================================================================
# SPHERICAL HARMONICS / ZONAL CONVOLUTION
# =============================================================================

def real_harmonics(lmax: int, x: np.ndarray) -> np.ndarray:
    """Real orthonormal spherical harmonics Y_{l,m}(x), shape (N, lmax+1, 2 lmax+1), m offset by lmax."""
    x = np.atleast_2d(x)
    z = np.clip(x[:, 2], -1.0, 1.0)
    phi = np.arctan2(x[:, 1], x[:, 0])
    out = np.zeros((len(x), lmax + 1, 2 * lmax + 1))
    for l in range(lmax + 1):
        for m in range(l + 1):
            norm = np.sqrt((2 * l + 1) / (4 * np.pi) * np.exp(gammaln(l - m + 1) - gammaln(l + m + 1)))
            base = norm * lpmv(m, l, z)
            if m == 0:
                out[:, l, lmax] = base
            else:
                out[:, l, lmax + m] = np.sqrt(2) * base * np.cos(m * phi)
                out[:, l, lmax - m] = np.sqrt(2) * base * np.sin(m * phi)
    return out


@dataclass
class HarmonicSupport:
    """Truncated real spherical-harmonic expansion; coeffs[l, m + lmax]."""

    lmax: int
    coeffs: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        flat = x.reshape(-1, 3)
        flat = flat / np.linalg.norm(flat, axis=1, keepdims=True)
        values = np.einsum('nlm,lm->n', real_harmonics(self.lmax, flat), self.coeffs)
        return (values * np.linalg.norm(x.reshape(-1, 3), axis=1)).reshape(shape)

    @property
    def mean_width(self) -> float:
        return 2 * self.coeffs[0, self.lmax] / np.sqrt(4 * np.pi)

    def degree_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coeffs, axis=1)

    def to_json(self) -> Dict:
        coeffs = {}
        for l in range(self.lmax + 1):
            for m in range(-l, l + 1):
                coeffs[f'{l},{m}'] = float(self.coeffs[l, m + self.lmax])
        return {'lmax': self.lmax, 'coeffs': coeffs}

    @classmethod
    def from_json(cls, data: Dict) -> 'HarmonicSupport':
        lmax = int(data['lmax'])
        coeffs = np.zeros((lmax + 1, 2 * lmax + 1))
        for key, value in data['coeffs'].items():
            l, m = (int(s) for s in key.split(','))
            if l > lmax or abs(m) > l:
                raise ValueError(f"harmonic index {key!r} outside lmax {lmax}")
            coeffs[l, m + lmax] = value
        return cls(lmax, coeffs)


def harmonic_expansion(support: Callable[[np.ndarray], np.ndarray], lmax: Optional[int] = None) -> HarmonicSupport:
    """Project a function on the sphere onto harmonics of degree <= lmax by quadrature.

    Truncated expansions of support functions need not be convex; they are
    used only for zonal convolution.
    """
    lmax = QUADRATURE_CONFIG['harmonic_lmax'] if lmax is None else lmax
    nodes, weights = sphere_quadrature()
    Y = real_harmonics(lmax, nodes)
    coeffs = np.einsum('n,n,nlm->lm', weights, support(nodes), Y)
    return HarmonicSupport(lmax, coeffs)


def zonal_convolve(h: HarmonicSupport) -> HarmonicSupport:
    """Scale each degree-l component by c_l / 12."""
    factors = np.array([float(legendre_c(l).value) / 12 for l in range(h.lmax + 1)])
    return HarmonicSupport(h.lmax, h.coeffs * factors[:, None])


def _align_to_x7(poles: np.ndarray) -> Rotation:
    """Rotations taking each pole to x7."""
    x7 = hcp_frame()[7]
    poles = np.atleast_2d(poles)
    axis = np.cross(poles, x7)
    s = np.linalg.norm(axis, axis=1)
    c = poles @ x7
    fallback = np.cross([1.0, 0.0, 0.0], x7)
    fallback /= np.linalg.norm(fallback)
    unit = np.where(s[:, None] > 1e-12, axis / np.maximum(s, 1e-300)[:, None], fallback)
    return Rotation.from_rotvec(unit * np.arctan2(s, c)[:, None])


def _spin(theta: float) -> Rotation:
    return Rotation.from_rotvec(theta * hcp_frame()[7])


def _eta_of_rotations(support: Callable[[np.ndarray], np.ndarray], rotations: Rotation) -> np.ndarray:
    """eta(R K) = mean of h_K(R^T x_i) for a stack of rotations."""
    R = rotations.as_matrix().reshape(-1, 3, 3)
    pulled = np.einsum('nji,kj->nki', R, hcp_frame().points)
    return np.mean(support(pulled), axis=-1)


def rotation_average(support: Callable[[np.ndarray], np.ndarray], y: Sequence[float],
                     samples: Optional[int] = None) -> float:
    """g(y): eta averaged over the rotations taking y to x7."""
    samples = samples or QUADRATURE_CONFIG['circle_samples']
    y = np.asarray(y, dtype=float)
    base = _align_to_x7(y / np.linalg.norm(y))[0]
    thetas = 2 * np.pi * np.arange(samples) / samples
    rotations = Rotation.from_rotvec(thetas[:, None] * hcp_frame()[7][None, :]) * base
    return float(np.mean(_eta_of_rotations(support, rotations)))


def funk_hecke_check(lmax: int = 10, rng: Optional[np.random.Generator] = None, points: int = 4) -> float:
    """Largest gap between coefficient-space convolution and the rotation average, degrees 0..lmax."""
    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for l in range(lmax + 1):
        pole = rng.standard_normal(3)
        pole /= np.linalg.norm(pole)

        def zonal(x, l=l, pole=pole):
            x = np.asarray(x, dtype=float)
            r = np.linalg.norm(x, axis=-1)
            return r * np.polynomial.legendre.legval((x @ pole) / r, [0] * l + [1])

        convolved = zonal_convolve(harmonic_expansion(zonal, lmax))
        for _ in range(points):
            y = rng.standard_normal(3)
            y /= np.linalg.norm(y)
            worst = max(worst, abs(float(convolved(y[None, :])[0]) - rotation_average(zonal, y)))
    return worst


# =============================================================================
# LOW-ETA ROTATION
# =============================================================================

@dataclass
class LowEtaRotation:
    rotation: Rotation
    eta: float
    mean_width: float
    found: bool

    @property
    def margin(self) -> float:
        return self.mean_width / 2 - self.eta


def find_low_eta_rotation(K: ConvexBody3, require: bool = False) -> LowEtaRotation:
    """Grid over poles and spins about x7, then Nelder-Mead refinement of the best cells.

    The search minimizes eta(R K); a rotation is reported as found when
    eta drops below w/2 by more than the configured margin.
    """
    cfg = ROTATION_SEARCH
    base = _align_to_x7(fibonacci_sphere(cfg['sphere_points']))
    best_eta, best_rot = [], []
    for theta in 2 * np.pi * np.arange(cfg['inplane_angles']) / cfg['inplane_angles']:
        rotations = _spin(theta) * base
        best_eta.append(_eta_of_rotations(K.support, rotations))
        best_rot.append(rotations.as_rotvec())
    etas = np.concatenate(best_eta)
    rotvecs = np.concatenate(best_rot)

    def objective(r):
        return float(_eta_of_rotations(K.support, Rotation.from_rotvec(r))[0])

    candidates = np.argsort(etas, kind='stable')[:cfg['refine_best']]
    winner_eta, winner = float(etas[candidates[0]]), rotvecs[candidates[0]]
    for idx in candidates:
        res = minimize(objective, rotvecs[idx], method='Nelder-Mead',
                       options={'xatol': 1e-10, 'fatol': 1e-14, 'maxiter': 2000})
        if res.fun < winner_eta:
            winner_eta, winner = float(res.fun), res.x
    w = mean_width(K)
    result = LowEtaRotation(Rotation.from_rotvec(winner), winner_eta, w, w / 2 - winner_eta > cfg['margin'])
    logger.info(f"low-eta rotation: eta {winner_eta:.9f}, w/2 {w / 2:.9f}, found {result.found}")
    if require and not result.found:
        raise RotationNotFound(f"no rotation with eta < w/2 (margin {result.margin:.3e})")
    return result


# =============================================================================
# STEINER VOLUME AND THE DENSITY BOUND
# =============================================================================

def steiner_volume(vol_K: float, w: float, S: float, lam: float) -> float:
    """vol((1 - lam) B + lam K) from the mixed volumes of B and K."""
    if not 0 <= lam <= 1:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    mu = 1 - lam
    return BALL_VOLUME * mu ** 3 + 2 * np.pi * w * lam * mu ** 2 + S * lam ** 2 * mu + vol_K * lam ** 3


def steiner_lower_ratio(w: float, lam: float) -> float:
    """vol(K_lam) / vol(B) lower bound for vol(K) = vol(B), using S(K) >= 4 pi."""
    return 1 + 3 * (w / 2 - 1) * lam * (1 - lam) ** 2


def sampled_hull_volume(K: ConvexBody3, lam: float, n: Optional[int] = None,
                        rng: Optional[np.random.Generator] = None) -> float:
    """Hull volume of (1 - lam) * (random sphere points) + lam * vertices."""
    n = n or MONTE_CARLO['sphere_samples']
    rng = rng or np.random.default_rng()
    sphere = rng.standard_normal((n, 3))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    if K.is_ball:
        cloud = ((1 - lam) + lam * K.ball_radius) * sphere
    else:
        cloud = ((1 - lam) * sphere[:, None, :] + lam * K.vertices[None, :, :]).reshape(-1, 3)
    return float(ConvexHull(cloud).volume)


@dataclass
class DensityBound:
    lam: float
    bound: float
    eta: float
    eta_lambda: float
    mean_width: float
    residual: float
    direct_mean_volume: Optional[float] = None

    @property
    def excess(self) -> float:
        return self.bound - HCP_DENSITY

    @property
    def beta(self) -> float:
        return self.excess / self.lam if self.lam > 0 else 0.0

    def to_dict(self) -> Dict:
        return {
            'lambda': self.lam,
            'bound': self.bound,
            'excess': self.excess,
            'beta': self.beta,
            'eta': self.eta,
            'eta_lambda': self.eta_lambda,
            'mean_width': self.mean_width,
            'min_width_residual': self.residual,
            'direct_mean_volume': self.direct_mean_volume,
        }


def density_lower_bound(K: ConvexBody3, lam: float, rotation: Optional[Rotation] = None) -> DensityBound:
    """Lower bound on the double-lattice density of (1 - lam) B + lam K.

    K is normalized to the volume of B and rotated (by find_low_eta_rotation
    unless a rotation is given) so that eta(K) <= w/2. The volume of the
    mixture is bounded through Steiner's formula with S(K) >= 4 pi, and the
    perturbed h.c.p. double lattice has mean volume at most 4 sqrt(2) eta^3.
    """
    if not 0 <= lam <= 1:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    body = K.volume_normalized()
    if rotation is None and not body.is_ball:
        rotation = find_low_eta_rotation(body).rotation
    if rotation is not None:
        body = body.rotated(rotation)
    w = mean_width(body)
    eta_k = eta(body)
    if eta_k > w / 2 + get_tolerance('quadrature'):
        raise PreconditionError(f"eta(K) = {eta_k:.9f} exceeds w/2 = {w / 2:.9f}")
    residual = min_width_residual(body)
    if residual > 1e-6:
        logger.info(f"body is not in minimal-mean-width position (residual {residual:.3e})")

    if BALL_BOUND_CONFIG['surface_floor'] == 'isoperimetric':
        volume = BALL_VOLUME * steiner_lower_ratio(w, lam)
    else:
        volume = steiner_volume(BALL_VOLUME, w, body.surface_area, lam)
    eta_lam = 1 + (eta_k - 1) * lam
    bound = volume / (HCP_MEAN_VOLUME * eta_lam ** 3)

    direct = None
    try:
        heights = (1 - lam) + lam * contact_heights(body)
        direct = build_hcp_double_lattice(heights).mean_volume
    except LatticeOptimizationError as exc:
        logger.warning(f"perturbed lattice unavailable at lambda {lam:.3g}: {exc}")
    return DensityBound(lam, float(bound), eta_k, eta_lam, w, residual, direct)


def bound_slope(K: ConvexBody3, lambdas: Optional[Sequence[float]] = None) -> Tuple[float, List[DensityBound]]:
    """beta with bound - pi/sqrt(18) > beta * lambda on the lambda grid (half the smallest slope)."""
    lambdas = lambdas or BALL_BOUND_CONFIG['lambdas']
    body = K.volume_normalized()
    rotation = None if body.is_ball else find_low_eta_rotation(body).rotation
    bounds = [density_lower_bound(K, lam, rotation) for lam in lambdas]
    beta = 0.5 * min(b.beta for b in bounds)
    return beta, bounds
