"""
Planar convex-body engine for double-lattice packings

A convex polygon is a counterclockwise vertex array. For a chord direction
theta the polygon is split into two monotone chains; the chord length at
offset s (the signed distance of the chord's line from the origin, measured
along the left normal of the direction) is then linear between vertex
offsets and concave overall. Everything below is built on that profile:

- L(theta), the length of K in a direction (largest chord)
- the half-length parallelogram whose parallel sides have length L/2
- Delta(K) = least half-length parallelogram area, and the double-lattice
  density A / (2 Delta)
- the double lattice realising that density, and its admissibility check

NO EXACT ARITHMETIC HERE - heptagon constants live in exactfield.py and
heptagon_certificate.py. Polygons are floating point throughout.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.spatial import ConvexHull, QhullError
from shapely.geometry import Point, Polygon as ShapelyPolygon

from config import SWEEP_CONFIG, get_tolerance

logger = logging.getLogger(__name__)


class ConvexityError(ValueError):
    """Vertices do not describe a strictly convex polygon with positive area."""


class DegenerateDirectionError(ValueError):
    """The polygon has zero length in the requested direction."""


class InvalidParallelogramError(ValueError):
    """Chords fail the half-length parallelogram invariants."""


class OriginNotInteriorError(ValueError):
    """The origin is not an interior point of a polygon."""


# =============================================================================
# POLYGON TYPE
# =============================================================================

def _cross(o, a, b) -> np.ndarray:
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _canonicalize(vertices: np.ndarray) -> np.ndarray:
    """Orient counterclockwise, drop repeated and edge-interior vertices, check convexity."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise ConvexityError(f"expected an (n, 2) vertex array, got shape {vertices.shape}")
    if len(vertices) >= 2 and np.allclose(vertices[0], vertices[-1]):
        vertices = vertices[:-1]
    if len(vertices) < 3:
        raise ConvexityError("a polygon needs at least three vertices")

    area = _signed_area(vertices)
    if area < 0:
        logger.debug("reorienting clockwise polygon")
        vertices = vertices[::-1].copy()

    scale = float(np.max(np.abs(vertices))) or 1.0
    collinear = get_tolerance('collinear') * scale * scale
    changed = True
    while changed and len(vertices) >= 3:
        prev = np.roll(vertices, 1, axis=0)
        nxt = np.roll(vertices, -1, axis=0)
        turn = _cross(prev, vertices, nxt)
        keep = np.abs(turn) > collinear
        changed = not keep.all()
        if changed:
            # drop one vertex at a time so a run of collinear points keeps its ends
            drop = int(np.flatnonzero(~keep)[0])
            vertices = np.delete(vertices, drop, axis=0)

    if len(vertices) < 3:
        raise ConvexityError("polygon is degenerate after removing collinear vertices")
    prev = np.roll(vertices, 1, axis=0)
    nxt = np.roll(vertices, -1, axis=0)
    turn = _cross(prev, vertices, nxt)
    if np.any(turn < -get_tolerance('geometric') * scale * scale):
        raise ConvexityError("vertices are not in convex position")
    # a convex vertex sequence can still wind more than once
    outgoing = nxt - vertices
    incoming = vertices - prev
    exterior = np.arctan2(_cross(np.zeros_like(incoming), incoming, outgoing),
                          np.einsum('ij,ij->i', incoming, outgoing))
    if exterior.sum() > 2 * np.pi + 1e-6:
        raise ConvexityError("vertex sequence winds more than once")
    if _signed_area(vertices) <= 0:
        raise ConvexityError("polygon has no interior")
    return vertices


@dataclass(frozen=True)
class ConvexPolygon:
    """Counterclockwise strictly convex polygon."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'vertices', _canonicalize(self.vertices))
        self.vertices.setflags(write=False)

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> 'ConvexPolygon':
        """Convex hull of a point cloud."""
        points = np.asarray(points, dtype=float)
        try:
            hull = ConvexHull(points)
        except (QhullError, ValueError) as exc:
            raise ConvexityError(f"convex hull failed: {exc}") from exc
        return cls(points[hull.vertices])

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def transform(self, matrix, offset=(0.0, 0.0)) -> 'ConvexPolygon':
        """Image under x -> A x + b (orientation restored for reflections)."""
        matrix = np.asarray(matrix, dtype=float)
        if abs(np.linalg.det(matrix)) < get_tolerance('geometric'):
            raise ConvexityError("affine map is singular")
        return ConvexPolygon(self.vertices @ matrix.T + np.asarray(offset, dtype=float))

    def scaled(self, factor: float) -> 'ConvexPolygon':
        return ConvexPolygon(self.vertices * factor)

    def rotated(self, angle: float) -> 'ConvexPolygon':
        c, s = np.cos(angle), np.sin(angle)
        return self.transform([[c, -s], [s, c]])

    def reflected(self, center) -> 'ConvexPolygon':
        """Point inversion x -> 2c - x."""
        return ConvexPolygon(2 * np.asarray(center, dtype=float) - self.vertices)

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.vertices)

    def boundary_distance(self, point) -> float:
        return float(self.to_shapely().exterior.distance(Point(point)))

    def to_dict(self) -> Dict:
        return {'vertices': self.vertices.tolist()}


# =============================================================================
# BUILDERS
# =============================================================================

def regular_polygon(k: int, radius: float = 1.0, phase: float = 0.0) -> ConvexPolygon:
    if k < 3:
        raise ConvexityError("a regular polygon needs k >= 3")
    angles = phase + 2 * np.pi * np.arange(k) / k
    return ConvexPolygon(radius * np.column_stack([np.cos(angles), np.sin(angles)]))


def disk_polygon(k: int = 4096) -> ConvexPolygon:
    """Unit disk approximated by an inscribed regular k-gon."""
    return regular_polygon(k)


def unit_square() -> ConvexPolygon:
    return ConvexPolygon([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]])


def unit_triangle() -> ConvexPolygon:
    """Equilateral triangle with unit side, centroid at the origin."""
    h = np.sqrt(3) / 2
    return ConvexPolygon([[-0.5, -h / 3], [0.5, -h / 3], [0.0, 2 * h / 3]])


def regular_heptagon() -> ConvexPolygon:
    """Vertices m_i = R^i (1, 0), evaluated from their exact field values."""
    from exactfield import heptagon_vertex

    return ConvexPolygon([[float(c) for c in heptagon_vertex(i)] for i in range(7)])


def random_convex_polygon(rng: np.random.Generator, min_points: int = 3, max_points: int = 30) -> ConvexPolygon:
    """Hull of 3..30 uniform points in the unit square (resampled until non-degenerate)."""
    while True:
        count = int(rng.integers(min_points, max_points + 1))
        points = rng.random((count, 2))
        try:
            polygon = ConvexPolygon.from_points(points)
        except ConvexityError:
            continue
        if polygon.area > 1e-6:
            return polygon


def builtin_polygon(name: str) -> ConvexPolygon:
    """Resolve a builtin name: heptagon, square, triangle, ngon:k, disk:k."""
    name = name.strip().lower()
    if name == 'heptagon':
        return regular_heptagon()
    if name == 'square':
        return unit_square()
    if name == 'triangle':
        return unit_triangle()
    kind, _, arg = name.partition(':')
    if kind in ('ngon', 'disk') and arg:
        try:
            k = int(arg)
        except ValueError:
            raise ValueError(f"bad vertex count in builtin {name!r}") from None
        return regular_polygon(k) if kind == 'ngon' else disk_polygon(k)
    raise ValueError(f"unknown builtin polygon {name!r}")


# =============================================================================
# CHORD PROFILE
# =============================================================================

def _direction(theta: float) -> Tuple[np.ndarray, np.ndarray]:
    d = np.array([np.cos(theta), np.sin(theta)])
    return d, np.array([-d[1], d[0]])


@dataclass(frozen=True)
class ChordProfile:
    """Chord positions along a unit direction d as functions of the offset s = <x, n>."""

    direction: np.ndarray
    normal: np.ndarray
    s_a: np.ndarray
    t_a: np.ndarray
    s_b: np.ndarray
    t_b: np.ndarray

    @property
    def breakpoints(self) -> np.ndarray:
        lo = max(self.s_a[0], self.s_b[0])
        hi = min(self.s_a[-1], self.s_b[-1])
        bp = np.unique(np.concatenate([self.s_a, self.s_b]))
        return np.clip(bp, lo, hi)

    def ends(self, s) -> Tuple[np.ndarray, np.ndarray]:
        return np.interp(s, self.s_a, self.t_a), np.interp(s, self.s_b, self.t_b)

    def chord(self, s) -> np.ndarray:
        ta, tb = self.ends(s)
        return np.abs(ta - tb)

    def point(self, t: float, s: float) -> np.ndarray:
        return t * self.direction + s * self.normal


def chord_profile(vertices: np.ndarray, direction: np.ndarray) -> ChordProfile:
    """Split a convex polygon into the two offset-monotone chains for a unit direction."""
    direction = np.asarray(direction, dtype=float)
    normal = np.array([-direction[1], direction[0]])
    s = vertices @ normal
    t = vertices @ direction
    n = len(s)
    scale = float(np.max(np.abs(vertices))) or 1.0
    tol = get_tolerance('geometric') * scale
    lo = np.flatnonzero(s <= s.min() + tol)
    hi = np.flatnonzero(s >= s.max() - tol)
    lo_mask = np.zeros(n, dtype=bool)
    lo_mask[lo] = True
    hi_mask = np.zeros(n, dtype=bool)
    hi_mask[hi] = True

    a0 = int(next(i for i in lo if not lo_mask[(i + 1) % n]))
    a1 = int(hi[np.argmin((hi - a0) % n)])
    chain_a = (a0 + np.arange((a1 - a0) % n + 1)) % n
    b0 = int(next(i for i in hi if not hi_mask[(i + 1) % n]))
    b1 = int(lo[np.argmin((lo - b0) % n)])
    chain_b = ((b0 + np.arange((b1 - b0) % n + 1)) % n)[::-1]

    return ChordProfile(
        direction=direction,
        normal=normal,
        s_a=np.maximum.accumulate(s[chain_a]),
        t_a=t[chain_a],
        s_b=np.maximum.accumulate(s[chain_b]),
        t_b=t[chain_b],
    )


def level_offsets(profile: ChordProfile, level: float) -> Tuple[float, float]:
    """Extreme offsets (s_minus, s_plus) at which the chord length is still >= level.

    The chord length is concave and piecewise linear in s, so the set where
    it reaches the level is an interval; its ends are found by exact linear
    interpolation between breakpoints.
    """
    bp = profile.breakpoints
    chord = profile.chord(bp)
    slack = level * 1e-12
    above = np.flatnonzero(chord >= level - slack)
    if len(above) == 0:
        raise DegenerateDirectionError(f"no chord reaches length {level:.6g}")
    j_lo, j_hi = int(above[0]), int(above[-1])

    def crossing(j_in: int, j_out: int) -> float:
        c_in, c_out = chord[j_in], chord[j_out]
        if c_in - c_out <= 0:
            return float(bp[j_in])
        return float(bp[j_in] + (c_in - level) / (c_in - c_out) * (bp[j_out] - bp[j_in]))

    s_minus = float(bp[0]) if j_lo == 0 else crossing(j_lo, j_lo - 1)
    s_plus = float(bp[-1]) if j_hi == len(bp) - 1 else crossing(j_hi, j_hi + 1)
    return s_minus, s_plus


def length_in_direction(K: ConvexPolygon, theta: float) -> float:
    """L(theta): the longest chord parallel to theta (radial function of K - K)."""
    d, _ = _direction(theta)
    profile = chord_profile(K.vertices, d)
    return float(np.max(profile.chord(profile.breakpoints)))


# =============================================================================
# HALF-LENGTH PARALLELOGRAM
# =============================================================================

@dataclass(frozen=True)
class HalfLengthParallelogram:
    """Two parallel chords of length L/2 at the extreme offsets where that length is reached.

    Each chord is stored as [end along +d, end along -d].
    """

    theta: float
    length: float
    chord_plus: np.ndarray
    chord_minus: np.ndarray
    area: float

    @property
    def direction(self) -> np.ndarray:
        return _direction(self.theta)[0]

    @property
    def corners(self) -> np.ndarray:
        """p1 p2 p3 p4 in boundary order: chordPlus (+d, -d) then chordMinus (-d, +d)."""
        return np.array([self.chord_plus[0], self.chord_plus[1], self.chord_minus[1], self.chord_minus[0]])

    def to_dict(self) -> Dict:
        return {
            'theta': self.theta,
            'length': self.length,
            'chord_plus': self.chord_plus.tolist(),
            'chord_minus': self.chord_minus.tolist(),
            'area': self.area,
        }


def _half_chord(profile: ChordProfile, s: float, half: float) -> np.ndarray:
    ta, tb = profile.ends(s)
    hi_t, lo_t = max(ta, tb), min(ta, tb)
    if hi_t - lo_t > half * (1 + 1e-12):
        # flat edge longer than L/2: centred subsegment
        mid = 0.5 * (hi_t + lo_t)
        hi_t, lo_t = mid + half / 2, mid - half / 2
    return np.array([profile.point(hi_t, s), profile.point(lo_t, s)])


def half_length_parallelogram(K: ConvexPolygon, theta: float) -> HalfLengthParallelogram:
    d, _ = _direction(theta)
    profile = chord_profile(K.vertices, d)
    length = float(np.max(profile.chord(profile.breakpoints)))
    if length <= get_tolerance('geometric'):
        raise DegenerateDirectionError(f"zero length at theta={theta}")
    half = length / 2
    s_minus, s_plus = level_offsets(profile, half)
    return HalfLengthParallelogram(
        theta=float(theta),
        length=length,
        chord_plus=_half_chord(profile, s_plus, half),
        chord_minus=_half_chord(profile, s_minus, half),
        area=half * (s_plus - s_minus),
    )


def delta_at(K: ConvexPolygon, theta: float) -> float:
    """Delta(theta), the half-length parallelogram area in one direction."""
    d, _ = _direction(theta)
    profile = chord_profile(K.vertices, d)
    length = float(np.max(profile.chord(profile.breakpoints)))
    s_minus, s_plus = level_offsets(profile, length / 2)
    return length / 2 * (s_plus - s_minus)


def brute_force_delta(K: ConvexPolygon, samples: int, chunk: int = 4096) -> Tuple[float, float]:
    """Oracle: minimum of Delta over a uniform theta grid, no refinement.

    Chord lengths at vertex offsets come from direct edge intersection,
    vectorized over a chunk of directions, independent of the chain split.
    """
    V = K.vertices
    n = len(V)
    best, best_theta = np.inf, 0.0
    for start in range(0, samples, chunk):
        thetas = np.pi * np.arange(start, min(start + chunk, samples)) / samples
        d = np.column_stack([np.cos(thetas), np.sin(thetas)])
        nrm = np.column_stack([-d[:, 1], d[:, 0]])
        S = nrm @ V.T
        T = d @ V.T
        S0, S1 = S[:, None, :], np.roll(S, -1, axis=1)[:, None, :]
        T0, T1 = T[:, None, :], np.roll(T, -1, axis=1)[:, None, :]
        q = S[:, :, None]
        denom = S1 - S0
        inside = (q - S0) * (q - S1) <= 0
        ratio = np.divide(q - S0, denom, out=np.zeros(np.broadcast_shapes(q.shape, denom.shape)), where=denom != 0)
        hits = T0 + ratio * (T1 - T0)
        chord = np.where(inside, hits, -np.inf).max(axis=2) - np.where(inside, hits, np.inf).min(axis=2)

        order = np.argsort(S, axis=1)
        Ss = np.take_along_axis(S, order, axis=1)
        Cs = np.take_along_axis(chord, order, axis=1)
        length = Cs.max(axis=1)
        level = (length / 2)[:, None]
        above = Cs >= level * (1 - 1e-12)
        idx = np.arange(n)[None, :]
        j_lo = np.where(above, idx, n).min(axis=1)
        j_hi = np.where(above, idx, -1).max(axis=1)
        rows = np.arange(len(thetas))

        def cross(j_in, j_out):
            c_in, c_out = Cs[rows, j_in], Cs[rows, j_out]
            s_in, s_out = Ss[rows, j_in], Ss[rows, j_out]
            gap = c_in - c_out
            frac = np.divide(c_in - level[:, 0], gap, out=np.zeros_like(gap), where=gap > 0)
            return s_in + frac * (s_out - s_in)

        s_minus = np.where(j_lo == 0, Ss[:, 0], cross(j_lo, np.maximum(j_lo - 1, 0)))
        s_plus = np.where(j_hi == n - 1, Ss[:, -1], cross(j_hi, np.minimum(j_hi + 1, n - 1)))
        delta = length / 2 * (s_plus - s_minus)
        k = int(np.argmin(delta))
        if delta[k] < best:
            best, best_theta = float(delta[k]), float(thetas[k])
    return best, best_theta


# =============================================================================
# GLOBAL MINIMUM AND DENSITY
# =============================================================================

def _canonical_theta(theta: float) -> float:
    theta = float(np.mod(theta, np.pi))
    if np.pi - theta < 10 * get_tolerance('theta'):
        theta = 0.0
    return theta


def _local_minima(values: np.ndarray) -> np.ndarray:
    prev = np.roll(values, 1)
    nxt = np.roll(values, -1)
    return np.flatnonzero((values <= prev) & (values <= nxt))


def delta_min(K: ConvexPolygon, samples: Optional[int] = None) -> Tuple[float, float, HalfLengthParallelogram]:
    """Least half-length parallelogram area over all directions.

    Uniform coarse sweep of [0, pi), then golden-section refinement of the
    best local minima. Ties are broken by the smallest theta.
    """
    samples = samples or SWEEP_CONFIG['coarse_samples']
    step = np.pi / samples
    thetas = step * np.arange(samples)
    values = np.array([delta_at(K, th) for th in thetas])
    candidates = _local_minima(values)
    candidates = candidates[np.argsort(values[candidates], kind='stable')][:SWEEP_CONFIG['refine_candidates']]
    logger.debug(f"delta sweep: {samples} samples, refining {len(candidates)} candidates")

    tol = get_tolerance('theta')
    results: List[Tuple[float, float]] = []
    for k in candidates:
        theta0 = thetas[k]
        try:
            res = minimize_scalar(
                lambda th: delta_at(K, th),
                bracket=(theta0 - step, theta0, theta0 + step),
                method='golden',
                tol=tol,
            )
            theta, value = float(res.x), float(res.fun)
            if value > values[k]:
                theta, value = theta0, float(values[k])
        except ValueError:
            # flat bracket, the coarse sample is already the minimum
            theta, value = theta0, float(values[k])
        results.append((value, _canonical_theta(theta)))

    best_value = min(v for v, _ in results)
    tie = SWEEP_CONFIG['tie_rel'] * max(abs(best_value), 1.0)
    theta_star = min(th for v, th in results if v <= best_value + tie)
    parallelogram = half_length_parallelogram(K, theta_star)
    return parallelogram.area, theta_star, parallelogram


@dataclass(frozen=True)
class PackingDensityResult:
    density: float
    delta: float
    area: float
    minimizing_direction: float
    parallelogram: HalfLengthParallelogram

    def to_dict(self) -> Dict:
        return {
            'density': self.density,
            'delta': self.delta,
            'area': self.area,
            'minimizing_direction': self.minimizing_direction,
            'parallelogram': self.parallelogram.to_dict(),
        }


def double_lattice_density(K: ConvexPolygon, samples: Optional[int] = None) -> PackingDensityResult:
    """delta_L*(K) = A / (2 Delta(K)) with its witnessing parallelogram."""
    delta, theta, parallelogram = delta_min(K, samples)
    area = K.area
    density = area / (2 * delta)
    if density > 1 + get_tolerance('geometric') or density < np.sqrt(3) / 2 - get_tolerance('kk_floor'):
        logger.warning(f"density {density:.9f} outside [sqrt(3)/2, 1]")
    logger.info(f"double-lattice density {density:.6f} (Delta={delta:.6f}, theta*={theta:.6f})")
    return PackingDensityResult(density, delta, area, theta, parallelogram)


# =============================================================================
# LENGTH MINIMA AND PROFILES
# =============================================================================

def length_minima(K: ConvexPolygon, samples: Optional[int] = None) -> List[float]:
    """Directions where L(theta) has a local minimum, refined and sorted."""
    samples = samples or SWEEP_CONFIG['length_minima_samples']
    step = np.pi / samples
    thetas = step * np.arange(samples)
    lengths = np.array([length_in_direction(K, th) for th in thetas])
    if np.ptp(lengths) <= get_tolerance('geometric') * lengths.max():
        return []
    found = []
    for k in _local_minima(lengths):
        res = minimize_scalar(
            lambda th: length_in_direction(K, th),
            bounds=(thetas[k] - step, thetas[k] + step),
            method='bounded',
            options={'xatol': get_tolerance('theta')},
        )
        found.append(_canonical_theta(res.x))
    found.sort()
    deduped = [th for i, th in enumerate(found) if i == 0 or th - found[i - 1] > 2 * step]
    return deduped


def delta_profile(K: ConvexPolygon, samples: Optional[int] = None) -> pd.DataFrame:
    """(theta, L, Delta) on a uniform direction grid."""
    samples = samples or SWEEP_CONFIG['coarse_samples']
    thetas = np.pi * np.arange(samples) / samples
    return pd.DataFrame({
        'theta': thetas,
        'length': [length_in_direction(K, th) for th in thetas],
        'delta': [delta_at(K, th) for th in thetas],
    })


# =============================================================================
# DOUBLE LATTICE
# =============================================================================

@dataclass(frozen=True)
class DoubleLattice2D:
    """Translations t1, t2 plus the point inversion about inversion_center."""

    t1: np.ndarray
    t2: np.ndarray
    inversion_center: np.ndarray
    mean_area: float = field(init=False)

    def __post_init__(self):
        det = float(np.linalg.det(np.column_stack([self.t1, self.t2])))
        if abs(det) <= get_tolerance('geometric'):
            raise InvalidParallelogramError("translation generators are parallel")
        object.__setattr__(self, 'mean_area', abs(det) / 2)

    def isometries(self, shells: int) -> Iterator[Tuple[bool, np.ndarray]]:
        """(inverted, translation) for every group element within `shells` of the identity.

        A non-inverted element maps x to x + t; an inverted one maps x to 2c - x + t.
        """
        for i in range(-shells, shells + 1):
            for j in range(-shells, shells + 1):
                t = i * self.t1 + j * self.t2
                yield False, t
                yield True, t

    def image(self, K: ConvexPolygon, inverted: bool, translation: np.ndarray) -> np.ndarray:
        base = 2 * self.inversion_center - K.vertices if inverted else K.vertices
        return base + translation

    def copies(self, K: ConvexPolygon, shells: int) -> List[np.ndarray]:
        return [self.image(K, inv, t) for inv, t in self.isometries(shells)]

    def to_dict(self) -> Dict:
        return {
            't1': self.t1.tolist(),
            't2': self.t2.tolist(),
            'inversion_center': self.inversion_center.tolist(),
            'mean_area': self.mean_area,
        }


def check_parallelogram(K: ConvexPolygon, p: HalfLengthParallelogram) -> None:
    """Raise InvalidParallelogramError unless both chords are boundary chords of length L/2 along theta."""
    tol = get_tolerance('geometric') * max(1.0, p.length) * 10
    d = p.direction
    for name, chord in (('chordPlus', p.chord_plus), ('chordMinus', p.chord_minus)):
        vec = chord[0] - chord[1]
        if abs(np.linalg.norm(vec) - p.length / 2) > tol:
            raise InvalidParallelogramError(f"{name} has length {np.linalg.norm(vec):.12g}, expected {p.length / 2:.12g}")
        if abs(vec[0] * d[1] - vec[1] * d[0]) > tol:
            raise InvalidParallelogramError(f"{name} is not parallel to theta={p.theta}")
        for end in chord:
            if K.boundary_distance(end) > tol:
                raise InvalidParallelogramError(f"{name} endpoint {end} is off the boundary")


def build_double_lattice(K: ConvexPolygon, p: HalfLengthParallelogram) -> DoubleLattice2D:
    """Double lattice realising A / (2 Delta) from a half-length parallelogram.

    The inversion centre is the +d end p1 of chordPlus, so K and its image
    share the chord line with their half-length chords end to end. The
    translations are the full length along theta, and twice the displacement
    between corresponding ends of the two chords.
    """
    check_parallelogram(K, p)
    p1 = p.chord_plus[0]
    p4 = p.chord_minus[0]
    lattice = DoubleLattice2D(
        t1=p.length * p.direction,
        t2=2 * (p1 - p4),
        inversion_center=np.array(p1, dtype=float),
    )
    logger.debug(f"double lattice: mean area {lattice.mean_area:.9f} for polygon area {K.area:.9f}")
    return lattice


@dataclass(frozen=True)
class AdmissibilityReport:
    shells: int
    pairs_checked: int
    max_overlap: float
    worst_copy: Optional[Tuple[bool, Tuple[float, float]]]

    @property
    def admissible(self) -> bool:
        return self.max_overlap <= get_tolerance('overlap')

    def to_dict(self) -> Dict:
        return {
            'shells': self.shells,
            'pairs_checked': self.pairs_checked,
            'max_overlap': self.max_overlap,
            'admissible': self.admissible,
        }


def verify_admissible(K: ConvexPolygon, lattice: DoubleLattice2D, shells: int = 3) -> AdmissibilityReport:
    """Maximal overlap area between K and its images under the nearby group elements.

    The isometries form a group, so comparing K with every other copy covers
    all pairs.
    """
    if shells < 1:
        raise ValueError("shells must be >= 1")
    base = K.to_shapely()
    scale = float(np.max(np.abs(K.vertices)))
    # unsnapped overlays of copies sharing an edge can come back as the whole polygon
    grid = get_tolerance('overlay_grid') * max(1.0, scale)
    worst, worst_copy, checked = 0.0, None, 0
    for inverted, t in lattice.isometries(shells):
        if not inverted and np.linalg.norm(t) <= get_tolerance('geometric') * max(1.0, scale):
            continue
        other = ShapelyPolygon(lattice.image(K, inverted, t))
        checked += 1
        if not base.intersects(other):
            continue
        overlap = base.intersection(other, grid_size=grid).area
        if overlap > worst:
            worst, worst_copy = overlap, (inverted, (float(t[0]), float(t[1])))
    if worst > get_tolerance('overlap'):
        logger.warning(f"double lattice not admissible: overlap {worst:.3e}")
    return AdmissibilityReport(shells, checked, float(worst), worst_copy)


# =============================================================================
# CONTAINMENT
# =============================================================================

def _edge_normals(K: ConvexPolygon) -> np.ndarray:
    """Rows a_k with the polygon = {x : <a_k, x> <= 1}."""
    V = K.vertices
    W = np.roll(V, -1, axis=0)
    e = W - V
    outward = np.column_stack([e[:, 1], -e[:, 0]])
    offsets = np.einsum('ij,ij->i', outward, V)
    scale = float(np.max(np.abs(V)))
    if np.any(offsets <= get_tolerance('geometric') * np.linalg.norm(outward, axis=1) * scale):
        raise OriginNotInteriorError("the origin is not interior to the polygon")
    return outward / offsets[:, None]


def radial_function(K: ConvexPolygon, angles: np.ndarray) -> np.ndarray:
    """Distance from the origin to the boundary along each angle."""
    a = _edge_normals(K)
    u = np.column_stack([np.cos(angles), np.sin(angles)])
    return 1.0 / np.max(u @ a.T, axis=1)


def containment_epsilon(M: ConvexPolygon, M_prime: ConvexPolygon) -> float:
    """Smallest eps >= 0 with (1 - eps) M in M' in (1 + eps) M.

    Within a sector bounded by consecutive vertex directions of both polygons
    the radial ratio is a ratio of two linear forms, hence monotone, so the
    vertex directions carry the extremes.
    """
    angles = np.concatenate([
        np.arctan2(M.vertices[:, 1], M.vertices[:, 0]),
        np.arctan2(M_prime.vertices[:, 1], M_prime.vertices[:, 0]),
    ])
    ratio = radial_function(M_prime, angles) / radial_function(M, angles)
    return float(max(0.0, ratio.max() - 1.0, 1.0 - ratio.min()))
