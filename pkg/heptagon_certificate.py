"""
Heptagon local-minimum certificate

Checks the finite computational content behind the claim that the regular
heptagon M is a local minimum of the double-lattice packing density:

- exact identities in Q(u, v): the density constant, the least-area
  rectangle, the null combination sum f_i = 0, the solution vectors u1, u2
- finite-difference fidelity of the tabulated gradients f_i and Hessians F_i
  of the vertex-perturbation functionals phi_i
- positive-definiteness of P F_i P on the solution plane
- the boundary-replacement functionals phi2_i and constraint functions
  psi_j, their tabulated gradients f_i' and g_j', the Farkas combination,
  and triviality of the joint solution cone
- a direct probe of the packing density around M

The tables live in heptagon_tables.json next to this file; entries are
exact field elements. Geometry is evaluated in floating point.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import null_space
from scipy.optimize import brentq, linprog, minimize_scalar

from config import FD_CONFIG, PROBE_CONFIG, get_tolerance
from exactfield import (
    FieldElement,
    FieldParseError,
    ONE,
    ZERO,
    check_minimal_polynomial,
    dot,
    heptagon_vertex,
    parse,
)
from geometry2d import chord_profile, level_offsets
from utils import load_json

logger = logging.getLogger(__name__)

TABLES_PATH = Path(__file__).with_name('heptagon_tables.json')


class ConvexityViolation(ValueError):
    """A perturbed heptagon is not convex."""


class DegenerateGeometryError(ValueError):
    """Feet, chords or boundary points of the replacement construction are undefined."""


class CertificateInfeasible(ArithmeticError):
    """No strictly positive Farkas combination exists."""


class DomainError(ValueError):
    """Argument outside the domain of hbound."""


# =============================================================================
# EXACT CONSTANTS
# =============================================================================
A_COEF = parse('7/4 - 2u^2')
B_COEF = parse('-1/2 + u^2')
DELTA = parse('(-19 + 2u + 56u^2)v/8')
AREA = parse('7uv')
DENSITY = parse('(2/97)(-111 + 492u - 356u^2)')
LENGTH = parse('1 + u')

# coordinates fixed to zero on W: x0, y0, x2, y2, x5, y5 (0-based positions)
W_FIXED = (0, 1, 4, 5, 10, 11)
W_FREE = tuple(k for k in range(14) if k not in W_FIXED)

CONVENTIONS = ('plain', 'scaled')

_U = float(parse('u'))
_V = float(parse('v'))
_DENSITY = float(DENSITY)
_T0 = tuple(float(t) for t in (A_COEF, B_COEF, ONE - B_COEF, ONE - A_COEF))
_BASE = np.array([[float(c) for c in heptagon_vertex(i)] for i in range(7)])
_ROTATIONS = np.array([[[c, -s], [s, c]] for c, s in _BASE])


def _mix(p, q, t):
    return tuple((ONE - t) * pc + t * qc for pc, qc in zip(p, q))


def heptagon_rectangle() -> Dict[str, Tuple[FieldElement, FieldElement]]:
    """Exact corners of the least-area half-length rectangle, plus m0 and k0."""
    m = [heptagon_vertex(i) for i in range(7)]
    return {
        'p1': _mix(m[1], m[2], A_COEF),
        'p2': _mix(m[2], m[3], B_COEF),
        'p3': _mix(m[5], m[4], B_COEF),
        'p4': _mix(m[6], m[5], A_COEF),
        'm0': m[0],
        'k0': _mix(m[3], m[4], parse('1/2')),
    }


def _sq_dist(p, q) -> FieldElement:
    dx, dy = p[0] - q[0], p[1] - q[1]
    return dx * dx + dy * dy


def _shoelace(points) -> FieldElement:
    total = ZERO
    for (x0, y0), (x1, y1) in zip(points, points[1:] + points[:1]):
        total = total + x0 * y1 - x1 * y0
    return total / 2


# =============================================================================
# TABLES
# =============================================================================

def _roll(seq: Sequence, k: int) -> List:
    """np.roll semantics: out[i] = seq[i - k]."""
    k %= len(seq)
    return list(seq[-k:]) + list(seq[:-k]) if k else list(seq)


def _cycle_prime(vec: Sequence, shift: int) -> List:
    return _roll(vec[:14], 2 * shift) + _roll(vec[14:], 4 * shift)


@dataclass
class CertificateTables:
    """Exact certificate vectors; members for other indices come from cyclic permutations."""

    f0: List[FieldElement]
    u1: List[FieldElement]
    u2: List[FieldElement]
    F0: List[List[FieldElement]]
    f0_prime: List[FieldElement]
    g_representatives: Dict[int, List[FieldElement]]
    source: str = ''

    def f(self, i: int) -> List[FieldElement]:
        return _roll(self.f0, 2 * i)

    def F(self, i: int) -> List[List[FieldElement]]:
        shift = 2 * i
        return [[self.F0[(r - shift) % 14][(c - shift) % 14] for c in range(14)] for r in range(14)]

    def f_prime(self, i: int) -> List[FieldElement]:
        return _cycle_prime(self.f0_prime, i)

    def g_prime(self, j: int) -> List[FieldElement]:
        """g'_j for j = 1..42 from the representative of its family."""
        if not 1 <= j <= 42:
            raise IndexError(f"g' index {j} outside 1..42")
        rep = 1 + 7 * ((j - 1) // 7)
        return _cycle_prime(self.g_representatives[rep], (j - 1) % 7)

    # float views
    def f_float(self, i: int) -> np.ndarray:
        return _as_float(self.f(i))

    def F_float(self, i: int) -> np.ndarray:
        F0 = self.F0_float
        return np.roll(np.roll(F0, 2 * i, axis=0), 2 * i, axis=1)

    @cached_property
    def F0_float(self) -> np.ndarray:
        return np.array([_as_float(row) for row in self.F0])

    def f_prime_matrix(self) -> np.ndarray:
        return np.array([_as_float(self.f_prime(i)) for i in range(7)])

    def g_prime_matrix(self) -> np.ndarray:
        return np.array([_as_float(self.g_prime(j)) for j in range(1, 43)])

    def entries(self) -> Dict[str, FieldElement]:
        """Every stored entry keyed by its location."""
        out = {}
        for name in ('f0', 'u1', 'u2', 'f0_prime'):
            for k, x in enumerate(getattr(self, name), start=1):
                out[f'{name}[{k}]'] = x
        for r, row in enumerate(self.F0, start=1):
            for c, x in enumerate(row, start=1):
                out[f'F0[{r},{c}]'] = x
        for rep, vec in self.g_representatives.items():
            for k, x in enumerate(vec, start=1):
                out[f'g{rep}[{k}]'] = x
        return out

    def to_json(self) -> Dict:
        """Tables in the six-string FieldElement encoding."""
        return {
            'f0': [x.to_json() for x in self.f0],
            'u1': [x.to_json() for x in self.u1],
            'u2': [x.to_json() for x in self.u2],
            'F0': [[x.to_json() for x in row] for row in self.F0],
            'f0_prime': [x.to_json() for x in self.f0_prime],
            'g_prime': {str(k): [x.to_json() for x in v] for k, v in self.g_representatives.items()},
        }


def _as_float(values: Sequence[FieldElement]) -> np.ndarray:
    return np.array([float(x) for x in values])


def _entry(value, where: str) -> FieldElement:
    try:
        if isinstance(value, list):
            return FieldElement.from_json(value)
        return parse(value)
    except FieldParseError as exc:
        raise FieldParseError(f"{where}: {exc}") from exc


def _sparse(groups: List[Dict], where: str) -> List[FieldElement]:
    vec = [ZERO] * 42
    for group in groups:
        value = _entry(group['value'], where)
        for pos in group['positions']:
            vec[pos - 1] = value
    return vec


def load_tables(path: Optional[Path] = None) -> CertificateTables:
    """Parse the table file (printed notation or six-string arrays)."""
    path = Path(path) if path else TABLES_PATH
    raw = load_json(path)
    F0_columns = [[_entry(x, f'F0 column {c + 1}') for x in col] for c, col in enumerate(raw['F0_columns'])]
    # column c holds <e_r, F0 e_c>; store row-major
    F0 = [[F0_columns[c][r] for c in range(14)] for r in range(14)]
    tables = CertificateTables(
        f0=[_entry(x, 'f0') for x in raw['f0']],
        u1=[_entry(x, 'u1') for x in raw['u1']],
        u2=[_entry(x, 'u2') for x in raw['u2']],
        F0=F0,
        f0_prime=_sparse(raw['f0_prime'], 'f0_prime'),
        g_representatives={int(k): _sparse(v, f'g{k}') for k, v in raw['g_prime'].items()},
        source=str(path),
    )
    logger.info(f"loaded certificate tables from {path}")
    return tables


# =============================================================================
# PERTURBED HEPTAGON
# =============================================================================

def perturbed_vertices(x: Sequence[float], convention: str = 'plain') -> np.ndarray:
    """m_i' = R^i (1 + x_i, y_i), or R^i (1 + x_i, v y_i) under the scaled convention."""
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    x = np.asarray(x, dtype=float).reshape(7, 2)
    scale_y = 1.0 if convention == 'plain' else _V
    local = np.column_stack([1.0 + x[:, 0], scale_y * x[:, 1]])
    return np.einsum('ijk,ik->ij', _ROTATIONS, local)


def _check_convex(V: np.ndarray) -> None:
    e = np.roll(V, -1, axis=0) - V
    turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    if np.any(turn <= 0):
        raise ConvexityViolation("perturbed heptagon is not strictly convex")


def _area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _foot(m: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    e = q - p
    denom = float(e @ e)
    if denom <= 0:
        raise DegenerateGeometryError("zero-length edge")
    return p + ((m - p) @ e) / denom * e


def phi(i: int, x: Sequence[float], convention: str = 'plain') -> float:
    """(A'/2 Delta_i) / (A/2 Delta) - 1 for the heptagon with vertex perturbation x.

    Delta_i is the parallelogram spanned by the two chords parallel to the
    altitude m_i' k_i' with half its length.
    """
    V = perturbed_vertices(x, convention)
    _check_convex(V)
    m = V[i % 7]
    k = _foot(m, V[(i + 3) % 7], V[(i + 4) % 7])
    length = float(np.linalg.norm(k - m))
    profile = chord_profile(V, (k - m) / length)
    s_minus, s_plus = level_offsets(profile, length / 2)
    delta_i = length / 2 * (s_plus - s_minus)
    return (_area(V) / (2 * delta_i)) / _DENSITY - 1.0


# =============================================================================
# REPLACEMENT BOUNDARY (x, x')
# =============================================================================

@dataclass
class ReplacementFrame:
    """Vertices m_i', feet k_i', outward edge normals and boundary heights h_i(t0)."""

    V: np.ndarray
    K: np.ndarray
    normals: np.ndarray
    heights: np.ndarray

    def p(self, j: int, kk: int) -> np.ndarray:
        """Boundary point p_j(t0) at t0 = (a, b, 1-b, 1-a)[kk]."""
        j %= 7
        t = _T0[kk]
        return (1 - t) * self.V[j] + t * self.V[(j + 1) % 7] + 2 * _V * self.heights[j, kk] * self.normals[j]


def replacement_frame(x: Sequence[float], xp: Sequence[float], convention: str = 'plain') -> ReplacementFrame:
    """k_i' = k_i'' + R^i (x_i', v y_i') with k_i'' the foot of m_i' on m_{i+3}' m_{i+4}'."""
    V = perturbed_vertices(x, convention)
    _check_convex(V)
    xp = np.asarray(xp, dtype=float)
    if xp.shape != (42,):
        raise DegenerateGeometryError(f"x' must have 42 components, got {xp.shape}")
    offsets = xp[:14].reshape(7, 2)
    K = np.empty((7, 2))
    for i in range(7):
        foot = _foot(V[i], V[(i + 3) % 7], V[(i + 4) % 7])
        K[i] = foot + _ROTATIONS[i] @ np.array([offsets[i, 0], _V * offsets[i, 1]])
    e = np.roll(V, -1, axis=0) - V
    normals = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
    return ReplacementFrame(V=V, K=K, normals=normals, heights=xp[14:].reshape(7, 4))


def alpha(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> float:
    """p^q + q^r + r^p, the oriented area form of the triangle pqr."""
    def wedge(a, b):
        return a[0] * b[1] - a[1] * b[0]
    return float(wedge(p, q) + wedge(q, r) + wedge(r, p))


def psi_family(j: int) -> Tuple[int, int, int]:
    """(family 0..5, arc, foot index) for psi_j, j = 1..42.

    Member j0 of each family pairs the foot k'_{j0} with the arc m'_{j0+3} m'_{j0+4}
    that carries it; this is the assignment the tabulated g' rows match.
    """
    if not 1 <= j <= 42:
        raise IndexError(f"psi index {j} outside 1..42")
    family, j0 = divmod(j - 1, 7)
    return family, (j0 + 3) % 7, j0


def psi(j: int, x: Sequence[float], xp: Sequence[float], convention: str = 'plain',
        frame: Optional[ReplacementFrame] = None) -> float:
    """Tangency (families 0, 1) and convexity (families 2..5) constraint functions."""
    family, arc, kidx = psi_family(j)
    fr = frame if frame is not None else replacement_frame(x, xp, convention)
    k = fr.K[kidx]
    m = fr.V[kidx]
    if family == 0:
        return float((k - m) @ (k - fr.p(arc, 1)))
    if family == 1:
        return float((k - m) @ (k - fr.p(arc, 2)))
    if family == 2:
        return alpha(fr.p(arc, 0), fr.p(arc, 1), k)
    if family == 3:
        return alpha(k, fr.p(arc, 2), fr.p(arc, 3))
    if family == 4:
        return alpha(fr.V[arc], fr.p(arc, 0), fr.p(arc, 1))
    return alpha(fr.p(arc, 2), fr.p(arc, 3), fr.V[(arc + 1) % 7])


# arcs replaced for phi2_i, by offset from i, with the t0 slot used on each
_REPLACED = {1: 0, 2: 1, 4: 2, 5: 3}


def _replacement_segments(fr: ReplacementFrame, i: int) -> np.ndarray:
    segments = []
    for j in range(7):
        a, b = fr.V[j], fr.V[(j + 1) % 7]
        kk = _REPLACED.get((j - i) % 7)
        if kk is None:
            segments.append((a, b))
            continue
        t0 = _T0[kk]
        h0 = 2 * _V * fr.heights[j, kk]
        n = fr.normals[j]
        start = a + n * h0 / (1 - t0)
        corner = fr.p(j, kk)
        end = b + n * h0 / t0
        segments.extend([(start, corner), (corner, end)])
    return np.array(segments)


def _segment_chord(segments_s: np.ndarray, segments_t: np.ndarray, s: float) -> float:
    s0, s1 = segments_s[:, 0], segments_s[:, 1]
    t0, t1 = segments_t[:, 0], segments_t[:, 1]
    denom = s1 - s0
    hit = ((s - s0) * (s - s1) <= 0) & (denom != 0)
    if not hit.any():
        return 0.0
    t = t0[hit] + (s - s0[hit]) / denom[hit] * (t1[hit] - t0[hit])
    return float(t.max() - t.min())


def replacement_polygon(fr: ReplacementFrame) -> np.ndarray:
    """The 42-gon m0', p0(a), p0(b), k4', p0(1-b), p0(1-a), m1', ..."""
    points = []
    for j in range(7):
        points.extend([fr.V[j], fr.p(j, 0), fr.p(j, 1), fr.K[(j + 4) % 7], fr.p(j, 2), fr.p(j, 3)])
    return np.array(points)


def phi2(i: int, x: Sequence[float], xp: Sequence[float], convention: str = 'plain') -> float:
    """(A''/2 Delta_i) / (A/2 Delta) - 1 over the upper-envelope replacement boundary.

    The arcs above m_{i+1} m_{i+2}, m_{i+2} m_{i+3}, m_{i+4} m_{i+5} and
    m_{i+5} m_{i+6} are replaced by the convexity upper bound anchored at
    t0 = a, b, 1-b, 1-a. Delta_i uses the chords of those arcs parallel to
    m_i' k_i' with half its length.
    """
    i %= 7
    fr = replacement_frame(x, xp, convention)
    m, k = fr.V[i], fr.K[i]
    length = float(np.linalg.norm(k - m))
    if length <= get_tolerance('geometric'):
        raise DegenerateGeometryError("m_i' and k_i' coincide")
    d = (k - m) / length
    nrm = np.array([-d[1], d[0]])
    segments = _replacement_segments(fr, i)
    seg_s = segments @ nrm
    seg_t = segments @ d
    s_m = float(m @ nrm)
    half = length / 2
    xtol = FD_CONFIG['root_xtol']

    def excess(s):
        return _segment_chord(seg_s, seg_t, s) - half

    s_top, s_bottom = float(seg_s.max()), float(seg_s.min())
    try:
        s_plus = brentq(excess, s_m, s_top, xtol=xtol)
        s_minus = brentq(excess, s_bottom, s_m, xtol=xtol)
    except ValueError as exc:
        raise DegenerateGeometryError(f"no half-length chord on the replacement boundary: {exc}") from exc
    delta_i = half * (s_plus - s_minus)
    area = _area(replacement_polygon(fr))
    return (area / (2 * delta_i)) / _DENSITY - 1.0


def hbound(t: float, t0: float, h0: float) -> Tuple[float, float]:
    """Convexity bounds on h(t) from a single value h(t0)."""
    if not 0 < t0 < 1:
        raise DomainError(f"t0 must lie in (0, 1), got {t0}")
    if not 0 <= t <= 1:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    if h0 < 0:
        raise DomainError(f"h(t0) must be nonnegative, got {h0}")
    r1, r2 = t / t0, (1 - t) / (1 - t0)
    return h0 * min(r1, r2), h0 * max(r1, r2)


# =============================================================================
# FINITE DIFFERENCES
# =============================================================================

def _central(f: Callable, x0: np.ndarray, k: int, h: float) -> float:
    e = np.zeros_like(x0)
    e[k] = h
    return (f(x0 + e) - f(x0 - e)) / (2 * h)


def fd_gradient(f: Callable, x0: np.ndarray, step: Optional[float] = None,
                richardson: bool = True) -> np.ndarray:
    """Central differences, combined over h and h/2 by one Richardson level."""
    h = step or FD_CONFIG['step']
    out = np.empty(len(x0))
    for k in range(len(x0)):
        coarse = _central(f, x0, k, h)
        out[k] = coarse if not richardson else (4 * _central(f, x0, k, h / 2) - coarse) / 3
    return out


def _second(f: Callable, x0: np.ndarray, k: int, l: int, h: float, f0: float) -> float:
    if k == l:
        e = np.zeros_like(x0)
        e[k] = h
        return (f(x0 + e) - 2 * f0 + f(x0 - e)) / (h * h)
    ek = np.zeros_like(x0)
    el = np.zeros_like(x0)
    ek[k] = h
    el[l] = h
    return (f(x0 + ek + el) - f(x0 + ek - el) - f(x0 - ek + el) + f(x0 - ek - el)) / (4 * h * h)


def fd_hessian(f: Callable, x0: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    h = step or FD_CONFIG['step']
    n = len(x0)
    f0 = f(x0)
    H = np.empty((n, n))
    for k in range(n):
        for l in range(k, n):
            coarse = _second(f, x0, k, l, h, f0)
            fine = _second(f, x0, k, l, h / 2, f0)
            H[k, l] = H[l, k] = (4 * fine - coarse) / 3
    return H


def _relative_error(fd: np.ndarray, table: np.ndarray, floor: float) -> np.ndarray:
    return np.abs(fd - table) / np.maximum(np.abs(table), floor)


# =============================================================================
# REPORT
# =============================================================================

@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ''
    data: Dict = field(default_factory=dict)


@dataclass
class CertificateReport:
    checks: List[CheckResult]
    convention: str = 'plain'

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'check': c.name,
            'status': 'pass' if c.passed else 'FAIL',
            'residual': c.residual,
            'tolerance': c.tolerance,
            'detail': c.detail,
        } for c in self.checks])

    def to_json(self) -> Dict:
        from schemas import CertificateReportModel

        model = CertificateReportModel(
            passed=self.passed,
            convention=self.convention,
            checks=[{
                'name': c.name,
                'status': 'pass' if c.passed else 'fail',
                'residual': c.residual,
                'tolerance': c.tolerance,
                'detail': c.detail,
            } for c in self.checks],
        )
        return model.model_dump()

    def to_text(self) -> str:
        frame = self.to_frame()
        header = f"heptagon certificate: {'PASS' if self.passed else 'FAIL'} (vertex convention: {self.convention})"
        if frame.empty:
            return header
        return header + '\n' + frame.to_string(index=False, float_format=lambda v: f'{v:.3e}')


def _exact_result(name: str, ok: bool, detail: str = '') -> CheckResult:
    return CheckResult(name, ok, 0.0 if ok else 1.0, 0.0, detail)


# =============================================================================
# EXACT CHECKS
# =============================================================================

def check_minimal_polynomial_factorization() -> CheckResult:
    return _exact_result('minimal-polynomial', check_minimal_polynomial(),
                         'T7(t) + 1 = (t + 1)(8t^3 - 4t^2 - 4t + 1)^2')


def check_density_identity() -> CheckResult:
    """A (2 Delta)^-1 = (2/97)(-111 + 492u - 356u^2) exactly."""
    lhs = AREA * (2 * DELTA).invert()
    ok = (lhs - DENSITY).is_zero()
    value, bound = DENSITY.to_float(6)
    return _exact_result('density-identity', ok, f'A/2Delta = {value:.6f} +- {bound:.0e}')


def check_rectangle() -> CheckResult:
    """Exact rectangle p1p2p3p4: sides along the m0 k0 axis of length L/2, area Delta."""
    pts = heptagon_rectangle()
    p1, p2, p3, p4 = pts['p1'], pts['p2'], pts['p3'], pts['p4']
    half_sq = (LENGTH / 2) * (LENGTH / 2)
    conditions = {
        'k0 = (-u, 0)': pts['k0'][0] == -parse('u') and pts['k0'][1].is_zero(),
        '|m0 k0| = 1 + u': _sq_dist(pts['m0'], pts['k0']) == LENGTH * LENGTH,
        'p1p2 horizontal': (p1[1] - p2[1]).is_zero(),
        'p3p4 horizontal': (p3[1] - p4[1]).is_zero(),
        '|p1p2| = L/2': _sq_dist(p1, p2) == half_sq,
        '|p3p4| = L/2': _sq_dist(p3, p4) == half_sq,
        'area = Delta': _shoelace([p1, p2, p3, p4]) == DELTA,
        'a, b in (0, 1)': all(t.sign() > 0 and (ONE - t).sign() > 0 for t in (A_COEF, B_COEF)),
    }
    failed = [k for k, v in conditions.items() if not v]
    return _exact_result('rectangle', not failed, 'failed: ' + ', '.join(failed) if failed else 'all exact')


def check_hessian_symmetry_exact(tables: CertificateTables) -> CheckResult:
    bad = [(r + 1, c + 1) for r in range(14) for c in range(r + 1, 14) if tables.F0[r][c] != tables.F0[c][r]]
    return _exact_result('hessian-symmetry', not bad, f'asymmetric entries: {bad[:5]}' if bad else 'F0 = F0^T')


def check_null_sum(tables: CertificateTables) -> CheckResult:
    """sum_i f_i = 0 coefficient-wise."""
    total = [ZERO] * 14
    for i in range(7):
        total = [a + b for a, b in zip(total, tables.f(i))]
    bad = [k + 1 for k, x in enumerate(total) if not x.is_zero()]
    return _exact_result('null-sum', not bad, f'nonzero components: {bad}' if bad else 'sum f_i = 0')


def check_solution_space(tables: CertificateTables) -> CheckResult:
    """<f_i, u_j> = 0 exactly; stacked f_i restricted to W has numeric rank 6."""
    bad = [(i, name) for i in range(7) for name, u in (('u1', tables.u1), ('u2', tables.u2))
           if not dot(tables.f(i), u).is_zero()]
    in_w = all(tables.u1[k].is_zero() and tables.u2[k].is_zero() for k in W_FIXED)
    unit = tables.u1[13] == ONE and tables.u2[12] == ONE
    stacked = np.array([tables.f_float(i)[list(W_FREE)] for i in range(7)])
    sv = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(sv > get_tolerance('rank_gap')))
    null_ok = bool(np.all(sv[rank:] < get_tolerance('rank_null')))
    ok = not bad and in_w and unit and rank == 6 and null_ok
    detail = f'rank on W = {rank}, singular values {np.array2string(sv, precision=3)}'
    if bad:
        detail += f'; nonzero <f_i, u_j>: {bad}'
    return CheckResult('solution-space', ok, float(sv[-1]) if len(sv) > 6 else 0.0,
                       get_tolerance('rank_null'), detail, {'singular_values': sv.tolist()})


def check_round_trip(tables: CertificateTables) -> CheckResult:
    bad = [k for k, x in tables.entries().items() if FieldElement.from_json(x.to_json()) != x]
    return _exact_result('round-trip', not bad, f'{len(bad)} entries changed' if bad else 'all entries unchanged')


# =============================================================================
# NUMERIC CHECKS
# =============================================================================

def check_convention(tables: CertificateTables) -> CheckResult:
    """FD gradient of phi_0 against f_0 under both vertex conventions."""
    errors = {}
    for convention in CONVENTIONS:
        fd = fd_gradient(lambda x: phi(0, x, convention), np.zeros(14))
        errors[convention] = float(np.max(_relative_error(fd, tables.f_float(0), get_tolerance('gradient_floor'))))
    chosen = min(errors, key=errors.get)
    if chosen != 'plain':
        logger.warning(f"tables match the {chosen} vertex convention")
    detail = ', '.join(f'{k}: {v:.2e}' for k, v in errors.items()) + f'; chosen {chosen}'
    return CheckResult('convention', errors[chosen] <= get_tolerance('gradient_rel'), errors[chosen],
                       get_tolerance('gradient_rel'), detail, {'errors': errors, 'chosen': chosen})


def check_gradient(tables: CertificateTables, i: int, convention: str = 'plain') -> CheckResult:
    fd = fd_gradient(lambda x: phi(i, x, convention), np.zeros(14))
    err = _relative_error(fd, tables.f_float(i), get_tolerance('gradient_floor'))
    worst = float(err.max())
    return CheckResult(f'gradient[{i}]', worst <= get_tolerance('gradient_rel'), worst,
                       get_tolerance('gradient_rel'), f'worst component e{int(err.argmax()) + 1}',
                       {'fd': fd.tolist()})


def check_hessian(tables: CertificateTables, i: int, convention: str = 'plain') -> CheckResult:
    fd = fd_hessian(lambda x: phi(i, x, convention), np.zeros(14))
    table = tables.F_float(i)
    small = get_tolerance('hessian_small')
    err = np.where(np.abs(table) > small, np.abs(fd - table) / np.maximum(np.abs(table), small), np.abs(fd - table))
    worst = float(err.max())
    r, c = np.unravel_index(int(err.argmax()), err.shape)
    return CheckResult(f'hessian[{i}]', worst <= get_tolerance('hessian_rel'), worst,
                       get_tolerance('hessian_rel'), f'worst entry ({r + 1},{c + 1})')


def solution_projector(tables: CertificateTables) -> Tuple[np.ndarray, np.ndarray]:
    """(Q, P): orthonormal basis of span{u1, u2} and the projector Q Q^T."""
    U = np.column_stack([_as_float(tables.u1), _as_float(tables.u2)])
    Q, _ = np.linalg.qr(U)
    return Q, Q @ Q.T


def check_positive_definite(tables: CertificateTables) -> CheckResult:
    """Smallest eigenvalue of P F_i P restricted to the image of P, over all i."""
    Q, P = solution_projector(tables)
    u1 = _as_float(tables.u1)
    projector_err = max(float(np.abs(P @ P - P).max()), float(np.abs(P @ u1 - u1).max()))
    eigen = []
    asym = 0.0
    for i in range(7):
        block = Q.T @ tables.F_float(i) @ Q
        asym = max(asym, float(np.abs(block - block.T).max()))
        eigen.append(float(np.linalg.eigvalsh(0.5 * (block + block.T)).min()))
    worst = min(eigen)
    ok = worst > 0 and projector_err <= 1e-12 and asym <= 1e-12
    return CheckResult('positive-definite', ok, worst, 0.0,
                       f'min eigenvalue {worst:.6e} (i={int(np.argmin(eigen))}), projector error {projector_err:.1e}',
                       {'eigenvalues': eigen})


def check_tangent_index_map(tables: CertificateTables) -> CheckResult:
    """Match every g'_j against the FD gradients of all 42 psi functions at the origin."""
    zero14, zero42 = np.zeros(14), np.zeros(42)
    grads = np.array([
        fd_gradient(lambda xp, j=j: psi(j, zero14, xp), zero42) for j in range(1, 43)
    ])
    G = tables.g_prime_matrix()
    floor = get_tolerance('gradient_floor')
    assignment, worst = {}, 0.0
    for row in range(42):
        errs = [float(np.max(_relative_error(grads[c], G[row], floor))) for c in range(42)]
        best = int(np.argmin(errs))
        assignment[row + 1] = best + 1
        worst = max(worst, errs[row])
    identity = all(assignment[j] == j for j in assignment)
    ok = identity and worst <= get_tolerance('gradient_rel')
    mapping = {j: psi_family(j)[1:] for j in (1, 8, 15, 22, 29, 36)}
    detail = f'member j0 uses arc j0+3 and foot k_j0: {mapping}' if identity else f'assignment {assignment}'
    return CheckResult('tangent-index-map', ok, worst, get_tolerance('gradient_rel'), detail,
                       {'assignment': assignment})


def check_psi_vanishing(rng: Optional[np.random.Generator] = None, samples: int = 5) -> CheckResult:
    """psi_j(x, 0) = 0 for small random x and at the origin."""
    rng = rng or np.random.default_rng(0)
    xs = [np.zeros(14)] + [1e-3 * rng.standard_normal(14) for _ in range(samples)]
    worst = 0.0
    for x in xs:
        fr = replacement_frame(x, np.zeros(42))
        worst = max(worst, max(abs(psi(j, x, None, frame=fr)) for j in range(1, 43)))
    return CheckResult('psi-vanishing', worst <= 1e-13, worst, 1e-13, f'{len(xs)} points')


def check_phi2_reduction(rng: Optional[np.random.Generator] = None, samples: int = 5) -> CheckResult:
    """phi2(i, x, 0) equals phi(i, x)."""
    rng = rng or np.random.default_rng(1)
    xs = [np.zeros(14)] + [1e-3 * rng.standard_normal(14) for _ in range(samples)]
    worst = max(abs(phi2(i, x, np.zeros(42)) - phi(i, x)) for x in xs for i in range(7))
    return CheckResult('phi2-reduction', worst <= 1e-10, worst, 1e-10, f'{len(xs)} points x 7 indices')


def check_phi2_gradient(tables: CertificateTables, i: int = 0) -> CheckResult:
    fd = fd_gradient(lambda xp: phi2(i, np.zeros(14), xp), np.zeros(42),
                     step=FD_CONFIG['piecewise_step'], richardson=False)
    err = _relative_error(fd, _as_float(tables.f_prime(i)), get_tolerance('gradient_floor'))
    worst = float(err.max())
    return CheckResult(f'phi2-gradient[{i}]', worst <= get_tolerance('gradient_rel'), worst,
                       get_tolerance('gradient_rel'), f'worst component e{int(err.argmax()) + 1}')


def _cyclic_shift(c: np.ndarray, d: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    c_shift = np.roll(c, k)
    d_shift = np.concatenate([np.roll(d[7 * f:7 * f + 7], k) for f in range(6)])
    return c_shift, d_shift


@dataclass
class FarkasCertificate:
    c: np.ndarray
    d: np.ndarray
    mu: float
    residual: float
    symmetrized_residual: float
    symmetrized_mu: float


def farkas_certificate(tables: CertificateTables) -> FarkasCertificate:
    """Strictly positive c, d with sum c_i f_i' = sum d_j g_j', maximizing the smallest coefficient.

    LP over w = (c, d, mu): maximize mu subject to the 42 balance equations,
    sum(c) + sum(d) = 1 and c, d >= mu. The solution is polished onto the
    exact null space of the float system before the residual is measured.
    """
    Fp = tables.f_prime_matrix()
    Gp = tables.g_prime_matrix()
    M = np.hstack([Fp.T, -Gp.T])
    n = M.shape[1]
    A_eq = np.vstack([np.hstack([M, np.zeros((42, 1))]), np.hstack([np.ones(n), [0.0]])])
    b_eq = np.concatenate([np.zeros(42), [1.0]])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n + [(None, None)], method='highs')
    logger.info(f"Farkas LP: {res.message}")
    if res.status != 0 or res.x is None:
        raise CertificateInfeasible(f"Farkas LP failed: {res.message}")
    w = res.x[:n]
    if -res.fun <= 0:
        raise CertificateInfeasible(f"no strictly positive combination (mu = {-res.fun:.3e})")

    w = _polish(M, w)
    c, d = w[:7], w[7:]
    residual = float(np.linalg.norm(M @ w))

    shifts = [_cyclic_shift(c, d, k) for k in range(7)]
    c_sym = np.mean([s[0] for s in shifts], axis=0)
    d_sym = np.mean([s[1] for s in shifts], axis=0)
    w_sym = np.concatenate([c_sym, d_sym])
    return FarkasCertificate(
        c=c, d=d, mu=float(w.min()), residual=residual,
        symmetrized_residual=float(np.linalg.norm(M @ w_sym)),
        symmetrized_mu=float(w_sym.min()),
    )


def _polish(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Nearest point to w in the null space of M, renormalized to unit sum."""
    N = null_space(M)
    if N.size == 0:
        raise CertificateInfeasible("balance system has a trivial null space")
    w = N @ (N.T @ w)
    return w / w.sum()


def check_farkas(tables: CertificateTables) -> CheckResult:
    try:
        cert = farkas_certificate(tables)
    except CertificateInfeasible as exc:
        return CheckResult('farkas', False, float('inf'), get_tolerance('farkas_residual'), str(exc))
    tol = get_tolerance('farkas_residual')
    ok = cert.mu > 0 and cert.residual <= tol and cert.symmetrized_residual <= tol and cert.symmetrized_mu > 0
    return CheckResult('farkas', ok, cert.residual, tol,
                       f'mu = {cert.mu:.3e}, symmetrized mu = {cert.symmetrized_mu:.3e}',
                       {'c': cert.c.tolist(), 'd': cert.d.tolist(), 'mu': cert.mu})


def cone_triviality(tables: CertificateTables) -> Tuple[bool, np.ndarray, int]:
    """Rank of the row-normalized stacked f'/g' system, and the rank of the f' rows alone."""
    stacked = np.vstack([tables.f_prime_matrix(), tables.g_prime_matrix()])
    stacked = stacked / np.linalg.norm(stacked, axis=1, keepdims=True)
    sv = np.linalg.svd(stacked, compute_uv=False)
    f_rank = int(np.linalg.matrix_rank(tables.f_prime_matrix()))
    return bool(sv.min() > get_tolerance('cone_rank') and len(sv) == 42), sv, f_rank


def check_cone_triviality(tables: CertificateTables) -> CheckResult:
    ok, sv, f_rank = cone_triviality(tables)
    rank = int(np.sum(sv > get_tolerance('cone_rank')))
    return CheckResult('cone-triviality', ok and f_rank < 42, float(sv.min()), get_tolerance('cone_rank'),
                       f'rank {rank} of 42, f-rows alone rank {f_rank}')


# =============================================================================
# LOCAL MINIMUM PROBE
# =============================================================================

def local_density(V: np.ndarray) -> float:
    """A'/2 Delta' with Delta' minimized near the seven vertex-to-edge directions.

    For small perturbations of the regular heptagon the least-area direction
    stays close to one of the angles k pi / 7.
    """
    from geometry2d import ConvexPolygon, delta_at

    K = ConvexPolygon(V)
    window = PROBE_CONFIG['direction_window']
    best = np.inf
    for k in range(7):
        theta = k * np.pi / 7
        res = minimize_scalar(lambda th: delta_at(K, th), bounds=(theta - window, theta + window),
                              method='bounded', options={'xatol': get_tolerance('theta')})
        best = min(best, float(res.fun), delta_at(K, theta))
    return K.area / (2 * best)


@dataclass
class ProbeResult:
    samples: int
    radius: float
    min_gain: float
    min_max_phi: float
    strict_violations: int


def local_minimum_probe(n: Optional[int] = None, radius: Optional[float] = None,
                        rng: Optional[np.random.Generator] = None,
                        tables: Optional[CertificateTables] = None) -> ProbeResult:
    """Density of random W-perturbations of norm `radius` compared with A/2Delta."""
    n = n or PROBE_CONFIG['samples']
    radius = radius or PROBE_CONFIG['radius']
    rng = rng or np.random.default_rng(0)
    tables = tables or load_tables()
    _, P = solution_projector(tables)
    tol = get_tolerance('probe')
    min_gain, min_max_phi, strict = np.inf, np.inf, 0
    for _ in range(n):
        x = np.zeros(14)
        x[list(W_FREE)] = rng.standard_normal(len(W_FREE))
        x *= radius / np.linalg.norm(x)
        gain = local_density(perturbed_vertices(x)) - _DENSITY
        min_gain = min(min_gain, gain)
        min_max_phi = min(min_max_phi, max(phi(i, x) for i in range(7)))
        if np.linalg.norm(x - P @ x) >= 1e-4 * radius and gain <= tol:
            strict += 1
    logger.info(f"probe: {n} samples, min density gain {min_gain:.3e}")
    return ProbeResult(n, radius, float(min_gain), float(min_max_phi), strict)


def check_local_minimum(tables: CertificateTables, n: Optional[int] = None,
                        rng: Optional[np.random.Generator] = None) -> CheckResult:
    probe = local_minimum_probe(n=n, rng=rng, tables=tables)
    tol = get_tolerance('probe')
    ok = probe.min_gain >= -tol and probe.min_max_phi >= -tol and probe.strict_violations == 0
    return CheckResult('local-minimum-probe', ok, probe.min_gain, tol,
                       f'{probe.samples} probes at |x| = {probe.radius:g}, min max_i phi_i = {probe.min_max_phi:.3e}')


# =============================================================================
# DRIVER
# =============================================================================

CHECKS = (
    'minimal-polynomial', 'density-identity', 'rectangle', 'round-trip', 'hessian-symmetry',
    'null-sum', 'solution-space', 'convention', 'gradient', 'hessian', 'positive-definite',
    'psi-vanishing', 'tangent-index-map', 'phi2-reduction', 'phi2-gradient', 'farkas',
    'cone-triviality', 'local-minimum-probe',
)


def run_certificate(checks: Optional[Sequence[str]] = None, tables: Optional[CertificateTables] = None,
                    probe_samples: Optional[int] = None,
                    rng: Optional[np.random.Generator] = None) -> CertificateReport:
    """Run the named checks (all by default) in a fixed order."""
    selected = list(CHECKS) if not checks else list(checks)
    unknown = [c for c in selected if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    tables = tables or load_tables()
    convention = 'plain'
    results: List[CheckResult] = []
    for name in CHECKS:
        if name not in selected:
            continue
        logger.info(f"running check {name}")
        if name == 'minimal-polynomial':
            results.append(check_minimal_polynomial_factorization())
        elif name == 'density-identity':
            results.append(check_density_identity())
        elif name == 'rectangle':
            results.append(check_rectangle())
        elif name == 'round-trip':
            results.append(check_round_trip(tables))
        elif name == 'hessian-symmetry':
            results.append(check_hessian_symmetry_exact(tables))
        elif name == 'null-sum':
            results.append(check_null_sum(tables))
        elif name == 'solution-space':
            results.append(check_solution_space(tables))
        elif name == 'convention':
            result = check_convention(tables)
            convention = result.data['chosen']
            results.append(result)
        elif name == 'gradient':
            results.extend(check_gradient(tables, i, convention) for i in range(7))
        elif name == 'hessian':
            results.extend(check_hessian(tables, i, convention) for i in range(7))
        elif name == 'positive-definite':
            results.append(check_positive_definite(tables))
        elif name == 'psi-vanishing':
            results.append(check_psi_vanishing(rng))
        elif name == 'tangent-index-map':
            results.append(check_tangent_index_map(tables))
        elif name == 'phi2-reduction':
            results.append(check_phi2_reduction(rng))
        elif name == 'phi2-gradient':
            results.extend(check_phi2_gradient(tables, i) for i in range(7))
        elif name == 'farkas':
            results.append(check_farkas(tables))
        elif name == 'cone-triviality':
            results.append(check_cone_triviality(tables))
        elif name == 'local-minimum-probe':
            results.append(check_local_minimum(tables, probe_samples, rng))
        if not results[-1].passed:
            logger.warning(f"check {results[-1].name} failed: {results[-1].detail}")
    return CertificateReport(results, convention)
