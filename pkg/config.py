"""
Configuration for the pessimal packing toolkit

This file contains ONLY static configuration that rarely changes:
- Numerical tolerances
- Sweep, finite-difference and quadrature settings
- Builtin shapes
- Rendering style

NO GEOMETRY HERE - computations go in geometry2d.py / ball3d.py
NO FUNCTIONS HERE beyond small lookups - helpers go in utils.py
"""

# =============================================================================
# TOLERANCES - one central record, referenced everywhere
# =============================================================================
TOLERANCES = {
    'theta': 1e-12,          # golden-section refinement in direction space
    'geometric': 1e-9,       # predicates: on-boundary, parallel, convexity
    'collinear': 1e-12,      # cross products below this drop a vertex
    'overlap': 1e-10,        # admissibility: max allowed overlap area
    'overlay_grid': 1e-12,   # snapping grid for overlap areas, relative to the polygon size
    'kk_floor': 1e-6,        # slack on the sqrt(3)/2 lower bound
    'gradient_rel': 1e-6,    # FD gradients vs the tabulated f and g'
    'gradient_floor': 1e-2,  # entries smaller than this are compared absolutely
    'hessian_rel': 1e-4,     # FD Hessian vs the tabulated F
    'hessian_small': 1e-6,   # below this a Hessian entry is compared absolutely
    'rank_gap': 1e-3,        # singular values above this count toward rank (f on W)
    'rank_null': 1e-12,      # ... and below this are treated as zero
    'cone_rank': 1e-8,       # smallest singular value of the stacked f'/g' system
    'farkas_residual': 1e-10,
    'probe': 1e-12,          # local-minimum probe slack on the density
    'quadrature': 1e-8,
}


def get_tolerance(name: str) -> float:
    """Look up a tolerance by name (KeyError for unknown names)."""
    return TOLERANCES[name]


# =============================================================================
# DIRECTION SWEEP - delta_min in geometry2d
# =============================================================================
SWEEP_CONFIG = {
    'coarse_samples': 2048,      # uniform theta samples over [0, pi)
    'oracle_samples': 1_000_000, # brute-force oracle used by the property tests
    'tie_rel': 1e-12,            # relative gap under which minima count as ties
    'length_minima_samples': 4096,
    'refine_candidates': 16,     # best coarse minima handed to golden-section refinement
}

# =============================================================================
# FINITE DIFFERENCES - heptagon certificate
#
# Central differences at two step sizes combined by one Richardson level:
#   D = (4 D(h/2) - D(h)) / 3
# The boundary-replacement functional phi2 is only piecewise analytic in x' (the replacement
# arcs have a kink at t0), so it gets a single small step instead.
# =============================================================================
FD_CONFIG = {
    'step': 1e-3,
    'piecewise_step': 1e-7,
    'root_xtol': 1e-15,
}

# =============================================================================
# SPHERICAL QUADRATURE - ball3d
#
# Product Gauss rule split at the coordinate planes: Gauss-Legendre in the polar angle
# on each hemisphere, Gauss-Legendre in phi on each quarter turn. Support
# functions of axis-aligned polytopes are smooth on every octant, so the rule
# stays spectral for them.
# =============================================================================
QUADRATURE_CONFIG = {
    'nodes_per_half_theta': 48,
    'nodes_per_quarter_phi': 48,
    'harmonic_lmax': 12,
    'circle_samples': 256,       # in-plane angle samples for rotation averages
}

# =============================================================================
# ROTATION SEARCH - find_low_eta_rotation
# =============================================================================
ROTATION_SEARCH = {
    'sphere_points': 10_000,     # Fibonacci points for the pole y
    'inplane_angles': 12,        # rotations about x7 per pole
    'refine_best': 8,            # local refinements started from the best grid points
    'margin': 1e-12,             # eta must undercut w/2 by more than this
}

# =============================================================================
# HCP / PERTURBED-BALL DENSITY BOUND
# =============================================================================
HCP_CONFIG = {
    'seed_radius': 0.25,         # generators must stay this close to (2x1, 2x2)
    'max_perturbation': 1e-2,    # |h_i - 1| allowed by build_hcp_double_lattice
    'admissibility_shells': 3,
}

BALL_BOUND_CONFIG = {
    'lambdas': [0.001, 0.002, 0.005, 0.01, 0.02, 0.05],
    'surface_floor': 'isoperimetric',   # S(K) replaced by S(B) = 4 pi
}

# =============================================================================
# MONTE CARLO - sampled hull volumes for the Steiner oracle
# =============================================================================
MONTE_CARLO = {
    'sphere_samples': 20_000,
    'relative_tolerance': 5e-3,
}

# =============================================================================
# BUILTIN SHAPES
# name -> description (parsed by geometry2d.builtin_polygon / ball3d.builtin_body)
# =============================================================================
BUILTIN_POLYGONS = {
    'heptagon': 'regular heptagon, unit circumradius, vertex m0 = (1, 0)',
    'square': 'unit square centred at the origin',
    'triangle': 'equilateral triangle with unit side',
    'ngon:k': 'regular k-gon, unit circumradius',
    'disk:k': 'unit disk approximated by an inscribed regular k-gon',
}

BUILTIN_BODIES = {
    'ball': 'unit ball (exact support function)',
    'cube': 'unit cube centred at the origin',
    'octahedron': 'regular octahedron with vertices on the unit axes',
    'box:a,b,c': 'axis-aligned box with side lengths a, b, c',
    'random:n': 'hull of n random points on the unit sphere (seeded)',
}

# =============================================================================
# RENDERING - SVG packing pictures
# =============================================================================
RENDER_CONFIG = {
    'viewport': 1000,
    'margin': 20,
    'number_format': '{:.4f}',
    'fill': '#d3d3d3',
    'fill_inverted': '#a9a9a9',
    'stroke': '#000000',
    'stroke_width': 1.5,
    'default_shells': 2,
}

# =============================================================================
# RANDOMNESS
# =============================================================================
DEFAULT_SEED = 20140101
SEED_ENV_VAR = 'PESSIMAL_SEED'

# =============================================================================
# LOCAL-MINIMUM PROBE - random perturbations of the heptagon
# =============================================================================
PROBE_CONFIG = {
    'samples': 10_000,
    'radius': 1e-3,
    'direction_window': 0.05,    # search half-width around each k pi / 7
}
