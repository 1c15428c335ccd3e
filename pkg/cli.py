"""
Command-line front end

    python cli.py density2d --builtin heptagon
    python cli.py certify-heptagon --checks null-sum
    python cli.py ball3d --builtin box:1,1,1.2 --lambda 0.05
    python cli.py ball3d --legendre 200 --csv legendre.csv
    python cli.py render --builtin heptagon --shells 2 --out heptagon.svg
    python cli.py schema density

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config import RENDER_CONFIG, SWEEP_CONFIG, TOLERANCES
from exactfield import FieldParseError
from heptagon_certificate import ConvexityViolation, DegenerateGeometryError, DomainError

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    """Parsed command line with defaults filled in."""

    command: str
    input: Optional[str] = None
    builtin: Optional[str] = None
    output: Optional[str] = None
    json_out: Optional[str] = None
    seed: Optional[int] = None
    samples: int = SWEEP_CONFIG['coarse_samples']
    shells: int = RENDER_CONFIG['default_shells']
    tolerances: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("--samples must be positive")
        if self.shells < 0:
            raise ValueError("--shells must be nonnegative")
        for name, value in self.tolerances.items():
            if name not in TOLERANCES:
                raise ValueError(f"unknown tolerance {name!r}")
            if value <= 0:
                raise ValueError(f"tolerance {name} must be positive")

    @contextmanager
    def applied(self):
        """Tolerance overrides in force for one run, restored afterwards."""
        saved = {name: TOLERANCES[name] for name in self.tolerances}
        TOLERANCES.update(self.tolerances)
        try:
            yield self
        finally:
            TOLERANCES.update(saved)


def _parse_tolerance(text: str):
    name, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pessimal', description='Double-lattice packing densities and certificates')
    parser.add_argument('--seed', type=int, default=None, help='RNG seed (default: $PESSIMAL_SEED or the built-in seed)')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    parser.add_argument('--quiet', action='store_true', help='warnings only')
    parser.add_argument('--json', dest='json_out', metavar='OUT', help='also write the result as JSON')
    parser.add_argument('--tol', action='append', type=_parse_tolerance, default=[], metavar='NAME=VALUE',
                        help='override a tolerance')
    sub = parser.add_subparsers(dest='command', required=True)

    density = sub.add_parser('density2d', help='double-lattice density of a convex polygon')
    _add_polygon_source(density)
    density.add_argument('--samples', type=int, default=SWEEP_CONFIG['coarse_samples'])
    density.add_argument('--shells', type=int, default=3, help='shells for the admissibility check')
    density.add_argument('--profile', metavar='CSV', help='write the Delta(theta) sweep')

    certify = sub.add_parser('certify-heptagon', help='run the heptagon certificate')
    certify.add_argument('--checks', help='comma-separated check names (default: all)')
    certify.add_argument('--tables', metavar='FILE', help='alternative certificate table file')
    certify.add_argument('--format', choices=('text', 'json'), default='text')
    certify.add_argument('--probe-samples', type=int, default=None)

    ball = sub.add_parser('ball3d', help='ball apparatus: mean width, eta, density bound, Legendre table')
    source = ball.add_mutually_exclusive_group()
    source.add_argument('--builtin', help='ball, cube, octahedron, box:a,b,c, random:n')
    source.add_argument('--body', metavar='FILE', help='body JSON {"vertices": [[x, y, z], ...]}')
    ball.add_argument('--lambda', dest='lam', type=float, default=None)
    ball.add_argument('--lmax', type=int, default=None, help='report harmonic content up to this degree')
    ball.add_argument('--legendre', type=int, metavar='L', help='tabulate c_0..c_L')
    ball.add_argument('--csv', metavar='OUT', help='CSV file for the Legendre table')
    ball.add_argument('--residues', type=int, metavar='L', help='check the residue pattern up to L')

    render = sub.add_parser('render', help='SVG picture of a double-lattice packing')
    _add_polygon_source(render)
    render.add_argument('--lattice', default='auto', help="'auto' or a lattice JSON file")
    render.add_argument('--shells', type=int, default=RENDER_CONFIG['default_shells'])
    render.add_argument('--out', required=True, metavar='FILE.svg')

    schema = sub.add_parser('schema', help='print a shipped JSON schema')
    schema.add_argument('name')
    return parser


def _add_polygon_source(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--builtin', help='heptagon, square, triangle, ngon:k, disk:k')
    group.add_argument('--polygon', metavar='FILE', help='polygon JSON {"vertices": [[x, y], ...]}')


def _load_polygon(args):
    from geometry2d import ConvexPolygon, builtin_polygon
    from schemas import PolygonModel
    from utils import load_model

    if args.builtin:
        return args.builtin, builtin_polygon(args.builtin)
    model = load_model(args.polygon, PolygonModel)
    return args.polygon, ConvexPolygon(np.array(model.vertices, dtype=float))


def _emit(config: RunConfig, data: Dict) -> None:
    if config.json_out:
        from utils import write_json

        write_json(config.json_out, data)


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def cmd_density2d(args, config: RunConfig) -> int:
    from geometry2d import build_double_lattice, delta_profile, double_lattice_density, verify_admissible
    from schemas import DensityResultModel
    from utils import format_float

    name, K = _load_polygon(args)
    result = double_lattice_density(K, config.samples)
    lattice = build_double_lattice(K, result.parallelogram)
    report = verify_admissible(K, lattice, args.shells)
    print(f"polygon:    {name} ({K.n} vertices)")
    print(f"density:    {format_float(result.density)}")
    print(f"Delta:      {format_float(result.delta)}")
    print(f"theta*:     {format_float(result.minimizing_direction)}")
    print(f"area:       {format_float(result.area)}")
    print(f"mean area:  {format_float(lattice.mean_area)}")
    print(f"admissible: {report.admissible} (max overlap {report.max_overlap:.2e} over {report.pairs_checked} copies)")
    if args.profile:
        delta_profile(K, config.samples).to_csv(args.profile, index=False)
    payload = {'polygon': name, **result.to_dict(), 'lattice': lattice.to_dict(), 'admissibility': report.to_dict()}
    _emit(config, DensityResultModel.model_validate(payload).model_dump())
    return EXIT_OK if report.admissible else EXIT_FAILED


def cmd_certify_heptagon(args, config: RunConfig) -> int:
    from heptagon_certificate import load_tables, run_certificate
    from utils import make_rng

    checks = [c.strip() for c in args.checks.split(',') if c.strip()] if args.checks else None
    tables = load_tables(args.tables) if args.tables else load_tables()
    report = run_certificate(checks, tables, probe_samples=args.probe_samples, rng=make_rng(config.seed))
    if args.format == 'json':
        print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    else:
        print(report.to_text())
    _emit(config, report.to_json())
    if not report.passed:
        print(f"failed checks: {', '.join(report.failures)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_ball3d(args, config: RunConfig) -> int:
    import ball3d
    from schemas import BallReportModel, BodyModel
    from utils import format_float, load_model, make_rng

    status = EXIT_OK
    if args.legendre is not None:
        table = ball3d.legendre_table(args.legendre)
        zeros = table.loc[table['c_l'].str.startswith('0/'), 'l'].tolist()
        print(f"c_l for l = 0..{args.legendre}: zero exactly at l = {zeros}")
        print(table.head(8).to_string(index=False))
        if args.csv:
            table.to_csv(args.csv, index=False)
        if zeros != [1, 2]:
            status = EXIT_FAILED
    if args.residues is not None:
        residues = ball3d.residue_pattern_check(args.residues)
        print(f"residue pattern to l = {args.residues}: {'holds' if residues.passed else 'FAILS'}")
        for failure in residues.failures[:10]:
            print(f"  {failure}")
        if not residues.passed:
            status = EXIT_FAILED
    if args.body is None and args.builtin is None:
        if args.legendre is None and args.residues is None:
            raise ValueError("ball3d needs --builtin, --body, --legendre or --residues")
        return status

    if args.body:
        model = load_model(args.body, BodyModel)
        K = ball3d.ConvexBody3(np.array(model.vertices, dtype=float), name=args.body)
    else:
        K = ball3d.builtin_body(args.builtin, make_rng(config.seed))
    body = K.volume_normalized()
    w = ball3d.mean_width(body)
    eta_value = ball3d.eta(body)
    residual = ball3d.min_width_residual(body)
    print(f"body:               {K.name} (volume normalized to 4 pi / 3)")
    print(f"mean width w:       {format_float(w)}")
    print(f"eta:                {format_float(eta_value)}")
    print(f"min-width residual: {residual:.3e}")
    report = {
        'body': K.name,
        'volume': body.volume,
        'surface_area': body.surface_area,
        'mean_width': w,
        'eta': eta_value,
        'min_width_residual': residual,
    }
    if args.lmax is not None:
        norms = ball3d.harmonic_expansion(body.support, args.lmax).degree_norms()
        print("harmonic content:   " + ' '.join(f'l{l}={n:.2e}' for l, n in enumerate(norms)))

    if not body.is_ball:
        search = ball3d.find_low_eta_rotation(body)
        print(f"low-eta rotation:   {'found' if search.found else 'not found'} (w/2 - eta = {search.margin:.3e})")
        report.update(rotation_found=search.found, eta_margin=search.margin)
        rotation = search.rotation
    else:
        rotation = None

    lam = args.lam if args.lam is not None else 0.0
    bound = ball3d.density_lower_bound(K, lam, rotation)
    if bound.direct_mean_volume is not None:
        print(f"d(Xi'):             {format_float(bound.direct_mean_volume)}")
    print(f"density bound:      {format_float(bound.bound)} at lambda = {lam:g}")
    print(f"excess over hcp:    {bound.excess:.3e} (beta = {bound.beta:.3e})")
    report.update(bound=bound.to_dict(), mean_volume=bound.direct_mean_volume)
    _emit(config, BallReportModel.model_validate(report).model_dump(by_alias=True))
    return status


def cmd_render(args, config: RunConfig) -> int:
    from geometry2d import DoubleLattice2D, verify_admissible
    from render import packing_scene, write_svg
    from schemas import LatticeModel
    from utils import load_model

    _, K = _load_polygon(args)
    lattice = None
    if args.lattice != 'auto':
        model = load_model(args.lattice, LatticeModel)
        lattice = DoubleLattice2D(np.array(model.t1), np.array(model.t2), np.array(model.inversion_center))
    scene = packing_scene(K, lattice, args.shells)
    path = write_svg(scene, args.out)
    print(f"wrote {path} ({len(scene.outlines)} copies)")
    if lattice is not None:
        report = verify_admissible(K, lattice, max(args.shells, 1))
        if not report.admissible:
            print(f"lattice is not admissible: overlap {report.max_overlap:.2e}", file=sys.stderr)
            return EXIT_FAILED
    return EXIT_OK


def cmd_schema(args, config: RunConfig) -> int:
    from schemas import SCHEMAS

    if args.name not in SCHEMAS:
        raise ValueError(f"unknown schema {args.name!r}; choose from {', '.join(sorted(SCHEMAS))}")
    print(json.dumps(SCHEMAS[args.name].model_json_schema(), indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    'density2d': cmd_density2d,
    'certify-heptagon': cmd_certify_heptagon,
    'ball3d': cmd_ball3d,
    'render': cmd_render,
    'schema': cmd_schema,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        config = RunConfig(
            command=args.command,
            input=getattr(args, 'polygon', None) or getattr(args, 'body', None),
            builtin=getattr(args, 'builtin', None),
            output=getattr(args, 'out', None),
            json_out=args.json_out,
            seed=args.seed,
            samples=getattr(args, 'samples', SWEEP_CONFIG['coarse_samples']),
            shells=getattr(args, 'shells', RENDER_CONFIG['default_shells']),
            tolerances=dict(args.tol),
        )
        logger.debug(f"run config: {config}")
        with config.applied():
            return COMMANDS[args.command](args, config)
    except (ConvexityViolation, DegenerateGeometryError, DomainError) as exc:
        # raised inside certificate computations, not by user input
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, FieldParseError, OSError) as exc:
        # every input-side exception family derives from ValueError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
