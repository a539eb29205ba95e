"""
Command-line entry point: construct, flex, check, export, report, replay.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on a
configuration or parameter error.
"""
import argparse
import json
import sys
from pathlib import Path

from polyhedra import get_logger, get_target, is_embedded, oriented_volume, set_level
from polyhedra.errors import ConfigurationError, InvalidParameters, PolyhedraError
from polyhedra.flex_engine import read_path_csv, read_path_json, write_path_csv, write_path_json
from polyhedra.invariants import invariant_trace, track_branches
from polyhedra.mesh_io import write_labels, write_obj
from polyhedra.steffen import export_steffen_fixture
from suite_runner import CheckSuiteConfig, run_suite

logger = get_logger('cli')

SUITE = ('type1', 'type2', 'type3', 'steffen')


def _config(args, target=None):
    return CheckSuiteConfig(target=target or args.target, mesh=args.mesh, samples=args.samples,
                            tolerance=args.tolerance, precision=args.precision, output_dir=args.out,
                            config_path=args.config, log_level='DEBUG' if args.verbose else None)


def _write_surface(surface, directory, stem):
    directory = Path(directory)
    obj = write_obj(surface, directory / f"{stem}.obj")
    write_labels(surface, directory / f"{stem}.labels.json")
    return obj


def cmd_construct(args):
    config = _config(args)
    settings = config.settings()
    target = get_target(config.target, config.mesh)
    surface = target.construct_fn(settings)
    obj = _write_surface(surface, settings.output_dir, config.target)
    print(f"{config.target}: {surface.n_vertices} vertices, {len(surface.faces)} faces, {len(surface.edges)} edges")
    print(f"  volume {oriented_volume(surface):.12g}, embedded {is_embedded(surface)}")
    print(f"  written to {obj}")
    return 0


def cmd_flex(args):
    config = _config(args)
    settings = config.settings()
    target = get_target(config.target, config.mesh)
    path = target.trace_fn(settings, settings.samples)
    out = Path(settings.output_dir)
    write_path_csv(path, out / f"{config.target}.path.csv")
    write_path_json(path, out / f"{config.target}.path.json")
    frame = invariant_trace(path, track_branches(path))
    frame.to_csv(out / f"{config.target}.invariants.csv", index=False, float_format='%.17g')
    print(f"{config.target}: {len(path.samples)} samples, max length drift {path.max_length_drift():.3e}")
    print(f"  volume spread {frame['volume'].max() - frame['volume'].min():.3e}")
    print(f"  written to {out}")
    return 0


def cmd_check(args):
    report = run_suite(_config(args))
    print(report.summary())
    return report.exit_code


def cmd_export(args):
    config = _config(args)
    settings = config.settings()
    out = Path(settings.output_dir)
    written = []
    for target_id in SUITE:
        if target_id == 'steffen':
            written.append(export_steffen_fixture(out))
        else:
            written.append(_write_surface(get_target(target_id).construct_fn(settings), out, target_id))
    for w in written:
        print(f"  {w}")
    return 0


def cmd_report(args):
    reports = [run_suite(_config(args, target_id)) for target_id in SUITE]
    out = Path(reports[0].artifacts['report']).parent
    index = {r.target: {'counts': r.counts(), 'exit_code': r.exit_code} for r in reports}
    (out / 'index.json').write_text(json.dumps(index, sort_keys=True, indent=2) + "\n")
    for r in reports:
        print(r.summary())
    return max(r.exit_code for r in reports)


def cmd_replay(args):
    """Re-evaluate the invariants along a stored path (JSON, or CSV against a target's surface)."""
    config = _config(args)
    settings = config.settings()
    source = Path(args.path_file)
    if source.suffix == '.json':
        path = read_path_json(source)
    elif source.suffix == '.csv':
        path = read_path_csv(source, get_target(config.target, config.mesh).construct_fn(settings))
    else:
        raise ConfigurationError(f"Paths are replayed from .json or .csv files, got {source.name}")
    frame = invariant_trace(path, track_branches(path))
    out = Path(settings.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = out / f"{source.stem}.replay.csv"
    frame.to_csv(written, index=False, float_format='%.17g')
    print(f"{source.name}: {len(path.samples)} samples, max length drift {path.max_length_drift():.3e}")
    print(f"  volume spread {frame['volume'].max() - frame['volume'].min():.3e}")
    print(f"  written to {written}")
    return 0


COMMANDS = {
    'construct': cmd_construct,
    'flex': cmd_flex,
    'check': cmd_check,
    'export': cmd_export,
    'report': cmd_report,
    'replay': cmd_replay,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--samples', type=int, default=None, help='Number of path samples')
    common.add_argument('--tolerance', type=float, default=None, help='Invariant tolerance')
    common.add_argument('--precision', type=int, default=None, help='Decimal digits for relation detection')
    common.add_argument('--out', default=None, help='Output directory')
    common.add_argument('--config', default=None, help='JSON or TOML config file')
    common.add_argument('--mesh', default=None, help='Mesh file for the custom target')
    common.add_argument('--verbose', action='store_true', help='Log at DEBUG level')

    ap = argparse.ArgumentParser(prog='flexible-polyhedra', description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest='command', required=True)
    for name in ('construct', 'flex', 'check'):
        p = sub.add_parser(name, parents=[common])
        p.add_argument('target', nargs='?', default='type1',
                       help='type1, type2, type3, steffen or custom (with --mesh)')
    sub.add_parser('export', parents=[common])
    sub.add_parser('report', parents=[common])
    p = sub.add_parser('replay', parents=[common])
    p.add_argument('path_file', help='Path written by the flex command (.json, or .csv with --target)')
    p.add_argument('--target', default='type1', help='Target whose surface labels a CSV path')
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not hasattr(args, 'target'):
        args.target = 'type1'
    if args.verbose:
        set_level('DEBUG')
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, InvalidParameters) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except PolyhedraError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
