# Command line front end for the slicereg library: point queries, expansions, scans,
# exports and the worked-example verification suite.

####
### Importing Libraries ###
####

import argparse
import json
import sys
from collections import Counter
from time import monotonic

import numpy as np
from rich.table import Table

import scan_config as sc
from lib import calculus as calc
from lib import differential as diff
from lib import gallery
from lib import io_
from lib import quaternions as qt
from lib import scanners as scan
from lib import verify
from lib.errors import SliceRegError

console = io_.console

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


####
### Argument types ###
####

def point_arg(text):
    """'w,x,y,z' -> quaternion array."""
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected four comma separated numbers, got {text!r}")
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"expected four comma separated numbers, got {text!r}")
    return np.array(values)


def pair_arg(text):
    """'AxB' -> (A, B) with both at least 2."""
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected AxB, got {text!r}")
    if a < 2 or b < 2:
        raise argparse.ArgumentTypeError(f"grid sizes must be at least 2, got {text!r}")
    return a, b


def positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slicereg",
        description="Calculus, zero sets and singular sets of quaternionic slice regular functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help, fn=True, point=False, grid=False):
        p = sub.add_parser(name, help=help)
        if fn:
            p.add_argument("--fn", required=True, help="path to a function spec (JSON)")
        if point:
            p.add_argument("--point", required=True, type=point_arg, help="quaternion w,x,y,z")
        if grid:
            p.add_argument("--grid", type=pair_arg, default=(sc.ALPHA_STEPS, sc.BETA_STEPS),
                           help=f"alpha x beta nodes (default {sc.ALPHA_STEPS}x{sc.BETA_STEPS})")
            p.add_argument("--sphere", type=pair_arg, default=(sc.THETA_STEPS, sc.PHI_STEPS),
                           help=f"theta x phi samples (default {sc.THETA_STEPS}x{sc.PHI_STEPS})")
            p.add_argument("--tol", type=positive_float, default=sc.GRID_TOL,
                           help=f"scan tolerance (default {sc.GRID_TOL})")
            p.add_argument("--format", choices=["csv", "json"], default="csv", help="cloud format (default csv)")
        p.add_argument("--out", help="write the result (cloud for scans, JSON report otherwise) to this path")
        p.add_argument("--json", action="store_true", help="print a machine-readable report")
        return p

    command("eval", "evaluate f at a point", point=True)
    command("derive", "slice, conjugate slice and spherical derivatives at a point", point=True)
    p = command("expand", "spherical expansion coefficients at a point", point=True)
    p.add_argument("--order", type=int, default=4, help="highest coefficient index (default 4)")
    p.add_argument("--method", choices=["division", "taylor"], help="default: picked from the stem")
    command("rank", "real differential and its rank at a point", point=True)
    command("scan-zeros", "zero set on a grid", grid=True)
    p = command("scan-singular", "singular set on a grid", grid=True)
    p.add_argument("--occupancy", action="store_true", help="add cell occupancy statistics (first phi sample)")
    command("scan-degenerate", "spheres where the spherical derivative vanishes", grid=True)
    p = command("constant-surfaces", "level set f = q and the semislices where f is constantly q", grid=True)
    p.add_argument("--q", required=True, type=point_arg, help="quaternion w,x,y,z")
    p = command("inject-check", "sampling test for injectivity")
    p.add_argument("--samples", type=int, default=sc.VERIFY_INJECTIVITY_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--region", help="sample the points of an exported cloud instead of the domain")
    p = command("verify", "reproduce the worked examples", fn=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help="shift the constant stem coefficient of h along k")
    p = command("export", "convert an exported cloud to another format", fn=False)
    p.add_argument("--cloud", required=True, help="CSV or JSON cloud to read")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    return parser


def grid_from_args(args):
    return scan.GridSpec(*args.grid, *args.sphere, tol=args.tol)


####
### Commands ###
####

def run_eval(args):
    f = io_.load_function_spec(args.fn)
    return {"function": f.name, "point": args.point, "value": f(args.point)}


def run_derive(args):
    f = io_.load_function_spec(args.fn)
    x = args.point
    out = {
        "function": f.name,
        "point": x,
        "slice": calc.slice_derivative(f, x),
        "conj_slice": calc.conj_slice_derivative(f, x),
        "spherical": calc.spherical_derivative(f, x),
    }
    if not qt.is_real(x):
        out["spherical_defining"] = calc.spherical_derivative_defining(f, x)
    return out


def run_expand(args):
    f = io_.load_function_spec(args.fn)
    e = calc.expansion_coefficients(f, args.point, args.order, args.method)
    out = {"function": f.name, "method": e.method, **e.to_dict()}
    if e.order >= 2:
        out["relations"] = calc.coefficient_relations(f, args.point, e)
    return out


def run_rank(args):
    f = io_.load_function_spec(args.fn)
    d = diff.real_differential(f, args.point)
    out = {"function": f.name, **d.to_dict()}
    out["svd_rank"] = d.svd_rank()
    out["singular"] = diff.is_singular(f, args.point)
    return out


def _cloud_result(f, cloud, args):
    if args.out:
        io_.export_cloud(cloud, args.out, args.format)
    return {
        "function": f.name,
        "rows": len(cloud),
        "kinds": dict(Counter(cloud.frame["kind"])),
        "warnings": cloud.warnings,
        "out": args.out,
    }


def run_scan_zeros(args):
    f = io_.load_function_spec(args.fn)
    grid = grid_from_args(args)
    cloud = scan.zeros_to_cloud(f, scan.scan_zeros(f, grid), grid)
    return _cloud_result(f, cloud, args)


def run_scan_singular(args):
    f = io_.load_function_spec(args.fn)
    grid = grid_from_args(args)
    cloud = scan.singular_scan(f, grid)
    if args.occupancy:
        cloud.metadata["occupancy"] = scan.occupancy_statistics(f, grid, phi_index=0)
    out = _cloud_result(f, cloud, args)
    out["occupancy"] = cloud.metadata.get("occupancy")
    return out


def run_scan_degenerate(args):
    f = io_.load_function_spec(args.fn)
    return _cloud_result(f, scan.degenerate_scan(f, grid_from_args(args)), args)


def run_constant_surfaces(args):
    f = io_.load_function_spec(args.fn)
    surfaces = scan.constant_surface_extract(f, args.q, grid_from_args(args))
    out = _cloud_result(f, surfaces.cloud, args)
    out["semislices"] = surfaces.semislices
    out["surfzero_residual"] = surfaces.surfzero_residual
    return out


def run_inject_check(args):
    f = io_.load_function_spec(args.fn)
    region = io_.read_cloud(args.region) if args.region else f.domain
    report = scan.injectivity_sample(f, region, args.samples, args.seed)
    out = {"function": f.name, "seed": args.seed, **report.to_dict()}
    if args.out:
        io_.write_json(out, args.out)
    return out


def run_verify(args):
    h = gallery.product_example(perturb=args.perturb) if args.perturb else None
    checks = verify.verify_examples(h=h, seed=args.seed)
    out = {
        "seed": args.seed,
        "perturb": args.perturb,
        "passed": verify.all_passed(checks),
        "checks": [c.to_dict() for c in checks],
    }
    if args.out:
        io_.write_json(out, args.out)
    return out


def run_export(args):
    cloud = io_.read_cloud(args.cloud)
    out = args.out or args.cloud.rsplit(".", 1)[0] + "." + args.format
    io_.export_cloud(cloud, out, args.format)
    return {"rows": len(cloud), "out": out}


COMMANDS = {
    "eval": run_eval,
    "derive": run_derive,
    "expand": run_expand,
    "rank": run_rank,
    "scan-zeros": run_scan_zeros,
    "scan-singular": run_scan_singular,
    "scan-degenerate": run_scan_degenerate,
    "constant-surfaces": run_constant_surfaces,
    "inject-check": run_inject_check,
    "verify": run_verify,
    "export": run_export,
}

# Point queries write their JSON report through --out; scans and inject-check handle it themselves
WRITES_OWN_OUTPUT = {"scan-zeros", "scan-singular", "scan-degenerate", "constant-surfaces",
                     "inject-check", "verify", "export"}


####
### Output ###
####

def show(result, as_json):
    if as_json:
        console.print_json(json.dumps(result, default=io_._to_builtin, sort_keys=True))
        return
    if "checks" in result:
        table = Table("check", "residual", "threshold", "status")
        for c in result["checks"]:
            status = "[green]pass[/green]" if c["passed"] else ("[red]FAIL[/red]" if c["asserted"] else "[yellow]info[/yellow]")
            table.add_row(c["name"], f"{c['residual']:.3g}", f"{c['threshold']:.3g}", status)
        console.print(table)
        return
    table = Table("key", "value")
    for key, value in result.items():
        table.add_row(key, str(io_._to_builtin(value) if isinstance(value, (np.ndarray, np.generic)) else value))
    console.print(table)


def main(argv=None):
    args = build_parser().parse_args(argv)
    io_.generate_folders()
    start = monotonic()
    try:
        result = COMMANDS[args.command](args)
        if args.out and args.command not in WRITES_OWN_OUTPUT:
            io_.write_json(result, args.out)
    except SliceRegError as e:
        console.log(f"[red]error[/red] {e}")
        code = EXIT_USAGE
        result = {"error": str(e)}
    except OSError as e:
        console.log(f"[red]io error[/red] {e.filename}: {e.strerror}")
        code = EXIT_IO
        result = {"error": f"{e.filename}: {e.strerror}"}
    else:
        show(result, args.json)
        code = EXIT_VERIFY_FAILED if args.command == "verify" and not result["passed"] else EXIT_OK

    time_taken = round(monotonic() - start, 2)
    outcome = {k: v for k, v in result.items() if k in ("rows", "passed", "collisions", "error")}
    source = getattr(args, "fn", None) or getattr(args, "cloud", None)
    io_.write_log(io_.RunRecord(args.command, source, code, time_taken, io_.timestamp(), outcome))
    console.log(f"{args.command} finished with exit code {code}. Took {time_taken} seconds")
    return code


if __name__ == "__main__":
    sys.exit(main())
