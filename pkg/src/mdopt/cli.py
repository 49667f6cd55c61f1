"""Command-line front end: minimize | sets | shrinkrate | useq | catalog.

Every command writes plot-friendly CSV plus a ``config.json`` with the fully
resolved parameters next to the outputs, so a run is reproducible from its
output directory alone.  Floats are written with 17 significant digits;
identical config and seed give byte-identical files.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import schedule, sets as sets_mod, useq as useq_mod
from .integrate import IntegratorConfig, default_config
from .nmd import Exponential, NascentMD, Rational
from .objective import UnknownFunctionError, catalog_get, catalog_names, evaluate_batch


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rle(mask: np.ndarray) -> list[list[int]]:
    """Run-length encode a boolean vector as [value, run_length] pairs."""
    out = []
    for v in mask.astype(int):
        if out and out[-1][0] == v:
            out[-1][1] += 1
        else:
            out.append([int(v), 1])
    return out


def _resolve(function, tau, p, grid, mc, seed):
    try:
        obj, region = catalog_get(function)
    except UnknownFunctionError:
        raise click.UsageError(f"unknown function {function!r}; see `mdopt catalog`")
    tau_kind = Exponential() if tau == "exp" else Rational(p=p)
    if grid is not None:
        integ = IntegratorConfig(kind="grid", resolution=grid)
    elif mc is not None:
        integ = IntegratorConfig(kind="mc", n=mc, seed=seed)
    else:
        integ = default_config(region.dim, seed=seed)
    return obj, region, tau_kind, integ


def _config_payload(**kw):
    out = {}
    for key, val in kw.items():
        if isinstance(val, (np.floating, np.integer)):
            val = val.item()
        out[key] = val
    return out


def common_options(f):
    opts = [
        click.option("--function", required=True, help="catalog function name"),
        click.option("--tau", type=click.Choice(["exp", "rational"]), default="exp",
                     show_default=True, help="density transform kind"),
        click.option("--p", type=float, default=1.0, show_default=True,
                     help="rational transform offset"),
        click.option("--grid", type=int, default=None,
                     help="grid resolution per axis (default picked per dimension)"),
        click.option("--mc", type=int, default=None, help="Monte Carlo sample count"),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
                     show_default=True, help="output directory"),
    ]
    for opt in reversed(opts):
        f = opt(f)

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as exc:  # numerical/module failure -> exit 3
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
    return wrapper


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file of per-command defaults; explicit flags win")
@click.pass_context
def main(ctx, config_path):
    """Global minimization via annealed densities on compact regions."""
    if config_path:
        with open(config_path) as fh:
            ctx.default_map = json.load(fh)


@main.command()
@common_options
@click.option("--k0", type=float, default=1.0, show_default=True)
@click.option("--growth", type=float, default=float(np.e), show_default=True)
@click.option("--stages", type=int, default=16, show_default=True)
@click.option("--var-tol", type=float, default=1e-8, show_default=True)
def minimize(function, tau, p, grid, mc, seed, out, k0, growth, stages, var_tol):
    """Run the k-continuation and write trace.csv + result.json."""
    obj, region, tau_kind, integ = _resolve(function, tau, p, grid, mc, seed)
    cfg = schedule.ContinuationConfig(k0=k0, growth=growth, max_stages=stages,
                                      var_tol=var_tol, integrator=integ, tau=tau_kind)
    result = schedule.run_continuation(obj, region, cfg)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = schedule.trace_to_rows(result)
    _write_csv(out / "trace.csv", header, rows)
    _write_json(out / "result.json", {
        "fstar_estimate": result.fstar_estimate,
        "xstar_estimate": result.xstar_estimate.tolist(),
        "stop_reason": result.stop_reason,
        "stages": len(result.trace),
    })
    _write_json(out / "config.json", _config_payload(
        command="minimize", function=function, tau=tau, p=p, grid=grid, mc=mc,
        seed=seed, k0=k0, growth=growth, stages=stages, var_tol=var_tol,
        integrator=str(integ)))
    click.echo(f"fstar_estimate={_fmt(result.fstar_estimate)} "
               f"stop={result.stop_reason} ({len(result.trace)} stages)")


@main.command("sets")
@common_options
@click.option("--k", "k_list", required=True,
              help="comma-separated k values, e.g. 0,1,3,9")
@click.option("--profile-res", type=int, default=None,
              help="resolution of the density profile output (default 1024 in 1-d, 128 in 2-d)")
def sets_cmd(function, tau, p, grid, mc, seed, out, k_list, profile_res):
    """Extract the three set families per k; write measures, masks, profiles."""
    ks = [float(s) for s in k_list.split(",") if s.strip() != ""]
    if not ks:
        raise click.UsageError("--k needs at least one value")
    obj, region, tau_kind, integ = _resolve(function, tau, p, grid, mc, seed)
    md0 = NascentMD(obj, region, tau=tau_kind, k=ks[0], integrator=integ)
    mesh_res = grid if grid is not None else integ.resolutions(region.dim)[-1][0]
    mesh = region.build_grid(mesh_res)
    prof_res = profile_res or (1024 if region.dim == 1 else 128)
    prof_mesh = region.build_grid(prof_res)

    measure_rows = []
    masks = []
    profile_rows = []
    coord_cols = [f"x{j}" for j in range(region.dim)]
    for k in ks:
        m = md0.with_k(k)
        for kind in sets_mod.SetKind:
            s = sets_mod.extract_set(m, kind, mesh)
            measure_rows.append([k, kind.value, s.measure, s.threshold])
            masks.append({"k": k, "kind": kind.value,
                          "resolution": list(mesh.resolution),
                          "rle": _rle(s.mask)})
        dens = np.exp(m.log_density(prof_mesh.nodes))
        for node, d in zip(prof_mesh.nodes, dens):
            profile_rows.append([k, *node.tolist(), float(d)])
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "measures.csv", ["k", "kind", "measure", "threshold"], measure_rows)
    _write_json(out / "masks.json", masks)
    _write_csv(out / "density_profiles.csv", ["k", *coord_cols, "density"], profile_rows)
    _write_json(out / "config.json", _config_payload(
        command="sets", function=function, tau=tau, p=p, grid=grid, mc=mc,
        seed=seed, k=ks, mesh_resolution=mesh_res, profile_resolution=prof_res))
    click.echo(f"wrote measures for k={ks} to {out}")


@main.command()
@common_options
@click.option("--k", type=float, default=8.0, show_default=True)
@click.option("--dk", type=float, default=0.01, show_default=True)
@click.option("--grad-min", type=float, default=0.1, show_default=True,
              help="skip boundary points with smaller gradient norm")
def shrinkrate(function, tau, p, grid, mc, seed, out, k, dk, grad_min):
    """Compare predicted vs measured boundary speed of the D0 set."""
    obj, region, tau_kind, integ = _resolve(function, tau, p, grid, mc, seed)
    m = NascentMD(obj, region, tau=tau_kind, k=k, integrator=integ)
    mesh_res = grid if grid is not None else integ.resolutions(region.dim)[-1][0]
    mesh = region.build_grid(mesh_res)
    d0 = sets_mod.extract_set(m, sets_mod.SetKind.D0, mesh)
    rows = []
    for x in sets_mod.boundary_points(d0):
        from .objective import gradient
        gn = float(np.linalg.norm(gradient(obj, x)))
        if gn <= grad_min:
            continue
        theo = sets_mod.shrink_rate_theoretical(m, x)
        emp = sets_mod.shrink_rate_empirical(m, x, dk)
        rows.append([*x.tolist(), k, dk, gn, theo, emp,
                     emp / theo if theo > 0 else float("nan"),
                     sets_mod.descent_rate(m, x)])
    out.mkdir(parents=True, exist_ok=True)
    coord_cols = [f"x{j}" for j in range(region.dim)]
    _write_csv(out / "shrinkrate.csv",
               [*coord_cols, "k", "dk", "grad_norm", "theoretical", "empirical",
                "ratio", "descent_rate"], rows)
    _write_json(out / "config.json", _config_payload(
        command="shrinkrate", function=function, tau=tau, p=p, grid=grid, mc=mc,
        seed=seed, k=k, dk=dk, grad_min=grad_min, mesh_resolution=mesh_res))
    click.echo(f"{len(rows)} boundary samples written to {out}")


@main.command("useq")
@common_options
@click.option("--resolution", type=int, default=None,
              help="mesh resolution per axis (default 65536 in 1-d, 1024 in 2-d)")
@click.option("--max-iter", type=int, default=64, show_default=True)
@click.option("--rel-tol", type=float, default=1e-6, show_default=True)
def useq_cmd(function, tau, p, grid, mc, seed, out, resolution, max_iter, rel_tol):
    """Run the shrinking-average optimizer and write the iteration trace."""
    obj, region, _, _ = _resolve(function, tau, p, grid, mc, seed)
    res = resolution or (2 ** 16 if region.dim == 1 else 1024)
    states, fstar = useq_mod.useq_run(obj, region, res, max_iter=max_iter,
                                      rel_tol=rel_tol)
    rows = [[s.iteration, s.threshold, s.measure, s.node_count, s.best_value]
            for s in states]
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "useq.csv",
               ["iteration", "threshold", "measure", "node_count", "best_value"], rows)
    _write_json(out / "config.json", _config_payload(
        command="useq", function=function, resolution=res, max_iter=max_iter,
        rel_tol=rel_tol))
    click.echo(f"fstar_estimate={_fmt(fstar)} ({len(states)} states)")


@main.command()
def catalog():
    """List the registered functions with dimensions and default boxes."""
    for name in catalog_names():
        if name == "const<c>":
            click.echo("const<c>: dim 1, box [0, 1], constant value c")
            continue
        obj, region = catalog_get(name)
        bounds = ", ".join(f"[{lo:g}, {hi:g}]"
                           for lo, hi in zip(region.lower, region.upper))
        click.echo(f"{name}: dim {obj.dim}, box {bounds}")


if __name__ == "__main__":
    main()
