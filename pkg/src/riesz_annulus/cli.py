"""Command-line interface.

Usage:
    riesz-annulus solve --b 1.3 --out run/       # minimizer, result.json + density.csv
    riesz-annulus iba --s 0.7                    # iterated balayage trace
    riesz-annulus scan-f --s 0.7 --grid 0.45:0.99:28
    riesz-annulus figures fig2 --out figs/
    riesz-annulus particles --b 1.3 --N 400 --seed 0

Every run writes ``manifest.json`` next to its outputs with the command,
all parameter values, the library version, the active kernel backend and
SHA-256 checksums of the files.  Exit codes: 0 success, 1 verification
failure, 2 usage error.
"""
from __future__ import annotations

import configparser
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import __version__, _kernels
from .balayage import SolveConfig, min_smooth_factor, residual, solve_mu_lambda
from .exceptions import ConsistencyError, DomainError, SolverError
from .iba import (
    F_of_lambda,
    assemble_minimizer,
    find_lambda_star,
    gap_inflection,
    gap_sign_change,
    run_iba,
    verify_euler_lagrange,
)
from .measures import field_V, original_potential, total_mass
from .oracle import ParticleSystem, descend, discrete_energy, empirical_support, energy_gradient, initial_positions, random_positions

MANIFEST = "manifest.json"
KEY_ALIASES = {"n": "n_particles", "max-iter": "max_iter"}


# ---------------------------------------------------------------------------
# configuration and output helpers


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` and ``;`` start comments; keys are case-insensitive."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    text = Path(path).read_text()
    try:
        parser.read_string("[run]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise click.UsageError(f"cannot parse config file {path}: {exc}")
    return {KEY_ALIASES.get(k, k.replace("-", "_")): v for k, v in parser["run"].items()}


def _default_map(group: click.Group, values: dict) -> dict:
    known = set()
    out = {}
    for name, cmd in group.commands.items():
        names = {p.name for p in cmd.params}
        known |= names
        out[name] = {k: v for k, v in values.items() if k in names}
    unknown = sorted(set(values) - known)
    if unknown:
        raise click.UsageError(f"unknown config keys: {', '.join(unknown)}")
    return out


def _threads() -> int:
    raw = os.environ.get("RIESZ_ANNULUS_THREADS", "").strip()
    if not raw:
        return 1
    try:
        count = max(1, int(raw))
    except ValueError:
        raise click.UsageError(f"RIESZ_ANNULUS_THREADS must be an integer, got {raw!r}")
    _kernels.set_threads(count)
    return count


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _schema(name: str) -> dict:
    return json.loads(resources.files("riesz_annulus").joinpath("schemas", name).read_text())


def write_json(path: Path, payload: dict, schema: str | None = None) -> None:
    payload = _clean(payload)
    if schema:
        jsonschema.validate(payload, _schema(schema))
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: Path, header: list, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch else _dt.datetime.now(_dt.timezone.utc)
    return when.replace(microsecond=0).isoformat()


def write_manifest(out: Path, command: str, params: dict, files: list) -> None:
    sums = {f: hashlib.sha256((out / f).read_bytes()).hexdigest() for f in files}
    payload = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "backend": _kernels.BACKEND,
        "timestamp": _timestamp(),
        "outputs": sums,
    }
    write_json(out / MANIFEST, payload, "manifest.schema.json")


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _solve_config(nodes: int) -> SolveConfig:
    try:
        return SolveConfig(n_nodes=nodes)
    except DomainError as exc:
        raise click.BadParameter(str(exc), param_hint="--nodes")


def _check_b(ctx, param, value):
    if value is not None and not 1.0 < value < 2.0:
        raise click.BadParameter(f"b must lie in (1, 2), got {value}")
    return value


def _check_s(ctx, param, value):
    if value is not None and not 0.0 < value < 1.0:
        raise click.BadParameter(f"s must lie in (0, 1), got {value}")
    return value


def parse_grid(spec: str) -> np.ndarray:
    """``a:b:n`` -> ``n`` equispaced values from ``a`` to ``b`` inclusive."""
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise click.BadParameter(f"expected a:b:n, got {spec!r}", param_hint="--grid")
    if n < 1 or not (0.0 < min(a, b) and max(a, b) < 1.0):
        raise click.BadParameter("grid must have n >= 1 and lie inside (0, 1)", param_hint="--grid")
    return np.linspace(a, b, n)


def _fail(msg: str) -> None:
    click.echo(f"verification failed: {msg}", err=True)
    sys.exit(1)


def _summary(out: Path, name: str, command: str, params: dict, values: dict, files: list) -> None:
    payload = {"command": command, "version": __version__, "manifest": MANIFEST,
               "parameters": params, "values": values, "files": files}
    write_json(out / name, payload, "summary.schema.json")


# ---------------------------------------------------------------------------
# commands

nodes_opt = click.option("--nodes", type=int, default=64, show_default=True, help="Gauss-Jacobi nodes per interval.")
tol_opt = click.option("--tol", type=float, default=1e-10, show_default=True,
                       help="Stop the iterated balayage once consecutive edges differ by less than this.")
iter_opt = click.option("--max-iter", "max_iter", type=int, default=200, show_default=True, help="Iteration cap for the balayage sequence.")
out_opt = click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True, help="Output directory.")


@click.group()
@click.version_option(__version__, prog_name="riesz-annulus")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="key = value file; flags override it.")
@click.pass_context
def main(ctx: click.Context, config: str | None) -> None:
    """Two-interval minimizers of attractive-repulsive energies with quartic confinement."""
    if config:
        ctx.default_map = _default_map(main, read_config(config))


@main.command()
@click.option("--b", type=float, required=True, callback=_check_b, help="Interaction exponent in (1, 2).")
@nodes_opt
@tol_opt
@iter_opt
@click.option("--grid", "points", type=int, default=1201, show_default=True, help="Points in density.csv.")
@out_opt
def solve(b, nodes, tol, max_iter, points, out):
    """Compute and verify the minimizer for exponent b."""
    out = _out_dir(out)
    _threads()
    cfg = _solve_config(nodes)
    s = 2.0 - b
    try:
        trace = run_iba(s, cfg, max_iter=max_iter, tol=tol)
        res = assemble_minimizer(b, cfg, trace)
    except (SolverError, ConsistencyError) as exc:
        _fail(str(exc))
    report = verify_euler_lagrange(res)
    rho = res.rho
    xs = np.linspace(-1.25 * res.R2, 1.25 * res.R2, points)
    on = rho.on_support(xs)
    smooth = np.full(xs.shape, math.nan)
    right = rho.right
    smooth[on] = right.smooth_series(np.abs(xs[on]))
    dens = rho.density(xs)
    rows = zip(xs, dens, smooth, original_potential(rho, xs), field_V(rho, xs))
    write_csv(out / "density.csv", ["x", "rho", "smooth_factor", "field_original", "field_V"], rows)
    result = {
        "command": "solve", "version": __version__, "manifest": MANIFEST,
        "b": b, "s": s, "lambda_inf": trace.lambda_inf, "lambda_star": res.lambda_star,
        "R1": res.R1, "R2": res.R2, "C0": res.C0, "mass": total_mass(rho),
        "iba_iterations": trace.iterations, "diagnostics": res.diagnostics, "verification": report,
    }
    write_json(out / "result.json", result, "result.schema.json")
    params = {"b": b, "nodes": nodes, "tol": tol, "max_iter": max_iter, "grid": points}
    write_manifest(out, "solve", params, ["result.json", "density.csv"])
    click.echo(f"b={b} lambda*={res.lambda_star:.6f} R1={res.R1:.6f} R2={res.R2:.6f} C0={res.C0:.8f}")
    if not report["passed"]:
        _fail(json.dumps(_clean(report), sort_keys=True))


@main.command()
@click.option("--s", type=float, required=True, callback=_check_s, help="Riesz exponent in (0, 1).")
@nodes_opt
@tol_opt
@iter_opt
@out_opt
def iba(s, nodes, tol, max_iter, out):
    """Trace the iterated balayage sequence lambda_j."""
    out = _out_dir(out)
    _threads()
    try:
        trace = run_iba(s, _solve_config(nodes), max_iter=max_iter, tol=tol)
    except (SolverError, ConsistencyError) as exc:
        _fail(str(exc))
    rows = ((j, lam, m, r) for j, (lam, m, r) in enumerate(zip(trace.lambdas, trace.min_smooth, trace.residuals)))
    write_csv(out / "iba_trace.csv", ["j", "lambda", "min_smooth_factor", "residual"], rows)
    values = {"lambda_inf": trace.lambda_inf, "lambda_last": trace.lambda_last, "iterations": trace.iterations,
              "converged": trace.converged, "edge_value": trace.edge_value}
    params = {"s": s, "nodes": nodes, "tol": tol, "max_iter": max_iter}
    _summary(out, "iba_summary.json", "iba", params, values, ["iba_trace.csv"])
    write_manifest(out, "iba", params, ["iba_trace.csv", "iba_summary.json"])
    click.echo(f"s={s} lambda_inf={trace.lambda_inf:.10f} after {trace.iterations} steps")


def _scan_row(lam: float, s: float, cfg: SolveConfig) -> tuple:
    mu = solve_mu_lambda(lam, s, cfg)
    return F_of_lambda(lam, s, cfg, mu), total_mass(mu), min_smooth_factor(mu)[0]


@main.command("scan-f")
@click.option("--s", type=float, required=True, callback=_check_s, help="Riesz exponent in (0, 1).")
@click.option("--grid", type=str, default="0.05:0.99:95", show_default=True, help="lambda grid a:b:n.")
@nodes_opt
@tol_opt
@iter_opt
@out_opt
def scan_f(s, grid, nodes, tol, max_iter, out):
    """Tabulate F(lambda) and mark lambda_inf and lambda_*."""
    lams = parse_grid(grid)
    out = _out_dir(out)
    workers = _threads()
    cfg = _solve_config(nodes)
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda lam: _scan_row(float(lam), s, cfg), lams))
        trace = run_iba(s, cfg, max_iter=max_iter, tol=tol)
        lam_star = find_lambda_star(s, cfg, trace)
        marks = [(trace.lambda_inf, "lambda_inf"), (lam_star, "lambda_star")]
        marked = [(lam, _scan_row(lam, s, cfg), tag) for lam, tag in marks]
    except (SolverError, ConsistencyError) as exc:
        _fail(str(exc))
    rows = [(lam, *v, "") for lam, v in zip(lams, values)] + [(lam, *v, tag) for lam, v, tag in marked]
    write_csv(out / "F_scan.csv", ["lambda", "F", "mass", "min_smooth_factor", "mark"], rows)
    params = {"s": s, "grid": grid, "nodes": nodes, "tol": tol, "max_iter": max_iter}
    _summary(out, "F_scan_summary.json", "scan-f", params,
             {"lambda_inf": trace.lambda_inf, "lambda_star": lam_star}, ["F_scan.csv"])
    write_manifest(out, "scan-f", params, ["F_scan.csv", "F_scan_summary.json"])
    click.echo(f"s={s} lambda_inf={trace.lambda_inf:.6f} lambda*={lam_star:.6f}")


FIG2_ROWS = ((0.7, 1.0), (0.3, 0.1))


def _fig1(out: Path, b: float, cfg: SolveConfig, points: int) -> tuple[list, dict]:
    res = assemble_minimizer(b, cfg)
    xs = np.linspace(0.0, 1.2, points)
    field = original_potential(res.rho, xs)
    write_csv(out / "fig1.csv", ["x", "rho", "adjusted_field"], zip(xs, res.rho.density(xs), 50.0 * (field + 0.6)))
    meta = {"b": b, "R1": res.R1, "R2": res.R2, "C0": res.C0, "adjusted_C0": 50.0 * (res.C0 + 0.6),
            "transform": "50*(field+0.6)"}
    return ["fig1.csv"], meta


def _fig2(out: Path, cfg: SolveConfig, points: int) -> tuple[list, dict]:
    rows, panels = [], []
    worst = 0.0
    for s, scale in FIG2_ROWS:
        trace = run_iba(s, cfg)
        lam_star = find_lambda_star(s, cfg, trace)
        for label, lam in (("0.2", 0.2), ("lambda_inf", trace.lambda_inf), ("lambda_star", lam_star)):
            mu = solve_mu_lambda(lam, s, cfg)
            xs = np.linspace(0.0, 1.2, points)
            v = field_V(mu, xs)
            for x, m, vv in zip(xs, scale * mu.density(xs), v):
                rows.append((s, label, lam, scale, x, m, vv))
            worst = max(worst, residual(mu))
            panel = {"s": s, "label": label, "lambda": lam, "mu_scale": scale}
            if label != "0.2":
                panel["y"] = gap_inflection(mu)[0]
            if label == "lambda_star":
                panel["z"] = gap_sign_change(mu)[0]
            panels.append(panel)
    write_csv(out / "fig2.csv", ["s", "label", "lambda", "mu_scale", "x", "mu_scaled", "V"], rows)
    return ["fig2.csv"], {"panels": panels, "max_support_residual": worst}


@main.command()
@click.argument("which", type=click.Choice(["fig1", "fig2"]))
@click.option("--b", type=float, default=1.3, show_default=True, callback=_check_b, help="Exponent for fig1.")
@click.option("--grid", "points", type=int, default=1201, show_default=True, help="Points per curve.")
@nodes_opt
@out_opt
def figures(which, b, points, nodes, out):
    """Write the data behind the density/potential figure (fig1) or the mu_lambda panels (fig2)."""
    out = _out_dir(out)
    _threads()
    cfg = _solve_config(nodes)
    try:
        files, meta = _fig1(out, b, cfg, points) if which == "fig1" else _fig2(out, cfg, points)
    except (SolverError, ConsistencyError) as exc:
        _fail(str(exc))
    params = {"which": which, "b": b, "grid": points, "nodes": nodes}
    name = f"{which}_meta.json"
    _summary(out, name, "figures", params, meta, files)
    write_manifest(out, "figures", params, files + [name])
    if which == "fig2" and meta["max_support_residual"] > 1e-8:
        _fail(f"V does not vanish on the support (max {meta['max_support_residual']:.3e})")
    click.echo(f"wrote {', '.join(files)}")


@main.command()
@click.option("--b", type=float, required=True, help="Interaction exponent in (1, 2].")
@click.option("--N", "n_particles", type=int, default=400, show_default=True, help="Number of particles.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random or jittered starts.")
@click.option("--init", "init", type=click.Choice(["equispaced", "random"]), default="equispaced", show_default=True)
@click.option("--jitter", type=float, default=0.0, show_default=True, help="Jitter as a fraction of the spacing.")
@click.option("--iters", type=int, default=5000, show_default=True, help="Descent step cap.")
@out_opt
def particles(b, n_particles, seed, init, jitter, iters, out):
    """Minimize the discrete N-particle energy by gradient descent."""
    if not 1.0 < b <= 2.0:
        raise click.BadParameter(f"b must lie in (1, 2], got {b}", param_hint="--b")
    if n_particles < 2:
        raise click.BadParameter("need at least two particles", param_hint="--N")
    out = _out_dir(out)
    _threads()
    x0 = random_positions(n_particles, seed) if init == "random" else initial_positions(n_particles, seed, jitter)
    ps = descend(ParticleSystem(x0, b, seed=seed), iters)
    write_csv(out / "particles.csv", ["i", "x"], enumerate(ps.positions))
    inner, outer = empirical_support(ps.positions)
    values = {"inner": inner, "outer": outer, "energy": discrete_energy(ps), "iterations": ps.iterations,
              "max_gradient": float(np.max(np.abs(energy_gradient(ps.positions, b))))}
    params = {"b": b, "N": n_particles, "seed": seed, "init": init, "jitter": jitter, "iters": iters}
    _summary(out, "particles_summary.json", "particles", params, values, ["particles.csv"])
    write_manifest(out, "particles", params, ["particles.csv", "particles_summary.json"])
    click.echo(f"b={b} N={n_particles} support=[{inner:.6f}, {outer:.6f}] energy={values['energy']:.12f}")


if __name__ == "__main__":  # pragma: no cover
    main()
