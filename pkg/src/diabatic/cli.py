"""Command-line front end: sweeps, synthesis, scaling fits and diagnostics.

Exit codes: 0 success, 1 threshold miss, 2 usage error, 3 numerical failure.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import io
from .errors import DomainError, NumericalError, UnknownGateError
from .gatemodel import error_scaling, fit_zn_form, gate_error
from .propagator import full_evolution_operator, half_passage_p
from .synthesis import (
    GATES,
    compose,
    controlled_x,
    embed,
    gate_recipe,
    synthesize,
    target_unitary,
)
from .trajectory import adiabaticity, eta, make_trajectory

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SWEEP_TARGETS = ("iX", "iZ", "T_sym", "iH")

# reference ε_v² coefficients, shown next to the fitted ones
REFERENCE_PREFACTORS = {"not": 40.0, "z": 4e3, "t": 2e5, "hadamard": 27.0}


def evaluate_point(model, settings, v, b) -> dict:
    """All sweep columns at one (v, b); failures give NaNs and a status."""
    row = {c: math.nan for c in io.SWEEP_COLUMNS}
    row.update(v=float(v), b=float(b), status="ok")
    try:
        traj = make_trajectory(v, b)
        u = full_evolution_operator(model, traj, settings)
        p_half = half_passage_p(model, traj, settings)
        row["transition_probability"] = float(abs(u[1, 0]) ** 2)
        row["half_passage_p"] = p_half
        row["eta"] = eta(model, traj)
        for name in SWEEP_TARGETS:
            row[f"d_max_{name}"] = gate_error(u, target_unitary(name).matrix).d_max
        zn = fit_zn_form(u, p_half)
        row.update(zn_p=zn.p, alpha00=zn.alpha00, alpha01=zn.alpha01)
    except (NumericalError, DomainError) as exc:
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def _workers(cfg):
    return cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)


def run_sweep(cfg: io.RunConfig, v_axis, b_axis, annotate=()) -> io.SweepTable:
    """Evaluate the grid with a bounded thread pool; rows stay in axis order."""
    model, settings = cfg.model(), cfg.settings()
    points = [(v, b) for v in v_axis for b in b_axis]
    with ThreadPoolExecutor(max_workers=_workers(cfg)) as pool:
        rows = list(pool.map(lambda pt: evaluate_point(model, settings, *pt), points))
    annotations = []
    for label, (v, b) in annotate:
        annotations.append({"label": label, **evaluate_point(model, settings, v, b)})
    return io.SweepTable(v_axis, b_axis, rows, annotations)


def _emit_table(table, cfg, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    if cfg.format == "csv":
        path = os.path.join(out_dir, f"{name}.csv")
        io.write_sweep_csv(table, path)
    else:
        path = os.path.join(out_dir, f"{name}.json")
        io.write_json(path, io.sweep_payload(table, cfg))
    return path


def _emit_report(payload, out_dir, name):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.json")
    io.write_json(path, payload)
    return path


def cmd_sweep_v(cfg, b=0.0, out_dir="."):
    table = run_sweep(cfg, cfg.v_grid(), np.array([float(b)]))
    return table, _emit_table(table, cfg, out_dir, f"sweep_v_b{b:g}")


def cmd_sweep_grid(cfg, out_dir="."):
    marks = [(name, GATES[name].point) for name in ("not", "z", "t", "hadamard")]
    table = run_sweep(cfg, cfg.v_grid(), cfg.b_grid(), annotate=marks)
    return table, _emit_table(table, cfg, out_dir, "sweep_grid")


def _search_for(recipe, cfg, grid):
    search = recipe.search
    if grid is not None:
        search = replace(search, nv=grid[0], nb=grid[1])
    return search


def synthesis_report(cfg, gate, grid=None) -> dict:
    recipe = gate_recipe(gate)
    target = target_unitary(recipe.target)
    res = synthesize(cfg.model(), target, _search_for(recipe, cfg, grid), cfg.settings(), _workers(cfg))
    report = {
        "gate": recipe.name,
        "target": recipe.target,
        "v_opt": res.v_opt,
        "b_opt": res.b_opt,
        "d_max": res.gate_error.d_max,
        "trace_bound": res.gate_error.trace_bound,
        "phase_invariant_infidelity": res.gate_error.phase_invariant_infidelity,
        "zn_form": res.zn,
        "unitary": res.unitary,
        "converged": res.converged,
        "search_trace": res.search_trace,
        "config": cfg,
    }
    if recipe.n_qubits > 1:
        emb = embed(res.unitary, recipe.n_qubits, recipe.coupled_pair)
        comp = emb.complement_indices()
        full = emb.full_unitary
        ideal = controlled_x(recipe.n_qubits)
        report.update(
            n_qubits=recipe.n_qubits,
            coupled_pair=recipe.coupled_pair,
            full_unitary=full,
            complement_identity=bool(np.array_equal(full[np.ix_(comp, comp)], np.eye(len(comp)))),
            d_max_vs_ideal=gate_error(full, ideal).d_max,
            d_max_vs_phased_block=gate_error(full, _phased_controlled(ideal, recipe)).d_max,
        )
    return report


def _phased_controlled(ideal, recipe):
    # the coupled block realises iX, so compare against the same phase
    out = ideal.astype(complex).copy()
    i, j = recipe.coupled_pair
    out[np.ix_([i, j], [i, j])] = target_unitary(recipe.target).matrix
    return out


def cmd_synthesize(cfg, gate, out_dir=".", grid=None):
    report = synthesis_report(cfg, gate, grid)
    path = _emit_report(report, out_dir, f"synthesize_{report['gate']}")
    return report, path


def _working_point(cfg, recipe, v, b, grid):
    if v is not None and b is not None:
        return float(v), float(b)
    res = synthesize(
        cfg.model(), target_unitary(recipe.target), _search_for(recipe, cfg, grid), cfg.settings(), _workers(cfg)
    )
    return (res.v_opt if v is None else float(v)), (res.b_opt if b is None else float(b))


def cmd_error_scaling(cfg, gate, axis="v", v=None, b=None, out_dir=".", grid=None):
    recipe = gate_recipe(gate)
    v0, b0 = _working_point(cfg, recipe, v, b, grid)
    fit = error_scaling(
        cfg.model(), v0, b0, target_unitary(recipe.target).matrix, axis=axis, settings=cfg.settings(),
        workers=_workers(cfg),
    )
    report = {
        "gate": recipe.name,
        "axis": axis,
        "v0": v0,
        "b0": b0,
        "eps": fit.eps,
        "d_max": fit.d_max,
        "baseline": fit.baseline,
        "slope": fit.exponent,
        "prefactor": fit.prefactor,
        "r_squared": fit.r_squared,
        "coefficients": fit.coefficients,
        "predicted_trace_prefactors": fit.predicted_prefactor,
        "reference_prefactor": REFERENCE_PREFACTORS.get(recipe.name),
        "config": cfg,
    }
    return report, _emit_report(report, out_dir, f"error_scaling_{recipe.name}_{axis}")


def cmd_adiabaticity(cfg, v, b, out_dir="."):
    rep = adiabaticity(cfg.model(), make_trajectory(v, b))
    report = {"v": float(v), "b": float(b), **io.to_jsonable(rep), "regime": rep.regime, "config": cfg}
    return report, _emit_report(report, out_dir, f"adiabaticity_v{v:g}_b{b:g}")


def gate_report(cfg, gate, v, b) -> dict:
    recipe = gate_recipe(gate)
    model, settings = cfg.model(), cfg.settings()
    traj = make_trajectory(v, b)
    u = full_evolution_operator(model, traj, settings)
    err = gate_error(u, target_unitary(recipe.target).matrix)
    return {
        "gate": recipe.name,
        "target": recipe.target,
        "v": float(v),
        "b": float(b),
        "d_max": err.d_max,
        "trace_bound": err.trace_bound,
        "phase_invariant_infidelity": err.phase_invariant_infidelity,
        "zn_form": fit_zn_form(u, half_passage_p(model, traj, settings)),
        "unitary": u,
        "config": cfg,
    }


def cmd_report(cfg, gate, v, b, out_dir="."):
    report = gate_report(cfg, gate, v, b)
    return report, _emit_report(report, out_dir, f"report_{report['gate']}_v{v:g}_b{b:g}")


def cmd_compose(cfg, gates, out_dir=".", grid=None):
    """Synthesise each gate, multiply them (first listed acts first)."""
    parts = [synthesis_report(cfg, g, grid) for g in gates]
    for part in parts:
        if "n_qubits" in part:
            raise DomainError("compose works on single-qubit gates only")
    product = compose(p["unitary"] for p in parts)
    closeness = {
        name: gate_error(product, target_unitary(name).matrix).phase_invariant_infidelity
        for name in ("I", "X", "Y", "Z", "H", "T")
    }
    report = {
        "gates": [p["gate"] for p in parts],
        "points": [(p["v_opt"], p["b_opt"]) for p in parts],
        "product": product,
        "phase_invariant_infidelity": closeness,
        "closest": min(closeness, key=closeness.get),
        "config": cfg,
    }
    return report, _emit_report(report, out_dir, "compose_" + "_".join(report["gates"]))


def _grid_arg(text):
    try:
        nv, nb = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NVxNB, got {text!r}") from None
    if nv < 1 or nb < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return nv, nb


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--grid", type=_grid_arg, help="NVxNB grid density")
    common.add_argument("--threshold", type=float)
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="diabatic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep-v", parents=[common], help="probability and eta versus v at fixed b")
    p.add_argument("--b", type=float, default=0.0)
    sub.add_parser("sweep-grid", parents=[common], help="half-passage p over a (v, b) grid")
    p = sub.add_parser("synthesize", parents=[common], help="optimise (v, b) for a gate")
    p.add_argument("gate")
    p = sub.add_parser("error-scaling", parents=[common], help="fit d_max against parameter error")
    p.add_argument("gate")
    p.add_argument("--axis", choices=("v", "b"), default="v")
    p.add_argument("--v", type=float)
    p.add_argument("--b", type=float)
    p = sub.add_parser("adiabaticity", parents=[common], help="adiabaticity diagnostics at (v, b)")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p = sub.add_parser("report", parents=[common], help="gate error at a given (v, b)")
    p.add_argument("gate")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p = sub.add_parser("compose", parents=[common], help="synthesise and multiply gates")
    p.add_argument("gates", nargs="+")
    return parser


def _config_from_args(args) -> io.RunConfig:
    cfg = io.load_config(args.config) if args.config else io.RunConfig()
    over = {"format": args.format, "rel_tol": args.rel_tol, "abs_tol": args.abs_tol, "threshold": args.threshold,
            "workers": args.workers}
    if args.grid is not None and args.command in ("sweep-v", "sweep-grid"):
        over.update(nv=args.grid[0], nb=args.grid[1])
    return cfg.replace(**over)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config_from_args(args)
        out = io.resolve_out_dir(cfg, args.out)
        grid = args.grid
        cmd = args.command
        if cmd == "sweep-v":
            table, path = cmd_sweep_v(cfg, args.b, out)
            failed = sum(r["status"] != "ok" for r in table.rows)
            print(f"{len(table.rows)} rows ({failed} failed) -> {path}")
            return EXIT_OK
        if cmd == "sweep-grid":
            table, path = cmd_sweep_grid(cfg, out)
            failed = sum(r["status"] != "ok" for r in table.rows)
            print(f"{len(table.rows)} rows ({failed} failed) -> {path}")
            return EXIT_OK
        if cmd == "synthesize":
            rep, path = cmd_synthesize(cfg, args.gate, out, grid)
            print(f"{rep['gate']}: v={rep['v_opt']:.6f} b={rep['b_opt']:.6f} d_max={rep['d_max']:.3e} -> {path}")
            return EXIT_OK if rep["d_max"] <= cfg.threshold else EXIT_THRESHOLD
        if cmd == "error-scaling":
            rep, path = cmd_error_scaling(cfg, args.gate, args.axis, args.v, args.b, out, grid)
            print(f"{rep['gate']} ({args.axis}): slope={rep['slope']:.3f} prefactor={rep['prefactor']:.4g} -> {path}")
            return EXIT_OK
        if cmd == "adiabaticity":
            rep, path = cmd_adiabaticity(cfg, args.v, args.b, out)
            print(f"xi={rep['massey_xi']:.4g} ({rep['regime']}) -> {path}")
            return EXIT_OK
        if cmd == "report":
            rep, path = cmd_report(cfg, args.gate, args.v, args.b, out)
            print(f"{rep['gate']}: d_max={rep['d_max']:.3e} -> {path}")
            return EXIT_OK if rep["d_max"] <= cfg.threshold else EXIT_THRESHOLD
        if cmd == "compose":
            rep, path = cmd_compose(cfg, args.gates, out, grid)
            print(f"closest to {rep['closest']} -> {path}")
            return EXIT_OK
    except (UnknownGateError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
