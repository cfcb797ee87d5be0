"""conefield command line: fundamental, solve, verify, sweep.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import itertools
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ConefieldError, DomainError, PoleConfig
from .radial import RadialSource, phi, phi_grad_mag, radial_dirichlet
from .solver import SolverConfig, solve_dirac_ladder
from .verify import (default_residue_radii, farfield_fit, residue, verify_radial,
                     verify_solution)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NONCONV = 0, 1, 2, 3
FIELD_HEADER = ["x", "y", "u", "ux", "uy", "gradnorm"]
RADIAL_HEADER = ["r", "u"]
SWEEP_KEYS = ("alpha", "R", "h", "h_div", "refine_factor")

log = logging.getLogger("conefield")


@dataclass
class RunConfig:
    mode: str = "solve"
    dim: int = 2
    poles: list = field(default_factory=list)  # [{"point": [x, y], "weight": a}]
    R0: float = 1.0
    R: float = 4.0
    mesh: dict = field(default_factory=lambda: {"h": None, "refine_factor": 8.0})
    solver: dict = field(default_factory=dict)
    out_dir: str = "out"
    seed: int = 0

    MODES = ("fundamental", "solve", "verify", "sweep")

    def __post_init__(self):
        if self.mode not in self.MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        self.mesh = {"h": None, "refine_factor": 8.0, **self.mesh}
        unknown = set(self.mesh) - {"h", "refine_factor"}
        if unknown:
            raise DomainError(f"unknown mesh keys {sorted(unknown)}")
        self.poles = [{"point": [float(c) for c in p["point"]], "weight": float(p["weight"])}
                      for p in self.poles]
        self.pole_config()
        self.solver_config()
        if not self.R > self.R0:
            raise DomainError(f"R={self.R} must exceed R0={self.R0}")
        if self.mesh["h"] is not None and not 0 < self.mesh["h"] < self.R:
            raise DomainError("mesh h must lie in (0, R)")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**d)
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def replace(self, **kw) -> "RunConfig":
        return RunConfig.from_dict({**self.to_dict(), **kw})

    def pole_config(self) -> PoleConfig:
        return PoleConfig(self.dim, [(p["point"], p["weight"]) for p in self.poles], self.R0)

    def solver_config(self) -> SolverConfig:
        try:
            return SolverConfig(**self.solver)
        except TypeError as exc:
            raise DomainError(f"bad solver overrides: {exc}") from exc

    @property
    def h(self) -> float:
        return self.mesh["h"] if self.mesh["h"] is not None else self.R / 64


def _num(x) -> str:
    return "%.17g" % x


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _jsonable(x):
    return x if x is None or math.isfinite(x) else None


# ---------------------------------------------------------------- fundamental

def cmd_fundamental(args) -> int:
    if args.samples < 2:
        raise DomainError("samples must be at least 2")
    if not args.rmax > 0:
        raise DomainError("rmax must be positive")
    r = np.linspace(0.0, args.rmax, args.samples)
    vals = phi(args.dim, args.alpha, r)
    grads = phi_grad_mag(args.dim, args.alpha, r)
    rows = [(_num(a), _num(b), _num(c)) for a, b, c in zip(r, vals, grads)]
    _write_csv(Path(args.out), ["r", "phi", "grad_mag"], rows)
    return EXIT_OK


# ---------------------------------------------------------------- solve

def _radial_solve(run: RunConfig):
    cfg = run.pole_config()
    if len(cfg.poles) != 1 or np.any(cfg.points[0] != 0) or cfg.weights[0] <= 0:
        raise DomainError("N >= 3 runs support a single positive pole at the origin")
    a = float(cfg.weights[0])
    scfg = run.solver_config()
    prev, history, prof = None, [], None
    for n in scfg.ladder:
        prof = radial_dirichlet(cfg.dim, RadialSource.mollified(cfg.dim, a, n), run.R)
        delta = math.inf if prev is None else float(np.abs(prof.values - prev).max())
        history.append((n, delta))
        prev = prof.values
        tol = scfg.tol_ladder * max(1.0, float(np.abs(prof.values).max()))
        if delta <= tol:
            break
    return prof, history, history[-1][1] <= tol


def run_solve(run: RunConfig, out_dir: Path) -> tuple[dict, int]:
    cfg = run.pole_config()
    if cfg.dim.N >= 3:
        prof, history, converged = _radial_solve(run)
        _write_csv(out_dir / "field.csv", RADIAL_HEADER,
                   [(_num(r), _num(u)) for r, u in zip(prof.grid, prof.values)])
        summary = {"dim": cfg.dim.N, "converged": converged, "u0": float(prof.values[0]),
                   "ladder": [[n, _jsonable(d)] for n, d in history]}
    else:
        res = solve_dirac_ladder(cfg, run.R, run.solver_config(), h=run.h,
                                 refine_factor=run.mesh["refine_factor"])
        f = res.field
        g = f.nodal_gradient()
        rows = [tuple(_num(v) for v in (x, y, u, gx, gy, math.hypot(gx, gy)))
                for (x, y), u, (gx, gy) in zip(f.mesh.nodes, f.values, g)]
        _write_csv(out_dir / "field.csv", FIELD_HEADER, rows)
        radii = default_residue_radii(cfg, f.mesh)
        rsd = residue(f, radii)
        converged = bool(res.converged)
        summary = {"dim": 2, "converged": converged, "energy": res.energy,
                   "max_grad": res.max_grad, "iterations": res.iterations,
                   "nodes": int(len(f.mesh.nodes)),
                   "residue": rsd.mean, "residue_radii": radii.tolist(),
                   "residue_values": rsd.values,
                   "ladder": [[n, _jsonable(d)] for n, d in res.ladder_history]}
    summary["config"] = run.to_dict()
    _write_json(out_dir / "result.json", summary)
    return summary, EXIT_OK if converged else EXIT_NONCONV


def cmd_solve(args) -> int:
    run = _load(args)
    out = Path(args.out_dir or run.out_dir)
    _, code = run_solve(run, out)
    return code


# ---------------------------------------------------------------- verify

def run_verify(run: RunConfig):
    cfg = run.pole_config()
    if cfg.dim.N >= 3:
        return verify_radial(cfg, run.R)
    res = solve_dirac_ladder(cfg, run.R, run.solver_config(), h=run.h,
                             refine_factor=run.mesh["refine_factor"])
    return verify_solution(res, cfg, run.R)


def cmd_verify(args) -> int:
    run = _load(args)
    rep = run_verify(run)
    rep.meta["config"] = run.to_dict()
    text = rep.to_json() + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.all_passed else EXIT_VERIFY


# ---------------------------------------------------------------- sweep

def _grid_points(grid: dict):
    if not isinstance(grid, dict) or not grid:
        raise DomainError("grid must be a nonempty JSON object of parameter lists")
    for k, v in grid.items():
        if k not in SWEEP_KEYS:
            raise DomainError(f"unknown sweep parameter {k!r}; expected one of {SWEEP_KEYS}")
        if not isinstance(v, list) or not v:
            raise DomainError(f"sweep parameter {k!r} needs a nonempty list")
    keys = sorted(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, combo))


def _apply(run: RunConfig, point: dict) -> RunConfig:
    d = run.to_dict()
    if "alpha" in point:
        d["poles"] = [{**p, "weight": float(point["alpha"])} for p in d["poles"]]
    if "R" in point:
        d["R"] = float(point["R"])
    mesh = dict(d["mesh"])
    if "h" in point:
        mesh["h"] = float(point["h"])
    if "h_div" in point:
        mesh["h"] = d["R"] / float(point["h_div"])
    if "refine_factor" in point:
        mesh["refine_factor"] = float(point["refine_factor"])
    d["mesh"] = mesh
    return RunConfig.from_dict(d)


SWEEP_COLUMNS = ["index", "params", "converged", "energy", "residue", "farfield",
                 "heights", "oracle_error", "all_pass", "failed_checks", "error"]


def _sweep_row(i: int, point: dict, base: RunConfig) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row["index"] = i
    row["params"] = json.dumps(point, sort_keys=True)
    try:
        run = _apply(base, point)
        cfg = run.pole_config()
        if cfg.dim.N >= 3:
            rep = verify_radial(cfg, run.R)
            row.update(converged=True, all_pass=rep.all_passed)
        else:
            res = solve_dirac_ladder(cfg, run.R, run.solver_config(), h=run.h,
                                     refine_factor=run.mesh["refine_factor"])
            rep = verify_solution(res, cfg, run.R)
            f = res.field
            rsd = residue(f, default_residue_radii(cfg, f.mesh))
            outer = run.R - 2 * f.mesh.h
            ff = farfield_fit(f, 2, (outer - 0.25 * run.R, outer))
            row.update(converged=bool(res.converged), energy=_num(res.energy),
                       residue=_num(rsd.mean), farfield=_num(ff.coefficient),
                       heights=";".join(_num(v) for v in rep.meta["heights"]),
                       all_pass=rep.all_passed)
            if len(cfg.poles) == 1 and np.all(cfg.points[0] == 0):
                x = f.mesh.nodes
                r = np.linalg.norm(x, axis=1)
                a = float(cfg.weights[0])
                exact = phi(2, a, r) - phi(2, a, run.R)
                sel = r >= 0.1 * run.R
                row["oracle_error"] = _num(np.abs(f.values - exact)[sel].max() / np.abs(f.values).max())
        row["failed_checks"] = ";".join(c.name for c in rep.checks if c.passed is False)
    except (ConefieldError, ArithmeticError, np.linalg.LinAlgError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["all_pass"] = False
    return row


def cmd_sweep(args) -> int:
    run = _load(args)
    try:
        grid = json.loads(Path(args.grid).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read grid {args.grid}: {exc}") from exc
    points = list(_grid_points(grid))
    rows = [_sweep_row(i, p, run) for i, p in enumerate(points)]
    out = Path(args.out) if args.out else Path(run.out_dir) / "sweep.csv"
    _write_csv(out, SWEEP_COLUMNS, [[r[k] for k in SWEEP_COLUMNS] for r in rows])
    return EXIT_OK


# ---------------------------------------------------------------- main

def _parse_override(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise DomainError(f"override {text!r} must look like KEY=JSON")
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def _load(args) -> RunConfig:
    run = RunConfig.load(args.config)
    if args.set:
        run = run.replace(**dict(_parse_override(s) for s in args.set))
    return run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conefield", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fundamental", help="tabulate the radial fundamental solution")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fundamental)

    def with_config(p):
        p.add_argument("--config", required=True)
        p.add_argument("--set", action="append", metavar="KEY=JSON",
                       help="override a top-level config key")
        return p

    p = with_config(sub.add_parser("solve", help="solve a pole configuration"))
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_solve)

    p = with_config(sub.add_parser("verify", help="run the verification battery"))
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=cmd_verify)

    p = with_config(sub.add_parser("sweep", help="run a parameter grid"))
    p.add_argument("--grid", required=True)
    p.add_argument("--out", help="CSV path (default: <out_dir>/sweep.csv)")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConefieldError as exc:
        print(f"conefield: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
