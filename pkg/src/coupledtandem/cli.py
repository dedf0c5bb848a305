"""Command-line front end.

Commands (all write CSV with a header row, except ``stability``):

  stability     verdict, loads, empty probability, mode probabilities
  metrics       means by one method
                  psa:    p,M,EQ1,EQ2,v_m1_0..v_m1_M,v_m2_0..v_m2_M
                  sim:    metric,mean,ci_low,ci_high
                  others: method,p,M_or_N,EQ1,EQ2,status
  compare       every applicable method, with errors relative to the CTMC:
                  method,M_or_N,EQ1,EQ2,rel_err_EQ1,rel_err_EQ2,status
  sweep         sweep_var,value,method,M_or_N,EQ1,EQ2,status
  contour-dump  phi,re_y,im_y,rho,x_preimage
  map-dump      phi,psi,re_y,im_y

Exit codes: 0 ok, 1 unstable, 2 usage or config error, 3 numerical failure.
The worker count for sweeps is read from COUPLEDTANDEM_WORKERS (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .model import REFERENCE_PARAMS, ModelParams, UnstableError, load_profile, mode_probabilities, stability_check

EXIT_OK, EXIT_UNSTABLE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
METHODS = ("psa", "bvp", "ctmc", "sim", "closed")
SWEEP_VARS = ("p", "gamma", "tau", "lambda0", "lambda1")
WORKERS_ENV = "COUPLEDTANDEM_WORKERS"

log = logging.getLogger("coupledtandem")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "p"
    start: float = 0.05
    stop: float = 0.95
    steps: int = 19
    methods: tuple[str, ...] = ("psa", "ctmc")
    M_values: tuple[int, ...] = (0, 1, 2, 3, 4)
    grid: tuple[tuple[str, tuple[float, ...]], ...] = ()

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = REFERENCE_PARAMS
    method: str = "psa"
    M: int = 5
    N: int = 200
    n_grid: int = 512
    n_contour: int = 256
    seed: int = 0
    horizon: float = 2e4
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: str | None = None


_OPTION_KEYS = {"method", "M", "N", "n_grid", "n_contour", "seed", "horizon", "output"}
_SWEEP_KEYS = {"variable", "from", "to", "steps", "methods", "M_values", "grid"}


def _parse_sweep(data) -> SweepSpec:
    if not isinstance(data, dict):
        raise ConfigError("'sweep' must be an object")
    unknown = set(data) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    base = SweepSpec()
    grid = data.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("'sweep.grid' must map a parameter name to a list of values")
    return SweepSpec(
        variable=data.get("variable", base.variable),
        start=float(data.get("from", base.start)),
        stop=float(data.get("to", base.stop)),
        steps=int(data.get("steps", base.steps)),
        methods=tuple(data.get("methods", base.methods)),
        M_values=tuple(int(m) for m in data.get("M_values", base.M_values)),
        grid=tuple((k, tuple(float(v) for v in vs)) for k, vs in sorted(grid.items())),
    )


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse and schema-check a JSON config into keyword overrides for :class:`RunConfig`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(data) - _OPTION_KEYS - {"params", "sweep"}
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    out = {}
    if "params" in data:
        if not isinstance(data["params"], dict):
            raise ConfigError(f"{source}: 'params' must be an object")
        merged = {**REFERENCE_PARAMS.to_dict(), **data["params"]}
        try:
            out["params"] = ModelParams.from_dict(merged)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: params: {exc}") from None
    if "sweep" in data:
        try:
            out["sweep"] = _parse_sweep(data["sweep"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: sweep: {exc}") from None
    for k in _OPTION_KEYS & set(data):
        out[k] = data[k]
    return out


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {cfg.method!r}")
    for name in ("M", "N", "n_grid", "n_contour", "seed"):
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
    if not isinstance(cfg.horizon, (int, float)) or cfg.horizon <= 0:
        raise ConfigError(f"horizon must be positive, got {cfg.horizon!r}")
    sw = cfg.sweep
    if sw.variable not in SWEEP_VARS:
        raise ConfigError(f"sweep variable must be one of {SWEEP_VARS}, got {sw.variable!r}")
    if sw.steps < 1:
        raise ConfigError("sweep steps must be at least 1")
    bad = [m for m in sw.methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown sweep methods {bad}")
    for name, _ in sw.grid:
        if name not in SWEEP_VARS or name == sw.variable:
            raise ConfigError(f"sweep grid variable {name!r} must be another of {SWEEP_VARS}")
    return cfg


def build_config(args: argparse.Namespace) -> RunConfig:
    kw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        kw = parse_config(text, args.config)
    params = kw.pop("params", REFERENCE_PARAMS)
    changes = {f.name: getattr(args, f.name) for f in fields(ModelParams) if getattr(args, f.name) is not None}
    if changes:
        try:
            params = params.with_(**changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    kw["params"] = params
    for name in ("method", "M", "N", "n_grid", "n_contour", "seed", "horizon", "output"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    sweep = kw.pop("sweep", SweepSpec())
    overrides = {}
    for flag, key in (("sweep_var", "variable"), ("sweep_from", "start"), ("sweep_to", "stop"),
                      ("sweep_steps", "steps")):
        v = getattr(args, flag, None)
        if v is not None:
            overrides[key] = v
    if getattr(args, "sweep_methods", None):
        overrides["methods"] = tuple(args.sweep_methods.split(","))
    if getattr(args, "M_values", None):
        overrides["M_values"] = tuple(int(m) for m in args.M_values.split(","))
    if getattr(args, "grid", None):
        name, _, vals = args.grid.partition("=")
        try:
            overrides["grid"] = ((name, tuple(float(v) for v in vals.split(","))),)
        except ValueError:
            raise ConfigError(f"--grid expects NAME=v1,v2,..., got {args.grid!r}") from None
    if overrides:
        sweep = SweepSpec(**{**sweep.__dict__, **overrides})
    kw["sweep"] = sweep
    try:
        return _validate(RunConfig(**kw))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# method dispatch


def _endpoint(p: float) -> str | None:
    return "p0" if p == 0 else "p1" if p == 1 else None


def run_method(method: str, params: ModelParams, cfg: RunConfig, M: int | None = None) -> tuple[str, float, float]:
    """``(M_or_N, EQ1, EQ2)`` for one method; raises on instability or numerical failure."""
    if method == "psa":
        from .psa import psa_metrics
        m = cfg.M if M is None else M
        r = psa_metrics(params, m)
        return str(m), r.EQ1, r.EQ2
    if method == "bvp":
        from .bvp import bvp_metrics, bvp_solve
        return str(cfg.n_grid), *bvp_metrics(bvp_solve(params, cfg.n_grid))
    if method == "ctmc":
        from .oracle import oracle_metrics, solve
        t = solve(params, cfg.N)
        o = oracle_metrics(t)
        return str(t.N), o.EQ1, o.EQ2
    if method == "sim":
        from .oracle import simulate
        s = simulate(params, cfg.horizon, cfg.seed)
        return str(cfg.seed), s.EQ1.mean, s.EQ2.mean
    if method == "closed":
        from .closedform import closedform_metrics
        which = _endpoint(params.p)
        if which is None:
            raise ConfigError("the closed forms exist only at p = 0 and p = 1")
        return which, *closedform_metrics(which, params)
    raise ConfigError(f"unknown method {method!r}")


def _redirect(method: str, p: float) -> bool:
    return method in ("psa", "bvp") and _endpoint(p) is not None


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return repr(float(v))


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def cmd_stability(cfg: RunConfig) -> int:
    q = cfg.params
    stable, slack = stability_check(q)
    lp = load_profile(q)
    m0, m1 = mode_probabilities(q)
    lines = [
        f"stable: {'yes' if stable else 'no'}",
        f"margin: {lp.margin!r}",
        f"margin_over_tau: {slack!r}",
        f"rho0: {lp.rho0!r}",
        f"rho1: {lp.rho1!r}",
        f"mode_probabilities: {m0!r} {m1!r}",
    ]
    if stable:
        lines.append(f"pi0_00: {m0 * slack!r}")
    _write(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if stable else EXIT_UNSTABLE


def cmd_metrics(cfg: RunConfig) -> int:
    q = cfg.params
    method = cfg.method
    if _redirect(method, q.p):
        print(f"notice: {method} does not apply at p={q.p:g}; using the closed form", file=sys.stderr)
        method = "closed"
    if method == "psa":
        from .psa import psa_metrics
        _write(cfg, psa_metrics(q, cfg.M).to_csv())
    elif method == "sim":
        from .oracle import simulate
        _write(cfg, simulate(q, cfg.horizon, cfg.seed).to_csv())
    else:
        setting, e1, e2 = run_method(method, q, cfg)
        _write(cfg, _csv([["method", "p", "M_or_N", "EQ1", "EQ2", "status"],
                          [method, _fmt(q.p), setting, _fmt(e1), _fmt(e2), "ok"]]))
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    q = cfg.params
    _, r1, r2 = run_method("ctmc", q, cfg)
    rows = [["method", "M_or_N", "EQ1", "EQ2", "rel_err_EQ1", "rel_err_EQ2", "status"]]
    methods = ["closed"] if _endpoint(q.p) else []
    methods += ["psa", "bvp", "ctmc"]
    for method in methods:
        if _redirect(method, q.p):
            rows.append([method, "", "", "", "", "", "redirected:closed"])
            continue
        setting, e1, e2 = run_method(method, q, cfg)
        rows.append([method, setting, _fmt(e1), _fmt(e2), _fmt((e1 - r1) / r1), _fmt((e2 - r2) / r2), "ok"])
    _write(cfg, _csv(rows))
    return EXIT_OK


def _sweep_point(task):
    label, value, params, method, M, cfg = task
    if _redirect(method, params.p):
        return [label, _fmt(value), method, "" if M is None else str(M), "", "", "redirected:closed"]
    try:
        setting, e1, e2 = run_method(method, params, cfg, M)
        return [label, _fmt(value), method, setting, _fmt(e1), _fmt(e2), "ok"]
    except UnstableError:
        return [label, _fmt(value), method, "" if M is None else str(M), "", "", "unstable"]
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return [label, _fmt(value), method, "" if M is None else str(M), "", "", f"error:{type(exc).__name__}"]


def sweep_tasks(cfg: RunConfig):
    sw = cfg.sweep
    grids = [(None, None)]
    if sw.grid:
        name, vals = sw.grid[0]
        grids = [(name, v) for v in vals]
    tasks = []
    for gname, gval in grids:
        label = sw.variable if gname is None else f"{sw.variable}@{gname}={gval:g}"
        for value in sw.values():
            changes = {sw.variable: value}
            if gname is not None:
                changes[gname] = gval
            try:
                params = cfg.params.with_(**changes)
            except ValueError as exc:
                raise ConfigError(f"sweep point {changes}: {exc}") from None
            for method in sw.methods:
                for M in (sw.M_values if method == "psa" else (None,)):
                    tasks.append((label, value, params, method, M, cfg))
    return tasks


def cmd_sweep(cfg: RunConfig) -> int:
    tasks = sweep_tasks(cfg)
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_point, tasks))  # map keeps submission order
    else:
        rows = [_sweep_point(t) for t in tasks]
    _write(cfg, _csv([["sweep_var", "value", "method", "M_or_N", "EQ1", "EQ2", "status"]] + rows))
    return EXIT_OK


def cmd_contour_dump(cfg: RunConfig) -> int:
    from .kernel import contour_L
    _write(cfg, contour_L(cfg.params, cfg.n_contour).to_csv())
    return EXIT_OK


def cmd_map_dump(cfg: RunConfig) -> int:
    from .bvp import model_map
    _write(cfg, model_map(cfg.params, cfg.n_grid).to_csv())
    return EXIT_OK


COMMANDS = {
    "stability": cmd_stability,
    "metrics": cmd_metrics,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "contour-dump": cmd_contour_dump,
    "map-dump": cmd_map_dump,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="coupledtandem", description=__doc__.split("\n\n")[0],
        epilog=__doc__.split("\n\n", 1)[1], formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON config file; flags override it")
    grp = ap.add_argument_group("model parameters (default: lambda0=1 lambda1=0.5 nu1=4 nu2=5 gamma=2 tau=4 p=0.5)")
    for f in fields(ModelParams):
        grp.add_argument(f"--{f.name}", type=float)
    ap.add_argument("--method", choices=METHODS)
    ap.add_argument("--M", type=int, help="PSA truncation order")
    ap.add_argument("--N", type=int, help="CTMC truncation level")
    ap.add_argument("--n-grid", dest="n_grid", type=int, help="conformal-map grid size (power of two)")
    ap.add_argument("--n-contour", dest="n_contour", type=int, help="contour samples for contour-dump")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--horizon", type=float, help="simulated time")
    ap.add_argument("--output", "-o", help="write CSV here instead of stdout")
    sw = ap.add_argument_group("sweep")
    sw.add_argument("--sweep-var", choices=SWEEP_VARS)
    sw.add_argument("--from", dest="sweep_from", type=float)
    sw.add_argument("--to", dest="sweep_to", type=float)
    sw.add_argument("--steps", dest="sweep_steps", type=int)
    sw.add_argument("--methods", dest="sweep_methods", help="comma-separated, e.g. psa,ctmc")
    sw.add_argument("--M-values", dest="M_values", help="comma-separated PSA orders for sweeps")
    sw.add_argument("--grid", help="outer grid NAME=v1,v2,... (e.g. gamma=1,2,3)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnstableError as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
