"""Command-line driver: painleve, approx, solve and rates subcommands.

Configuration is a plain key=value file with # comments. Every run writes
manifest.txt into the output directory with the resolved configuration and
git-style blob hashes of the inputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__
from .analysis import (
    NormSpec,
    fit_rate,
    rate_study,
    residual_order_pairs,
    write_reports,
)
from .ansatz import build_hierarchies, residual
from .errors import ConfigError, DegenerateCase, InvalidRegime, TFGPError
from .gpe import SolveConfig, continuation_sweep, ground_state, uniform_grid, write_checkpoint
from .model import ModelParams, derive_params
from .painleve import correction_left_exponent, correction_right_exponent, hastings_mcleod, hm_series, painleve_correction

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
REFERENCE_LADDER = (0.1, 0.07, 0.05, 0.035, 0.025)


@dataclass(frozen=True)
class RunConfig:
    alpha0: float = 0.5
    alpha1: float = 1.0
    alpha2: float = 1.0
    R1: float = 1.0
    R2: float = math.sqrt(2.0)
    d: int = 1
    eps: tuple = REFERENCE_LADDER
    beta: float = 0.3
    M0: int = 0
    N0: int = 0
    L0: int = 0
    M: int = 1
    N: int = 3
    L: int = 1
    series_terms: int = 4
    points_per_layer: int = 100
    solver_tol: float = 1e-10
    init: str = "tf"
    rate_tol: float = 0.2
    delta: float = 0.05
    norms: tuple = ("L2", "Linf", "H1", "Linf@D0", "Linf@D1", "Linf@D2")
    checkpoint: bool = False
    out: str = "out"
    jobs: int = 1
    sources: tuple = field(default=(), compare=False)

    def params(self) -> ModelParams:
        try:
            return derive_params(self.alpha0, self.alpha1, self.alpha2, self.R1, self.R2, self.d)
        except (ValueError, InvalidRegime, DegenerateCase) as exc:
            raise ConfigError(f"invalid model parameters: {exc}") from exc

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            tol=self.solver_tol, init=self.init, beta=self.beta, points_per_layer=self.points_per_layer
        )

    def specs(self):
        return tuple(parse_norm(s) for s in self.norms)

    def validate(self):
        self.params()
        if not self.eps:
            raise ConfigError("empty eps ladder")
        if any(e <= 0 for e in self.eps):
            raise ConfigError("eps values must be positive")
        if any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ConfigError("eps ladder must be strictly decreasing")
        if not 0 < self.beta < 2.0 / 3.0:
            raise ConfigError("beta must lie in (0, 2/3)")
        if min(self.M0, self.N0, self.L0) < 0:
            raise ConfigError("orders must be nonnegative")
        if self.M < self.M0 or self.N < self.N0 or self.L < self.L0:
            raise ConfigError("internal truncations M, N, L must be at least M0, N0, L0")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        self.specs()
        self.solve_config()
        return self

    def resolved(self):
        out = []
        for f in fields(self):
            if f.name == "sources":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append(f"{f.name}={v}")
        return "\n".join(out) + "\n"


def parse_norm(text: str) -> NormSpec:
    """'L2', 'L4', 'Linf', 'H1' or 'H1w', optionally followed by @D0, @D1 or @D2."""
    name, _, region = text.strip().partition("@")
    region = region or "all"
    try:
        if name in ("Linf", "H1", "H1w"):
            return NormSpec(name, 2.0, region)
        if name.startswith("L"):
            return NormSpec("Lp", float(name[1:]), region)
    except ValueError as exc:
        raise ConfigError(f"bad norm {text!r}: {exc}") from exc
    raise ConfigError(f"bad norm {text!r}")


def _coerce(name, raw, default):
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if name == "eps":
                return tuple(float(s) for s in items)
            return tuple(items)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text, base: RunConfig = RunConfig()) -> RunConfig:
    known = {f.name: getattr(base, f.name) for f in fields(base) if f.name != "sources"}
    upd = {}
    for k, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"line {k}: expected key=value")
        if key not in known:
            raise ConfigError(f"line {k}: unknown key {key!r}")
        upd[key] = _coerce(key, val, known[key])
    return replace(base, **upd)


def blob_hash(data: bytes) -> str:
    """Content hash in the form git uses for blobs."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    cfg = parse_config_text(data.decode("utf-8"))
    return replace(cfg, sources=((str(path), blob_hash(data)),))


def write_manifest(cfg: RunConfig, command):
    text = cfg.resolved()
    lines = [
        f"# tfgp {__version__} {command}",
        f"config_hash={blob_hash(text.encode())}",
    ]
    lines += [f"input {path} {h}" for path, h in cfg.sources]
    with open(os.path.join(cfg.out, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n" + text)


def _csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _tag(eps):
    return f"{eps:g}"


# ---- subcommands ----


def cmd_painleve(cfg: RunConfig, check_tails=False):
    series = hm_series(cfg.series_terms)
    for n, a in enumerate(series.coeffs):
        print(f"a{n} = {a}")
    g0 = hastings_mcleod()
    g0.to_csv(os.path.join(cfg.out, "gamma0.csv"))
    print(f"gamma0(0) = {float(g0(np.array([0.0]))[0]):.10f}")
    gam = [g0]
    for n in range(1, cfg.L + 1):
        gam.append(painleve_correction(n, cfg.d, gam))
        gam[n].to_csv(os.path.join(cfg.out, f"gamma{n}.csv"))
    files = ["gamma0.csv"] + [f"gamma{n}.csv" for n in range(1, cfg.L + 1)]
    if check_tails:
        rows = tail_table(gam, cfg.d)
        print("n, side, fitted, predicted")
        for row in rows:
            print(f"{row[0]}, {row[1]}, {row[2]:.4f}, {row[3]:.4f}")
        _csv(os.path.join(cfg.out, "tails.csv"), ("n", "side", "fitted", "predicted"), rows)
        files.append("tails.csv")
    return files


def _slope_with_correction(a, logf, step):
    # fit log f = p log a + c + c1 a^-step and return p
    A = np.stack([np.log(a), np.ones_like(a), a**-step], axis=1)
    return float(np.linalg.lstsq(A, logf, rcond=None)[0][0])


def tail_table(gam, d, right=(20.0, 34.0), left=(-12.0, -10.0)):
    """Fitted tail exponents of gamma_n against the predicted ones.

    Right: slope of log|gamma_n| against log y on ``right``, with the y^-3
    correction fitted alongside. The window stays clear of the error layer
    at the pinned right end. Left: for gamma_0 the slope of
    log gamma_0 + |y|^(3/2)/3, for n >= 1 the slope of log|gamma_n/gamma_0|
    minus 1/4. The left corrections are of relative size d |y|^(-3/2) and
    larger for n >= 2 (gamma_n changes sign near |y| = 10 there), so on the
    default grid the left rows with n >= 1 are only indicative.
    """
    rows = []
    g0 = gam[0]
    for n, g in enumerate(gam):
        y, v = g.grid, g.values
        m = (y >= right[0]) & (y <= right[1])
        sr = _slope_with_correction(y[m], np.log(np.abs(v[m])), 3.0)
        pr = 0.5 if n == 0 else correction_right_exponent(n, d)
        rows.append((n, "right", sr, float(pr)))
        m = (y >= left[0]) & (y <= left[1])
        a = -y[m]
        if n == 0:
            sl = _slope_with_correction(a, np.log(v[m]) + a**1.5 / 3.0, 1.5)
        else:
            sl = float(np.polyfit(np.log(a), np.log(np.abs(v[m] / g0(y[m]))), 1)[0]) - 0.25
        rows.append((n, "left", sl, correction_left_exponent(n) if n else -0.25))
    return rows


def cmd_approx(cfg: RunConfig):
    p = cfg.params()
    sc = cfg.solve_config()
    hier = build_hierarchies(p, cfg.M, cfg.N, cfg.L)
    files = []
    for eps in cfg.eps:
        r = uniform_grid(p, eps, sc)
        st = hier.assemble(p, eps, cfg.beta, cfg.M0, cfg.N0, cfg.L0, r)
        name = f"approx_eps{_tag(eps)}.csv"
        st.to_csv(os.path.join(cfg.out, name))
        r1, r2 = residual(p, eps, st)
        rname = f"residual_eps{_tag(eps)}.csv"
        _csv(os.path.join(cfg.out, rname), ("r", "res1", "res2"), zip(r, r1, r2))
        files += [name, rname]
    rows = []
    if len(cfg.eps) >= 3:
        checks = (
            ("outer", cfg.M, "D0", 1, hier.outer, (2 - 3 * cfg.beta) * cfg.M + 2 - 1.5 * cfg.beta),
            ("far", cfg.L, "D2", 2, hier.mu, 2 * cfg.L / 3 + 5.0 / 3.0),
        )
        for piece, order, region, comp, h, pred in checks:
            pairs = residual_order_pairs(p, cfg.eps, cfg.beta, piece, order, h, region, comp)
            slope, r2 = fit_rate(pairs)
            rows.append((piece, order, region, comp, slope, r2, pred))
            print(f"residual order {piece} order {order} on {region}, component {comp}: "
                  f"slope {slope:.3f} (R^2 {r2:.4f}), predicted {pred:.3f}")
        _csv(os.path.join(cfg.out, "residual_orders.csv"),
             ("piece", "order", "region", "component", "slope", "r2", "predicted"), rows)
        files.append("residual_orders.csv")
    return files


def cmd_solve(cfg: RunConfig):
    p = cfg.params()
    sc = cfg.solve_config()
    states = continuation_sweep(p, cfg.eps, None, sc)
    files, rows = [], []
    for eps, gs in zip(cfg.eps, states):
        name = f"solution_eps{_tag(eps)}.csv"
        gs.to_csv(os.path.join(cfg.out, name))
        files.append(name)
        if cfg.checkpoint:
            ck = f"solution_eps{_tag(eps)}.chk"
            write_checkpoint(os.path.join(cfg.out, ck), gs)
            files.append(ck)
        pos = _positivity(p, eps, gs)
        rows.append((eps, len(gs.grid), gs.newton_iters, gs.residual_norm, gs.energy, *pos))
        print(f"eps {eps:g}: {gs.newton_iters} Newton steps, residual {gs.residual_norm:.2e}, "
              f"energy {gs.energy:.10f}, positive {pos[0] and pos[1]}")
    _csv(os.path.join(cfg.out, "summary.csv"),
         ("eps", "nodes", "newton_iters", "residual", "energy", "positive1", "positive2"), rows)
    return files + ["summary.csv"]


def _positivity(p, eps, gs):
    r2 = gs.grid**2
    lay = eps ** (2.0 / 3.0)
    m1 = r2 <= p.R1**2 + lay
    m2 = r2 <= p.R2**2 + lay
    return bool(np.min(gs.eta1[m1]) > 0), bool(np.min(gs.eta2[m2]) > 0)


def _solve_one(args):
    p, eps, sc = args
    return ground_state(p, eps, None, sc)


def solve_many(p, eps_list, sc, jobs=1):
    """Independent direct solves, one per eps, optionally in worker processes."""
    tasks = [(p, e, sc) for e in eps_list]
    if jobs <= 1 or len(tasks) == 1:
        return [_solve_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        return list(ex.map(_solve_one, tasks))


def cmd_rates(cfg: RunConfig):
    p = cfg.params()
    if len(cfg.eps) < 3:
        raise ConfigError("rates need at least 3 eps values")
    sc = cfg.solve_config()
    specs = cfg.specs()
    hier = build_hierarchies(p, cfg.M, cfg.N, cfg.L)
    directs = solve_many(p, cfg.eps, sc, cfg.jobs)
    orders = (cfg.M0, cfg.N0, cfg.L0)
    reports, table = rate_study(p, cfg.eps, cfg.beta, orders, directs, hier, specs, cfg.rate_tol, cfg.delta)
    write_reports(os.path.join(cfg.out, "rates.csv"), reports)
    labels = [f"{s.label}@{s.region}_eta{j}" for s in specs for j in (1, 2)]
    _csv(os.path.join(cfg.out, "errors.csv"), ("eps", *labels),
         ([e] + [row[(s, j)] for s in specs for j in (1, 2)] for e, row in zip(cfg.eps, table)))
    with open(os.path.join(cfg.out, "rates.dat"), "w") as fh:
        # one gnuplot index per norm: columns eps, error
        for rep in reports:
            fh.write(f"# {rep.row()[0]} {rep.norm.region} slope {rep.slope:.6f} predicted {rep.predicted}\n")
            for e, v in rep.pairs:
                fh.write(f"{e!r} {v!r}\n")
            fh.write("\n\n")
    for rep in reports:
        print(",".join(rep.row()))
    return ["rates.csv", "errors.csv", "rates.dat"]


def build_parser():
    ap = argparse.ArgumentParser(prog="tfgp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"tfgp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value configuration file")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for independent eps")
    common.add_argument("--init", choices=("tf", "ansatz"), default=None, help="initial guess of the direct solver")
    sub = ap.add_subparsers(dest="command", required=True)
    pp = sub.add_parser("painleve", parents=[common], help="Hastings-McLeod profile and its corrections")
    pp.add_argument("--check-tails", action="store_true", help="print fitted tail exponents")
    sub.add_parser("approx", parents=[common], help="glued approximation and residual orders")
    sub.add_parser("solve", parents=[common], help="direct solves along the eps ladder")
    sub.add_parser("rates", parents=[common], help="convergence rates of the approximation")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        upd = {k: v for k, v in (("out", args.out), ("jobs", args.jobs), ("init", args.init)) if v is not None}
        cfg = replace(cfg, **upd).validate()
        os.makedirs(cfg.out, exist_ok=True)
        write_manifest(cfg, args.command)
        if args.command == "painleve":
            cmd_painleve(cfg, args.check_tails)
        elif args.command == "approx":
            cmd_approx(cfg)
        elif args.command == "solve":
            cmd_solve(cfg)
        else:
            cmd_rates(cfg)
    except ConfigError as exc:
        print(f"tfgp: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TFGPError as exc:
        print(f"tfgp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
