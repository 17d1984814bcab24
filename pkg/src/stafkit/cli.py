"""Experiment driver: config parsing, subcommand dispatch, CSV and figures.

Subcommands: `chase` (moving local approximation along a circular
trajectory), `adp` (online regulator tuning), `monomial` (kernel-sum
approximants of monomials), `bound` (kernel-term count bound).  Settings come
from an INI config file (flat sections per module) with every CLI flag
overriding the file value.  Runs write a CSV trace, render figures next to
it, and print a short summary.

Exit codes: 0 success, 1 config error, 2 runtime abort.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from pathlib import Path

import numpy as np

from .adp import AdpConfig, CostSpec, DivergenceError, ValueModel, run_adp
from .centers import CenterMap, adp_centers, polygon_centers, triangle_centers
from .chase import ChaseConfig, ExponentialKernel, evaluate_approximant, run_chase
from .dynamics import circular_system, regulator_system
from .expbounds import center_count_bound, monomial_approximant
from .rkhs import ConditioningError
from . import figures

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

#: Target of the chase experiment (fixed by the experiment definition).
def chase_target(p: np.ndarray) -> float:
    return float(p[0] ** 2 + 5.0 * p[1] ** 2 + math.tanh(p[0] * p[1]))


class ConfigError(Exception):
    """Invalid configuration (file or flags)."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through ConfigError
    # so flag errors share exit code 1 with file errors.
    def error(self, message):
        raise ConfigError(message)


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _parse_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _parse_bool(raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("on", "true", "yes", "1"):
        return True
    if val in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(p)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
    return cp


def _get(cp, section: str, key: str, cast, default, override=None):
    """Value precedence: CLI flag, then config file, then built-in default."""
    if override is not None:
        return override
    if cp.has_option(section, key):
        raw = cp.get(section, key)
        try:
            return cast(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return default


def _build_center_map(cp, default_kind: str) -> CenterMap:
    kind = _get(cp, "centers", "kind", str, default_kind).strip().lower()
    if kind == "triangle":
        radius = _get(cp, "centers", "radius", float, 0.1)
        return triangle_centers(radius)
    if kind == "polygon":
        count = _get(cp, "centers", "count", int, 3)
        radius = _get(cp, "centers", "radius", float, 0.1)
        phase = _get(cp, "centers", "phase", float, 0.0)
        return polygon_centers(count, radius, phase)
    if kind == "adp":
        return adp_centers()
    raise ConfigError(f"unknown centers.kind: {kind!r} (expected triangle, adp, polygon)")


def _want_figures(cp, args, have_out: bool) -> bool:
    if args.figures is not None:
        return args.figures and have_out
    return _get(cp, "run", "figures", _parse_bool, True) and have_out


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def cmd_chase(args) -> int:
    cp = _load_config(args.config)
    dt = _get(cp, "chase", "dt", float, 0.01, args.dt)
    total_time = _get(cp, "chase", "total_time", float, 14.0, args.total_time)
    inner = _get(cp, "chase", "inner_iters", int, 10, args.inner_iters)
    x0 = _get(
        cp, "chase", "x0", _parse_floats, (1.0, 0.0),
        tuple(args.x0) if args.x0 is not None else None,
    )
    init_w = _get(cp, "chase", "initial_weights", _parse_floats, None)
    halfwidth = _get(cp, "chase", "domain_halfwidth", float, 2.0)
    seed = _get(cp, "run", "seed", int, 0, args.seed)
    center_map = _build_center_map(cp, "triangle")

    try:
        config = ChaseConfig(
            x0=np.array(x0, dtype=float),
            dt=dt,
            inner_iterations=inner,
            total_time=total_time,
            initial_weights=None if init_w is None else np.array(init_w),
            domain_halfwidth=halfwidth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    trace = run_chase(circular_system(), chase_target, center_map, config)

    kernel = ExponentialKernel(2)
    v_at_x = np.array([chase_target(s.x) for s in trace.states])
    vhat = np.array(
        [evaluate_approximant(kernel, center_map, s.x, s.weights) for s in trace.states]
    )

    m = center_map.count
    header = (
        ["t", "x1", "x2"]
        + [f"a{i + 1}" for i in range(m)]
        + [f"w{i + 1}" for i in range(m)]
        + ["e_rkhs", "V_at_x", "Vhat_at_x", "pointwise_error", "delta_step"]
    )
    rows = []
    for i, s in enumerate(trace.states):
        rows.append(
            [_fmt(s.t), _fmt(s.x[0]), _fmt(s.x[1])]
            + [_fmt(v) for v in s.weights]
            + [_fmt(v) for v in s.ideal_weights]
            + [
                _fmt(s.error),
                _fmt(v_at_x[i]),
                _fmt(vhat[i]),
                _fmt(abs(v_at_x[i] - vhat[i])),
                _fmt(s.contraction_factor),
            ]
        )

    if args.out:
        out = Path(args.out)
        _write_csv(out, header, rows)
        print(f"wrote {out} ({len(rows)} rows)")
        if _want_figures(cp, args, True):
            for p in figures.render_chase_figures(trace, v_at_x, vhat, out.with_suffix("")):
                print(f"wrote {p}")

    for w in trace.warnings:
        print(f"warning: {w}")
    _print_chase_summary(trace, v_at_x, vhat, seed)
    return EXIT_OK


def _print_chase_summary(trace, v_at_x, vhat, seed) -> None:
    print(f"seed: {seed}")
    if not trace.states:
        print("empty run (total_time = 0)")
        return
    ts = trace.times()
    errs = trace.errors()
    pointwise = np.abs(v_at_x - vhat)
    post = ts > 1.0
    if post.any():
        print(f"post-transient max |pointwise_error|: {pointwise[post].max():.6g}")
        print(f"post-transient mean e_rkhs: {errs[post].mean():.6g}")
    else:
        print(f"max |pointwise_error|: {pointwise.max():.6g}")
        print(f"mean e_rkhs: {errs.mean():.6g}")

    period = 2.0 * math.pi
    t0 = 1.0
    if ts[-1] >= t0 + 2.0 * period:
        weights = trace.weights_matrix()
        mask = (ts >= t0) & (ts <= t0 + period)
        worst = 0.0
        for i in range(weights.shape[1]):
            wi = weights[:, i]
            shifted = np.interp(ts[mask] + period, ts, wi)
            dev = float(np.max(np.abs(wi[mask] - shifted)))
            spread = float(wi[ts >= t0].max() - wi[ts >= t0].min())
            if spread > 0:
                worst = max(worst, dev / spread)
        print(f"per-cycle weight deviation: {100.0 * worst:.3g}% of range")


def cmd_adp(args) -> int:
    cp = _load_config(args.config)
    dt = _get(cp, "adp", "dt", float, 0.01, args.dt)
    total_time = _get(cp, "adp", "total_time", float, 40.0, args.total_time)
    x0 = _get(
        cp, "adp", "x0", _parse_floats, (-1.0, 1.0),
        tuple(args.x0) if args.x0 is not None else None,
    )
    critic_gain = _get(cp, "adp", "critic_gain", float, 1.0)
    actor_gain = _get(cp, "adp", "actor_gain", float, 1.0)
    init_c = _get(cp, "adp", "initial_critic", _parse_floats, None)
    init_a = _get(cp, "adp", "initial_actor", _parse_floats, None)
    convention = _get(cp, "adp", "convention", str, "frozen").strip().lower()
    gt = _get(
        cp, "adp", "gt_override", _parse_bool, True,
        None if args.gt_override is None else args.gt_override == "on",
    )
    dither_amp = _get(cp, "adp", "dither_amplitude", float, 0.0)
    dither_time = _get(cp, "adp", "dither_time", float, 0.0)
    state_cap = _get(cp, "adp", "state_cap", float, 50.0)
    weight_cap = _get(cp, "adp", "weight_cap", float, 1e3)
    seed = _get(cp, "run", "seed", int, 0, args.seed)
    q_diag = _get(cp, "cost", "q_diag", _parse_floats, (1.0, 1.0))
    r_diag = _get(cp, "cost", "r_diag", _parse_floats, (1.0,))
    center_map = _build_center_map(cp, "adp")

    if convention not in ("frozen", "total"):
        raise ConfigError(f"adp.convention must be 'frozen' or 'total', got {convention!r}")

    system = regulator_system()
    try:
        cost = CostSpec(Q=np.diag(q_diag), R=np.diag(r_diag))
        config = AdpConfig(
            x0=np.array(x0, dtype=float),
            dt=dt,
            total_time=total_time,
            critic_gain=critic_gain,
            actor_gain=actor_gain,
            initial_critic=None if init_c is None else np.array(init_c),
            initial_actor=None if init_a is None else np.array(init_a),
            convention=convention,
            ground_truth=gt,
            dither_amplitude=dither_amp,
            dither_time=dither_time,
            state_cap=state_cap,
            weight_cap=weight_cap,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    model = ValueModel(centers=center_map)

    trace = run_adp(system, cost, model, config)

    m = center_map.count
    header = (
        ["t", "x1", "x2"]
        + [f"Wa{i + 1}" for i in range(m)]
        + [f"Wc{i + 1}" for i in range(m)]
        + ["bellman_error", "value_error", "control_error"]
    )
    rows = []
    for s in trace.states:
        rows.append(
            [_fmt(s.t), _fmt(s.x[0]), _fmt(s.x[1])]
            + [_fmt(v) for v in s.actor_weights]
            + [_fmt(v) for v in s.critic_weights]
            + [_fmt(s.bellman), _fmt(s.value_error), _fmt(s.control_error)]
        )

    if args.out:
        out = Path(args.out)
        _write_csv(out, header, rows)
        print(f"wrote {out} ({len(rows)} rows)")
        if _want_figures(cp, args, True):
            for p in figures.render_adp_figures(trace, out.with_suffix("")):
                print(f"wrote {p}")

    for w in trace.warnings:
        print(f"warning: {w}")
    print(f"seed: {seed}")
    if trace.states:
        final = trace.states[-1]
        x_norm = float(np.linalg.norm(final.x))
        wc_norm = float(np.linalg.norm(final.critic_weights))
        gap = float(np.linalg.norm(final.actor_weights - final.critic_weights))
        print(f"final ||x||: {x_norm:.6g}")
        if wc_norm > 0:
            print(f"final ||Wa - Wc|| / ||Wc||: {gap / wc_norm:.6g}")
        if final.value_error is not None:
            print(f"final value_error: {final.value_error:.6g}")
            print(f"final control_error: {final.control_error:.6g}")
    else:
        print("empty run (total_time = 0)")
    return EXIT_OK


def _sup_error_grid(alpha: tuple[int, ...], r: float, n: int) -> np.ndarray:
    """Deterministic evaluation grid covering the closed r-ball at the origin."""
    per_dim = {1: 10001, 2: 201, 3: 41}.get(n, 11)
    axes = [np.linspace(-r, r, per_dim) for _ in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.linalg.norm(points, axis=1) <= r + 1e-15
    return points[keep]


def cmd_monomial(args) -> int:
    cp = _load_config(args.config)
    alpha = _get(
        cp, "monomial", "alpha", _parse_ints, (1,),
        tuple(args.alpha) if args.alpha is not None else None,
    )
    m_list = _get(
        cp, "monomial", "m_list", _parse_ints, (100, 200, 400),
        tuple(args.m) if args.m is not None else None,
    )
    r = _get(cp, "monomial", "r", float, 0.1, args.r)
    if r <= 0:
        raise ConfigError("r must be positive")
    if any(a < 0 for a in alpha):
        raise ConfigError(f"alpha components must be nonnegative: {alpha}")
    if any(m < 1 for m in m_list):
        raise ConfigError(f"scales must be >= 1: {m_list}")

    n = len(alpha)
    points = _sup_error_grid(alpha, r, n)
    exact = np.prod(points ** np.array(alpha, dtype=float)[None, :], axis=1)

    rows = []
    prev_err = None
    print(f"alpha={alpha}  r={r}  grid={points.shape[0]} points")
    print(f"{'m':>8}  {'sup_error':>12}  {'ratio':>8}  {'max|center|':>12}")
    for m in sorted(m_list):
        try:
            approx = monomial_approximant(alpha, m)
        except OverflowError as exc:
            raise ConfigError(str(exc)) from exc
        errs = np.abs(approx.evaluate_many(points) - exact)
        sup = float(errs.max())
        ratio = prev_err / sup if (prev_err is not None and sup > 0) else math.nan
        max_center = approx.max_center_distance()
        rows.append(
            {"m": m, "sup_error": sup, "ratio": ratio, "max_center_norm": max_center}
        )
        ratio_s = f"{ratio:8.3f}" if not math.isnan(ratio) else "      --"
        print(f"{m:>8}  {sup:12.6e}  {ratio_s}  {max_center:12.6e}")
        if m <= max(alpha) / r:
            print(f"warning: m={m} <= max(alpha)/r = {max(alpha) / r:.6g}; "
                  f"centers exceed the r-ball at the origin")
        prev_err = sup

    if args.out:
        out = Path(args.out)
        header = ["m", "sup_error", "ratio_vs_prev", "max_center_norm"]
        csv_rows = [
            [str(row["m"]), _fmt(row["sup_error"]),
             "" if math.isnan(row["ratio"]) else _fmt(row["ratio"]),
             _fmt(row["max_center_norm"])]
            for row in rows
        ]
        _write_csv(out, header, csv_rows)
        print(f"wrote {out} ({len(csv_rows)} rows)")
        if _want_figures(cp, args, True):
            for p in figures.render_monomial_figure(rows, out.with_suffix("")):
                print(f"wrote {p}")
    return EXIT_OK


def cmd_bound(args) -> int:
    cp = _load_config(args.config)
    n = _get(cp, "bound", "n", int, None, args.n)
    big_n = _get(cp, "bound", "poly_degree", int, None, args.N)
    s = _get(cp, "bound", "aux_degree", int, None, args.S)
    if n is None or big_n is None or s is None:
        raise ConfigError("bound needs n, N and S (flags or [bound] section)")
    try:
        value = center_count_bound(n, big_n, s)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"center count bound C({n + big_n + s}, {big_n + s}) = {value}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="staf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="INI config file; flags override its values")
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--seed", type=int, help="seed recorded with the run")
        p.add_argument(
            "--figures",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="render figures next to the CSV (default: on when --out is given)",
        )

    p_chase = sub.add_parser("chase", help="moving local approximation on a circle")
    add_common(p_chase)
    p_chase.add_argument("--dt", type=float, help="time step [s] (default 0.01)")
    p_chase.add_argument("--total-time", type=float, help="run length [s] (default 14)")
    p_chase.add_argument(
        "--inner-iters", type=int, help="gradient steps per time step (default 10)"
    )
    p_chase.add_argument("--x0", type=float, nargs=2, help="initial state (default 1 0)")
    p_chase.set_defaults(func=cmd_chase)

    p_adp = sub.add_parser("adp", help="online regulator tuning")
    add_common(p_adp)
    p_adp.add_argument("--dt", type=float, help="time step [s] (default 0.01)")
    p_adp.add_argument("--total-time", type=float, help="run length [s] (default 40)")
    p_adp.add_argument("--x0", type=float, nargs=2, help="initial state (default -1 1)")
    p_adp.add_argument(
        "--gt-override",
        choices=("on", "off"),
        help="compare against the known optimal solution (default on)",
    )
    p_adp.set_defaults(func=cmd_adp)

    p_mono = sub.add_parser("monomial", help="kernel-sum approximants of a monomial")
    add_common(p_mono)
    p_mono.add_argument("--alpha", type=int, nargs="+", help="multi-index (default 1)")
    p_mono.add_argument("--m", type=int, nargs="+", help="scales (default 100 200 400)")
    p_mono.add_argument("--r", type=float, help="ball radius (default 0.1)")
    p_mono.set_defaults(func=cmd_monomial)

    p_bound = sub.add_parser("bound", help="kernel-term count bound")
    add_common(p_bound)
    p_bound.add_argument("--n", type=int, help="ambient dimension")
    p_bound.add_argument("--N", type=int, help="target polynomial degree")
    p_bound.add_argument("--S", type=int, help="auxiliary polynomial degree")
    p_bound.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConditioningError, DivergenceError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except RuntimeError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
