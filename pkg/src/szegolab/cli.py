"""Command-line front end: configuration, experiment dispatch, data emission.

Every subcommand accepts --config FILE (JSON mapping of option names to
values; unknown keys are rejected) with command-line flags taking
precedence. Structured results go to JSON, time series to CSV. Exit codes:
0 success, 2 configuration/validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import asymptotics, experiments, hankel
from .errors import ConfigError, SzegoError
from .evolve import evolve
from .modes import ModeVector, Params, mode_vector_from_json
from .rank_one import (
    RankOneState,
    ReducedState,
    dist_to_CM,
    evolve_bcp,
    evolve_reduced,
    rank_one_mass,
    rank_one_momentum,
    rank_one_sobolev_sq,
)

log = logging.getLogger("szegolab")


def _complex(text: str) -> complex:
    """Parse '1', '-0.5', '1+2j' or 're,im' into a complex number."""
    try:
        if "," in text:
            re_part, im_part = text.split(",")
            return complex(float(re_part), float(im_part))
        return complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _emit(payload: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(payload if payload.endswith("\n") else payload + "\n")
    else:
        print(payload)


def _load_config(args: argparse.Namespace, parser_dests: set[str]) -> None:
    """Fill unset options from the JSON config file, rejecting unknown keys."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in parser_dests:
            raise ConfigError(f"unknown config key: {key!r}")
        if getattr(args, dest, None) is None:
            if dest in ("b", "c", "p", "zeta") and isinstance(value, (list, str)):
                value = _complex(",".join(map(str, value)) if isinstance(value, list) else value)
            setattr(args, dest, value)


def _resolved(args: argparse.Namespace) -> dict:
    d = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "dests", "config"):
            continue
        d[k] = str(v) if isinstance(v, complex) else v
    return d


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise ConfigError(f"missing required option --{name.replace('_', '-')}")


def _params(args: argparse.Namespace, **kw) -> Params:
    return Params(
        nu=args.nu,
        alpha=args.alpha if args.alpha is not None else 0.0,
        beta=args.beta if args.beta is not None else 0.0,
        **kw,
    )


def _initial_state(args: argparse.Namespace, n: int) -> ModeVector:
    if getattr(args, "input", None):
        with open(args.input) as fh:
            u = mode_vector_from_json(fh.read())
        if u.n < n:
            c = np.zeros(n, dtype=np.complex128)
            c[: u.n] = u.coeffs
            u = ModeVector(c)
        return u
    _require(args, "c")
    state = RankOneState(
        args.b if args.b is not None else 0.0,
        args.c,
        args.p if args.p is not None else 0.0,
    )
    from .rank_one import embed

    return embed(state, n)


# --------------------------------------------------------------------------
# subcommand bodies


def _cmd_simulate(args) -> int:
    _require(args, "nu", "t_end")
    n = args.n if args.n is not None else 256
    u0 = _initial_state(args, n)
    p = _params(args, N=n)
    s_values = tuple(args.s) if args.s else (1.0,)
    traj = evolve(u0, p, args.t_end, sample_dt=args.sample_dt or 0.1, s_values=s_values)
    if not traj.completed:
        log.warning("run stopped early: %s", traj.abort_reason)
    if args.out:
        traj.to_csv(args.out)
    if args.states_out:
        traj.states_to_json(args.states_out)
    if not args.out:
        print(json.dumps({"completed": traj.completed, "t_final": float(traj.times[-1]),
                          "mass_final": float(traj.mass[-1])}))
    return 0


def _cmd_rank1(args) -> int:
    _require(args, "nu", "t_end", "c")
    state = RankOneState(args.b or 0.0, args.c, args.p or 0.0)
    p = _params(args)
    s_values = tuple(args.s) if args.s else (1.0,)
    traj = evolve_bcp(state, p, args.t_end, sample_dt=args.sample_dt or 0.1)
    if not traj.completed:
        log.warning("run stopped early: %s", traj.abort_reason)
    rows = []
    for t, st in zip(traj.times, traj.states):
        rows.append(
            [t, rank_one_mass(st), rank_one_momentum(st), abs(st.b)]
            + [rank_one_sobolev_sq(st, s) for s in s_values]
            + [dist_to_CM(st), 1.0 - abs(st.p) ** 2]
        )
    header = (["t", "mass", "momentum", "mean_abs"]
              + [f"hs_{s:g}" for s in s_values] + ["dist_cm", "one_minus_p_sq"])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    else:
        print(json.dumps({"t_final": float(traj.times[-1]),
                          "state_final": json.loads(traj.states[-1].to_json())}))
    return 0


def _cmd_reduce(args) -> int:
    _require(args, "nu", "t_end", "eta", "second", "momentum")
    zeta = args.zeta if args.zeta is not None else 0.0
    state = ReducedState(args.eta, args.second, zeta, args.chart, args.momentum)
    p = _params(args, rel_tol=1e-11, abs_tol=1e-13)
    traj = evolve_reduced(state, p, args.t_end,
                          sample_dt=args.sample_dt or max(args.t_end / 2000.0, 1e-3))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "eta", "second", "zeta_re", "zeta_im", "t_second"])
            for i, t in enumerate(traj.times):
                w.writerow([t, traj.eta[i], traj.second[i],
                            traj.zeta[i].real, traj.zeta[i].imag, t * traj.second[i]])
    else:
        print(json.dumps({"t_final": float(traj.times[-1]),
                          "eta_final": float(traj.eta[-1]),
                          "second_final": float(traj.second[-1])}))
    return 0


def _cmd_spectrum(args) -> int:
    _require(args, "input")
    with open(args.input) as fh:
        u = mode_vector_from_json(fh.read())
    rep = hankel.spectrum(u, shifted=args.shifted, n=args.n)
    _emit(rep.to_json(), args.out)
    return 0


def _cmd_constants(args) -> int:
    _require(args, "nu", "momentum")
    s_list = tuple(args.s) if args.s else (1.0,)
    cst = asymptotics.constants(
        args.nu, args.alpha or 0.0, args.beta or 0.0, args.momentum, s_list=s_list
    )
    _emit(cst.to_json(), args.out)
    return 0


def _cmd_classify(args) -> int:
    _require(args, "nu", "c")
    state = RankOneState(args.b or 0.0, args.c, args.p or 0.0)
    p = _params(args, rel_tol=1e-11, abs_tol=1e-13)
    result = experiments.classify(state, p, horizon=args.horizon or 1.0e4)
    payload = {"verdict": result.verdict}
    if result.fit is not None:
        payload["fit"] = {
            "exponent": result.fit.exponent,
            "amplitude": result.fit.amplitude,
            "r_squared": result.fit.r_squared,
            "window": list(result.fit.window),
        }
    if result.kappa_hat is not None:
        payload["kappa_hat"] = result.kappa_hat
    _emit(json.dumps(payload), args.out)
    return 0


def _cmd_stationary(args) -> int:
    candidate = experiments.stationary_search(args.modes or 4, seed=args.seed or 0)
    payload = {
        "coeffs": [[z.real, z.imag] for z in candidate.u.coeffs],
        "residual_mean": candidate.residual_mean,
        "residual_cubic": candidate.residual_cubic,
        "omega": candidate.omega,
        "shifted_rank": candidate.shifted_rank,
    }
    _emit(json.dumps(payload), args.out)
    return 0


def _cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep requires --config with a cells array")
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cells = cfg.get("cells")
    if not isinstance(cells, list) or not cells:
        raise ConfigError("config must contain a non-empty 'cells' array")
    allowed = {"nu", "alpha", "beta", "b", "c", "p", "family", "horizon"}
    for cell in cells:
        extra = set(cell) - allowed
        if extra:
            raise ConfigError(f"unknown cell keys: {sorted(extra)}")
        for key in ("b", "c", "p"):
            if key in cell and isinstance(cell[key], (list, str)):
                cell[key] = _complex(
                    ",".join(map(str, cell[key])) if isinstance(cell[key], list) else cell[key]
                )
    rows = experiments.sweep(cells, jobs=args.jobs or 1)
    if args.out:
        experiments.sweep_to_csv(rows, args.out)
    else:
        print(json.dumps(rows, default=str))
    return 0


def _cmd_fit(args) -> int:
    _require(args, "input", "col")
    with open(args.input, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or args.col not in reader.fieldnames:
            raise ConfigError(f"column {args.col!r} not in {args.input}")
        t, y = [], []
        for row in reader:
            t.append(float(row["t"]))
            y.append(float(row[args.col]))
    t = np.asarray(t)
    y = np.asarray(y)
    window = None
    if args.t_lo is not None or args.t_hi is not None:
        window = (args.t_lo if args.t_lo is not None else float(t.min()),
                  args.t_hi if args.t_hi is not None else float(t.max()))
    if args.kind == "power":
        fit = experiments.fit_power_law(t, y, window=window)
    else:
        fit = experiments.fit_exp_rate(t, y, window=window)
    _emit(json.dumps({
        "kind": args.kind,
        "exponent" if args.kind == "power" else "rate": fit.exponent,
        "amplitude": fit.amplitude,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
    }), args.out)
    return 0


# --------------------------------------------------------------------------
# parser


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file; flags override it")
    sp.add_argument("--nu", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--out", help="output file (CSV or JSON per subcommand)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szegolab",
        description="Numerical laboratory for a damped cubic Szego-type flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="full spectral PDE run to CSV")
    _add_common(sp)
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--n", type=int, help="number of Fourier modes")
    sp.add_argument("--sample-dt", type=float, dest="sample_dt")
    sp.add_argument("--s", type=float, action="append", help="Sobolev index (repeatable)")
    sp.add_argument("--input", help="initial state as JSON mode vector")
    sp.add_argument("--b", type=_complex)
    sp.add_argument("--c", type=_complex)
    sp.add_argument("--p", type=_complex)
    sp.add_argument("--states-out", dest="states_out", help="sampled states JSON")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("rank1", help="exact rank-one (b,c,p) run to CSV")
    _add_common(sp)
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--sample-dt", type=float, dest="sample_dt")
    sp.add_argument("--s", type=float, action="append")
    sp.add_argument("--b", type=_complex)
    sp.add_argument("--c", type=_complex)
    sp.add_argument("--p", type=_complex)
    sp.set_defaults(func=_cmd_rank1)

    sp = sub.add_parser("reduce", help="three-variable reduced-chart run to CSV")
    _add_common(sp)
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--sample-dt", type=float, dest="sample_dt")
    sp.add_argument("--eta", type=float)
    sp.add_argument("--second", type=float, help="gamma (blowup chart) or delta (scatter)")
    sp.add_argument("--zeta", type=_complex)
    sp.add_argument("--chart", choices=("blowup", "scatter"), default="blowup")
    sp.add_argument("--momentum", type=float)
    sp.set_defaults(func=_cmd_reduce)

    sp = sub.add_parser("spectrum", help="squared (shifted) Hankel spectrum of a state")
    _add_common(sp)
    sp.add_argument("--input", help="state as JSON mode vector")
    sp.add_argument("--shifted", action="store_true")
    sp.add_argument("--n", type=int, help="finite-section size")
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("constants", help="closed-form asymptotic constants as JSON")
    _add_common(sp)
    sp.add_argument("--momentum", type=float)
    sp.add_argument("--s", type=float, action="append")
    sp.set_defaults(func=_cmd_constants)

    sp = sub.add_parser("classify", help="periodic / blow-up / scatter verdict")
    _add_common(sp)
    sp.add_argument("--b", type=_complex)
    sp.add_argument("--c", type=_complex)
    sp.add_argument("--p", type=_complex)
    sp.add_argument("--horizon", type=float)
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("stationary", help="search stationary data for beta = 1")
    _add_common(sp)
    sp.add_argument("--modes", type=int, help="coefficient budget (>= 4)")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=_cmd_stationary)

    sp = sub.add_parser("sweep", help="parallel classification over a parameter grid")
    _add_common(sp)
    sp.add_argument("--jobs", type=int, help="worker processes")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("fit", help="power-law or decay-rate fit of a CSV column")
    _add_common(sp)
    sp.add_argument("--input", help="CSV time series")
    sp.add_argument("--col", help="column to fit")
    sp.add_argument("--kind", choices=("power", "rate"), default="power")
    sp.add_argument("--t-lo", type=float, dest="t_lo")
    sp.add_argument("--t-hi", type=float, dest="t_hi")
    sp.set_defaults(func=_cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SZEGO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command != "sweep":  # the sweep config is the grid spec itself
            _load_config(args, set(vars(args)))
        log.info("resolved config: %s", json.dumps(_resolved(args), default=str))
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SzegoError as exc:
        log.error("%s", exc)
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
