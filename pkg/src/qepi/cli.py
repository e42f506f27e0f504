"""Command-line front end: ``qepi <command> [flags]``.

Every artifact embeds the resolved run configuration, the convention
ledger and the seed, and nothing time-dependent, so reruns with the same
configuration are byte-identical.  Exit codes: 0 success, 1 tolerance
breach, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bounds as B
from .conventions import LEDGER, TOL, Tolerances, TruncationError

log = logging.getLogger("qepi")

OUT_ENV = "QEPI_OUT"
EXIT_OK, EXIT_BREACH, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    lam: float | None = None
    ne: float | None = None
    nu: float | None = None
    gain: float | None = None
    n: float | None = None
    nmax: float | None = None
    cutoff: int | None = None
    corpus: int | None = None
    seed: int | None = None
    t: list[float] | None = None
    sweep: str | None = None
    channel: str | None = None
    x: str | None = None
    y: str | None = None
    points: int | None = None
    out: str | None = None
    format: list[str] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def tol(self) -> Tolerances:
        try:
            return dataclasses.replace(TOL, **self.tolerances)
        except TypeError as exc:
            raise UsageError(f"unknown tolerance override: {exc}") from None


FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    if "lambda" in data:
        data["lam"] = data.pop("lambda")
    unknown = set(data) - FIELDS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return data


# --- artifact writing ---------------------------------------------------------

def _header(cfg: RunConfig) -> dict:
    return {"config": cfg.to_dict(), "conventions": LEDGER.to_dict(), "tolerances": cfg.tol().to_dict(),
            "seed": cfg.seed}


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(cfg: RunConfig, name: str, body: str) -> Path:
    path = _out_dir(cfg) / f"{name}.csv"
    path.write_text("# " + json.dumps(_header(cfg), sort_keys=True) + "\n" + body)
    return path


def write_json(cfg: RunConfig, name: str, payload: dict) -> Path:
    path = _out_dir(cfg) / f"{name}.json"
    doc = {**_header(cfg), "result": payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=1, default=_jsonable) + "\n")
    return path


def write_svg(cfg: RunConfig, name: str, render: Callable[[str], str]) -> Path:
    path = _out_dir(cfg) / f"{name}.svg"
    path.write_text(render(json.dumps(_header(cfg), sort_keys=True)))
    return path


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj)}")


# --- state specs ----------------------------------------------------------------

def parse_state(text: str, cutoff: int):
    """``fock:k``, ``thermal:N``, ``coherent:re,im`` or ``random:rank:seed``.

    ``cutoff`` is a floor: Fock, thermal and coherent states get as many
    levels as their tail tolerance needs.
    """
    from .fock import make_coherent, make_fock, make_thermal, random_state, thermal_auto_cutoff

    kind, _, arg = text.partition(":")
    try:
        if kind == "fock":
            return make_fock(int(arg), max(cutoff, int(arg) + 1))
        if kind == "thermal":
            N = float(arg)
            return make_thermal(N, max(cutoff, thermal_auto_cutoff(N)) if N >= 0 else cutoff)
        if kind == "coherent":
            re, _, im = arg.partition(",")
            alpha = complex(float(re), float(im or 0))
            try:
                return make_coherent(alpha, cutoff)
            except TruncationError as exc:
                return make_coherent(alpha, max(cutoff, exc.suggested_cutoff or cutoff))
        if kind == "random":
            rank, _, seed = arg.partition(":")
            return random_state(cutoff, rank=int(rank) if rank else None, seed=int(seed or 0))
    except (ValueError, TruncationError) as exc:
        raise UsageError(f"bad state {text!r}: {exc}") from None
    raise UsageError(f"unknown state kind in {text!r}; use fock:k, thermal:N, coherent:re,im or random:rank:seed")


# --- commands -------------------------------------------------------------------

def cmd_bounds(cfg: RunConfig) -> int:
    fmts = cfg.format or ["csv"]
    if cfg.sweep == "lambda":
        n = 5.0 if cfg.n is None else cfg.n
        ne = 2.0 if cfg.ne is None else cfg.ne
        lams = np.linspace(0, 1, (cfg.points or 101))
        curve = B.lambda_sweep(None, lams, n, ne)
        name, xlabel = "bounds_lambda_sweep", "transmissivity lambda"
    elif cfg.sweep not in (None, "N"):
        raise UsageError(f"unknown sweep {cfg.sweep!r}; use N or lambda")
    else:
        nmax = 20.0 if cfg.nmax is None else cfg.nmax
        if nmax <= 0:
            raise UsageError("--nmax must be positive")
        grid = np.linspace(0, nmax, cfg.points or 121)
        if cfg.nu is not None:
            curve = B.curve(None, grid, nu=cfg.nu)
        else:
            lam = 0.5 if cfg.lam is None else cfg.lam
            curve = B.curve(None, grid, lam, 0.0 if cfg.ne is None else cfg.ne)
        name, xlabel = "bounds", "mean photon number N"
    payload = curve.to_dict()
    ok = curve.ordering_ok(1e-12)
    payload["ordering_ok"] = ok
    if "csv" in fmts:
        write_csv(cfg, name, curve.to_csv())
    if "json" in fmts:
        write_json(cfg, name, payload)
    if "svg" in fmts:
        from .svg import line_plot

        series = {k + (" (conditional)" if k in B.CONDITIONAL_IDS else ""): v for k, v in curve.values_bits.items()}
        dashed = [k for k in series if "conditional" in k]
        write_svg(cfg, name, lambda meta: line_plot(curve.n_grid, series, "capacity bounds", xlabel, "bits",
                                                    meta, dashed))
    print(f"bounds: {len(curve.values_nats)} identities x {len(curve.n_grid)} points, "
          f"min UB-LB margin {min(curve.ordering.values(), default=0.0):.3e} nats")
    return EXIT_OK if ok else EXIT_BREACH


def cmd_epi_test(cfg: RunConfig) -> int:
    from .corpus import CorpusConfig, random_pairs
    from .epi import epi_margins

    if cfg.cutoff is not None and cfg.cutoff < 2:
        raise UsageError("--cutoff must be at least 2")
    lo, hi = (cfg.cutoff, cfg.cutoff) if cfg.cutoff else (10, 16)
    corpus = CorpusConfig(size=cfg.corpus or 200, seed=7 if cfg.seed is None else cfg.seed,
                          min_cutoff=lo, max_cutoff=hi)
    threshold = -1e-6
    rows = []
    for case in random_pairs(corpus):
        m = epi_margins(case.x, case.y, case.lam, case.label)
        h = m if case.lam == 0.5 else epi_margins(case.x, case.y, 0.5, case.label)
        rows.append({"index": case.index, "label": case.label, "lambda": case.lam, "S_x": m.S_x, "S_y": m.S_y,
                     "S_z": m.S_z, "linear_margin": m.linear, "power_half_margin": h.power_half,
                     "power_general_margin": m.power_general, "power_general_unproven": True})
    lin = min(r["linear_margin"] for r in rows)
    half = min(r["power_half_margin"] for r in rows)
    probe_neg = sum(r["power_general_margin"] < 0 for r in rows)
    breach = lin < threshold or half < threshold
    summary = {"pairs": len(rows), "min_linear_margin": lin, "min_power_half_margin": half,
               "power_general_negative_count": probe_neg, "threshold": threshold, "breach": breach}
    fmts = cfg.format or ["json"]
    if "json" in fmts:
        write_json(cfg, "epi_test", {"summary": summary, "cases": rows})
    if "csv" in fmts:
        keys = list(rows[0])
        body = ",".join(keys) + "\n" + "".join(",".join(repr(r[k]) if not isinstance(r[k], str) else r[k]
                                                         for k in keys) + "\n" for r in rows)
        write_csv(cfg, "epi_test", body)
    print(f"epi-test: {len(rows)} pairs, min linear margin {lin:.3e}, min lambda=1/2 power margin {half:.3e}, "
          f"unproven general-lambda power form negative in {probe_neg} cases")
    return EXIT_BREACH if breach else EXIT_OK


def _smoothed_cfg(cfg: RunConfig, default_size: int, default_seed: int):
    from .corpus import SmoothedConfig

    return SmoothedConfig(size=cfg.corpus or default_size, seed=default_seed if cfg.seed is None else cfg.seed,
                          cutoff=cfg.cutoff or 22)


def _report(cfg: RunConfig, name: str, summary: dict, cases: list[dict]) -> None:
    fmts = cfg.format or ["json"]
    if "json" in fmts:
        write_json(cfg, name, {"summary": summary, "cases": cases})
    if "csv" in fmts:
        keys = list(cases[0])
        lines = [",".join(keys)] + [",".join(str(c[k]) if isinstance(c[k], str) else repr(c[k]) for k in keys)
                                    for c in cases]
        write_csv(cfg, name, "\n".join(lines) + "\n")


def cmd_debruijn(cfg: RunConfig) -> int:
    from .corpus import smoothed_states
    from .fock import make_thermal
    from .information import de_bruijn_check

    tol = cfg.tol()
    cases = []
    for N in (0.5, 1.0, 2.0):
        res = de_bruijn_check(make_thermal(N, max(60, cfg.cutoff or 0)), tol=tol)
        cases.append({"label": f"thermal{N}", "entropy_rate": res.lhs, "scaled_fisher": res.rhs,
                      "relative_error": res.value, "limit": 0.01})
    sm = _smoothed_cfg(cfg, 20, 11)
    for st, label in smoothed_states(sm):
        res = de_bruijn_check(st, tol=tol)
        cases.append({"label": label, "entropy_rate": res.lhs, "scaled_fisher": res.rhs,
                      "relative_error": res.value, "limit": 0.02})
    worst = max(c["relative_error"] / c["limit"] for c in cases)
    summary = {"cases": len(cases), "max_relative_error": max(c["relative_error"] for c in cases),
               "epsilon": sm.epsilon, "debruijn_scale": LEDGER.debruijn_scale, "breach": worst > 1}
    _report(cfg, "debruijn", summary, cases)
    print(f"debruijn: {len(cases)} states, max relative error {summary['max_relative_error']:.2e} "
          f"(smoothing epsilon {sm.epsilon})")
    return EXIT_BREACH if worst > 1 else EXIT_OK


def _pair_check(cfg: RunConfig, name: str, check) -> int:
    from .corpus import smoothed_pairs

    sm = _smoothed_cfg(cfg, 50, 13)
    threshold = -1e-3
    cases = []
    for case in smoothed_pairs(sm):
        lam = case.lam if cfg.lam is None else cfg.lam
        res = check(case.x, case.y, lam)
        cases.append({"index": case.index, "label": case.label, "lambda": lam, "margin": res.value,
                      "J_x": res.params["J_x"], "J_y": res.params["J_y"], "J_z": res.params["J_z"]})
    lo = min(c["margin"] for c in cases)
    summary = {"pairs": len(cases), "min_margin": lo, "threshold": threshold, "epsilon": sm.epsilon,
               "breach": lo < threshold}
    _report(cfg, name, summary, cases)
    print(f"{name}: {len(cases)} smoothed pairs (epsilon {sm.epsilon}), min margin {lo:.3e}")
    return EXIT_BREACH if lo < threshold else EXIT_OK


def cmd_stam(cfg: RunConfig) -> int:
    from .information import stam_check

    tol = cfg.tol()
    return _pair_check(cfg, "stam", lambda x, y, lam: stam_check(x, y, tol=tol))


def cmd_convexity(cfg: RunConfig) -> int:
    from .information import convexity_check

    tol = cfg.tol()
    return _pair_check(cfg, "convexity", lambda x, y, lam: convexity_check(x, y, lam, tol=tol))


def log_times(t_max: float, points: int) -> list[float]:
    return [0.0] + [float(v) for v in np.logspace(-3, math.log10(t_max), points)]


def cmd_scurve(cfg: RunConfig) -> int:
    from .diffusion import s_curve

    tol = cfg.tol()
    base = 12
    x = parse_state(cfg.x or "fock:1", base)
    y = parse_state(cfg.y or "fock:2", base)
    lam = 0.5 if cfg.lam is None else cfg.lam
    t_max = max(cfg.t) if cfg.t else 5.0
    times = log_times(t_max, cfg.points or 25)
    notes = []
    trace = None
    dropped = []
    while trace is None:
        try:
            trace = s_curve(x, y, lam, times, cutoff=cfg.cutoff, tol=tol)
        except TruncationError as exc:
            if len(times) <= 2:
                raise UsageError(f"cutoff {cfg.cutoff} cannot hold any diffusion step: {exc}") from None
            dropped.append(times.pop())
    if dropped:
        notes.append(f"times {min(dropped):g}..{max(dropped):g} exceed the truncation budget of cutoff "
                     f"{cfg.cutoff}; grid stops at t={times[-1]:g}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=1)
    s0, s_end = trace.values[0], trace.values[-1]
    mono = trace.non_increasing(slack=1e-9)
    summary = {"non_increasing": mono, "s0": s0, "s_final": s_end, "t_final": trace.times[-1],
               "decay_ratio": s_end / s0 if s0 else None, "truncated_grid": notes,
               "cutoffs": trace.extra["cutoffs"],
               "note": "finite-cutoff traces decay toward zero; the limit itself is not reached"}
    fmts = cfg.format or ["csv", "json"]
    if "csv" in fmts:
        write_csv(cfg, "scurve", trace.to_csv())
    if "json" in fmts:
        write_json(cfg, "scurve", {"summary": summary, "times": trace.times, "s": trace.values})
    if "svg" in fmts:
        from .svg import line_plot

        write_svg(cfg, "scurve", lambda meta: line_plot(trace.times, {"s(t)": trace.values}, "entropy production",
                                                        "t", "nats", meta))
    print(f"scurve: s(0)={s0:.6f}, s({trace.times[-1]:g})={s_end:.6f}, non-increasing={mono}")
    return EXIT_OK if mono and s0 >= -1e-9 else EXIT_BREACH


def cmd_wigner(cfg: RunConfig) -> int:
    from .channels import beam_splitter_output, trace_distance
    from .diffusion import evolve
    from .phase_space import wigner_grid

    tol = cfg.tol()
    cutoff = cfg.cutoff or 40
    base = 6
    x = parse_state(cfg.x or "fock:1", base)
    y = parse_state(cfg.y or "fock:2", base)
    z = beam_splitter_output(x, y, 0.5)
    states = {"x": x, "y": y, "z": z}
    times = cfg.t or [0.0, 0.1, 1.0]
    if any(t < 0 for t in times):
        raise UsageError("diffusion times must be nonnegative")
    fmts = cfg.format or ["csv"]
    panels, evolved = [], {}
    grid_problem = False
    for t in times:
        for name, st in states.items():
            try:
                ev = evolve(st, t, cutoff=max(cutoff, st.dims[0]), tol=tol)
            except TruncationError as exc:
                raise UsageError(f"cutoff {cutoff} too small for t={t}: {exc}") from None
            evolved[(name, t)] = ev
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                grid = wigner_grid(ev, points=cfg.points or 241, tol=tol)
            grid_problem = grid_problem or bool(grid.warnings)
            tag = f"wigner_{name}_t{t:g}"
            if "csv" in fmts:
                write_csv(cfg, tag, grid.to_csv())
            if "svg" in fmts:
                from .svg import heat_map

                write_svg(cfg, tag, lambda meta, g=grid, n=name, tt=t: heat_map(g.values, g.q_axis, g.p_axis,
                                                                                 f"{n}, t={tt:g}", meta))
            panels.append({"state": name, "t": t, "integral": grid.integral, "minimum": grid.minimum,
                           "extent": float(grid.q_axis[-1]), "warnings": list(grid.warnings)})
    distances = {}
    for t in times:
        for a, b in (("x", "y"), ("x", "z"), ("y", "z")):
            distances[f"{a}{b}@{t:g}"] = trace_distance(evolved[(a, t)], evolved[(b, t)])
    late = [p for p in panels if p["t"] == max(times)]
    positive_late = all(p["minimum"] >= -1e-8 for p in late) if max(times) >= 1 else None
    summary = {"panels": len(panels), "grid_problem": grid_problem, "late_panels_nonnegative": positive_late,
               "trace_distances": distances}
    write_json(cfg, "wigner", {"summary": summary, "panels": panels})
    print(f"wigner: {len(panels)} panels written, normalization/extent problems: {grid_problem}")
    if grid_problem:
        return EXIT_USAGE
    return EXIT_BREACH if positive_late is False else EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    from .channels import ChannelSpec
    from .gaussian import oracle_suite

    specs = None
    if cfg.channel:
        params = {"thermal": dict(lam=0.7 if cfg.lam is None else cfg.lam, N_E=0.8 if cfg.ne is None else cfg.ne),
                  "pure_loss": dict(lam=0.6 if cfg.lam is None else cfg.lam),
                  "amplifier": dict(G=1.5 if cfg.gain is None else cfg.gain),
                  "classical_noise": dict(nu=0.4 if cfg.nu is None else cfg.nu)}
        if cfg.channel not in params:
            raise UsageError(f"unknown channel {cfg.channel!r}; choose from {sorted(params)}")
        try:
            specs = [ChannelSpec(cfg.channel, **params[cfg.channel])]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cases = oracle_suite(cfg.cutoff or 40, specs, t=(cfg.t or [0.3])[0])
    rows = [{"case": c.name, **{k: c.report[k] for k in ("mean_error", "gamma_error", "entropy_error")},
             "ok": c.ok} for c in cases]
    bad = [r["case"] for r in rows if not r["ok"]]
    _report(cfg, "oracle", {"cases": len(rows), "failures": bad, "breach": bool(bad)}, rows)
    print(f"oracle: {len(rows)} Fock-vs-covariance comparisons, {len(bad)} outside 1e-6")
    return EXIT_BREACH if bad else EXIT_OK


COMMANDS = {
    "bounds": cmd_bounds,
    "epi-test": cmd_epi_test,
    "debruijn": cmd_debruijn,
    "stam": cmd_stam,
    "convexity": cmd_convexity,
    "scurve": cmd_scurve,
    "wigner": cmd_wigner,
    "oracle": cmd_oracle,
}


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qepi", description="Entropy-inequality checks and capacity bounds "
                                                         "for bosonic channels in truncated Fock space.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        s.add_argument("--lambda", dest="lam", type=float)
        s.add_argument("--ne", type=float, help="environment photon number N_E")
        s.add_argument("--nu", type=float, help="classical noise strength")
        s.add_argument("--gain", type=float)
        s.add_argument("--n", type=float, help="signal photon number")
        s.add_argument("--nmax", type=float)
        s.add_argument("--cutoff", type=int)
        s.add_argument("--corpus", type=int, help="corpus size")
        s.add_argument("--seed", type=int)
        s.add_argument("--t", type=_float_list, help="diffusion time(s), comma separated")
        s.add_argument("--sweep", choices=["N", "lambda"])
        s.add_argument("--channel")
        s.add_argument("--x", help="input X: fock:k, thermal:N, coherent:re,im, random:rank:seed")
        s.add_argument("--y", help="input Y, same syntax")
        s.add_argument("--points", type=int)
        s.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./qepi-out)")
        s.add_argument("--format", action="append", choices=["csv", "json", "svg"])
    return p


def resolve(args: argparse.Namespace) -> RunConfig:
    data = load_config(args.config)
    for key in FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    data["command"] = args.command
    data.setdefault("out", os.environ.get(OUT_ENV, "qepi-out"))
    if data.get("format") is None:
        data["format"] = []
    if data.get("t") is not None and not isinstance(data["t"], list):
        data["t"] = [float(data["t"])]
    return RunConfig(**data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        cfg.tol()
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"qepi {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"qepi {args.command}: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
