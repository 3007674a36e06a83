"""Command-line sweep runner.

Usage::

    nmq sweep --config sweep.json [--jobs N] [--out results.csv] [--format csv|json] [--seed S]
    nmq sweep --figure 1 [--out fig1.csv]
    nmq crossover --config sweep.json --measure rhp [--threshold 1e-6]

The configuration is a JSON document::

    {
      "model": {"family": "dephasing_1q", "s": 3.0},
      "sweep_parameter": "s",
      "values": [1.0, 1.5, 2.0, 2.5],
      "window": {"t_start": 0.0, "t_end": 20.0, "grid_points": 2000},
      "measures": ["rhp", "blp", "lfs", "cea", "q"],
      "sampler": {"budget": 100, "seed": 0},
      "normalize": false,
      "analytic_tail": true,
      "output": {"format": "csv", "path": "results.csv"}
    }

Amplitude-damping families take ``"reservoir": "lorentzian"`` (parameters
``r`` and ``detuning``) or ``"pbg"`` (parameter ``z``); the common-bath
family additionally takes ``t_s``.

Exit status: 0 on success, 2 for configuration errors, 3 when some rows
failed (their error strings are written to the ``error`` column).
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import math
import os
import struct
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch
from . import decoherence as deco
from . import measures as ms
from .errors import ConfigError, NMQError, NoCrossing
from .numerics import TimeWindow
from .sampling import PAIR_STRATEGIES, STATE_STRATEGIES, StateSampler

log = logging.getLogger("nmq")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 2, 3
TOP_KEYS = {"model", "sweep_parameter", "values", "window", "measures", "sampler",
            "normalize", "analytic_tail", "output"}
MODEL_KEYS = {"family", "reservoir", "s", "t_s", "r", "detuning", "z"}
WINDOW_KEYS = {"t_start", "t_end", "grid_points"}
SAMPLER_KEYS = {"budget", "seed", "strategies"}
OUTPUT_KEYS = {"format", "path"}
DEPHASING = {"dephasing_1q", "dephasing_2q_independent", "dephasing_2q_common"}
DAMPING = {"amplitude_damping_1q", "amplitude_damping_2q_independent"}


# ---------------------------------------------------------------------------
# configuration

def _check_keys(section, allowed, where):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(unknown)}")


def _legal_parameters(model):
    fam = model.get("family")
    if fam in DEPHASING:
        return {"s", "t_s"} if fam == "dephasing_2q_common" else {"s"}
    if fam in DAMPING:
        res = model.get("reservoir")
        if res == "lorentzian":
            return {"r", "detuning"}
        if res == "pbg":
            return {"z"}
        raise ConfigError("amplitude-damping models need reservoir 'lorentzian' or 'pbg'")
    raise ConfigError(f"unknown model family {fam!r}; choose from {sorted(ch.FAMILIES)}")


def validate_config(cfg):
    """Check a configuration dictionary and fill in defaults; returns a new dict."""
    _check_keys(cfg, TOP_KEYS, "config")
    cfg = copy.deepcopy(cfg)
    model = cfg.get("model")
    if model is None:
        raise ConfigError("config needs a 'model' section")
    _check_keys(model, MODEL_KEYS, "model")
    legal = _legal_parameters(model)
    for key in MODEL_KEYS - {"family", "reservoir"}:
        if key in model and key not in legal:
            raise ConfigError(f"parameter {key!r} does not apply to {model['family']}")
    if model["family"] in DAMPING and model.get("reservoir") is None:
        raise ConfigError("missing reservoir")
    param = cfg.get("sweep_parameter")
    if param not in legal:
        raise ConfigError(f"sweep_parameter {param!r} illegal for this model; allowed {sorted(legal)}")
    values = cfg.get("values")
    if not values or not all(isinstance(v, (int, float)) for v in values):
        raise ConfigError("values must be a non-empty list of numbers")
    values = [float(v) for v in values]
    if values != sorted(values):
        raise ConfigError("values must be sorted ascending")
    cfg["values"] = values
    measures = cfg.get("measures") or []
    if not measures or set(measures) - set(ms.MEASURES):
        raise ConfigError(f"measures must be a non-empty subset of {sorted(ms.MEASURES)}")
    window = cfg.setdefault("window", {})
    _check_keys(window, WINDOW_KEYS, "window")
    sampler = cfg.setdefault("sampler", {})
    _check_keys(sampler, SAMPLER_KEYS, "sampler")
    strategies = sampler.get("strategies")
    if strategies is not None and set(strategies) - set(STATE_STRATEGIES + PAIR_STRATEGIES):
        raise ConfigError(f"unknown sampler strategies {strategies}")
    output = cfg.setdefault("output", {})
    _check_keys(output, OUTPUT_KEYS, "output")
    if output.get("format", "csv") not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")
    cfg.setdefault("normalize", False)
    cfg.setdefault("analytic_tail", True)
    # instantiate one model and window so that domain errors surface early
    try:
        build_model(cfg["model"], param, values[0])
        _window(cfg, build_model(cfg["model"], param, values[0]))
    except NMQError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def build_model(model_cfg, param=None, value=None):
    """Instantiate the channel model with ``param`` set to ``value``."""
    m = dict(model_cfg)
    if param is not None:
        m[param] = value
    fam = m["family"]
    if fam in DEPHASING:
        if "s" not in m:
            raise ConfigError("dephasing models need 's'")
        spec = deco.OhmicSpectrum(float(m["s"]))
        if fam == "dephasing_2q_common":
            if "t_s" not in m:
                raise ConfigError("common-bath model needs 't_s'")
            return ch.Dephasing2QCommon(deco.CommonEnvSpec(spec, float(m["t_s"])))
        return ch.FAMILIES[fam](spec)
    if m.get("reservoir") == "lorentzian":
        if "r" not in m:
            raise ConfigError("Lorentzian reservoir needs 'r'")
        res = deco.LorentzianSpec(float(m["r"]), float(m.get("detuning", 0.0)))
    else:
        if "z" not in m:
            raise ConfigError("band-gap reservoir needs 'z'")
        res = deco.PBGSpec(float(m["z"]))
    return ch.FAMILIES[fam](res)


def _window(cfg, model):
    w = cfg.get("window") or {}
    default = ms.default_window(model)
    return TimeWindow(float(w.get("t_start", default.t_start)), float(w.get("t_end", default.t_end)),
                      int(w.get("grid_points", default.grid_points)))


def row_seed(global_seed: int, value: float) -> int:
    """Per-row seed derived from the global seed and the parameter's bit pattern."""
    bits = int.from_bytes(struct.pack("<d", float(value)), "little")
    return int(np.random.SeedSequence([int(global_seed), bits]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# sweeps

def compute_row(cfg, value, global_seed):
    """Evaluate every requested measure at one parameter value.

    Returns a dict with ``param``, per-measure ``(value, diverged,
    intervals, argmax)`` entries and ``error`` (None on success).
    """
    row = {"param": value, "error": None}
    try:
        model = build_model(cfg["model"], cfg["sweep_parameter"], value)
        window = _window(cfg, model)
        sc = cfg.get("sampler", {})
        kwargs = {"budget": int(sc.get("budget", 100)), "seed": row_seed(global_seed, value)}
        if sc.get("strategies") is not None:
            kwargs["strategies"] = tuple(sc["strategies"])
        sampler = StateSampler(**kwargs)
        tail = bool(cfg.get("analytic_tail", True))
        for name in cfg["measures"]:
            fn = ms.MEASURES[name]
            if name in ms.SAMPLED:
                res = fn(model, window, sampler, analytic_tail=tail)
            else:
                res = fn(model, window, analytic_tail=tail)
            row[name] = {"value": float(res.value), "diverged": bool(res.diverged),
                         "intervals": len(res.intervals), "argmax": res.label or "none"}
    except (NMQError, ArithmeticError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _normalize(rows, measures):
    for name in measures:
        vals = [r[name]["value"] for r in rows if name in r]
        top = max(vals) if vals else 0.0
        for r in rows:
            if name in r:
                r[name]["normalized"] = r[name]["value"] / top if top > 0 else 0.0


def run_sweep(config, jobs: int = 1, seed: int = 0):
    """Compute one row per parameter value, in input order."""
    cfg = validate_config(config)
    values = cfg["values"]
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(compute_row, [cfg] * len(values), values, [seed] * len(values)))
    else:
        rows = [compute_row(cfg, v, seed) for v in values]
    if cfg.get("normalize"):
        _normalize(rows, cfg["measures"])
    return rows


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def rows_to_csv(rows, measures, normalize=False):
    header = ["param"]
    for m in measures:
        header += [f"{m}_value", f"{m}_diverged", f"{m}_intervals", f"{m}_argmax"]
        if normalize:
            header.append(f"{m}_normalized")
    with_errors = any(r["error"] for r in rows)
    if with_errors:
        header.append("error")
    lines = [",".join(header)]
    for r in rows:
        cells = [_fmt(r["param"])]
        for m in measures:
            e = r.get(m)
            if e is None:
                cells += [""] * (5 if normalize else 4)
                continue
            cells += [_fmt(e["value"]), _fmt(e["diverged"]), _fmt(e["intervals"]), e["argmax"]]
            if normalize:
                cells.append(_fmt(e["normalized"]))
        if with_errors:
            cells.append('"' + (r["error"] or "").replace('"', "'") + '"')
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def rows_to_json(rows, cfg):
    return json.dumps({"config": cfg, "rows": rows}, indent=2, sort_keys=True) + "\n"


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def detect_crossover(config, measure: str, threshold: float = 1e-6, seed: int = 0,
                     tol: float = 1e-3) -> float:
    """Parameter value where ``measure`` starts or stops exceeding ``threshold``.

    The sweep values are scanned in order; the first adjacent pair whose
    "exceeds" status differs is bisected until the bracket is below ``tol``.

    Raises
    ------
    NoCrossing
        If every sweep value lies on the same side of the threshold.
    """
    cfg = validate_config(config)
    if measure not in ms.MEASURES:
        raise ConfigError(f"unknown measure {measure!r}")
    cfg["measures"] = [measure]

    def exceeds(v):
        row = compute_row(cfg, v, seed)
        if row["error"]:
            raise NMQError(row["error"])
        return row[measure]["value"] > threshold

    values = cfg["values"]
    status = [exceeds(values[0])]
    for lo, hi in zip(values[:-1], values[1:]):
        s_hi = exceeds(hi)
        if s_hi != status[-1]:
            s_lo = status[-1]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if exceeds(mid) == s_lo:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        status.append(s_hi)
    raise NoCrossing(f"{measure} stays {'above' if status[0] else 'below'} {threshold} over the sweep")


# ---------------------------------------------------------------------------
# figure presets

ALL_MEASURES = ["rhp", "blp", "lfs", "cea", "q"]


def figure_presets(k: int):
    """Preset sweeps as a list of ``(suffix, config)``.

    1: one-qubit Ohmic dephasing over s; 2: common-bath dephasing over s for
    t_s in {0.25, 2, 6}; 3: one-qubit damping over the Lorentzian coupling r
    and over the band-gap detuning z.
    """
    base = {"measures": ALL_MEASURES, "normalize": True, "sampler": {"budget": 100}}
    if k == 1:
        s_vals = [round(x, 4) for x in np.arange(0.5, 5.01, 0.25)]
        return [("", dict(base, model={"family": "dephasing_1q"}, sweep_parameter="s",
                          values=s_vals, window={"t_end": 20.0}))]
    if k == 2:
        s_vals = [round(x, 4) for x in np.concatenate([np.linspace(0.02, 0.2, 10), np.arange(0.5, 5.01, 0.5)])]
        return [(f"_ts{ts}", dict(base, model={"family": "dephasing_2q_common", "t_s": ts},
                                  sweep_parameter="s", values=s_vals, window={"t_end": 20.0}))
                for ts in (0.25, 2.0, 6.0)]
    if k == 3:
        r_vals = [0.1, 0.25, 0.5, 0.75, 1.0, 2.0, 5.0, 10.0, 20.0, 43.0, 50.0]
        z_vals = [round(x, 4) for x in np.arange(-15.0, 2.01, 0.5)]
        return [("_lorentzian", dict(base, model={"family": "amplitude_damping_1q", "reservoir": "lorentzian"},
                                     sweep_parameter="r", values=r_vals, window={"t_end": 40.0})),
                ("_pbg", dict(base, model={"family": "amplitude_damping_1q", "reservoir": "pbg"},
                              sweep_parameter="z", values=z_vals, window={"t_end": 20.0}))]
    raise ConfigError(f"no preset for figure {k}")


# ---------------------------------------------------------------------------
# entry point

def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _resolve_seed(arg_seed, cfg):
    if arg_seed is not None:
        return arg_seed
    if "seed" in cfg.get("sampler", {}):
        return int(cfg["sampler"]["seed"])
    env = os.environ.get("NMQ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"NMQ_SEED must be an integer, got {env!r}") from exc
    return 0


def _summary(rows, measures):
    head = f"{'param':>10} " + " ".join(f"{m:>14}" for m in measures)
    out = [head]
    for r in rows:
        cells = []
        for m in measures:
            if m in r:
                flag = "*" if r[m]["diverged"] else " "
                cells.append(f"{r[m]['value']:>13.6g}{flag}")
            else:
                cells.append(f"{'error':>14}")
        out.append(f"{r['param']:>10.4g} " + " ".join(cells))
    return "\n".join(out)


def _run_one(cfg, args, out_path, fmt):
    seed = _resolve_seed(args.seed, cfg)
    start = time.time()
    rows = run_sweep(cfg, jobs=args.jobs, seed=seed)
    checked = validate_config(cfg)
    text = rows_to_csv(rows, checked["measures"], checked["normalize"]) if fmt == "csv" else rows_to_json(rows, checked)
    if out_path:
        out_path = Path(out_path)
        out_path.write_text(text)
        meta = {"config_sha256": config_hash(checked), "version": __version__, "seed": seed,
                "wall_time_s": round(time.time() - start, 3), "rows": len(rows),
                "failed_rows": sum(1 for r in rows if r["error"])}
        out_path.with_suffix(".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        print(_summary(rows, checked["measures"]))
    else:
        sys.stdout.write(text)
    return any(r["error"] for r in rows)


def build_parser():
    p = argparse.ArgumentParser(prog="nmq", description="Non-Markovianity measure sweeps")
    p.add_argument("--version", action="version", version=f"nmq {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate measures over a parameter grid")
    sw.add_argument("--config", help="JSON sweep configuration")
    sw.add_argument("--figure", type=int, choices=(1, 2, 3), help="use a figure preset")
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--out", help="output path (stdout when omitted)")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--seed", type=int)

    cr = sub.add_parser("crossover", help="locate the onset parameter of a measure")
    cr.add_argument("--config", required=True)
    cr.add_argument("--measure", required=True, choices=sorted(ms.MEASURES))
    cr.add_argument("--threshold", type=float, default=1e-6)
    cr.add_argument("--seed", type=int)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "crossover":
            cfg = _load_config(args.config)
            value = detect_crossover(cfg, args.measure, args.threshold, _resolve_seed(args.seed, cfg))
            print(repr(value))
            return EXIT_OK
        if args.config is None and args.figure is None:
            raise ConfigError("sweep needs --config or --figure")
        if args.figure is not None:
            partial = False
            overrides = _load_config(args.config) if args.config else {}
            for suffix, cfg in figure_presets(args.figure):
                cfg.update({k: v for k, v in overrides.items() if k in ("sampler", "window", "measures")})
                fmt = args.format or "csv"
                out = None
                if args.out:
                    base = Path(args.out)
                    out = base.with_name(base.stem + suffix + base.suffix)
                log.info("figure %d%s: %d values", args.figure, suffix, len(cfg["values"]))
                partial |= _run_one(cfg, args, out, fmt)
            return EXIT_PARTIAL if partial else EXIT_OK
        cfg = _load_config(args.config)
        fmt = args.format or cfg.get("output", {}).get("format", "csv")
        out = args.out or cfg.get("output", {}).get("path")
        return EXIT_PARTIAL if _run_one(cfg, args, out, fmt) else EXIT_OK
    except ConfigError as exc:
        print(f"nmq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoCrossing as exc:
        print(f"nmq: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
