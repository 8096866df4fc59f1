"""Command-line front end.

    rydbeat simulate trace|spectrogram|fringes [--config c.json] [--seed N] [-o DIR]
    rydbeat fit lifetime|fringe|coherence INPUT... [options]
    rydbeat beats TRACE.csv [--state 4S] [--catalog c.json] [-o DIR]
    rydbeat reproduce [--scope all] [--seed N] [-o DIR]

Exit codes: 0 success, 1 validation or acceptance failure, 2 usage or parse
failure.  Every simulate run writes a sidecar ``*.config.json`` with the
fully resolved configuration (defaults and seed included); feeding that file
back reproduces the run byte for byte.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .beats import beat_report
from .catalog import StateCatalog, default_catalog, parse_label
from .constants import FWHM_TO_SIGMA
from .dataio import (
    read_fringe_csv,
    read_json,
    read_trace_csv,
    write_fringe_csv,
    write_json,
    write_spectrogram_csv,
    write_trace_csv,
)
from .emitters import (
    DEFAULT_ENERGY_FWHM,
    DEFAULT_TIME_FWHM,
    Emitter,
    EmitterSet,
    InstrumentResponse,
    emitters_from_catalog,
)
from .errors import ConfigError, NotFoundError, ParseError, RydbeatError
from .fitting.pipelines import (
    analyze_fringe_stack,
    fit_fringe_slice,
    fit_lifetime,
    validate_t2_bound,
)
from .reproduce import DEFAULT_SEED, run_reproduction
from .signals import FringeGeometry, add_noise, fringe_image, intensity_trace, spectrogram

DEFAULT_CONFIG = {
    "catalog": "embedded",
    "emitters": [{"state": "3S", "amplitude": 1.0, "phase": 0.0}],
    "emitter_reference": "2P",
    "use_split_overrides": True,
    "cross_visibility": 1.0,
    "pure_dephasing_rate": 0.0,
    "shg_prompt_amplitude": 0.0,
    "instrument": {"time_fwhm_ps": DEFAULT_TIME_FWHM,
                   "energy_fwhm_mev": DEFAULT_ENERGY_FWHM},
    "time_grid_ps": {"start": 0.0, "stop": 120.0, "step": 0.1},
    "energy_grid_mev": None,  # defaults to the emitter energies +- 1.5 meV
    "channel": None,
    "noise": None,
    "seed": 0,
    "fringes": {
        "delays_ps": {"start": 0.0, "stop": 15.0, "step": 1.0},
        "geometry": {"x0": 200.0, "sigma_x": 85.0, "k": 0.35, "phi": 0.0,
                     "n_pixels": 400},
        "channel_fwhm_mev": DEFAULT_ENERGY_FWHM,
    },
    "analysis": {"window": "hann", "pad_factor": 4, "min_prominence": 0.05,
                 "tolerance_mev": 0.12, "state": None,
                 "detrend": "emg_residual", "moving_mean_width_ps": None,
                 "window_start_ps": None},
}


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _merge(defaults, override, path="config"):
    if override is None:
        return copy.deepcopy(defaults)
    if isinstance(defaults, dict):
        if not isinstance(override, dict):
            raise ConfigError(f"{path}: expected an object")
        merged = copy.deepcopy(defaults)
        for key, value in override.items():
            if key not in defaults:
                raise ConfigError(f"{path}.{key}: unknown field")
            if isinstance(defaults[key], dict) and isinstance(value, dict):
                merged[key] = _merge(defaults[key], value, f"{path}.{key}")
            else:
                merged[key] = copy.deepcopy(value)
        return merged
    return copy.deepcopy(override)


def resolve_config(config_path=None, seed=None):
    """Merge a user config file over the defaults; seed always ends explicit."""
    user = {}
    if config_path is not None:
        user = read_json(config_path)
        if not isinstance(user, dict):
            raise ParseError(f"{config_path}: top level must be a JSON object")
        user.pop("kind", None)
        user.pop("outputs", None)
    cfg = _merge(DEFAULT_CONFIG, user)
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def load_catalog(cfg) -> StateCatalog:
    source = cfg.get("catalog", "embedded")
    if source == "embedded":
        env = os.environ.get("RYDBEAT_CATALOG")
        if env:
            source = env
        else:
            return default_catalog()
    if not Path(source).is_file():
        raise ConfigError(f"catalog: file not found: {source}")
    return StateCatalog.load(source)


def _grid_from_spec(spec, path):
    if isinstance(spec, dict):
        try:
            start, stop, step = spec["start"], spec["stop"], spec["step"]
        except KeyError as exc:
            raise ConfigError(f"{path}: missing {exc}") from None
        if step <= 0 or stop <= start:
            raise ConfigError(f"{path}: need stop > start and step > 0")
        n = int(round((stop - start) / step)) + 1
        return start + step * np.arange(n)
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    raise ConfigError(f"{path}: expected start/stop/step or a list")


def _build_emitter_set(cfg, catalog) -> EmitterSet:
    entries = cfg["emitters"]
    if not entries:
        raise ConfigError("emitters: need at least one entry")
    set_kwargs = {
        "cross_visibility": cfg["cross_visibility"],
        "pure_dephasing_rate": cfg["pure_dephasing_rate"],
        "shg_prompt_amplitude": cfg["shg_prompt_amplitude"],
    }
    states, amps, phases, explicit = [], [], [], []
    for i, entry in enumerate(entries):
        if "state" in entry and entry["state"] is not None:
            states.append(entry["state"])
            amps.append(float(entry.get("amplitude", 1.0)))
            phases.append(float(entry.get("phase", 0.0)))
        else:
            try:
                explicit.append(Emitter(
                    energy=float(entry["energy_mev"]),
                    lifetime=float(entry["lifetime_ps"]),
                    amplitude=float(entry.get("amplitude", 1.0)),
                    phase=float(entry.get("phase", 0.0)),
                ))
            except KeyError as exc:
                raise ConfigError(f"emitters[{i}]: missing {exc}") from None
    if states:
        base = emitters_from_catalog(
            catalog, states, amps, phases,
            reference=cfg["emitter_reference"],
            use_split_overrides=cfg["use_split_overrides"],
            **set_kwargs,
        )
        return base.with_(emitters=base.emitters + tuple(explicit))
    return EmitterSet(emitters=tuple(explicit), **set_kwargs)


def _apply_noise(signal, cfg, seed_offset=0):
    noise = cfg["noise"]
    if noise is None:
        return signal
    kind = noise.get("kind")
    if kind == "poisson":
        scale = noise.get("scale")
        if scale is None and noise.get("peak_counts"):
            peak = signal.intensity.max()
            if peak <= 0:
                raise ConfigError("noise.peak_counts: signal has no positive peak")
            scale = float(noise["peak_counts"]) / peak
        if scale is None:
            raise ConfigError("noise: poisson needs 'scale' or 'peak_counts'")
        return add_noise(signal, ("poisson", scale), cfg["seed"] + seed_offset)
    if kind == "gaussian":
        if noise.get("sigma") is None:
            raise ConfigError("noise: gaussian needs 'sigma'")
        return add_noise(signal, ("gaussian", float(noise["sigma"])),
                         cfg["seed"] + seed_offset)
    raise ConfigError(f"noise.kind: unknown kind {kind!r}")


def _resolve_energy_grid(cfg, emitter_set):
    """Fill a missing energy grid from the emitter energies; the resolved
    values go into the sidecar so reruns see explicit numbers."""
    if cfg["energy_grid_mev"] is None:
        energies = [em.energy for em in emitter_set.emitters]
        cfg["energy_grid_mev"] = {
            "start": round(min(energies) - 1.5, 6),
            "stop": round(max(energies) + 1.5, 6),
            "step": 0.05,
        }
    return _grid_from_spec(cfg["energy_grid_mev"], "energy_grid_mev")


def _instrument(cfg) -> InstrumentResponse:
    inst = cfg["instrument"]
    try:
        return InstrumentResponse(time_fwhm=float(inst["time_fwhm_ps"]),
                                  energy_fwhm=float(inst["energy_fwhm_mev"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"instrument: {exc}") from None


def _channel(cfg):
    channel = cfg["channel"]
    if channel is None:
        return None
    try:
        return (float(channel["center_mev"]),
                float(channel["fwhm_mev"]) / FWHM_TO_SIGMA)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"channel: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    cfg = resolve_config(args.config, args.seed)
    catalog = load_catalog(cfg)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    emitter_set = _build_emitter_set(cfg, catalog)
    irf = _instrument(cfg)
    outputs = []

    if args.kind == "trace":
        grid = _grid_from_spec(cfg["time_grid_ps"], "time_grid_ps")
        trace = intensity_trace(emitter_set, grid, channel=_channel(cfg), irf=irf)
        trace = _apply_noise(trace, cfg)
        path = outdir / "trace.csv"
        write_trace_csv(trace, path)
        outputs.append(path.name)
    elif args.kind == "spectrogram":
        t = _grid_from_spec(cfg["time_grid_ps"], "time_grid_ps")
        e = _resolve_energy_grid(cfg, emitter_set)
        spec = spectrogram(emitter_set, t, e, irf=irf)
        spec = _apply_noise(spec, cfg)
        path = outdir / "spectrogram.csv"
        write_spectrogram_csv(spec, path)
        outputs.append(path.name)
    elif args.kind == "fringes":
        fr = cfg["fringes"]
        delays = _grid_from_spec(fr["delays_ps"], "fringes.delays_ps")
        geo = fr["geometry"]
        geometry = FringeGeometry(x0=float(geo["x0"]), sigma_x=float(geo["sigma_x"]),
                                  k=float(geo["k"]), phi=float(geo.get("phi", 0.0)),
                                  n_pixels=int(geo.get("n_pixels", 400)))
        e = _resolve_energy_grid(cfg, emitter_set)
        for i, delay in enumerate(delays):
            image = fringe_image(emitter_set, float(delay), geometry, e,
                                 float(fr["channel_fwhm_mev"]))
            image = _apply_noise(image, cfg, seed_offset=i)
            path = outdir / f"fringes_delay_{delay:.3f}ps.csv"
            write_fringe_csv(image, path)
            outputs.append(path.name)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown simulate kind {args.kind!r}")

    sidecar = dict(cfg)
    sidecar["kind"] = args.kind
    sidecar["outputs"] = outputs
    sidecar_path = outdir / f"{args.kind}.config.json"
    write_json(sidecar, sidecar_path)
    print(f"wrote {len(outputs)} file(s) and {sidecar_path.name} to {outdir}")
    return 0


def _emit_fit_json(result_obj, output):
    text = json.dumps(result_obj, indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    else:
        print(text)


def _failed_fit_obj(model, exc):
    return {"model": model, "params": {}, "sigmas": {}, "chi2_reduced": None,
            "converged": False, "flags": ["fit-failed", str(exc)]}


def cmd_fit(args):
    if args.kind == "lifetime":
        trace = read_trace_csv(args.inputs[0])
        try:
            result = fit_lifetime(
                trace,
                irf_hint=None if args.irf_free else args.irf_fwhm,
                fix_sigma=args.fix_sigma,
                fit_prompt=args.fit_prompt,
                weighting=None if args.unweighted else "poisson",
            )
            _emit_fit_json(result.to_json_obj(), args.output)
        except RydbeatError as exc:
            _emit_fit_json(_failed_fit_obj("emg", exc), args.output)
        return 0

    if args.kind == "fringe":
        image = read_fringe_csv(args.inputs[0])
        if args.energy is not None:
            row = image.row(args.energy)
        else:
            row = image.intensity[:, int(np.argmax(image.intensity.max(axis=0)))]
        try:
            result = fit_fringe_slice(row)
            _emit_fit_json(result.to_json_obj(), args.output)
        except RydbeatError as exc:
            _emit_fit_json(_failed_fit_obj("fringe", exc), args.output)
        return 0

    # coherence: stack of fringe images via sidecar, directory, or file list
    images = _load_fringe_stack(args.inputs)
    try:
        coherence = analyze_fringe_stack(images, shape=args.shape)
    except RydbeatError as exc:
        _emit_fit_json({"channels": [], "best": None,
                        "flags": ["pipeline-failed", str(exc)]}, args.output)
        return 0
    obj = {"channels": [], "best": None}
    for i, ch in enumerate(coherence.channels):
        entry = {
            "energy_mev": ch.energy,
            "amplitude": ch.amplitude,
            "contrasts": [float(c) for c in ch.contrasts],
            "delays_ps": [float(d) for d in ch.delays],
        }
        if ch.decay is not None:
            entry["decay"] = ch.decay.to_json_obj()
            entry["t2_ps"] = ch.decay.params["T2"]
            entry["t2_err_ps"] = ch.decay.sigmas["T2"]
        else:
            entry["error"] = ch.error
        obj["channels"].append(entry)
        if i == coherence.best_index:
            obj["best"] = entry
    if args.t1 is not None and coherence.best.decay is not None:
        obj["t2_bound"] = validate_t2_bound(coherence.best.decay, args.t1)
    _emit_fit_json(obj, args.output)
    return 0


_DELAY_RE = re.compile(r"delay_([-+0-9.eE]+)ps")


def _load_fringe_stack(inputs):
    paths = []
    if len(inputs) == 1 and inputs[0].endswith(".json"):
        sidecar = read_json(inputs[0])
        base = Path(inputs[0]).parent
        names = sidecar.get("outputs")
        if not names:
            raise ParseError(f"{inputs[0]}: sidecar lists no outputs")
        paths = [base / name for name in names]
    elif len(inputs) == 1 and Path(inputs[0]).is_dir():
        paths = sorted(Path(inputs[0]).glob("fringes_delay_*ps.csv"))
        if not paths:
            raise ParseError(f"{inputs[0]}: no fringes_delay_*ps.csv files found")
    else:
        paths = [Path(p) for p in inputs]
    images = []
    for path in paths:
        m = _DELAY_RE.search(path.name)
        if not m:
            raise ParseError(f"{path}: cannot infer the delay from the filename "
                             "(expected ..._delay_<ps>ps.csv)")
        images.append(read_fringe_csv(path, delay=float(m.group(1))))
    return images


def cmd_beats(args):
    trace = read_trace_csv(args.trace)
    cfg = resolve_config(args.config, None)
    if args.catalog:
        cfg["catalog"] = args.catalog
    catalog = load_catalog(cfg)
    analysis = cfg["analysis"]
    state = args.state if args.state is not None else analysis["state"]
    if state is not None:
        sid = parse_label(state)
        if not any(r.id.n == sid.n and r.id.series == sid.series
                   for r in catalog.records):
            raise NotFoundError(f"state {state!r} has no catalog entry")
    report = beat_report(
        trace, catalog, state=state,
        detrend_method=analysis["detrend"],
        moving_mean_width=analysis["moving_mean_width_ps"],
        window=analysis["window"],
        pad_factor=int(analysis["pad_factor"]),
        min_prominence=float(analysis["min_prominence"]),
        tolerance=float(analysis["tolerance_mev"]),
        window_start=analysis["window_start_ps"],
    )
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    report.spectrum.save_csv(outdir / "spectrum.csv")
    write_json(report.to_json_obj(), outdir / "beats.json")
    (outdir / "beats.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    return 0


def cmd_reproduce(args):
    report = run_reproduction(scope=args.scope, seed=args.seed)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    write_json(report.to_json_obj(), outdir / "reproduce_report.json")
    (outdir / "reproduce_report.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    return 0 if report.n_failed == 0 else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="rydbeat",
        description="Simulate and analyze Rydberg-exciton decay, beats and coherence.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="synthesize a trace, spectrogram or fringe stack")
    p_sim.add_argument("kind", choices=["trace", "spectrogram", "fringes"])
    p_sim.add_argument("--config", help="JSON run config (defaults apply otherwise)")
    p_sim.add_argument("--seed", type=int, help="override the config seed")
    p_sim.add_argument("-o", "--output", default=".", help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a lifetime, a fringe slice, or a coherence stack")
    p_fit.add_argument("kind", choices=["lifetime", "fringe", "coherence"])
    p_fit.add_argument("inputs", nargs="+", help="input file(s): trace CSV, fringe CSV, "
                       "or a fringe-stack sidecar/directory")
    p_fit.add_argument("-o", "--output", help="write the result JSON here (default stdout)")
    p_fit.add_argument("--irf-fwhm", type=float, default=DEFAULT_TIME_FWHM,
                       help="instrument response FWHM hint in ps")
    p_fit.add_argument("--irf-free", action="store_true",
                       help="ignore the hint; start the response width at 1 ps")
    p_fit.add_argument("--fix-sigma", action="store_true",
                       help="pin the response width to the hint")
    p_fit.add_argument("--fit-prompt", action="store_true",
                       help="include a prompt spike at t0 in the decay fit")
    p_fit.add_argument("--unweighted", action="store_true",
                       help="disable Poisson weighting for trace fits")
    p_fit.add_argument("--energy", type=float,
                       help="fringe: energy (meV) of the row to fit")
    p_fit.add_argument("--shape", choices=["exponential", "gaussian"],
                       default="exponential", help="coherence: contrast decay shape")
    p_fit.add_argument("--t1", type=float,
                       help="coherence: lifetime (ps) to validate T2 <= 2*T1 against")
    p_fit.set_defaults(func=cmd_fit)

    p_beats = sub.add_parser("beats", help="beat spectrum, peaks and assignments of a trace")
    p_beats.add_argument("trace", help="time-trace CSV")
    p_beats.add_argument("--state", help="state label the trace belongs to (e.g. 4S)")
    p_beats.add_argument("--catalog", help="catalog JSON overriding the embedded one")
    p_beats.add_argument("--config", help="run config supplying analysis options")
    p_beats.add_argument("-o", "--output", default=".", help="output directory")
    p_beats.set_defaults(func=cmd_beats)

    p_rep = sub.add_parser("reproduce", help="self-contained simulate-and-recover checks")
    p_rep.add_argument("--scope", choices=["lifetimes", "beats", "coherence", "all"],
                       default="all")
    p_rep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_rep.add_argument("-o", "--output", default=".", help="output directory")
    p_rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RydbeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
