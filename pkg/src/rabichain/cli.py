"""Command-line reports for the band model and the coupled-chain dynamics.

Subcommands write delimited output (CSV by default, JSON on request) and can
render a matplotlib figure next to it with --plot.  Numbers are printed with
17 significant digits so repeated runs are byte-identical.

Exit codes: 0 on success, 1 for usage or configuration problems, 2 when a
computation fails (unstable step, lost line, off-resonance request, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict
from functools import partial
from pathlib import Path

import numpy as np

from .config import AnalysisSpec, ConfigError, RunConfig, load_config
from .rabi_dynamics import (
    AmplitudeField,
    IntegratorFailure,
    InversionTrace,
    NonResonantError,
    evolve_lattice,
    rabi_frequency,
)
from .spectra import (
    DegenerateFitError,
    NonUniformGridError,
    PeakNotFoundError,
    classify_revival,
    compare_catalog,
    detect_peaks,
    linearity_scan,
    load_catalog,
    measure_principal_frequency,
    spectrum_of,
)
from .ssh_band import (
    BranchSelector,
    DegeneratePointError,
    QuadratureError,
    SSHParams,
    dispersion,
    find_dimerization_minima,
    ground_state_energy_elliptic,
    ground_state_energy_integral,
    ground_state_energy_smallz,
    quasiparticle_energy,
)

__all__ = ["main"]

_USAGE_ERRORS = (ConfigError, FileNotFoundError, IsADirectoryError)
_NUMERIC_ERRORS = (IntegratorFailure, NonResonantError, PeakNotFoundError,
                   DegenerateFitError, QuadratureError, DegeneratePointError,
                   NonUniformGridError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; these tools reserve 2 for
    numerical failures, so remap."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _resolve_output(name: str | None, default: str) -> Path:
    raw = name if name is not None else default
    path = Path(raw)
    env_dir = os.environ.get("RABICHAIN_OUTPUT_DIR")
    if env_dir and not path.is_absolute() and path.parent == Path("."):
        path = Path(env_dir) / path
    return path


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _figure_path(out: Path) -> Path:
    return out.with_suffix(".png")


def _peak_dict(p):
    return {"omega": p.omega, "height": p.height, "fwhm": p.fwhm,
            "prominence": p.prominence}


def _load_run_config(args) -> RunConfig:
    if getattr(args, "config", None) is None:
        return RunConfig()
    return load_config(args.config)


def _require_system(run: RunConfig):
    if run.system is None:
        raise ConfigError("this command needs a config file with a 'system' section")
    return run.system


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _ssh_params(args, run: RunConfig) -> SSHParams:
    if run.ssh is not None:
        params = run.ssh
        if args.t0 is not None or args.alpha is not None or args.stiffness is not None:
            raise ConfigError("give the band parameters either in the config "
                              "file or as flags, not both")
        return params
    missing = [n for n, v in (("--t0", args.t0), ("--alpha", args.alpha),
                              ("--stiffness", args.stiffness)) if v is None]
    if missing:
        raise ConfigError(f"band parameters missing: {' '.join(missing)} "
                          "(or use --config with an 'ssh' section)")
    return SSHParams(t0=args.t0, alpha=args.alpha, K=args.stiffness,
                     a=args.spacing, N=args.cells)


def _cmd_band(args) -> int:
    run = _load_run_config(args)
    params = _ssh_params(args, run)
    branch = BranchSelector(args.branch)
    edge = np.pi / (2.0 * params.a)
    k = np.linspace(-edge, edge, args.num_k)
    eps, delta, _ = dispersion(params, k, args.u)
    energy, _valence = quasiparticle_energy(params, k, args.u, branch)
    out = _resolve_output(args.output, "band.csv")
    if args.format == "csv":
        _write_csv(out, "k,epsilon,delta,E",
                   zip(k, eps, delta, energy))
    else:
        _write_json(out, {"k": list(k), "epsilon": list(eps),
                          "delta": list(delta), "E": list(energy),
                          "branch": branch.value, "u": args.u,
                          "params": asdict(params), "seed": args.seed})
    if args.plot:
        from .plotting import save_band_figure
        save_band_figure(_figure_path(out), k, eps, delta, energy,
                         branch=branch.value)
    print(f"wrote {out} ({args.num_k} k-points, {branch.value} branch, u={args.u:g})")
    return 0


def _cmd_groundstate(args) -> int:
    run = _load_run_config(args)
    params = _ssh_params(args, run)
    u_max = args.u_max
    if u_max is None:
        u_max = 0.9 * params.t0 / (2.0 * params.alpha)
    evaluator = {
        "elliptic": ground_state_energy_elliptic,
        "quadrature": ground_state_energy_integral,
        "smallz": ground_state_energy_smallz,
    }[args.method]
    u = np.linspace(-u_max, u_max, args.num_u)
    energy = np.array([evaluator(params, ui) for ui in u])
    minima = find_dimerization_minima(params, u_max=u_max)
    out = _resolve_output(args.output, "groundstate.csv")
    if args.format == "csv":
        _write_csv(out, "u,energy", zip(u, energy))
    else:
        _write_json(out, {"u": list(u), "energy": list(energy),
                          "method": args.method, "params": asdict(params),
                          "minima": {"dimerized": minima.dimerized,
                                     "u_plus": minima.u_plus,
                                     "u_minus": minima.u_minus,
                                     "energy": minima.energy},
                          "seed": args.seed})
    if args.plot:
        from .plotting import save_groundstate_figure
        save_groundstate_figure(_figure_path(out), u, energy, minima)
    if minima.dimerized:
        depth = evaluator(params, 0.0) - minima.energy
        print(f"wrote {out}; dimerized minima at u = +/-{minima.u_plus:.6g} "
              f"(depth {depth:.6g})")
    else:
        print(f"wrote {out}; energy is minimized at u = 0 (no dimerization)")
    return 0


def _run_trace(args, run: RunConfig) -> tuple[InversionTrace, AmplitudeField]:
    cfg = _require_system(run)
    spec = run.initial
    ana = run.analysis
    t_end = args.t_end if args.t_end is not None else ana.t_end
    dt = args.dt if args.dt is not None else ana.dt
    record_every = (args.record_every if args.record_every is not None
                    else ana.record_every)
    init = AmplitudeField.gaussian_packet(cfg, m0=spec.m0, sigma=spec.sigma,
                                          k0=spec.k0, chain=spec.chain)
    res = evolve_lattice(cfg, init, t_end=t_end, dt=dt,
                         record_every=record_every)
    return res.trace, res.final


def _cmd_evolve(args) -> int:
    run = _load_run_config(args)
    trace, final = _run_trace(args, run)
    n = trace.per_chain.shape[1]
    out = _resolve_output(args.output, "evolve.csv")
    header = "t,W_total," + ",".join(f"W_{j}" for j in range(n))
    rows = (np.concatenate([[t], [w], pc]) for t, w, pc in
            zip(trace.times, trace.total, trace.per_chain))
    if args.format == "csv":
        _write_csv(out, header, rows)
    else:
        _write_json(out, {"times": list(trace.times), "W_total": list(trace.total),
                          "W_per_chain": [list(r) for r in trace.per_chain],
                          "final_norm": final.norm(), "seed": args.seed})
    if args.plot:
        from .plotting import save_trace_figure
        save_trace_figure(_figure_path(out), trace)
    print(f"wrote {out} ({trace.times.size} samples, final norm {final.norm():.12g})")
    return 0


def _trace_from_csv(path) -> InversionTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 2:
        raise ConfigError(f"{path}: expected at least two columns (t, W_total)")
    per_chain = data[:, 2:] if data.shape[1] > 2 else data[:, 1:2]
    return InversionTrace(times=data[:, 0], total=data[:, 1],
                          per_chain=per_chain)


def _obtain_trace(args, run: RunConfig) -> InversionTrace:
    if args.input is not None:
        return _trace_from_csv(args.input)
    if getattr(args, "config", None) is None:
        raise ConfigError("need either --input (a trace CSV) or --config")
    trace, _ = _run_trace(args, run)
    return trace


def _spectral_settings(args, ana: AnalysisSpec):
    window = args.window if args.window is not None else ana.window
    pad = args.pad_factor if args.pad_factor is not None else ana.pad_factor
    prom = args.prominence if args.prominence is not None else ana.prominence_frac
    sep = args.min_separation if args.min_separation is not None else ana.min_separation
    return window, pad, prom, sep


def _cmd_spectrum(args) -> int:
    run = _load_run_config(args)
    trace = _obtain_trace(args, run)
    window, pad, prom, sep = _spectral_settings(args, run.analysis)
    spec = spectrum_of(trace, window=window, pad_factor=pad)
    peaks = detect_peaks(spec, prominence_frac=prom, min_separation=sep)
    out = _resolve_output(args.output, "spectrum.csv")
    if args.format == "csv":
        _write_csv(out, "omega,magnitude", zip(spec.omega, spec.magnitude))
    else:
        _write_json(out, {"omega": list(spec.omega),
                          "magnitude": list(spec.magnitude),
                          "window": spec.window, "pad_factor": spec.pad_factor,
                          "peaks": [_peak_dict(p) for p in peaks],
                          "seed": args.seed})
    if args.plot:
        from .plotting import save_spectrum_figure
        save_spectrum_figure(_figure_path(out), spec, peaks)
    print(f"wrote {out} ({spec.omega.size} bins)")
    for p in peaks:
        print(f"peak omega={p.omega:.8g} height={p.height:.6g} fwhm={p.fwhm:.4g}")
    return 0


def _cmd_classify(args) -> int:
    run = _load_run_config(args)
    trace = _obtain_trace(args, run)
    window, pad, prom, sep = _spectral_settings(args, run.analysis)
    if args.fundamental is not None:
        fundamental = args.fundamental
    elif run.system is not None:
        fundamental = rabi_frequency(run.system)
    else:
        raise ConfigError("no reference frequency: give --fundamental or a "
                          "config with a 'system' section")
    spec = spectrum_of(trace, window=window, pad_factor=pad)
    peaks = detect_peaks(spec, prominence_frac=prom, min_separation=sep)
    report = classify_revival(peaks, fundamental,
                              window_frac=run.analysis.window_frac)
    out = _resolve_output(args.output, "classify.csv")
    if args.format == "csv":
        rows = []
        if report.principal is not None:
            rows.append(("principal", report.principal))
        rows.extend(("revival", p) for p in report.revivals)
        rows.extend(("other", p) for p in report.others)
        lines = ["role,omega,height,fwhm"]
        lines.extend(f"{role},{_fmt(p.omega)},{_fmt(p.height)},{_fmt(p.fwhm)}"
                     for role, p in rows)
        _atomic_write(out, "\n".join(lines) + "\n")
    else:
        _write_json(out, {
            "found": report.found,
            "fundamental": report.fundamental,
            "window_frac": report.window_frac,
            "principal": None if report.principal is None
            else _peak_dict(report.principal),
            "revivals": [_peak_dict(p) for p in report.revivals],
            "others": [_peak_dict(p) for p in report.others],
            "message": report.message,
            "seed": args.seed,
        })
    if args.plot:
        from .plotting import save_spectrum_figure
        save_spectrum_figure(_figure_path(out), spec, peaks,
                             fundamental=fundamental)
    print(f"wrote {out}; {report.message}")
    return 0


def _cmd_compare(args) -> int:
    run = _load_run_config(args)
    trace = _obtain_trace(args, run)
    window, pad, prom, sep = _spectral_settings(args, run.analysis)
    spec = spectrum_of(trace, window=window, pad_factor=pad)
    peaks = detect_peaks(spec, prominence_frac=prom, min_separation=sep)
    catalog = load_catalog()
    try:
        entry = catalog[args.entry]
    except KeyError:
        raise ConfigError(f"unknown catalog entry {args.entry!r}; "
                          f"choose from {sorted(catalog.entries)}") from None
    scale = args.scale if args.scale is not None else run.analysis.scale
    extra = (args.extra_tolerance if args.extra_tolerance is not None
             else run.analysis.extra_tolerance)
    report = compare_catalog(peaks, entry, scale=scale, extra_tolerance=extra)
    out = _resolve_output(args.output, "compare.csv")
    if args.format == "csv":
        _write_csv(out, "line_center,line_uncertainty,peak_center,delta,tolerance",
                   ((m.line.center, m.line.uncertainty or 0.0, m.peak_center,
                     m.delta, m.tolerance) for m in report.matched))
    else:
        _write_json(out, {
            "entry": entry.name, "scale": scale,
            "matched": [{"line_center": m.line.center,
                         "line_uncertainty": m.line.uncertainty,
                         "peak_center": m.peak_center, "delta": m.delta,
                         "tolerance": m.tolerance} for m in report.matched],
            "unmatched_lines": [l.center for l in report.unmatched_lines],
            "unmatched_peaks": list(report.unmatched_peaks),
            "match_fraction": report.match_fraction(),
            "seed": args.seed,
        })
    total = len(report.matched) + len(report.unmatched_lines)
    print(f"wrote {out}; matched {len(report.matched)}/{total} catalog lines "
          f"({entry.name})")
    return 0


def _cmd_linearity(args) -> int:
    run = _load_run_config(args)
    cfg = _require_system(run)
    spec, ana = run.initial, run.analysis
    if args.g_values is not None:
        g_values = tuple(float(v) for v in args.g_values.split(","))
    elif ana.g_values:
        g_values = ana.g_values
    else:
        raise ConfigError("no sweep points: give --g-values or analysis.g_values")
    t_end = args.t_end if args.t_end is not None else ana.t_end
    dt = args.dt if args.dt is not None else ana.dt
    if dt is None:
        raise ConfigError("the coupling sweep needs an explicit dt "
                          "(flag --dt or analysis.dt)")
    record_every = (args.record_every if args.record_every is not None
                    else ana.record_every)
    measure = partial(measure_principal_frequency, cfg, sigma=spec.sigma,
                      k0=spec.k0, m0=spec.m0, chain=spec.chain, t_end=t_end,
                      dt=dt, record_every=record_every, window=ana.window,
                      pad_factor=ana.pad_factor,
                      prominence_frac=ana.prominence_frac)
    if args.jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(args.jobs) as pool:
            report = linearity_scan(g_values, measure, map_fn=pool.map)
    else:
        report = linearity_scan(g_values, measure)
    out = _resolve_output(args.output, "linearity.csv")
    if args.format == "csv":
        _write_csv(out, "g,omega", zip(report.g_values, report.omegas))
    else:
        _write_json(out, {"g": list(report.g_values),
                          "omega": list(report.omegas),
                          "slope": report.fit.slope,
                          "intercept": report.fit.intercept,
                          "r_squared": report.fit.r_squared,
                          "failures": [{"g": g, "reason": m}
                                       for g, m in report.failures],
                          "seed": args.seed})
    if args.plot:
        from .plotting import save_linearity_figure
        save_linearity_figure(_figure_path(out), report)
    print(f"wrote {out}; slope={report.fit.slope:.8g} "
          f"intercept={report.fit.intercept:.6g} "
          f"r_squared={report.fit.r_squared:.8f}")
    for g, msg in report.failures:
        print(f"sweep point g={g:g} failed: {msg}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------

def _add_io(p: argparse.ArgumentParser):
    p.add_argument("--output", help="output file (default: <command>.csv; a bare "
                   "name lands in $RABICHAIN_OUTPUT_DIR when that is set)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", action="store_true",
                   help="also render a figure next to the output file")
    p.add_argument("--seed", type=int, default=None,
                   help="recorded in JSON output for provenance; the "
                   "computations themselves are deterministic")


def _add_band_params(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config with an 'ssh' section")
    p.add_argument("--t0", type=float, help="hopping energy scale")
    p.add_argument("--alpha", type=float, help="gap-per-displacement coefficient")
    p.add_argument("--stiffness", type=float, help="elastic constant")
    p.add_argument("--spacing", type=float, default=1.0, help="lattice constant")
    p.add_argument("--cells", type=int, default=1, help="cell count prefactor")


def _add_trace_source(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config with 'system' (and optionally "
                   "'initial'/'analysis') sections")
    p.add_argument("--input", help="trace CSV produced by the evolve command")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--record-every", type=int, default=None)


def _add_spectral(p: argparse.ArgumentParser):
    p.add_argument("--window", choices=("hann", "none"), default=None)
    p.add_argument("--pad-factor", type=int, default=None)
    p.add_argument("--prominence", type=float, default=None,
                   help="relative prominence floor for line detection")
    p.add_argument("--min-separation", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabichain",
                     description="Band structure and coupled-chain Rabi "
                                 "dynamics reports.")
    sub = parser.add_subparsers(dest="command", required=True,
                               parser_class=_Parser)

    p = sub.add_parser("band",
                       help="quasiparticle dispersions over the reduced zone")
    _add_band_params(p)
    p.add_argument("--u", type=float, default=0.1, help="dimerization displacement")
    p.add_argument("--branch", choices=("ssh", "additional"), default="ssh")
    p.add_argument("--num-k", type=int, default=256)
    _add_io(p)
    p.set_defaults(func=_cmd_band)

    p = sub.add_parser("groundstate",
                       help="continuum ground-state energy vs dimerization")
    _add_band_params(p)
    p.add_argument("--u-max", type=float, default=None)
    p.add_argument("--num-u", type=int, default=201)
    p.add_argument("--method", choices=("elliptic", "quadrature", "smallz"),
                   default="elliptic")
    _add_io(p)
    p.set_defaults(func=_cmd_groundstate)

    p = sub.add_parser("evolve",
                       help="integrate a wave packet and record the inversion")
    _add_trace_source(p)
    _add_io(p)
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("spectrum",
                       help="line spectrum of an inversion trace")
    _add_trace_source(p)
    _add_spectral(p)
    _add_io(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("classify",
                       help="split detected lines into principal/revival/other")
    _add_trace_source(p)
    _add_spectral(p)
    p.add_argument("--fundamental", type=float, default=None,
                   help="reference frequency (default 2 g sqrt(l+1) from config)")
    _add_io(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("compare",
                       help="match detected lines against the bundled catalog")
    _add_trace_source(p)
    _add_spectral(p)
    p.add_argument("--entry", default="cu_unimplanted_side")
    p.add_argument("--scale", type=float, default=None,
                   help="factor from model frequency to catalog units")
    p.add_argument("--extra-tolerance", type=float, default=None)
    _add_io(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("linearity",
                       help="principal-line frequency vs coupling sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--g-values", default=None,
                   help="comma-separated coupling values")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1,
                   help="process count for the sweep (results are ordered "
                   "either way)")
    _add_io(p)
    p.set_defaults(func=_cmd_linearity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERIC_ERRORS as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
