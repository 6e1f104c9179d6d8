"""Stationary spectra from time-dependent inversion traces.

The chain here is: record W(t), remove the mean, window, zero-pad, take the
real FFT, and read line positions off the magnitude with sub-bin parabolic
refinement.  Line classification is relative to the single-site frequency
2 g sqrt(l+1): the principal line sits inside a fractional window around it
and revival lines sit above the window.  Measured line positions can be
scaled to wavenumbers and matched against a bundled reference catalog.

Peak heights are normalized so a unit-amplitude cosine produces a line of
height close to one regardless of window or padding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import partial
from importlib import resources

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .rabi_dynamics import evolve_lattice, AmplitudeField

__all__ = [
    "NonUniformGridError",
    "PeakNotFoundError",
    "DegenerateFitError",
    "Spectrum",
    "spectrum_of",
    "Peak",
    "detect_peaks",
    "principal_peak",
    "RevivalReport",
    "classify_revival",
    "CatalogLine",
    "CatalogEntry",
    "Catalog",
    "load_catalog",
    "LineMatch",
    "MatchReport",
    "compare_catalog",
    "CatalogDiagnostics",
    "catalog_diagnostics",
    "LinearFit",
    "fit_linear_response",
    "LinearityReport",
    "linearity_scan",
    "measure_principal_frequency",
]

MIN_SAMPLES = 64


class NonUniformGridError(ValueError):
    """The trace is not sampled on a uniform time grid."""


class PeakNotFoundError(RuntimeError):
    """No spectral line satisfied the detection thresholds."""


class DegenerateFitError(ValueError):
    """Too few usable points, or no variance, for a linear fit."""


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    magnitude: np.ndarray
    dt: float
    window: str
    pad_factor: int

    @property
    def domega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    def power(self) -> np.ndarray:
        return self.magnitude**2


def spectrum_of(times, values=None, *, window: str = "hann", pad_factor: int = 4,
                min_samples: int = MIN_SAMPLES) -> Spectrum:
    """Magnitude spectrum of a uniformly sampled real signal.

    ``times`` may be an inversion trace (its total is used) or a time array
    accompanied by ``values``.  The mean is removed before windowing, so the
    zero-frequency bin carries no information.
    """
    if values is None:
        try:
            times, values = times.times, times.total
        except AttributeError:
            raise TypeError("pass (times, values) arrays or an object with "
                            ".times and .total") from None
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-d arrays of equal length")
    if t.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples for a stable "
                         f"line estimate, got {t.size}")
    steps = np.diff(t)
    dt = float(steps[0])
    if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * abs(dt)):
        raise NonUniformGridError("trace is not on a uniform increasing time grid")
    if int(pad_factor) != pad_factor or pad_factor < 1:
        raise ValueError(f"pad_factor must be a positive integer, got {pad_factor}")

    y = y - y.mean()
    if window == "hann":
        w = np.hanning(t.size)
    elif window == "none":
        w = np.ones(t.size)
    else:
        raise ValueError(f"unknown window {window!r}; use 'hann' or 'none'")
    n_fft = int(pad_factor) * t.size
    mag = np.abs(np.fft.rfft(y * w, n=n_fft)) * (2.0 / w.sum())
    omega = 2.0 * np.pi * np.fft.rfftfreq(n_fft, d=dt)
    return Spectrum(omega=omega, magnitude=mag, dt=dt, window=window,
                    pad_factor=int(pad_factor))


@dataclass(frozen=True)
class Peak:
    omega: float
    height: float
    fwhm: float
    prominence: float


def _parabolic_shift(logmag, i):
    # vertex of the parabola through three log-magnitude samples
    y0, y1, y2 = logmag[i - 1], logmag[i], logmag[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / denom, -0.5, 0.5))


def detect_peaks(spectrum: Spectrum, prominence_frac: float = 0.05,
                 min_separation: float | None = None,
                 refine: bool = True) -> tuple[Peak, ...]:
    """Spectral lines above a relative prominence floor, tallest first.

    ``min_separation`` is an angular-frequency distance below which two
    candidates are considered one line.  Returns an empty tuple when nothing
    clears the floor.
    """
    mag = spectrum.magnitude
    if not 0 < prominence_frac < 1:
        raise ValueError("prominence_frac must be in (0, 1)")
    if mag.size < 3 or mag.max() <= 0:
        return ()
    domega = spectrum.domega
    distance = None
    if min_separation is not None:
        distance = max(1, int(round(min_separation / domega)))
    idx, props = find_peaks(mag, prominence=prominence_frac * mag.max(),
                            distance=distance)
    if idx.size == 0:
        return ()
    widths = peak_widths(mag, idx, rel_height=0.5)[0] * domega
    floor = mag.max() * 1e-12
    logmag = np.log(np.maximum(mag, floor))
    peaks = []
    for j, i in enumerate(idx):
        center = spectrum.omega[i]
        if refine and 0 < i < mag.size - 1:
            center = center + _parabolic_shift(logmag, i) * domega
        peaks.append(Peak(omega=float(center), height=float(mag[i]),
                          fwhm=float(widths[j]),
                          prominence=float(props["prominences"][j])))
    peaks.sort(key=lambda p: -p.height)
    return tuple(peaks)


def principal_peak(spectrum: Spectrum, **kwargs) -> Peak:
    peaks = detect_peaks(spectrum, **kwargs)
    if not peaks:
        raise PeakNotFoundError("no line cleared the prominence floor")
    return peaks[0]


@dataclass(frozen=True)
class RevivalReport:
    found: bool
    fundamental: float
    window_frac: float
    principal: Peak | None
    revivals: tuple[Peak, ...]
    others: tuple[Peak, ...]
    message: str

    @property
    def revival_found(self) -> bool:
        return len(self.revivals) > 0


def classify_revival(peaks, fundamental: float,
                     window_frac: float = 0.20) -> RevivalReport:
    """Sort detected lines against the single-site frequency.

    The tallest line within ``window_frac`` of ``fundamental`` is the
    principal line; lines above the window are revival lines; anything below
    is reported but unclassified.  A missing principal line is not an error
    here — the report says so and downstream decides.
    """
    if fundamental <= 0:
        raise ValueError(f"fundamental frequency must be positive, got {fundamental}")
    if not 0 < window_frac < 1:
        raise ValueError("window_frac must be in (0, 1)")
    lo = fundamental * (1.0 - window_frac)
    hi = fundamental * (1.0 + window_frac)
    in_window = [p for p in peaks if lo <= p.omega <= hi]
    above = tuple(sorted((p for p in peaks if p.omega > hi), key=lambda p: p.omega))
    principal = max(in_window, key=lambda p: p.height) if in_window else None
    others = tuple(p for p in peaks
                   if p is not principal and p.omega < lo)
    if principal is None:
        msg = (f"no line within {window_frac:.0%} of the single-site "
               f"frequency {fundamental:.6g}")
        return RevivalReport(False, fundamental, window_frac, None, above,
                             others, msg)
    msg = (f"principal line at {principal.omega:.6g} "
           f"({principal.omega / fundamental:.4f} of the single-site frequency), "
           f"{len(above)} line(s) above the window")
    return RevivalReport(True, fundamental, window_frac, principal, above,
                         others, msg)


# ---------------------------------------------------------------------------
# reference catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogLine:
    center: float
    uncertainty: float | None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    lines: tuple[CatalogLine, ...]
    diamond_line: CatalogLine | None = None
    broad_line: CatalogLine | None = None
    quoted_shifts_from_cu: tuple[float, ...] = ()


@dataclass(frozen=True)
class Catalog:
    units: str
    entries: dict
    ratios: dict
    splittings: dict

    def __getitem__(self, name: str) -> CatalogEntry:
        return self.entries[name]


def _line(obj) -> CatalogLine:
    return CatalogLine(center=float(obj["center"]),
                       uncertainty=None if obj.get("uncertainty") is None
                       else float(obj["uncertainty"]))


def load_catalog() -> Catalog:
    """Bundled wavenumber catalog of measured lines (units cm^-1)."""
    path = resources.files("rabichain").joinpath("data/raman_catalog.json")
    raw = json.loads(path.read_text())
    entries = {}
    for name, e in raw["entries"].items():
        entries[name] = CatalogEntry(
            name=name,
            lines=tuple(_line(l) for l in e["lines"]),
            diamond_line=_line(e["diamond_line"]) if "diamond_line" in e else None,
            broad_line=_line(e["broad_line"]) if "broad_line" in e else None,
            quoted_shifts_from_cu=tuple(e.get("quoted_shifts_from_cu", ())),
        )
    return Catalog(units=raw["units"], entries=entries, ratios=raw["ratios"],
                   splittings=raw["splittings"])


@dataclass(frozen=True)
class LineMatch:
    line: CatalogLine
    peak_center: float
    delta: float
    tolerance: float


@dataclass(frozen=True)
class MatchReport:
    matched: tuple[LineMatch, ...]
    unmatched_lines: tuple[CatalogLine, ...]
    unmatched_peaks: tuple[float, ...]

    def match_fraction(self) -> float:
        total = len(self.matched) + len(self.unmatched_lines)
        return len(self.matched) / total if total else 0.0


def compare_catalog(peaks, entry: CatalogEntry, scale: float = 1.0,
                    extra_tolerance: float = 0.0) -> MatchReport:
    """Greedily match measured lines against a catalog entry.

    Peak positions are multiplied by ``scale`` to land in catalog units.  A
    pair qualifies when it is closer than the line uncertainty plus half the
    (scaled) peak width plus ``extra_tolerance``; the closest pairs win, with
    ties resolved toward the lower-frequency line.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    scaled = [(float(p.omega) * scale, 0.5 * float(p.fwhm) * scale) for p in peaks]
    candidates = []
    for li, line in enumerate(entry.lines):
        unc = line.uncertainty or 0.0
        for pi, (center, half) in enumerate(scaled):
            tol = unc + half + extra_tolerance
            delta = center - line.center
            if abs(delta) <= tol:
                candidates.append((abs(delta), line.center, li, pi, delta, tol))
    candidates.sort()
    used_lines: set[int] = set()
    used_peaks: set[int] = set()
    matched = []
    for _, _, li, pi, delta, tol in candidates:
        if li in used_lines or pi in used_peaks:
            continue
        used_lines.add(li)
        used_peaks.add(pi)
        matched.append(LineMatch(line=entry.lines[li], peak_center=scaled[pi][0],
                                 delta=delta, tolerance=tol))
    unmatched_lines = tuple(l for i, l in enumerate(entry.lines)
                            if i not in used_lines)
    unmatched_peaks = tuple(c for i, (c, _) in enumerate(scaled)
                            if i not in used_peaks)
    return MatchReport(matched=tuple(matched), unmatched_lines=unmatched_lines,
                       unmatched_peaks=unmatched_peaks)


@dataclass(frozen=True)
class CatalogDiagnostics:
    """Arithmetic identities the catalog quotes, recomputed from the raw lines."""

    computed_ratios: tuple[float, ...]
    quoted_ratios: tuple[float, ...]
    ratio_uncertainty: float
    computed_splittings: tuple[float, ...]
    quoted_splittings: tuple[float, ...]
    computed_average_splitting: float
    quoted_average_splitting: float
    computed_shifts: tuple[float, ...]
    quoted_shifts: tuple[float, ...]
    shift_tolerances: tuple[float, ...]


def catalog_diagnostics(catalog: Catalog | None = None) -> CatalogDiagnostics:
    if catalog is None:
        catalog = load_catalog()
    ratios = catalog.ratios
    computed_ratios = tuple(p["numerator"] / p["denominator"]
                            for p in ratios["pairs"])
    ladder = np.asarray(catalog.splittings["ladder"], dtype=float)
    computed_splittings = tuple(np.diff(ladder)[::-1])

    boron = catalog["boron_implanted"]
    cu = catalog["cu_implanted_side"]
    shifts, tols = [], []
    for bl in boron.lines:
        ref = min(cu.lines, key=lambda l: abs(l.center - bl.center))
        shifts.append(ref.center - bl.center)
        tols.append((ref.uncertainty or 0.0) + (bl.uncertainty or 0.0))
    return CatalogDiagnostics(
        computed_ratios=computed_ratios,
        quoted_ratios=tuple(ratios["quoted_values"]),
        ratio_uncertainty=float(ratios["uncertainty"]),
        computed_splittings=computed_splittings,
        quoted_splittings=tuple(catalog.splittings["quoted_values"]),
        computed_average_splitting=float(np.mean(computed_splittings)),
        quoted_average_splitting=float(catalog.splittings["quoted_average"]),
        computed_shifts=tuple(shifts),
        quoted_shifts=boron.quoted_shifts_from_cu,
        shift_tolerances=tuple(tols),
    )


# ---------------------------------------------------------------------------
# linear response of the principal line to the coupling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def fit_linear_response(x, y) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2 or np.ptp(x) == 0.0:
        raise DegenerateFitError("need at least two distinct abscissae")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateFitError("response has no variance; nothing to fit")
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return LinearFit(slope=float(slope), intercept=float(intercept), r_squared=r2)


@dataclass(frozen=True)
class LinearityReport:
    fit: LinearFit
    g_values: tuple[float, ...]
    omegas: tuple[float, ...]
    failures: tuple[tuple[float, str], ...]


def _measure_capture(measure, g):
    try:
        return float(g), float(measure(g)), ""
    except PeakNotFoundError as exc:
        return float(g), np.nan, str(exc)


def linearity_scan(g_values, measure, map_fn=map,
                   min_points: int = 4) -> LinearityReport:
    """Measure the principal frequency over a sweep of couplings and fit it.

    ``measure`` maps a coupling value to a frequency (raising
    :class:`PeakNotFoundError` when the line is lost); failed points are kept
    in the report rather than aborting the sweep.  ``map_fn`` may be a
    process pool's map — ordering of the results is preserved either way.
    """
    g_values = tuple(float(g) for g in g_values)
    if len(g_values) < min_points:
        raise ValueError(f"need at least {min_points} coupling values, "
                         f"got {len(g_values)}")
    rows = list(map_fn(partial(_measure_capture, measure), g_values))
    ok = [(g, w) for g, w, msg in rows if msg == ""]
    failures = tuple((g, msg) for g, w, msg in rows if msg != "")
    if len(ok) < 2:
        raise DegenerateFitError(
            f"only {len(ok)} of {len(g_values)} sweep points produced a line")
    fit = fit_linear_response([g for g, _ in ok], [w for _, w in ok])
    return LinearityReport(fit=fit, g_values=g_values,
                           omegas=tuple(w for _, w, _msg in rows),
                           failures=failures)


def measure_principal_frequency(cfg, g: float | None = None, *, sigma: float,
                                k0: float, t_end: float, dt: float,
                                m0: float | None = None, chain: int = 0,
                                record_every: int = 1, window: str = "hann",
                                pad_factor: int = 8,
                                prominence_frac: float = 0.1) -> float:
    """Frequency of the strongest inversion line for one packet run.

    ``g`` overrides the coupling in ``cfg`` when given; it is the second
    positional argument so a ``functools.partial`` over everything else is a
    unary sweep function a process pool can map.
    """
    if g is not None:
        cfg = replace(cfg, g=float(g))
    init = AmplitudeField.gaussian_packet(cfg, m0=m0, sigma=sigma, k0=k0,
                                          chain=chain)
    res = evolve_lattice(cfg, init, t_end=t_end, dt=dt,
                         record_every=record_every)
    spec = spectrum_of(res.trace, window=window, pad_factor=pad_factor)
    return principal_peak(spec, prominence_frac=prominence_frac).omega
