"""Parameter sweeps, scaling studies, and deterministic result files.

Execution model: every sweep point is a pure function of its inputs;
points may be evaluated concurrently but rows are always gathered and
emitted in sweep order, and the emitted files are byte-deterministic
for identical inputs (wall-clock timings never enter them).
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .amplitudes import AmplitudeError, DetectorConfig, PairConfig, compute_amplitudes
from .quadrature import QuadConfig
from .states import (
    FilterPair,
    apply_filter,
    bell_report,
    build_state,
    chsh_condition,
    horodecki_M,
    negativity,
    negativity_approx,
)
from .windows import WindowKind, WindowSpec, normalize_window, select_gaps

__all__ = [
    "SweepKind",
    "NPolicy",
    "RunConfig",
    "ResultRow",
    "CSV_COLUMNS",
    "CONVENTION",
    "sweep_separation",
    "sweep_gap",
    "sweep_superosc_index",
    "sweep_filter_eta",
    "run_sweep",
    "single_point",
    "ScalingFit",
    "ScalingReport",
    "fit_scaling",
    "scaling_check",
    "emit_results",
    "read_results",
    "package_version",
]

CONVENTION = "unit-L2-window-norm; amplitudes carry only eps0 factors; natural units c=hbar=1"


def package_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "unknown"


class SweepKind(str, enum.Enum):
    SEPARATION = "separation"
    GAP = "gap"
    SUPEROSC_INDEX = "superosc_index"
    FILTER_ETA = "filter_eta"


class NPolicy(str, enum.Enum):
    """How the oscillation index N is chosen from the geometry.

    SQUARED_RATIO: N = ceil((L/T)^2) - the aggressive choice that keeps
    the engineered band wide enough for the exchange amplitude to decay
    no faster than exp(-(L/T)^2).
    LINEAR_RATIO: N = ceil(L/T) - the minimal choice that still places
    the detector gaps above the window threshold.
    FIXED: keep the template's N at every sweep point.
    """

    SQUARED_RATIO = "squared-ratio"
    LINEAR_RATIO = "linear-ratio"
    FIXED = "fixed"

    def index_for(self, L: float, T: float, fallback: float) -> float:
        ratio = L / T
        if self is NPolicy.SQUARED_RATIO:
            return float(math.ceil(ratio * ratio - 1e-12))
        if self is NPolicy.LINEAR_RATIO:
            return float(math.ceil(ratio - 1e-12))
        return fallback


def _window_T_max(pair: PairConfig) -> float:
    return max(pair.detA.window.T, pair.detB.window.T)


@dataclass(frozen=True)
class RunConfig:
    """One sweep: a pair template, the knob to vary, and how."""

    pair: PairConfig
    sweep: SweepKind
    sweep_values: tuple
    n_policy: NPolicy = NPolicy.SQUARED_RATIO
    quad: QuadConfig = field(default_factory=QuadConfig)
    output_path: str = "results.csv"
    emit_oracle_check: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "sweep", SweepKind(self.sweep))
        object.__setattr__(self, "n_policy", NPolicy(self.n_policy))
        vals = tuple(float(v) for v in self.sweep_values)
        object.__setattr__(self, "sweep_values", vals)
        if not vals:
            raise ValueError("sweep_values must be non-empty")
        if any(not math.isfinite(v) for v in vals):
            raise ValueError(f"sweep_values must be finite, got {vals!r}")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"sweep_values must be strictly increasing, got {vals!r}")
        if self.sweep is SweepKind.SEPARATION:
            t_max = _window_T_max(self.pair)
            if any(v <= t_max for v in vals):
                raise ValueError(
                    f"separation values must exceed the window duration {t_max!r} "
                    f"(causality), got {vals!r}"
                )
        elif self.sweep is SweepKind.GAP:
            if any(v < 1.0 for v in vals):
                raise ValueError(f"gap scales must be >= 1, got {vals!r}")
        elif self.sweep is SweepKind.FILTER_ETA:
            if any(not 0.0 < v <= 1.0 for v in vals):
                raise ValueError(f"filter strengths must lie in (0, 1], got {vals!r}")
        elif self.sweep is SweepKind.SUPEROSC_INDEX:
            if any(v < 1.0 for v in vals):
                raise ValueError(f"oscillation indices must be >= 1, got {vals!r}")
            if self.pair.detA.window.kind != WindowKind.SUPEROSCILLATING_BESSEL:
                raise ValueError("superosc_index sweeps need a superoscillating window on detector A")


# fixed output schema; parsers depend on the exact order and spelling
CSV_COLUMNS = (
    "L_over_T",
    "T",
    "N",
    "k",
    "q",
    "R",
    "m",
    "eps0_A",
    "eps0_B",
    "Omega_A",
    "Omega_B",
    "X0",
    "nEA2",
    "nEB2",
    "EAB",
    "nX2",
    "negativity",
    "negativity_approx",
    "M",
    "eta_opt",
    "M_filtered",
    "chsh_max_filtered",
    "eq11_lhs",
    "eq11_rhs",
    "success_prob",
    "error_budget",
    "status",
)

# two columns keep a historical spelling; internally the quantities are
# the local-filter violation condition sides
_COLUMN_TO_FIELD = {
    "eq11_lhs": "filter_condition_lhs",
    "eq11_rhs": "filter_condition_rhs",
}


@dataclass(frozen=True)
class ResultRow:
    """One computed point: inputs, amplitudes, and Bell figures."""

    sweep: str
    sweep_value: float
    L_over_T: float
    T: float
    N: float
    k: float
    q: float
    R: float
    m: float
    eps0_A: float
    eps0_B: float
    Omega_A: float
    Omega_B: float
    X0: float
    nEA2: float
    nEB2: float
    EAB: float
    nX2: float
    negativity: float
    negativity_approx: float
    M: float
    eta_opt: float
    M_filtered: float
    chsh_max_filtered: float
    filter_condition_lhs: float
    filter_condition_rhs: float
    success_prob: float
    error_budget: float
    status: str
    convention: str = CONVENTION
    wall_time: float = 0.0


def _window_params(pair: PairConfig) -> tuple:
    """(N, k, q) provenance columns from whichever windows carry them."""
    wa, wb = pair.detA.window, pair.detB.window
    n_idx = wa.N if wa.kind == WindowKind.SUPEROSCILLATING_BESSEL else (
        wb.N if wb.kind == WindowKind.SUPEROSCILLATING_BESSEL else 0.0
    )
    q_idx = wa.q if wa.kind == WindowKind.SUPEROSCILLATING_BESSEL else (
        wb.q if wb.kind == WindowKind.SUPEROSCILLATING_BESSEL else 0
    )
    k_idx = wb.k if wb.kind == WindowKind.CONVOLVED_HAT else (
        wa.k if wa.kind == WindowKind.CONVOLVED_HAT else 0
    )
    return float(n_idx), float(k_idx), float(q_idx)


_NAN = float("nan")


def compute_row(
    pair: PairConfig,
    quad: QuadConfig,
    sweep: str,
    sweep_value: float,
    eta_override: float | None = None,
) -> ResultRow:
    """Evaluate one point; failures become tagged rows, not exceptions.

    Only the guards that depend on parameter values (perturbative-regime
    and positivity checks) are converted to failure tags; anything else
    is a bug and propagates.
    """
    t0 = time.perf_counter()
    n_idx, k_idx, q_idx = _window_params(pair)
    inputs = dict(
        sweep=sweep,
        sweep_value=float(sweep_value),
        L_over_T=pair.separation / _window_T_max(pair),
        T=_window_T_max(pair),
        N=n_idx,
        k=k_idx,
        q=q_idx,
        R=pair.detA.R,
        m=pair.field_mass,
        eps0_A=pair.detA.eps0,
        eps0_B=pair.detB.eps0,
        Omega_A=pair.detA.gap,
        Omega_B=pair.detB.gap,
    )
    try:
        amps = compute_amplitudes(pair, quad)
        if eta_override is None:
            rep = bell_report(amps)
            eta = rep.eta_opt
            m_f = rep.M_filtered
            success = rep.filter_success_prob
            m_unf = rep.M
            neg = rep.negativity
            neg_a = rep.negativity_approx
            lhs, rhs = rep.filter_condition_lhs, rep.filter_condition_rhs
        else:
            state = build_state(amps)
            neg = negativity(state)
            neg_a = negativity_approx(amps)
            m_unf = horodecki_M(state)
            _, lhs, rhs = chsh_condition(amps)
            eta = float(eta_override)
            filtered, success = apply_filter(state, FilterPair(eta, eta))
            m_f = horodecki_M(filtered)
        return ResultRow(
            **inputs,
            X0=amps.X0,
            nEA2=amps.nEA2,
            nEB2=amps.nEB2,
            EAB=amps.EAB,
            nX2=amps.nX2,
            negativity=neg,
            negativity_approx=neg_a,
            M=m_unf,
            eta_opt=eta,
            M_filtered=m_f,
            chsh_max_filtered=2.0 * math.sqrt(max(m_f, 0.0)),
            filter_condition_lhs=lhs,
            filter_condition_rhs=rhs,
            success_prob=success,
            error_budget=amps.error_budget,
            status="ok",
            wall_time=time.perf_counter() - t0,
        )
    except (AmplitudeError, ValueError) as exc:
        return ResultRow(
            **inputs,
            X0=_NAN,
            nEA2=_NAN,
            nEB2=_NAN,
            EAB=_NAN,
            nX2=_NAN,
            negativity=_NAN,
            negativity_approx=_NAN,
            M=_NAN,
            eta_opt=_NAN,
            M_filtered=_NAN,
            chsh_max_filtered=_NAN,
            filter_condition_lhs=_NAN,
            filter_condition_rhs=_NAN,
            success_prob=_NAN,
            error_budget=_NAN,
            status=f"failed:{type(exc).__name__}",
            wall_time=time.perf_counter() - t0,
        )


def _quiet(ctor, /, *args, **kw):
    # derived sweep geometries inherit the template's validation; the
    # small-separation advisory warning would repeat per point otherwise
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ctor(*args, **kw)


def _pair_at_separation(cfg: RunConfig, L: float) -> PairConfig:
    pair = cfg.pair
    det_a, det_b = pair.detA, pair.detB
    if det_a.window.kind == WindowKind.SUPEROSCILLATING_BESSEL:
        T = det_a.window.T
        n_idx = cfg.n_policy.index_for(L, T, fallback=det_a.window.N)
        win_a = normalize_window(
            WindowSpec(
                kind=WindowKind.SUPEROSCILLATING_BESSEL,
                T=T,
                N=n_idx,
                L=L,
                q=det_a.window.q,
            ),
            cfg.quad,
        )
        gaps = select_gaps(n_idx, L, T)
        det_a = dataclasses.replace(det_a, window=win_a, gap=gaps.omega_A)
        det_b = dataclasses.replace(det_b, gap=gaps.omega_B)
    return _quiet(PairConfig, detA=det_a, detB=det_b, separation=L, field_mass=pair.field_mass)


def _pair_at_gap_scale(cfg: RunConfig, scale: float) -> PairConfig:
    pair = cfg.pair
    det_a = dataclasses.replace(pair.detA, gap=pair.detA.gap * scale)
    det_b = dataclasses.replace(pair.detB, gap=pair.detB.gap * scale)
    return _quiet(
        PairConfig, detA=det_a, detB=det_b, separation=pair.separation, field_mass=pair.field_mass
    )


def _pair_at_index(cfg: RunConfig, n_idx: float) -> PairConfig:
    pair = cfg.pair
    T = pair.detA.window.T
    L = pair.separation
    win_a = normalize_window(
        WindowSpec(
            kind=WindowKind.SUPEROSCILLATING_BESSEL, T=T, N=n_idx, L=L, q=pair.detA.window.q
        ),
        cfg.quad,
    )
    gaps = select_gaps(n_idx, L, T)
    det_a = dataclasses.replace(pair.detA, window=win_a, gap=gaps.omega_A)
    det_b = dataclasses.replace(pair.detB, gap=gaps.omega_B)
    return _quiet(PairConfig, detA=det_a, detB=det_b, separation=L, field_mass=pair.field_mass)


def _row_task(task: tuple) -> ResultRow:
    pair, quad, sweep, value, eta = task
    return compute_row(pair, quad, sweep, value, eta_override=eta)


def _run_tasks(tasks: Sequence[tuple], jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_row_task(t) for t in tasks]
    # rows come back in submit order regardless of completion order, so
    # concurrency cannot change the emitted files
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_row_task, tasks))


def sweep_separation(cfg: RunConfig, jobs: int = 1) -> list:
    """One row per separation value; the oscillation index follows n_policy."""
    if cfg.sweep is not SweepKind.SEPARATION:
        raise ValueError(f"config sweep kind is {cfg.sweep.value!r}, not 'separation'")
    tasks = [
        (_pair_at_separation(cfg, L), cfg.quad, cfg.sweep.value, L, None) for L in cfg.sweep_values
    ]
    return _run_tasks(tasks, jobs)


def sweep_gap(cfg: RunConfig, jobs: int = 1) -> list:
    """One row per multiplicative gap scale; windows stay fixed."""
    if cfg.sweep is not SweepKind.GAP:
        raise ValueError(f"config sweep kind is {cfg.sweep.value!r}, not 'gap'")
    tasks = [
        (_pair_at_gap_scale(cfg, s), cfg.quad, cfg.sweep.value, s, None) for s in cfg.sweep_values
    ]
    return _run_tasks(tasks, jobs)


def sweep_superosc_index(cfg: RunConfig, jobs: int = 1) -> list:
    """One row per oscillation index N at fixed geometry."""
    if cfg.sweep is not SweepKind.SUPEROSC_INDEX:
        raise ValueError(f"config sweep kind is {cfg.sweep.value!r}, not 'superosc_index'")
    tasks = [
        (_pair_at_index(cfg, n), cfg.quad, cfg.sweep.value, n, None) for n in cfg.sweep_values
    ]
    return _run_tasks(tasks, jobs)


def sweep_filter_eta(cfg: RunConfig, jobs: int = 1) -> list:
    """One row per filter strength applied to the template point."""
    if cfg.sweep is not SweepKind.FILTER_ETA:
        raise ValueError(f"config sweep kind is {cfg.sweep.value!r}, not 'filter_eta'")
    tasks = [(cfg.pair, cfg.quad, cfg.sweep.value, e, e) for e in cfg.sweep_values]
    return _run_tasks(tasks, jobs)


_SWEEP_RUNNERS = {
    SweepKind.SEPARATION: sweep_separation,
    SweepKind.GAP: sweep_gap,
    SweepKind.SUPEROSC_INDEX: sweep_superosc_index,
    SweepKind.FILTER_ETA: sweep_filter_eta,
}


def run_sweep(cfg: RunConfig, jobs: int = 1) -> list:
    return _SWEEP_RUNNERS[cfg.sweep](cfg, jobs)


def single_point(pair: PairConfig, quad: QuadConfig, eta_override: float | None = None) -> ResultRow:
    """Standalone evaluation; numerically identical to any sweep row
    built from the same pair (the consistency tests rely on it)."""
    T = _window_T_max(pair)
    return compute_row(pair, quad, "point", pair.separation / T, eta_override=eta_override)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residuals: tuple


def fit_scaling(points: Iterable[tuple]) -> ScalingFit:
    """Least-squares line through (x, ln_negativity) points."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points to fit, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = tuple(float(r) for r in (y - (slope * x + intercept)))
    return ScalingFit(slope=float(slope), intercept=float(intercept), residuals=resid)


@dataclass(frozen=True)
class ScalingReport:
    """Decay-rate verdict of ln(negativity) against (L/T)^2.

    status: "pass" when the fitted slope is >= -1.3, "fail" when it is
    more negative, "inconclusive" when fewer than 3 sweep points
    produced a positive negativity to fit through. `used` holds the fit
    abscissae (L/T)^2; `excluded` holds (L/T, reason) pairs.
    """

    status: str
    slope: float
    intercept: float
    residuals: tuple
    used: tuple
    excluded: tuple

    _SLOPE_FLOOR = -1.3


def scaling_check(cfg: RunConfig, rows: Sequence[ResultRow] | None = None, jobs: int = 1) -> ScalingReport:
    """Fit the separation sweep and judge the decay rate.

    Points with failure tags or non-positive negativity are excluded
    (and recorded); the fit needs at least 3 survivors.
    """
    if cfg.sweep is not SweepKind.SEPARATION:
        raise ValueError("scaling_check needs a separation sweep config")
    if len(cfg.sweep_values) < 4:
        raise ValueError(f"scaling_check needs >= 4 separation points, got {len(cfg.sweep_values)}")
    if rows is None:
        rows = sweep_separation(cfg, jobs)
    used = []
    excluded = []
    for row in rows:
        if row.status != "ok":
            excluded.append((row.L_over_T, row.status))
        elif not row.negativity > 0.0:
            excluded.append((row.L_over_T, "non-positive negativity"))
        else:
            used.append((row.L_over_T**2, math.log(row.negativity)))
    if len(used) < 3:
        return ScalingReport(
            status="inconclusive",
            slope=_NAN,
            intercept=_NAN,
            residuals=(),
            used=tuple(x for x, _ in used),
            excluded=tuple(excluded),
        )
    fit = fit_scaling(used)
    status = "pass" if fit.slope >= ScalingReport._SLOPE_FLOOR else "fail"
    return ScalingReport(
        status=status,
        slope=fit.slope,
        intercept=fit.intercept,
        residuals=fit.residuals,
        used=tuple(x for x, _ in used),
        excluded=tuple(excluded),
    )


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _csv_cell(row: ResultRow, column: str) -> str:
    name = _COLUMN_TO_FIELD.get(column, column)
    value = getattr(row, name)
    if column == "status":
        return str(value).replace(",", ";").replace("\n", " ")
    return _fmt(value)


def render_csv(rows: Sequence[ResultRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_cell(row, c) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _flatten_config(cfg: RunConfig) -> list:
    def window_items(prefix: str, w: WindowSpec) -> list:
        return [
            (f"{prefix}.kind", w.kind),
            (f"{prefix}.T", repr(w.T)),
            (f"{prefix}.N", repr(w.N)),
            (f"{prefix}.L", repr(w.L)),
            (f"{prefix}.q", repr(w.q)),
            (f"{prefix}.k", repr(w.k)),
            (f"{prefix}.amplitude", repr(w.amplitude)),
        ]

    items = []
    for tag, det in (("detA", cfg.pair.detA), ("detB", cfg.pair.detB)):
        items += [
            (f"{tag}.gap", repr(det.gap)),
            (f"{tag}.R", repr(det.R)),
            (f"{tag}.eps0", repr(det.eps0)),
        ]
        items += window_items(f"{tag}.window", det.window)
    items += [
        ("pair.separation", repr(cfg.pair.separation)),
        ("pair.field_mass", repr(cfg.pair.field_mass)),
        ("quad.rel_tol", repr(cfg.quad.rel_tol)),
        ("quad.abs_tol", repr(cfg.quad.abs_tol)),
        ("quad.max_subdivisions", repr(cfg.quad.max_subdivisions)),
        ("quad.precision", cfg.quad.precision),
        ("sweep", cfg.sweep.value),
        ("sweep_values", ", ".join(repr(v) for v in cfg.sweep_values)),
        ("n_policy", cfg.n_policy.value),
        ("output_path", cfg.output_path),
        ("emit_oracle_check", repr(cfg.emit_oracle_check)),
    ]
    return sorted(items)


def render_summary(rows: Sequence[ResultRow], cfg: RunConfig | None = None, notes: Sequence[str] = ()) -> str:
    ok = sum(1 for r in rows if r.status == "ok")
    lines = [
        "vacuumbell run summary",
        f"version: {package_version()}",
        f"convention: {CONVENTION}",
        f"rows: {len(rows)} (ok: {ok}, failed: {len(rows) - ok})",
    ]
    if cfg is not None:
        lines.append("")
        lines.append("[config]")
        lines += [f"{k} = {v}" for k, v in _flatten_config(cfg)]
    if notes:
        lines.append("")
        lines.append("[notes]")
        lines += list(notes)
    return "\n".join(lines) + "\n"


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".partial-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def emit_results(
    rows: Sequence[ResultRow],
    path: str,
    cfg: RunConfig | None = None,
    notes: Sequence[str] = (),
) -> tuple:
    """Write <path> (CSV) and its sibling summary; both atomically.

    Returns (csv_path, summary_path). Identical inputs produce
    byte-identical files; an unwritable path raises without leaving a
    partial file behind.
    """
    if not rows:
        raise ValueError("no rows to emit")
    base, _ = os.path.splitext(path)
    summary_path = base + ".summary.txt"
    _write_atomic(path, render_csv(rows))
    _write_atomic(summary_path, render_summary(rows, cfg, notes))
    return path, summary_path


def read_results(path: str) -> list:
    """Parse an emitted CSV back into dicts; floats round-trip exactly."""
    with open(path, encoding="utf-8") as handle:
        lines = [ln.rstrip("\n") for ln in handle if ln.strip()]
    if not lines or lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"unrecognized results header in {path!r}")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ValueError(f"malformed results row: {ln!r}")
        rec = {}
        for name, cell in zip(CSV_COLUMNS, cells):
            rec[name] = cell if name == "status" else float(cell)
        out.append(rec)
    return out
