"""Adaptive quadrature for smeared field-mode integrals.

Semi-infinite frequency integrals carrying an explicit Gaussian envelope
``exp(-omega^2 R^2)`` are truncated analytically (the envelope makes the
tail bound rigorous) and split into half-period panels before adaptive
Gauss-Kronrod refinement, so sign-alternating integrands are handled
panel-by-panel and panel sums are combined with compensated accumulation.

Two precision modes are supported: ``standard`` runs in binary64 with a
7-15 Gauss-Kronrod pair; ``extended`` evaluates every panel with
tanh-sinh quadrature at >= 106-bit significand and downcasts only the
final value, for integrands whose cancellation exhausts binary64.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np

__all__ = [
    "QuadratureError",
    "QuadConfig",
    "QuadResult",
    "integrate_finite",
    "integrate_seeded",
    "integrate_halfline",
    "neumaier_sum",
]

_EPS = float(np.finfo(np.float64).eps)

# 7-15 Gauss-Kronrod pair, positive half of the symmetric node set
# (classic QUADPACK table; abscissae of the 15-point Kronrod rule, the
# even-indexed ones being the embedded 7-point Gauss rule).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)

# full 15-point node/weight vectors on [-1, 1], Kronrod ordering by node value
_NODES = np.array([-x for x in _XGK[:-1]] + [0.0] + [x for x in reversed(_XGK[:-1])])
_WK = np.array([w for w in _WGK[:-1]] + [_WGK[-1]] + [w for w in reversed(_WGK[:-1])])
# Gauss weights sit on the odd Kronrod slots
_WG15 = np.zeros(15)
_WG15[1:14:2] = [_WG[0], _WG[1], _WG[2], _WG[3], _WG[2], _WG[1], _WG[0]]


class QuadratureError(Exception):
    """Hard failure of an integration contract (bad domain, non-finite sample)."""


@dataclass(frozen=True)
class QuadConfig:
    """Integration tolerances and precision selection.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Convergence target: total error estimate <= max(rel_tol*|value|, abs_tol).
    max_subdivisions : int
        Budget of panel bisections before the result is flagged unconverged.
    precision : str
        "standard" (binary64 Gauss-Kronrod) or "extended" (>=106-bit tanh-sinh).
    tail_policy : callable or None
        Rule mapping (gaussian_width R, envelope bound B, abs_tol) -> omega_max
        for half-line truncation. None selects the analytic Gaussian-bound rule.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-16
    max_subdivisions: int = 2000
    precision: str = "standard"
    tail_policy: Optional[Callable[[float, float, float], float]] = None

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0.0):
            raise QuadratureError("rel_tol must be > 0")
        if not (self.abs_tol >= 0.0):
            raise QuadratureError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise QuadratureError("max_subdivisions must be >= 1")
        if self.precision not in ("standard", "extended"):
            raise QuadratureError(f"unknown precision mode {self.precision!r}")


@dataclass(frozen=True)
class QuadResult:
    """Value, error estimate, and convergence flag of one integral."""

    value: float
    error_estimate: float
    subdivisions_used: int
    converged: bool


def neumaier_sum(values: Sequence[float]) -> float:
    """Compensated (Neumaier) sum; exact to one rounding of the true sum."""
    s = 0.0
    comp = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


def _eval_samples(f: Callable[[float], float], xs: np.ndarray) -> np.ndarray:
    """Evaluate f on the node vector, tolerating scalar-only callables."""
    try:
        ys = np.asarray(f(xs), dtype=np.float64)
        if ys.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        ys = np.array([float(f(float(x))) for x in xs], dtype=np.float64)
    if not np.all(np.isfinite(ys)):
        bad = xs[~np.isfinite(ys)][0]
        raise QuadratureError(f"non-finite integrand sample at x={bad!r}")
    return ys


def _panel(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One G7K15 evaluation on [a, b]: returns (K15 value, error estimate)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    ys = _eval_samples(f, mid + half * _NODES)
    resk = half * float(np.dot(_WK, ys))
    resg = half * float(np.dot(_WG15, ys))
    resabs = half * float(np.dot(_WK, np.abs(ys)))
    mean = resk / (b - a)
    resasc = half * float(np.dot(_WK, np.abs(ys - mean)))
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    err = max(err, 50.0 * _EPS * resabs)
    return resk, err


def _adapt(
    f: Callable[[float], float],
    seeds: list[tuple[float, float]],
    cfg: QuadConfig,
) -> QuadResult:
    """Worst-error-first adaptive bisection over the seed panels."""
    heap: list[tuple[float, int, float, float, float, float]] = []
    counter = 0
    total_v = 0.0
    total_e = 0.0
    for a, b in seeds:
        v, e = _panel(f, a, b)
        heapq.heappush(heap, (-e, counter, a, b, v, e))
        counter += 1
        total_v += v
        total_e += e

    used = 0
    while total_e > max(cfg.rel_tol * abs(total_v), cfg.abs_tol):
        if used >= cfg.max_subdivisions:
            break
        neg_e, _, a, b, v, e = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            # interval at rounding resolution; put it back and stop
            heapq.heappush(heap, (neg_e, counter, a, b, v, e))
            counter += 1
            break
        v1, e1 = _panel(f, a, mid)
        v2, e2 = _panel(f, mid, b)
        total_v += (v1 + v2) - v
        total_e += (e1 + e2) - e
        heapq.heappush(heap, (-e1, counter, a, mid, v1, e1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, b, v2, e2))
        counter += 1
        used += 1

    # deterministic final reduction: compensated sums in left-endpoint order
    panels = sorted((item[2], item[4], item[5]) for item in heap)
    value = neumaier_sum([p[1] for p in panels])
    error = neumaier_sum([p[2] for p in panels])
    converged = error <= max(cfg.rel_tol * abs(value), cfg.abs_tol)
    return QuadResult(value, abs(error), used, converged)


def _adapt_mp(
    f: Callable[[float], float],
    seeds: list[tuple[float, float]],
    cfg: QuadConfig,
) -> QuadResult:
    """Extended mode: tanh-sinh per seed panel at 120-bit working precision."""
    with mp.workprec(120):
        total = mp.mpf(0)
        err = mp.mpf(0)
        for a, b in seeds:
            v, e = mp.quad(f, [mp.mpf(a), mp.mpf(b)], error=True)
            if not mp.isfinite(v):
                raise QuadratureError(f"non-finite integrand on [{a}, {b}]")
            total += v
            err += abs(e)
        value = float(total)
        error = float(err)
    converged = error <= max(cfg.rel_tol * abs(value), cfg.abs_tol)
    return QuadResult(value, error, len(seeds), converged)


def integrate_finite(
    f: Callable[[float], float], a: float, b: float, cfg: QuadConfig
) -> QuadResult:
    """Integrate f over [a, b] adaptively.

    Raises
    ------
    QuadratureError
        If a >= b or any integrand sample is non-finite.
    """
    if not (a < b):
        raise QuadratureError(f"need a < b, got [{a}, {b}]")
    if cfg.precision == "extended":
        return _adapt_mp(f, [(a, b)], cfg)
    return _adapt(f, [(a, b)], cfg)


def integrate_seeded(
    f: Callable[[float], float], edges: Sequence[float], cfg: QuadConfig
) -> QuadResult:
    """Integrate over [edges[0], edges[-1]] starting from the given panel
    decomposition (edges must be strictly increasing)."""
    edges = [float(e) for e in edges]
    if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise QuadratureError("edges must be strictly increasing with >= 2 entries")
    seeds = list(zip(edges[:-1], edges[1:]))
    if cfg.precision == "extended":
        return _adapt_mp(f, seeds, cfg)
    return _adapt(f, seeds, cfg)


def _gaussian_tail_cut(R: float, bound: float, abs_tol: float) -> float:
    """Smallest x with bound * x * exp(-x^2 R^2) <= abs_tol, via fixed point."""
    tol = max(abs_tol, 5e-324)
    if bound <= 0.0:
        return 1.0 / R
    ratio = bound / tol
    if not math.isfinite(ratio):
        return math.inf
    x = math.sqrt(max(math.log(ratio), 1.0)) / R
    for _ in range(4):
        arg = bound * x / tol
        if arg <= 1.0:
            break
        x = math.sqrt(math.log(arg)) / R
    # one safety step: enforce the inequality outright
    while bound * x * math.exp(-((x * R) ** 2)) > tol and math.isfinite(x):
        x *= 1.25
    return x


def _seed_panels(omega_max: float, hint: float, cap: int) -> list[tuple[float, float]]:
    if hint > 0.0 and math.isfinite(hint):
        h = 0.5 * hint
    else:
        h = omega_max / 8.0
    n = int(math.ceil(omega_max / h))
    if n > cap:
        n = cap
    n = max(n, 1)
    edges = np.linspace(0.0, omega_max, n + 1)
    return [(float(edges[i]), float(edges[i + 1])) for i in range(n)]


def integrate_halfline(
    f: Callable[[float], float],
    oscillation_period_hint: float,
    R: float,
    cfg: QuadConfig,
    envelope_bound: Optional[float] = None,
) -> QuadResult:
    """Integrate f over [0, inf) assuming |f| <= B exp(-omega^2 R^2).

    The tail is cut at omega_max with ``B exp(-omega_max^2 R^2) omega_max <=
    abs_tol``; [0, omega_max] is pre-split into half-periods of the
    oscillation hint (length pi/L panels when the integrand carries
    sin(omega L)) and refined adaptively from there.

    Parameters
    ----------
    envelope_bound : float, optional
        The constant B. When omitted it is estimated by sampling
        ``|f| exp(+omega^2 R^2)`` on a fixed probe grid over [0, 6/R].
    """
    if not (isinstance(R, (int, float)) and math.isfinite(R) and R > 0.0):
        raise QuadratureError(f"gaussian width R must be positive and finite, got {R!r}")

    if envelope_bound is not None:
        B = float(envelope_bound)
        if not (B >= 0.0 and math.isfinite(B)):
            raise QuadratureError(f"envelope bound must be finite and >= 0, got {B!r}")
    else:
        probe = np.linspace(0.0, 6.0 / R, 257)
        ys = _eval_samples(f, probe)
        B = 4.0 * float(np.max(np.abs(ys) * np.exp((probe * R) ** 2)))

    if B == 0.0:
        return QuadResult(0.0, 0.0, 0, True)

    policy = cfg.tail_policy if cfg.tail_policy is not None else _gaussian_tail_cut
    omega_max = float(policy(R, B, cfg.abs_tol))
    tail_ok = math.isfinite(omega_max) and omega_max > 0.0
    if not tail_ok:
        omega_max = 1e8 / R  # best effort; result is flagged unconverged

    seeds = _seed_panels(omega_max, oscillation_period_hint, cap=4096)
    if cfg.precision == "extended":
        res = _adapt_mp(f, seeds, cfg)
    else:
        res = _adapt(f, seeds, cfg)
    if not tail_ok:
        return QuadResult(res.value, res.error_estimate, res.subdivisions_used, False)
    return res
