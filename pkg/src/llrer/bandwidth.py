"""Leave-one-out cross-validation bandwidth selection over a fixed grid.

Each fold removes one observation from both the smoother and the
censoring-survival estimate, refits at the held-out covariate and scores the
squared gap to that observation's full-sample synthetic response. A fold
whose fit is degenerate predicts 0 (the shared convention) and is counted in
the trace, so pathological bandwidths stay visible. The same evaluation
engine backs cv_score and select_bandwidth, so a traced score always equals
the score of a standalone call.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .kernels import KernelKind, kernel_eval
from .loclin import Estimator, required_orders
from .survival import CensoredSample, km_censoring_survival, synthetic_transform

DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class BandwidthGrid:
    """Arithmetic grid lo, lo+step, ... with floor((hi-lo)/step)+1 values."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        lo, hi, step = (float(v) for v in (self.lo, self.hi, self.step))
        if not all(math.isfinite(v) for v in (lo, hi, step)):
            raise ConfigError("bandwidth grid bounds must be finite")
        if not 0.0 < lo <= hi:
            raise ConfigError(f"bandwidth grid needs 0 < lo <= hi, got lo={lo}, hi={hi}")
        if step <= 0.0:
            raise ConfigError(f"bandwidth grid step must be > 0, got {step}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "step", step)

    def values(self) -> np.ndarray:
        # small slack so e.g. (2.0 - 0.01)/0.01 counts as 199 despite rounding;
        # values snapped to 12 decimals so traces print cleanly
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return np.round(self.lo + self.step * np.arange(count), 12)


DEFAULT_BANDWIDTH_GRID = BandwidthGrid(0.01, 2.0, 0.01)


class CVPoint(NamedTuple):
    h: float
    score: float
    degenerate_folds: int


class BandwidthSelection(NamedTuple):
    h_opt: float
    trace: tuple


@dataclass(frozen=True)
class _Workspace:
    """Precomputed leave-one-out structures, reusable across bandwidths.

    Row i of each matrix describes the fold that drops observation i: dx[i, j]
    is x_j - x_i and tau[order][i, j] the order-`order` synthetic response of
    observation j under the Kaplan-Meier estimate that excludes i. target is
    the full-sample synthetic response of order -1.
    """

    dx: np.ndarray
    dx2: np.ndarray
    target: np.ndarray
    tau: dict


def _workspace(sample: CensoredSample, estimator: Estimator) -> _Workspace:
    orders = required_orders(estimator)
    n = sample.n
    full_step = km_censoring_survival(sample)
    target = synthetic_transform(sample, full_step, -1).values
    dx = sample.x[None, :] - sample.x[:, None]
    tau = {o: np.zeros((n, n)) for o in orders}
    idx = np.arange(n)
    for i in range(n):
        keep = idx != i
        sub = CensoredSample(sample.y[keep], sample.delta[keep], sample.x[keep])
        sub_step = km_censoring_survival(sub)
        for o in orders:
            tau[o][i, keep] = synthetic_transform(sub, sub_step, o).values
    return _Workspace(dx, dx * dx, target, tau)


def _fold_predictions(ws: _Workspace, estimator: Estimator, kernel: KernelKind, h: float, eps: float):
    w = kernel_eval(kernel, ws.dx / h)
    np.fill_diagonal(w, 0.0)
    if estimator is Estimator.LLRER:
        a1 = ws.tau[1] * w
        a2 = ws.tau[2] * w
        s10 = a1.sum(axis=1)
        s11 = (a1 * ws.dx).sum(axis=1)
        s20 = a2.sum(axis=1)
        s21 = (a2 * ws.dx).sum(axis=1)
        s22 = (a2 * ws.dx2).sum(axis=1)
        num = s22 * s10 - s21 * s11
        den = s22 * s20 - s21 * s21
        scale = np.abs(s22 * s20)
    elif estimator is Estimator.LLCR:
        a = ws.tau[-1] * w
        t0 = a.sum(axis=1)
        t1 = (a * ws.dx).sum(axis=1)
        p0 = w.sum(axis=1)
        p1 = (w * ws.dx).sum(axis=1)
        p2 = (w * ws.dx2).sum(axis=1)
        num = p2 * t0 - p1 * t1
        den = p2 * p0 - p1 * p1
        scale = np.abs(p2 * p0)
    else:
        num = (ws.tau[-1] * w).sum(axis=1)
        den = w.sum(axis=1)
        scale = np.ones_like(den)
    degenerate = np.abs(den) <= eps * scale
    pred = np.zeros_like(den)
    np.divide(num, den, out=pred, where=~degenerate)
    return pred, degenerate


def _cv_eval(ws: _Workspace, estimator: Estimator, kernel: KernelKind, h: float, eps: float) -> CVPoint:
    if not math.isfinite(h) or h <= 0.0:
        raise ConfigError(f"bandwidth h must satisfy h > 0, got {h!r}")
    pred, degenerate = _fold_predictions(ws, estimator, kernel, h, eps)
    resid = ws.target - pred
    return CVPoint(float(h), float(np.sum(resid * resid)), int(degenerate.sum()))


def cv_score(
    estimator: Estimator,
    sample: CensoredSample,
    kernel: KernelKind,
    h: float,
    denominator_epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Leave-one-out score of one bandwidth (smaller is better)."""
    if sample.n < 2:
        raise ConfigError("cross-validation needs at least 2 observations")
    ws = _workspace(sample, estimator)
    return _cv_eval(ws, estimator, kernel, float(h), denominator_epsilon).score


def select_bandwidth(
    estimator: Estimator,
    sample: CensoredSample,
    kernel: KernelKind,
    grid: BandwidthGrid = DEFAULT_BANDWIDTH_GRID,
    denominator_epsilon: float = DEFAULT_EPSILON,
) -> BandwidthSelection:
    """Grid-search the leave-one-out score; ties go to the smallest h.

    Returns the winning bandwidth together with the full trace of
    (h, score, degenerate_folds) for diagnostics.
    """
    if sample.n < 2:
        raise ConfigError("cross-validation needs at least 2 observations")
    ws = _workspace(sample, estimator)
    trace = tuple(
        _cv_eval(ws, estimator, kernel, float(h), denominator_epsilon) for h in grid.values()
    )
    best = 0
    for k in range(1, len(trace)):
        if trace[k].score < trace[best].score:
            best = k
    return BandwidthSelection(trace[best].h, trace)


def write_cv_trace_csv(trace, path) -> None:
    """Write a selection trace as CSV with columns h,score,degenerate_folds."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "score", "degenerate_folds"])
        for point in trace:
            writer.writerow([repr(float(point.h)), repr(float(point.score)), int(point.degenerate_folds)])
