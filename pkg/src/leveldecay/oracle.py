"""Brute-force extremal level functions and bound verification.

For a finite ascending level grid {k_0 < k_1 < ... < k_{n-1}} with k_0 = k0,
the extremal function phi* is the pointwise-largest grid function that is
nonincreasing, equals phi0 at k0, and satisfies the chosen hypothesis at every
grid pair k_j < k_i:

    phi*(k_i) = min( phi*(k_{i-1}),  min_{j < i} RHS(k_i, k_j, phi*(k_j)) ).

Any correct decay bound for that hypothesis must dominate phi* on the grid;
`verify_bound` measures the worst violation.  Refining the grid only lowers
phi*, so domination on a coarse grid is the stricter statement.

The scan is O(n^2) pairs and runs in log space through a compiled kernel when
available (see leveldecay._kernels).  Exactly geometric grids take a fast path
that needs no per-pair transcendentals.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .lemmas import (DecayBound, LemmaParams, VanishingLevel, bound_for,
                     classical_bound, compute_L)

VARIANTS = ("classical", "kv", "generalized")


@dataclass(frozen=True)
class LevelFunction:
    """A nonincreasing function sampled on an ascending level grid."""

    levels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.levels.ndim != 1 or self.levels.shape != self.values.shape:
            raise InputError("levels and values must be 1-d arrays of equal length")


@dataclass(frozen=True)
class VerificationReport:
    """Worst signed gap oracle - bound over the constrained grid levels."""

    max_violation: float
    worst_level: float

    def as_dict(self):
        return {"max_violation": self.max_violation, "worst_level": self.worst_level}


@dataclass(frozen=True)
class LevelGrid:
    """An ascending level grid plus the structure hint the scan exploits.

    kind "geometric": levels[j] = k0 * r^j; the whole scan runs on the
    gap-table fast path.  kind "vanishing_adapted": levels[:split] approach
    `vanish` from below with geometrically shrinking distances (log-ratio
    lrho < 0), run on the same fast path in the mirrored coordinate
    distance-to-vanish; the remaining levels (a short ladder down to a few
    ulp below `vanish`, then `vanish` itself and a geometric stretch beyond)
    use the per-pair continuation scan.  kind "custom" carries no hint.
    """

    levels: np.ndarray
    kind: str = "custom"
    split: int = 0
    lrho: float = 0.0
    vanish: float = 0.0

    def __array__(self, dtype=None, copy=None):
        arr = self.levels if dtype is None else self.levels.astype(dtype)
        return np.array(arr, copy=True) if copy else arr

    def __len__(self):
        return self.levels.shape[0]


def _vanishing_adapted_grid(k0: float, vanish: float, n_levels: int) -> LevelGrid:
    """Grid that resolves the approach to a predicted vanishing level.

    Near a sharp vanishing level the extremal function touches down like a
    power of the remaining distance, so certifying collapse needs levels whose
    distance to `vanish` shrinks geometrically -- down to the last distances
    float64 can represent -- rather than evenly spaced ones.
    """
    span = vanish - k0
    end_dist = 1e-12 * vanish
    n_half = 10  # halving ladder from end_dist down to ~4 ulp of vanish
    n_beyond = min(64, n_levels // 16)
    n_mirror = n_levels - n_half - 1 - n_beyond
    lrho = math.log(end_dist / span) / (n_mirror - 1)
    approach = vanish - span * np.exp(lrho * np.arange(n_mirror))
    approach[0] = k0
    ladder = vanish - end_dist * 0.5 ** np.arange(1.0, n_half + 1.0)
    beyond = vanish * 4.0 ** ((np.arange(n_beyond) + 1.0) / n_beyond)
    levels = np.concatenate([approach, ladder, [vanish], beyond])
    return LevelGrid(levels=levels, kind="vanishing_adapted", split=n_mirror,
                     lrho=lrho, vanish=vanish)


def default_level_grid(p: LemmaParams, variant: str,
                       n_levels: int = 4000) -> LevelGrid:
    """Default grid policy for oracle runs.

    beta <= 1: geometric progression on [k0, 1000*k0].  beta > 1: the bound
    vanishes at a finite level V, so most levels approach V with geometrically
    shrinking distances (see _vanishing_adapted_grid), then V itself and a
    geometric stretch up to 4V cover the at-and-beyond-V checks.  Tiny grids
    (< 64 levels) and vanishing levels unresolvably close to k0 fall back to a
    plain geometric progression on [k0, 4V].
    """
    if n_levels < 2:
        raise InputError("need at least 2 levels")
    if p.beta > 1:
        if variant == "classical":
            top = classical_bound(p).level
        else:
            top = 2.0 * compute_L(p)
        if n_levels >= 64 and top - p.k0 > 1e-8 * top:
            return _vanishing_adapted_grid(p.k0, top, n_levels)
        k_max = 4.0 * top
    else:
        k_max = 1000.0 * p.k0
    lr = (math.log(k_max) - math.log(p.k0)) / (n_levels - 1)
    return LevelGrid(levels=p.k0 * np.exp(lr * np.arange(n_levels)),
                     kind="geometric")


def _geometric_log_ratio(levels: np.ndarray) -> float | None:
    """Log-ratio lr if levels reconstruct as k0*e^(j*lr) to 1e-12, else None.

    The fast path rewrites log(k_i - k_j) = log(k_j) + log(r^(i-j) - 1), an
    identity only for exact geometric grids; the tight gate keeps the induced
    error well below the verification tolerance.
    """
    n = levels.shape[0]
    if n < 3:
        return None
    lr = (math.log(levels[-1]) - math.log(levels[0])) / (n - 1)
    if lr <= 0:
        return None
    recon = levels[0] * np.exp(lr * np.arange(n))
    if np.max(np.abs(recon - levels)) <= 1e-12 * levels[-1] or \
            np.max(np.abs(recon / levels - 1.0)) <= 1e-12:
        return lr
    return None


def _scan_vanishing_adapted(p: LemmaParams, grid: LevelGrid, levels, lk,
                            lnc, thak, thah, lphi0) -> np.ndarray:
    """Fast mirrored scan of the approach section, then generic continuation.

    For the approach section log(k_i - k_j) = P[j] + log(1 - rho^(i-j)) with
    P[j] the log of the distance to the vanishing level, the mirrored image of
    the geometric identity; the ladder/vanish/beyond rows take their gaps
    straight from the stored levels.
    """
    m = grid.split
    n = levels.shape[0]
    span = grid.vanish - p.k0
    P = math.log(span) + grid.lrho * np.arange(m)
    d = np.arange(m, dtype=np.float64)
    with np.errstate(divide="ignore"):
        Gm = np.log(-np.expm1(d * grid.lrho))  # Gm[0] = -inf, unused
    row_add = lnc + thah * lk[:m]
    col_add = thak * lk[:m] if thak != 0.0 else np.zeros(m)
    head = _kernels.extremal_scan_geom(np.ascontiguousarray(P),
                                       np.ascontiguousarray(Gm),
                                       np.ascontiguousarray(row_add),
                                       np.ascontiguousarray(col_add),
                                       p.alpha, p.beta, lphi0)
    lphi = np.empty(n)
    A = np.empty(n)
    lphi[:m] = head
    with np.errstate(over="ignore"):  # log values saturate to -inf (value 0)
        A[:m] = p.beta * lphi[:m] + thak * lk[:m]
    _kernels.extremal_scan_continue(levels, lk, lphi, A, p.alpha, p.beta,
                                    lnc, thak, thah, m)
    return lphi


def extremal_level_function(p: LemmaParams, variant: str,
                            levels: np.ndarray | LevelGrid) -> LevelFunction:
    """Largest grid function consistent with the hypothesis and monotonicity.

    levels (a plain array or a LevelGrid) must be ascending and start at k0.
    Values are exact up to log-space rounding; once the recursion underflows
    the values are exactly 0.
    """
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}")
    grid = levels if isinstance(levels, LevelGrid) else None
    levels = np.ascontiguousarray(np.asarray(levels), dtype=np.float64)
    if levels.ndim != 1 or levels.shape[0] < 1:
        raise InputError("level grid must be a nonempty 1-d array")
    if not math.isclose(levels[0], p.k0, rel_tol=1e-12, abs_tol=0.0):
        raise InputError(f"level grid must start at k0={p.k0}, got {levels[0]}")
    if np.any(np.diff(levels) <= 0):
        raise InputError("level grid must be strictly ascending")

    n = levels.shape[0]
    lphi0 = math.log(p.phi0) if p.phi0 > 0 else -math.inf
    if n == 1:
        return LevelFunction(levels, np.array([p.phi0]))

    thak = p.theta * p.alpha if variant == "kv" else 0.0
    thah = p.theta * p.alpha if variant == "generalized" else 0.0
    lnc = math.log(p.c)

    if grid is not None and grid.kind == "vanishing_adapted":
        lk = np.log(levels)
        lphi = _scan_vanishing_adapted(p, grid, levels, lk, lnc, thak, thah,
                                       lphi0)
    else:
        lr = _geometric_log_ratio(levels)
        if lr is not None:
            lk = np.log(levels)
            d = np.arange(n, dtype=np.float64)
            with np.errstate(divide="ignore"):
                G = np.log(np.expm1(d * lr))  # G[0] = -inf, unused
            row_add = lnc + thah * lk
            col_add = thak * lk if thak != 0.0 else np.zeros(n)
            lphi = _kernels.extremal_scan_geom(lk, G,
                                               np.ascontiguousarray(row_add),
                                               np.ascontiguousarray(col_add),
                                               p.alpha, p.beta, lphi0)
        else:
            lphi = _kernels.extremal_scan_generic(levels, p.alpha, p.beta,
                                                  lnc, thak, thah, lphi0)
    values = np.exp(np.asarray(lphi))
    return LevelFunction(levels, values)


def verify_bound(fn: LevelFunction, bound: DecayBound) -> VerificationReport:
    """Worst violation values - bound over the grid.

    A VanishingLevel constrains nothing below its level (bound +inf there) and
    demands 0 at and beyond it.  max_violation <= 0 means the bound dominates;
    -inf means no grid level was constrained at all.
    """
    with np.errstate(invalid="ignore"):
        gap = fn.values - bound.evaluate(fn.levels)
    gap = np.where(np.isnan(gap), -np.inf, gap)  # values inf - bound inf: unconstrained
    idx = int(np.argmax(gap))
    return VerificationReport(max_violation=float(gap[idx]),
                              worst_level=float(fn.levels[idx]))


def sample_lemma_params(rng: np.random.Generator, regime: str) -> LemmaParams:
    """Random hypothesis constants with beta drawn from one regime.

    Ranges: c in [0.1, 10], alpha in [0.5, 4], theta in [0, 0.9],
    k0 in [0.5, 5], phi0 in [0, 10]; beta in [1.1, 3] / {1} / [0.1, 0.9].
    """
    if regime == "gt1":
        beta = rng.uniform(1.1, 3.0)
    elif regime == "eq1":
        beta = 1.0
    elif regime == "lt1":
        beta = rng.uniform(0.1, 0.9)
    else:
        raise InputError(f"unknown regime {regime!r}")
    return LemmaParams(c=rng.uniform(0.1, 10.0), alpha=rng.uniform(0.5, 4.0),
                       beta=beta, theta=rng.uniform(0.0, 0.9),
                       k0=rng.uniform(0.5, 5.0), phi0=rng.uniform(0.0, 10.0))


def run_domination_suite(n_per_regime: int = 200, seed: int = 0,
                         variants=VARIANTS, regimes=("gt1", "eq1", "lt1"),
                         n_levels: int = 4000) -> list[dict]:
    """Oracle-vs-bound sweep over random parameter tuples.

    Returns one record per (variant, regime, draw) with the worst violation,
    the collapse value at the predicted vanishing level for beta > 1 cases,
    and the per-case tolerance 1e-9*phi0 + 1e-12.
    """
    rng = np.random.default_rng(seed)
    cases = []
    for variant in variants:
        for regime in regimes:
            for idx in range(n_per_regime):
                p = sample_lemma_params(rng, regime)
                bound = bound_for(p, variant)
                grid = default_level_grid(p, variant, n_levels)
                fn = extremal_level_function(p, variant, grid)
                rep = verify_bound(fn, bound)
                rec = {
                    "variant": variant,
                    "regime": regime,
                    "index": idx,
                    "params": {"c": p.c, "alpha": p.alpha, "beta": p.beta,
                               "theta": p.theta, "k0": p.k0, "phi0": p.phi0},
                    "bound": bound.as_dict(),
                    "max_violation": rep.max_violation,
                    "worst_level": rep.worst_level,
                    "tolerance": 1e-9 * p.phi0 + 1e-12,
                }
                if isinstance(bound, VanishingLevel):
                    at = int(np.searchsorted(fn.levels, bound.level))
                    rec["collapse_value"] = float(fn.values[min(at, len(fn.levels) - 1)])
                cases.append(rec)
    return cases
