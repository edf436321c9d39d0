"""Distribution-function diagnostics for computed solution fields.

Turns fields into level-set distribution functions, checks the discrete
energy and level-set inequalities that drive the decay machinery, derives the
exponent bookkeeping for a source in weak L^m, and classifies fields into the
predicted regularity regimes (bounded / exponentially integrable / weak
power / entropy weak power).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, InputError, ParameterError
from .lemmas import LemmaParams, compute_tau
from .pde import CoefficientSpec, GridField, excess, truncate

DOMAIN_VOLUME = 1.0  # the unit cube


@dataclass(frozen=True)
class DistributionFunction:
    """Pairs (level k, measure of {|u| > k}) on an ascending level grid."""

    levels: np.ndarray
    measures: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.float64)
        measures = np.asarray(self.measures, dtype=np.float64)
        if levels.ndim != 1 or levels.shape != measures.shape or levels.size == 0:
            raise InputError("levels and measures must be matching 1-d arrays")
        if not np.all(levels > 0.0) or not np.all(np.diff(levels) > 0.0):
            raise InputError("levels must be positive and strictly ascending")
        if not np.all(np.isfinite(measures)) or np.any(measures < 0.0):
            raise InputError("measures must be finite and nonnegative")
        if np.any(np.diff(measures) > 0.0):
            raise InputError("measures must be nonincreasing in the level")
        if np.any(measures > DOMAIN_VOLUME * (1.0 + 1e-12)):
            raise InputError("measures cannot exceed the domain volume")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "measures", measures)

    def as_dict(self):
        return {"levels": self.levels.tolist(),
                "measures": self.measures.tolist()}

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level", "measure"])
            for k, mu in zip(self.levels, self.measures):
                writer.writerow([repr(float(k)), repr(float(mu))])


def default_levels(fld: GridField, n_levels: int = 64) -> np.ndarray:
    """64 geometric levels from 1% of sup|u| up to sup|u| (bulk and tail)."""
    sup = fld.sup_norm()
    if sup == 0.0:
        return np.array([1.0])
    return np.geomspace(0.01 * sup, sup, n_levels)


def distribution_function(fld: GridField, levels: np.ndarray) -> DistributionFunction:
    """Cell-counting measures |{|u| > k}| at each requested level."""
    levels = np.asarray(levels, dtype=np.float64)
    mags = np.sort(np.abs(fld.values).ravel())
    counts = mags.size - np.searchsorted(mags, levels, "right")
    vol = fld.spacing ** 3
    return DistributionFunction(levels=levels, measures=vol * counts)


def weak_norm_estimate(d: DistributionFunction, p: float) -> float:
    """max over the level grid of k^p * |A_k|."""
    if not p > 0.0:
        raise ParameterError(f"exponent p must be positive, got {p}")
    return float(np.max(d.levels ** p * d.measures))


def fit_power_exponent(d: DistributionFunction, k_min: float,
                       k_max: float) -> tuple[float, float]:
    """Log-log least-squares slope of |A_k| vs k on [k_min, k_max].

    Returns (slope, r_squared); needs at least 5 levels with positive measure
    in the window.
    """
    sel = (d.levels >= k_min) & (d.levels <= k_max) & (d.measures > 0.0)
    if int(np.count_nonzero(sel)) < 5:
        raise FitError(
            f"need >= 5 levels with positive measure in [{k_min}, {k_max}], "
            f"got {int(np.count_nonzero(sel))}")
    x = np.log(d.levels[sel])
    y = np.log(d.measures[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r_squared)


def energy_inequality_check(u: GridField, f: GridField,
                            coeff: CoefficientSpec, k: float,
                            h: float) -> float:
    """Residual RHS - LHS of the level-set energy inequality.

    LHS = alpha_low * sum over faces with both cells in the band
    {k < |u| <= h} (and matching sign) of (face difference)^2 weighted by
    1/(1 + max adjacent |u|)^theta, times the face volume weight; RHS is the
    cell quadrature of f * T_{h-k}(G_k(u)).  A nonnegative residual means the
    inequality holds discretely; small negative values are discretization and
    solver-tolerance slack.
    """
    if not 0.0 < k < h:
        raise ParameterError(f"need 0 < k < h, got k={k}, h={h}")
    if u.n_cells != f.n_cells:
        raise InputError(
            f"solution grid N={u.n_cells} does not match source N={f.n_cells}")
    vals = u.values
    spacing = u.spacing
    test = truncate(excess(vals, k), h - k)
    rhs = float(np.sum(f.values * test)) * spacing ** 3

    mags = np.abs(vals)
    band = (mags > k) & (mags <= h)
    sign = np.sign(vals)
    lhs = 0.0
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        both = band[lo] & band[hi] & (sign[lo] == sign[hi])
        du = vals[hi][both] - vals[lo][both]
        weight = (1.0 + np.maximum(mags[lo][both], mags[hi][both])) \
            ** coeff.theta
        lhs += float(np.sum(du * du / weight))
    lhs *= coeff.alpha_low * spacing
    return rhs - lhs


@dataclass(frozen=True)
class ExponentTable:
    """Sobolev/Marcinkiewicz exponent bookkeeping for a weak-L^m source."""

    n: int
    m: float
    theta: float
    two_star: float = field(init=False)
    two_star_prime: float = field(init=False)
    m_prime: float = field(init=False)
    m_double_star: float | None = field(init=False)
    regime: str = field(init=False)
    predicted_exponent: float | None = field(init=False)
    recursion_alpha: float = field(init=False)
    recursion_beta: float = field(init=False)
    recursion_theta: float = field(init=False)

    def __post_init__(self):
        if self.n <= 2:
            raise ParameterError(f"dimension must exceed 2, got {self.n}")
        if not (math.isfinite(self.m) and self.m > 1.0):
            raise ParameterError(f"source exponent m must exceed 1, got {self.m}")
        if not 0.0 <= self.theta < 1.0:
            raise ParameterError(f"theta must lie in [0, 1), got {self.theta}")
        n, m = float(self.n), self.m
        two_star = 2.0 * n / (n - 2.0)
        two_star_prime = 2.0 * n / (n + 2.0)
        m_prime = m / (m - 1.0)
        if m > n / 2.0:
            regime, mss = "bounded", None
        elif m == n / 2.0:
            regime, mss = "exponential", None
        elif m > two_star_prime:
            regime, mss = "weak_power", n * m / (n - 2.0 * m)
        else:
            regime, mss = "entropy_weak_power", n * m / (n - 2.0 * m)
        object.__setattr__(self, "two_star", two_star)
        object.__setattr__(self, "two_star_prime", two_star_prime)
        object.__setattr__(self, "m_prime", m_prime)
        object.__setattr__(self, "m_double_star", mss)
        object.__setattr__(self, "regime", regime)
        object.__setattr__(self, "predicted_exponent",
                           None if mss is None else mss * (1.0 - self.theta))
        object.__setattr__(self, "recursion_alpha", two_star / 2.0)
        object.__setattr__(self, "recursion_beta", two_star / (2.0 * m_prime))
        object.__setattr__(self, "recursion_theta", self.theta)

    def as_dict(self):
        return {
            "n": self.n, "m": self.m, "theta": self.theta,
            "two_star": self.two_star, "two_star_prime": self.two_star_prime,
            "m_prime": self.m_prime, "m_double_star": self.m_double_star,
            "regime": self.regime,
            "predicted_exponent": self.predicted_exponent,
            "recursion_alpha": self.recursion_alpha,
            "recursion_beta": self.recursion_beta,
            "recursion_theta": self.recursion_theta,
        }


def exponent_table(m: float, theta: float, n: int = 3) -> ExponentTable:
    """Derived exponents and regime classification for a weak-L^m source."""
    return ExponentTable(n=n, m=m, theta=theta)


def levelset_recursion_fit(d: DistributionFunction, x: ExponentTable) -> float:
    """Empirical constant of the level-set recursion between distribution pairs.

    Over pairs h >= 1.5k with k >= 1 and |A_k| > 0, the largest value of
    |A_h| * (h-k)^ra / (h^(rt*ra) * |A_k|^rb), with (ra, rb, rt) the
    recursion exponents of the table; finiteness/stability of this constant
    under refinement is the hypothesis check feeding the decay lemmas.
    """
    ra, rb, rt = x.recursion_alpha, x.recursion_beta, x.recursion_theta
    levels, measures = d.levels, d.measures
    best = None
    for i in range(levels.size):
        k = levels[i]
        if k < 1.0 or measures[i] <= 0.0:
            continue
        hs = levels[levels >= 1.5 * k]
        if hs.size == 0:
            continue
        mu_h = measures[levels >= 1.5 * k]
        vals = mu_h * (hs - k) ** ra / (hs ** (rt * ra) * measures[i] ** rb)
        cand = float(np.max(vals))
        best = cand if best is None else max(best, cand)
    if best is None:
        raise FitError("no admissible level pairs (need h >= 1.5k with k >= 1 "
                       "and positive measure at k)")
    return best


@dataclass(frozen=True)
class ExpIntegrabilityParams:
    """Scale pair (tau, lambda) tied by 2^(2-theta) * lambda = tau^(theta-1)."""

    tau: float
    theta: float
    lam: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.theta < 1.0:
            raise ParameterError(f"theta must lie in [0, 1), got {self.theta}")
        object.__setattr__(
            self, "lam",
            self.tau ** (self.theta - 1.0) / 2.0 ** (2.0 - self.theta))


def series_integrability_check(d_g: DistributionFunction,
                               r: float) -> tuple[float, bool]:
    """Partial sum of k^(r-1) * |{|g| > k}| over the integer level grid.

    converged is True when the last term falls below 1e-12 or the measures
    reach exactly zero — the discrete stand-in for summability of the tail.
    """
    if not r >= 1.0:
        raise ParameterError(f"integrability order r must be >= 1, got {r}")
    terms = d_g.levels ** (r - 1.0) * d_g.measures
    total = float(np.sum(terms))
    converged = bool(d_g.measures[-1] == 0.0 or terms[-1] < 1e-12)
    return total, converged


def _block_restrict(fine: np.ndarray, n_coarse: int) -> np.ndarray:
    q, rem = divmod(fine.shape[0], n_coarse)
    if rem != 0:
        raise InputError(
            f"fine grid N={fine.shape[0]} is not a multiple of N={n_coarse}")
    return fine.reshape(n_coarse, q, n_coarse, q, n_coarse, q).mean(axis=(1, 3, 5))


def grid_stability(coarse: GridField, fine: GridField) -> float:
    """sup |coarse - restricted fine| / sup |fine|, on the coarse grid.

    The fine field is block-averaged onto the coarse cells; this is the
    grid-comparison metric used by the bounded-regime verdict.
    """
    restricted = _block_restrict(fine.values, coarse.n_cells)
    sup_fine = fine.sup_norm()
    if sup_fine == 0.0:
        return float(np.max(np.abs(coarse.values)))
    return float(np.max(np.abs(coarse.values - restricted))) / sup_fine


@dataclass(frozen=True)
class RegularityReport:
    """Regime classification plus the regime-specific verification numbers."""

    regime: str
    table: ExponentTable
    verdicts: dict
    distribution: DistributionFunction
    passed: bool

    def as_dict(self):
        return {
            "regime": self.regime,
            "exponent_table": self.table.as_dict(),
            "verdicts": dict(self.verdicts),
            "distribution_function": self.distribution.as_dict(),
            "passed": self.passed,
        }


def regime_verdict(u: GridField, x: ExponentTable,
                   recursion_params: LemmaParams | None = None,
                   u_fine: GridField | None = None) -> RegularityReport:
    """Check the field against its regime's predicted regularity.

    bounded: reports sup|u| (and its stability against `u_fine` when given).
    exponential: builds lambda from 2^(2-theta) lambda = tau^(theta-1) with
    tau from the beta=1 decay scale of `recursion_params` (default: the
    recursion exponents of `x` with c = k0 = phi0 = 1), forms
    g = exp(lambda |u|^(1-theta)), and requires the r=1 level series of g to
    converge.  weak_power / entropy_weak_power: reports the weak-norm
    estimate at the predicted exponent (two-grid ratio when `u_fine` is
    given) plus the fitted tail exponent and the empirical recursion
    constant.
    """
    sup = u.sup_norm()
    dist = distribution_function(u, default_levels(u))
    verdicts: dict = {"sup_u": sup}

    if x.regime == "bounded":
        passed = math.isfinite(sup)
        if u_fine is not None:
            rel = grid_stability(u, u_fine)
            verdicts["sup_u_fine"] = u_fine.sup_norm()
            verdicts["stability_rel_diff"] = rel
            passed = passed and rel <= 0.05
        return RegularityReport(regime=x.regime, table=x, verdicts=verdicts,
                                distribution=dist, passed=passed)

    if x.regime == "exponential":
        if recursion_params is None:
            recursion_params = LemmaParams(
                c=1.0, alpha=x.recursion_alpha, beta=1.0,
                theta=x.recursion_theta, k0=1.0, phi0=1.0)
        if recursion_params.beta != 1.0:
            raise ParameterError(
                "exponential regime needs beta = 1 recursion parameters")
        tau = compute_tau(recursion_params)
        pars = ExpIntegrabilityParams(tau=tau, theta=x.theta)
        g = GridField(
            n_cells=u.n_cells,
            values=np.exp(pars.lam * np.abs(u.values) ** (1.0 - x.theta)))
        top = int(math.ceil(g.sup_norm()))
        d_g = distribution_function(
            g, np.arange(1.0, max(top, 1) + 1.0))
        total, converged = series_integrability_check(d_g, 1.0)
        verdicts.update(tau=tau, lam=pars.lam, series_sum=total,
                        series_converged=converged)
        return RegularityReport(regime=x.regime, table=x, verdicts=verdicts,
                                distribution=dist, passed=converged)

    p = x.predicted_exponent
    estimate = weak_norm_estimate(dist, p) if sup > 0.0 else 0.0
    verdicts["weak_norm_exponent"] = p
    verdicts["weak_norm"] = estimate
    passed = math.isfinite(estimate)
    if sup > 0.0:
        try:
            slope, r2 = fit_power_exponent(dist, 0.1 * sup, sup)
            verdicts["fitted_exponent"] = slope
            verdicts["fit_r_squared"] = r2
        except FitError:
            verdicts["fitted_exponent"] = None
        if dist.levels[-1] >= 1.5:
            try:
                verdicts["recursion_constant"] = levelset_recursion_fit(dist, x)
            except FitError:
                verdicts["recursion_constant"] = None
    if u_fine is not None and sup > 0.0:
        dist_fine = distribution_function(u_fine, default_levels(u_fine))
        est_fine = weak_norm_estimate(dist_fine, p)
        verdicts["weak_norm_fine"] = est_fine
        ratio = (max(estimate, est_fine) / min(estimate, est_fine)
                 if min(estimate, est_fine) > 0.0 else math.inf)
        verdicts["weak_norm_ratio"] = ratio
        passed = passed and ratio <= 2.0
        if dist_fine.levels[-1] >= 1.5:
            try:
                verdicts["recursion_constant_fine"] = levelset_recursion_fit(
                    dist_fine, x)
            except FitError:
                verdicts["recursion_constant_fine"] = None
    return RegularityReport(regime=x.regime, table=x, verdicts=verdicts,
                            distribution=dist, passed=passed)
