"""Decay lemmas for level-set functions, with fully explicit constants.

A nonincreasing phi : [k0, inf) -> [0, inf) is assumed to satisfy, for all
h > k >= k0, one of the hypotheses

    classical      phi(h) <= c * (h - k)^(-alpha) * phi(k)^beta
    kv             phi(h) <= c * k^(theta*alpha) * (h - k)^(-alpha) * phi(k)^beta
    generalized    phi(h) <= c * h^(theta*alpha) * (h - k)^(-alpha) * phi(k)^beta

with c > 0, alpha > 0, beta > 0 and 0 <= theta < 1.  Each `*_bound` function
returns the decay conclusion for its hypothesis as one of three shapes:

    VanishingLevel     phi == 0 from a finite level on          (beta > 1)
    ExponentialDecay   phi(k) <= phi0 * e^(1 - ((k-k0)/tau)^(1-theta))  (beta = 1)
    PowerLawDecay      phi(k) <= coefficient * k^(-exponent)    (beta < 1)

All constants are computed in closed form; nothing here is fitted.  The
companion `oracle` module cross-checks every bound against a brute-force
extremal function built from the same hypothesis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError, ParameterError, RegimeError

E = math.e


@dataclass(frozen=True)
class LemmaParams:
    """Hypothesis constants (c, alpha, beta, theta) and data (k0, phi0)."""

    c: float
    alpha: float
    beta: float
    theta: float = 0.0
    k0: float = 1.0
    phi0: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError(f"c must be positive and finite, got {self.c}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"alpha must be positive and finite, got {self.alpha}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must be positive and finite, got {self.beta}")
        if not (0.0 <= self.theta < 1.0):
            raise ParameterError(f"theta must lie in [0, 1), got {self.theta}")
        if not (self.k0 > 0 and math.isfinite(self.k0)):
            raise ParameterError(f"k0 must be positive and finite, got {self.k0}")
        if not (self.phi0 >= 0 and math.isfinite(self.phi0)):
            raise ParameterError(f"phi0 must be nonnegative and finite, got {self.phi0}")


@dataclass(frozen=True)
class VanishingLevel:
    """phi vanishes identically at and beyond `level`."""

    level: float
    constants: dict = field(default_factory=dict)

    def evaluate(self, k):
        """Bound value at level k: +inf below `level` (no constraint), 0 beyond."""
        k = np.asarray(k, dtype=float)
        return np.where(k >= self.level, 0.0, np.inf)

    def as_dict(self):
        return {"kind": "vanishing", "level": self.level, "constants": dict(self.constants)}


@dataclass(frozen=True)
class ExponentialDecay:
    """phi(k) <= phi0 * exp(1 - ((k - base_level)/tau)^(1-theta))."""

    tau: float
    theta: float
    base_level: float
    phi0: float
    constants: dict = field(default_factory=dict)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        s = np.maximum(k - self.base_level, 0.0) / self.tau
        return self.phi0 * np.exp(1.0 - s ** (1.0 - self.theta))

    def as_dict(self):
        return {
            "kind": "exponential",
            "tau": self.tau,
            "theta": self.theta,
            "base_level": self.base_level,
            "phi0": self.phi0,
            "constants": dict(self.constants),
        }


@dataclass(frozen=True)
class PowerLawDecay:
    """phi(k) <= coefficient * k^(-exponent)."""

    coefficient: float
    exponent: float
    constants: dict = field(default_factory=dict)

    def evaluate(self, k):
        k = np.asarray(k, dtype=float)
        return self.coefficient * k ** (-self.exponent)

    def as_dict(self):
        return {
            "kind": "power_law",
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "constants": dict(self.constants),
        }


DecayBound = VanishingLevel | ExponentialDecay | PowerLawDecay


def _finite(x, what):
    if not math.isfinite(x):
        raise NonFiniteError(f"{what} overflowed to {x}")
    return x


def classical_bound(p: LemmaParams) -> DecayBound:
    """Decay conclusion under the classical hypothesis (theta plays no role).

    beta > 1: phi vanishes at k0 + d with d^alpha = c * phi0^(beta-1) * 2^(alpha*beta/(beta-1)).
    beta = 1: exponential with rate (c*e)^(-1/alpha) per unit level.
    beta < 1: power law with exponent alpha/(1-beta).
    """
    c, a, b, k0, phi0 = p.c, p.alpha, p.beta, p.k0, p.phi0
    if b > 1:
        d = (c * phi0 ** (b - 1.0) * 2.0 ** (a * b / (b - 1.0))) ** (1.0 / a)
        _finite(d, "vanishing-level offset")
        return VanishingLevel(level=k0 + d, constants={"d": d})
    if b == 1:
        tau = (c * E) ** (1.0 / a)
        _finite(tau, "exponential decay scale")
        return ExponentialDecay(tau=tau, theta=0.0, base_level=k0, phi0=phi0,
                                constants={"tau": tau})
    exponent = a / (1.0 - b)
    coeff = 2.0 ** (a / (1.0 - b) ** 2) * (c ** (1.0 / (1.0 - b))
                                           + (2.0 * k0) ** exponent * phi0)
    _finite(coeff, "power-law coefficient")
    return PowerLawDecay(coefficient=coeff, exponent=exponent, constants={})


def compute_L(p: LemmaParams) -> float:
    """Level scale L for the generalized hypothesis with beta > 1.

    L = max{ 2*k0,
             c^(1/((1-theta)*alpha)) * phi0^((beta-1)/((1-theta)*alpha))
               * 2^( (beta + theta + 1/(beta-1)) / ((1-theta)*beta) ) }

    and phi(2L) = 0.
    """
    if p.beta <= 1:
        raise RegimeError(f"compute_L needs beta > 1, got beta={p.beta}")
    c, a, b, th, k0, phi0 = p.c, p.alpha, p.beta, p.theta, p.k0, p.phi0
    ia = 1.0 / ((1.0 - th) * a)
    two_exp = (b + th + 1.0 / (b - 1.0)) / ((1.0 - th) * b)
    cand = c ** ia * phi0 ** ((b - 1.0) * ia) * 2.0 ** two_exp
    return _finite(max(2.0 * k0, cand), "level scale L")


def compute_tau(p: LemmaParams) -> float:
    """Decay scale tau for the generalized hypothesis with beta = 1.

    tau = max{ k0, ( c*e * 2^((2-theta)*theta*alpha/(1-theta)) * (1-theta)^alpha
                   )^(1/((1-theta)*alpha)) }
    """
    if p.beta != 1:
        raise RegimeError(f"compute_tau needs beta = 1, got beta={p.beta}")
    c, a, th, k0 = p.c, p.alpha, p.theta, p.k0
    inner = c * E * 2.0 ** ((2.0 - th) * th * a / (1.0 - th)) * (1.0 - th) ** a
    cand = inner ** (1.0 / ((1.0 - th) * a))
    return _finite(max(k0, cand), "decay scale tau")


def compute_power_constants(p: LemmaParams) -> tuple[float, float]:
    """Constants (c1, c2) for the generalized hypothesis with beta < 1.

    c2 = 2^((1-theta)*alpha/(1-beta)^2) * ( (c*2^(theta*alpha))^(1/(1-beta))
                                            + (2*k0)^((1-theta)*alpha/(1-beta)) * phi0 )
    c1 = max{ 4^((1-theta)*alpha) * c * 2^(theta*alpha), c2^(1-beta) }
    """
    if p.beta >= 1:
        raise RegimeError(f"compute_power_constants needs beta < 1, got beta={p.beta}")
    c, a, b, th, k0, phi0 = p.c, p.alpha, p.beta, p.theta, p.k0, p.phi0
    ta = (1.0 - th) * a
    c2 = 2.0 ** (ta / (1.0 - b) ** 2) * ((c * 2.0 ** (th * a)) ** (1.0 / (1.0 - b))
                                         + (2.0 * k0) ** (ta / (1.0 - b)) * phi0)
    c1 = max(4.0 ** ta * c * 2.0 ** (th * a), c2 ** (1.0 - b))
    _finite(c2, "power constant c2")
    _finite(c1, "power constant c1")
    return c1, c2


def generalized_bound(p: LemmaParams) -> DecayBound:
    """Decay conclusion under the generalized hypothesis.

    beta > 1: phi vanishes at 2L, L from compute_L.
    beta = 1: phi(k) <= phi0 * e^(1 - ((k-k0)/tau)^(1-theta)), tau from compute_tau.
    beta < 1: phi(k) <= 2^((1-theta)*alpha/(1-beta)^2)
                        * ( (c1*2^(theta*alpha))^(1/(1-beta))
                            + (2*k0)^((1-theta)*alpha/(1-beta)) * phi0 ) * k^(-exponent)
              with exponent = alpha*(1-theta)/(1-beta) and c1 from compute_power_constants.
    """
    c, a, b, th, k0, phi0 = p.c, p.alpha, p.beta, p.theta, p.k0, p.phi0
    if b > 1:
        L = compute_L(p)
        return VanishingLevel(level=2.0 * L, constants={"L": L})
    if b == 1:
        tau = compute_tau(p)
        return ExponentialDecay(tau=tau, theta=th, base_level=k0, phi0=phi0,
                                constants={"tau": tau})
    c1, c2 = compute_power_constants(p)
    ta = (1.0 - th) * a
    exponent = ta / (1.0 - b)
    coeff = 2.0 ** (ta / (1.0 - b) ** 2) * ((c1 * 2.0 ** (th * a)) ** (1.0 / (1.0 - b))
                                            + (2.0 * k0) ** exponent * phi0)
    _finite(coeff, "power-law coefficient")
    return PowerLawDecay(coefficient=coeff, exponent=exponent,
                         constants={"c1": c1, "c2": c2})


def kv_bound(p: LemmaParams) -> DecayBound:
    """Decay conclusion under the kv hypothesis (numerator c * k^(theta*alpha)).

    beta > 1: the kv hypothesis implies the generalized one (k <= h), so the
              explicit level 2L from the generalized machinery is reported.
    beta = 1: tau = max{ k0, (c*e * 2^(theta*alpha) * (1-theta)^alpha)^(1/((1-theta)*alpha)),
              (c*e)^(1/alpha) * k0^theta }.
              The last entry makes the first step of the usual chain argument
              (from k0 to k0 + tau) contract by 1/e: that step needs
              c*e * k0^(theta*alpha) <= tau^alpha, which the k0 clamp alone
              does not give once theta > 0; without it the constant-phi0
              plateau of the extremal function outlives the claimed decay.
    beta < 1: coefficient 2^(alpha*(1-theta)/(1-beta)^2)
              * ( c^(1/(1-beta)) + (2*k0)^(alpha*(1-theta)/(1-beta)) * phi0 ),
              exponent alpha*(1-theta)/(1-beta).
    """
    c, a, b, th, k0, phi0 = p.c, p.alpha, p.beta, p.theta, p.k0, p.phi0
    if b > 1:
        L = compute_L(p)
        return VanishingLevel(level=2.0 * L, constants={"L": L})
    if b == 1:
        inner = c * E * 2.0 ** (th * a) * (1.0 - th) ** a
        first_step = (c * E) ** (1.0 / a) * k0 ** th
        tau = max(k0, inner ** (1.0 / ((1.0 - th) * a)), first_step)
        _finite(tau, "decay scale tau")
        return ExponentialDecay(tau=tau, theta=th, base_level=k0, phi0=phi0,
                                constants={"tau": tau})
    ta = (1.0 - th) * a
    exponent = ta / (1.0 - b)
    coeff = 2.0 ** (ta / (1.0 - b) ** 2) * (c ** (1.0 / (1.0 - b))
                                            + (2.0 * k0) ** exponent * phi0)
    _finite(coeff, "power-law coefficient")
    return PowerLawDecay(coefficient=coeff, exponent=exponent, constants={})


_BOUND_FUNCS = {
    "classical": classical_bound,
    "kv": kv_bound,
    "generalized": generalized_bound,
}


def bound_for(p: LemmaParams, variant: str) -> DecayBound:
    """Dispatch to the bound for one of the three hypothesis variants."""
    try:
        return _BOUND_FUNCS[variant](p)
    except KeyError:
        raise ParameterError(f"unknown variant {variant!r}") from None


@dataclass(frozen=True)
class IterationParams:
    """Data for the fast-iteration estimate x_{i+1} <= C * B^i * x_i^beta."""

    C: float
    B: float
    beta: float
    x0: float

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ParameterError(f"C must be positive and finite, got {self.C}")
        if not (self.B > 1 and math.isfinite(self.B)):
            raise ParameterError(f"B must exceed 1, got {self.B}")
        if not (self.beta > 1 and math.isfinite(self.beta)):
            raise ParameterError(f"beta must exceed 1, got {self.beta}")
        if not (self.x0 >= 0 and math.isfinite(self.x0)):
            raise ParameterError(f"x0 must be nonnegative and finite, got {self.x0}")


def iteration_threshold(q: IterationParams) -> float:
    """Largest x0 guaranteeing decay: C^(-1/(beta-1)) * B^(-1/(beta-1)^2)."""
    bm = q.beta - 1.0
    return q.C ** (-1.0 / bm) * q.B ** (-1.0 / bm ** 2)


def iteration_limit(q: IterationParams, n_steps: int) -> tuple[list[float], bool]:
    """Run x_{i+1} = C * B^i * x_i^beta for n_steps and report guaranteed decay.

    Returns (sequence [x_0 .. x_n], converged) where converged is the analytic
    smallness test x0 <= C^(-1/(beta-1)) * B^(-1/(beta-1)^2).  When it holds,
    every x_i <= B^(-i/(beta-1)) * x0.  A diverging sequence that overflows is
    truncated at its first non-finite value (reported as divergence, not raised).
    """
    if n_steps < 0:
        raise ParameterError(f"n_steps must be >= 0, got {n_steps}")
    converged = q.x0 <= iteration_threshold(q)
    xs = [q.x0]
    x = q.x0
    for i in range(n_steps):
        try:
            x = q.C * q.B ** i * x ** q.beta
        except OverflowError:
            x = math.inf
        xs.append(x)
        if not math.isfinite(x):
            break
    return xs, converged


def doubling_transfer(c3: float, alpha_tilde: float, beta: float, k0: float,
                      phi0: float) -> tuple[float, float]:
    """Constants (c4, c5) turning a doubled-level hypothesis into a power law.

    Given phi(2k) <= c3 * k^(-alpha_tilde) * phi(k)^beta for k >= k0 with
    beta < 1, the decay phi(k) <= c4-based power law holds with

        c5 = 2^(alpha_tilde/(1-beta)^2) * ( c3^(1/(1-beta))
                                            + (2*k0)^(alpha_tilde/(1-beta)) * phi0 )
        c4 = max{ 4^alpha_tilde * c3, c5^(1-beta) }.
    """
    if not 0.0 < beta < 1.0:
        raise RegimeError(f"doubling_transfer needs beta in (0, 1), got beta={beta}")
    if not (c3 > 0 and alpha_tilde > 0 and k0 > 0 and phi0 >= 0):
        raise ParameterError("doubling_transfer needs c3, alpha_tilde, k0 > 0 and phi0 >= 0")
    c5 = 2.0 ** (alpha_tilde / (1.0 - beta) ** 2) * (
        c3 ** (1.0 / (1.0 - beta)) + (2.0 * k0) ** (alpha_tilde / (1.0 - beta)) * phi0)
    c4 = max(4.0 ** alpha_tilde * c3, c5 ** (1.0 - beta))
    _finite(c5, "doubling constant c5")
    _finite(c4, "doubling constant c4")
    return c4, c5
