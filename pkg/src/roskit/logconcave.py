"""Extremal symmetric laws under second- and p-th-moment constraints.

Two two-parameter density families bracket every symmetric log-concave
law with matched moments: plateau-with-exponential-tail densities on the
minus side and truncated exponentials on the plus side, with the uniform
and two-sided exponential densities as shared boundary members.  The
analogous tail-law families (exponential tail with an offset; truncated
exponential tail with an atom at the cutoff) bracket the laws with
log-concave survival functions.

Matching a (second, p-th) moment pair to a family member is a monotone
one-dimensional solve along an explicit parametrization that pins the
second moment; limits (uniform, exponential, two-point) are handled by
tags, never by feeding infinities into formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import specfun
from .errors import DomainError, FeasibilityError

__all__ = [
    "PlateauExpDensity",
    "TruncatedExpDensity",
    "TailLawMinus",
    "TailLawPlus",
    "MatchTarget",
    "feasibility_interval_density",
    "feasibility_interval_tail",
    "density_abs_moment",
    "tail_abs_moment",
    "match_density_minus",
    "match_density_plus",
    "match_tail",
    "density_eval",
    "tail_eval",
    "sample",
]

_BOUNDARY_RTOL = 1e-12


def _offset_exp_integral(r: float, offset: float, rate: float) -> float:
    """J = integral_0^inf (offset + u)^r exp(-rate u) du, for r >= 0."""
    if offset == 0.0:
        return math.exp(specfun.log_gamma(r + 1.0) - (r + 1.0) * math.log(rate))
    if float(r).is_integer() and r >= 0:
        r_int = int(r)
        return math.fsum(
            math.comb(r_int, k) * offset ** (r_int - k) * math.factorial(k) / rate ** (k + 1)
            for k in range(r_int + 1)
        )
    x = offset * rate
    log_j = specfun.log_upper_gamma_exp_scaled(r + 1.0, x) - (r + 1.0) * math.log(rate)
    return math.exp(log_j)


# ---------------------------------------------------------------------------
# density families


@dataclass(frozen=True)
class PlateauExpDensity:
    """Symmetric density constant on [-alpha, alpha] with exponential decay
    of rate gamma outside; gamma = inf tags the uniform limit, alpha = 0 the
    two-sided exponential limit."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if self.alpha < 0.0:
            raise DomainError("plateau half-width must be nonnegative")
        if not self.gamma > 0.0:
            raise DomainError("tail rate must be positive (inf for the uniform limit)")
        if math.isinf(self.gamma) and self.alpha == 0.0:
            raise DomainError("uniform limit needs a positive half-width")

    @property
    def limit(self) -> str:
        if math.isinf(self.gamma):
            return "uniform"
        if self.alpha == 0.0:
            return "exponential"
        return "interior"

    def normalizer(self) -> float:
        if self.limit == "uniform":
            return 1.0 / (2.0 * self.alpha)
        return 1.0 / (2.0 * (self.alpha + 1.0 / self.gamma))

    def pdf(self, x: float) -> float:
        ax = abs(x)
        if self.limit == "uniform":
            return self.normalizer() if ax <= self.alpha else 0.0
        return self.normalizer() * math.exp(-self.gamma * max(ax - self.alpha, 0.0))

    def cdf(self, x: float) -> float:
        if x < 0.0:
            return 1.0 - self.cdf(-x)
        c = self.normalizer()
        if self.limit == "uniform":
            return 0.5 + c * min(x, self.alpha)
        head = c * min(x, self.alpha)
        tail = 0.0
        if x > self.alpha:
            tail = c / self.gamma * (1.0 - math.exp(-self.gamma * (x - self.alpha)))
        return 0.5 + head + tail

    def abs_moment(self, r: float) -> float:
        if not r > 0.0:
            raise DomainError("moment order must be positive")
        if self.limit == "uniform":
            return self.alpha**r / (r + 1.0)
        if self.limit == "exponential":
            return math.exp(specfun.log_gamma(r + 1.0) - r * math.log(self.gamma))
        num = self.alpha ** (r + 1.0) / (r + 1.0) + _offset_exp_integral(
            r, self.alpha, self.gamma
        )
        return num / (self.alpha + 1.0 / self.gamma)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=n) * 2 - 1
        u = rng.random(n)
        if self.limit == "uniform":
            return signs * self.alpha * u
        if self.limit == "exponential":
            return signs * rng.exponential(1.0 / self.gamma, size=n)
        plateau_mass = self.alpha / (self.alpha + 1.0 / self.gamma)
        width = self.alpha + 1.0 / self.gamma
        mags = np.where(
            u < plateau_mass,
            u * width,
            self.alpha + rng.exponential(1.0 / self.gamma, size=n),
        )
        return signs * mags

    def to_record(self) -> dict:
        return {"family": "fminus", "alpha": self.alpha, "gamma": self.gamma}


@dataclass(frozen=True)
class TruncatedExpDensity:
    """Symmetric exponential density of rate gamma truncated to
    [-alpha, alpha]; gamma = 0 tags the uniform limit, alpha = inf the
    two-sided exponential limit."""

    alpha: float
    gamma: float

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise DomainError("truncation point must be positive (inf for the exponential limit)")
        if self.gamma < 0.0:
            raise DomainError("rate must be nonnegative (0 for the uniform limit)")
        if math.isinf(self.alpha) and self.gamma == 0.0:
            raise DomainError("exponential limit needs a positive rate")

    @property
    def limit(self) -> str:
        if self.gamma == 0.0:
            return "uniform"
        if math.isinf(self.alpha):
            return "exponential"
        return "interior"

    def normalizer(self) -> float:
        if self.limit == "uniform":
            return 1.0 / (2.0 * self.alpha)
        if self.limit == "exponential":
            return self.gamma / 2.0
        return self.gamma / (2.0 * (1.0 - math.exp(-self.alpha * self.gamma)))

    def pdf(self, x: float) -> float:
        ax = abs(x)
        if ax > self.alpha:
            return 0.0
        if self.limit == "uniform":
            return self.normalizer()
        return self.normalizer() * math.exp(-self.gamma * ax)

    def cdf(self, x: float) -> float:
        if x < 0.0:
            return 1.0 - self.cdf(-x)
        if self.limit == "uniform":
            return 0.5 + min(x, self.alpha) / (2.0 * self.alpha)
        if self.limit == "exponential":
            return 1.0 - 0.5 * math.exp(-self.gamma * x)
        num = 1.0 - math.exp(-self.gamma * min(x, self.alpha))
        den = 1.0 - math.exp(-self.alpha * self.gamma)
        return 0.5 + 0.5 * num / den

    def abs_moment(self, r: float) -> float:
        if not r > 0.0:
            raise DomainError("moment order must be positive")
        if self.limit == "uniform":
            return self.alpha**r / (r + 1.0)
        if self.limit == "exponential":
            return math.exp(specfun.log_gamma(r + 1.0) - r * math.log(self.gamma))
        kappa = self.alpha * self.gamma
        p_reg = specfun.reg_lower_inc_gamma(r + 1.0, kappa)
        log_val = specfun.log_gamma(r + 1.0) - r * math.log(self.gamma)
        return math.exp(log_val) * p_reg / (1.0 - math.exp(-kappa))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=n) * 2 - 1
        u = rng.random(n)
        if self.limit == "uniform":
            return signs * self.alpha * u
        if self.limit == "exponential":
            return signs * rng.exponential(1.0 / self.gamma, size=n)
        mags = -np.log1p(-u * (1.0 - math.exp(-self.alpha * self.gamma))) / self.gamma
        return signs * mags

    def to_record(self) -> dict:
        return {"family": "fplus", "alpha": self.alpha, "gamma": self.gamma}


# ---------------------------------------------------------------------------
# tail-law families


@dataclass(frozen=True)
class TailLawMinus:
    """Survival of |X| equal to exp(-rate (t - offset)_+): no mass inside
    (-offset, offset), exponential tail outside.  rate = inf tags the
    two-point law at +-offset."""

    rate: float
    offset: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DomainError("tail rate must be positive (inf for the two-point limit)")
        if self.offset < 0.0:
            raise DomainError("offset must be nonnegative")
        if math.isinf(self.rate) and self.offset == 0.0:
            raise DomainError("two-point limit needs a positive offset")

    @property
    def limit(self) -> str:
        if math.isinf(self.rate):
            return "two_point"
        if self.offset == 0.0:
            return "exponential"
        return "interior"

    def survival(self, t: float) -> float:
        if t < 0.0:
            raise DomainError("survival is defined on t >= 0")
        if self.limit == "two_point":
            return 1.0 if t < self.offset else 0.0
        return math.exp(-self.rate * max(t - self.offset, 0.0))

    def abs_moment(self, r: float) -> float:
        if not r > 0.0:
            raise DomainError("moment order must be positive")
        if self.limit == "two_point":
            return self.offset**r
        if self.limit == "exponential":
            return math.exp(specfun.log_gamma(r + 1.0) - r * math.log(self.rate))
        return self.offset**r + r * _offset_exp_integral(r - 1.0, self.offset, self.rate)

    def atoms(self) -> dict:
        if self.limit == "two_point":
            return {-self.offset: 0.5, self.offset: 0.5}
        return {}

    def pdf(self, x: float) -> float:
        """Density of the continuous part of the signed law."""
        if self.limit == "two_point":
            return 0.0
        ax = abs(x)
        if ax < self.offset:
            return 0.0
        return 0.5 * self.rate * math.exp(-self.rate * (ax - self.offset))

    def cdf(self, x: float) -> float:
        """CDF of the continuous part (the whole law unless two-point)."""
        if self.limit == "two_point":
            return 0.0
        if x < 0.0:
            return 1.0 - self.cdf(-x)
        return 1.0 - 0.5 * self.survival(x)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=n) * 2 - 1
        if self.limit == "two_point":
            return signs * self.offset
        return signs * (self.offset + rng.exponential(1.0 / self.rate, size=n))

    def to_record(self) -> dict:
        return {"family": "gminus", "rate": self.rate, "offset": self.offset}


@dataclass(frozen=True)
class TailLawPlus:
    """Survival of |X| equal to exp(-rate t) on [0, cutoff), zero beyond:
    |X| = min(exponential, cutoff), with an atom of mass exp(-rate cutoff)
    at the cutoff.  rate = 0 tags the two-point law, cutoff = inf the
    exponential limit."""

    rate: float
    cutoff: float

    def __post_init__(self):
        if self.rate < 0.0:
            raise DomainError("rate must be nonnegative (0 for the two-point limit)")
        if not self.cutoff > 0.0:
            raise DomainError("cutoff must be positive (inf for the exponential limit)")
        if math.isinf(self.cutoff) and self.rate == 0.0:
            raise DomainError("exponential limit needs a positive rate")

    @property
    def limit(self) -> str:
        if self.rate == 0.0:
            return "two_point"
        if math.isinf(self.cutoff):
            return "exponential"
        return "interior"

    def survival(self, t: float) -> float:
        if t < 0.0:
            raise DomainError("survival is defined on t >= 0")
        if t >= self.cutoff:
            return 0.0
        return math.exp(-self.rate * t)

    def abs_moment(self, r: float) -> float:
        if not r > 0.0:
            raise DomainError("moment order must be positive")
        if self.limit == "two_point":
            return self.cutoff**r
        if self.limit == "exponential":
            return math.exp(specfun.log_gamma(r + 1.0) - r * math.log(self.rate))
        p_reg = specfun.reg_lower_inc_gamma(r, self.rate * self.cutoff)
        return r * math.exp(specfun.log_gamma(r) - r * math.log(self.rate)) * p_reg

    def atom_mass(self) -> float:
        if self.limit == "two_point":
            return 1.0
        if self.limit == "exponential":
            return 0.0
        return math.exp(-self.rate * self.cutoff)

    def atoms(self) -> dict:
        m = self.atom_mass()
        if m == 0.0:
            return {}
        return {-self.cutoff: m / 2.0, self.cutoff: m / 2.0}

    def pdf(self, x: float) -> float:
        """Density of the continuous part of the signed law."""
        ax = abs(x)
        if self.limit == "two_point" or ax >= self.cutoff:
            return 0.0
        return 0.5 * self.rate * math.exp(-self.rate * ax)

    def cdf(self, x: float) -> float:
        """CDF of the continuous part only (atoms reported separately)."""
        if self.limit == "two_point":
            return 0.0
        cont = self._cont_mass()
        if x < 0.0:
            return cont - self.cdf(-x)
        inner = min(x, self.cutoff) if not math.isinf(self.cutoff) else x
        return 0.5 * cont + 0.5 * (1.0 - math.exp(-self.rate * inner))

    def _cont_mass(self) -> float:
        return 1.0 - self.atom_mass()

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=n) * 2 - 1
        if self.limit == "two_point":
            return signs * self.cutoff
        mags = rng.exponential(1.0 / self.rate, size=n)
        return signs * np.minimum(mags, self.cutoff)

    def to_record(self) -> dict:
        return {"family": "gplus", "rate": self.rate, "cutoff": self.cutoff}


# ---------------------------------------------------------------------------
# feasibility and matching


@dataclass(frozen=True)
class MatchTarget:
    """Target moment pair: EX^2 = a^2 and E|X|^p = b^p."""

    p: float
    a: float
    b: float

    def __post_init__(self):
        if not self.p > 2.0:
            raise DomainError("matching requires p > 2")
        if not (self.a > 0.0 and self.b > 0.0):
            raise DomainError("moment roots a, b must be positive")


def feasibility_interval_density(p: float):
    """Range of b/a achievable by symmetric log-concave laws: from the
    uniform endpoint sqrt(3) (p+1)^(-1/p) to the two-sided exponential
    endpoint Gamma(p+1)^(1/p) / sqrt(2)."""
    if not p > 2.0:
        raise DomainError("feasibility interval requires p > 2")
    lo = math.sqrt(3.0) * (p + 1.0) ** (-1.0 / p)
    hi = math.exp(specfun.log_gamma(p + 1.0) / p) / math.sqrt(2.0)
    return lo, hi


def feasibility_interval_tail(p: float):
    """Range of b/a for laws with log-concave tails, derived from the
    boundary members of the tail families: the two-point law (ratio 1)
    and the exponential tail (shared with the density interval)."""
    _, hi = feasibility_interval_density(p)
    return 1.0, hi


def _classify_ratio(ratio: float, lo: float, hi: float) -> str:
    if abs(ratio - lo) <= _BOUNDARY_RTOL * lo:
        return "lo"
    if abs(ratio - hi) <= _BOUNDARY_RTOL * hi:
        return "hi"
    if lo < ratio < hi:
        return "interior"
    raise FeasibilityError(
        f"moment ratio b/a = {ratio:.12g} outside the feasible interval "
        f"[{lo:.12g}, {hi:.12g}]"
    )


def _bracketed_root(g, lo: float, hi: float) -> float:
    """Brent root of a monotone g with a sign change on [lo, hi]."""
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0.0:
        raise FeasibilityError(
            "failed to bracket the moment equation (target outside the "
            "family's reachable range)"
        )
    return float(optimize.brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=200))


def _check_match(member, target: MatchTarget, rtol: float = 1e-8):
    m2 = member.abs_moment(2.0)
    mp = member.abs_moment(target.p)
    if abs(m2 - target.a**2) > rtol * target.a**2 or abs(
        mp - target.b**target.p
    ) > rtol * target.b**target.p:
        raise FeasibilityError(
            f"matched member failed the moment check: EX^2 = {m2!r} vs "
            f"{target.a**2!r}, E|X|^p = {mp!r} vs {target.b ** target.p!r}"
        )
    return member


def _gamma_of_rho(rho: float, a: float) -> float:
    # tail rate along the minus-family path with the second moment pinned at a^2
    return math.sqrt(2.0 + (rho**3 + 3.0 * rho**2) / (3.0 * (rho + 1.0))) / a


def match_density_minus(target: MatchTarget) -> PlateauExpDensity:
    """The unique plateau-exponential density with the target moments."""
    lo, hi = feasibility_interval_density(target.p)
    where = _classify_ratio(target.b / target.a, lo, hi)
    if where == "lo":
        return PlateauExpDensity(math.sqrt(3.0) * target.a, math.inf)
    if where == "hi":
        return PlateauExpDensity(0.0, math.sqrt(2.0) / target.a)

    bp = target.b**target.p

    def g(rho: float) -> float:
        gam = _gamma_of_rho(rho, target.a)
        member = PlateauExpDensity(rho / gam, gam)
        return member.abs_moment(target.p) / bp - 1.0

    rho = _bracketed_root(g, 1e-6, 1e6)
    gam = _gamma_of_rho(rho, target.a)
    return _check_match(PlateauExpDensity(rho / gam, gam), target)


def _plus_gamma_of_kappa(kappa: float, a: float) -> float:
    # rate along the plus-family path with the second moment pinned at a^2
    p3 = specfun.reg_lower_inc_gamma(3.0, kappa)
    return math.sqrt(2.0 * p3 / -math.expm1(-kappa)) / a


def match_density_plus(target: MatchTarget) -> TruncatedExpDensity:
    """The unique truncated-exponential density with the target moments."""
    lo, hi = feasibility_interval_density(target.p)
    where = _classify_ratio(target.b / target.a, lo, hi)
    if where == "lo":
        return TruncatedExpDensity(math.sqrt(3.0) * target.a, 0.0)
    if where == "hi":
        return TruncatedExpDensity(math.inf, math.sqrt(2.0) / target.a)

    bp = target.b**target.p

    def g(kappa: float) -> float:
        gam = _plus_gamma_of_kappa(kappa, target.a)
        member = TruncatedExpDensity(kappa / gam, gam)
        return member.abs_moment(target.p) / bp - 1.0

    kappa = _bracketed_root(g, 1e-6, 500.0)
    gam = _plus_gamma_of_kappa(kappa, target.a)
    return _check_match(TruncatedExpDensity(kappa / gam, gam), target)


def match_tail(target: MatchTarget, family: str):
    """The unique tail-family law with the target moments.

    family "minus" parametrizes by rate*offset, "plus" by rate*cutoff;
    both paths pin the second moment and solve the p-th monotonically.
    """
    lo, hi = feasibility_interval_tail(target.p)
    where = _classify_ratio(target.b / target.a, lo, hi)
    bp = target.b**target.p

    if family == "minus":
        if where == "lo":
            return TailLawMinus(math.inf, target.a)
        if where == "hi":
            return TailLawMinus(math.sqrt(2.0) / target.a, 0.0)

        def member_of(rho: float) -> TailLawMinus:
            rate = math.sqrt(rho * rho + 2.0 * rho + 2.0) / target.a
            return TailLawMinus(rate, rho / rate)

        def g(rho: float) -> float:
            return member_of(rho).abs_moment(target.p) / bp - 1.0

        rho = _bracketed_root(g, 1e-8, 1e8)
        return _check_match(member_of(rho), target)

    if family == "plus":
        if where == "lo":
            return TailLawPlus(0.0, target.a)
        if where == "hi":
            return TailLawPlus(math.sqrt(2.0) / target.a, math.inf)

        def member_of(kappa: float) -> TailLawPlus:
            p2 = specfun.reg_lower_inc_gamma(2.0, kappa)
            rate = math.sqrt(2.0 * p2) / target.a
            return TailLawPlus(rate, kappa / rate)

        def g(kappa: float) -> float:
            return member_of(kappa).abs_moment(target.p) / bp - 1.0

        kappa = _bracketed_root(g, 1e-8, 600.0)
        return _check_match(member_of(kappa), target)

    raise DomainError(f"unknown tail family {family!r}; use 'minus' or 'plus'")


# ---------------------------------------------------------------------------
# spec-named thin wrappers


def density_abs_moment(f, r: float) -> float:
    return f.abs_moment(r)


def tail_abs_moment(law, r: float) -> float:
    return law.abs_moment(r)


def density_eval(f, x: float) -> float:
    return f.pdf(x)


def tail_eval(law, t: float) -> float:
    return law.survival(t)


def sample(law, rng: np.random.Generator, n: int) -> np.ndarray:
    return law.sample(rng, n)
