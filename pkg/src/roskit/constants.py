"""Sharp constants and suprema of moment problems for sums of mixtures.

All suprema are over tuples of independent mixtures of a symmetric base
law under second- and p-th-moment budgets.  Below the fourth moment the
supremum has a Gaussian-plus-spike closed form independent of the base
law; from the fourth moment on it is a compound Poisson value of the
conditioned base, with the intensity and spatial scale determined by the
budgets.  The two regimes must agree at p = 4, which every entry point
cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import basedist, cpoisson, discrete, gridconv, specfun
from .basedist import BaseDistribution
from .errors import (
    BranchMismatchError,
    DomainError,
    FeasibilityError,
    UnsupportedMethodError,
)
from .result import ConstantResult

__all__ = [
    "MomentBudget",
    "rosenthal_constant_symmetric",
    "mixture_sup",
    "mixture_constant",
    "positive_sum_sup",
    "complex_constant",
    "utev_3point_sup",
    "mixture_individual_sup",
    "WitnessSpec",
    "witness_construction",
]


@dataclass(frozen=True)
class MomentBudget:
    """Moment budgets at exponent p: either global (A, B) or per-summand
    pairs (a_j, b_j).  Exactly one of the two forms is present."""

    p: float
    global_budgets: tuple | None = None
    per_summand: tuple | None = None

    def __post_init__(self):
        if not self.p > 2.0:
            raise DomainError("moment budgets require p > 2")
        if (self.global_budgets is None) == (self.per_summand is None):
            raise DomainError("exactly one of global/per-summand budgets must be set")
        if self.global_budgets is not None:
            A, B = self.global_budgets
            if not (A > 0.0 and B > 0.0):
                raise DomainError("global budgets must be positive")
        else:
            for a_j, b_j in self.per_summand:
                if not (a_j > 0.0 and b_j > 0.0):
                    raise DomainError("per-summand budgets must be positive")
                if a_j > b_j:
                    raise FeasibilityError(
                        f"infeasible budget pair a={a_j} > b={b_j}"
                    )

    @classmethod
    def global_pair(cls, p: float, A: float, B: float) -> "MomentBudget":
        return cls(p, global_budgets=(float(A), float(B)))

    @classmethod
    def per_pair(cls, p: float, a, b) -> "MomentBudget":
        if len(a) != len(b):
            raise DomainError("budget lists a and b must have equal length")
        return cls(p, per_summand=tuple((float(x), float(y)) for x, y in zip(a, b)))


def _lower_branch_sup(p: float, A: float, B: float) -> float:
    # B^p + E|Z|^p A^p, the Gaussian-block-plus-spikes value for 2 < p < 4
    return B**p + specfun.gaussian_abs_moment(p) * A**p


def _upper_branch_sup(
    p: float, V: BaseDistribution, A: float, B: float, tol: float
):
    """Compound Poisson branch for p >= 4: prefactor, intensity, cp moment."""
    nv2 = basedist.abs_moment(V, 2.0)   # ||V||_2^2
    nvp = basedist.abs_moment(V, p)     # ||V||_p^p
    cond = basedist.condition_nonzero(V)
    lam = (A * nvp ** (1.0 / p) / (B * math.sqrt(nv2))) ** (
        2.0 * p / (p - 2.0)
    ) * (1.0 - V.zero_mass)
    prefactor = (B**p * nv2 / (A**2 * nvp)) ** (p / (p - 2.0))
    cp_res = cpoisson.cp_abs_moment(cpoisson.CompoundPoissonSpec(lam, cond), p, tol)
    return prefactor, lam, cp_res


def mixture_sup(
    p: float, V: BaseDistribution, A: float, B: float, tol: float = 1e-9
) -> ConstantResult:
    """sup E|X_1 + ... + X_n|^p over tuples of independent V-mixtures with
    sum ||X_j||_2^2 <= A^2 and sum ||X_j||_p^p <= B^p (any n).

    For 2 < p < 4 the value is B^p + E|Z|^p A^p regardless of V; for
    p >= 4 it is a rescaled compound Poisson moment of V conditioned on
    being nonzero.  At p = 4 the compound Poisson branch is authoritative
    and the closed form is cross-checked.
    """
    if not p > 2.0:
        raise DomainError("mixture_sup requires p > 2")
    if not (A > 0.0 and B > 0.0):
        raise DomainError("budgets A, B must be positive")

    if p < 4.0:
        value = _lower_branch_sup(p, A, B)
        diag = {
            "branch": "closed_form_p<4",
            "gaussian_moment": specfun.gaussian_abs_moment(p),
            "A": A,
            "B": B,
        }
        return ConstantResult(value, "closed_form", 1e-14 * value, diag)

    prefactor, lam, cp_res = _upper_branch_sup(p, V, A, B, tol)
    value = prefactor * cp_res.value
    err = prefactor * cp_res.error_bound + 1e-14 * value
    diag = {
        "branch": "compound_poisson_p>=4",
        "lambda": lam,
        "prefactor": prefactor,
        "cp_moment": cp_res.value,
        "cp_method": cp_res.method,
        "A": A,
        "B": B,
    }
    if float(p).is_integer() and int(p) in (4, 6, 8):
        # independent cumulant route, exposed for cross-checking
        diag["cp_cumulant_value"] = prefactor * cpoisson.cp_even_moment_cumulant(
            cpoisson.CompoundPoissonSpec(lam, basedist.condition_nonzero(V)), int(p)
        )

    if p == 4.0:
        lower = _lower_branch_sup(p, A, B)
        diag["lower_branch_value"] = lower
        allowance = max(tol, 1e-6) * value + err
        if abs(value - lower) > allowance:
            raise BranchMismatchError(
                f"p=4 branches disagree: compound-Poisson {value!r} vs "
                f"closed form {lower!r} (allowance {allowance:.3e})"
            )
    return ConstantResult(value, f"mixture_sup/{cp_res.method}", err, diag)


def rosenthal_constant_symmetric(p: float, tol: float = 1e-9) -> ConstantResult:
    """The optimal constant for sums of independent symmetric variables:
    (1 + E|Z|^p)^(1/p) below p = 4, the Poisson random-sign norm above."""
    if not p > 2.0:
        raise DomainError("rosenthal_constant_symmetric requires p > 2")
    sup = mixture_sup(p, basedist.rademacher(), 1.0, 1.0, tol)
    value = sup.value ** (1.0 / p)
    err = sup.error_bound / (p * max(value, 1e-300) ** (p - 1.0))
    diag = dict(sup.diagnostics)
    diag["sup_value"] = sup.value
    return ConstantResult(value, sup.method, err, diag)


def mixture_constant(p: float, V: BaseDistribution, tol: float = 1e-9) -> ConstantResult:
    """Best constant in the moment inequality for V-mixtures: the unit-budget
    supremum to the power 1/p."""
    sup = mixture_sup(p, V, 1.0, 1.0, tol)
    value = sup.value ** (1.0 / p)
    err = sup.error_bound / (p * max(value, 1e-300) ** (p - 1.0))
    diag = dict(sup.diagnostics)
    diag["sup_value"] = sup.value
    return ConstantResult(value, sup.method, err, diag)


def positive_sum_sup(p: float, A: float, B: float, tol: float = 1e-9) -> ConstantResult:
    """sup E(X_1 + ... + X_n)^p over independent nonnegative variables with
    sum EX_j <= A and sum EX_j^p <= B^p.

    A^p + B^p below p = 2; a Poisson power moment with intensity
    (A/B)^(p/(p-1)) from p = 2 on.
    """
    if not p > 1.0:
        raise DomainError("positive_sum_sup requires p > 1")
    if not (A > 0.0 and B > 0.0):
        raise DomainError("budgets A, B must be positive")
    if p < 2.0:
        value = A**p + B**p
        return ConstantResult(
            value, "closed_form", 1e-15 * value, {"branch": "closed_form_p<2"}
        )
    lam = (A / B) ** (p / (p - 1.0))
    pref = (B**p / A) ** (p / (p - 1.0))
    mom = cpoisson.poisson_power_moment(lam, p, tol)
    value = pref * mom.value
    diag = {
        "branch": "poisson_p>=2",
        "lambda": lam,
        "prefactor": pref,
        "poisson_moment": mom.value,
        "K": mom.diagnostics["K"],
    }
    return ConstantResult(value, "poisson_series", pref * mom.error_bound, diag)


def complex_constant(p: float, tol: float = 1e-9) -> ConstantResult:
    """Best constant for sums of rotationally invariant complex variables.

    Reduces to the real projection cos(2*pi*U): below p = 4 a closed form
    in the normalizer beta_p; from p = 4 on, beta_p^(1/p) times the norm
    of a compound Poisson(1) sum of cosine projections.
    """
    if not p > 2.0:
        raise DomainError("complex_constant requires p > 2")
    beta = specfun.steinhaus_beta(p)
    lower = (1.0 + beta * 2.0 ** (-p / 2.0) * specfun.gaussian_abs_moment(p)) ** (1.0 / p)
    if p < 4.0:
        return ConstantResult(
            lower, "closed_form", 1e-14 * lower, {"branch": "closed_form_p<4", "beta_p": beta}
        )
    cond = basedist.condition_nonzero(basedist.cosine_projection())
    cp_res = cpoisson.cp_abs_moment(cpoisson.CompoundPoissonSpec(1.0, cond), p, tol)
    value = (beta * cp_res.value) ** (1.0 / p)
    err = beta * cp_res.error_bound / (p * max(value, 1e-300) ** (p - 1.0))
    diag = {
        "branch": "compound_poisson_p>=4",
        "beta_p": beta,
        "cp_moment": cp_res.value,
        "cp_method": cp_res.method,
    }
    if p == 4.0:
        diag["lower_branch_value"] = lower
        allowance = max(tol, 1e-6) * value + err
        if abs(value - lower) > allowance:
            raise BranchMismatchError(
                f"p=4 complex branches disagree: {value!r} vs {lower!r}"
            )
    return ConstantResult(value, f"complex/{cp_res.method}", err, diag)


def _three_point_parameters(p: float, pairs) -> tuple[list, list]:
    scales, activations = [], []
    for a_j, b_j in pairs:
        scales.append((b_j**p / a_j**2) ** (1.0 / (p - 2.0)))
        activations.append((a_j / b_j) ** (2.0 * p / (p - 2.0)))
    return scales, activations


def utev_3point_sup(
    p: float,
    budget: MomentBudget,
    mode: str = "exact_enum",
    tol: float = 1e-9,
    rng: np.random.Generator | None = None,
    n_samples: int = 1_000_000,
):
    """sup E|sum_j X_j|^p over independent symmetric X_j with
    ||X_j||_2 <= a_j and ||X_j||_p <= b_j, for p >= 4.

    Attained by three-point laws {-c_j, 0, +c_j} that meet both budgets
    with equality: c_j = (b_j^p / a_j^2)^(1/(p-2)) and activation
    mu_j = (a_j / b_j)^(2p/(p-2)).  Returns the supremum together with the
    (c_j, mu_j) description of the extremal tuple.
    """
    if p < 4.0:
        raise DomainError("utev_3point_sup requires p >= 4")
    if budget.per_summand is None:
        raise DomainError("utev_3point_sup needs per-summand budgets")
    pairs = budget.per_summand
    n = len(pairs)
    scales, activations = _three_point_parameters(p, pairs)
    if any(mu > 1.0 + 1e-12 for mu in activations):
        raise FeasibilityError("activation above 1; budgets require a_j <= b_j")
    diag = {"n": n, "scales": scales, "activations": activations}

    if mode == "exact_enum":
        if n > 12:
            raise UnsupportedMethodError(
                "exact enumeration supports n <= 12; use monte_carlo"
            )
        laws = []
        for c, mu in zip(scales, activations):
            laws.append({-c: mu / 2.0, 0.0: 1.0 - mu, c: mu / 2.0})
        dist = discrete.nfold_atoms(laws)
        value = discrete.abs_moment_atoms(dist, p)
        diag["support"] = len(dist)
        result = ConstantResult(value, "exact_enum", 1e-13 * n * max(value, 1.0), diag)
    elif mode == "monte_carlo":
        if rng is None:
            raise DomainError("monte_carlo mode requires an explicit rng")
        total = np.zeros(n_samples)
        for c, mu in zip(scales, activations):
            theta = rng.random(n_samples) < mu
            signs = rng.integers(0, 2, size=n_samples) * 2 - 1
            total += c * theta * signs
        powers = np.abs(total) ** p
        value = float(powers.mean())
        err = 3.0 * float(powers.std(ddof=1)) / math.sqrt(n_samples)
        diag["n_samples"] = n_samples
        result = ConstantResult(value, "monte_carlo", err, diag)
    else:
        raise UnsupportedMethodError(f"unknown mode {mode!r}")
    return result, list(zip(scales, activations))


def _thinned_mixture_parameters(p: float, V: BaseDistribution, pairs):
    nv2 = math.sqrt(basedist.abs_moment(V, 2.0))
    nvp = basedist.abs_moment(V, p) ** (1.0 / p)
    scales, activations = [], []
    for a_j, b_j in pairs:
        scales.append(((b_j / nvp) ** p / (a_j / nv2) ** 2) ** (1.0 / (p - 2.0)))
        activations.append((a_j * nvp / (b_j * nv2)) ** (2.0 * p / (p - 2.0)))
    return scales, activations


def mixture_individual_sup(
    p: float,
    V: BaseDistribution,
    budget: MomentBudget,
    mode: str = "auto",
    tol: float = 1e-9,
    rng: np.random.Generator | None = None,
    n_samples: int = 1_000_000,
) -> ConstantResult:
    """sup E|sum_j X_j|^p over independent V-mixtures with individual
    budgets ||X_j||_2 <= a_j, ||X_j||_p <= b_j, for p >= 4.

    Attained by Bernoulli-thinned scaled copies of V meeting both budgets
    with equality.  Evaluated by exact enumeration (atomic V), grid
    convolution (continuous V), or Monte Carlo.
    """
    if p < 4.0:
        raise DomainError("mixture_individual_sup requires p >= 4")
    if budget.per_summand is None:
        raise DomainError("mixture_individual_sup needs per-summand budgets")
    pairs = budget.per_summand
    n = len(pairs)
    scales, activations = _thinned_mixture_parameters(p, V, pairs)
    if any(mu > 1.0 + 1e-12 for mu in activations):
        raise FeasibilityError(
            "infeasible budget: required activation exceeds 1 "
            "(b_j/a_j below the base law's p-to-2 norm ratio)"
        )
    activations = [min(mu, 1.0) for mu in activations]
    diag = {"n": n, "scales": scales, "activations": activations, "V": V.kind}

    if mode == "auto":
        mode = "exact_enum" if V.is_atomic else "grid"

    if mode == "exact_enum":
        if not V.is_atomic:
            raise UnsupportedMethodError("exact enumeration needs an atomic base law")
        if n > 12:
            raise UnsupportedMethodError(
                "exact enumeration supports n <= 12; use monte_carlo"
            )
        base_law = V.signed_atoms()
        laws = []
        for c, mu in zip(scales, activations):
            laws.append(discrete.thin_atoms(discrete.scale_atoms(base_law, c), mu))
        dist = discrete.nfold_atoms(laws, max_support=2_000_000)
        value = discrete.abs_moment_atoms(dist, p)
        diag["support"] = len(dist)
        return ConstantResult(value, "exact_enum", 1e-13 * n * max(value, 1.0), diag)

    if mode == "grid":
        vals = []
        for n_cells in (4096, 8192):
            laws = []
            for c, mu in zip(scales, activations):
                laws.append(_thinned_scaled_grid_law(V, c, mu, n_cells, tol, p))
            total = gridconv.nfold_grid(laws)
            sigma2 = sum(law.variance_proxy() for law in laws)
            val, cert = gridconv.truncated_abs_moment(total, p, sigma2, tol)
            vals.append((val, cert))
        (coarse, _), (fine, cert) = vals
        err = 3.0 * abs(fine - coarse) + cert + 1e-13 * abs(fine)
        diag["n_cells"] = 8192
        return ConstantResult(fine, "grid", err, diag)

    if mode == "monte_carlo":
        if rng is None:
            raise DomainError("monte_carlo mode requires an explicit rng")
        total = np.zeros(n_samples)
        for c, mu in zip(scales, activations):
            theta = rng.random(n_samples) < mu
            draws = basedist.sample_signed(V, rng, n_samples)
            total += c * theta * draws
        powers = np.abs(total) ** p
        value = float(powers.mean())
        err = 3.0 * float(powers.std(ddof=1)) / math.sqrt(n_samples)
        diag["n_samples"] = n_samples
        return ConstantResult(value, "monte_carlo", err, diag)

    raise UnsupportedMethodError(f"unknown mode {mode!r}")


def _thinned_scaled_grid_law(
    V: BaseDistribution, c: float, mu: float, n_cells: int, tol: float, p: float = 6.0
) -> gridconv.GridLaw:
    """Grid law of c * theta * V with activation mu (atom at 0 on-grid)."""
    bound = V.support_bound()
    L = bound if bound is not None else basedist._gaussian_grid_halfwidth(1, max(p, 6.0), tol)
    lo, hi = -c * L, c * L
    if n_cells % 2 == 0:
        n_cells += 1  # odd count puts a cell center exactly at 0
    law = gridconv.from_cdf(lambda x: V.cdf(x / c), lo, hi, n_cells)
    law.masses *= mu
    law.masses[n_cells // 2] += 1.0 - mu
    return law


@dataclass(frozen=True)
class WitnessSpec:
    """Two-block near-extremal tuple for the 2 < p < 4 supremum.

    Block one: n summands (alpha / sqrt n) V_j, a central-limit block.
    Block two: n summands gamma theta_j V_j with activation lam / n, a
    sparse spike block.  Both budget rows are met exactly by construction.
    """

    p: float
    V: BaseDistribution
    A: float
    B: float
    n: int
    alpha: float
    gamma: float
    lam: float
    l2_budget_used: float
    lp_budget_used: float


def witness_construction(
    p: float,
    V: BaseDistribution,
    A: float,
    B: float,
    n: int,
    alpha: float,
    rng: np.random.Generator | None = None,
    n_samples: int = 1_000_000,
    estimate_moment: bool = True,
):
    """Build the two-block witness and estimate its p-th moment.

    Solves gamma^2 lam = A^2/||V||_2^2 - alpha^2 and
    gamma^p lam = B^p/||V||_p^p - alpha^p n^(1-p/2) for (gamma, lam),
    verifies the budget bookkeeping exactly, and estimates
    E|sum|^p by Monte Carlo with the first block sampled from its exact
    k-fold law (random signs or Gaussian) and the second from a binomial
    activation count.  Returns (WitnessSpec, ConstantResult | None).
    """
    if not 2.0 < p < 4.0:
        raise DomainError("witness_construction requires 2 < p < 4")
    if n < 1:
        raise DomainError("n must be positive")
    nv2 = math.sqrt(basedist.abs_moment(V, 2.0))
    nvp = basedist.abs_moment(V, p) ** (1.0 / p)
    if not 0.0 < alpha < A / nv2:
        raise FeasibilityError(
            f"alpha must lie in (0, A/||V||_2) = (0, {A / nv2:.6g})"
        )
    c2 = (A / nv2) ** 2 - alpha**2
    cp_slack = (B / nvp) ** p - alpha**p * n ** (1.0 - p / 2.0)
    if cp_slack <= 0.0:
        raise FeasibilityError(
            "violated positivity: B^p/||V||_p^p - alpha^p n^(1-p/2) <= 0; "
            "increase n or decrease alpha"
        )
    gamma = (cp_slack / c2) ** (1.0 / (p - 2.0))
    lam = c2 / gamma**2

    l2_used = nv2**2 * (alpha**2 + gamma**2 * lam)
    lp_used = nvp**p * (alpha**p * n ** (1.0 - p / 2.0) + gamma**p * lam)
    spec = WitnessSpec(p, V, A, B, n, alpha, gamma, lam, l2_used, lp_used)

    if not estimate_moment:
        return spec, None

    if rng is None:
        raise DomainError("moment estimation requires an explicit rng")
    if V.kind == "rademacher":
        walk = rng.binomial(n, 0.5, size=n_samples)
        block1 = alpha * (2.0 * walk - n) / math.sqrt(n)
        walk_moment = basedist._rademacher_walk_moment(n, p) / n ** (p / 2.0)
    elif V.kind == "gaussian":
        block1 = alpha * rng.standard_normal(n_samples)
        walk_moment = specfun.gaussian_abs_moment(p)
    else:
        raise UnsupportedMethodError(
            "exact first-block sampling supports the random-sign and Gaussian "
            "base laws; pass estimate_moment=False for other kinds"
        )
    counts = rng.binomial(n, lam / n, size=n_samples)
    total_jumps = int(counts.sum())
    block2 = np.zeros(n_samples)
    if total_jumps:
        mags = basedist.sample_abs(V, rng, total_jumps)
        signs = rng.integers(0, 2, size=total_jumps) * 2 - 1
        idx = np.repeat(np.arange(n_samples), counts)
        block2 = np.bincount(idx, weights=mags * signs, minlength=n_samples)
    powers = np.abs(block1 + gamma * block2) ** p
    estimate = float(powers.mean())
    err = 3.0 * float(powers.std(ddof=1)) / math.sqrt(n_samples)
    analytic_lower = alpha**p * walk_moment + gamma**p * lam * nvp**p
    diag = {
        "lambda": lam,
        "gamma": gamma,
        "alpha": alpha,
        "n": n,
        "n_samples": n_samples,
        "analytic_lower_bound": analytic_lower,
        "l2_budget_used": l2_used,
        "lp_budget_used": lp_used,
    }
    return spec, ConstantResult(estimate, "monte_carlo/two_block", err, diag)
