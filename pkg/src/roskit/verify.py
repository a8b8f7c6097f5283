"""Independent numerical oracles and property checks.

Everything here double-checks a closed-form claim through a different
route: n-fold grid convolutions for sum moments, randomized search over
feasible tuples against the theorem-side suprema, sign-change counting
for density differences, convexity and determinant checks for the
auxiliary functions, and the compound Poisson domination of finite sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import basedist, constants, cpoisson, discrete, gridconv, logconcave, specfun
from .errors import (
    DomainError,
    GridTooSmallError,
    InvalidComparisonError,
)
from .result import ConstantResult

__all__ = [
    "GridDensity",
    "SearchReport",
    "GaussianSource",
    "LogisticSource",
    "grid_density",
    "nfold_moment",
    "search_sup_U",
    "check_poissonisation",
    "count_sign_changes",
    "SignChangeReport",
    "check_psi_convexity",
    "check_h_signature",
    "HSignatureReport",
    "check_det_inequality",
    "check_interlacing",
    "check_logconcave_ordering",
    "check_tail_ordering",
    "check_easy_lower_bound",
    "atomic_law",
]


# ---------------------------------------------------------------------------
# sources (closed-form symmetric log-concave densities that are not members)


class GaussianSource:
    """Standard Gaussian as a matching source."""

    def pdf(self, x: float) -> float:
        return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def cdf(self, x: float) -> float:
        return 0.5 * math.erfc(-x / math.sqrt(2.0))

    def abs_moment(self, r: float) -> float:
        return specfun.gaussian_abs_moment(r)

    def atoms(self) -> dict:
        return {}

    def support_halfwidth(self) -> float:
        return 10.0  # density below 1e-16 of the peak beyond ~8.6


class LogisticSource:
    """Symmetric logistic density exp(-x/s) / (s (1 + exp(-x/s))^2)."""

    def __init__(self, scale: float = 1.0):
        if not scale > 0.0:
            raise DomainError("logistic scale must be positive")
        self.scale = scale

    def pdf(self, x: float) -> float:
        u = math.exp(-abs(x) / self.scale)
        return u / (self.scale * (1.0 + u) ** 2)

    def cdf(self, x: float) -> float:
        return 1.0 / (1.0 + math.exp(-x / self.scale))

    def abs_moment(self, r: float) -> float:
        val, _ = integrate.quad(
            lambda x: 2.0 * x**r * self.pdf(x),
            0.0,
            self.support_halfwidth(),
            limit=400,
        )
        return val

    def atoms(self) -> dict:
        return {}

    def support_halfwidth(self) -> float:
        return 40.0 * self.scale  # density below 1e-16 of the peak


def _support_halfwidth(law) -> float:
    """Truncation point: where the density falls below 1e-16 of its peak,
    or the exact support end for compactly supported laws."""
    if hasattr(law, "support_halfwidth"):
        return law.support_halfwidth()
    decay = 16.0 * math.log(10.0)  # ln(1e16)
    if isinstance(law, logconcave.PlateauExpDensity):
        if law.limit == "uniform":
            return law.alpha
        return law.alpha + decay / law.gamma
    if isinstance(law, logconcave.TruncatedExpDensity):
        if law.limit == "exponential":
            return decay / law.gamma
        return law.alpha
    if isinstance(law, logconcave.TailLawMinus):
        if law.limit == "two_point":
            return law.offset
        return law.offset + (decay + 4.0) / law.rate
    if isinstance(law, logconcave.TailLawPlus):
        if law.limit == "exponential":
            return decay / law.rate
        return law.cutoff
    raise DomainError(f"no support bound rule for {type(law).__name__}")


# ---------------------------------------------------------------------------
# grid densities


@dataclass
class GridDensity:
    """Cell-averaged density values on a symmetric uniform grid, plus exact
    off-grid atoms.  values[i] belongs to the cell
    [lower + i*step, lower + (i+1)*step]."""

    lower: float
    upper: float
    step: float
    values: np.ndarray
    atom_list: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.values.size
        if n and abs(self.lower + n * self.step - self.upper) > 1e-9 * self.step * n:
            raise DomainError("grid extent does not match the cell count")
        total = self.total_mass()
        if abs(total - 1.0) > 1e-8:
            raise GridTooSmallError(
                f"grid density mass {total!r} deviates from 1 beyond 1e-8"
            )
        sym = self.values - self.values[::-1]
        if sym.size and float(np.abs(sym).max()) * self.step > 1e-10:
            raise DomainError("grid density is not symmetric about 0")

    def total_mass(self) -> float:
        return float(self.values.sum() * self.step) + math.fsum(
            m for _, m in self.atom_list
        )

    def to_mass_law(self) -> gridconv.GridLaw:
        return gridconv.GridLaw(
            self.lower + 0.5 * self.step,
            self.step,
            self.values * self.step,
            {loc: m for loc, m in self.atom_list},
        )


def grid_density(law, n_cells: int = 8192) -> GridDensity:
    """Build the cell-averaged grid density of a symmetric law.

    Cell masses are exact CDF differences of the continuous part; atoms
    (two-point limits, truncation atoms) stay exact in atom_list.
    """
    L = _support_halfwidth(law)
    atoms = tuple(sorted(law.atoms().items())) if hasattr(law, "atoms") else ()
    cont_mass = 1.0 - math.fsum(m for _, m in atoms)
    if cont_mass <= 1e-15:
        return GridDensity(-L, L, 2.0 * L / max(n_cells, 1), np.zeros(n_cells), atoms)
    h = 2.0 * L / n_cells
    edges = -L + h * np.arange(n_cells + 1)
    cdf_vals = np.array([law.cdf(float(e)) for e in edges])
    masses = np.maximum(np.diff(cdf_vals), 0.0)
    total = masses.sum()
    if total > 0.0:
        masses *= cont_mass / total  # absorb the truncated 1e-16-level tail
    return GridDensity(-L, L, h, masses / h, atoms)


def _coarsen(law: gridconv.GridLaw) -> gridconv.GridLaw:
    masses = law.masses
    if masses.size % 2:
        masses = np.append(masses, 0.0)
    pairs = masses[0::2] + masses[1::2]
    return gridconv.GridLaw(law.x0 + 0.5 * law.h, 2.0 * law.h, pairs, dict(law.atoms))


def _nfold_value(laws: list[gridconv.GridLaw], p: float, tol: float):
    total = gridconv.nfold_grid(laws)
    gridconv.check_mass_conservation(total, 1.0, 1e-6)
    sigma2 = sum(law.variance_proxy() for law in laws)
    return gridconv.truncated_abs_moment(total, p, sigma2, tol)


def nfold_moment(densities: list[GridDensity], p: float, tol: float = 1e-9) -> ConstantResult:
    """E|X_1 + ... + X_n|^p by iterated FFT convolution of grid densities.

    The error bound is the difference against a run with 2x-coarsened
    inputs plus the certified truncation terms.
    """
    if not densities:
        raise DomainError("need at least one density")
    if not p > 0.0:
        raise DomainError("nfold_moment requires p > 0")
    fine_laws = [d.to_mass_law() for d in densities]
    fine_value, certified = _nfold_value(fine_laws, p, tol)
    coarse_value, _ = _nfold_value([_coarsen(l) for l in fine_laws], p, tol)
    diff = fine_value - coarse_value
    # second-order Richardson; the reported bound stays conservative even
    # for first-order convergence at density edges
    value = fine_value + diff / 3.0
    err = 1.5 * abs(diff) + certified + 1e-13 * abs(value)
    diag = {
        "n": len(densities),
        "p": p,
        "steps": [d.step for d in densities],
        "fine_value": fine_value,
        "coarse_value": coarse_value,
    }
    return ConstantResult(value, "nfold_grid", err, diag)


# ---------------------------------------------------------------------------
# randomized search over the feasible class


@dataclass
class SearchReport:
    best_value: float
    best_config: dict
    theorem_value: float
    gap: float
    trials: int
    seed: int
    details: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_config": self.best_config,
            "theorem_value": self.theorem_value,
            "gap": self.gap,
            "trials": self.trials,
            "seed": self.seed,
            **{f"detail_{k}": v for k, v in self.details.items()},
        }


def _candidate_moment(
    p: float, V: basedist.BaseDistribution, scales, activations, tol: float
):
    """E|sum c_j theta_j V_j|^p for a thinned-scaled candidate tuple."""
    if V.is_atomic:
        base_law = V.signed_atoms()
        laws = [
            discrete.thin_atoms(discrete.scale_atoms(base_law, c), mu)
            for c, mu in zip(scales, activations)
        ]
        dist = discrete.nfold_atoms(laws, max_support=1_000_000)
        return discrete.abs_moment_atoms(dist, p), 1e-12
    laws = [
        constants._thinned_scaled_grid_law(V, c, mu, 2048, tol, p)
        for c, mu in zip(scales, activations)
    ]
    total = gridconv.nfold_grid(laws)
    sigma2 = sum(law.variance_proxy() for law in laws)
    value, certified = gridconv.truncated_abs_moment(total, p, sigma2, tol)
    coarse = gridconv.nfold_grid([_coarsen(l) for l in laws])
    coarse_val, _ = gridconv.truncated_abs_moment(coarse, p, sigma2, tol)
    return value, abs(value - coarse_val) + certified + 1e-12 * abs(value)


def _solve_candidate(p, V, A, B, shares_2, shares_p):
    """Per-summand (scale, activation) hitting the allocated budget shares.

    Activation above 1 is clamped to 1 with the 2-norm share kept exact,
    so every candidate stays feasible."""
    nv2 = math.sqrt(basedist.abs_moment(V, 2.0))
    nvp = basedist.abs_moment(V, p) ** (1.0 / p)
    scales, activations = [], []
    for s2, sp in zip(shares_2, shares_p):
        budget_2 = s2 * A * A / nv2**2
        budget_p = sp * B**p / nvp**p
        if budget_2 <= 0.0 or budget_p <= 0.0:
            scales.append(0.0)
            activations.append(0.0)
            continue
        c = (budget_p / budget_2) ** (1.0 / (p - 2.0))
        mu = budget_2 / (c * c)
        if mu > 1.0:
            mu = 1.0
            c = math.sqrt(budget_2)
        scales.append(c)
        activations.append(mu)
    return scales, activations


def search_sup_U(
    p: float,
    V: basedist.BaseDistribution,
    A: float,
    B: float,
    n_max: int,
    trials: int,
    seed: int,
    tol: float = 1e-6,
) -> SearchReport:
    """Random search for feasible tuples beating the theorem-side supremum.

    Candidates are tuples of scaled Bernoulli-thinned copies of V (the
    shape of the extremisers), with both budget rows allocated by random
    Dirichlet shares and enforced exactly.  The report records the best
    value found, the theorem value, and equal-split diagnostics; the
    invariant best <= theorem * (1 + 1e-6) is the oracle.
    """
    theorem = constants.mixture_sup(p, V, A, B, tol=1e-9)
    rng_master = np.random.SeedSequence(seed)
    children = rng_master.spawn(trials)
    best_value = -math.inf
    best_config: dict = {}
    violations = 0
    for trial in range(trials):
        rng = np.random.default_rng(children[trial])
        n = int(rng.integers(1, n_max + 1))
        shares_2 = rng.dirichlet(np.ones(n))
        shares_p = rng.dirichlet(np.ones(n))
        scales, activations = _solve_candidate(p, V, A, B, shares_2, shares_p)
        value, err = _candidate_moment(p, V, scales, activations, tol)
        if value - err > theorem.value * (1.0 + 1e-6) + theorem.error_bound:
            violations += 1
        if value > best_value:
            best_value = value
            best_config = {
                "n": n,
                "scales": list(scales),
                "activations": list(activations),
                "trial": trial,
            }
    iid_values = []
    for n in range(1, n_max + 1):
        shares = np.full(n, 1.0 / n)
        scales, activations = _solve_candidate(p, V, A, B, shares, shares)
        value, _ = _candidate_moment(p, V, scales, activations, tol)
        iid_values.append(value)
        if value > best_value:
            best_value = value
            best_config = {
                "n": n,
                "scales": list(scales),
                "activations": list(activations),
                "trial": -1,
            }
    gap = (theorem.value - best_value) / theorem.value
    return SearchReport(
        best_value=best_value,
        best_config=best_config,
        theorem_value=theorem.value,
        gap=gap,
        trials=trials,
        seed=seed,
        details={
            "violations": violations,
            "iid_values": iid_values,
            "n_max": n_max,
            "p": p,
            "V": basedist.format_base_spec(V),
            "A": A,
            "B": B,
        },
    )


# ---------------------------------------------------------------------------
# Poissonisation and the elementary lower bound


def atomic_law(V: basedist.BaseDistribution) -> dict:
    """Signed atomic law of a base distribution, as a plain dict."""
    return V.signed_atoms()


def _validate_symmetric_atomic(law: dict) -> dict:
    total = math.fsum(law.values())
    if abs(total - 1.0) > 1e-10:
        raise DomainError(f"atomic law mass {total!r} is not 1")
    for loc, mass in law.items():
        if loc != 0.0 and abs(law.get(-loc, 0.0) - mass) > 1e-12:
            raise DomainError("atomic law is not symmetric")
    # canonicalize locations to the convolution dedup precision so the
    # two sides of each inequality see identical support points
    out: dict = {}
    for loc, mass in law.items():
        key = discrete.round_sig(loc)
        out[key] = out.get(key, 0.0) + mass
    return out


def check_poissonisation(laws: list[dict], p: float, tol: float = 1e-9):
    """E|sum X_j|^p <= E|T|^p for the compound Poisson T accumulating the
    nonzero parts of the X_j; needs p >= 3 so the |x|^p test function has a
    convex second derivative.  Returns (holds, left, right)."""
    if p < 3.0:
        raise DomainError("poissonisation check requires p >= 3")
    laws = [_validate_symmetric_atomic(law) for law in laws]
    left = discrete.abs_moment_atoms(discrete.nfold_atoms(list(laws)), p)
    lam = math.fsum(
        mass for law in laws for loc, mass in law.items() if loc != 0.0
    )
    if lam == 0.0:
        return True, 0.0, 0.0
    merged: dict = {}
    for law in laws:
        for loc, mass in law.items():
            if loc != 0.0:
                key = abs(loc)
                merged[key] = merged.get(key, 0.0) + mass / lam
    jump = basedist.condition_nonzero(
        basedist.symmetric_atoms(sorted(merged.items()))
    )
    right = cpoisson.cp_abs_moment(
        cpoisson.CompoundPoissonSpec(lam, jump), p, tol
    ).value
    return left <= right + tol + 1e-12 * right, left, right


def check_easy_lower_bound(laws: list[dict], p: float):
    """E|sum X_j|^p >= max((sum ||X_j||_2^2)^(p/2), sum ||X_j||_p^p)."""
    laws = [_validate_symmetric_atomic(law) for law in laws]
    left = discrete.abs_moment_atoms(discrete.nfold_atoms(list(laws)), p)
    sum_2 = math.fsum(discrete.abs_moment_atoms(law, 2.0) for law in laws)
    sum_p = math.fsum(discrete.abs_moment_atoms(law, p) for law in laws)
    right = max(sum_2 ** (p / 2.0), sum_p)
    return left >= right - 1e-12 * max(right, 1.0), left, right


# ---------------------------------------------------------------------------
# sign patterns, convexity, determinants


@dataclass
class SignChangeReport:
    count: int
    locations: list
    signature: list
    indeterminate: bool = False


def count_sign_changes(xs, values, zero_band: float) -> SignChangeReport:
    """Count strict sign alternations after collapsing the zero band.

    Values with |v| <= zero_band are treated as exact zeros so quadrature
    noise cannot create spurious alternations.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.size < 3:
        raise DomainError("need at least 3 grid points")
    signs = np.where(np.abs(values) <= zero_band, 0.0, np.sign(values))
    nonzero = signs != 0.0
    if not nonzero.any():
        return SignChangeReport(0, [], [], indeterminate=True)
    seq = signs[nonzero]
    pos = xs[nonzero]
    signature = [int(seq[0])]
    locations = []
    for i in range(1, seq.size):
        if seq[i] != seq[i - 1]:
            signature.append(int(seq[i]))
            locations.append(0.5 * (pos[i - 1] + pos[i]))
    return SignChangeReport(len(locations), locations, signature)


def _psi(p: float, x: float) -> float:
    s = math.sqrt(x)
    return abs(s + 1.0) ** p + abs(s - 1.0) ** p - 2.0 * x ** (p / 2.0)


def check_psi_convexity(p: float, xs) -> bool:
    """Positivity of second divided differences of
    psi(x) = |sqrt x + 1|^p + |sqrt x - 1|^p - 2 x^(p/2) on the grid."""
    if not p > 4.0:
        raise DomainError("the convexity claim needs p > 4")
    xs = np.asarray(xs, dtype=float)
    vals = np.array([_psi(p, x) for x in xs])
    left = (vals[1:-1] - vals[:-2]) / (xs[1:-1] - xs[:-2])
    right = (vals[2:] - vals[1:-1]) / (xs[2:] - xs[1:-1])
    second = 2.0 * (right - left) / (xs[2:] - xs[:-2])
    return bool(np.all(second > 0.0))


@dataclass
class HSignatureReport:
    count: int
    signature: list
    locations: list
    ok: bool
    x_max: float


def _h(p: float, alpha: float, beta: float, gamma: float, x: np.ndarray) -> np.ndarray:
    return (
        np.abs(x + 1.0) ** p
        + np.abs(x - 1.0) ** p
        - alpha
        - beta * x**2
        - gamma * x**p
    )


def _h_no_root_beyond(p: float, alpha: float, beta: float, gamma: float) -> float:
    """A point beyond which h keeps the sign of its leading term.

    Uses |x+1|^p + |x-1|^p - 2x^p <= 2 p^2 x^(p-2) for x >= p, so past the
    returned point the (2 - gamma) x^p term (or the x^(p-2) term when
    gamma = 2) dominates the rest.
    """
    x = max(p, 2.0)
    for _ in range(200):
        rest = abs(alpha) + abs(beta) * x * x + 1.0
        if gamma == 2.0:
            # the even-term bracket itself is >= ~p(p-1) x^(p-2) out here
            ok = 0.45 * p * (p - 1.0) * x ** (p - 2.0) > rest
        else:
            ok = abs(gamma - 2.0) * x**p > 2.0 * p * p * x ** (p - 2.0) + rest
        if ok:
            return x
        x *= 1.5
    return x


def check_h_signature(
    p: float,
    alpha: float,
    beta: float,
    gamma: float,
    n_points: int = 4000,
) -> HSignatureReport:
    """Sign-change pattern of |x+1|^p + |x-1|^p - alpha - beta x^2 - gamma x^p
    on (0, x_max], with x_max chosen so no roots exist beyond it.

    At most 3 changes are expected; when exactly 3 occur the signature must
    be +,-,+,-.
    """
    if not p > 4.0:
        raise DomainError("the signature claim needs p > 4")
    x_max = _h_no_root_beyond(p, alpha, beta, gamma)
    xs = np.concatenate(
        [
            np.geomspace(1e-6, 1.0, n_points // 2, endpoint=False),
            np.linspace(1.0, x_max, n_points // 2),
        ]
    )
    vals = _h(p, alpha, beta, gamma, xs)
    band = 1e-11 * float(np.abs(vals).max())
    rep = count_sign_changes(xs, vals, band)
    ok = rep.count <= 3
    if rep.count == 3:
        ok = ok and rep.signature == [1, -1, 1, -1]
    return HSignatureReport(rep.count, rep.signature, rep.locations, ok, x_max)


def check_det_inequality(phi, x1: float, x2: float, x3: float):
    """det [[1, x_i, phi(x_i)]] >= 0 for convex phi and 0 < x1 < x2 < x3."""
    if not 0.0 < x1 < x2 < x3:
        raise DomainError("needs 0 < x1 < x2 < x3")
    f1, f2, f3 = phi(x1), phi(x2), phi(x3)
    # expansion along the first column
    det = (x2 * f3 - x3 * f2) - (x1 * f3 - x3 * f1) + (x1 * f2 - x2 * f1)
    scale = max(abs(f1), abs(f2), abs(f3), 1.0) * (x3 - x1)
    return det >= -1e-12 * scale, det


# ---------------------------------------------------------------------------
# interlacing and the sum orderings


def _density_kinks(law) -> list[float]:
    for attr in ("alpha", "offset", "cutoff"):
        k = getattr(law, attr, None)
        if k is not None and math.isfinite(k) and k > 0.0:
            return [-k, k]
    return []


def _shifted_moment_quad(law, z: float, p: float) -> tuple[float, float]:
    """E|X + z|^p by adaptive quadrature with kink-aware breakpoints."""
    L = _support_halfwidth(law)
    atoms = law.atoms() if hasattr(law, "atoms") else {}
    pts = sorted({x for x in [-z, 0.0] + _density_kinks(law) if -L < x < L})
    val, err = integrate.quad(
        lambda x: law.pdf(x) * abs(x + z) ** p,
        -L,
        L,
        points=pts or None,
        limit=500,
    )
    val += math.fsum(m * abs(loc + z) ** p for loc, m in atoms.items())
    return val, err


def check_interlacing(source, member, z: float, p: float, tol: float = 1e-9):
    """Shifted-moment domination of a matched extremal member.

    For minus-family members E|X + z|^p >= E|member + z|^p; for
    plus-family members the inequality is reversed.  The source must have
    the member's second and p-th moments (mismatch beyond 1e-6 relative is
    an invalid comparison).
    """
    for r in (2.0, p):
        ms, mm = source.abs_moment(r), member.abs_moment(r)
        if abs(ms - mm) > 1e-6 * abs(mm):
            raise InvalidComparisonError(
                f"moment mismatch at order {r}: source {ms!r} vs member {mm!r}"
            )
    lhs, err_l = _shifted_moment_quad(source, z, p)
    rhs, err_r = _shifted_moment_quad(member, z, p)
    budget = err_l + err_r + tol * max(abs(lhs), abs(rhs))
    minus_side = isinstance(
        member, (logconcave.PlateauExpDensity, logconcave.TailLawMinus)
    )
    holds = lhs >= rhs - budget if minus_side else lhs <= rhs + budget
    return holds, lhs, rhs


def _ordering_triple(source, minus, plus, n: int, p: float, n_cells: int, tol: float):
    out = []
    for law in (minus, source, plus):
        dens = grid_density(law, n_cells)
        res = nfold_moment([dens] * n, p, tol)
        out.append(res)
    return out


def check_logconcave_ordering(
    n: int, source, p: float, n_cells: int = 8192, tol: float = 1e-9
):
    """Sum-moment bracketing by the matched extremal densities:
    E|sum minus|^p <= E|sum source|^p <= E|sum plus|^p.

    Returns (holds, (v_minus, v_source, v_plus), combined_error)."""
    a = math.sqrt(source.abs_moment(2.0))
    b = source.abs_moment(p) ** (1.0 / p)
    target = logconcave.MatchTarget(p, a, b)
    minus = logconcave.match_density_minus(target)
    plus = logconcave.match_density_plus(target)
    res_m, res_s, res_p = _ordering_triple(source, minus, plus, n, p, n_cells, tol)
    err = res_m.error_bound + res_s.error_bound + res_p.error_bound
    holds = (res_m.value <= res_s.value + err) and (res_s.value <= res_p.value + err)
    return holds, (res_m.value, res_s.value, res_p.value), err


def check_tail_ordering(
    n: int, source, p: float, n_cells: int = 8192, tol: float = 1e-9
):
    """Same bracketing with the log-concave-tail families (atom-aware)."""
    a = math.sqrt(source.abs_moment(2.0))
    b = source.abs_moment(p) ** (1.0 / p)
    target = logconcave.MatchTarget(p, a, b)
    minus = logconcave.match_tail(target, "minus")
    plus = logconcave.match_tail(target, "plus")
    res_m, res_s, res_p = _ordering_triple(source, minus, plus, n, p, n_cells, tol)
    err = res_m.error_bound + res_s.error_bound + res_p.error_bound
    holds = (res_m.value <= res_s.value + err) and (res_s.value <= res_p.value + err)
    return holds, (res_m.value, res_s.value, res_p.value), err
