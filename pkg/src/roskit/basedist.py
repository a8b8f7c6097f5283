"""Symmetric base laws of mixtures.

A BaseDistribution stores the law of |V| for a symmetric variable V;
signs are always independent fair signs.  Supported kinds are the random
sign, the symmetric uniform, the standard Gaussian, the real projection
cos(2*pi*U) of a Steinhaus variable, and finite symmetric atomic laws.
These cover every closed-form example the constants need while keeping
all moments exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import discrete, specfun
from .errors import DegenerateLawError, DomainError, UnsupportedMethodError
from .result import ConstantResult

__all__ = [
    "BaseDistribution",
    "ConditionedBase",
    "rademacher",
    "uniform",
    "gaussian",
    "cosine_projection",
    "symmetric_atoms",
    "parse_base_spec",
    "abs_moment",
    "condition_nonzero",
    "sample_abs",
    "sample_signed",
    "kfold_abs_moment",
]

_KINDS = ("rademacher", "uniform", "gaussian", "cosine", "atoms")


@dataclass(frozen=True)
class BaseDistribution:
    kind: str
    half_width: float = 1.0  # uniform only
    atoms: tuple = ()        # atoms only: ((location, mass), ...), locations >= 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown base kind {self.kind!r}")
        if self.kind == "uniform" and not self.half_width > 0.0:
            raise DomainError("uniform half_width must be positive")
        if self.kind == "atoms":
            if not self.atoms:
                raise DomainError("atomic law needs at least one atom")
            locs = [a[0] for a in self.atoms]
            masses = [a[1] for a in self.atoms]
            if any(loc < 0 for loc in locs):
                raise DomainError("atom locations must be nonnegative")
            if any(l2 <= l1 for l1, l2 in zip(locs, locs[1:])):
                raise DomainError("atom locations must be strictly increasing")
            if any(m <= 0 for m in masses):
                raise DomainError("atom masses must be positive")
            if abs(math.fsum(masses) - 1.0) > 1e-12:
                raise DomainError("atom masses must sum to 1")
            if self.zero_mass >= 1.0:
                raise DegenerateLawError("law is identically zero")

    @property
    def zero_mass(self) -> float:
        if self.kind == "atoms" and self.atoms[0][0] == 0.0:
            return self.atoms[0][1]
        return 0.0

    @property
    def is_atomic(self) -> bool:
        return self.kind in ("rademacher", "atoms")

    def support_bound(self) -> float | None:
        """Largest possible |V|, or None for unbounded support."""
        if self.kind in ("rademacher", "cosine"):
            return 1.0
        if self.kind == "uniform":
            return self.half_width
        if self.kind == "atoms":
            return self.atoms[-1][0]
        return None

    def signed_atoms(self) -> dict:
        """Signed law as {location: mass} for atomic kinds."""
        if self.kind == "rademacher":
            return {-1.0: 0.5, 1.0: 0.5}
        if self.kind != "atoms":
            raise UnsupportedMethodError(f"{self.kind} law is not atomic")
        out: dict = {}
        for loc, mass in self.atoms:
            if loc == 0.0:
                out[0.0] = mass
            else:
                out[loc] = mass / 2.0
                out[-loc] = mass / 2.0
        return out

    def cdf(self, x: float) -> float:
        """CDF of the signed law (continuous kinds only)."""
        if self.kind == "uniform":
            w = self.half_width
            return min(1.0, max(0.0, (x + w) / (2.0 * w)))
        if self.kind == "gaussian":
            return 0.5 * math.erfc(-x / math.sqrt(2.0))
        if self.kind == "cosine":
            if x <= -1.0:
                return 0.0
            if x >= 1.0:
                return 1.0
            return 1.0 - math.acos(x) / math.pi
        raise UnsupportedMethodError(f"no continuous CDF for kind {self.kind!r}")


def rademacher() -> BaseDistribution:
    return BaseDistribution("rademacher")


def uniform(half_width: float = 1.0) -> BaseDistribution:
    return BaseDistribution("uniform", half_width=float(half_width))


def gaussian() -> BaseDistribution:
    return BaseDistribution("gaussian")


def cosine_projection() -> BaseDistribution:
    return BaseDistribution("cosine")


def symmetric_atoms(atoms) -> BaseDistribution:
    pairs = tuple(sorted((float(loc), float(mass)) for loc, mass in atoms))
    return BaseDistribution("atoms", atoms=pairs)


def parse_base_spec(text: str) -> BaseDistribution:
    """Parse the textual constructor syntax used by the CLI.

    Accepted forms: ``rademacher``, ``uniform:w=1``, ``gaussian``,
    ``cosine``, ``atoms:0:0.5,1:0.5``.
    """
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    if head == "rademacher":
        return rademacher()
    if head == "gaussian":
        return gaussian()
    if head == "cosine":
        return cosine_projection()
    if head == "uniform":
        w = 1.0
        if rest:
            key, _, val = rest.partition("=")
            if key != "w":
                raise DomainError(f"bad uniform parameter {rest!r}")
            w = float(val)
        return uniform(w)
    if head == "atoms":
        if not rest:
            raise DomainError("atoms spec needs loc:mass pairs")
        pairs = []
        for chunk in rest.split(","):
            loc_s, _, mass_s = chunk.partition(":")
            if not mass_s:
                raise DomainError(f"bad atom entry {chunk!r}")
            pairs.append((float(loc_s), float(mass_s)))
        return symmetric_atoms(pairs)
    raise DomainError(f"unknown base distribution spec {text!r}")


def format_base_spec(V: BaseDistribution) -> str:
    if V.kind == "uniform":
        return f"uniform:w={V.half_width:g}"
    if V.kind == "atoms":
        return "atoms:" + ",".join(f"{loc:g}:{mass:g}" for loc, mass in V.atoms)
    return V.kind


@dataclass(frozen=True)
class ConditionedBase:
    """Base law conditioned on being nonzero: P(V~ = 0) = 0."""

    base: BaseDistribution

    def __post_init__(self):
        if self.base.zero_mass != 0.0:
            raise DomainError("conditioned base must carry no mass at zero")

    def abs_moment(self, r: float) -> float:
        return abs_moment(self.base, r)


def abs_moment(V: BaseDistribution, r: float) -> float:
    """E|V|^r, exact for every supported kind."""
    if r < 0:
        raise DomainError("moment order must be nonnegative")
    if r == 0:
        return 1.0
    if V.kind == "rademacher":
        return 1.0
    if V.kind == "uniform":
        return V.half_width**r / (r + 1.0)
    if V.kind == "gaussian":
        return specfun.gaussian_abs_moment(r)
    if V.kind == "cosine":
        return 1.0 / specfun.steinhaus_beta(r)
    return math.fsum(mass * loc**r for loc, mass in V.atoms)


def condition_nonzero(V: BaseDistribution) -> ConditionedBase:
    """The law of V conditioned on V != 0 (atom at zero removed)."""
    if V.zero_mass >= 1.0:
        raise DegenerateLawError("cannot condition the zero law on being nonzero")
    if V.zero_mass == 0.0:
        return ConditionedBase(V)
    keep = 1.0 - V.zero_mass
    scaled = tuple((loc, mass / keep) for loc, mass in V.atoms if loc != 0.0)
    return ConditionedBase(BaseDistribution("atoms", atoms=scaled))


def sample_abs(V: BaseDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. draws of |V|; deterministic given the generator state."""
    if n < 0:
        raise DomainError("sample count must be nonnegative")
    if V.kind == "rademacher":
        return np.ones(n)
    if V.kind == "uniform":
        return V.half_width * rng.random(n)
    if V.kind == "gaussian":
        return np.abs(rng.standard_normal(n))
    if V.kind == "cosine":
        return np.abs(np.cos(2.0 * np.pi * rng.random(n)))
    locs = np.array([a[0] for a in V.atoms])
    masses = np.array([a[1] for a in V.atoms])
    return rng.choice(locs, size=n, p=masses / masses.sum())


def sample_signed(V: BaseDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. draws of V itself (independent fair signs applied to |V|)."""
    mags = sample_abs(V, rng, n)
    signs = rng.integers(0, 2, size=n) * 2 - 1
    return mags * signs


# ---------------------------------------------------------------------------
# k-fold sums: E|V~_1 + ... + V~_k|^p


def _rademacher_walk_moment(k: int, p: float) -> float:
    """E|S_k|^p for the simple random-sign walk, exact binomial sum."""
    if k == 0:
        return 0.0
    if k <= 300:
        scale = 2.0 ** (-k)
        return math.fsum(
            math.comb(k, i) * scale * abs(2 * i - k) ** p
            for i in range(k + 1)
            if 2 * i != k
        )
    lg_k1 = math.lgamma(k + 1)
    terms = [
        math.exp(
            lg_k1
            - math.lgamma(i + 1)
            - math.lgamma(k - i + 1)
            - k * math.log(2.0)
            + p * math.log(abs(2 * i - k))
        )
        for i in range(k + 1)
        if 2 * i != k
    ]
    return math.fsum(terms)


def gaussian_tail_abs_moment(p: float, L: float) -> float:
    """E[|Z|^p ; |Z| > L] for a standard Gaussian."""
    return specfun.gaussian_abs_moment(p) * specfun.reg_upper_inc_gamma(
        0.5 * (p + 1.0), 0.5 * L * L
    )


def _gaussian_grid_halfwidth(k: int, p: float, tol: float) -> float:
    """Single-summand truncation point so the lost moment mass is << tol."""
    L = 8.0
    while k ** (p / 2.0) * gaussian_tail_abs_moment(p, L / math.sqrt(k)) > 0.01 * tol:
        L += 1.0
        if L > 60.0:
            break
    return L


def _subgaussian_tail_moment(p: float, k: int, sigma2: float, T: float) -> float:
    """Upper bound on E[|S_k|^p ; |S_k| > T] for a sum of k independent
    symmetric sigma2-sub-Gaussian summands (Hoeffding for bounded laws)."""
    u = T * T / (2.0 * k * sigma2)
    if u <= 0.0:
        return math.inf
    log_pref = (
        math.log(p)
        + 0.5 * p * math.log(2.0 * k * sigma2)
        + specfun.log_gamma(0.5 * p)
    )
    q = specfun.reg_upper_inc_gamma(0.5 * p, u)
    if q == 0.0:
        return 0.0
    return math.exp(log_pref + math.log(q))


def grid_cell_masses(V: BaseDistribution, L: float, n_cells: int):
    """Cell centers and exact per-cell masses of the signed law on [-L, L]."""
    h = 2.0 * L / n_cells
    edges = -L + h * np.arange(n_cells + 1)
    cdf_vals = np.array([V.cdf(float(e)) for e in edges])
    masses = np.diff(cdf_vals)
    centers = edges[:-1] + 0.5 * h
    return centers, np.maximum(masses, 0.0)


def kfold_moments_from_masses(
    masses: np.ndarray, L: float, ks, p: float, sigma2: float, tol: float
):
    """E|S_k|^p for each requested k by FFT powers of a cell-mass vector.

    The vector describes cell masses at centers -L + (j + 1/2) h on
    [-L, L].  Per k, the sum's support is truncated where a sub-Gaussian
    tail bound (variance proxy sigma2 per summand) certifies the discarded
    moment mass; this keeps the |x|^p weights away from the rectified FFT
    noise floor far out.  Returns per-k values and per-k certified
    truncation/threshold contributions.
    """
    from scipy.fft import irfft, next_fast_len, rfft

    ks = list(ks)
    k_top = max(ks)
    n_cells = masses.size
    h = 2.0 * L / n_cells
    total = masses.sum()
    if total > 0:
        masses = masses / total  # renormalize the (tiny) truncated mass

    nfft = next_fast_len(k_top * n_cells + 1)
    base_f = rfft(masses, nfft)
    by_k: dict = {}
    power = np.ones_like(base_f)
    k_done = 0
    for k in sorted(set(ks)):
        for _ in range(k - k_done):
            power = power * base_f
        k_done = k
        conv = irfft(power, nfft)[: k * (n_cells - 1) + 1]
        positions = -k * L + (np.arange(conv.size) + 0.5 * k) * h
        T = 3.0 * math.sqrt(k * sigma2)
        tail = _subgaussian_tail_moment(p, k, sigma2, T)
        while tail > 0.01 * tol and T < k * L:
            T += math.sqrt(k * sigma2)
            tail = _subgaussian_tail_moment(p, k, sigma2, T)
        if T >= k * L:
            tail = 0.0  # full support retained, nothing discarded
        keep = np.abs(positions) <= T
        conv = conv[keep]
        weights = np.abs(positions[keep]) ** p
        # clamp FFT noise; account for what the floor can hide
        floor = 1e-18 * float(conv.max(initial=0.0))
        hidden = floor * float(weights.sum())
        conv = np.where(conv > floor, conv, 0.0)
        by_k[k] = (float(np.dot(weights, conv)), tail + hidden)
    values = [by_k[k][0] for k in ks]
    certified = [by_k[k][1] for k in ks]
    return values, certified


def grid_moments_for_ks(V: BaseDistribution, ks, p: float, n_cells: int, tol: float):
    """E|S_k|^p for each requested k from the exact cell masses of V."""
    k_top = max(ks)
    bound = V.support_bound()
    L = bound if bound is not None else _gaussian_grid_halfwidth(k_top, p, tol)
    sigma2 = bound * bound if bound is not None else 1.0
    _, masses = grid_cell_masses(V, L, n_cells)
    return kfold_moments_from_masses(masses, L, ks, p, sigma2, tol)


def atom_cell_masses(signed_atoms: dict, L: float, n_cells: int) -> np.ndarray:
    """Cell-mass vector for an atomic law, each atom split between the two
    neighboring cell centers so its mean is preserved exactly."""
    h = 2.0 * L / n_cells
    masses = np.zeros(n_cells)
    for loc, m in signed_atoms.items():
        pos = (loc + L) / h - 0.5
        j0 = int(math.floor(pos))
        frac = pos - j0
        j0 = min(max(j0, 0), n_cells - 1)
        j1 = min(max(j0 + 1, 0), n_cells - 1)
        masses[j0] += m * (1.0 - frac)
        masses[j1] += m * frac
    return masses


def kfold_grid_moments(
    V: BaseDistribution, ks, p: float, tol: float, n_cells: int = 8192
):
    """Two-resolution grid moments with a per-k error estimate.

    Returns (values, errors); values come from the finer grid, errors are
    triple the coarse/fine difference (conservative for any convergence
    order >= 1) plus the certified truncation contributions.
    """
    ks = list(ks)
    coarse, _ = grid_moments_for_ks(V, ks, p, n_cells, tol)
    fine, certified = grid_moments_for_ks(V, ks, p, 2 * n_cells, tol)
    errs = [
        3.0 * abs(a - b) + c + 1e-14 * abs(b)
        for a, b, c in zip(coarse, fine, certified)
    ]
    return fine, errs


def kfold_abs_moment(
    V: ConditionedBase,
    k: int,
    p: float,
    method: str = "exact",
    tol: float = 1e-9,
    rng: np.random.Generator | None = None,
    n_samples: int = 1_000_000,
) -> ConstantResult:
    """E|S_k|^p for S_k the sum of k i.i.d. copies of the conditioned base.

    method "exact" needs a closed form (random sign walk or Gaussian);
    "grid" uses discretized self-convolution (exact for atomic kinds);
    "monte_carlo" averages over sampled sums with independent fair signs.
    """
    if p <= 0:
        raise DomainError("kfold_abs_moment requires p > 0")
    if k < 0:
        raise DomainError("k must be a nonnegative count")
    base = V.base
    diag = {"k": k, "p": p}
    if k == 0:
        return ConstantResult(0.0, method="empty_sum", error_bound=0.0, diagnostics=diag)

    if method == "exact":
        if base.kind == "rademacher":
            val = _rademacher_walk_moment(k, p)
            return ConstantResult(val, "exact/binomial_walk", 1e-14 * k * val, diag)
        if base.kind == "gaussian":
            val = k ** (p / 2.0) * specfun.gaussian_abs_moment(p)
            return ConstantResult(val, "exact/gaussian_scaling", 1e-14 * val, diag)
        raise UnsupportedMethodError(
            f"no exact k-fold moment for kind {base.kind!r}; use grid or monte_carlo"
        )

    if method == "grid":
        if base.is_atomic:
            law = base.signed_atoms()
            acc = {0.0: 1.0}
            for _ in range(k):
                acc = discrete.convolve_atoms(acc, law, max_support=2_000_000)
            val = discrete.abs_moment_atoms(acc, p)
            diag["support"] = len(acc)
            return ConstantResult(val, "grid/atoms_exact", 1e-13 * k * val, diag)
        n_cells = 8192
        while True:
            vals, errs = kfold_grid_moments(base, [k], p, tol, n_cells)
            val, err = vals[0], errs[0]
            if err <= tol * max(1.0, abs(val)) or n_cells >= 32768:
                break
            n_cells *= 2
        diag["n_cells"] = 2 * n_cells
        return ConstantResult(val, "grid/fft", err, diag)

    if method == "monte_carlo":
        if rng is None:
            raise DomainError("monte_carlo method requires an explicit rng")
        total = np.zeros(n_samples)
        max_summand = 0.0
        for _ in range(k):
            x = sample_abs(base, rng, n_samples)
            s = rng.integers(0, 2, size=n_samples) * 2 - 1
            max_summand = max(max_summand, float(np.max(x))) if n_samples else 0.0
            total += x * s
        powers = np.abs(total) ** p
        val = float(powers.mean())
        err = 3.0 * float(powers.std(ddof=1)) / math.sqrt(n_samples)
        diag.update({"n_samples": n_samples, "max_abs_summand": max_summand})
        return ConstantResult(val, "monte_carlo", err, diag)

    raise UnsupportedMethodError(f"unknown k-fold method {method!r}")
