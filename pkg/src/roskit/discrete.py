"""Exact arithmetic with finite atomic laws.

A law is a plain dict {location: mass}.  Convolutions sum supports and
multiply masses; support points are deduplicated after rounding to 12
significant digits, which keeps double precision exactness while avoiding
support blowup from floating-point near-collisions.
"""

from __future__ import annotations

import math

SIG_DIGITS = 12


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0.0:
        return 0.0
    return round(x, digits - 1 - int(math.floor(math.log10(abs(x)))))


def convolve_atoms(d1: dict, d2: dict, max_support: int | None = None) -> dict:
    """Law of X + Y for independent atomic X, Y.

    Raises MemoryError-ish OverflowError when the merged support would
    exceed max_support, so callers can fall back to a grid method.
    """
    out: dict = {}
    for x1, m1 in d1.items():
        for x2, m2 in d2.items():
            key = round_sig(x1 + x2)
            out[key] = out.get(key, 0.0) + m1 * m2
    if max_support is not None and len(out) > max_support:
        raise OverflowError(
            f"atomic convolution support {len(out)} exceeds cap {max_support}"
        )
    return out


def scale_atoms(d: dict, c: float) -> dict:
    out: dict = {}
    for x, m in d.items():
        key = round_sig(c * x)
        out[key] = out.get(key, 0.0) + m
    return out


def thin_atoms(d: dict, activation: float) -> dict:
    """Bernoulli thinning: the law of theta*X with P(theta=1) = activation."""
    out = {round_sig(x): activation * m for x, m in d.items() if x != 0.0}
    zero = d.get(0.0, 0.0) * activation + (1.0 - activation)
    out[0.0] = out.get(0.0, 0.0) + zero
    return out


def abs_moment_atoms(d: dict, p: float) -> float:
    return math.fsum(m * abs(x) ** p for x, m in d.items() if x != 0.0)


def nfold_atoms(laws: list[dict], max_support: int | None = None) -> dict:
    acc = {0.0: 1.0}
    for law in laws:
        acc = convolve_atoms(acc, law, max_support=max_support)
    return acc
