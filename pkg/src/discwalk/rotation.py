"""Exact circle arithmetic in 128-bit fixed point.

The circle [0,1) is modeled as the integers mod 2**128: an angle is
``bits / 2**128``.  Addition of angles is addition mod 2**128, so advancing a
point along a rotation orbit is exact and bit-reproducible; there is no
floating-point drift no matter how many steps are taken.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import FiniteCF, UnboundedQuotients, UnknownPreset

SCALE_BITS = 128
MODULUS = 1 << SCALE_BITS
HALF = 1 << (SCALE_BITS - 1)

_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


@dataclass(frozen=True, order=True)
class FixedAngle:
    """A point of the circle, stored as bits/2**128 in [0,1)."""

    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < MODULUS:
            raise ValueError("FixedAngle bits out of range")

    @classmethod
    def from_fraction(cls, frac: Fraction) -> "FixedAngle":
        frac = frac - (frac.numerator // frac.denominator)  # reduce mod 1
        bits = (frac.numerator * MODULUS) // frac.denominator % MODULUS
        return cls(bits)

    @classmethod
    def from_float(cls, x: float) -> "FixedAngle":
        return cls.from_fraction(Fraction(x))

    @classmethod
    def from_decimal_string(cls, s: str) -> "FixedAngle":
        return cls.from_fraction(Fraction(s))

    @classmethod
    def from_hex(cls, s: str) -> "FixedAngle":
        return cls(int(s, 16) % MODULUS)

    def to_hex(self) -> str:
        return format(self.bits, "032x")

    def to_float(self) -> float:
        return self.bits / MODULUS

    def to_fraction(self) -> Fraction:
        return Fraction(self.bits, MODULUS)

    def __repr__(self):
        return f"FixedAngle({self.to_float():.17g})"


@dataclass(frozen=True)
class AlphaSpec:
    """Choice of rotation angle: a named quadratic preset or a custom CF.

    A custom spec is a finite prefix of continued-fraction partial quotients
    together with the declared bound ``bound`` on them (the badly approximable
    witness).  The prefix must be long enough to pin the angle past 128-bit
    resolution, otherwise it denotes a rational and is rejected.
    """

    preset: Optional[str] = None
    quotients: Optional[Sequence[int]] = None
    bound: Optional[int] = None

    PRESETS = ("golden", "sqrt2m1", "sqrt3m1")


def _preset_quotients(name: str) -> Iterator[int]:
    if name == "golden":        # (sqrt(5)-1)/2 = [0; 1, 1, 1, ...]
        while True:
            yield 1
    elif name == "sqrt2m1":     # sqrt(2)-1 = [0; 2, 2, 2, ...]
        while True:
            yield 2
    elif name == "sqrt3m1":     # sqrt(3)-1 = [0; 1, 2, 1, 2, ...]
        while True:
            yield 1
            yield 2
    else:
        raise UnknownPreset(f"unknown alpha preset: {name!r}")


def resolve_alpha(spec: AlphaSpec) -> FixedAngle:
    """Quantize the specified irrational to 128-bit fixed point.

    Continued-fraction convergents p/q are accumulated in exact integer
    arithmetic until q > 2**130; the convergent error 1/q**2 is then far below
    the quantization step, so the returned angle is within 2**-128 of the
    true value.
    """
    if spec.preset is not None:
        quots: Iterator[int] = _preset_quotients(spec.preset)
        finite = False
    else:
        if not spec.quotients:
            raise FiniteCF("empty continued fraction")
        if spec.bound is None:
            raise UnboundedQuotients("custom CF requires a declared quotient bound")
        for a in spec.quotients:
            if a < 1:
                raise UnboundedQuotients(f"partial quotient {a} is not positive")
            if a > spec.bound:
                raise UnboundedQuotients(
                    f"partial quotient {a} exceeds declared bound {spec.bound}")
        quots = iter(spec.quotients)
        finite = True

    # value = [0; a1, a2, ...]; standard convergent recurrence
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    limit = 1 << (SCALE_BITS + 2)
    while q <= limit:
        try:
            a = next(quots)
        except StopIteration:
            if finite:
                raise FiniteCF(
                    "finite continued fraction denotes a rational; "
                    "supply enough quotients to exceed 128-bit resolution")
            raise
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    bits = ((p << SCALE_BITS) + q // 2) // q % MODULUS
    return FixedAngle(bits)


def advance(theta: FixedAngle, alpha: FixedAngle, n: int) -> FixedAngle:
    """theta + n*alpha mod 1, exactly."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return FixedAngle((theta.bits + n * alpha.bits) % MODULUS)


def phi(theta: FixedAngle) -> int:
    """Step function: +1 on [0, 1/2), -1 on [1/2, 1)."""
    return 1 if theta.bits < HALF else -1


# ---------------------------------------------------------------------------
# Vectorized orbit engine.
#
# Orbit points theta + k*alpha are produced in blocks: the block base is
# advanced in exact Python integers, and the within-block offsets use 32-bit
# limb arithmetic in uint64 numpy arrays (j * limb < 2**63 for block sizes up
# to 2**20, so no intermediate overflows).

_BLOCK = 1 << 19


def _limbs(bits: int):
    return [np.uint64((bits >> (32 * i)) & 0xFFFFFFFF) for i in range(4)]


def _block_limb3_and_2(theta_bits: int, alpha_bits: int, j: np.ndarray):
    """Top two 32-bit limbs of (theta + j*alpha) mod 2**128 for a j-block."""
    b0, b1, b2, b3 = _limbs(theta_bits)
    a0, a1, a2, a3 = _limbs(alpha_bits)
    t = b0 + j * a0
    c = t >> _SHIFT32
    t = b1 + j * a1 + c
    c = t >> _SHIFT32
    t2 = b2 + j * a2 + c
    c = t2 >> _SHIFT32
    t3 = (b3 + j * a3 + c) & _MASK32
    return t3, t2 & _MASK32


def orbit_signs(theta_bits: int, alpha_bits: int, n: int) -> np.ndarray:
    """Boolean array s[k] = (theta + k*alpha mod 1 < 1/2) for 0 <= k < n."""
    out = np.empty(n, dtype=bool)
    top_threshold = np.uint64(1 << 31)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        base = (theta_bits + start * alpha_bits) % MODULUS
        j = np.arange(stop - start, dtype=np.uint64)
        t3, _ = _block_limb3_and_2(base, alpha_bits, j)
        out[start:stop] = t3 < top_threshold
    return out


def orbit_hi64(theta_bits: int, alpha_bits: int, n: int) -> np.ndarray:
    """Top 64 bits of each orbit point; enough resolution for arc membership
    tests whose error is dominated by Monte Carlo noise."""
    out = np.empty(n, dtype=np.uint64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        base = (theta_bits + start * alpha_bits) % MODULUS
        j = np.arange(stop - start, dtype=np.uint64)
        t3, t2 = _block_limb3_and_2(base, alpha_bits, j)
        out[start:stop] = (t3 << _SHIFT32) | t2
    return out


def walk_heights(theta_bits: int, alpha_bits: int, n: int) -> np.ndarray:
    """Cocycle heights h[k] = sum_{i<k} phi(theta + i*alpha), as int64.

    h[0] = 0 and h has length n, i.e. it covers the walk prefix of length n.
    """
    signs = orbit_signs(theta_bits, alpha_bits, n)
    steps = signs.astype(np.int64)
    np.multiply(steps, 2, out=steps)
    np.subtract(steps, 1, out=steps)
    heights = np.empty(n, dtype=np.int64)
    heights[0] = 0
    np.cumsum(steps[:-1], out=heights[1:])
    return heights
