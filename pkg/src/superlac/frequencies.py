"""Integer frequency sequences and exact phase arithmetic.

Evaluating exp(i*n*t) when the frequency n has hundreds or thousands of
bits requires argument reduction (n*t mod 2*pi) at a working precision
that grows with bit_length(n): at any fixed precision the leading bits
of the product n*t swamp the fractional part and the computed angle is
noise.  This module provides

* frequency-sequence families (geometric, double-exponential, explicit
  tables) with exact big-integer values and fast modular residues,
* a finite-window growth classifier for such sequences,
* certified scalar argument reduction (``reduce_phase``),
* exact residue arithmetic for uniform grids (``grid_phase``), and
* a vectorised fixed-point kernel for phases of dyadic-lattice times
  (``lattice_fraction``).

Angles are reported in [0, 2*pi); lattice phases are reported as
fractions of a turn in [0, 1).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import NumericalContractError, UndefinedIndexError, ValidationError

__all__ = [
    "FrequencySequence",
    "GeometricFrequencies",
    "DoubleExponentialFrequencies",
    "ExplicitFrequencies",
    "family_geometric",
    "family_double_exponential",
    "family_explicit",
    "frequencies_from_json",
    "Lacunarity",
    "LacunarityReport",
    "classify",
    "TurnFraction",
    "ReducedPhase",
    "reduce_phase",
    "grid_phase",
    "grid_residues",
    "residue_collisions",
    "ResidueCollisionWarning",
    "lattice_fraction",
    "lattice_fraction_error",
    "TIME_LATTICE_BITS",
]

TWO_PI = 2.0 * math.pi

#: Scale (in bits) of the canonical dyadic time lattice t = 2*pi*a/2**60.
TIME_LATTICE_BITS = 60

# Default certified accuracy of scalar argument reduction, in radians.
DEFAULT_TARGET_ERROR = 2.0 ** -50

# Hard ceiling on mpmath working precision before reduce_phase refuses.
DEFAULT_MAX_PRECISION_BITS = 1 << 22


class ResidueCollisionWarning(UserWarning):
    """Two active frequencies share a residue mod the grid size (aliasing)."""


# ---------------------------------------------------------------------------
# frequency sequences
# ---------------------------------------------------------------------------


class FrequencySequence:
    """Strictly separated integer frequencies indexed by nonzero integers.

    Subclasses define ``value(k)`` for k in their domain.  The contract,
    checked for explicit tables and true by construction for the built-in
    families, is

    * n(1) >= 0 and n(k+1) >= n(k) + 1 on the positive side,
    * n(-1) <= 0 and n(-k-1) <= n(-k) - 1 on the negative side (if any).

    ``residue(k, m)`` must agree with ``value(k) % m`` but is allowed to
    take a fast path (modular exponentiation), which is what makes grid
    sampling usable for frequencies too large to materialise.
    """

    label: str = "abstract"

    def value(self, k: int) -> int:
        raise NotImplementedError

    def defined(self, k: int) -> bool:
        raise NotImplementedError

    def residue(self, k: int, m: int) -> int:
        """value(k) mod m, in [0, m)."""
        return self.value(k) % m

    def magnitude(self, k: int) -> float:
        """|value(k)| as a float, +inf on overflow."""
        v = abs(self.value(k))
        try:
            return float(v)
        except OverflowError:
            return math.inf

    def bit_length(self, k: int) -> int:
        return abs(self.value(k)).bit_length()

    def _require(self, k: int) -> None:
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            raise UndefinedIndexError(f"frequency index must be an integer, got {k!r}")
        if k == 0 or not self.defined(k):
            raise UndefinedIndexError(f"{self.label}: frequency undefined at index {k}")

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"<{type(self).__name__} {self.label}>"


@dataclass(frozen=True, repr=False)
class GeometricFrequencies(FrequencySequence):
    """n(k) = base**k for k >= 1; optionally n(-k) = -base**k."""

    base: int = 2
    two_sided: bool = False

    def __post_init__(self):
        if not isinstance(self.base, int) or self.base < 2:
            raise ValidationError(f"geometric base must be an integer >= 2, got {self.base!r}")

    @property
    def label(self) -> str:
        return f"geometric(base={self.base})"

    def defined(self, k: int) -> bool:
        return k >= 1 or (self.two_sided and k <= -1)

    def value(self, k: int) -> int:
        self._require(k)
        return self.base ** k if k > 0 else -(self.base ** (-k))

    def residue(self, k: int, m: int) -> int:
        self._require(k)
        r = pow(self.base, abs(k), m)
        return r if k > 0 else (-r) % m

    def magnitude(self, k: int) -> float:
        self._require(k)
        if abs(k) * math.log2(self.base) > 1100.0:
            return math.inf
        try:
            return float(self.base ** abs(k))
        except OverflowError:
            return math.inf

    def bit_length(self, k: int) -> int:
        self._require(k)
        # base**|k| has a cheap closed form only for base 2; general case is
        # still fine to compute exactly because |k| is small in practice.
        if self.base == 2:
            return abs(k) + 1
        return (self.base ** abs(k)).bit_length()

    def to_json(self) -> dict:
        out = {"family": "geometric", "base": self.base}
        if self.two_sided:
            out["two_sided"] = True
        return out


@dataclass(frozen=True, repr=False)
class DoubleExponentialFrequencies(FrequencySequence):
    """n(k) = 2**(2**k) for k >= 1, n(-k) = -n(k).

    value(k) is astronomically large already for k around 30; callers that
    only need residues or phases should use ``residue``/``lattice_fraction``,
    which work for any k via modular exponentiation.
    """

    two_sided: bool = True

    @property
    def label(self) -> str:
        return "double_exponential"

    def defined(self, k: int) -> bool:
        return k >= 1 or (self.two_sided and k <= -1)

    def value(self, k: int) -> int:
        self._require(k)
        e = 2 ** abs(k)
        if e > (1 << 26):
            # 2**(2**k) would not fit in memory; refuse rather than hang.
            raise NumericalContractError(
                f"double_exponential value at k={k} exceeds 2**{1 << 26} bits; "
                "use residue()/lattice_fraction() instead of value()"
            )
        v = 1 << e
        return v if k > 0 else -v

    def residue(self, k: int, m: int) -> int:
        self._require(k)
        r = pow(2, 2 ** abs(k), m)
        return r if k > 0 else (-r) % m

    def magnitude(self, k: int) -> float:
        self._require(k)
        if abs(k) > 10:  # 2**(2**11) already overflows binary64
            return math.inf
        try:
            return float(1 << (2 ** abs(k)))
        except OverflowError:
            return math.inf

    def bit_length(self, k: int) -> int:
        self._require(k)
        return 2 ** abs(k) + 1

    def to_json(self) -> dict:
        out = {"family": "double_exponential"}
        if not self.two_sided:
            out["two_sided"] = False
        return out


class ExplicitFrequencies(FrequencySequence):
    """A finite table of frequencies on contiguous index ranges.

    ``values`` maps nonzero indices to integers.  Positive indices must
    form a contiguous block 1..P and negative indices -1..-Q (either side
    may be absent); the separation contract is checked at construction.
    """

    def __init__(self, values: dict[int, int], label: str = "explicit"):
        vals = {}
        for k, n in values.items():
            k = int(k)
            if k == 0:
                raise ValidationError("index 0 is not part of the domain")
            if not isinstance(n, int):
                raise ValidationError(f"frequency values must be integers, got {n!r} at k={k}")
            vals[k] = n
        if not vals:
            raise ValidationError("explicit frequency table is empty")
        pos = sorted(k for k in vals if k > 0)
        neg = sorted((-k for k in vals if k < 0))
        if pos and pos != list(range(1, len(pos) + 1)):
            raise ValidationError(f"positive indices must be contiguous from 1, got {pos}")
        if neg and neg != list(range(1, len(neg) + 1)):
            raise ValidationError(f"negative indices must be contiguous from -1, got {[-k for k in neg]}")
        if pos and vals[1] < 0:
            raise ValidationError("n(1) must be >= 0")
        if neg and vals[-1] > 0:
            raise ValidationError("n(-1) must be <= 0")
        for k in pos[:-1]:
            if vals[k + 1] < vals[k] + 1:
                raise ValidationError(
                    f"separation violated: n({k + 1}) = {vals[k + 1]} < n({k}) + 1"
                )
        for k in neg[:-1]:
            if vals[-k - 1] > vals[-k] - 1:
                raise ValidationError(
                    f"separation violated: n({-k - 1}) = {vals[-k - 1]} > n({-k}) - 1"
                )
        self._values = vals
        self.k_max_pos = len(pos)
        self.k_max_neg = len(neg)
        self.label = label

    def defined(self, k: int) -> bool:
        return k in self._values

    def value(self, k: int) -> int:
        self._require(k)
        return self._values[k]

    def to_json(self) -> dict:
        items = sorted(self._values.items())
        return {
            "family": "explicit",
            "values": [[k, str(n)] for k, n in items],
            "label": self.label,
        }


def family_geometric(base: int = 2, two_sided: bool = False) -> GeometricFrequencies:
    """Hadamard-gap family n(k) = base**k."""
    return GeometricFrequencies(base=base, two_sided=two_sided)


def family_double_exponential(two_sided: bool = True) -> DoubleExponentialFrequencies:
    """Gap-ratio-diverging family n(k) = 2**(2**k)."""
    return DoubleExponentialFrequencies(two_sided=two_sided)


def family_explicit(values: dict[int, int], label: str = "explicit") -> ExplicitFrequencies:
    return ExplicitFrequencies(values, label=label)


def frequencies_from_json(obj: dict) -> FrequencySequence:
    """Inverse of FrequencySequence.to_json; big integers appear as decimal strings."""
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValidationError(f"frequency-family object needs a 'family' key, got {obj!r}")
    fam = obj["family"]
    if fam == "geometric":
        return GeometricFrequencies(base=int(obj.get("base", 2)),
                                    two_sided=bool(obj.get("two_sided", False)))
    if fam == "double_exponential":
        return DoubleExponentialFrequencies(two_sided=bool(obj.get("two_sided", True)))
    if fam == "explicit":
        try:
            vals = {int(k): int(n) for k, n in obj["values"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed explicit frequency table: {exc}") from exc
        return ExplicitFrequencies(vals, label=str(obj.get("label", "explicit")))
    raise ValidationError(f"unknown frequency family {fam!r}")


# ---------------------------------------------------------------------------
# growth classification
# ---------------------------------------------------------------------------


class Lacunarity(str, Enum):
    NON_LACUNAR = "non_lacunar"
    LACUNAR = "lacunar"
    SUPERLACUNAR = "superlacunar"


@dataclass(frozen=True)
class LacunarityReport:
    """Finite-window growth classification of a frequency sequence.

    The verdict is inherently one about the inspected window: it reports
    which gap condition the observed ratios n(k+1)/n(k) are consistent
    with, not a proof about the infinite sequence.
    """

    label: Lacunarity
    window: int
    tail_length: int
    min_ratio: float
    ratios_positive: tuple[float, ...]
    ratios_negative: tuple[float, ...]
    r_super: float
    margin: float
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "label": self.label.value,
            "window": self.window,
            "tail_length": self.tail_length,
            "min_ratio": self.min_ratio,
            "ratios_positive": list(self.ratios_positive),
            "ratios_negative": list(self.ratios_negative),
            "r_super": self.r_super,
            "margin": self.margin,
            "notes": list(self.notes),
        }


def _ratio(num: int, den: int) -> float:
    if den == 0:
        return math.inf
    try:
        return num / den
    except OverflowError:
        # Exact big-int ratio too large for binary64.
        return math.inf if num >= den else float(Fraction(num, den))


def _side_ratios(freqs: FrequencySequence, window: int, sign: int) -> tuple[float, ...]:
    out = []
    for k in range(1, window + 1):
        a = abs(freqs.value(sign * k))
        b = abs(freqs.value(sign * (k + 1)))
        out.append(_ratio(b, a))
    return tuple(out)


def classify(freqs: FrequencySequence, window: int, *,
             r_super: float = 8.0, margin: float = 0.1) -> LacunarityReport:
    """Classify gap growth from the ratios n(k+1)/n(k), k = 1..window.

    A side is superlacunar on the window when the last ceil(window/2)
    ratios are nondecreasing and all exceed ``r_super``; it is lacunar
    when the minimum ratio over that tail exceeds 1 + ``margin``
    (strictly: n(k) = k has every ratio <= 1 + 1/k, and a margin of 0.1
    with window 10 must not promote it).  A two-sided sequence gets the
    weaker of its two side verdicts.
    """
    if window < 2:
        raise ValidationError(f"window must be >= 2, got {window}")
    if not (r_super > 1.0 + margin):
        raise ValidationError("r_super must exceed 1 + margin")
    if margin <= 0:
        raise ValidationError("margin must be positive")

    sides = [+1]
    if freqs.defined(-1):
        sides.append(-1)
    notes = []
    if len(sides) == 1:
        notes.append("negative side absent; one-sided classification")

    tail_len = math.ceil(window / 2)
    per_side = {}
    all_ratios = {}
    for sign in sides:
        if not freqs.defined(sign * (window + 1)):
            raise UndefinedIndexError(
                f"{freqs.label}: window {window} needs indices up to {sign * (window + 1)}"
            )
        ratios = _side_ratios(freqs, window, sign)
        tail = ratios[-tail_len:]
        nondecreasing = all(tail[i + 1] >= tail[i] for i in range(len(tail) - 1))
        if all(r > r_super for r in tail) and nondecreasing:
            verdict = Lacunarity.SUPERLACUNAR
        elif min(tail) > 1.0 + margin:
            verdict = Lacunarity.LACUNAR
        else:
            verdict = Lacunarity.NON_LACUNAR
        per_side[sign] = verdict
        all_ratios[sign] = ratios

    order = [Lacunarity.NON_LACUNAR, Lacunarity.LACUNAR, Lacunarity.SUPERLACUNAR]
    label = min(per_side.values(), key=order.index)
    min_ratio = min(min(r) for r in all_ratios.values())
    return LacunarityReport(
        label=label,
        window=window,
        tail_length=tail_len,
        min_ratio=min_ratio,
        ratios_positive=all_ratios[+1],
        ratios_negative=all_ratios.get(-1, ()),
        r_super=r_super,
        margin=margin,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# exact scalar argument reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TurnFraction:
    """The exact angle 2*pi*p/q (a rational number of turns)."""

    p: int
    q: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not isinstance(self.q, int):
            raise ValidationError("TurnFraction components must be integers")
        if self.q <= 0:
            raise ValidationError(f"TurnFraction denominator must be positive, got {self.q}")

    def as_float(self) -> float:
        return TWO_PI * (self.p / self.q)

    def __repr__(self) -> str:
        return f"TurnFraction({self.p}, {self.q})"


@dataclass(frozen=True)
class ReducedPhase:
    """An angle with a certified absolute error bound (radians).

    The angle lies in [0, float(2*pi)]; the closed right endpoint occurs
    only when the true angle is within half an ulp of the period, where
    float(2*pi) -- itself strictly below the real 2*pi -- is the closest
    representable point.  Clamping such angles downward would silently
    add a full ulp to the error, which the bound could not cover.
    """

    angle: float
    error_bound: float
    precision_bits: int

    def exp(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))


# float rounding of an mpmath value in [0, 2*pi) costs at most half an ulp
# of 2*pi, i.e. 2**-51.
_FLOAT_ROUND = 2.0 ** -51


def reduce_phase(n: int, t: float | TurnFraction, *,
                 target_error: float = DEFAULT_TARGET_ERROR,
                 max_precision_bits: int = DEFAULT_MAX_PRECISION_BITS) -> ReducedPhase:
    """Reduce n*t mod 2*pi with a certified error bound.

    ``t`` may be a binary64 time (interpreted exactly, as the dyadic
    rational it is) or a TurnFraction for exact rational multiples of
    2*pi.  The working precision grows with bit_length(n*t), so the
    bound holds for frequencies of any size; if meeting ``target_error``
    would need more than ``max_precision_bits`` of precision, a
    NumericalContractError is raised instead of returning a wrong angle.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValidationError(f"frequency must be an integer, got {n!r}")
    n = int(n)
    if target_error <= 0:
        raise ValidationError("target_error must be positive")

    if isinstance(t, TurnFraction):
        # n * 2*pi*p/q mod 2*pi = 2*pi * ((n*p) mod q) / q, exactly.
        residue = (n * t.p) % t.q
        if residue == 0:
            return ReducedPhase(0.0, 0.0, 0)
        prec = max(80, t.q.bit_length() + 30)
        if prec > max_precision_bits:
            raise NumericalContractError(
                f"needs {prec} bits of precision, more than the {max_precision_bits} allowed"
            )
        with mpmath.workprec(prec):
            angle = float(2 * mpmath.pi * residue / t.q)
        err = _FLOAT_ROUND + 2.0 ** (-prec + 6)
        if err > target_error:
            raise NumericalContractError(
                f"cannot certify error {target_error:g} for TurnFraction (achievable: {err:g})"
            )
        return ReducedPhase(angle, err, prec)

    t = float(t)
    if not math.isfinite(t):
        raise ValidationError(f"time must be finite, got {t!r}")
    if t == 0.0 or n == 0:
        return ReducedPhase(0.0, 0.0, 0)

    p, q = t.as_integer_ratio()          # t = p / q with q a power of two
    num = n * p                          # n * t = num / q, exactly
    bits = abs(num).bit_length()
    prec = bits + 64
    if prec > max_precision_bits:
        raise NumericalContractError(
            f"reducing a {bits}-bit product needs {prec} bits of precision, "
            f"more than the {max_precision_bits} allowed"
        )
    with mpmath.workprec(prec):
        x = mpmath.mpf(num) / q          # exact: q is a power of two
        twopi = 2 * mpmath.pi
        k = mpmath.floor(x / twopi)
        r = x - k * twopi
        if r < 0:
            r += twopi
        elif r >= twopi:
            r -= twopi
        angle = float(r)
    # |x| <= 2**bits since q >= 1, and the mpmath pi error is relative, so
    # the wrap error is <= |x| * 2**(4 - prec) <= 2**-60; float rounding
    # then dominates.
    err = _FLOAT_ROUND + 2.0 ** -56
    if err > target_error:
        raise NumericalContractError(
            f"cannot certify error {target_error:g} (binary64 output already costs {err:g})"
        )
    return ReducedPhase(angle, err, prec)


# ---------------------------------------------------------------------------
# exact grid residues
# ---------------------------------------------------------------------------


def grid_phase(n: int, j: int, m: int) -> int:
    """Exact residue (n*j) mod m indexing the m-th roots of unity.

    exp(2*pi*i*n*j/m) equals the grid_phase(n, j, m)-th root of unity
    exactly, so grid sampling needs no argument reduction at all.
    """
    if m < 1:
        raise ValidationError(f"grid size must be >= 1, got {m}")
    if not (0 <= j < m):
        raise ValidationError(f"grid index must lie in [0, {m}), got {j}")
    return (int(n) * j) % m


def grid_residues(freqs: FrequencySequence, indices: Iterable[int], m: int) -> dict[int, int]:
    """Residues n(k) mod m for each index k, via the family's fast path."""
    if m < 1:
        raise ValidationError(f"grid size must be >= 1, got {m}")
    return {int(k): freqs.residue(int(k), m) for k in indices}


def residue_collisions(freqs: FrequencySequence, indices: Iterable[int], m: int,
                       *, warn: bool = True) -> list[tuple[int, ...]]:
    """Groups of indices whose frequencies collide mod m.

    A collision means the sampling grid cannot tell the two frequencies
    apart (aliasing): grid modulus estimates and Fourier reads are then
    systematically wrong for those terms.  Returns collision groups
    (each sorted, the list sorted by residue) and, when ``warn`` is set,
    emits a ResidueCollisionWarning naming them.
    """
    res = grid_residues(freqs, indices, m)
    by_res: dict[int, list[int]] = {}
    for k, r in res.items():
        by_res.setdefault(r, []).append(k)
    groups = sorted(tuple(sorted(g)) for g in by_res.values() if len(g) > 1)
    if groups and warn:
        warnings.warn(
            f"grid size {m} aliases frequency indices {groups}; "
            "increase m or drop the colliding terms",
            ResidueCollisionWarning,
            stacklevel=2,
        )
    return groups


# ---------------------------------------------------------------------------
# vectorised lattice phases
# ---------------------------------------------------------------------------

_M30 = np.int64((1 << 30) - 1)


def _fraction_limbs(n: int, scale_bits: int) -> tuple[np.ndarray, bool]:
    """frac(|n| / 2**scale_bits) as four 30-bit limbs of a 120-bit fixed point.

    Returns (limbs, exact): limbs f = floor(2**120 * frac(|n|/2**S)) in
    little-endian 30-bit pieces; exact is False when S > 120, in which
    case f underestimates the true fraction by < 2**-120.
    """
    if scale_bits < 1:
        raise ValidationError(f"scale_bits must be >= 1, got {scale_bits}")
    r = abs(int(n)) % (1 << scale_bits)
    if scale_bits <= 120:
        f = r << (120 - scale_bits)
        exact = True
    else:
        f = r >> (scale_bits - 120)
        exact = False
    limbs = np.array([(f >> (30 * i)) & 0x3FFFFFFF for i in range(4)], dtype=np.int64)
    return limbs, exact


def lattice_fraction(n: int, scale_bits: int, idx: np.ndarray) -> np.ndarray:
    """Phases frac(n * idx / 2**scale_bits), in turns, for an int64 index array.

    This is the bulk companion to ``reduce_phase``: one exact big-int
    reduction of n per call, then a few int64 limb operations per index.
    Indices may be negative; |idx| must be < 2**60.  The result is the
    true fraction up to ``lattice_fraction_error`` turns.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and int(np.max(np.abs(idx))) >= (1 << 60):
        raise ValidationError("lattice indices must satisfy |idx| < 2**60")
    limbs, _ = _fraction_limbs(n, scale_bits)
    f0, f1, f2, f3 = (np.int64(x) for x in limbs)

    neg = (idx < 0) ^ (int(n) < 0)
    a = np.abs(idx)
    a0 = a & _M30
    a1 = (a >> 30) & _M30

    # (a1*2**30 + a0) * (f3..f0) mod 2**120, 30-bit limbs, int64-safe:
    # every partial product is < 2**60 and every sum of two fits in 2**61.
    r0 = a0 * f0
    r1 = a0 * f1 + a1 * f0
    r2 = a0 * f2 + a1 * f1
    r3 = a0 * f3 + a1 * f2

    c = r0 >> 30
    r0 &= _M30
    r1 += c
    c = r1 >> 30
    r1 &= _M30
    r2 += c
    c = r2 >> 30
    r2 &= _M30
    r3 = (r3 + c) & _M30

    inv30 = 2.0 ** -30
    frac = ((r0 * inv30 + r1) * inv30 + r2) * inv30
    frac = (frac + r3) * inv30
    frac = np.where(neg & (frac > 0.0), 1.0 - frac, frac)
    # Guard against frac == 1.0 after rounding.
    return np.where(frac >= 1.0, 0.0, frac)


def lattice_fraction_error(scale_bits: int, max_abs_idx: int) -> float:
    """Certified bound, in turns, on lattice_fraction's output error."""
    trunc = 0.0 if scale_bits <= 120 else max_abs_idx * 2.0 ** -120
    return trunc + 8.0 * 2.0 ** -53


def lattice_times(idx: np.ndarray) -> np.ndarray:
    """Times 2*pi*idx/2**60 for indices on the canonical time lattice."""
    return np.asarray(idx, dtype=np.float64) * (TWO_PI / 2.0 ** TIME_LATTICE_BITS)


def json_dumps_frequencies(freqs: FrequencySequence) -> str:
    return json.dumps(freqs.to_json(), sort_keys=True)
