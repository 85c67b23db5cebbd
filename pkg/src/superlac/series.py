"""Truncated trigonometric series with certified truncation and rounding bounds.

A series here is f(t) = sum over nonzero k of c(k) * exp(i * t * n(k)),
described by a coefficient sequence c and a frequency sequence n.  Three
evaluation routes are provided:

* ``eval_truncated``: one arbitrary time, certified error bound, via
  scalar argument reduction;
* ``sample_grid``: all m grid points t_j = 2*pi*j/m at once, using exact
  residues into a table of m-th roots of unity (no reduction error at
  all, only rounding);
* ``fourier_coefficient``: reading a coefficient back off a sampled
  grid, with aliasing flagged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import UndefinedIndexError, ValidationError
from .frequencies import (
    FrequencySequence,
    GeometricFrequencies,
    DoubleExponentialFrequencies,
    TurnFraction,
    frequencies_from_json,
    reduce_phase,
    residue_collisions,
)

__all__ = [
    "CoefficientSequence",
    "PowerLawCoefficients",
    "ExplicitCoefficients",
    "coefficients_from_json",
    "SeriesSpec",
    "lacunar_series",
    "superlacunar_series",
    "EvaluatedValue",
    "eval_truncated",
    "GridFunction",
    "sample_grid",
    "CoefficientEstimate",
    "fourier_coefficient",
]

_EPS = np.finfo(np.float64).eps

# Number of terms summed exactly before switching to the integral bound
# in power-law tail estimates.
_TAIL_HEAD_TERMS = 512


class CoefficientSequence:
    """Complex coefficients indexed by nonzero integers, absolutely summable.

    Subclasses supply ``value(k)`` and a certified ``tail_bound(N)`` with
    sum over |k| > N of |c(k)| <= tail_bound(N).  ``support_indices(N)``
    iterates the indices with |k| <= N that can carry a nonzero
    coefficient, in a fixed deterministic order (1, -1, 2, -2, ...).
    """

    label: str = "abstract"

    def value(self, k: int) -> complex:
        raise NotImplementedError

    def defined(self, k: int) -> bool:
        raise NotImplementedError

    def tail_bound(self, n: int) -> float:
        raise NotImplementedError

    def support_indices(self, n: int) -> Iterator[int]:
        if n < 0:
            raise ValidationError(f"truncation must be >= 0, got {n}")
        for a in range(1, n + 1):
            if self.defined(a):
                yield a
            if self.defined(-a):
                yield -a

    def abs_partial(self, n: int) -> float:
        """sum over |k| <= n of |c(k)| (exactly the summed support)."""
        return float(sum(abs(self.value(k)) for k in self.support_indices(n)))

    def to_json(self) -> dict:
        raise NotImplementedError


def _power_tail(exponent: float, n: int) -> float:
    """Certified upper bound on sum_{k > n} k**-exponent, one side."""
    head = sum((n + j) ** -exponent for j in range(1, _TAIL_HEAD_TERMS + 1))
    m = n + _TAIL_HEAD_TERMS
    # integral comparison: sum_{k > m} k^-e <= m^(1-e)/(e-1)
    tail = m ** (1.0 - exponent) / (exponent - 1.0)
    return head + tail


@dataclass(frozen=True)
class PowerLawCoefficients(CoefficientSequence):
    """c(k) = |k|**-exponent on the chosen side(s); exponent > 1."""

    exponent: float
    sides: str = "positive"  # "positive" or "symmetric"

    def __post_init__(self):
        if not (self.exponent > 1.0):
            raise ValidationError(
                f"power-law exponent must exceed 1 for summability, got {self.exponent}"
            )
        if self.sides not in ("positive", "symmetric"):
            raise ValidationError(f"sides must be 'positive' or 'symmetric', got {self.sides!r}")

    @property
    def label(self) -> str:
        return f"power_law(exponent={self.exponent}, sides={self.sides})"

    def defined(self, k: int) -> bool:
        if k == 0:
            return False
        return k > 0 or self.sides == "symmetric"

    def value(self, k: int) -> complex:
        if not self.defined(k):
            return 0.0 + 0.0j
        return complex(abs(k) ** -self.exponent)

    def tail_bound(self, n: int) -> float:
        if n < 0:
            raise ValidationError(f"truncation must be >= 0, got {n}")
        t = _power_tail(self.exponent, max(n, 1)) if n >= 1 else 1.0 + _power_tail(self.exponent, 1)
        return 2.0 * t if self.sides == "symmetric" else t

    def to_json(self) -> dict:
        return {"family": "power_law", "exponent": self.exponent, "sides": self.sides}


class ExplicitCoefficients(CoefficientSequence):
    """A finite table of coefficients; everything outside it is zero."""

    def __init__(self, values: dict[int, complex], label: str = "explicit"):
        vals = {}
        for k, c in values.items():
            k = int(k)
            if k == 0:
                raise ValidationError("index 0 is not part of the domain")
            c = complex(c)
            if c != 0:
                vals[k] = c
        if not vals:
            raise ValidationError("explicit coefficient table has no nonzero entries")
        self._values = vals
        self._max_abs_index = max(abs(k) for k in vals)
        self.label = label

    def defined(self, k: int) -> bool:
        return k in self._values

    def value(self, k: int) -> complex:
        return self._values.get(k, 0.0 + 0.0j)

    def tail_bound(self, n: int) -> float:
        if n < 0:
            raise ValidationError(f"truncation must be >= 0, got {n}")
        return float(sum(abs(c) for k, c in self._values.items() if abs(k) > n))

    @property
    def max_abs_index(self) -> int:
        return self._max_abs_index

    def to_json(self) -> dict:
        items = sorted(self._values.items())
        return {
            "family": "explicit",
            "values": [[k, c.real, c.imag] for k, c in items],
            "label": self.label,
        }


def coefficients_from_json(obj: dict) -> CoefficientSequence:
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValidationError(f"coefficient object needs a 'family' key, got {obj!r}")
    fam = obj["family"]
    if fam == "power_law":
        return PowerLawCoefficients(exponent=float(obj["exponent"]),
                                    sides=str(obj.get("sides", "positive")))
    if fam == "explicit":
        try:
            vals = {int(k): complex(re, im) for k, re, im in obj["values"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed explicit coefficient table: {exc}") from exc
        return ExplicitCoefficients(vals, label=str(obj.get("label", "explicit")))
    raise ValidationError(f"unknown coefficient family {fam!r}")


# ---------------------------------------------------------------------------
# series specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesSpec:
    """A series f(t) = sum c(k) exp(i t n(k)) with a default truncation."""

    frequencies: FrequencySequence
    coefficients: CoefficientSequence
    truncation: int
    label: str = ""

    def __post_init__(self):
        if self.truncation < 1:
            raise ValidationError(f"truncation must be >= 1, got {self.truncation}")
        for k in self.coefficients.support_indices(self.truncation):
            if not self.frequencies.defined(k):
                raise UndefinedIndexError(
                    f"coefficient support includes k={k} but "
                    f"{self.frequencies.label} is undefined there"
                )

    def support(self, truncation: int | None = None) -> list[int]:
        n = self.truncation if truncation is None else truncation
        return list(self.coefficients.support_indices(n))

    def to_json(self) -> dict:
        return {
            "frequencies": self.frequencies.to_json(),
            "coefficients": self.coefficients.to_json(),
            "truncation": self.truncation,
            "label": self.label,
        }

    @staticmethod
    def from_json(obj: dict) -> "SeriesSpec":
        try:
            return SeriesSpec(
                frequencies=frequencies_from_json(obj["frequencies"]),
                coefficients=coefficients_from_json(obj["coefficients"]),
                truncation=int(obj["truncation"]),
                label=str(obj.get("label", "")),
            )
        except KeyError as exc:
            raise ValidationError(f"series object is missing key {exc}") from exc


def lacunar_series(decay: float, *, base: int = 2, truncation: int = 20,
                   label: str | None = None) -> SeriesSpec:
    """One-sided series with c(k) = k**(-2*decay) and n(k) = base**k.

    Hadamard-gap model case: bounded gap ratio, modulus of continuity
    comparable to a power of 1/|log delta| for decay in (1/2, 1].
    """
    if not (decay > 0.5):
        raise ValidationError(f"decay must exceed 1/2, got {decay}")
    return SeriesSpec(
        frequencies=GeometricFrequencies(base=base, two_sided=False),
        coefficients=PowerLawCoefficients(exponent=2.0 * decay, sides="positive"),
        truncation=truncation,
        label=label or f"lacunar(decay={decay}, base={base})",
    )


def superlacunar_series(decay: float, *, truncation: int = 8,
                        label: str | None = None) -> SeriesSpec:
    """One-sided series with c(k) = k**(-2*decay) and n(k) = 2**(2**k).

    The gap ratio n(k+1)/n(k) = n(k) diverges, which slows the modulus
    of continuity down to powers of 1/log(1/|log delta|).
    """
    if not (decay > 0.5):
        raise ValidationError(f"decay must exceed 1/2, got {decay}")
    return SeriesSpec(
        frequencies=DoubleExponentialFrequencies(two_sided=True),
        coefficients=PowerLawCoefficients(exponent=2.0 * decay, sides="positive"),
        truncation=truncation,
        label=label or f"superlacunar(decay={decay})",
    )


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluatedValue:
    """A truncated-series value with a certified absolute error bound.

    error_bound covers the dropped tail sum_{|k|>N} |c(k)|, the certified
    phase-reduction error and binary64 rounding; it does not include any
    modelling gap between the truncated and the ideal series beyond the
    tail term.
    """

    value: complex
    error_bound: float
    truncation: int

    @property
    def real(self) -> float:
        return self.value.real


def eval_truncated(spec: SeriesSpec, t: float | TurnFraction,
                   truncation: int | None = None) -> EvaluatedValue:
    """Evaluate the truncated series at one time with a certified bound."""
    n_trunc = spec.truncation if truncation is None else truncation
    if n_trunc < 1:
        raise ValidationError(f"truncation must be >= 1, got {n_trunc}")
    total = 0.0 + 0.0j
    abs_sum = 0.0
    max_phase_err = 0.0
    terms = 0
    for k in spec.coefficients.support_indices(n_trunc):
        c = spec.coefficients.value(k)
        ph = reduce_phase(spec.frequencies.value(k), t)
        total += c * ph.exp()
        abs_sum += abs(c)
        max_phase_err = max(max_phase_err, ph.error_bound)
        terms += 1
    tail = spec.coefficients.tail_bound(n_trunc)
    rounding = 4.0 * _EPS * (terms + 2) * abs_sum
    return EvaluatedValue(
        value=total,
        error_bound=tail + abs_sum * max_phase_err + rounding,
        truncation=n_trunc,
    )


# ---------------------------------------------------------------------------
# grid sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    """Samples f(2*pi*j/m), j = 0..m-1, of a truncated series.

    values[j] carries the truncated sum exactly up to rounding; the
    dropped tail is bounded by ``trunc_bound`` uniformly in j.
    ``collisions`` lists index groups whose frequencies were aliased by
    the grid (empty means the sample is alias-free).
    """

    m: int
    values: np.ndarray
    truncation: int
    trunc_bound: float
    label: str = ""
    collisions: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError(f"grid size must be >= 2, got {self.m}")
        if len(self.values) != self.m:
            raise ValidationError("values length must equal m")

    def times(self) -> np.ndarray:
        return np.arange(self.m) * (2.0 * math.pi / self.m)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0.0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "t", "re", "im"])
        step = 2.0 * math.pi / self.m
        for j in range(self.m):
            w.writerow([j, f"{j * step:.17g}",
                        repr(float(self.values[j].real)),
                        repr(float(self.values[j].imag))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "truncation": self.truncation,
            "trunc_bound": self.trunc_bound,
            "label": self.label,
            "collisions": [list(g) for g in self.collisions],
            "re": [float(v) for v in self.values.real],
            "im": [float(v) for v in self.values.imag],
        }


def _roots_of_unity(m: int) -> np.ndarray:
    return np.exp((2j * math.pi / m) * np.arange(m))


def sample_grid(spec: SeriesSpec, m: int, truncation: int | None = None,
                *, warn: bool = True) -> GridFunction:
    """Sample the truncated series on the uniform m-point grid.

    Phases are exact residues (n(k) * j) mod m into a single table of
    m-th roots of unity, so arbitrarily large frequencies cost one
    modular exponentiation each.  Cost O(m * #support).
    """
    if m < 2:
        raise ValidationError(f"grid size must be >= 2, got {m}")
    if m > (1 << 31):
        raise ValidationError(f"grid size {m} too large (limit 2**31)")
    n_trunc = spec.truncation if truncation is None else truncation
    support = spec.support(n_trunc)
    groups = residue_collisions(spec.frequencies, support, m, warn=warn)
    roots = _roots_of_unity(m)
    j = np.arange(m, dtype=np.int64)
    vals = np.zeros(m, dtype=np.complex128)
    for k in support:
        c = spec.coefficients.value(k)
        r = spec.frequencies.residue(k, m)
        vals += c * roots[(r * j) % m]
    return GridFunction(
        m=m,
        values=vals,
        truncation=n_trunc,
        trunc_bound=spec.coefficients.tail_bound(n_trunc),
        label=spec.label,
        collisions=tuple(groups),
    )


@dataclass(frozen=True)
class CoefficientEstimate:
    """A Fourier coefficient read off a sampled grid.

    ``aliased`` is True when the grid had residue collisions, in which
    case the estimate mixes the colliding terms and cannot be trusted.
    """

    value: complex
    frequency_residue: int
    aliased: bool


def fourier_coefficient(grid: GridFunction, n: int) -> CoefficientEstimate:
    """Average f(t_j) * exp(-i t_j n) over the grid.

    For an alias-free grid this returns (up to rounding and the
    truncation tail) the coefficient attached to frequency n, or 0 if no
    sampled term has that residue mod m.
    """
    m = grid.m
    r = int(n) % m
    j = np.arange(m, dtype=np.int64)
    conj_roots = np.conj(_roots_of_unity(m))
    est = complex(np.mean(grid.values * conj_roots[(r * j) % m]))
    return CoefficientEstimate(value=est, frequency_residue=r,
                               aliased=bool(grid.collisions))
