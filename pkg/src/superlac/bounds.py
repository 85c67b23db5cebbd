"""Bilateral analytic bounds on the modulus of continuity.

For f(t) = sum c(k) exp(i t n(k)) with absolutely summable coefficients:

* upper bound: for any cut N,  omega(delta) <= delta * Sigma1(N) + Sigma2(N),
  where Sigma1 collects |n(k)| factors over |k| <= N (mean-value bound on
  each kept term) and Sigma2 = 2 * tail sum of |c(k)| (dropped terms).
  ``upper_bound`` minimises over N by exhaustive scan.
* lower bound: each coefficient forces oscillation at scale pi/|n(k)|,
  giving omega(pi/n(|k|)) >= constant * |c(k)|.

Two Sigma1 variants are kept side by side and never merged: ``tight``
sums |c(k)|*|n(k)| term by term; ``literal`` uses the looser product
||c||_l1 * sum |k|*|n(k)|.  Similarly the coefficient lower bound ships
with the ``classical`` constant 2 (sharp for a single exponential) and
a ``literal`` constant 4*pi that is documented as inconsistent with the
single-frequency case (exp(it) has omega(pi) = 2 < 4*pi); ``classical``
is the default, ``literal`` is always reported next to it.

The module also provides the two decay envelope shapes these series
obey, C*|log delta|^p and C*(log|log delta|)^p, and constrained
constant fitting against empirical or analytic curves.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .modulus import ModulusCurve, Provenance
from .series import CoefficientSequence, SeriesSpec

__all__ = [
    "SIGMA1_VARIANTS",
    "sigma1",
    "sigma2",
    "BoundEvaluation",
    "upper_bound",
    "upper_bound_curve",
    "bounds_to_curve",
    "bounds_to_csv",
    "CoefficientBound",
    "coefficient_lower_bound",
    "Envelope",
    "envelope",
    "envelope_curve",
    "FittedConstant",
    "fit_envelope",
]

SIGMA1_VARIANTS = ("tight", "literal")
LOWER_VARIANTS = ("classical", "literal")

# Reference cut for certified l1-norm bounds of unbounded-support
# coefficient sequences.
_L1_REF_CUT = 512


def _l1_norm_upper(coeffs: CoefficientSequence) -> float:
    """Certified upper bound on the full l1 norm of the coefficients."""
    return coeffs.abs_partial(_L1_REF_CUT) + coeffs.tail_bound(_L1_REF_CUT)


def _check_variant(variant: str) -> str:
    if variant not in SIGMA1_VARIANTS:
        raise ValidationError(f"variant must be one of {SIGMA1_VARIANTS}, got {variant!r}")
    return variant


def sigma1(spec: SeriesSpec, n: int, variant: str = "tight") -> float:
    """Frequency-weighted coefficient sum over |k| <= n.

    tight:   sum |c(k)| * |n(k)|        (per-term mean-value bound)
    literal: ||c||_l1 * sum |k| * |n(k)| (grouped form; always >= tight)

    Both sums run over the coefficient support; |n(k)| overflowing
    binary64 gives +inf, which the N-scan in ``upper_bound`` handles.
    """
    _check_variant(variant)
    if n < 2:
        raise ValidationError(f"cut must be >= 2, got {n}")
    total = 0.0
    for k in spec.coefficients.support_indices(n):
        mag = spec.frequencies.magnitude(k)
        if variant == "tight":
            total += abs(spec.coefficients.value(k)) * mag
        else:
            total += abs(k) * mag
    if variant == "literal":
        total *= _l1_norm_upper(spec.coefficients)
    return total


def sigma2(coeffs: CoefficientSequence, n: int) -> float:
    """2 * certified bound on the dropped-tail coefficient sum beyond |k| = n."""
    if n < 2:
        raise ValidationError(f"cut must be >= 2, got {n}")
    return 2.0 * coeffs.tail_bound(n)


@dataclass(frozen=True)
class BoundEvaluation:
    """delta * Sigma1(N*) + Sigma2(N*), minimised over N in [2, n_max]."""

    delta: float
    n_star: int
    sigma1: float
    sigma2: float
    total: float
    variant: str
    n_range: tuple[int, int]

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "N_star": self.n_star,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "total": self.total,
            "variant": self.variant,
            "n_range": list(self.n_range),
        }


def _sigma_tables(spec: SeriesSpec, n_max: int, variant: str) -> tuple[np.ndarray, np.ndarray]:
    """sigma1 and sigma2 for every N in [2, n_max], computed incrementally."""
    coeffs = spec.coefficients
    scale = _l1_norm_upper(coeffs) if variant == "literal" else 1.0
    per_abs = np.zeros(n_max + 1)
    for k in coeffs.support_indices(n_max):
        mag = spec.frequencies.magnitude(k)
        term = (abs(k) * mag) if variant == "literal" else (abs(coeffs.value(k)) * mag)
        per_abs[abs(k)] += term
    s1 = np.cumsum(per_abs)[2:] * scale
    s2 = np.array([sigma2(coeffs, n) for n in range(2, n_max + 1)])
    return s1, s2


def upper_bound(spec: SeriesSpec, delta: float, n_max: int = 60,
                variant: str = "tight") -> BoundEvaluation:
    """Best cut for one delta; exhaustive scan over N in [2, n_max].

    delta = 0 is allowed and returns Sigma2(n_max), the infimum over the
    scanned range (the true infimum is the limit 0 as n_max grows).
    """
    _check_variant(variant)
    if not (0.0 <= delta < 2.0 * math.pi):
        raise ValidationError(f"delta must lie in [0, 2*pi), got {delta}")
    if n_max < 2:
        raise ValidationError(f"n_max must be >= 2, got {n_max}")
    s1, s2 = _sigma_tables(spec, n_max, variant)
    if delta == 0.0:
        n_star = n_max
        idx = n_max - 2
        total = float(s2[idx])
    else:
        totals = delta * s1 + s2
        idx = int(np.argmin(totals))  # ties resolve to the smallest N
        n_star = idx + 2
        total = float(totals[idx])
    return BoundEvaluation(
        delta=float(delta),
        n_star=n_star,
        sigma1=float(s1[idx]),
        sigma2=float(s2[idx]),
        total=total,
        variant=variant,
        n_range=(2, n_max),
    )


def upper_bound_curve(spec: SeriesSpec, deltas: Sequence[float], n_max: int = 60,
                      variant: str = "tight") -> list[BoundEvaluation]:
    """upper_bound across a delta ladder with the sigma tables built once."""
    _check_variant(variant)
    if n_max < 2:
        raise ValidationError(f"n_max must be >= 2, got {n_max}")
    s1, s2 = _sigma_tables(spec, n_max, variant)
    out = []
    for delta in deltas:
        delta = float(delta)
        if not (0.0 <= delta < 2.0 * math.pi):
            raise ValidationError(f"delta must lie in [0, 2*pi), got {delta}")
        if delta == 0.0:
            idx = n_max - 2
            total = float(s2[idx])
        else:
            totals = delta * s1 + s2
            idx = int(np.argmin(totals))
            total = float(totals[idx])
        out.append(BoundEvaluation(delta, idx + 2, float(s1[idx]), float(s2[idx]),
                                   total, variant, (2, n_max)))
    return out


def bounds_to_curve(evals: Sequence[BoundEvaluation]) -> ModulusCurve:
    """Repackage a bound table as an analytic-upper modulus curve."""
    if not evals:
        raise ValidationError("empty bound table")
    variants = {e.variant for e in evals}
    n_ranges = {e.n_range for e in evals}
    if len(variants) > 1 or len(n_ranges) > 1:
        raise ValidationError("bound table mixes variants or N ranges")
    return ModulusCurve(
        deltas=tuple(e.delta for e in evals),
        omegas=tuple(e.total for e in evals),
        provenance=Provenance.ANALYTIC_UPPER,
        params={"variant": evals[0].variant, "n_max": evals[0].n_range[1]},
    )


def bounds_to_csv(evals: Sequence[BoundEvaluation]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "N_star", "sigma1", "sigma2", "total", "variant"])
    for e in evals:
        w.writerow([f"{e.delta:.17g}", e.n_star, repr(e.sigma1), repr(e.sigma2),
                    repr(e.total), e.variant])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# coefficient-driven lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientBound:
    """A lower bound omega(pi/|n(k)|) >= omega_lb forced by coefficient k.

    Both constants are always carried: ``classical`` = 2|c(k)| (sharp on a
    single exponential), ``literal`` = 4*pi*|c(k)| (documented variant that
    the single-exponential case contradicts).
    """

    k: int
    delta: float
    omega_lb: float
    variant: str
    classical: float
    literal: float

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "delta": self.delta,
            "omega_lb": self.omega_lb,
            "variant": self.variant,
            "classical": self.classical,
            "literal": self.literal,
        }


def coefficient_lower_bound(spec: SeriesSpec, k: int,
                            variant: str = "classical") -> CoefficientBound:
    """Lower bound on the modulus at delta = pi/|n(|k|)| from coefficient k."""
    if variant not in LOWER_VARIANTS:
        raise ValidationError(f"variant must be one of {LOWER_VARIANTS}, got {variant!r}")
    if k == 0:
        raise ValidationError("k must be nonzero")
    mag = spec.frequencies.magnitude(abs(k))
    if mag == 0.0:
        raise ValidationError(f"frequency at |k|={abs(k)} is zero; no oscillation scale")
    delta = math.pi / mag  # 0.0 when |n| overflows binary64: scale below resolution
    c = abs(spec.coefficients.value(k))
    classical = 2.0 * c
    literal = 4.0 * math.pi * c
    return CoefficientBound(
        k=k,
        delta=delta,
        omega_lb=classical if variant == "classical" else literal,
        variant=variant,
        classical=classical,
        literal=literal,
    )


# ---------------------------------------------------------------------------
# decay envelopes
# ---------------------------------------------------------------------------

_SHAPES = ("log", "loglog")
_SIDES = ("lower", "upper")

#: Conventional names for the four fitted constants, by (shape, side).
_SYMBOLS = {
    ("log", "lower"): "C1",
    ("log", "upper"): "C2",
    ("loglog", "lower"): "C3",
    ("loglog", "upper"): "C4",
}


@dataclass(frozen=True)
class Envelope:
    """Decay envelope C * B(delta)**exponent with B = |log| or log|log|.

    shape "log" uses B(delta) = |ln delta| on delta < 1/e; shape
    "loglog" uses B(delta) = ln|ln delta| on delta < e**-e.  The side
    fixes the exponent: -2*decay for "lower", 1 - 2*decay for "upper";
    both are negative once decay > 1/2, so the envelope vanishes as
    delta -> 0 and, like any modulus, is nondecreasing in delta.

    Calls outside the validity domain raise unless ``clamp`` is set, in
    which case the value is capped at the domain-edge value C (useful
    when an integrator probes past the edge).
    """

    shape: str
    side: str
    decay: float
    constant: float = 1.0
    clamp: bool = False

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValidationError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        if self.side not in _SIDES:
            raise ValidationError(f"side must be one of {_SIDES}, got {self.side!r}")
        if not (self.decay > 0.5):
            raise ValidationError(f"decay must exceed 1/2, got {self.decay}")
        if not (self.constant > 0.0):
            raise ValidationError(f"constant must be positive, got {self.constant}")

    @property
    def exponent(self) -> float:
        return -2.0 * self.decay if self.side == "lower" else 1.0 - 2.0 * self.decay

    @property
    def domain_max(self) -> float:
        return math.exp(-1.0) if self.shape == "log" else math.exp(-math.e)

    @property
    def symbol(self) -> str:
        return _SYMBOLS[(self.shape, self.side)]

    @property
    def _edge_neglog(self) -> float:
        # -ln(domain_max): 1 for the log shape, e for loglog.
        return 1.0 if self.shape == "log" else math.e

    def __call__(self, delta):
        arr = np.asarray(delta, dtype=np.float64)
        if np.any(~(arr > 0.0)):
            raise ValidationError("delta must be positive")
        if not self.clamp and np.any(arr >= self.domain_max):
            raise ValidationError(
                f"delta >= {self.domain_max:.6g} is outside the {self.shape} "
                "envelope's validity domain (pass clamp=True to cap)"
            )
        arr = np.minimum(arr, math.nextafter(self.domain_max, 0.0))
        base = -np.log(arr)
        if self.shape == "loglog":
            base = np.log(base)
        out = self.constant * base ** self.exponent
        return float(out) if np.ndim(delta) == 0 else out

    def value_at_neglog(self, u: float) -> float:
        """The envelope at delta = exp(-u), taking u = -ln(delta) directly.

        Equivalent to calling with exp(-u) but immune to underflow of
        the delta representation, which matters for integrands probing
        delta as small as exp(-x**2/2) with large x.
        """
        u = float(u)
        if not math.isfinite(u):
            raise ValidationError(f"u must be finite, got {u!r}")
        if u <= self._edge_neglog:
            if not self.clamp:
                raise ValidationError(
                    f"u = {u:g} <= {self._edge_neglog:g} is outside the "
                    f"{self.shape} envelope's validity domain"
                )
            return self.constant
        base = u if self.shape == "log" else math.log(u)
        return self.constant * base ** self.exponent

    def to_json(self) -> dict:
        return {
            "shape": self.shape,
            "side": self.side,
            "decay": self.decay,
            "constant": self.constant,
            "exponent": self.exponent,
            "domain_max": self.domain_max,
        }


def envelope(shape: str, side: str, decay: float, constant: float = 1.0,
             clamp: bool = False) -> Envelope:
    """Construct the closed-form envelope evaluator (see Envelope)."""
    return Envelope(shape=shape, side=side, decay=decay, constant=constant, clamp=clamp)


def envelope_curve(env: Envelope, deltas: Sequence[float]) -> ModulusCurve:
    """Materialise an envelope on a ladder as a ModulusCurve."""
    deltas = tuple(float(d) for d in deltas)
    omegas = tuple(float(env(d)) for d in deltas)
    return ModulusCurve(deltas, omegas, Provenance.ENVELOPE, params=env.to_json())


@dataclass(frozen=True)
class FittedConstant:
    """A fitted envelope constant with its residual left in plain sight."""

    constant: float
    exponent: float
    fit_range: tuple[float, float]
    residual: float
    symbol: str
    shape: str
    side: str
    points: int

    def to_json(self) -> dict:
        return {
            "constant": self.constant,
            "exponent": self.exponent,
            "fit_range": list(self.fit_range),
            "residual": self.residual,
            "symbol": self.symbol,
            "shape": self.shape,
            "side": self.side,
            "points": self.points,
        }


def fit_envelope(curve: ModulusCurve, shape: str, side: str, decay: float,
                 fit_range: tuple[float, float]) -> FittedConstant:
    """Fit the envelope constant one-sidedly against a modulus curve.

    Lower side: largest C with C*shape <= curve on the fit range (so the
    envelope stays an admissible lower bound); upper side: smallest C
    with C*shape >= curve.  The residual is the max relative deviation
    |1 - C*shape/omega| over the used points: a residual near 0 means
    the curve actually follows the envelope shape, a large one means
    only the one-sided inequality holds.
    """
    lo, hi = float(fit_range[0]), float(fit_range[1])
    if not (0.0 < lo < hi):
        raise ValidationError("fit_range must satisfy 0 < lo < hi")
    env1 = Envelope(shape=shape, side=side, decay=decay, constant=1.0)
    pts = [(d, w) for d, w in zip(curve.deltas, curve.omegas)
           if lo <= d <= hi and d < env1.domain_max]
    if len(pts) < 10:
        raise ValidationError(
            f"fit range [{lo:g}, {hi:g}] covers only {len(pts)} usable points; need >= 10"
        )
    if any(w <= 0.0 for _, w in pts):
        raise ValidationError("curve vanishes inside the fit range; constant undefined")
    ratios = [w / env1(d) for d, w in pts]
    c = min(ratios) if side == "lower" else max(ratios)
    if not (c > 0.0 and math.isfinite(c)):
        raise ValidationError(f"degenerate fit: constant {c!r}")
    residual = max(abs(1.0 - c * env1(d) / w) for d, w in pts)
    return FittedConstant(
        constant=c,
        exponent=env1.exponent,
        fit_range=(lo, hi),
        residual=residual,
        symbol=env1.symbol,
        shape=shape,
        side=side,
        points=len(pts),
    )
