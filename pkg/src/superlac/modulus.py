"""Empirical modulus-of-continuity estimators.

The modulus of continuity of f at scale delta is

    omega(delta) = sup_t sup_{|h| <= delta} |f(t + h) - f(t)|.

Two estimators are provided, both lower estimates of the truncated
series' modulus:

* ``empirical_modulus_grid``: restricts t and t+h to a uniform m-point
  grid.  Exhaustive over the grid, resolution-limited (only shifts that
  are multiples of 2*pi/m are seen).
* ``empirical_modulus_pairs``: draws random (t, h) pairs from dyadic
  lattices fine enough to resolve any delta, with phases computed by
  exact fixed-point arithmetic.  Not resolution-limited, but a sampled
  supremum.

Grid estimates are exhaustive per window, hence nondecreasing in delta;
pair estimates are independent samples per delta and need not be
monotone (``monotone_envelope`` repairs that when a monotone curve is
required downstream).
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .frequencies import TWO_PI, lattice_fraction, lattice_fraction_error
from .series import GridFunction, SeriesSpec

__all__ = [
    "Provenance",
    "ModulusCurve",
    "modulus_curve_from_json",
    "empirical_modulus_grid",
    "empirical_modulus_pairs",
    "monotone_envelope",
    "log_delta_ladder",
    "loglog_delta_ladder",
    "window_size",
]

_EPS = np.finfo(np.float64).eps


class Provenance(str, Enum):
    EMPIRICAL_GRID = "empirical_grid"
    EMPIRICAL_PAIRS = "empirical_random_pair"
    ANALYTIC_LOWER = "analytic_lower"
    ANALYTIC_UPPER = "analytic_upper"
    ENVELOPE = "envelope"


# Provenances whose curves are exhaustive-per-window and therefore
# must be nondecreasing in delta.
_MONOTONE_PROVENANCE = {Provenance.EMPIRICAL_GRID}


@dataclass(frozen=True)
class ModulusCurve:
    """Modulus values omega(delta) on a strictly increasing delta ladder."""

    deltas: tuple[float, ...]
    omegas: tuple[float, ...]
    provenance: Provenance
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.deltas
        w = self.omegas
        if len(d) == 0 or len(d) != len(w):
            raise ValidationError("curve needs matching nonempty delta/omega sequences")
        if any(not (x > 0.0) or not math.isfinite(x) for x in d):
            raise ValidationError("deltas must be positive and finite")
        if any(d[i] >= d[i + 1] for i in range(len(d) - 1)):
            raise ValidationError("deltas must be strictly increasing")
        if any((not v >= 0.0) or math.isnan(v) for v in w):
            raise ValidationError("omega values must be >= 0")
        if self.provenance in _MONOTONE_PROVENANCE:
            if any(w[i] > w[i + 1] for i in range(len(w) - 1)):
                raise ValidationError(
                    f"{self.provenance.value} curves must be nondecreasing in delta"
                )

    def __len__(self) -> int:
        return len(self.deltas)

    def omega_at(self, delta: float) -> float:
        """Value at an exact ladder point (no interpolation)."""
        for d, w in zip(self.deltas, self.omegas):
            if d == delta:
                return w
        raise KeyError(f"delta {delta!r} is not a ladder point")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["delta", "omega", "provenance"])
        for d, om in zip(self.deltas, self.omegas):
            w.writerow([f"{d:.17g}", repr(float(om)), self.provenance.value])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "deltas": [float(d) for d in self.deltas],
            "omegas": [float(w) for w in self.omegas],
            "provenance": self.provenance.value,
            "params": self.params,
        }


def modulus_curve_from_json(obj: dict) -> ModulusCurve:
    try:
        return ModulusCurve(
            deltas=tuple(float(x) for x in obj["deltas"]),
            omegas=tuple(float(x) for x in obj["omegas"]),
            provenance=Provenance(obj["provenance"]),
            params=dict(obj.get("params", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed modulus-curve object: {exc}") from exc


# ---------------------------------------------------------------------------
# delta ladders
# ---------------------------------------------------------------------------


def log_delta_ladder(delta_min: float, delta_max: float, per_decade: int = 40) -> np.ndarray:
    """Log-spaced deltas, ascending, `per_decade` points per factor of 10."""
    if not (0.0 < delta_min < delta_max <= TWO_PI):
        raise ValidationError("need 0 < delta_min < delta_max <= 2*pi")
    if per_decade < 1:
        raise ValidationError("per_decade must be >= 1")
    decades = math.log10(delta_max / delta_min)
    n = max(2, int(math.ceil(decades * per_decade)) + 1)
    grid = np.logspace(math.log10(delta_min), math.log10(delta_max), n)
    grid[0], grid[-1] = delta_min, delta_max
    return np.unique(grid)


def loglog_delta_ladder(u_min: float, u_max: float, count: int) -> np.ndarray:
    """Deltas exp(-exp(u)) for u equally spaced in [u_min, u_max], ascending.

    Equal steps in u = log log (1/delta) are the natural ladder when the
    modulus is expected to behave like a power of 1/log log (1/delta).
    """
    if not (u_min < u_max):
        raise ValidationError("need u_min < u_max")
    if count < 2:
        raise ValidationError("count must be >= 2")
    u = np.linspace(u_min, u_max, count)
    deltas = np.exp(-np.exp(u))[::-1]
    return np.unique(deltas)


# ---------------------------------------------------------------------------
# grid estimator
# ---------------------------------------------------------------------------


def window_size(delta: float, m: int) -> int:
    """Largest d with 2*pi*d/m <= delta, capped at m//2.

    A few ulps of inclusive slack keep deltas that are intended to be
    exact grid multiples from losing their boundary shift to rounding.
    """
    if not (delta > 0.0):
        raise ValidationError(f"delta must be positive, got {delta}")
    thr = delta * m / TWO_PI
    w = int(math.floor(thr))
    if (w + 1) <= thr * (1.0 + 8.0 * _EPS):
        w += 1
    return min(w, m // 2)


def _window_extremes_diff(ext: np.ndarray, m: int, w: int) -> float:
    """max over windows [j, j+w], j < m, of (window max - window min).

    Classic pair of monotone deques; O(m + w) comparisons.  ``ext`` is
    the real sample array extended by its first w entries (circular).
    """
    maxq: deque[int] = deque()
    minq: deque[int] = deque()
    best = 0.0
    for i in range(m + w):
        x = ext[i]
        while maxq and ext[maxq[-1]] <= x:
            maxq.pop()
        maxq.append(i)
        while minq and ext[minq[-1]] >= x:
            minq.pop()
        minq.append(i)
        start = i - w
        if start >= 0:
            while maxq[0] < start:
                maxq.popleft()
            while minq[0] < start:
                minq.popleft()
            d = ext[maxq[0]] - ext[minq[0]]
            if d > best:
                best = d
    return best


_SCAN_KERNEL = None


def _scan_kernel():
    """JIT-compiled max of squared pair distances over a shift range."""
    global _SCAN_KERNEL
    if _SCAN_KERNEL is None:
        from numba import njit, prange

        @njit(cache=True, parallel=True)
        def scan(re, im, d0, d1):
            m = re.shape[0]
            best = 0.0
            for d in prange(d0, d1):
                local = 0.0
                for j in range(m):
                    j2 = j + d
                    if j2 >= m:
                        j2 -= m
                    dr = re[j2] - re[j]
                    di = im[j2] - im[j]
                    s = dr * dr + di * di
                    local = max(local, s)
                best = max(best, local)
            return best

        _SCAN_KERNEL = scan
    return _SCAN_KERNEL


def empirical_modulus_grid(grid: GridFunction, deltas: Sequence[float]) -> ModulusCurve:
    """Exhaustive modulus estimate restricted to the sampling grid.

    For each delta the window is every shift d with 2*pi*d/m <= delta;
    the estimate is max over j, d <= W of |f_{j+d} - f_j|, so it is a
    lower estimate of the continuum modulus of the truncated series,
    and exact for it whenever the supremum is attained on the grid.

    Real-valued grids use a sliding max/min deque (O(m) per delta);
    complex grids share one incremental scan over shifts, O(m) per new
    shift, so a whole ascending ladder costs O(m * W_max) total.
    """
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValidationError("empty delta ladder")
    if any(deltas[i] >= deltas[i + 1] for i in range(len(deltas) - 1)):
        raise ValidationError("deltas must be strictly increasing")
    if not (0.0 < deltas[0] and deltas[-1] <= TWO_PI):
        raise ValidationError("deltas must lie in (0, 2*pi]")
    m = grid.m
    windows = [window_size(d, m) for d in deltas]
    below = [d for d, w in zip(deltas, windows) if w == 0]

    omegas = []
    if grid.is_real:
        v = np.ascontiguousarray(grid.values.real)
        for w in windows:
            if w == 0:
                omegas.append(0.0)
            else:
                ext = np.concatenate([v, v[:w]])
                omegas.append(_window_extremes_diff(ext, m, w))
        path = "deque"
    else:
        re = np.ascontiguousarray(grid.values.real)
        im = np.ascontiguousarray(grid.values.imag)
        scan = _scan_kernel()
        best_sq = 0.0
        prev_w = 0
        for w in windows:
            if w > prev_w:
                best_sq = max(best_sq, float(scan(re, im, prev_w + 1, w + 1)))
                prev_w = w
            omegas.append(math.sqrt(best_sq))
        path = "scan"

    params = {
        "estimator": "grid",
        "m": m,
        "windows": windows,
        "resolution": TWO_PI / m,
        "path": path,
        "truncation": grid.truncation,
        "trunc_bound": grid.trunc_bound,
    }
    if below:
        params["below_resolution"] = below
    if grid.collisions:
        params["collisions"] = [list(g) for g in grid.collisions]
    return ModulusCurve(tuple(deltas), tuple(omegas), Provenance.EMPIRICAL_GRID, params)


# ---------------------------------------------------------------------------
# random-pair estimator
# ---------------------------------------------------------------------------


def _h_lattice_bits(delta: float) -> int:
    """Scale S such that the largest lattice step below delta has ~59 bits."""
    mant, exp = math.frexp(delta / TWO_PI)  # delta/2pi = mant * 2**exp
    return 60 - exp


def empirical_modulus_pairs(spec: SeriesSpec, deltas: Sequence[float], *,
                            pairs_per_delta: int = 2048, seed: int = 0,
                            truncation: int | None = None) -> ModulusCurve:
    """Sampled modulus estimate from random (t, h) pairs, any delta > 0.

    Times t sit on the canonical 2**60 lattice and offsets h on a
    per-delta lattice fine enough that |h| <= delta has about 2**59
    admissible steps; both endpoint offsets +-h_max are always included.
    Phases come from exact fixed-point reduction (``lattice_fraction``),
    so the estimate is meaningful even when n(k) has thousands of bits.

    Each delta uses an independent, seeded substream: entry i of the
    ladder draws from SeedSequence([seed, i]).  Results are independent
    of worker count and reproducible by construction.
    """
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ValidationError("empty delta ladder")
    if any(deltas[i] >= deltas[i + 1] for i in range(len(deltas) - 1)):
        raise ValidationError("deltas must be strictly increasing")
    if not (0.0 < deltas[0] and deltas[-1] <= TWO_PI):
        raise ValidationError("deltas must lie in (0, 2*pi]")
    if pairs_per_delta < 2:
        raise ValidationError("pairs_per_delta must be >= 2")
    if seed < 0:
        raise ValidationError("seed must be >= 0")

    n_trunc = spec.truncation if truncation is None else truncation
    support = spec.support(n_trunc)
    if not support:
        raise ValidationError("series has empty support at this truncation")
    coef = np.array([spec.coefficients.value(k) for k in support], dtype=np.complex128)
    res60 = [spec.frequencies.residue(k, 1 << 60) for k in support]

    abs_sum = float(np.sum(np.abs(coef)))
    omegas = []
    scales = []
    for i, delta in enumerate(deltas):
        s_bits = _h_lattice_bits(delta)
        scales.append(s_bits)
        b_max = int(math.floor(delta / TWO_PI * math.ldexp(1.0, s_bits) * (1.0 - 4.0 * _EPS)))
        b_max = max(b_max, 1)
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        a = rng.integers(0, 1 << 60, size=pairs_per_delta, dtype=np.int64)
        b = rng.integers(-b_max, b_max + 1, size=pairs_per_delta, dtype=np.int64)
        b[0] = b_max
        if pairs_per_delta > 1:
            b[1] = -b_max

        mod_s = 1 << s_bits
        f_t = np.zeros(pairs_per_delta, dtype=np.complex128)
        f_th = np.zeros(pairs_per_delta, dtype=np.complex128)
        for c, r60, k in zip(coef, res60, support):
            fr_t = lattice_fraction(r60, 60, a)
            fr_h = lattice_fraction(spec.frequencies.residue(k, mod_s), s_bits, b)
            fr_sum = fr_t + fr_h
            fr_sum = np.where(fr_sum >= 1.0, fr_sum - 1.0, fr_sum)
            f_t += c * np.exp((2j * math.pi) * fr_t)
            f_th += c * np.exp((2j * math.pi) * fr_sum)
        omegas.append(float(np.max(np.abs(f_th - f_t))))

    phase_err = TWO_PI * (lattice_fraction_error(60, 1 << 60)
                          + lattice_fraction_error(max(scales), 1 << 60) + 2.0 * _EPS)
    eval_error = 2.0 * abs_sum * (phase_err + 4.0 * _EPS * (len(support) + 2))
    params = {
        "estimator": "pairs",
        "pairs_per_delta": pairs_per_delta,
        "seed": seed,
        "truncation": n_trunc,
        "scale_bits": scales,
        "eval_error": eval_error,
    }
    return ModulusCurve(tuple(deltas), tuple(omegas), Provenance.EMPIRICAL_PAIRS, params)


def monotone_envelope(curve: ModulusCurve) -> ModulusCurve:
    """Smallest nondecreasing majorant of the curve (running maximum).

    Idempotent; keeps provenance and records the repair in params.
    """
    omegas = tuple(np.maximum.accumulate(np.asarray(curve.omegas, dtype=np.float64)).tolist())
    params = dict(curve.params)
    params["monotone_envelope"] = True
    return ModulusCurve(curve.deltas, omegas, curve.provenance, params)
