"""Empirical modulus estimators, delta ladders, and curve containers.

The two estimators are independent routes to the same quantity: the
grid route exhausts every pair on a uniform grid, the pair route
samples random (t, h) with exact fixed-point phases.  Both are checked
against brute force and against the one series whose modulus is known
in closed form, f(t) = exp(it) with omega(delta) = 2 sin(delta / 2).
"""

import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superlac.errors import ValidationError
from superlac.frequencies import TWO_PI, ExplicitFrequencies
from superlac.modulus import (
    ModulusCurve,
    Provenance,
    empirical_modulus_grid,
    empirical_modulus_pairs,
    log_delta_ladder,
    loglog_delta_ladder,
    modulus_curve_from_json,
    monotone_envelope,
    window_size,
)
from superlac.series import (
    ExplicitCoefficients,
    GridFunction,
    SeriesSpec,
    sample_grid,
)


def _real_grid(vals: np.ndarray) -> GridFunction:
    return GridFunction(m=len(vals), values=np.asarray(vals, dtype=float).astype(complex),
                        truncation=1, trunc_bound=0.0)


def _brute_modulus(vals: np.ndarray, deltas) -> list[float]:
    """max |v[(j+d) % m] - v[j]| over all shifts d with 2 pi d / m <= delta."""
    m = len(vals)
    out = []
    for delta in deltas:
        w = window_size(delta, m)
        best = 0.0
        for shift in range(1, w + 1):
            best = max(best, float(np.max(np.abs(np.roll(vals, -shift) - vals))))
        out.append(best)
    return out


# ---------------------------------------------------------------------------
# curve container
# ---------------------------------------------------------------------------


def test_curve_validation():
    with pytest.raises(ValidationError):
        ModulusCurve((), (), Provenance.EMPIRICAL_PAIRS)
    with pytest.raises(ValidationError):
        ModulusCurve((0.1, 0.2), (0.0,), Provenance.EMPIRICAL_PAIRS)
    with pytest.raises(ValidationError):
        ModulusCurve((0.2, 0.1), (0.0, 0.0), Provenance.EMPIRICAL_PAIRS)
    with pytest.raises(ValidationError):
        ModulusCurve((0.0, 0.1), (0.0, 0.0), Provenance.EMPIRICAL_PAIRS)
    with pytest.raises(ValidationError):
        ModulusCurve((0.1,), (-1.0,), Provenance.EMPIRICAL_PAIRS)
    with pytest.raises(ValidationError):
        ModulusCurve((0.1,), (float("nan"),), Provenance.EMPIRICAL_PAIRS)


def test_grid_curves_must_be_monotone_but_pair_curves_need_not():
    # exhaustive window estimates can only grow with delta; sampled ones
    # are allowed to wiggle
    with pytest.raises(ValidationError):
        ModulusCurve((0.1, 0.2), (0.5, 0.4), Provenance.EMPIRICAL_GRID)
    c = ModulusCurve((0.1, 0.2), (0.5, 0.4), Provenance.EMPIRICAL_PAIRS)
    assert len(c) == 2


def test_omega_at_exact_ladder_point():
    c = ModulusCurve((0.25, 0.5), (0.1, 0.3), Provenance.EMPIRICAL_GRID)
    assert c.omega_at(0.5) == 0.3
    with pytest.raises(KeyError):
        c.omega_at(0.4)


def test_curve_csv():
    c = ModulusCurve((0.25, 0.5), (0.1, 1.0 / 3.0), Provenance.EMPIRICAL_GRID)
    rows = list(csv.reader(io.StringIO(c.to_csv())))
    assert rows[0] == ["delta", "omega", "provenance"]
    assert len(rows) == 3
    assert float(rows[1][1]) == 0.1
    assert float(rows[2][1]) == 1.0 / 3.0
    assert rows[1][2] == "empirical_grid"


def test_curve_json_round_trip():
    c = ModulusCurve((0.25, 0.5), (0.1, 0.3), Provenance.EMPIRICAL_PAIRS,
                     params={"seed": 7})
    back = modulus_curve_from_json(json.loads(json.dumps(c.to_json())))
    assert back.deltas == c.deltas
    assert back.omegas == c.omegas
    assert back.provenance is Provenance.EMPIRICAL_PAIRS
    assert back.params["seed"] == 7
    with pytest.raises(ValidationError):
        modulus_curve_from_json({"deltas": [0.1], "omegas": [0.0],
                                 "provenance": "hearsay"})
    with pytest.raises(ValidationError):
        modulus_curve_from_json({"deltas": [0.1]})


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------


def test_log_ladder_shape():
    lad = log_delta_ladder(1e-4, 1e-1, per_decade=10)
    assert lad[0] == 1e-4 and lad[-1] == 1e-1
    assert np.all(np.diff(lad) > 0)
    assert len(lad) == 31  # 3 decades * 10 + endpoint
    with pytest.raises(ValidationError):
        log_delta_ladder(1e-1, 1e-4)
    with pytest.raises(ValidationError):
        log_delta_ladder(1e-4, 7.0)  # beyond one period
    with pytest.raises(ValidationError):
        log_delta_ladder(1e-4, 1e-1, per_decade=0)


def test_loglog_ladder_shape():
    lad = loglog_delta_ladder(1.0, 3.0, 9)
    assert len(lad) == 9
    assert np.all(np.diff(lad) > 0)
    assert lad[0] == pytest.approx(math.exp(-math.exp(3.0)), rel=1e-15)
    assert lad[-1] == pytest.approx(math.exp(-math.exp(1.0)), rel=1e-15)
    with pytest.raises(ValidationError):
        loglog_delta_ladder(3.0, 1.0, 9)
    with pytest.raises(ValidationError):
        loglog_delta_ladder(1.0, 3.0, 1)


def test_window_size_boundaries():
    m = 64
    step = TWO_PI / m
    # exact multiples keep their boundary shift despite rounding
    assert window_size(5 * step, m) == 5
    assert window_size(5 * step * (1.0 - 1e-12), m) == 4
    assert window_size(step * 0.999, m) == 0
    assert window_size(10.0, m) == m // 2  # capped at half a period
    with pytest.raises(ValidationError):
        window_size(0.0, m)


# ---------------------------------------------------------------------------
# grid estimator
# ---------------------------------------------------------------------------


@given(st.data())
@settings(max_examples=40)
def test_grid_estimator_matches_brute_force_real(data):
    m = data.draw(st.integers(min_value=4, max_value=48), label="m")
    vals = np.array(data.draw(
        st.lists(st.floats(min_value=-1e6, max_value=1e6,
                           allow_nan=False, allow_infinity=False),
                 min_size=m, max_size=m), label="vals"))
    raw = data.draw(st.lists(st.floats(min_value=1e-3, max_value=TWO_PI,
                                       allow_nan=False),
                             min_size=1, max_size=4), label="deltas")
    deltas = sorted(set(raw))
    grid = _real_grid(vals)
    curve = empirical_modulus_grid(grid, deltas)
    assert curve.params["path"] == "deque"
    want = _brute_modulus(vals, deltas)
    for got, ref in zip(curve.omegas, want):
        assert got == ref  # same subtractions, exact agreement


@given(st.data())
@settings(max_examples=25)
def test_grid_estimator_matches_brute_force_complex(data):
    m = data.draw(st.integers(min_value=4, max_value=32), label="m")
    flt = st.floats(min_value=-100.0, max_value=100.0,
                    allow_nan=False, allow_infinity=False)
    re = data.draw(st.lists(flt, min_size=m, max_size=m), label="re")
    im = data.draw(st.lists(flt, min_size=m, max_size=m), label="im")
    vals = np.array(re) + 1j * np.array(im)
    if np.all(vals.imag == 0.0):
        vals = vals + 1e-9j
    deltas = sorted(set(data.draw(
        st.lists(st.floats(min_value=1e-2, max_value=TWO_PI, allow_nan=False),
                 min_size=1, max_size=3), label="deltas")))
    grid = GridFunction(m=m, values=vals, truncation=1, trunc_bound=0.0)
    curve = empirical_modulus_grid(grid, deltas)
    assert curve.params["path"] == "scan"
    want = _brute_modulus(vals, deltas)
    for got, ref in zip(curve.omegas, want):
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_grid_estimator_exp_it_closed_form(exp_it):
    # the largest grid increment of exp(it) within a window of w steps is
    # |exp(2 pi i w / m) - 1| = 2 sin(pi w / m)
    m = 1024
    grid = sample_grid(exp_it, m)
    deltas = log_delta_ladder(0.02, 3.0, per_decade=6)
    curve = empirical_modulus_grid(grid, deltas)
    for d, om in zip(curve.deltas, curve.omegas):
        w = window_size(d, m)
        assert om == pytest.approx(2.0 * math.sin(math.pi * w / m), rel=1e-12)


def test_grid_estimator_below_resolution(exp_it):
    grid = sample_grid(exp_it, 16)
    curve = empirical_modulus_grid(grid, [1e-3, 1.0])
    assert curve.omegas[0] == 0.0
    assert curve.params["below_resolution"] == [1e-3]
    assert curve.omegas[1] > 0.0


def test_grid_estimator_records_collisions():
    spec = SeriesSpec(
        frequencies=ExplicitFrequencies({1: 3, 2: 67}),
        coefficients=ExplicitCoefficients({1: 0.5, 2: 0.25}),
        truncation=2,
    )
    grid = sample_grid(spec, 64, warn=False)
    curve = empirical_modulus_grid(grid, [0.5])
    assert curve.params["collisions"] == [[1, 2]]


def test_grid_estimator_validations(exp_it):
    grid = sample_grid(exp_it, 16)
    with pytest.raises(ValidationError):
        empirical_modulus_grid(grid, [])
    with pytest.raises(ValidationError):
        empirical_modulus_grid(grid, [0.2, 0.1])
    with pytest.raises(ValidationError):
        empirical_modulus_grid(grid, [0.1, 7.0])


# ---------------------------------------------------------------------------
# random-pair estimator
# ---------------------------------------------------------------------------


def test_pairs_estimator_exp_it_closed_form(exp_it):
    deltas = [1e-6, 1e-3, 0.1, 1.0, 3.0]
    curve = empirical_modulus_pairs(exp_it, deltas, pairs_per_delta=64, seed=3)
    # endpoint offsets +-h_max are always sampled, and h_max matches
    # delta to ~2**-59 relative, so the estimate is essentially exact
    for d, om in zip(curve.deltas, curve.omegas):
        assert om == pytest.approx(2.0 * math.sin(d / 2.0), rel=1e-9)
    assert curve.provenance is Provenance.EMPIRICAL_PAIRS
    assert curve.params["eval_error"] < 1e-12


def test_pairs_estimator_is_deterministic(small_two_sided):
    a = empirical_modulus_pairs(small_two_sided, [0.1, 0.7], pairs_per_delta=128, seed=11)
    b = empirical_modulus_pairs(small_two_sided, [0.1, 0.7], pairs_per_delta=128, seed=11)
    assert a.omegas == b.omegas
    c = empirical_modulus_pairs(small_two_sided, [0.1, 0.7], pairs_per_delta=128, seed=12)
    assert c.omegas != a.omegas


def test_pairs_estimator_agrees_with_grid_route(small_two_sided):
    # two independent lower estimates of the same continuum modulus
    deltas = [0.1, 0.5, 1.0]
    grid = sample_grid(small_two_sided, 8192)
    on_grid = empirical_modulus_grid(grid, deltas)
    sampled = empirical_modulus_pairs(small_two_sided, deltas,
                                      pairs_per_delta=20000, seed=5)
    for a, b in zip(on_grid.omegas, sampled.omegas):
        assert b == pytest.approx(a, rel=0.05, abs=1e-3)


def test_pairs_estimator_tiny_delta_is_proportional(small_two_sided):
    # far below any grid resolution: omega ~ delta * max|f'| scaling
    curve = empirical_modulus_pairs(small_two_sided, [1e-12, 2e-12],
                                    pairs_per_delta=512, seed=1)
    assert 0.0 < curve.omegas[0] < curve.omegas[1]
    ratio = curve.omegas[1] / curve.omegas[0]
    assert ratio == pytest.approx(2.0, rel=0.2)


def test_pairs_estimator_validations(small_two_sided):
    with pytest.raises(ValidationError):
        empirical_modulus_pairs(small_two_sided, [])
    with pytest.raises(ValidationError):
        empirical_modulus_pairs(small_two_sided, [0.2, 0.2])
    with pytest.raises(ValidationError):
        empirical_modulus_pairs(small_two_sided, [0.1], pairs_per_delta=1)
    with pytest.raises(ValidationError):
        empirical_modulus_pairs(small_two_sided, [0.1], seed=-1)


# ---------------------------------------------------------------------------
# monotone envelope
# ---------------------------------------------------------------------------


def test_monotone_envelope_running_maximum():
    c = ModulusCurve((0.1, 0.2, 0.3, 0.4), (0.5, 0.4, 0.6, 0.55),
                     Provenance.EMPIRICAL_PAIRS)
    env = monotone_envelope(c)
    assert env.omegas == (0.5, 0.5, 0.6, 0.6)
    assert env.provenance is Provenance.EMPIRICAL_PAIRS
    assert env.params["monotone_envelope"] is True
    again = monotone_envelope(env)
    assert again.omegas == env.omegas
