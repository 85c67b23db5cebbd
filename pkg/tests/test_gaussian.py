"""Gaussian random series: reproducible draws, covariance, roughness.

Monte-Carlo assertions use fixed seeds, so every tolerance below is a
deterministic statement about one realised table of numbers, checked
once against an independent exact route (certified covariance
evaluation); z-score margins are generous (6 sigma) because they only
need to absorb the one frozen realisation.
"""

import json
import math

import numpy as np
import pytest

from superlac.errors import ValidationError
from superlac.frequencies import (
    DoubleExponentialFrequencies,
    GeometricFrequencies,
)
from superlac.gaussian import (
    CovarianceFunction,
    GaussianSpec,
    RoughnessTable,
    covariance_exact,
    covariance_mc,
    covariance_series,
    load_roughness_calibration,
    roughness_diagnostic,
    sample_path,
)
from superlac.series import eval_truncated


# ---------------------------------------------------------------------------
# spec and draws
# ---------------------------------------------------------------------------


def test_spec_validations():
    with pytest.raises(ValidationError):
        GaussianSpec(decay=0.0, truncation=3, seed=1)
    with pytest.raises(ValidationError):
        GaussianSpec(decay=1.0, truncation=0, seed=1)
    with pytest.raises(ValidationError):
        GaussianSpec(decay=1.0, truncation=3, seed=-1)
    with pytest.raises(ValidationError):
        GaussianSpec(decay=1.0, truncation=3, seed=1,
                     frequencies=GeometricFrequencies(base=2, two_sided=False))


def test_spec_amplitude_and_layout():
    spec = GaussianSpec(decay=1.5, truncation=3, seed=0)
    assert spec.amplitude(2) == 2.0 ** -1.5
    assert spec.amplitude(-2) == 2.0 ** -1.5
    assert spec.draw_indices() == [1, -1, 2, -2, 3, -3]


def test_draws_are_reproducible_and_real():
    spec = GaussianSpec(decay=1.0, truncation=4, seed=99)
    a = spec.draws_for(7)
    b = spec.draws_for(7)
    assert a.dtype == np.float64 and len(a) == 8
    assert np.array_equal(a, b)
    assert not np.array_equal(a, spec.draws_for(8))
    with pytest.raises(ValidationError):
        spec.draws_for(-1)


def test_draws_have_prefix_property():
    # truncation-N draws are a prefix of truncation-M draws, M > N, so
    # deepening the series refines rather than resamples a path
    shallow = GaussianSpec(decay=1.0, truncation=3, seed=5)
    deep = GaussianSpec(decay=1.0, truncation=6, seed=5)
    for i in (0, 1, 17):
        assert np.array_equal(shallow.draws_for(i), deep.draws_for(i)[:6])


def test_spec_json_round_trip():
    spec = GaussianSpec(decay=1.25, truncation=5, seed=3)
    obj = json.loads(json.dumps(spec.to_json()))
    assert obj["delta"] == 1.25  # external schema key
    back = GaussianSpec.from_json(obj)
    assert back.decay == 1.25 and back.truncation == 5 and back.seed == 3
    assert back.frequencies.value(3) == 256
    with pytest.raises(ValidationError):
        GaussianSpec.from_json({"delta": 1.0, "truncation": 2})


def test_spec_from_json_defaults_to_double_exponential():
    back = GaussianSpec.from_json({"delta": 1.0, "truncation": 2, "seed": 0})
    assert isinstance(back.frequencies, DoubleExponentialFrequencies)


def test_covariance_series_is_symmetric_power_law():
    spec = covariance_series(1.0, 4)
    assert spec.coefficients.value(-3) == spec.coefficients.value(3)
    ev = eval_truncated(spec, 0.0)
    assert ev.value.real == pytest.approx(2.0 * sum(k**-2 for k in range(1, 5)), rel=1e-15)
    with pytest.raises(ValidationError):
        covariance_series(0.5, 4)


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------


def test_sample_path_reproducible():
    spec = GaussianSpec(decay=1.0, truncation=3, seed=12)
    a = sample_path(spec, 127, 0)
    b = sample_path(spec, 127, 0)
    assert np.array_equal(a.grid.values, b.grid.values)
    assert a.seed_key == (12, 0)
    c = sample_path(spec, 127, 1)
    assert not np.array_equal(a.grid.values, c.grid.values)


def test_sample_path_value_at_origin():
    # f(0) is the plain sum of realised coefficients, aliased or not
    spec = GaussianSpec(decay=1.5, truncation=4, seed=8)
    path = sample_path(spec, 64, 2, warn=False)
    amps = np.array([spec.amplitude(k) for k in spec.draw_indices()])
    assert path.grid.values[0].real == pytest.approx(float(amps @ path.draws), rel=1e-12)
    assert path.grid.values[0].imag == 0.0


def test_sample_path_real_part_mode():
    spec = GaussianSpec(decay=1.0, truncation=3, seed=12)
    full = sample_path(spec, 127, 5, mode="complex")
    real = sample_path(spec, 127, 5, mode="real_part")
    assert np.all(real.grid.values.imag == 0.0)
    assert np.array_equal(real.grid.values.real, full.grid.values.real)
    with pytest.raises(ValidationError):
        sample_path(spec, 127, 5, mode="modulus")


def test_sample_path_tail_bound():
    spec = GaussianSpec(decay=1.0, truncation=4, seed=1)
    path = sample_path(spec, 64, 0, warn=False)
    # 2 * sum_{k>4} k^-2 = 2 * (pi^2/6 - 1 - 1/4 - 1/9 - 1/16)
    assert path.covariance_tail == pytest.approx(0.4426497456, abs=1e-6)


# ---------------------------------------------------------------------------
# covariance: exact route
# ---------------------------------------------------------------------------


def test_covariance_frozen_at_zero():
    cov = CovarianceFunction(decay=1.5, truncation=4)
    # 2 * (1 + 2^-3 + 3^-3 + 4^-3) = 2543/1080
    assert covariance_exact(cov, 0.0).value == pytest.approx(2.355324074074074, rel=1e-15)


def test_covariance_even_bitwise():
    cov = CovarianceFunction(decay=1.0, truncation=5)
    for t in (0.3, 1.7, 12345.678):
        assert cov.value(t).value == cov.value(-t).value


def test_covariance_peaks_at_zero():
    cov = CovarianceFunction(decay=1.0, truncation=5)
    r0 = cov.value(0.0).value
    for t in np.linspace(0.01, 3.0, 25):
        assert abs(cov.value(float(t)).value) <= r0


def test_covariance_matches_series_route():
    # r(t) is exactly the symmetric variance series evaluated at t; the
    # two implementations share nothing past reduce_phase
    cov = CovarianceFunction(decay=1.0, truncation=4)
    spec = covariance_series(1.0, 4)
    for t in (0.0, 0.3, 1.7, 400.0):
        ev = eval_truncated(spec, t)
        assert abs(ev.value.imag) < 1e-13
        assert cov.value(t).value == pytest.approx(ev.value.real, abs=1e-13)


def test_covariance_validations():
    with pytest.raises(ValidationError):
        CovarianceFunction(decay=0.5, truncation=4)
    with pytest.raises(ValidationError):
        CovarianceFunction(decay=1.0, truncation=0)
    cov = CovarianceFunction(decay=1.0, truncation=4)
    with pytest.raises(ValidationError):
        cov.value(float("nan"))
    assert cov.tail_bound > CovarianceFunction(decay=1.0, truncation=8).tail_bound > 0.0


# ---------------------------------------------------------------------------
# covariance: Monte Carlo route
# ---------------------------------------------------------------------------


def test_covariance_mc_agrees_with_exact():
    spec = GaussianSpec(decay=1.5, truncation=3, seed=42)
    cov = CovarianceFunction(decay=1.5, truncation=3)
    est = covariance_mc(spec, 0.3, 0.0, paths=3000)
    assert est.stderr > 0.0
    # MC and exact share the truncation, so no tail allowance enters
    assert abs(est.estimate - cov.value(0.3).value) <= 6.0 * est.stderr
    assert abs(est.imag) <= 6.0 * est.imag_stderr


def test_covariance_mc_stationary_in_base_lag():
    spec = GaussianSpec(decay=1.5, truncation=3, seed=42)
    a = covariance_mc(spec, 0.4, 0.0, paths=2000)
    b = covariance_mc(spec, 0.4, 0.7, paths=2000)
    assert abs(a.estimate - b.estimate) <= 6.0 * (a.stderr + b.stderr)


def test_covariance_mc_worker_count_is_invisible():
    spec = GaussianSpec(decay=1.0, truncation=3, seed=7)
    one = covariance_mc(spec, 0.2, 0.1, paths=600, workers=1)
    four = covariance_mc(spec, 0.2, 0.1, paths=600, workers=4)
    assert one.estimate == four.estimate
    assert one.stderr == four.stderr
    assert one.imag == four.imag


def test_covariance_mc_validations():
    spec = GaussianSpec(decay=1.0, truncation=2, seed=0)
    with pytest.raises(ValidationError):
        covariance_mc(spec, 0.1, 0.0, paths=99)


# ---------------------------------------------------------------------------
# roughness diagnostic
# ---------------------------------------------------------------------------


def test_roughness_table_runs_and_is_deterministic():
    kw = dict(decay=1.5, frequencies=None, n_list=[2, 3], delta_probe=0.3,
              m=251, paths=30, seed=1)
    a = roughness_diagnostic(**kw)
    b = roughness_diagnostic(**kw)
    assert a.truncations == (2, 3)
    assert all(med > 0.0 for med in a.medians)
    assert a.medians == b.medians
    assert len(a.ratios()) == 1
    assert a.params["paths"] == 30 and a.params["seed"] == 1
    c = roughness_diagnostic(**kw, workers=3)
    assert c.medians == a.medians


def test_roughness_records_grid_aliasing():
    # m = 512 aliases +-2**8 and maps +-2**16 to zero
    from superlac.frequencies import ResidueCollisionWarning
    with pytest.warns(ResidueCollisionWarning):
        table = roughness_diagnostic(1.0, None, [2, 3], 0.3, 512, paths=3, seed=0)
    assert "collisions" in table.params


def test_roughness_validations():
    with pytest.raises(ValidationError):
        roughness_diagnostic(1.0, None, [], 0.3, 64, 5, 0)
    with pytest.raises(ValidationError):
        roughness_diagnostic(1.0, None, [3, 3], 0.3, 64, 5, 0)
    with pytest.raises(ValidationError):
        roughness_diagnostic(1.0, None, [2, 3], 0.0, 64, 5, 0)
    with pytest.raises(ValidationError):
        roughness_diagnostic(1.0, None, [2, 3], 0.3, 64, 0, 0)


def test_geomean_ratio_hand_table():
    t = RoughnessTable((3, 4, 5), (1.0, 1.2, 1.44), {})
    assert t.geomean_ratio() == pytest.approx(1.2, rel=1e-12)
    assert t.ratios() == (1.2, 1.2)
    with pytest.raises(ValidationError):
        RoughnessTable((3,), (1.0,), {}).geomean_ratio()
    with pytest.raises(ValidationError):
        RoughnessTable((3, 4), (0.0, 1.0), {}).geomean_ratio()


def _cal_params(cal: dict) -> dict:
    return {"m": cal["m"], "delta_probe": cal["delta_probe"],
            "paths": cal["paths"], "n_list": list(cal["n_list"])}


def test_calibrated_verdicts():
    cal = load_roughness_calibration()
    p = _cal_params(cal)
    flat = RoughnessTable((3, 4, 5), (1.0, 1.05, 1.1025), p)   # geomean 1.05
    rough = RoughnessTable((3, 4, 5), (1.0, 1.2, 1.44), p)     # geomean 1.20
    assert flat.stabilizes(cal) and not flat.grows_monotonically(cal)
    assert rough.grows_monotonically(cal) and not rough.stabilizes(cal)
    # non-monotone growth gets neither verdict
    bumpy = RoughnessTable((3, 4, 5), (1.0, 0.9, 1.69), p)     # geomean 1.30
    assert not bumpy.grows_monotonically(cal)
    assert not bumpy.stabilizes(cal)
    # verdicts respond to the threshold, not to hard-coded numbers
    loose = dict(cal, geomean_threshold=1.5)
    assert bumpy.stabilizes(loose)


def test_calibration_file_contents():
    cal = load_roughness_calibration()
    assert cal["geomean_threshold"] == 1.128
    assert cal["n_list"] == [3, 4, 5]
    assert cal["m"] == 4093 and cal["delta_probe"] == 0.2 and cal["paths"] == 2000
    ranges = cal["pilot"]["geomean_ranges"]
    # the threshold separates the pilot clusters with clear margin
    assert max(ranges["1.25"]) < 1.128 < min(ranges["0.75"])


def test_verdicts_refuse_mismatched_parameters():
    cal = load_roughness_calibration()
    p = _cal_params(cal)
    p["m"] = p["m"] + 2
    table = RoughnessTable((3, 4, 5), (1.0, 1.1, 1.21), p)
    with pytest.raises(ValidationError):
        table.stabilizes(cal)


def test_roughness_serialisation():
    t = RoughnessTable((3, 4), (1.0, 1.5), {"seed": 9})
    assert "median_modulus" in t.to_csv().splitlines()[0]
    obj = t.to_json()
    assert obj["ratios"] == [1.5]
    assert obj["params"]["seed"] == 9
