import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susy_otoc import GridSpec, grid_model, susy_ho_model
from susy_otoc.basis import BasisMap, SusyState
from susy_otoc.models import SpectralModel
from susy_otoc.operators import OperatorContent
from susy_otoc.otoc import (ConvergenceWarning, OtocRequest, TruncationError, b_matrix,
                            commutator_matrix, microcanonical_otoc, microcanonical_sweep,
                            microcanonical_values, normalized_commutator_power_sign,
                            partition_function, thermal_otoc)

finite_t = st.floats(-15, 15, allow_nan=False)


@pytest.fixture(scope="module")
def quartic():
    return grid_model(GridSpec.from_function(-7, 7, 1401, lambda x: x**4 / 4), 1.0, 16)


def interior_indices(model, N):
    return [i for i, s in enumerate(model.basis.states()) if s.n_B <= model.n_max - N - 2]


def test_bosonic_commutator_is_cos_diagonal(ho12, bos):
    t1, t2 = 1.1, -0.4
    d = commutator_matrix(ho12, bos, t1, t2)
    idx = interior_indices(ho12, 1)
    np.testing.assert_allclose(np.diag(d)[idx], 1j * math.cos(t1 - t2), atol=1e-12)
    off = d[np.ix_(idx, idx)] - np.diag(np.diag(d)[idx])
    assert np.max(np.abs(off)) < 1e-12


def test_full_equal_time_commutator(ho12, full):
    d = commutator_matrix(ho12, full, 0.8, 0.8)
    for i in interior_indices(ho12, 1):
        expect = 2j if ho12.basis.state_of(i).n_F == 0 else 0
        assert d[i, i] == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("which", ["ho", "grid-ho"])
def test_canonical_commutator_at_zero(which, bos):
    m = susy_ho_model(12) if which == "ho" else grid_model(
        GridSpec.from_function(-10, 10, 2001, lambda x: x**2 / 2), 1.0, 14)
    diag = np.diag(b_matrix(m, bos, 0.0, 0.0))
    np.testing.assert_allclose(diag[interior_indices(m, 1)], 1.0, atol=1e-8)


def test_canonical_commutator_quartic_low_states(quartic, bos):
    # the truncated sum rule converges quickly for low states of the quartic well
    diag = np.diag(b_matrix(quartic, bos, 0.0, 0.0))
    np.testing.assert_allclose(diag[:12], 1.0, atol=1e-6)


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8])
def test_microcanonical_cos_power(ho40, bos, N):
    t1, t2 = 2.3, 0.6
    for s in [(0, 0), (5, 1), (40 - N - 2, 0)]:
        v = microcanonical_otoc(ho40, bos, s, N, t1, t2)
        assert v.real == pytest.approx(math.cos(t1 - t2) ** N, abs=1e-12)
        assert abs(v.imag) < 1e-10


def test_microcanonical_special_points(ho40, bos):
    assert microcanonical_otoc(ho40, bos, (3, 0), 2, 0.7, 0.7) == pytest.approx(1.0, abs=1e-12)
    assert microcanonical_otoc(ho40, bos, (3, 0), 2, math.pi / 2, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_microcanonical_full_mode(ho40, full):
    t1, t2 = 1.9, 0.3
    assert microcanonical_otoc(ho40, full, (4, 0), 2, t1, t2) == pytest.approx(4 * math.cos(t1 - t2) ** 2, abs=1e-12)
    assert microcanonical_otoc(ho40, full, (4, 1), 2, t1, t2) == pytest.approx(0.0, abs=1e-12)


def test_buffer_zone_rejected(ho12, bos):
    with pytest.raises(TruncationError, match="increase n_max"):
        microcanonical_otoc(ho12, bos, (9, 0), 2, 0.0, 0.0)
    microcanonical_otoc(ho12, bos, (8, 1), 2, 0.0, 0.0)


def test_no_interior_states(bos):
    with pytest.raises(TruncationError):
        thermal_otoc(susy_ho_model(3), OtocRequest(2, [1.0], [(0, 0)], bos))


def test_partition_function_closed_form():
    # E = n_B + n_F: Z = (1 + q) / (1 - q), q = e^{-beta}
    assert partition_function(susy_ho_model(200), math.log(2)) == pytest.approx(3.0, abs=1e-12)


def test_partition_function_limits():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert partition_function(susy_ho_model(10), 60.0) == pytest.approx(1.0, abs=1e-15)
    tiny = SpectralModel(BasisMap(0), [0.0], 1.0, [[0.0]])
    assert partition_function(tiny, 1.0) == pytest.approx(1 + math.exp(-1))
    with pytest.raises(ValueError):
        partition_function(tiny, 0.0)


def test_partition_function_tail_warning():
    with pytest.warns(ConvergenceWarning, match="not converged"):
        partition_function(susy_ho_model(10), 0.1)


@pytest.mark.parametrize("N", [2, 3])
def test_thermal_bosonic_beta_independent(ho40, bos, N):
    pairs = [(t, 0.0) for t in np.linspace(0, 10, 11)]
    res = thermal_otoc(ho40, OtocRequest(N, [0.1, 1.0, 10.0], pairs, bos))
    assert len(res) == 33
    for r in res:
        assert r.value.real == pytest.approx(math.cos(r.t1 - r.t2) ** N, abs=1e-10)
        assert abs(r.value.imag) < 1e-10
        assert r.mode == "bosonic-only" and r.method == "eigensum"
    assert [r.beta for r in res[:11]] == [0.1] * 11


def test_thermal_full_closed_form(ho40, full):
    res = thermal_otoc(ho40, OtocRequest(2, [0.1, 1.0, 10.0], [(0.3, 0.0), (2.2, 1.0)], full))
    for r in res:
        expect = 4 * math.cos(r.t1 - r.t2) ** 2 / (1 + math.exp(-r.beta))
        assert r.value.real == pytest.approx(expect, abs=1e-10)


def test_buffer_weight_reported(ho40, bos):
    (r,) = thermal_otoc(ho40, OtocRequest(2, [1.0], [(0, 0)], bos))
    # levels 37..40 excluded from the interior ensemble
    expect = sum(math.exp(-n) for n in range(37, 41)) / sum(math.exp(-n) for n in range(41))
    assert r.truncation_weight == pytest.approx(expect, rel=1e-12)


def test_request_validation(bos):
    with pytest.raises(ValueError):
        OtocRequest(0, [1.0], [(0, 0)], bos)
    with pytest.raises(ValueError):
        OtocRequest(2, [-1.0], [(0, 0)], bos)
    with pytest.raises(ValueError):
        OtocRequest(2, [1.0], [(0, float("nan"))], bos)
    with pytest.raises(ValueError):
        OtocRequest(2, [1.0], [(0, 0)], bos, method="magic")


def test_convention():
    conv = normalized_commutator_power_sign()
    delta = 0.37
    raw2 = (1j * math.cos(delta)) ** 2
    assert conv.normalize(raw2, 2) == pytest.approx(math.cos(delta) ** 2)
    assert conv.normalize(raw2, 2) == pytest.approx(-raw2)
    for N in range(1, 9):
        v = 0.3 + 0.2j
        assert conv.raw(conv.normalize(v, N), N) == pytest.approx(v)


def test_convention_values(ho40, bos):
    assert microcanonical_otoc(ho40, bos, (2, 0), 1, 0.5, 0.5) == pytest.approx(1.0, abs=1e-12)
    assert microcanonical_otoc(ho40, bos, (2, 0), 4, 2.0, 0.1).real >= 0


@settings(max_examples=25, deadline=None)
@given(finite_t, finite_t)
def test_anti_hermitian(t1, t2):
    m = susy_ho_model(8)
    for c in (OperatorContent.full(), OperatorContent.bosonic_only()):
        d = commutator_matrix(m, c, t1, t2)
        np.testing.assert_allclose(d.conj().T, -d, atol=1e-12)


@pytest.mark.parametrize("mode", ["full", "bosonic-only"])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_time_translation(quartic, mode, N):
    c = OperatorContent.from_mode(mode)
    a = microcanonical_values(quartic, c, N, 0.9, -0.3)
    b = microcanonical_values(quartic, c, N, 0.9 + 1.7, -0.3 + 1.7)
    np.testing.assert_allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("N", [2, 4])
def test_even_power_nonnegative(quartic, N):
    for c in (OperatorContent.full(), OperatorContent.bosonic_only()):
        v = microcanonical_values(quartic, c, N, 1.3, 0.2)
        assert np.max(np.abs(v.imag)) < 1e-10
        assert np.min(v.real) >= -1e-10


def test_energy_shift_invariance(quartic, ho12):
    for m in (quartic, ho12):
        for c in (OperatorContent.full(), OperatorContent.bosonic_only()):
            req = OtocRequest(2, [0.4, 2.0], [(1.2, 0.1), (3.0, -1.0)], c)
            r0 = thermal_otoc(m, req)
            r1 = thermal_otoc(m.shifted(7.3), req)
            for a, b in zip(r0, r1):
                assert abs(a.value - b.value) < 1e-12


def test_low_temperature_limit(quartic, full):
    beta = 30.0
    gap = quartic.energy_B[1]
    ground = microcanonical_otoc(quartic, full, (0, 0), 2, 1.0, 0.2)
    (r,) = thermal_otoc(quartic, OtocRequest(2, [beta], [(1.0, 0.2)], full))
    assert abs(r.value - ground) < math.exp(-beta * min(gap, 1.0)) + 1e-10


def test_microcanonical_sweep_records(ho12, bos):
    req = OtocRequest(2, [], [(0.0, 0.0), (1.0, 0.0)], bos)
    res = microcanonical_sweep(ho12, req, [(0, 0), (1, 1)])
    assert [r.state for r in res] == [SusyState(0, 0)] * 2 + [SusyState(1, 1)] * 2
    assert res[1].value.real == pytest.approx(math.cos(1.0) ** 2)
    with pytest.raises(TruncationError):
        microcanonical_sweep(ho12, req, [(10, 0)])
