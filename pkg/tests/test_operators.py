import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susy_otoc import GridSpec, grid_model, susy_ho_model
from susy_otoc.operators import (OperatorContent, momentum_matrix_direct, momentum_matrix_from_energy,
                                 phase_dress, position_matrix)

R2 = 1 / math.sqrt(2)


def ix(m, s):
    return m.basis.index_of(s)


@pytest.fixture(scope="module")
def models():
    quartic = grid_model(GridSpec.from_function(-7, 7, 1401, lambda x: x**4 / 4), 1.0, 14)
    harmonic = grid_model(GridSpec.from_function(-10, 10, 2001, lambda x: x**2 / 2), 1.0, 14)
    return {"ho": susy_ho_model(13), "grid-ho": harmonic, "grid-quartic": quartic,
            "ho-omega": susy_ho_model(9, 1.7)}


def test_content_validation():
    with pytest.raises(ValueError):
        OperatorContent(False, False)
    with pytest.raises(ValueError):
        OperatorContent(True, True, 0.0)
    assert OperatorContent.from_mode("full").mode == "full"
    assert OperatorContent.from_mode("bosonic-only").mode == "bosonic-only"
    with pytest.raises(ValueError):
        OperatorContent.from_mode("partner")


def test_position_elements(ho12, full, bos):
    x = position_matrix(ho12, full)
    assert x[ix(ho12, (0, 0)), ix(ho12, (1, 0))] == pytest.approx(R2)
    assert x[ix(ho12, (0, 0)), ix(ho12, (0, 1))] == pytest.approx(R2)
    assert position_matrix(ho12, bos)[ix(ho12, (0, 0)), ix(ho12, (0, 1))] == 0


def test_momentum_direct_elements(ho12, full):
    p = momentum_matrix_direct(ho12, full)
    assert p[ix(ho12, (1, 0)), ix(ho12, (0, 0))] == pytest.approx(1j * R2)
    assert p[ix(ho12, (0, 0)), ix(ho12, (1, 0))] == pytest.approx(-1j * R2)
    assert p[0, 0] == 0


def test_momentum_from_energy_elements(ho12, full):
    x = position_matrix(ho12, full)
    p1 = momentum_matrix_from_energy(x, ho12, 1.0)
    p_half = momentum_matrix_from_energy(x, ho12, 0.5)
    assert p1[ix(ho12, (0, 0)), ix(ho12, (1, 0))] == pytest.approx(-1j * R2)
    assert p_half[ix(ho12, (0, 0)), ix(ho12, (1, 0))] == pytest.approx(-1j / (2 * math.sqrt(2)))
    assert np.all(np.diag(p1) == 0)


@pytest.mark.parametrize("name", ["ho", "grid-ho", "grid-quartic", "ho-omega"])
@pytest.mark.parametrize("mode", ["full", "bosonic-only"])
def test_hermitian_and_substitution_identity(models, name, mode):
    m = models[name]
    c = OperatorContent.from_mode(mode)
    x = position_matrix(m, c)
    p = momentum_matrix_direct(m, c)
    np.testing.assert_allclose(x, x.conj().T, atol=1e-12)
    np.testing.assert_allclose(p, p.conj().T, atol=1e-12)
    np.testing.assert_allclose(momentum_matrix_from_energy(x, m, 1.0), p, rtol=0, atol=1e-10)


def test_selection_rule(ho12, full):
    x = position_matrix(ho12, full)
    for i in range(ho12.dimension):
        for j in range(ho12.dimension):
            (nb, nf), (kb, kf) = ho12.basis.state_of(i), ho12.basis.state_of(j)
            allowed = (nf == kf and abs(nb - kb) == 1) or (nb == kb and abs(nf - kf) == 1)
            if not allowed:
                assert x[i, j] == 0


def test_equal_time_commutator_diagonal(ho12, full, bos):
    for content, expect in ((full, lambda nf: 2 - 2 * nf), (bos, lambda nf: 1)):
        x = position_matrix(ho12, content)
        p = momentum_matrix_direct(ho12, content)
        diag = np.diag(-1j * (x @ p - p @ x))
        for i, s in enumerate(ho12.basis.states()):
            if s.n_B <= ho12.n_max - 2:
                assert diag[i] == pytest.approx(expect(s.n_F), abs=1e-12)


def test_phase_dress(ho12, full):
    x = position_matrix(ho12, full)
    assert np.array_equal(phase_dress(x, ho12, 0.0), x)
    xt = phase_dress(x, ho12, 0.9)
    assert xt[ix(ho12, (0, 0)), ix(ho12, (1, 0))] == pytest.approx(np.exp(-0.9j) * R2)
    np.testing.assert_allclose(xt, xt.conj().T, atol=1e-15)
    with pytest.raises(ValueError):
        phase_dress(x, ho12, float("inf"))


@settings(max_examples=30, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_phase_dress_additive(t, s):
    m = susy_ho_model(6)
    x = position_matrix(m, OperatorContent.full())
    np.testing.assert_allclose(phase_dress(phase_dress(x, m, t), m, s), phase_dress(x, m, t + s), atol=1e-12)


def test_dimension_mismatch(ho12):
    with pytest.raises(ValueError, match="shape"):
        momentum_matrix_from_energy(np.zeros((4, 4)), ho12)
