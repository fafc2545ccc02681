import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eig_char_poly, random_density, random_hermitian
from qdbloch.errors import NonHermitianInput, ShapeMismatch
from qdbloch.state import (
    DensityMatrix,
    LevelLayout,
    check_bounds,
    hermiticity_defect,
    is_psd,
    min_eigenvalue,
    project_intraband_array,
    project_intraband_zero,
)

L12 = LevelLayout(1, 2)


def test_layout_slices_and_mask():
    lay = LevelLayout(2, 3)
    assert lay.d == 5
    assert (lay.c.start, lay.c.stop, lay.v.start, lay.v.stop) == (0, 2, 2, 5)
    m = lay.intraband_mask()
    assert m[0, 1] and m[1, 0] and m[2, 4] and m[3, 2]
    assert not m[0, 2] and not m[4, 1] and not m.diagonal().any()


@pytest.mark.parametrize("nc,nv", [(0, 1), (1, 0), (-1, 2)])
def test_layout_rejects_empty_band(nc, nv):
    with pytest.raises(ValueError):
        LevelLayout(nc, nv)


def test_density_matrix_blocks_and_immutability():
    a = np.arange(9).reshape(3, 3) + 1j
    rho = DensityMatrix(L12, a)
    assert rho.rho_c.shape == (1, 1) and rho.rho_cv.shape == (1, 2) and rho.rho_v.shape == (2, 2)
    assert rho.rho_vc[1, 0] == a[2, 0]
    with pytest.raises(ValueError):
        rho.entries[0, 0] = 5
    with pytest.raises(ShapeMismatch):
        DensityMatrix(L12, np.eye(2))


def test_ground_state_defaults_to_top_valence_level():
    rho = DensityMatrix.ground(L12)
    assert rho.populations().tolist() == [0.0, 0.0, 1.0]
    assert rho.trace == 1.0


def test_pairs_round_trip():
    rng = np.random.default_rng(1)
    rho = DensityMatrix(L12, random_density(3, rng))
    pairs = rho.to_pairs()
    assert len(pairs) == 18
    assert pairs[2] == rho.entries[0, 1].real and pairs[3] == rho.entries[0, 1].imag
    back = DensityMatrix.from_pairs(L12, pairs)
    assert np.array_equal(back.entries, rho.entries)
    with pytest.raises(ShapeMismatch):
        DensityMatrix.from_pairs(L12, pairs[:-1])


def test_hermiticity_defect_examples():
    assert hermiticity_defect(np.eye(2)) == 0.0
    assert hermiticity_defect(np.array([[0, 1j], [1j, 0]])) == pytest.approx(2.0)
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert hermiticity_defect(A + A.conj().T) <= 1e-15


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert min_eigenvalue(np.full((2, 2), 0.5)) == pytest.approx(0.0, abs=1e-15)
    a = np.diag([0.6, 0.3, 0.1]).astype(complex)
    a[0, 1] = a[1, 0] = 0.5
    # 2x2 block [[0.6, 0.5], [0.5, 0.3]]: eigenvalues 0.45 +- sqrt(0.0225 + 0.25)
    expected = 0.45 - np.sqrt(0.15**2 + 0.25)
    assert min_eigenvalue(a) == pytest.approx(expected, abs=1e-14)
    assert expected < 0


def test_min_eigenvalue_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        min_eigenvalue(np.array([[1.0, 0.1], [0.0, 0.0]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_min_eigenvalue_matches_characteristic_polynomial(d, seed):
    a = random_hermitian(d, np.random.default_rng(seed))
    assert min_eigenvalue(a) == pytest.approx(eig_char_poly(a)[0], abs=1e-10 * max(1, np.abs(a).max()))


def test_check_bounds_examples():
    assert check_bounds(np.diag([0.0, 1.0]), 1.0).ok
    a = np.diag([0.5, 0.5]).astype(complex)
    a[0, 1] = a[1, 0] = 0.6
    rep = check_bounds(a, 1.0)
    assert not rep.coherences_ok and rep.populations_ok
    assert rep.worst_coherence[2] == pytest.approx(0.6)
    neg = np.diag([0.1, -0.05, 0.95])
    rep = check_bounds(neg, 1.0)
    assert rep.negative_population and not rep.populations_ok
    assert rep.worst_population[:2] == (1, 1)
    with pytest.raises(ValueError):
        check_bounds(neg, 0.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_psd_matrices_never_violate_bounds(nc, nv, seed, trace):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, nc + nv + 1))
    rho = trace * random_density(nc + nv, rng, rank)
    assert is_psd(rho, trace)
    assert check_bounds(rho, trace).ok


def test_projection_examples():
    diag = DensityMatrix(L12, np.diag([0.2, 0.3, 0.5]))
    assert np.array_equal(project_intraband_zero(diag).entries, diag.entries)
    a = np.diag([0.2, 0.3, 0.5]).astype(complex)
    a[1, 2], a[2, 1] = 0.1 + 0.2j, 0.1 - 0.2j
    a[0, 2], a[2, 0] = 0.05j, -0.05j
    out = project_intraband_zero(DensityMatrix(L12, a))
    assert out.entries[1, 2] == 0 and out.entries[2, 1] == 0
    assert out.entries[0, 2] == 0.05j
    assert out.trace == pytest.approx(1.0)
    with pytest.raises(TypeError):
        project_intraband_zero(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_projection_idempotent_trace_preserving_hermitian(nc, nv, seed):
    lay = LevelLayout(nc, nv)
    rho = DensityMatrix(lay, random_density(lay.d, np.random.default_rng(seed)))
    once = project_intraband_zero(rho)
    twice = project_intraband_zero(once)
    assert np.array_equal(once.entries, twice.entries)
    assert once.trace == pytest.approx(rho.trace, abs=1e-15)
    assert hermiticity_defect(once) <= hermiticity_defect(rho)
    assert np.array_equal(project_intraband_array(rho.entries, lay), once.entries)
