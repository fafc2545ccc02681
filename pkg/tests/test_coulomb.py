import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qdbloch.coulomb import (
    FULL,
    VANISHING,
    CoulombTensor,
    assemble_coulomb_potential,
    coulomb_linear_map,
    energy_shifts,
    eta_cv,
    gamma_cv,
    kappa_v,
    lambda_c,
    lambda_v,
    make_synthetic_tensor,
    zeta_c,
    zeta_v,
)
from qdbloch.errors import NonRealShift, ShapeMismatch, SymmetryViolation
from qdbloch.state import DensityMatrix, LevelLayout, hermiticity_defect

LAYOUTS = [LevelLayout(nc, nv) for nc in (1, 2, 3) for nv in (1, 2, 3)]


def tensor_from_oracle(lay, rng, scale=1.0):
    Rc, Rv, Rcv = oracles.symmetric_tensors(lay.n_c, lay.n_v, rng, scale)
    return CoulombTensor(lay, Rc, Rv, Rcv)


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


# synthetic tensors


def test_zero_scale_gives_zero_tensor():
    R = make_synthetic_tensor(LevelLayout(2, 2), 0.0, seed=3)
    assert R.scale == 0.0


@pytest.mark.parametrize("lay", LAYOUTS, ids=str)
@pytest.mark.parametrize("complex_phases", [False, True])
def test_synthetic_symmetries_exact(lay, complex_phases):
    R = make_synthetic_tensor(lay, 1e-21, seed=11, complex_phases=complex_phases)
    for name in ("R_c", "R_v"):
        T = getattr(R, name)
        n = T.shape[0]
        for a, b, c, d in itertools.product(range(n), repeat=4):
            assert T[a, b, c, d] == T[b, a, d, c]
            assert T[a, b, c, d] == np.conj(T[c, d, a, b])
    nc, nv = lay.n_c, lay.n_v
    for a, b, c, d in itertools.product(range(nc), range(nv), range(nc), range(nv)):
        assert R.R_cv[a, b, c, d] == np.conj(R.R_cv[c, d, a, b])
    assert R.symmetry_defect() == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(LAYOUTS), st.booleans())
def test_synthetic_magnitudes_in_band_and_not_all_equal(seed, lay, phases):
    R0 = 1e-21
    R = make_synthetic_tensor(lay, R0, seed, complex_phases=phases)
    for T in (R.R_c, R.R_v, R.R_cv):
        mag = np.abs(T)
        assert mag.min() >= 0.5 * R0 * (1 - 1e-15)
        assert mag.max() <= 1.5 * R0 * (1 + 1e-15)
    allv = np.concatenate([R.R_c.ravel(), R.R_v.ravel(), R.R_cv.ravel()])
    assert np.ptp(np.abs(allv)) > 0 or allv.size == 3


def test_synthetic_is_deterministic():
    lay = LevelLayout(2, 2)
    a, b = make_synthetic_tensor(lay, 1.0, 5), make_synthetic_tensor(lay, 1.0, 5)
    assert np.array_equal(a.R_cv, b.R_cv)
    c = make_synthetic_tensor(lay, 1.0, 6)
    assert not np.array_equal(a.R_cv, c.R_cv)


def test_negative_scale_rejected():
    with pytest.raises(ValueError):
        make_synthetic_tensor(LevelLayout(1, 1), -1.0, 0)


def test_save_load_round_trip(tmp_path):
    lay = LevelLayout(2, 2)
    R = make_synthetic_tensor(lay, 2e-21, 4, complex_phases=True)
    p = tmp_path / "R.txt"
    R.save(p)
    back = CoulombTensor.load(p)
    assert back.layout == lay
    for name in ("R_c", "R_v", "R_cv"):
        assert np.array_equal(getattr(back, name), getattr(R, name))


def test_load_rejects_asymmetric_file(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("layout 1 2\nv 0 1 0 0 1.0 0.0\n")
    with pytest.raises(SymmetryViolation):
        CoulombTensor.load(p)


def test_load_rejects_layout_mismatch(tmp_path):
    p = tmp_path / "R.txt"
    make_synthetic_tensor(LevelLayout(1, 2), 1.0, 0).save(p)
    with pytest.raises(ShapeMismatch):
        CoulombTensor.load(p, layout=LevelLayout(2, 2))


def test_tensor_shape_checked():
    lay = LevelLayout(1, 2)
    with pytest.raises(ShapeMismatch):
        CoulombTensor(lay, np.zeros((1,) * 4), np.zeros((2,) * 4), np.zeros((2, 2, 2, 2)))


# matrix builders


@pytest.mark.parametrize("lay", LAYOUTS, ids=str)
def test_builders_match_index_loop_oracle(lay):
    rng = np.random.default_rng(lay.n_c * 10 + lay.n_v)
    nc = lay.n_c
    for _ in range(5):
        R = tensor_from_oracle(lay, rng)
        rho = oracles.random_density(lay.d, rng)
        pairs = [
            (lambda_c(rho, R), oracles.lambda_c(rho, R.R_c, nc)),
            (lambda_v(rho, R), oracles.lambda_v(rho, R.R_v, nc)),
            (zeta_v(rho, R), oracles.zeta_v(rho, R.R_cv, nc)),
            (zeta_c(rho, R), oracles.zeta_c(rho, R.R_cv, nc)),
            (gamma_cv(rho, R), oracles.gamma_cv(rho, R.R_cv, nc)),
            (eta_cv(R), oracles.eta_cv(R.R_cv)),
            (kappa_v(R), oracles.kappa_v(R.R_v)),
        ]
        for got, want in pairs:
            assert rel_err(got, want) <= 1e-13


def test_builders_zero_density():
    lay = LevelLayout(2, 2)
    R = make_synthetic_tensor(lay, 1.0, 0)
    z = np.zeros((4, 4))
    for f in (lambda_c, lambda_v, zeta_v, zeta_c, gamma_cv):
        assert not np.any(f(z, R))


def test_equal_entries_cancel_lambda_and_kappa():
    lay = LevelLayout(2, 3)
    R = CoulombTensor(lay, np.ones((2,) * 4), np.ones((3,) * 4), np.ones((2, 3, 2, 3)))
    rho = oracles.random_density(5, np.random.default_rng(0))
    assert np.max(np.abs(lambda_c(rho, R))) < 1e-15
    assert np.max(np.abs(lambda_v(rho, R))) < 1e-15
    assert np.max(np.abs(kappa_v(R))) == 0.0


def test_zeta_v_identity_gives_kronecker_sum():
    lay = LevelLayout(2, 2)
    R = make_synthetic_tensor(lay, 1.0, 9)
    rho = np.zeros((4, 4))
    rho[2:, 2:] = np.eye(2)
    expected = np.einsum("iaka->ik", R.R_cv)
    assert np.allclose(zeta_v(rho, R), expected, rtol=1e-15, atol=0)


def test_gamma_one_hot_extraction():
    lay = LevelLayout(2, 2)
    R = make_synthetic_tensor(lay, 1.0, 2, complex_phases=True)
    rho = np.zeros((4, 4), complex)
    ap, a = 1, 0  # rho_cv[alpha', alpha] = 1
    rho[ap, 2 + a] = 1.0
    g = gamma_cv(rho, R)
    for i in range(2):
        for k in range(2):
            assert g[i, k] == -R.R_cv[i, a, ap, k]


def test_eta_diagonal_when_tensor_diagonal_in_ik():
    lay = LevelLayout(2, 2)
    Rcv = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for b in range(2):
            Rcv[i, b, i, b] = 1.0 + i + b
    R = CoulombTensor(lay, np.zeros((2,) * 4), np.zeros((2,) * 4), Rcv)
    e = eta_cv(R)
    assert e[0, 1] == 0 and e[1, 0] == 0
    assert e[0, 0] == -3.0 and e[1, 1] == -5.0


def test_shape_mismatch_raised():
    R = make_synthetic_tensor(LevelLayout(1, 2), 1.0, 0)
    with pytest.raises(ShapeMismatch):
        lambda_c(np.eye(4), R)
    with pytest.raises(ShapeMismatch):
        assemble_coulomb_potential(DensityMatrix.ground(LevelLayout(2, 2)), R)


# assembly


@pytest.mark.parametrize("lay", LAYOUTS, ids=str)
@pytest.mark.parametrize("mode", [FULL, VANISHING])
def test_assembly_matches_oracle_and_is_hermitian(lay, mode):
    rng = np.random.default_rng(100 + lay.d)
    R = tensor_from_oracle(lay, rng)
    rho = oracles.random_density(lay.d, rng)
    V = assemble_coulomb_potential(rho, R, mode)
    want = oracles.coulomb_potential(rho, R.R_c, R.R_v, R.R_cv, lay.n_c, vanishing=mode == VANISHING)
    assert rel_err(V.full(), want) <= 1e-13
    assert np.array_equal(V.V_vc, V.V_cv.conj().T)
    scale = np.max(np.abs(V.full()))
    assert hermiticity_defect(V.V_c) <= 1e-12 * scale
    assert hermiticity_defect(V.V_v) <= 1e-12 * scale


def test_assembly_trivial_cases():
    lay = LevelLayout(2, 2)
    R = make_synthetic_tensor(lay, 1.0, 1)
    V = assemble_coulomb_potential(np.zeros((4, 4)), R)
    assert np.array_equal(V.V_c, eta_cv(R)) and np.array_equal(V.V_v, kappa_v(R))
    assert not np.any(V.V_cv)
    rho = oracles.random_density(4, np.random.default_rng(0))
    assert not np.any(assemble_coulomb_potential(rho, CoulombTensor.zeros(lay)).full())


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(LAYOUTS), st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_assembly_is_affine_in_rho(lay, seed, a, b):
    rng = np.random.default_rng(seed)
    R = make_synthetic_tensor(lay, 1.0, seed, complex_phases=True)
    r1, r2 = oracles.random_density(lay.d, rng), oracles.random_density(lay.d, rng)
    C = assemble_coulomb_potential(np.zeros_like(r1), R).full()

    def lin(r):
        return assemble_coulomb_potential(r, R).full() - C

    assert np.allclose(lin(a * r1 + b * r2), a * lin(r1) + b * lin(r2), atol=1e-12 * (abs(a) + abs(b) + 1))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(LAYOUTS), st.integers(0, 2**31))
def test_modes_agree_on_diagonal_rho(lay, seed):
    rng = np.random.default_rng(seed)
    R = make_synthetic_tensor(lay, 1.0, seed, complex_phases=True)
    rho = oracles.random_density(lay.d, rng)
    # zero the intra-band off-diagonals only; inter-band coherences stay
    rho[lay.intraband_mask()] = 0
    full = assemble_coulomb_potential(rho, R, FULL).full()
    van = assemble_coulomb_potential(rho, R, VANISHING).full()
    assert np.array_equal(full, van)


@pytest.mark.parametrize("lay", LAYOUTS, ids=str)
@pytest.mark.parametrize("mode", [FULL, VANISHING])
def test_linear_map_reproduces_assembly(lay, mode):
    rng = np.random.default_rng(7 * lay.d)
    R = make_synthetic_tensor(lay, 1.0, lay.d, complex_phases=True)
    T, C = coulomb_linear_map(R, mode)
    for _ in range(3):
        rho = oracles.random_density(lay.d, rng)
        got = np.einsum("abef,ef->ab", T, rho) + C
        want = assemble_coulomb_potential(rho, R, mode).full()
        assert np.max(np.abs(got - want)) <= 1e-14


# energy shifts


def test_energy_shifts_zero_density():
    lay = LevelLayout(2, 3)
    R = make_synthetic_tensor(lay, 1.0, 3, complex_phases=True)
    dc, dv = energy_shifts(np.zeros((5, 5)), R)
    for i in range(2):
        assert dc[i] == pytest.approx(-sum(R.R_cv[i, b, i, b].real for b in range(3)), rel=1e-14)
    for i in range(3):
        want = 2 * sum((R.R_v[b, i, i, b] - R.R_v[b, i, b, i]).real for b in range(3))
        assert dv[i] == pytest.approx(want, abs=1e-14)


def test_energy_shifts_vanish_without_coupling():
    lay = LevelLayout(1, 2)
    dc, dv = energy_shifts(oracles.random_density(3, np.random.default_rng(0)), CoulombTensor.zeros(lay))
    assert not np.any(dc) and not np.any(dv)


@pytest.mark.parametrize("lay", LAYOUTS, ids=str)
def test_energy_shifts_equal_potential_diagonal(lay):
    rng = np.random.default_rng(lay.d)
    R = make_synthetic_tensor(lay, 1.0, 8, complex_phases=True)
    rho = oracles.random_density(lay.d, rng)
    dc, dv = energy_shifts(rho, R)
    V = assemble_coulomb_potential(rho, R)
    assert np.allclose(dc, np.diag(V.V_c).real, rtol=0, atol=1e-13)
    assert np.allclose(dv, np.diag(V.V_v).real, rtol=0, atol=1e-13)


def test_energy_shifts_flag_broken_symmetry():
    lay = LevelLayout(1, 2)
    Rcv = np.zeros((1, 2, 1, 2), complex)
    Rcv[0, 0, 0, 0] = 1j  # violates the conjugation symmetry
    R = CoulombTensor(lay, np.zeros((1,) * 4), np.zeros((2,) * 4), Rcv)
    with pytest.raises(NonRealShift):
        energy_shifts(np.zeros((3, 3)), R)
