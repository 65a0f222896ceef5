import numpy as np
import pytest

from conftest import max_ky_fan_violation
from volterra_lab import (
    CompactOperatorModel,
    GallerySeed,
    ProfileSpec,
    assemble_sum,
    fit_power_law,
    make_nonnegative_C,
    make_random_T,
    make_weak_perturbation,
    profile_values,
    s_numbers,
)
from volterra_lab.errors import DimMismatch, InvalidH, InvalidProfile, SingularPerturbation

POWER = ProfileSpec("power_law", 1.0, 1.0)


class TestProfiles:
    def test_power_law_values(self):
        assert np.allclose(profile_values(POWER, 4), [1.0, 0.5, 1 / 3, 0.25])

    def test_log_power_values(self):
        p = ProfileSpec("log_power", 1.0, -1.0)
        assert np.allclose(profile_values(p, 3), [1 / np.log(2), 1 / np.log(3), 1 / np.log(4)])

    def test_invalid_kind(self):
        with pytest.raises(InvalidProfile):
            ProfileSpec("exp", 1.0, 1.0)

    def test_negative_coefficient(self):
        with pytest.raises(InvalidProfile):
            ProfileSpec("power_law", -1.0, 1.0)

    def test_zero_profile_allowed(self):
        p = ProfileSpec("power_law", 0.0, 1.0)
        assert np.array_equal(profile_values(p, 5), np.zeros(5))


class TestMakeNonnegativeC:
    def test_diagonal_entries(self):
        c = make_nonnegative_C(POWER, 4)
        assert np.allclose(np.diag(c.entries).real, [1.0, 0.5, 1 / 3, 0.25])
        assert c.construction == "diagonal"

    def test_s_numbers_equal_profile_exactly(self):
        p = ProfileSpec("power_law", 2.0, 0.75)
        c = make_nonnegative_C(p, 64)
        assert np.array_equal(s_numbers(c).values, profile_values(p, 64))

    def test_hermitian_psd(self):
        c = make_nonnegative_C(POWER, 16)
        assert np.abs(c.entries - c.entries.conj().T).max() == 0.0
        assert np.linalg.eigvalsh(c.entries).min() >= 0.0

    def test_log_power_diag(self):
        c = make_nonnegative_C(ProfileSpec("log_power", 1.0, -1.0), 3)
        assert np.allclose(np.diag(c.entries).real, [1 / np.log(2), 1 / np.log(3), 1 / np.log(4)])

    def test_profile_fidelity_through_fit(self):
        c = make_nonnegative_C(ProfileSpec("power_law", 1.3, 0.8), 2048)
        fit = fit_power_law(s_numbers(c), (100, 2048))
        assert abs(fit.alpha - 0.8) < 0.02
        assert abs(fit.a - 1.3) < 0.02 * 1.3


class TestMakeRandomT:
    def test_prescribed_s_numbers(self):
        p = ProfileSpec("power_law", 1.0, 2.0)
        t = make_random_T(p, 48, GallerySeed(7))
        assert np.abs(s_numbers(t).values - profile_values(p, 48)).max() < 1e-10

    def test_seed_determinism(self):
        t1 = make_random_T(POWER, 32, 123)
        t2 = make_random_T(POWER, 32, 123)
        assert np.array_equal(t1.entries, t2.entries)

    def test_different_seeds_differ(self):
        t1 = make_random_T(POWER, 32, 1)
        t2 = make_random_T(POWER, 32, 2)
        assert not np.allclose(t1.entries, t2.entries)

    def test_zero_imag_profile_gives_hermitian(self):
        zero = ProfileSpec("power_law", 0.0, 1.0)
        t = make_random_T(POWER, 24, 5, hermitian_J_profile=zero)
        assert np.abs(t.entries - t.entries.conj().T).max() < 1e-12

    def test_hermitian_component_magnitudes(self):
        pr = ProfileSpec("power_law", 1.0, 1.0)
        pj = ProfileSpec("power_law", 0.5, 2.0)
        t = make_random_T(pr, 32, 9, hermitian_J_profile=pj)
        tr = 0.5 * (t.entries + t.entries.conj().T)
        tj = (t.entries - t.entries.conj().T) / 2j
        mags_r = np.sort(np.abs(np.linalg.eigvalsh(tr)))[::-1]
        mags_j = np.sort(np.abs(np.linalg.eigvalsh(tj)))[::-1]
        assert np.abs(mags_r - profile_values(pr, 32)).max() < 1e-10
        assert np.abs(mags_j - profile_values(pj, 32)).max() < 1e-10


class TestAssembleSum:
    def test_adding_zero(self):
        c = make_nonnegative_C(POWER, 8)
        z = CompactOperatorModel.from_matrix(np.zeros((8, 8)))
        assert np.array_equal(assemble_sum(c, z).entries, c.entries)

    def test_adjoint_distributes(self):
        c = make_nonnegative_C(POWER, 12)
        t = make_random_T(POWER, 12, 3)
        lhs = assemble_sum(c, t).adjoint().entries
        rhs = c.adjoint().entries + t.adjoint().entries
        assert np.abs(lhs - rhs).max() < 1e-15

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            assemble_sum(make_nonnegative_C(POWER, 8), make_nonnegative_C(POWER, 9))

    def test_sum_obeys_ky_fan(self):
        c = make_nonnegative_C(POWER, 40)
        t = make_random_T(ProfileSpec("power_law", 1.0, 2.0), 40, 17)
        viol = max_ky_fan_violation(s_numbers(c).values, s_numbers(t).values,
                                    s_numbers(assemble_sum(c, t)).values)
        assert viol <= 1e-10

    def test_construction_tag(self):
        c = make_nonnegative_C(POWER, 8)
        assert assemble_sum(c, c).construction == "sum"


class TestWeakPerturbation:
    def test_identity_perturbation(self):
        h = make_nonnegative_C(POWER, 6)
        s = CompactOperatorModel.from_matrix(np.zeros((6, 6)))
        assert np.array_equal(make_weak_perturbation(h, s).entries, h.entries)

    def test_triangular_example(self):
        h = CompactOperatorModel.from_matrix(np.diag([1.0, 0.5]))
        s = CompactOperatorModel.from_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))
        out = make_weak_perturbation(h, s)
        assert np.allclose(out.entries, [[1.0, 0.0], [0.5, 0.5]])
        w = np.sort(np.linalg.eigvals(out.entries).real)
        assert np.allclose(w, [0.5, 1.0])
        assert np.abs(w).min() > 0

    def test_nonzero_eigenvalues_when_h_nonsingular(self):
        rng = np.random.default_rng(31)
        z = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
        h = CompactOperatorModel.from_matrix(z @ z.conj().T / 10 + 0.1 * np.eye(10))
        s = CompactOperatorModel.from_matrix(0.05 * rng.standard_normal((10, 10)))
        out = make_weak_perturbation(h, s)
        # det(H) det(I+S) != 0, so no eigenvalue can vanish
        det = np.linalg.det(h.entries) * np.linalg.det(np.eye(10) + s.entries)
        assert abs(det) > 0
        assert np.abs(np.linalg.eigvals(out.entries)).min() > 1e-6

    def test_rejects_non_hermitian_h(self):
        h = CompactOperatorModel.from_matrix(np.array([[1.0, 1.0], [0.0, 1.0]]))
        s = CompactOperatorModel.from_matrix(np.zeros((2, 2)))
        with pytest.raises(InvalidH):
            make_weak_perturbation(h, s)

    def test_rejects_indefinite_h(self):
        h = CompactOperatorModel.from_matrix(np.diag([1.0, -0.2]))
        s = CompactOperatorModel.from_matrix(np.zeros((2, 2)))
        with pytest.raises(InvalidH):
            make_weak_perturbation(h, s)

    def test_rejects_singular_i_plus_s(self):
        h = CompactOperatorModel.from_matrix(np.diag([1.0, 0.5]))
        s = CompactOperatorModel.from_matrix(-np.eye(2))
        with pytest.raises(SingularPerturbation):
            make_weak_perturbation(h, s)
