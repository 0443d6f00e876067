import numpy as np
import pytest

from morphspread import equilibria as eqm, model
from morphspread.equilibria import Kind, Stability
from morphspread.errors import ConditionError, ValidationError
from morphspread.model import ModelParams, MutationScaling

SMALL = MutationScaling(1.0, 0.001, 0.00025)


def theta_axis_e(p, e):
    pre = e / (p.r_e * p.r_d * (p.m_ee - p.m_de))
    return pre * np.array([p.r_e * p.m_ed / p.m_ee - p.r_d / p.m_ee * (p.m_ee - p.m_de), -p.r_e])


def theta_axis_d(p, d):
    pre = d / (p.r_e * p.r_d * (p.m_dd - p.m_ed))
    return pre * np.array([-p.r_d, p.r_d * p.m_de / p.m_dd - p.r_e / p.m_dd * (p.m_dd - p.m_ed)])


class TestEquilibriaOfG:
    def test_p1(self, P1):
        eqs = eqm.equilibria_of_g(P1)
        assert [e.kind for e in eqs] == [Kind.EXTINCTION, Kind.AXIS_E, Kind.AXIS_D, Kind.COEXISTENCE]
        np.testing.assert_allclose(eqs[3].point, (0.7317073, 0.4878049), atol=1e-7)
        assert eqs[3].stability is Stability.STABLE
        assert eqs[0].stability is Stability.UNSTABLE
        assert eqs[1].stability is Stability.SADDLE
        for e in eqs:
            assert e.residual <= 1e-9 * (P1.r_e + P1.r_d)

    def test_axis_trace_det(self, P1):
        J = model.jacobian_g(P1, (1.2, 0))
        assert np.trace(J) == pytest.approx(-1.068, abs=1e-12)
        assert np.linalg.det(J) == pytest.approx(-0.0352, abs=1e-12)

    def test_decoupled(self):
        p = ModelParams(1, 1, 1, 1, 1, 1, 0.0, 0.0, 0.0, 0.0)
        np.testing.assert_array_equal(eqm.equilibria_of_g(p)[3].point, (1, 1))

    def test_degenerate_determinant(self, P1):
        with pytest.raises(ValidationError):
            eqm.equilibria_of_g(P1.replace(m_ee=1.0, m_dd=1.0, m_ed=1.0, m_de=1.0))


class TestClassify:
    @pytest.mark.parametrize("J, expected", [
        ([[-1, 0], [0, -2]], Stability.STABLE),
        ([[1, 0], [0, 2]], Stability.UNSTABLE),
        ([[1, 0], [0, -2]], Stability.SADDLE),
        ([[1, 0], [0, 0]], Stability.DEGENERATE),
    ])
    def test_stability(self, J, expected):
        assert eqm.classify_stability(np.array(J, dtype=float)) is expected


class TestTheta:
    def test_axis_e(self, P1):
        th = eqm.perturbation_theta(P1, SMALL, (1.2, 0))
        np.testing.assert_allclose(th, (0.03490909090909, -0.0375), atol=1e-9)
        np.testing.assert_allclose(th, theta_axis_e(P1, SMALL.e), atol=1e-12)

    def test_axis_d(self, P1):
        th = eqm.perturbation_theta(P1, SMALL, (0, 1))
        assert th[0] < 0
        np.testing.assert_allclose(th, theta_axis_d(P1, SMALL.d), atol=1e-12)

    def test_extinction(self, P1):
        np.testing.assert_array_equal(eqm.perturbation_theta(P1, SMALL, (0, 0)), (0, 0))

    def test_rejects_non_equilibrium(self, P1):
        with pytest.raises(ValidationError):
            eqm.perturbation_theta(P1, SMALL, (0.5, 0.5))


class TestFindEquilibria:
    BOX = ((-0.05, 1.4), (-0.05, 1.1))

    def test_p1_two_non_negative(self, P1):
        eqs = [e for e in eqm.find_equilibria_of_f(P1, self.BOX) if e.is_nonnegative()]
        assert len(eqs) == 2
        zero, coex = eqs
        np.testing.assert_allclose(zero.point, (0, 0), atol=1e-12)
        assert zero.stability is Stability.UNSTABLE
        assert coex.stability is Stability.STABLE and coex.kind is Kind.COEXISTENCE
        for e in eqs:
            assert e.residual <= 1e-9 * (P1.r_e + P1.r_d)

    def test_p1_coexistence_shift(self, P1):
        # the g-coexistence point sits on a nearly singular Jacobian, so
        # even tiny mutation moves it about 0.02 in each component
        coex = eqm.coexistence_of_f(P1)
        np.testing.assert_allclose(coex, (0.7120907, 0.5073049), atol=1e-6)

    def test_p2_two_non_negative(self, P2):
        eqs = [e for e in eqm.find_equilibria_of_f(P2, self.BOX) if e.is_nonnegative()]
        assert len(eqs) == 2

    def test_mutation_free_recovers_g(self, P1):
        p = P1.replace(mu_e=0.0, mu_d=0.0)
        found = np.array([e.point for e in eqm.find_equilibria_of_f(p, self.BOX)])
        expected = np.array(sorted((tuple(e.point) for e in eqm.equilibria_of_g(p))))
        np.testing.assert_allclose(found, expected, atol=1e-10)

    def test_deterministic(self, P2):
        a = eqm.find_equilibria_of_f(P2, self.BOX, grid_n=12)
        b = eqm.find_equilibria_of_f(P2, self.BOX, grid_n=12)
        assert [tuple(e.point) for e in a] == [tuple(e.point) for e in b]

    def test_grid_too_coarse(self, P1):
        with pytest.raises(ValidationError):
            eqm.find_equilibria_of_f(P1, grid_n=5)

    def test_first_order_consistency(self, P1):
        # unit-scale rates keep the second-order term well above rounding
        s = MutationScaling(1.0, 1.0, 0.25)
        base = eqm.coexistence_of_g(P1)
        theta = eqm.perturbation_theta(P1, s, base)
        ratios = []
        for mu in (1e-4, 1e-5, 1e-6):
            p = s.apply(P1, mu)
            coex = [e for e in eqm.find_equilibria_of_f(p, grid_n=10) if e.kind is Kind.COEXISTENCE]
            assert len(coex) == 1
            ratios.append(np.linalg.norm(coex[0].point - base - mu * theta) / mu)
        assert ratios[0] / ratios[1] >= 5
        assert ratios[1] / ratios[2] >= 5


class TestBoundingEquilibria:
    def test_k_plus_p1(self, P1):
        k = eqm.k_plus(P1)
        assert np.all(k > (1.198909, 0.998750))
        assert np.max(np.abs(model.reaction_f_plus(P1, k))) <= 1e-12

    def test_k_plus_mutation_free_limit(self, P1):
        np.testing.assert_allclose(eqm.k_plus(P1.replace(mu_e=1e-12, mu_d=1e-12)), (1.2, 1.0), atol=1e-9)

    def test_k_plus_precondition(self, P1):
        with pytest.raises(ConditionError):
            eqm.k_plus(P1.replace(mu_e=2.0))

    def test_k_minus_p1_fails(self, P1):
        with pytest.raises(ConditionError, match="intersmall") as info:
            eqm.k_minus(P1)
        assert "intersmall" in info.value.violated

    def test_k_minus_p2(self, P2):
        km = eqm.k_minus(P2)
        assert np.all(km < eqm.coexistence_of_f(P2))
        assert np.max(np.abs(model.reaction_f_minus(P2, km))) <= 1e-10
        thr = model.cutoff_thresholds(P2)
        assert km[0] > thr["gamma_d"][1] and km[1] > thr["gamma_e"][1]
