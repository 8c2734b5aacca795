import numpy as np
import pytest

from dtoda import models
from dtoda.errors import ValidationError
from dtoda.loewner import (alpha_coeffs, alpha_limit_ratio, exp_N_phi, gt_exact, gt_residual, loewner_residual,
                           potential_relations_residual)
from dtoda.potential import critical_frame

R3 = np.sqrt(3)


def test_toda_alpha_and_gt_closed_form(toda):
    # inverting lambda_{1,2} = u -+ 2 sqrt(v) gives gamma_2 = -gamma_1 = (lambda_2 - lambda_1)/4
    A = alpha_coeffs(critical_frame(toda))
    np.testing.assert_allclose(A.alpha, [0.5, 0.5], atol=1e-14)
    G = gt_exact(A)
    assert G["gamma"][0, 1] == pytest.approx(-0.25)
    assert G["gamma"][1, 0] == pytest.approx(-0.25)
    # alpha_n gamma_n = +-sqrt(3)/2 and d(alpha gamma)/dlambda is symmetric
    np.testing.assert_allclose(A.alpha * A.gamma, [-R3 / 2, R3 / 2])
    assert G["alpha_gamma"][0, 1] == pytest.approx(G["alpha_gamma"][1, 0])


def test_exp_N_phi(toda, case2):
    assert exp_N_phi(toda) == pytest.approx(3)
    assert exp_N_phi(case2) == pytest.approx(5)


@pytest.mark.parametrize("name", ["toda_1d", "ablowitz_ladik", "case2_simple", "dz_k3", "case2_k3"])
def test_loewner_residual_small(name):
    P = models.FIXTURES[name]()
    assert float(loewner_residual(P)) < 1e-8


def test_loewner_double_precision_agrees(al):
    r = loewner_residual(al, precision="double")
    assert float(r) < 1e-6
    with pytest.raises(ValidationError):
        loewner_residual(al, precision="quad")


def test_loewner_rejects_bad_samples(toda):
    with pytest.raises(ValidationError):
        loewner_residual(toda, p_samples=[3.0])


@pytest.mark.parametrize("name", ["ablowitz_ladik", "case2_simple", "dz_k3", "case2_k3"])
def test_gt_residual_small(name):
    res = gt_residual(models.FIXTURES[name]())
    for key, r in res.items():
        assert float(r) < 1e-8, key


def test_gt_trivial_for_k1(k1):
    assert all(float(r) == 0 for r in gt_residual(k1).values())


def test_potential_relations(toda, dz3, case2):
    for P in (toda, dz3, case2):
        for key, r in potential_relations_residual(P).items():
            assert float(r) < 1e-8, key


def test_toda_u1_is_mean_of_critical_values(toda):
    from dtoda.lax import expand_lax

    F = critical_frame(toda)
    assert expand_lax(toda, "z").u1 == pytest.approx(F.lam.mean())


def test_alpha_limit_ratio_tends_to_one(dz3):
    for n in range(3):
        r1 = alpha_limit_ratio(dz3, n, eps=1e-2)
        r2 = alpha_limit_ratio(dz3, n, eps=1e-3)
        assert abs(r2 - 1) < abs(r1 - 1) or abs(r2 - 1) < 1e-8
        assert abs(r2 - 1) < 1e-2
