import numpy as np
import pytest

from dtoda import models
from dtoda.errors import ValidationError
from dtoda.frobenius import (Chart, FlatKind, Form, TangentVector, case1_round_natural, cubic, cubic_tensor,
                             euler_homogeneity_residual, flat_constants, flat_coordinates, flat_kind_for,
                             flat_metric_report, metric_matrix, pairing, potential_from_flat, product_structure,
                             qbar_N, residue_theorem_check, thermodynamic_check)
from dtoda.potential import critical_frame, validate_potential

R3 = np.sqrt(3)


def contour_oracle(P, form, i, j, nodes=400):
    """Sum of residues at gamma_n of lambda_i lambda_j/(p^2 lambda') (angle) or with an
    extra 1/lambda (round); lambda_i = d lambda/d theta_i by central differences."""
    F = critical_frame(P)
    h = 1e-6

    def dlam(p, k):
        th = P.theta.copy()
        th[k] += h
        up = P.with_theta(th)(p)
        th[k] -= 2 * h
        return (up - P.with_theta(th)(p)) / (2 * h)

    total = 0j
    r = 0.2 * min(np.min(np.abs(F.gamma[:, None] - F.gamma[None, :]) + np.eye(P.K) * 1e9), 1.0)
    t = 2 * np.pi * np.arange(nodes) / nodes
    for g in F.gamma:
        p = g + r * np.exp(1j * t)
        f = dlam(p, i) * dlam(p, j) / (p**2 * P.dlambda(p))
        if form == "round":
            f = f / P(p)
        total += np.mean(f * r * np.exp(1j * t))
    return total


def test_toda_lambda_chart(toda):
    G = metric_matrix(toda, "angle", "lambda")
    np.testing.assert_allclose(G, np.diag([-1 / (2 * R3), 1 / (2 * R3)]), atol=1e-13)
    C = cubic_tensor(toda, "angle", "lambda")
    assert C[1, 1, 1] == pytest.approx(1 / (2 * R3))
    assert abs(C[0, 1, 1]) < 1e-13
    lam = critical_frame(toda).lam
    np.testing.assert_allclose(np.diag(metric_matrix(toda, "round", "lambda")), [-1, 1] / (2 * R3) / lam)


@pytest.mark.parametrize("name, form", [("toda_1d", "angle"), ("ablowitz_ladik", "angle"), ("dz_k3", "angle"),
                                        ("dz_k3", "round"), ("case2_simple", "round"), ("case2_k3", "round")])
def test_natural_chart_against_contour_oracle(name, form):
    P = models.FIXTURES[name]()
    G = metric_matrix(P, form, "natural")
    for i in range(P.K):
        for j in range(P.K):
            ref = contour_oracle(P, form, i, j)
            assert abs(G[i, j] - ref) < 1e-7 * max(1, abs(ref))


def test_pairing_and_cubic_multilinear(dz3, rng):
    X = TangentVector("natural", rng.standard_normal(3))
    Y = TangentVector(Chart.NATURAL, rng.standard_normal(3))
    Z = TangentVector("natural", rng.standard_normal(3))
    G = metric_matrix(dz3, Form.ANGLE, "natural")
    assert pairing(dz3, "angle", X, Y) == pytest.approx(X.components @ G @ Y.components)
    assert pairing(dz3, "angle", X, Y) == pytest.approx(pairing(dz3, "angle", Y, X))
    C = cubic_tensor(dz3, "angle", "natural")
    assert cubic(dz3, "angle", X, Y, Z) == pytest.approx(np.einsum("abc,a,b,c", C, X.components, Y.components,
                                                                   Z.components))
    with pytest.raises(ValidationError):
        pairing(dz3, "angle", TangentVector("natural", [1.0]), Y)
    with pytest.raises(ValidationError):
        metric_matrix(dz3, "square", "natural")


def test_case1_round_closed_form(rng):
    for _ in range(5):
        P = models.random_model(rng, "I")
        G = metric_matrix(P, "round", "natural")
        R = case1_round_natural(P)
        assert np.max(np.abs(G - R)) < 1e-9 * np.max(np.abs(R))


def test_flat_chart_toda(toda):
    ch = flat_coordinates(toda)
    assert ch.kind is FlatKind.DZ_CASE_I
    assert ch.labels == ["qbar0", "qbar1"]
    np.testing.assert_allclose(ch.values, [np.log(3), -4], atol=1e-13)
    G = metric_matrix(toda, "angle", "flat", ch)
    np.testing.assert_allclose(G, [[0, 1], [1, 0]], atol=1e-9)


def test_flat_chart_dz3(dz3):
    rep = flat_metric_report(dz3)
    assert rep["labels"] == ["q1", "qbar0", "qbar1"]
    np.testing.assert_allclose(rep["expected"], [[2, 0, 0], [0, 0, 1], [0, 1, 0]])
    assert rep["max_deviation"] < 1e-8 and rep["max_variation"] < 1e-8


def test_flat_chart_case2_constants(case2):
    ch = flat_coordinates(case2)
    np.testing.assert_allclose(ch.values, [0, np.log(5)], atol=1e-13)
    G = metric_matrix(case2, "round", "flat", ch)
    np.testing.assert_allclose(G, [[-1, 1], [1, 0]], atol=1e-9)
    np.testing.assert_allclose(flat_constants(case2, FlatKind.CASE_II), [[-1, 1], [1, 0]])


def test_flat_chart_case2_higher_n():
    P = validate_potential("II", 2, (1.0, 2.0), (1.0, -2.0 + 0.5j), (0.4, 3.0))
    rep = flat_metric_report(P)
    assert rep["max_deviation"] < 1e-8 and rep["max_variation"] < 1e-8
    k = np.array([1.0, 2.0])
    np.testing.assert_allclose(rep["expected"][:2, :2], np.diag(-k))
    np.testing.assert_allclose(rep["expected"][:2, 2], k)
    # qbar_n pairs with qbar_{N-n}: qbar_0 with nothing among the qbar, qbar_1 with itself
    assert rep["expected"][2, 2] == 0 and rep["expected"][3, 3] == 2


def test_case1_log_b_chart(al):
    rep = flat_metric_report(al, "round")
    assert rep["kind"] == "CaseILogB"
    assert rep["max_deviation"] < 1e-9 and rep["max_variation"] < 1e-9


def test_flat_kind_gating():
    with pytest.raises(ValidationError, match="kappa_i = 1"):
        flat_kind_for(validate_potential("I", 1, (2, 1), (1.0, 2.0)), "angle")
    with pytest.raises(ValidationError):
        flat_kind_for(models.case2_simple(), "angle")
    with pytest.raises(ValidationError):
        metric_matrix(models.case2_simple(), "angle", "natural")


def test_potential_from_flat_roundtrip():
    P = validate_potential("II", 2, (1.0, 1.0), (1.0, -2.0 + 0.5j), (0.4, 3.0))
    q = flat_coordinates(P).values
    Q = potential_from_flat(P.with_theta(P.theta * 1.01), q)
    np.testing.assert_allclose(Q.theta, P.theta, atol=1e-10)


def test_product_structure_associative(dz3, case2):
    for P, form in ((dz3, "angle"), (case2, "round"), (dz3, "round")):
        c, assoc = product_structure(P, form, "natural")
        assert assoc < 1e-10
        # d_j o d_k is symmetric in (j, k)
        np.testing.assert_allclose(c, np.swapaxes(c, 1, 2), atol=1e-10 * np.max(np.abs(c)))


def test_euler_homogeneity(dz3, case2):
    for P in (dz3, case2, models.case2_k3()):
        res = euler_homogeneity_residual(P)
        assert res["lambda_scaling"] < 1e-12
        assert res["gamma_scaling"] < 1e-12
        assert res["euler_field"] < 1e-12
        assert res["euler_fd"] < 1e-8


def test_qbar_N_product():
    for P in (models.case2_simple(), models.case2_k3(),
              validate_potential("II", 2, (1.0, 1.5), (1.0, -2.0 + 0.5j), (0.4, 3.0))):
        prod = np.prod([(-b) ** k for k, b in zip(P.kappa, P.b)])
        assert abs(np.exp(P.N * qbar_N(P)) - prod) < 1e-10 * abs(prod)
    with pytest.raises(ValidationError):
        qbar_N(models.toda_1d())


def test_thermodynamic_rows():
    P = validate_potential("II", 3, (1.0,), (2.0,), (0.3, -0.2, 4.0))
    rows = thermodynamic_check(P)
    np.testing.assert_allclose(rows, -np.eye(3, 4), atol=1e-6)


def test_residue_theorem(case2, rng):
    P = models.case2_k3()
    for pair in [(0, 0), (0, 1), (1, 2), (2, 2)]:
        assert residue_theorem_check(P, pair) < 1e-10
    assert residue_theorem_check(case2, (0, 1)) < 1e-10


def test_case2_natural_anchor(case2):
    G = metric_matrix(case2, "round", "natural")
    assert G[0, 0] == pytest.approx(-1)          # -kappa/b^2
    assert G[0, 1] == pytest.approx(1 / 5)       # +kappa/(N b c_N)


def test_ablowitz_ladik_round_entries(al):
    G = metric_matrix(al, "round", "natural")
    assert G[0, 0] == pytest.approx(-2)
    assert G[0, 1] == pytest.approx(0.5)


def test_lambda_chart_product_is_diagonal(dz3):
    c, assoc = product_structure(dz3, "angle", "lambda")
    assert assoc < 1e-14
    off = np.ones_like(c, dtype=bool)
    idx = np.arange(3)
    off[idx, idx, idx] = False
    assert np.max(np.abs(c[off])) < 1e-13


def test_case2_flat_associativity(case2):
    _, assoc = product_structure(case2, "round", "flat")
    assert assoc < 1e-8
