# -*- coding: utf-8 -*-
import numpy as np
import pytest
from numpy.testing import assert_allclose

from wholegrid import lti
from wholegrid.errors import DimMismatch, IllPosedLoop, ImproperSystem, SingularD

S_VALUES = [0.5, 3j, -2j + 1.0, 10.0 + 40j]


def first_order(pole, gain=1.0, feedthrough=0.0):
    # gain / (s - pole) + feedthrough
    return lti.LtiSystem([[pole]], [[1.0]], [[gain]], [[feedthrough]])


def test_static_system_evaluates_to_its_feedthrough():
    g = lti.make_static([[1.0, 2.0], [3.0, 4.0]])
    assert g.state_dim == 0
    assert_allclose(lti.evaluate(g, 5j), [[1.0, 2.0], [3.0, 4.0]])


def test_evaluate_first_order():
    g = first_order(-2.0, gain=3.0, feedthrough=0.5)
    for s in S_VALUES:
        assert_allclose(lti.evaluate(g, s), [[3.0 / (s + 2.0) + 0.5]])


def test_derivative_feedthrough_is_evaluated():
    g = lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[0.2]], [[0.01]])
    assert not g.is_proper
    assert_allclose(lti.evaluate(g, 100j), [[0.2 + 1j]])


def test_inconsistent_realization_is_rejected():
    with pytest.raises(DimMismatch):
        lti.LtiSystem([[1.0, 0.0], [0.0, 1.0]], [[1.0]], [[1.0, 0.0]], [[0.0]])


def test_series_and_add():
    g1 = first_order(-1.0)
    g2 = first_order(-3.0, gain=2.0)
    for s in S_VALUES:
        expected = 1.0 / (s + 1.0) * 2.0 / (s + 3.0)
        assert_allclose(lti.evaluate(lti.series(g1, g2), s), [[expected]])
        assert_allclose(lti.evaluate(lti.add(g1, g2), s), [[1.0 / (s + 1.0) + 2.0 / (s + 3.0)]])
        assert_allclose(lti.evaluate(lti.negate(g1), s), [[-1.0 / (s + 1.0)]])


def test_series_with_improper_outer_factor():
    impedance = lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[0.1]], [[0.02]])
    g = lti.series(impedance, first_order(-1.0))
    for s in S_VALUES:
        assert_allclose(lti.evaluate(g, s), [[(0.1 + 0.02 * s) / (s + 1.0)]])


def test_series_rejects_improper_inner_factor():
    impedance = lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[0.1]], [[0.02]])
    with pytest.raises(ImproperSystem):
        lti.series(first_order(-1.0), impedance)


def test_negative_feedback():
    loop = lti.feedback(first_order(-1.0), lti.make_static([[2.0]]))
    assert_allclose(lti.poles(loop), [-3.0])
    for s in S_VALUES:
        assert_allclose(lti.evaluate(loop, s), [[1.0 / (s + 3.0)]])


def test_algebraic_loop_is_ill_posed():
    with pytest.raises(IllPosedLoop):
        lti.feedback(lti.make_static([[1.0]]), lti.make_static([[1.0]]), sign=1)


def test_inverse_with_invertible_feedthrough():
    g = first_order(-2.0, gain=3.0, feedthrough=0.5)
    inv = lti.inverse(g)
    for s in S_VALUES:
        assert_allclose(lti.evaluate(inv, s) * lti.evaluate(g, s), [[1.0]], rtol=1e-12)


def test_inverse_of_inductive_impedance_is_strictly_proper():
    R, L = 0.1, 0.01
    Z = lti.LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[R]], [[L]])
    Y = lti.inverse(Z)
    assert Y.is_proper
    assert_allclose(lti.poles(Y), [-R / L])
    for s in S_VALUES:
        assert_allclose(lti.evaluate(Y, s), [[1.0 / (R + s * L)]])


def test_inverse_of_relative_degree_one_system():
    g = first_order(-2.0)
    with pytest.raises(SingularD):
        lti.inverse(g)
    inv = lti.inverse(g, allow_improper=True)
    assert not inv.is_proper
    assert inv.state_dim == 0
    for s in S_VALUES:
        assert_allclose(lti.evaluate(inv, s), [[s + 2.0]], atol=1e-12)


def test_inverse_needs_square_system():
    with pytest.raises(DimMismatch):
        lti.inverse(lti.make_static([[1.0, 2.0]]))


def test_block_diag_collects_poles():
    g = lti.block_diag(first_order(-1.0), first_order(-5.0))
    assert (g.input_dim, g.output_dim) == (2, 2)
    assert_allclose(sorted(lti.poles(g).real), [-5.0, -1.0])
    value = lti.evaluate(g, 1j)
    assert value[0, 1] == 0 and value[1, 0] == 0


def test_rotation_symmetric_dq_matrix_is_diagonal_in_pm():
    a, b = 0.3, -1.2
    g = lti.real_to_pm(lti.make_static([[a, -b], [b, a]]))
    assert_allclose(g.D, np.diag([a + 1j * b, a - 1j * b]), atol=1e-15)
    assert g.real_equivalent
    assert_allclose(lti.pm_to_real(g).D, [[a, -b], [b, a]], atol=1e-15)


def test_frequency_response_samples_signed_frequencies():
    samples = lti.frequency_response(first_order(-1.0), [-2.0, 2.0])
    assert [sample.frequency for sample in samples] == [-2.0, 2.0]
    assert_allclose(samples[1].value, [[1.0 / (4j * np.pi + 1.0)]])


def test_rcond_of_singular_matrix():
    assert lti.rcond(np.zeros((2, 2))) == 0.0
    assert lti.rcond(np.eye(3)) == pytest.approx(1.0)
    assert lti.rcond(np.zeros((0, 0))) == 1.0


def random_system(rng, poles):
    n = len(poles)
    return lti.LtiSystem(
        np.diag(poles),
        rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2)),
        rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n)),
        np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))),
    )


def test_compositions_evaluate_like_matrix_algebra():
    rng = np.random.default_rng(11)
    g = random_system(rng, [-3.0, -8.0 + 40j, -8.0 - 40j])
    h = random_system(rng, [-5.0, -20.0 + 300j])
    combined = {
        "series": lti.series(g, h),
        "add": lti.add(g, h),
        "feedback": lti.feedback(g, h),
        "inverse": lti.inverse(g),
        "negate": lti.negate(h),
    }
    points = rng.uniform(-1.0, 1.0, 24) + 1j * rng.uniform(-500.0, 500.0, 24)
    for s in points:
        G, H = lti.evaluate(g, s), lti.evaluate(h, s)
        expected = {
            "series": G @ H,
            "add": G + H,
            "feedback": G @ np.linalg.inv(np.eye(2) + H @ G),
            "inverse": np.linalg.inv(G),
            "negate": -H,
        }
        for name, sys in combined.items():
            assert_allclose(lti.evaluate(sys, s), expected[name], rtol=1e-7, atol=1e-10, err_msg=name)


def test_double_inverse_keeps_the_poles():
    rng = np.random.default_rng(5)
    g = random_system(rng, [-3.0, -8.0 + 40j, -8.0 - 40j, -0.5])
    twice = lti.inverse(lti.inverse(g))
    assert_allclose(lti.poles(twice), lti.poles(g), atol=1e-8)
    for s in S_VALUES:
        assert_allclose(lti.evaluate(twice, s), lti.evaluate(g, s), rtol=1e-9)
