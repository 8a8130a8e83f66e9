from math import factorial

import numpy as np
import pytest

from slipstokes.quadrature import interval_rule, triangle_rule


def exact_triangle(a, b):
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@pytest.mark.parametrize("degree", [1, 2, 4])
def test_triangle_rule_exactness(degree):
    rule = triangle_rule(degree)
    assert rule.degree >= degree
    assert rule.weights.sum() == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(rule.points.sum(axis=1), 1.0, atol=1e-15)
    x, y = rule.points[:, 1], rule.points[:, 2]
    for a in range(rule.degree + 1):
        for b in range(rule.degree + 1 - a):
            assert np.dot(rule.weights, x ** a * y ** b) == pytest.approx(exact_triangle(a, b), abs=1e-15)


def test_triangle_rule_not_exact_beyond_degree():
    rule = triangle_rule(4)
    x = rule.points[:, 1]
    assert abs(np.dot(rule.weights, x ** 6) - exact_triangle(6, 0)) > 1e-8


@pytest.mark.parametrize("degree", [1, 3, 5])
def test_interval_rule_exactness(degree):
    rule = interval_rule(degree)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    for k in range(degree + 1):
        assert np.dot(rule.weights, rule.points ** k) == pytest.approx(1.0 / (k + 1), abs=1e-15)


def test_default_edge_rule_is_two_point():
    assert len(interval_rule().points) == 2


def test_unsupported_degree():
    with pytest.raises(ValueError):
        triangle_rule(7)
