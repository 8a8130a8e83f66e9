"""Quadrature rules on the reference triangle and the unit interval."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on a reference element.

    Triangle rules store barycentric points ``(nq, 3)`` with weights summing to
    the reference triangle area 1/2.  Interval rules store points ``(nq,)`` in
    ``[0, 1]`` with weights summing to 1.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int
    measure: float


def triangle_rule(degree: int = 4) -> QuadratureRule:
    if degree <= 1:
        return QuadratureRule(np.full((1, 3), 1.0 / 3.0), np.array([0.5]), 1, 0.5)
    if degree == 2:
        pts = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
        return QuadratureRule(pts, np.full(3, 1.0 / 6.0), 2, 0.5)
    if degree <= 4:
        # Dunavant, 6 points
        a, wa = 0.445948490915964886, 0.223381589678011466
        b, wb = 0.091576213509770743, 0.109951743655321868
        pts = np.array([
            [a, a, 1 - 2 * a], [a, 1 - 2 * a, a], [1 - 2 * a, a, a],
            [b, b, 1 - 2 * b], [b, 1 - 2 * b, b], [1 - 2 * b, b, b],
        ])
        w = 0.5 * np.array([wa, wa, wa, wb, wb, wb])
        return QuadratureRule(pts, w, 4, 0.5)
    raise ValueError("no triangle rule of degree {}".format(degree))


def interval_rule(degree: int = 3) -> QuadratureRule:
    n = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * n - 1, 1.0)
