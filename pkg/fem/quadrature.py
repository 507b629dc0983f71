"""
Simplex quadrature rules.

Grundmann-Moeller rules are generated rather than tabulated: the rule with
parameter s integrates polynomials of degree 2s + 1 exactly on the n-simplex.
Points are returned in barycentric coordinates and weights as fractions of the
simplex measure (they sum to one).
"""
import itertools
import math
from functools import lru_cache
from typing import Tuple

import numpy as np


@lru_cache(maxsize=None)
def grundmann_moeller(dimension: int, s: int) -> Tuple[np.ndarray, np.ndarray]:
    d = 2 * s + 1
    points, weights = [], []
    for i in range(s + 1):
        weight = (-1) ** i * 2.0 ** (-2 * s) * (d + dimension - 2 * i) ** d
        weight /= math.factorial(i) * math.factorial(d + dimension - i)
        for beta in itertools.product(range(s - i + 1), repeat=dimension + 1):
            if sum(beta) != s - i:
                continue
            points.append([(2 * b + 1) / (d + dimension - 2 * i) for b in beta])
            weights.append(weight)
    weights = np.array(weights) * math.factorial(dimension)
    return np.array(points), weights


def simplex_rule(dimension: int, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Smallest generated rule exact for the given polynomial degree."""
    s = max(0, math.ceil((degree - 1) / 2))
    return grundmann_moeller(dimension, s)


def tet_rule(degree: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    return simplex_rule(3, degree)


def triangle_rule(degree: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    return simplex_rule(2, degree)


def reference_monomial_integral(a: int, b: int, c: int) -> float:
    """Exact ∫ x^a y^b z^c over the unit right tet."""
    return math.factorial(a) * math.factorial(b) * math.factorial(c) / math.factorial(a + b + c + 3)
