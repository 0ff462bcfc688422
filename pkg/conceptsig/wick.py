"""
Exact moments of standard Gaussian vectors (Isserlis/Wick).
E[prod r_i^{n_i}] = prod (n_i - 1)!! when every n_i is even, 0 otherwise.
"""
import itertools
import math
from collections import Counter
from typing import Sequence

import numpy as np  # type: ignore


def double_factorial(n: int) -> int:
    """n!! with (-1)!! = 0!! = 1"""
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def gaussian_moment(exponents: Sequence[int]) -> float:
    """E[prod_i r_i^exponents_i] for r ~ N(0, I)"""
    if any(int(n) % 2 for n in exponents):
        return 0.0
    return float(math.prod(double_factorial(int(n) - 1) for n in exponents))


def outer_form_expectation(diagonal: Sequence[float], power: int) -> np.ndarray:
    """
    E[r r^T (r^T A r)^power] for A = diag(diagonal), by expanding the power
    into monomials and applying :func:`gaussian_moment` term by term.
    The result is diagonal because every off-diagonal term has odd degree.

    :param diagonal: Diagonal of A
    :type diagonal: Sequence[float]
    :param power: Exponent of the quadratic form, at least 0
    :type power: int
    :return: d x d matrix
    :rtype: np.ndarray
    """
    diagonal = np.asarray(diagonal, dtype=float)
    d = diagonal.size
    result = np.zeros(d)
    for combo in itertools.combinations_with_replacement(range(d), power):
        counts = Counter(combo)
        multinomial = math.factorial(power) / math.prod(math.factorial(c) for c in counts.values())
        weight = multinomial * math.prod(diagonal[i] ** c for i, c in counts.items())
        for a in range(d):
            exponents = [2 * counts.get(i, 0) for i in range(d)]
            exponents[a] += 2
            result[a] += weight * gaussian_moment(exponents)
    return np.diag(result)
