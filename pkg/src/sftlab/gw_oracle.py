"""Independent brute-force oracles for genus-0 descendant correlators.

These deliberately avoid the recursion machinery of :mod:`sftlab.gw`: the
point-target oracle runs the bare forgetful-point recursion (remove one
level-0 insertion, lower each other level by one, sum), and the two-point
toy model is evaluated by splitting into its two idempotent branches.
Reconstruction output is tested against these values.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial


@lru_cache(maxsize=None)
def point_correlator(levels: tuple) -> Fraction:
    """<tau_{a_1} ... tau_{a_n}> for the point target, by removing one
    level-0 insertion at a time."""
    levels = tuple(sorted(levels))
    n = len(levels)
    if n < 3 or sum(levels) != n - 3:
        return Fraction(0)
    if n == 3:
        return Fraction(1)  # three level-0 points
    assert levels[0] == 0  # sum(levels) = n-3 < n forces a level-0 entry
    rest = levels[1:]
    total = Fraction(0)
    for i, a in enumerate(rest):
        if a >= 1:
            total += point_correlator(rest[:i] + (a - 1,) + rest[i + 1:])
    return total


def point_correlator_closed_form(levels: tuple) -> Fraction:
    """(n-3)! / prod(a_i!) when the levels sum to n-3, else 0."""
    n = len(levels)
    if n < 3 or sum(levels) != n - 3:
        return Fraction(0)
    denom = 1
    for a in levels:
        denom *= factorial(a)
    return Fraction(factorial(n - 3), denom)


def two_point_correlator(insertions) -> Fraction:
    """Toy Frobenius model of two points in the basis {1, x}, x*x = 1.

    insertions: iterable of (class, level) with class "1" or "x".  The
    model splits into the idempotent branches e0 = (1+x)/2, e1 = (1-x)/2,
    each a copy of the point; the branch values are weighted by the
    coordinate products (+-1), so the total is 2 * point value when the
    number of x-insertions is even, else 0.
    """
    ins = list(insertions)
    levels = tuple(a for _, a in ins)
    x_count = sum(1 for cls, _ in ins if cls == "x")
    if x_count % 2:
        return Fraction(0)
    return 2 * point_correlator(levels)
