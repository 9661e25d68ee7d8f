"""Shared random-draw helpers for the test suite (all draws are seeded)."""

from fractions import Fraction

from heunlie.algpoly import CRat, DiffOp, Polynomial
from heunlie.heunop import HeunParams


def rand_fraction(rng, span=9, den=5, nonzero=False) -> Fraction:
    while True:
        f = Fraction(rng.randint(-span, span), rng.randint(1, den))
        if f or not nonzero:
            return f


def rand_crat(rng, span=9, den=5, complex_ok=False) -> CRat:
    re = rand_fraction(rng, span, den)
    im = rand_fraction(rng, span, den) if complex_ok and rng.random() < 0.4 else Fraction(0)
    return CRat(re, im)


def rand_poly(rng, max_deg=4, complex_ok=False) -> Polynomial:
    deg = rng.randint(0, max_deg)
    return Polynomial([rand_crat(rng, complex_ok=complex_ok) for _ in range(deg + 1)])


def rand_op(rng, max_order=2, max_deg=2) -> DiffOp:
    order = rng.randint(0, max_order)
    return DiffOp([rand_poly(rng, max_deg) for _ in range(order + 1)])


def rand_params(rng, constrained=True) -> HeunParams:
    """Random rational parameter set; the constraint fixes epsilon when asked."""
    while True:
        a = rand_fraction(rng, nonzero=True)
        if a not in (0, 1):
            break
    q = rand_fraction(rng)
    alpha = rand_fraction(rng)
    beta = rand_fraction(rng)
    gamma = rand_fraction(rng)
    delta = rand_fraction(rng)
    if constrained:
        epsilon = alpha + beta + 1 - gamma - delta
    else:
        epsilon = rand_fraction(rng)
    return HeunParams(a=a, q=q, alpha=alpha, beta=beta, gamma=gamma,
                      delta=delta, epsilon=epsilon)


def es_params(n, a=Fraction(2), q=Fraction(1), gamma=Fraction(1, 3),
              delta=Fraction(1, 2)) -> HeunParams:
    """Parameters with zero raising-grade residual at spin n/2.

    alpha = -n and beta = (1-n)/2 make the raising condition and the
    parameter constraint hold simultaneously for any gamma, delta.
    """
    alpha = Fraction(-n)
    beta = Fraction(1 - n, 2)
    epsilon = alpha + beta + 1 - gamma - delta
    return HeunParams(a=a, q=q, alpha=alpha, beta=beta, gamma=gamma,
                      delta=delta, epsilon=epsilon)


def surds_match(pair, expected) -> bool:
    """Compare an exponent pair against expected values as an unordered pair."""
    e1, e2 = pair
    x1, x2 = expected
    return (e1 == x1 and e2 == x2) or (e1 == x2 and e2 == x1)
