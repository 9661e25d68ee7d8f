"""Distributional-solution machinery: weight expansion, falling factorials,
the two three-term recurrences obtained from the real and imaginary parts of
the transformed eigenequation, their printed closed-form root formulas, and
residual analysis of the closed-form claim.

The two recurrences, with ``(k)_m`` the falling factorial and ``l`` the
combined exponent offset, are

  real:  [(k+2)_(l+2) - a (k+2)_l] c_{k-2}
             - [rho (k+1)_(l+1) - tau (k+1)_(l-1)] c_{k-1}
             + ab (k)_l c_k                                  = 0

  imag:  -[(1+a) (k+2)_(l+1) - a (k+2)_l] c_{k-2}
             + sigma (k+1)_l c_{k-1} + E (k)_(l-1) c_k        = 0

Forward solves are exact over the complex rationals, so their residuals are
exactly zero.  The printed closed forms use per-k roots of the associated
quadratics; since those roots vary with k they do not satisfy the recurrence
in general, and :func:`residual_check` measures exactly how far off they are
instead of repairing the claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .algpoly import CR_ONE, CR_ZERO, CRat, Polynomial, Surd

__all__ = [
    "NonIntegerExponents",
    "DegenerateLeading",
    "WeightExpansion",
    "RecurrenceSpec",
    "CoeffSequence",
    "falling_factorial",
    "weight_expansion",
    "recur_real",
    "recur_imag",
    "forward_real",
    "forward_imag",
    "closed_form_roots_real",
    "closed_form_roots_imag",
    "paper_ck",
    "residual_check",
    "assemble_distribution",
]


class NonIntegerExponents(ValueError):
    """Weight exponents must be positive integers for the binomial table."""


class DegenerateLeading(ArithmeticError):
    """The term that the recurrence is solved for carries a zero factor."""


def falling_factorial(k: int, m: int) -> int:
    """``(k)_m = k (k-1) ... (k-m+1)``; the empty product (m=0) is 1."""
    if m < 0:
        raise ValueError(f"falling factorial needs m >= 0, got m={m}")
    out = 1
    for i in range(m):
        out *= k - i
    return out


class WeightExpansion:
    """Binomial expansion table of ``z^(rho-1) (z-1)^(sigma-1) (z-a)^(tau-1)``.

    ``h[m][n]`` multiplies ``z^(m + n + rho - 1)``; reassembling the table
    reproduces the product form exactly.
    """

    __slots__ = ("rho", "sigma", "tau", "a", "h")

    def __init__(self, rho: int, sigma: int, tau: int, a: CRat, h):
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "h", h)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("WeightExpansion is immutable")

    @property
    def exponent_offset(self) -> int:
        return self.rho - 1

    def entry(self, m: int, n: int) -> CRat:
        return self.h[m][n]

    def reassembled(self) -> Polynomial:
        """``sum h[m][n] z^(m+n+rho-1)`` as a polynomial."""
        out = Polynomial.zero()
        for m, row in enumerate(self.h):
            for n, c in enumerate(row):
                out = out + Polynomial.monomial(m + n + self.rho - 1, c)
        return out

    def value_at_zero(self) -> CRat:
        """Constant term of the reassembled weight: 0 whenever rho > 1."""
        return self.reassembled().coeff(0)

    def as_dict(self) -> dict:
        return {
            "rho": self.rho,
            "sigma": self.sigma,
            "tau": self.tau,
            "a": str(self.a),
            "h": [[str(c) for c in row] for row in self.h],
        }


def _positive_int(x, name: str) -> int:
    if isinstance(x, CRat):
        if not x.is_integer():
            raise NonIntegerExponents(f"{name} must be a positive integer, got {x}")
        x = int(x.re)
    if isinstance(x, int) and not isinstance(x, bool) and x >= 1:
        return x
    raise NonIntegerExponents(f"{name} must be a positive integer, got {x!r}")


def weight_expansion(rho, sigma, tau, a) -> WeightExpansion:
    """Full coefficient table

    ``h[m][n] = C(sigma-1, m) C(tau-1, n) (-1)^(sigma+tau+m+n) a^(tau-n-1)``

    for ``0 <= m <= sigma-1``, ``0 <= n <= tau-1``.
    """
    rho = _positive_int(rho, "rho")
    sigma = _positive_int(sigma, "sigma")
    tau = _positive_int(tau, "tau")
    a = CRat.from_value(a)
    if a == CR_ZERO or a == CR_ONE:
        raise ValueError(f"a must avoid 0 and 1, got {a}")
    h = []
    for m in range(sigma):
        row = []
        for n in range(tau):
            sign = -1 if (sigma + tau + m + n) % 2 else 1
            row.append(
                CRat(sign * math.comb(sigma - 1, m) * math.comb(tau - 1, n))
                * a ** (tau - n - 1)
            )
        h.append(tuple(row))
    return WeightExpansion(rho, sigma, tau, a, tuple(h))


@dataclass(frozen=True)
class RecurrenceSpec:
    """Scalar data of one recurrence instance: the exponent offset ``l`` and
    the operator scalars (rho, sigma, tau, ab, E, a)."""

    l: int
    rho: CRat
    sigma: CRat
    tau: CRat
    ab: CRat
    E: CRat
    a: CRat

    @classmethod
    def make(cls, l, rho=0, sigma=0, tau=0, ab=0, E=0, a=2) -> "RecurrenceSpec":
        return cls(
            l=int(l),
            rho=CRat.from_value(rho),
            sigma=CRat.from_value(sigma),
            tau=CRat.from_value(tau),
            ab=CRat.from_value(ab),
            E=CRat.from_value(E),
            a=CRat.from_value(a),
        )

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"exponent offset l must be >= 1, got {self.l}")

    def as_dict(self) -> dict:
        return {
            "l": self.l,
            "rho": str(self.rho),
            "sigma": str(self.sigma),
            "tau": str(self.tau),
            "ab": str(self.ab),
            "E": str(self.E),
            "a": str(self.a),
        }


Value = Union[CRat, complex]


def _coerce_value(x) -> Value:
    if isinstance(x, (CRat, complex)):
        return x
    if isinstance(x, float):
        return complex(x)
    return CRat.from_value(x)


def _real_brackets(spec: RecurrenceSpec, k: int) -> tuple[CRat, CRat, CRat]:
    """(A, B, C) with the real recurrence reading A c_{k-2} - B c_{k-1} + C c_k = 0."""
    l = spec.l
    A = CRat(falling_factorial(k + 2, l + 2)) - spec.a * CRat(falling_factorial(k + 2, l))
    B = spec.rho * CRat(falling_factorial(k + 1, l + 1)) - spec.tau * CRat(
        falling_factorial(k + 1, l - 1)
    )
    C = spec.ab * CRat(falling_factorial(k, l))
    return A, B, C


def _imag_brackets(spec: RecurrenceSpec, k: int) -> tuple[CRat, CRat, CRat]:
    """(A, B, C) with the imaginary recurrence reading -A c_{k-2} + B c_{k-1} + C c_k = 0."""
    l = spec.l
    A = (CR_ONE + spec.a) * CRat(falling_factorial(k + 2, l + 1)) - spec.a * CRat(
        falling_factorial(k + 2, l)
    )
    B = CRat(falling_factorial(k + 1, l)) * spec.sigma
    C = spec.E * CRat(falling_factorial(k, l - 1))
    return A, B, C


def recur_real(spec: RecurrenceSpec, c_km2, c_km1, k: int) -> Value:
    """Solve the real-part recurrence for ``c_k``.

    Degenerate for ``k < l`` (the leading falling factorial vanishes) and
    for ``ab = 0``.
    """
    A, B, C = _real_brackets(spec, k)
    if C.is_zero():
        raise DegenerateLeading(
            f"ab * (k)_l = 0 at k={k}, l={spec.l}; c_k is not determined here"
        )
    return (B * _coerce_value(c_km1) - A * _coerce_value(c_km2)) / C


def recur_imag(spec: RecurrenceSpec, c_km2, c_km1, k: int) -> Value:
    """Solve the imaginary-part recurrence for ``c_k``.

    Degenerate for ``k < l - 1`` and for ``E = 0``.
    """
    A, B, C = _imag_brackets(spec, k)
    if C.is_zero():
        raise DegenerateLeading(
            f"E * (k)_(l-1) = 0 at k={k}, l={spec.l}; c_k is not determined here"
        )
    return (A * _coerce_value(c_km2) - B * _coerce_value(c_km1)) / C


@dataclass(frozen=True)
class CoeffSequence:
    """Finite truncation c_0, ..., c_K of a delta-derivative coefficient series."""

    values: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k: int):
        return self.values[k]

    def as_list(self) -> list:
        out = []
        for v in self.values:
            if isinstance(v, CRat):
                out.append(str(v))
            elif isinstance(v, Surd):
                out.append(str(v))
            else:
                out.append([v.real, v.imag])
        return out


def _forward(spec, c0, c1, K, start, step) -> CoeffSequence:
    if K < 1:
        raise ValueError("truncation K must be at least 1")
    vals = [_coerce_value(c0), _coerce_value(c1)]
    for k in range(2, K + 1):
        if k < start:
            # recurrence does not determine this band; take the minimal choice
            vals.append(CR_ZERO)
        else:
            vals.append(step(spec, vals[k - 2], vals[k - 1], k))
    return CoeffSequence(tuple(vals))


def forward_real(spec: RecurrenceSpec, c0=1, c1=0, K: int = 32) -> CoeffSequence:
    """Forward solve of the real-part recurrence; indices below ``l`` that the
    recurrence cannot determine are filled with zero."""
    return _forward(spec, c0, c1, K, max(2, spec.l), recur_real)


def forward_imag(spec: RecurrenceSpec, c0=1, c1=0, K: int = 32) -> CoeffSequence:
    """Forward solve of the imaginary-part recurrence (valid from ``l - 1``)."""
    return _forward(spec, c0, c1, K, max(2, spec.l - 1), recur_imag)


def closed_form_roots_real(spec: RecurrenceSpec, k: int) -> tuple[CRat, Surd]:
    """The printed root parts (center, half-spread) of the quadratic

    ``ab (k)_l s^2 - [rho (k+1)_(l+1) - tau (k+1)_(l-1)] s
      + [(k+2)_(l+2) - a (k+2)_l] = 0``;

    ``center +- spread`` are its exact roots (the spread is an exact surd,
    principal branch when evaluated numerically).
    """
    A, B, C = _real_brackets(spec, k)
    if C.is_zero():
        raise DegenerateLeading(f"ab * (k)_l = 0 at k={k}, l={spec.l}")
    center = B / (CRat(2) * C)
    disc = B * B - CRat(4) * C * A
    spread = Surd(0, CR_ONE / (CRat(2) * C), disc)
    return center, spread


def closed_form_roots_imag(spec: RecurrenceSpec, k: int) -> tuple[CRat, Surd]:
    """The printed root parts for the imaginary-branch quadratic

    ``E (k)_(l-1) t^2 + sigma (k+1)_l t - [(1+a)(k+2)_(l+1) - a (k+2)_l] = 0``.

    The printed half-spread lacks the conventional 1/2 factor, so
    ``center +- spread`` generally does *not* solve the quadratic; it is
    implemented exactly as printed and the substitution residual is left to
    :func:`residual_check`-style auditing in the callers.
    """
    A, B, C = _imag_brackets(spec, k)
    if C.is_zero():
        raise DegenerateLeading(f"E * (k)_(l-1) = 0 at k={k}, l={spec.l}")
    center = -B / C
    # discriminant exactly as printed; the quadratic's constant term is -A,
    # so the conventional discriminant would be B^2 + 4*C*A instead
    disc = B * B - CRat(4) * C * A
    spread = Surd(0, CR_ONE / C, disc)
    return center, spread


RootsFn = Callable[[RecurrenceSpec, int], tuple]


def paper_ck(A, B, roots_fn: RootsFn, spec: RecurrenceSpec, K: int,
             start: int = 0) -> CoeffSequence:
    """Evaluate the printed closed form

    ``c_k = A (r1_k + r2_k)^k + B (r1_k - r2_k)^k``,   ``A + B = 1``,

    with per-k roots supplied by ``roots_fn``.  Exact whenever the pieces
    stay in one radical field; degenerate indices propagate.  The root
    formulas are degenerate below the admissible range (``k < l`` on the
    real branch), so ``start`` can defer the closed form to that range;
    entries below ``start`` are zero.
    """
    A = _coerce_value(A)
    B = _coerce_value(B)
    if not _sums_to_one(A, B):
        raise ValueError("closed-form weights must satisfy A + B = 1")
    vals = []
    for k in range(K + 1):
        if k < start:
            vals.append(CR_ZERO)
            continue
        center, spread = roots_fn(spec, k)
        plus = _as_surd(center) + _as_surd(spread)
        minus = _as_surd(center) - _as_surd(spread)
        if isinstance(A, CRat) and isinstance(B, CRat):
            term = A * (plus ** k) + B * (minus ** k)
            vals.append(term.exact_value() if isinstance(term, Surd) and term.is_exact() else term)
        else:
            vals.append(A * complex(plus) ** k + B * complex(minus) ** k)
    return CoeffSequence(tuple(vals))


def _sums_to_one(A, B) -> bool:
    if isinstance(A, CRat) and isinstance(B, CRat):
        return A + B == CR_ONE
    return abs(complex(A) + complex(B) - 1.0) < 1e-12


def _as_surd(x) -> Surd:
    return x if isinstance(x, Surd) else Surd.from_value(x)


def residual_check(c: CoeffSequence, spec: RecurrenceSpec, which: str) -> list[tuple[int, Value]]:
    """Left-hand side of the chosen recurrence on each admissible index.

    Admissible means the recurrence's own validity range: ``k >= l`` for the
    real branch, ``k >= l - 1`` for the imaginary one (and ``k >= 2`` so all
    three entries exist).  Exact zero residuals certify a true solution.
    """
    if len(c) < 3:
        raise ValueError("need at least c_0, c_1, c_2 to evaluate residuals")
    if which == "real":
        start = max(2, spec.l)
        brackets = _real_brackets
        signs = (1, -1, 1)
    elif which == "imag":
        start = max(2, spec.l - 1)
        brackets = _imag_brackets
        signs = (-1, 1, 1)
    else:
        raise ValueError(f"branch must be 'real' or 'imag', got {which!r}")
    out = []
    for k in range(start, len(c)):
        A, B, C = brackets(spec, k)
        vals = [_residual_ready(c[k - 2]), _residual_ready(c[k - 1]), _residual_ready(c[k])]
        if all(isinstance(v, CRat) for v in vals):
            res: Value = signs[0] * A * vals[0] + signs[1] * B * vals[1] + signs[2] * C * vals[2]
        else:
            res = (
                signs[0] * complex(A) * complex(vals[0])
                + signs[1] * complex(B) * complex(vals[1])
                + signs[2] * complex(C) * complex(vals[2])
            )
        out.append((k, res))
    return out


def _residual_ready(v):
    if isinstance(v, Surd):
        return v.exact_value() if v.is_exact() else complex(v)
    return v


def assemble_distribution(c: CoeffSequence):
    """Package the sequence as ``sum_k c_k delta^(k)`` centered at 0."""
    from .greenssf import Distribution

    return Distribution([(k, CR_ZERO, _residual_ready(v)) for k, v in enumerate(c.values)])
