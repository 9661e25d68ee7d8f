"""Heun operator construction, Frobenius indicial data, enveloping-algebra
coefficient extraction with an independent expansion oracle, solvability
detection, and spectra on polynomial flags.

Ground truth for every coefficient formula audited here is the symbolic
expansion of the generator algebra; the audited formulas themselves live
only in :class:`DiscrepancyReport` rows, because several of them disagree
with the expansion (and with each other).  Each row records the published
value, the oracle value and their exact difference.

Sign convention: operators are stored with positive leading coefficient
``z (z - 1) (z - a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .algpoly import (
    CR_ONE,
    CR_ZERO,
    CRat,
    DiffOp,
    NEG_INF,
    Polynomial,
    Surd,
    op_apply,
    quadratic_roots,
)
from .sl2rep import Spin, UEAExpr, uea_expand

__all__ = [
    "HeunParams",
    "UEACoeffs",
    "ExpandedCoeffs",
    "Discrepancy",
    "DiscrepancyReport",
    "NotRegularSingular",
    "OverflowColumn",
    "OracleMismatch",
    "INFINITY",
    "check_constraint",
    "build_expanded",
    "build_canonical_cleared",
    "indicial_exponents",
    "uea_heun",
    "uea_heun_coeffs",
    "uea_es",
    "extract_expanded_coeffs",
    "verify_theorem1",
    "indicial_discrepancies",
    "es_discrepancies",
    "es_condition",
    "es_operator",
    "qes_matrix",
    "is_lower_triangular",
    "is_upper_triangular",
    "matrix_diagonal",
    "es_spectrum",
    "EIG_RESIDUAL_TOL",
]

#: relative residual bound for floating eigenpairs of non-triangular matrices
EIG_RESIDUAL_TOL = 1e-10


class NotRegularSingular(ValueError):
    """The requested point does not carry regular-singular Frobenius data."""


class OverflowColumn(RuntimeError):
    """A basis column left the degree-bounded space."""

    def __init__(self, column: int, degree: int, bound: int):
        self.column = column
        self.degree = degree
        self.bound = bound
        super().__init__(
            f"column z^{column} maps to degree {degree} > {bound}; "
            "the operator does not preserve this polynomial space"
        )


class OracleMismatch(AssertionError):
    """Internal cross-check failed; this is the CI tripwire, never expected."""


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INFINITY"


#: singular-point marker for the point at infinity
INFINITY = _Infinity()


class HeunParams:
    """The scalar data (a; q; alpha, beta, gamma, delta, epsilon).

    ``a`` must avoid 0 and 1 (the singular points must stay distinct).  The
    parameter constraint residual ``alpha + beta + 1 - gamma - delta -
    epsilon`` is exposed rather than enforced so that diagnostic inputs can
    be analyzed.
    """

    __slots__ = ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon")

    _FIELDS = ("a", "q", "alpha", "beta", "gamma", "delta", "epsilon")

    def __init__(self, a, q, alpha, beta, gamma, delta, epsilon):
        vals = [CRat.from_value(v) for v in (a, q, alpha, beta, gamma, delta, epsilon)]
        if vals[0] == CR_ZERO or vals[0] == CR_ONE:
            raise ValueError(f"a must avoid 0 and 1, got a={vals[0]}")
        for name, v in zip(self._FIELDS, vals):
            object.__setattr__(self, name, v)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("HeunParams is immutable")

    @property
    def constraint_residual(self) -> CRat:
        return self.alpha + self.beta + CR_ONE - self.gamma - self.delta - self.epsilon

    def as_dict(self) -> dict:
        return {name: str(getattr(self, name)) for name in self._FIELDS}

    @classmethod
    def from_strings(cls, **kw) -> "HeunParams":
        return cls(**{k: CRat.parse(v) if isinstance(v, str) else v for k, v in kw.items()})

    def __eq__(self, other):
        if not isinstance(other, HeunParams):
            return NotImplemented
        return all(getattr(self, f) == getattr(other, f) for f in self._FIELDS)

    def __hash__(self):
        return hash(tuple(getattr(self, f) for f in self._FIELDS))

    def __repr__(self):
        inner = ", ".join(f"{f}={getattr(self, f)}" for f in self._FIELDS)
        return f"HeunParams({inner})"


def check_constraint(p: HeunParams) -> CRat:
    """Residual ``alpha + beta + 1 - (gamma + delta + epsilon)``; 0 means satisfied."""
    return p.constraint_residual


def build_canonical_cleared(p: HeunParams) -> DiffOp:
    """Clear the canonical-form denominators by ``z (z-1) (z-a)``.

    Assembled from polynomial products of the linear factors, so this is an
    independent route to the same operator as :func:`build_expanded`.
    """
    z = Polynomial.variable()
    zm1 = z - Polynomial.one()
    zma = z - Polynomial([p.a])
    lead = z * zm1 * zma
    first = zm1 * zma * p.gamma + z * zma * p.delta + z * zm1 * p.epsilon
    zero = Polynomial([-p.q, p.alpha * p.beta])
    return DiffOp([zero, first, lead])


def build_expanded(p: HeunParams) -> DiffOp:
    """The operator with expanded coefficient lists:

    ``(z^3 - (1+a) z^2 + a z) D^2
      + [(g+d+e) z^2 - ((1+a) g + a d + e) z + g a] D + (ab z - q)``.

    The ``z``-coefficient of the first-order part is ``(1+a) gamma +
    a delta + epsilon``; evaluating the operator at the singular point 1
    must give ``delta (1 - a) D`` there, which pins the ``a delta`` term
    (see the ``eq3_linear_z_coeff`` discrepancy row for the variant that
    drops the factor ``a``).
    """
    one = CR_ONE
    lead = Polynomial([CR_ZERO, p.a, -(one + p.a), one])
    first = Polynomial(
        [
            p.gamma * p.a,
            -((one + p.a) * p.gamma + p.a * p.delta + p.epsilon),
            p.gamma + p.delta + p.epsilon,
        ]
    )
    zero = Polynomial([-p.q, p.alpha * p.beta])
    return DiffOp([zero, first, lead])


# -- Frobenius data ---------------------------------------------------------


def _reduced_value(poly: Polynomial, z0: CRat, k: int) -> CRat:
    """Value at z0 of ``poly / (z - z0)^k``; requires exact divisibility."""
    if poly.is_zero():
        return CR_ZERO
    for _ in range(k):
        poly, rem = poly.synthetic_division(z0)
        if not rem.is_zero():
            raise NotRegularSingular(
                f"coefficient fails the regular-singularity order condition at {z0}"
            )
    return poly.eval(z0)


def _finite_indicial(L: DiffOp, z0: CRat) -> tuple[Surd, Surd]:
    p2, p1, p0 = L.coeff(2), L.coeff(1), L.coeff(0)
    if p2.is_zero():
        raise NotRegularSingular("vanishing leading coefficient")
    s = p2.valuation_at(z0)
    if s < 1:
        raise NotRegularSingular(f"{z0} is an ordinary point (leading coefficient nonzero)")
    lead = _reduced_value(p2, z0, s)
    pc = _reduced_value(p1, z0, s - 1) / lead
    qc = (_reduced_value(p0, z0, s - 2) / lead) if s >= 2 else CR_ZERO
    # r (r - 1) + pc r + qc = 0
    return quadratic_roots(CR_ONE, pc - CR_ONE, qc)


def _invert_variable(L: DiffOp) -> DiffOp:
    """Transform under z -> 1/w and clear denominators.

    Each term ``p_k(z) D_z^k`` becomes ``[w^d p_k(1/w)] (-w^2 D_w)^k`` with
    ``d`` the maximal coefficient degree, so exponents at infinity become the
    indicial exponents of the result at ``w = 0``.
    """
    degs = [int(t.degree) for t in L.terms if not t.is_zero()]
    if not degs:
        return DiffOp.zero()
    d = max(degs)
    w2 = Polynomial.monomial(2, -1)
    neg_w2_d = DiffOp.from_term(w2, 0) @ DiffOp.d()
    out = DiffOp.zero()
    power = DiffOp.identity()
    for k, pk in enumerate(L.terms):
        if k:
            power = power @ neg_w2_d
        if pk.is_zero():
            continue
        out = out + DiffOp.from_term(pk.reversed_through(d), 0) @ power
    return out


def indicial_exponents(L: DiffOp, point) -> tuple[Surd, Surd]:
    """Frobenius exponent pair of a second-order operator at a regular
    singular point (finite, or :data:`INFINITY`).

    Roots of the indicial quadratic are exact quadratic surds; rational
    exponents collapse to plain rationals.
    """
    if L.order != 2:
        raise NotRegularSingular("indicial data implemented for second-order operators")
    if point is INFINITY:
        return _finite_indicial(_invert_variable(L), CR_ZERO)
    return _finite_indicial(L, CRat.from_value(point))


# -- enveloping-algebra side -------------------------------------------------


@dataclass(frozen=True)
class UEACoeffs:
    """The seven scalars of the quadratic generator combination."""

    cPlusZero: CRat
    cPlusMinus: CRat
    cZeroMinus: CRat
    cPlus: CRat
    cZero: CRat
    cMinus: CRat
    cConst: CRat

    def as_dict(self) -> dict:
        return {
            "c_plus_zero": str(self.cPlusZero),
            "c_plus_minus": str(self.cPlusMinus),
            "c_zero_minus": str(self.cZeroMinus),
            "c_plus": str(self.cPlus),
            "c_zero": str(self.cZero),
            "c_minus": str(self.cMinus),
            "c_const": str(self.cConst),
        }


def uea_heun_coeffs(j, p: HeunParams) -> UEACoeffs:
    j = Spin(j).j
    one = CR_ONE
    two_j_m1 = CRat(2 * j - 1)
    c_plus = p.gamma + p.delta + p.epsilon + CRat(Fraction(3, 2)) * two_j_m1
    c_zero = (two_j_m1 - p.gamma) * (one + p.a) - p.delta - p.epsilon
    c_minus = p.a * (p.gamma - two_j_m1 / CRat(2))
    c_const = (
        CRat(j) * ((CRat(2 * (1 - j)) + p.gamma) * (one + p.a) + p.delta + p.epsilon)
        - p.q
    )
    return UEACoeffs(
        cPlusZero=CRat(Fraction(1, 2)),
        cPlusMinus=-(one + p.a) / CRat(2),
        cZeroMinus=p.a / CRat(2),
        cPlus=c_plus,
        cZero=c_zero,
        cMinus=c_minus,
        cConst=c_const,
    )


def _uea_from_coeffs(c: UEACoeffs, *, with_plus: bool = True) -> UEAExpr:
    words = [
        (c.cPlusZero, "+0"),
        (c.cPlusZero, "0+"),
        (c.cPlusMinus, "+-"),
        (c.cPlusMinus, "-+"),
        (c.cZeroMinus, "0-"),
        (c.cZeroMinus, "-0"),
    ]
    if with_plus:
        words.append((c.cPlus, "+"))
    words.extend([(c.cZero, "0"), (c.cMinus, "-")])
    return UEAExpr(words, c.cConst)


def uea_heun(j, p: HeunParams) -> UEAExpr:
    """The quadratic generator combination for the full operator at spin j.

    The raising-grade admissibility residual is reported by
    :func:`verify_theorem1`, not enforced here.
    """
    return _uea_from_coeffs(uea_heun_coeffs(j, p))


def uea_es(j, p: HeunParams) -> UEAExpr:
    """Same combination with the linear raising term removed."""
    return _uea_from_coeffs(uea_heun_coeffs(j, p), with_plus=False)


@dataclass(frozen=True)
class ExpandedCoeffs:
    """Coefficients read off an expanded operator
    ``z(z-1)(z-a) D^2 + (rho z^2 + sigma z + tau) D + (ab z - qShift)``."""

    rho: CRat
    sigma: CRat
    tau: CRat
    abProduct: CRat
    qShift: CRat

    def as_dict(self) -> dict:
        return {
            "rho": str(self.rho),
            "sigma": str(self.sigma),
            "tau": str(self.tau),
            "ab_product": str(self.abProduct),
            "q_shift": str(self.qShift),
        }

    def assemble(self, a: CRat) -> DiffOp:
        one = CR_ONE
        lead = Polynomial([CR_ZERO, a, -(one + a), one])
        first = Polynomial([self.tau, self.sigma, self.rho])
        zero = Polynomial([-self.qShift, self.abProduct])
        return DiffOp([zero, first, lead])


def extract_expanded_coeffs(L: DiffOp, a) -> ExpandedCoeffs:
    """Read the five scalars off an operator in the expanded shape.

    Raises :class:`OracleMismatch` when the leading coefficient is not
    exactly ``z (z - 1) (z - a)`` or the lower parts exceed their degrees.
    """
    a = CRat.from_value(a)
    lead_expect = Polynomial([CR_ZERO, a, -(CR_ONE + a), CR_ONE])
    if L.coeff(2) != lead_expect or L.order != 2:
        raise OracleMismatch("operator is not in the expanded normal shape")
    first = L.coeff(1)
    zero = L.coeff(0)
    if first.degree > 2 or zero.degree > 1:
        raise OracleMismatch("lower-order coefficients exceed the normal shape degrees")
    return ExpandedCoeffs(
        rho=first.coeff(2),
        sigma=first.coeff(1),
        tau=first.coeff(0),
        abProduct=zero.coeff(1),
        qShift=-zero.coeff(0),
    )


# -- discrepancy bookkeeping --------------------------------------------------


@dataclass(frozen=True)
class Discrepancy:
    """One audited formula: its published value, the oracle value, and the
    exact residual ``published - oracle``."""

    name: str
    paper: CRat
    oracle: CRat

    @property
    def residual(self) -> CRat:
        return self.paper - self.oracle

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "paper": str(self.paper),
            "oracle": str(self.oracle),
            "residual": str(self.residual),
        }


class DiscrepancyReport:
    """Ordered collection of :class:`Discrepancy` rows."""

    def __init__(self, rows: Iterable[Discrepancy] = ()):
        self.rows = list(rows)

    def add(self, name: str, paper, oracle) -> None:
        self.rows.append(Discrepancy(name, CRat.from_value(paper), CRat.from_value(oracle)))

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def residual(self, name: str) -> CRat:
        for row in self.rows:
            if row.name == name:
                return row.residual
        raise KeyError(name)

    def as_list(self) -> list[dict]:
        return [row.as_dict() for row in self.rows]


def verify_theorem1(j, p: HeunParams) -> DiscrepancyReport:
    """Expand the spin-j generator combination and audit the published
    coefficient formulas (both the general-spin list and the reduced
    ``j = n/2`` list) against the expansion.

    The expansion itself is ground truth; nonzero residuals are the
    deliverable, not an error.
    """
    j = Spin(j).j
    n = CRat(2 * j)
    one = CR_ONE
    L = uea_expand(uea_heun(j, p), j)
    got = extract_expanded_coeffs(L, p.a)
    const = -got.qShift
    const_extra = const + p.q  # accessory shift produced by the expansion

    r = DiscrepancyReport()
    r.add("rho_general", p.gamma + p.delta + p.epsilon, got.rho)
    r.add("rho_constraint_form", p.alpha + p.beta + one, got.rho)
    r.add(
        "sigma_general",
        (CRat(2) * CRat(2 * j - 1) - p.gamma) * (p.a + one) - p.delta - p.epsilon,
        got.sigma,
    )
    r.add(
        "sigma_halfspin",
        (n - one - p.gamma) * (one + p.a) - p.delta - p.epsilon,
        got.sigma,
    )
    r.add("tau_general", p.a * (p.gamma - CRat(2 * j) + one), got.tau)
    r.add("tau_halfspin", p.a * (p.gamma - (n - one) / CRat(2)), got.tau)
    r.add(
        "ab_product_general",
        -CRat(2 * j) * (CRat(2 * j) + p.alpha + p.beta),
        got.abProduct,
    )
    r.add("ab_product_halfspin", n * (n - one) / CRat(2), got.abProduct)
    r.add(
        "q_general",
        CRat(j) * ((CRat(2 * (1 - j)) + p.gamma) * (one + p.a) - p.delta - p.epsilon),
        const_extra,
    )
    r.add(
        "q_halfspin_statement",
        -(n / CRat(2)) * (CRat(2) - n + p.gamma) * (one + p.a) - p.delta - p.epsilon,
        const_extra,
    )
    r.add(
        "q_halfspin_proof",
        -(n / CRat(2)) * ((n - p.gamma) * (one + p.a) - p.delta - p.epsilon),
        const_extra,
    )
    r.add(
        "jplus_coefficient",
        p.alpha + p.beta + CRat(3 * j) - CRat(Fraction(1, 2)),
        uea_heun_coeffs(j, p).cPlus,
    )
    r.add(
        "qes_membership_condition",
        CRat(8 * j * j) + CRat(2 * j) * (p.alpha + p.beta - one) + p.alpha * p.beta,
        p.alpha * p.beta - got.abProduct,
    )
    r.add(
        "eq3_linear_z_coeff",
        -((one + p.a) * p.gamma + p.delta + p.epsilon),
        -((one + p.a) * p.gamma + p.a * p.delta + p.epsilon),
    )
    return r


def indicial_discrepancies(p: HeunParams) -> DiscrepancyReport:
    """Audit the published exponent list against the Frobenius oracle on the
    expanded operator.  The published list pairs each finite singular point
    with the point itself as first exponent; the oracle has 0 there."""
    L = build_expanded(p)
    r = DiscrepancyReport()
    for label, point, printed_first, printed_second in (
        ("0", CR_ZERO, CR_ZERO, one_minus(p.gamma)),
        ("1", CR_ONE, CR_ONE, one_minus(p.delta)),
        ("a", p.a, p.a, one_minus(p.epsilon)),
    ):
        e1, e2 = indicial_exponents(L, point)
        first, second = _sorted_exponents(e1, e2)
        r.add(f"exponent_at_{label}_first", printed_first, _surd_to_crat(first))
        r.add(f"exponent_at_{label}_second", printed_second, _surd_to_crat(second))
    e1, e2 = indicial_exponents(L, INFINITY)
    # published pair at infinity is {infinity, alpha*beta}; the product of the
    # oracle exponents is comparable, the point label is not
    prod = _surd_product(e1, e2)
    r.add("exponent_at_inf_product", p.alpha * p.beta, prod)
    return r


def one_minus(x: CRat) -> CRat:
    return CR_ONE - x


def _sorted_exponents(e1: Surd, e2: Surd) -> tuple[Surd, Surd]:
    """Put an exact-zero exponent first when present (for report stability)."""
    if e2 == Surd(0):
        return e2, e1
    return e1, e2


def _surd_to_crat(s: Surd) -> CRat:
    if s.is_exact():
        return s.exact_value()
    raise NotRegularSingular(f"exponent {s} is irrational; no rational comparison")


def _surd_product(e1: Surd, e2: Surd) -> CRat:
    prod = e1 * e2
    return prod.exact_value() if prod.is_exact() else CR_ZERO


# -- solvability ---------------------------------------------------------------


def es_condition(j, p: HeunParams) -> CRat:
    """Residual ``alpha + beta + 3j - 1/2``; zero is the vanishing-raising
    grading (under the parameter constraint)."""
    j = Spin(j).j
    return p.alpha + p.beta + CRat(3 * j) - CRat(Fraction(1, 2))


def es_operator(n: int, p: HeunParams) -> DiffOp:
    """Expand the raising-free combination at spin ``j = n/2``, ``n >= 0``.

    Built from the generator algebra, never from the published coefficient
    list; the list is audited by :func:`es_discrepancies`.
    """
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    j = Spin.from_n(n).j
    return uea_expand(uea_es(j, p), j)


def expanded_es_coeffs(n: int, p: HeunParams) -> ExpandedCoeffs:
    """Exact scalars of the raising-free expansion at ``j = n/2``.

    Unlike :func:`es_operator` this accepts negative ``n``: the kernel and
    norm computations downstream are the only consumers of that range.
    """
    if not isinstance(n, int):
        raise ValueError(f"n must be an integer, got {n!r}")
    j = Spin.from_n(n).j
    L = uea_expand(uea_es(j, p), j)
    return extract_expanded_coeffs(L, p.a)


def es_discrepancies(n: int, p: HeunParams) -> DiscrepancyReport:
    """Audit the reduced-spin coefficient list and both published eigenvalue
    formulas against the raising-free expansion and its flag matrix."""
    one = CR_ONE
    ncr = CRat(n)
    got = expanded_es_coeffs(n, p)
    r = DiscrepancyReport()
    r.add("es_rho", CRat(Fraction(3 * (1 - n), 2)), got.rho)
    r.add("es_sigma", (ncr - one - p.gamma) * (one + p.a) - p.delta - p.epsilon, got.sigma)
    r.add("es_tau", p.a * (p.gamma - (ncr - one) / CRat(2)), got.tau)
    r.add("es_ab_product", ncr * (ncr - one) / CRat(2), got.abProduct)
    if n >= 0:
        M = qes_matrix(es_operator(n, p), n)
        diag0 = M[0][0]
        e_statement = ncr * ((CRat(2) - ncr + p.gamma) * (p.a + one) + p.delta + p.epsilon) - p.q
        e_proof = ncr * ((ncr - p.gamma) * (p.a + one) - p.delta - p.epsilon) - p.q
        r.add("E_statement_vs_entry00", e_statement, diag0)
        r.add("E_proof_vs_entry00", e_proof, diag0)
    return r


# -- polynomial-flag matrices ----------------------------------------------------


def qes_matrix(L: DiffOp, N: int) -> tuple[tuple[CRat, ...], ...]:
    """Matrix of ``L`` on the monomial basis 1, z, ..., z^N.

    ``M[r][c]`` is the coefficient of ``z^r`` in ``L(z^c)``.  Raises
    :class:`OverflowColumn` when any column leaves the degree bound.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    cols = []
    for c in range(N + 1):
        img = op_apply(L, Polynomial.monomial(c))
        if img.degree is not NEG_INF and img.degree > N:
            raise OverflowColumn(c, int(img.degree), N)
        cols.append([img.coeff(r) for r in range(N + 1)])
    return tuple(tuple(cols[c][r] for c in range(N + 1)) for r in range(N + 1))


def is_lower_triangular(M: Sequence[Sequence[CRat]]) -> bool:
    """True when every entry strictly above the diagonal is zero."""
    return all(
        M[r][c].is_zero() for r in range(len(M)) for c in range(r + 1, len(M))
    )


def is_upper_triangular(M: Sequence[Sequence[CRat]]) -> bool:
    """True when every entry strictly below the diagonal is zero."""
    return all(
        M[r][c].is_zero() for c in range(len(M)) for r in range(c + 1, len(M))
    )


def matrix_diagonal(M: Sequence[Sequence[CRat]]) -> list[CRat]:
    return [M[i][i] for i in range(len(M))]


def _float_eigenvalues(M: Sequence[Sequence[CRat]]) -> list[complex]:
    import numpy as np

    arr = np.array([[complex(x) for x in row] for row in M], dtype=complex)
    vals, vecs = np.linalg.eig(arr)
    scale = max(1.0, float(np.abs(arr).max()))
    for k in range(len(vals)):
        v = vecs[:, k]
        res = np.linalg.norm(arr @ v - vals[k] * v) / np.linalg.norm(v)
        if res > EIG_RESIDUAL_TOL * scale:
            raise OracleMismatch(
                f"eigenpair residual {res:.3e} exceeds {EIG_RESIDUAL_TOL:.1e} * scale"
            )
    return sorted((complex(v) for v in vals), key=lambda z: (z.real, z.imag))


def es_spectrum(n: int, p: HeunParams, N: int) -> list:
    """Spectrum of the raising-free operator on the degree-N monomial basis.

    Triangular matrices (either orientation) yield their diagonal exactly;
    anything else falls back to floating eigenvalues with a residual bound
    of :data:`EIG_RESIDUAL_TOL`.
    """
    M = qes_matrix(es_operator(n, p), N)
    if is_lower_triangular(M) or is_upper_triangular(M):
        return matrix_diagonal(M)
    return _float_eigenvalues(M)
