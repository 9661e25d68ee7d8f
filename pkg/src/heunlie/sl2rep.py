"""Spin-j realization of sl(2) by first-order differential operators, formal
words in the enveloping algebra, and the Moebius-action utilities used by the
reports.

The three generators at spin j are

    Jp = z^2 D - 2 j z,      J0 = z D - j,      Jm = D.

Formal quadratic expressions in these letters are kept exactly as written
(no normal-ordering); equality questions are settled by expanding to a
differential operator.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from typing import Iterable, Union

from .algpoly import (
    CR_ONE,
    CR_ZERO,
    CRat,
    DiffOp,
    Polynomial,
    op_compose,
)

__all__ = [
    "Spin",
    "UEAExpr",
    "Mat2",
    "PoleError",
    "make_generators",
    "uea_expand",
    "mobius_apply",
    "group_action",
    "measure_jacobian",
    "LETTERS",
]

#: generator letters, in the order (raising, neutral, lowering)
LETTERS = ("+", "0", "-")


class PoleError(ArithmeticError):
    """A fractional-linear map was evaluated at its pole (image is infinite)."""


class Spin:
    """Spin parameter j with 2j an integer; j = n/2 covers every case used here."""

    __slots__ = ("j",)

    def __init__(self, j: Union[int, Fraction, "Spin"]):
        if isinstance(j, Spin):
            j = j.j
        j = Fraction(j)
        if (2 * j).denominator != 1:
            raise ValueError(f"2j must be an integer, got j={j}")
        object.__setattr__(self, "j", j)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Spin is immutable")

    @classmethod
    def from_n(cls, n: int) -> "Spin":
        return cls(Fraction(n, 2))

    @property
    def n(self) -> int:
        """The integer 2j."""
        return int(2 * self.j)

    def __eq__(self, other):
        if isinstance(other, Spin):
            return self.j == other.j
        if isinstance(other, (int, Fraction)):
            return self.j == other
        return NotImplemented

    def __hash__(self):
        return hash(self.j)

    def __repr__(self):
        return f"Spin({self.j})"


def _as_spin(j) -> Spin:
    return j if isinstance(j, Spin) else Spin(j)


def make_generators(j) -> tuple[DiffOp, DiffOp, DiffOp]:
    """The spin-j triple (Jp, J0, Jm) = (z^2 D - 2jz, z D - j, D)."""
    j = _as_spin(j).j
    z2 = Polynomial.monomial(2)
    z1 = Polynomial.variable()
    jp = DiffOp.from_term(z2, 1) + DiffOp.from_term(z1 * CRat(-2 * j), 0)
    j0 = DiffOp.from_term(z1, 1) + DiffOp.from_term(Polynomial([-j]), 0)
    jm = DiffOp.d()
    return jp, j0, jm


class UEAExpr:
    """Formal linear combination of words in {Jp, J0, Jm} plus a constant.

    Words are stored exactly as written; empty words fold into the constant
    and zero-coefficient words are dropped.
    """

    __slots__ = ("words", "constant")

    def __init__(self, words: Iterable = (), constant=0):
        const = CRat.from_value(constant)
        kept = []
        for coeff, letters in words:
            coeff = CRat.from_value(coeff)
            letters = "".join(letters)
            if any(ch not in LETTERS for ch in letters):
                raise ValueError(f"unknown generator letter in word {letters!r}")
            if not letters:
                const = const + coeff
            elif not coeff.is_zero():
                kept.append((coeff, letters))
        object.__setattr__(self, "words", tuple(kept))
        object.__setattr__(self, "constant", const)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("UEAExpr is immutable")

    def coefficient(self, letters: str) -> CRat:
        """Sum of coefficients attached to the word ``letters`` as written."""
        total = CR_ZERO
        for coeff, word in self.words:
            if word == letters:
                total = total + coeff
        return total

    def drop_word(self, letters: str) -> "UEAExpr":
        return UEAExpr(
            [(c, w) for c, w in self.words if w != letters], self.constant
        )

    def __add__(self, other: "UEAExpr") -> "UEAExpr":
        return UEAExpr(self.words + other.words, self.constant + other.constant)

    def __eq__(self, other):
        if not isinstance(other, UEAExpr):
            return NotImplemented
        return self.words == other.words and self.constant == other.constant

    def __hash__(self):
        return hash((self.words, self.constant))

    def __str__(self) -> str:
        chunks = [f"{_coeff_text(c)} * {w}" for c, w in self.words]
        if not self.constant.is_zero() or not chunks:
            chunks.append(_coeff_text(self.constant))
        return " + ".join(chunks)

    def __repr__(self):
        return f"UEAExpr({str(self)!r})"

    @classmethod
    def parse(cls, text: str) -> "UEAExpr":
        """Parse the ``coeff * W`` grammar with W a word over {+, 0, -}.

        Terms are separated by `` + `` (space, plus, space); a bare
        coefficient is the constant term, e.g. ``1/2 * +0 + 1/2 * 0+ + (-1)``.
        """
        words = []
        constant = CR_ZERO
        s = text.strip()
        if not s:
            return cls()
        for chunk in s.split(" + "):
            chunk = chunk.strip()
            if "*" in chunk:
                coeff_txt, _, word = chunk.partition("*")
                word = word.strip()
                words.append((_parse_coeff(coeff_txt.strip()), word))
            else:
                constant = constant + _parse_coeff(chunk)
        return cls(words, constant)


def _coeff_text(c: CRat) -> str:
    s = str(c)
    return s if c.is_rational() and c.re >= 0 else f"({s})"


def _parse_coeff(text: str) -> CRat:
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    return CRat.parse(text)


def uea_expand(expr: UEAExpr, j) -> DiffOp:
    """Substitute the spin-j generators for the letters and expand."""
    jp, j0, jm = make_generators(j)
    table = {"+": jp, "0": j0, "-": jm}
    out = DiffOp.zero()
    for coeff, word in expr.words:
        ops = [table[ch] for ch in word]
        out = out + reduce(op_compose, ops) * coeff
    if not expr.constant.is_zero():
        out = out + DiffOp.identity() * expr.constant
    return out


class Mat2:
    """2x2 complex-rational matrix; unimodular (det = 1) unless built via
    :meth:`general`, which exists for the non-normalized section matrices."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d, *, _check: bool = True):
        a, b, c, d = (CRat.from_value(x) for x in (a, b, c, d))
        if _check and a * d - b * c != CR_ONE:
            raise ValueError(f"matrix determinant is {a * d - b * c}, expected 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Mat2 is immutable")

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @classmethod
    def general(cls, a, b, c, d) -> "Mat2":
        """Construct without the determinant check (projective use only)."""
        return cls(a, b, c, d, _check=False)

    @classmethod
    def section(cls, z) -> "Mat2":
        """The section matrix ((1, 1), (-z, 1)) mapping 0 to z under the
        group action; its determinant is 1 + z, so it is built unchecked."""
        return cls.general(1, 1, -CRat.from_value(z), 1)

    def det(self) -> CRat:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2.general(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self):
        return f"Mat2(({self.a}, {self.b}; {self.c}, {self.d}))"


def mobius_apply(g: Mat2, zeta) -> CRat:
    """Fractional-linear image ``(a zeta + b) / (c zeta + d)``."""
    zeta = CRat.from_value(zeta)
    den = g.c * zeta + g.d
    if den.is_zero():
        raise PoleError(f"Moebius map has a pole at {zeta}")
    return (g.a * zeta + g.b) / den


def group_action(g: Mat2, zeta) -> CRat:
    """The dual action ``g[zeta] = (d zeta - c) / (-b zeta + a)``."""
    zeta = CRat.from_value(zeta)
    den = -g.b * zeta + g.a
    if den.is_zero():
        raise PoleError(f"group action has a pole at {zeta}")
    return (g.d * zeta - g.c) / den


def measure_jacobian(g: Mat2, z) -> CRat:
    """Jacobian ``|c z + d|^-4`` of the planar measure under the Moebius map."""
    z = CRat.from_value(z)
    den = g.c * z + g.d
    if den.is_zero():
        raise PoleError(f"measure jacobian undefined at the pole {z}")
    return CRat(Fraction(1) / den.abs2() ** 2)
