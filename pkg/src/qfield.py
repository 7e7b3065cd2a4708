from typing import Dict, Iterable, Optional, Union
from dataclasses import dataclass
from fractions import Fraction
import logging

from sympy import sympify
from sympy.polys.domains import ZZ
from sympy.polys.fields import FracElement, field
from sympy.polys.rings import PolyElement

logger = logging.getLogger(__name__)

# The scalar field Q(q): fractions of integer polynomials, cancelled on construction.
QFIELD, QGEN = field("q", ZZ)
QRING = QFIELD.ring
DOMAIN = QFIELD.to_domain()

Laurent = Dict[int, int]


class QFieldError(ArithmeticError):
    """Base class for arithmetic failures in Q(q)"""


class DivisionByZero(QFieldError, ZeroDivisionError):
    """Raised when dividing by the zero rational function"""

    def __init__(self, message: str = "division by zero in ℚ(q)"):
        super().__init__(message)


class PoleError(QFieldError):
    """Raised when a rational function is evaluated at one of its poles"""


def _poly(value) -> "QRING.dtype":
    """Coerce an int, a coefficient list (ascending powers) or a ring element into Z[q]"""
    if isinstance(value, PolyElement) and value.ring == QRING:
        return value
    if isinstance(value, int):
        return QRING(value)
    if isinstance(value, (list, tuple)):
        return QRING.from_dict({(k,): int(c) for k, c in enumerate(value) if c})
    raise TypeError(f"cannot read {value!r} as a polynomial in q")


@dataclass(frozen=True)
class RatFunc:
    """Immutable element of Q(q) in canonical reduced form"""
    value: "QFIELD.dtype"

    # Construction

    @classmethod
    def normalize(cls, num, den=1) -> "RatFunc":
        num_p, den_p = _poly(num), _poly(den)
        if not den_p:
            raise DivisionByZero()
        return cls(QFIELD.new(num_p, den_p))

    @classmethod
    def coerce(cls, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value
        if isinstance(value, FracElement) and value.field == QFIELD:
            return cls(value)
        if isinstance(value, int):
            return cls(QFIELD(value))
        if isinstance(value, Fraction):
            return cls.normalize(value.numerator, value.denominator)
        raise TypeError(f"cannot coerce {value!r} into ℚ(q)")

    @classmethod
    def q_power(cls, exponent: int) -> "RatFunc":
        return cls.from_laurent({exponent: 1})

    @classmethod
    def from_laurent(cls, terms: Laurent) -> "RatFunc":
        return cls(laurent_to_field(terms))

    @classmethod
    def parse(cls, text: str) -> "RatFunc":
        """Read the textual form used in reports, e.g. "(q^2-1)/q" """
        expr = sympify(text.replace("^", "**"), locals={"q": sympify("q")})
        return cls(QFIELD.from_expr(expr))

    # Accessors

    @property
    def numerator(self):
        return self.value.numer

    @property
    def denominator(self):
        return self.value.denom

    def is_zero(self) -> bool:
        return not self.value

    def to_laurent(self) -> Optional[Laurent]:
        """Return {exponent: coefficient} when the denominator is a monomial, else None"""
        return field_to_laurent(self.value)

    # Arithmetic

    def __add__(self, other) -> "RatFunc":
        return RatFunc(self.value + RatFunc.coerce(other).value)

    __radd__ = __add__

    def __sub__(self, other) -> "RatFunc":
        return RatFunc(self.value - RatFunc.coerce(other).value)

    def __rsub__(self, other) -> "RatFunc":
        return RatFunc(RatFunc.coerce(other).value - self.value)

    def __mul__(self, other) -> "RatFunc":
        return RatFunc(self.value * RatFunc.coerce(other).value)

    __rmul__ = __mul__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.value)

    def inv(self) -> "RatFunc":
        if not self.value:
            raise DivisionByZero()
        return RatFunc(1 / self.value)

    def __truediv__(self, other) -> "RatFunc":
        return self * RatFunc.coerce(other).inv()

    def __pow__(self, exponent: int) -> "RatFunc":
        if exponent < 0:
            return self.inv() ** (-exponent)
        return RatFunc(self.value ** exponent)

    def __eq__(self, other) -> bool:
        try:
            return self.value == RatFunc.coerce(other).value
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def evaluate_at(self, q0) -> Fraction:
        q0 = Fraction(q0)
        den = _evaluate_poly(self.denominator, q0)
        if den == 0:
            raise PoleError(f"pole of {self} at q = {q0}")
        return _evaluate_poly(self.numerator, q0) / den

    def __str__(self) -> str:
        return format_field_element(self.value)

    def __repr__(self) -> str:
        return f"RatFunc({self})"


ZERO = RatFunc(QFIELD(0))
ONE = RatFunc(QFIELD(1))
Q = RatFunc(QGEN)
QHAT = RatFunc(QGEN - 1 / QGEN)


# Functional forms

def normalize(num, den=1) -> RatFunc:
    return RatFunc.normalize(num, den)


def add(a: RatFunc, b: RatFunc) -> RatFunc:
    return a + b


def mul(a: RatFunc, b: RatFunc) -> RatFunc:
    return a * b


def neg(a: RatFunc) -> RatFunc:
    return -a


def inv(a: RatFunc) -> RatFunc:
    return a.inv()


def evaluate_at(f: RatFunc, q0) -> Fraction:
    return f.evaluate_at(q0)


# Text form

def _format_poly(poly) -> str:
    terms = sorted(poly.terms(), key=lambda t: -t[0][0])
    pieces = []
    for (exp,), coeff in terms:
        coeff = int(coeff)
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        if exp == 0:
            body = str(mag)
        else:
            power = "q" if exp == 1 else f"q^{exp}"
            body = power if mag == 1 else f"{mag}*{power}"
        pieces.append((sign, body))
    if not pieces:
        return "0"
    first_sign, first_body = pieces[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in pieces[1:]:
        text += f"{sign}{body}"
    return text


def format_field_element(value) -> str:
    num, den = value.numer, value.denom
    num_text = _format_poly(num)
    if den == 1:
        return num_text
    den_text = _format_poly(den)
    if len(num.terms()) > 1:
        num_text = f"({num_text})"
    if len(den.terms()) > 1 or "*" in den_text:
        den_text = f"({den_text})"
    return f"{num_text}/{den_text}"


def _evaluate_poly(poly, q0: Fraction) -> Fraction:
    total = Fraction(0)
    for (exp,), coeff in poly.terms():
        total += int(coeff) * q0 ** exp
    return total


# Laurent polynomials as {exponent: coefficient}; the pairing hot path stays in this form.

def laurent_add(target: Laurent, source: Laurent, coeff: int = 1, shift: int = 0) -> Laurent:
    """In place: target += coeff * q^shift * source"""
    for exp, c in source.items():
        key = exp + shift
        value = target.get(key, 0) + coeff * c
        if value:
            target[key] = value
        else:
            target.pop(key, None)
    return target


def laurent_mul(a: Laurent, b: Laurent) -> Laurent:
    result: Laurent = {}
    for ea, ca in a.items():
        laurent_add(result, b, ca, ea)
    return result


def laurent_evaluate(terms: Laurent, q0: Fraction) -> Fraction:
    return sum((c * Fraction(q0) ** e for e, c in terms.items()), Fraction(0))


def laurent_to_field(terms: Laurent):
    if not terms:
        return QFIELD(0)
    low = min(terms)
    if low >= 0:
        return QFIELD(QRING.from_dict({(e,): c for e, c in terms.items()}))
    num = QRING.from_dict({(e - low,): c for e, c in terms.items()})
    return QFIELD.new(num, QRING.from_dict({(-low,): 1}))


def field_to_laurent(value) -> Optional[Laurent]:
    den_terms = value.denom.terms()
    if len(den_terms) != 1:
        return None
    ((den_exp,), den_coeff), = den_terms
    result: Laurent = {}
    for (exp,), coeff in value.numer.terms():
        c = Fraction(int(coeff), int(den_coeff))
        if c.denominator != 1:
            return None
        result[exp - den_exp] = int(c)
    return result


def laurent_text(terms: Laurent) -> str:
    return format_field_element(laurent_to_field(terms))


def sum_ratfuncs(values: Iterable[RatFunc]) -> RatFunc:
    total = QFIELD(0)
    for value in values:
        total += value.value
    return RatFunc(total)


Scalar = Union[RatFunc, int]
