"""
Exact arithmetic in the number field Q(u, v), u = cos(pi/7), v = sin(pi/7)

Every element is stored as six rationals in the fixed basis
[1, u, u^2, v, uv, u^2 v], i.e. a + b u + c u^2 + v (d + e u + f u^2).
Products are reduced with u^3 = (-1 + 4u + 4u^2)/8 and v^2 = 1 - u^2.

Signs and decimal values are certified: u is isolated in [0.9, 0.91] by
rational bisection on 8t^3 - 4t^2 - 4t + 1, v = sqrt(1 - u^2) is bracketed
with integer square roots, and the element is evaluated in interval
arithmetic until the interval is narrow enough.
"""

import logging
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import List, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

Rational = Fraction

# 8t^3 - 4t^2 - 4t + 1, coefficients from low to high degree
MINIMAL_POLYNOMIAL = (1, -4, -4, 8)
ROOT_BRACKET = (Fraction(9, 10), Fraction(91, 100))

# u^3 written in the basis 1, u, u^2
_U_CUBED = (Fraction(-1, 8), Fraction(1, 2), Fraction(1, 2))

BASIS_LABELS = ('1', 'u', 'u^2', 'v', 'uv', 'u^2v')


class FieldParseError(ValueError):
    """Raised when a textual field element cannot be parsed."""


# =============================================================================
# POLYNOMIALS IN u
# =============================================================================

def _poly_mul(p: Sequence[Fraction], q: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            if b:
                out[i + j] += a * b
    return out


def _reduce(coeffs: Sequence[Fraction]) -> Tuple[Fraction, Fraction, Fraction]:
    """Reduce a polynomial in u modulo the minimal polynomial."""
    coeffs = list(coeffs) + [Fraction(0)] * max(0, 3 - len(coeffs))
    for k in range(len(coeffs) - 1, 2, -1):
        c = coeffs[k]
        if c:
            for j, r in enumerate(_U_CUBED):
                coeffs[k - 3 + j] += c * r
        coeffs[k] = Fraction(0)
    return coeffs[0], coeffs[1], coeffs[2]


def _poly_add(p, q):
    return tuple(a + b for a, b in zip(p, q))


# =============================================================================
# CERTIFIED INTERVALS FOR u AND v
# =============================================================================

def _minpoly_value(t: Fraction) -> Fraction:
    c0, c1, c2, c3 = MINIMAL_POLYNOMIAL
    return ((c3 * t + c2) * t + c1) * t + c0


@lru_cache(maxsize=None)
def u_interval(bits: int) -> Tuple[Fraction, Fraction]:
    """Rational interval of width <= 2^-bits containing cos(pi/7)."""
    lo, hi = ROOT_BRACKET
    if not (_minpoly_value(lo) < 0 < _minpoly_value(hi)):
        raise ArithmeticError("minimal polynomial has no sign change on the root bracket")
    width = Fraction(1, 2 ** bits)
    while hi - lo > width:
        mid = (lo + hi) / 2
        if _minpoly_value(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _sqrt_bounds(q: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    n, d = q.numerator, q.denominator
    scale = 2 ** bits
    root = isqrt(n * d * scale * scale)
    return Fraction(root, d * scale), Fraction(root + 1, d * scale)


@lru_cache(maxsize=None)
def v_interval(bits: int) -> Tuple[Fraction, Fraction]:
    """Rational interval containing sin(pi/7) = +sqrt(1 - u^2)."""
    ulo, uhi = u_interval(bits)
    vlo, _ = _sqrt_bounds(1 - uhi * uhi, bits)
    _, vhi = _sqrt_bounds(1 - ulo * ulo, bits)
    return vlo, vhi


def _scale_interval(c: Fraction, lo: Fraction, hi: Fraction):
    a, b = c * lo, c * hi
    return (a, b) if a <= b else (b, a)


def _quadratic_interval(p, ulo, uhi):
    # u > 0 on the bracket, so u^2 is monotone
    lo, hi = p[0], p[0]
    for c, (a, b) in ((p[1], (ulo, uhi)), (p[2], (ulo * ulo, uhi * uhi))):
        s, t = _scale_interval(c, a, b)
        lo, hi = lo + s, hi + t
    return lo, hi


def _product_interval(x, y):
    products = [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
    return min(products), max(products)


# =============================================================================
# FIELD ELEMENT
# =============================================================================

class FieldElement:
    """Immutable element a + b u + c u^2 + v (d + e u + f u^2) of Q(u, v)."""

    __slots__ = ('_coeffs',)

    def __init__(self, a=0, b=0, c=0, d=0, e=0, f=0):
        object.__setattr__(self, '_coeffs', tuple(Fraction(x) for x in (a, b, c, d, e, f)))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @classmethod
    def from_parts(cls, rational_part: Sequence, v_part: Sequence) -> 'FieldElement':
        return cls(*rational_part, *v_part)

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self._coeffs

    @property
    def rational_part(self) -> Tuple[Fraction, Fraction, Fraction]:
        return self._coeffs[:3]

    @property
    def v_part(self) -> Tuple[Fraction, Fraction, Fraction]:
        return self._coeffs[3:]

    def is_zero(self) -> bool:
        return not any(self._coeffs)

    def is_rational(self) -> bool:
        return not any(self._coeffs[1:])

    # ----- arithmetic -----

    @staticmethod
    def _coerce(other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(*(a + b for a, b in zip(self._coeffs, other._coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(*(-a for a in self._coeffs))

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElement(*(a - b for a, b in zip(self._coeffs, other._coeffs)))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, q) -> 'FieldElement':
        q = Fraction(q)
        return FieldElement(*(q * a for a in self._coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        p1, q1 = self.rational_part, self.v_part
        p2, q2 = other.rational_part, other.v_part
        # v^2 = 1 - u^2
        qq = _poly_mul((Fraction(1), Fraction(0), Fraction(-1)), _poly_mul(q1, q2))
        rational = _reduce([a + b for a, b in zip(_pad(_poly_mul(p1, p2), len(qq)), qq)])
        vpart = _reduce([a + b for a, b in zip(_poly_mul(p1, q2), _poly_mul(q1, p2))])
        return FieldElement.from_parts(rational, vpart)

    __rmul__ = __mul__

    def invert(self) -> 'FieldElement':
        """Multiplicative inverse via the 6x6 multiplication-by-x system."""
        if self.is_zero():
            raise ZeroDivisionError("cannot invert the zero field element")
        if self.is_rational():
            return FieldElement(1 / self._coeffs[0])
        columns = [(self * basis_element(j)).coeffs for j in range(6)]
        matrix = [[columns[j][i] for j in range(6)] for i in range(6)]
        rhs = [Fraction(1)] + [Fraction(0)] * 5
        return FieldElement(*_solve_exact(matrix, rhs))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of a field element by zero")
            return self.scale(1 / Fraction(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.invert()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.invert()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.invert() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> 'FieldElement':
        """The automorphism v -> -v (mirror image y -> -y of the heptagon)."""
        return FieldElement.from_parts(self.rational_part, tuple(-a for a in self.v_part))

    # ----- comparison -----

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def __repr__(self):
        return f"FieldElement({', '.join(str(c) for c in self._coeffs)})"

    def __str__(self):
        terms = []
        for c, label in zip(self._coeffs, BASIS_LABELS):
            if c:
                terms.append(f"({c})" if label == '1' else f"({c}){label}")
        return ' + '.join(terms) if terms else '0'

    # ----- certified numerics -----

    def interval(self, bits: int) -> Tuple[Fraction, Fraction]:
        """Certified rational interval containing the real value."""
        ulo, uhi = u_interval(bits)
        p = _quadratic_interval(self.rational_part, ulo, uhi)
        if not any(self.v_part):
            return p
        q = _quadratic_interval(self.v_part, ulo, uhi)
        vq = _product_interval(v_interval(bits), q)
        return p[0] + vq[0], p[1] + vq[1]

    def sign(self) -> int:
        """Exact sign: zero from the coefficients, otherwise by interval refinement."""
        if self.is_zero():
            return 0
        bits = 32
        while True:
            lo, hi = self.interval(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
            logger.debug(f"sign refinement of {self!r} at {bits} bits")

    def to_float(self, precision: int) -> Tuple[Decimal, Decimal]:
        """Decimal value with a rigorous absolute error bound <= 10^-precision."""
        if precision < 1:
            raise ValueError("precision must be at least 1")
        target = Fraction(8, 10 ** (precision + 1))
        bits = int(precision * 3.33) + 16
        while True:
            lo, hi = self.interval(bits)
            if hi - lo <= target:
                break
            bits *= 2
        mid = (lo + hi) / 2
        places = precision + 3
        with localcontext() as ctx:
            ctx.prec = places + 40 + len(str(abs(mid.numerator) // mid.denominator))
            value = (Decimal(mid.numerator) / Decimal(mid.denominator)).quantize(Decimal(10) ** -places)
        half_width = (hi - lo) / 2
        bound = _decimal_ceil(half_width, places) + Decimal(10) ** -places
        return value, bound

    def __float__(self):
        return float(self.to_float(17)[0])

    # ----- serialization -----

    def to_json(self) -> List[str]:
        """Six strings "p/q" in the basis order [1, u, u^2, v, uv, u^2v]."""
        return [f"{c.numerator}/{c.denominator}" for c in self._coeffs]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> 'FieldElement':
        if len(data) != 6:
            raise FieldParseError(f"expected six coefficients, got {len(data)}")
        try:
            return cls(*(Fraction(str(item)) for item in data))
        except (ValueError, ZeroDivisionError) as exc:
            raise FieldParseError(f"bad coefficient in {data!r}: {exc}") from exc


def _pad(p, n):
    return list(p) + [Fraction(0)] * (n - len(p))


def _decimal_ceil(q: Fraction, places: int) -> Decimal:
    scaled = q * 10 ** places
    ceil = -((-scaled.numerator) // scaled.denominator)
    return Decimal(ceil).scaleb(-places)


def _solve_exact(matrix: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Gauss-Jordan elimination over the rationals."""
    n = len(rhs)
    rows = [row[:] + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular multiplication matrix")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def basis_element(j: int) -> FieldElement:
    coeffs = [0] * 6
    coeffs[j] = 1
    return FieldElement(*coeffs)


ZERO = FieldElement()
ONE = FieldElement(1)
U = FieldElement(0, 1)
V = FieldElement(0, 0, 0, 1)


# =============================================================================
# MODULE-LEVEL OPERATIONS
# =============================================================================

def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def sub(x: FieldElement, y: FieldElement) -> FieldElement:
    return x - y


def neg(x: FieldElement) -> FieldElement:
    return -x


def scale(x: FieldElement, q) -> FieldElement:
    return x.scale(q)


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def invert(x: FieldElement) -> FieldElement:
    return x.invert()


def sign(x: FieldElement) -> int:
    return x.sign()


def to_float(x: FieldElement, precision: int) -> Tuple[Decimal, Decimal]:
    return x.to_float(precision)


def dot(xs: Sequence[FieldElement], ys: Sequence[FieldElement]) -> FieldElement:
    total = ZERO
    for x, y in zip(xs, ys):
        total = total + x * y
    return total


def cis(k: int) -> Tuple[FieldElement, FieldElement]:
    """(cos(k pi/7), sin(k pi/7)) exactly, as powers of u + i v."""
    c, s = ONE, ZERO
    step_c, step_s = U, (V if k >= 0 else -V)
    for _ in range(abs(k)):
        c, s = c * step_c - s * step_s, c * step_s + s * step_c
    return c, s


def heptagon_vertex(i: int) -> Tuple[FieldElement, FieldElement]:
    """Vertex m_i = R^i (1, 0) of the regular heptagon with unit circumradius."""
    return cis(2 * (i % 7))


def to_floats(values: Sequence[FieldElement]) -> List[float]:
    return [float(x) for x in values]


# =============================================================================
# MINIMAL POLYNOMIAL ORACLE
# =============================================================================

def _int_poly_mul(p: Sequence[int], q: Sequence[int]) -> List[int]:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def chebyshev_t(n: int) -> List[int]:
    """Integer coefficients (low to high) of the Chebyshev polynomial T_n."""
    prev, cur = [1], [0, 1]
    if n == 0:
        return prev
    for _ in range(n - 1):
        nxt = _int_poly_mul([0, 2], cur)
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def check_minimal_polynomial() -> bool:
    """Verify T_7(t) + 1 = (t + 1)(8t^3 - 4t^2 - 4t + 1)^2 in exact integers."""
    lhs = chebyshev_t(7)
    lhs[0] += 1
    rhs = _int_poly_mul([1, 1], _int_poly_mul(list(MINIMAL_POLYNOMIAL), list(MINIMAL_POLYNOMIAL)))
    return lhs == rhs


# =============================================================================
# PARSING THE PRINTED NOTATION
# e.g. "-(2/679)(419 - 452u + 40u^2)", "(1/1609)(-1171 + 1296u + 3652u^2)v"
# =============================================================================

_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def _tokenize(text: str):
    text = text.replace('−', '-').replace('²', '^2').replace('·', '*')
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        number, symbol = m.groups()
        if number is not None:
            tokens.append(('int', int(number)))
        elif symbol in '+-*/()^uv':
            tokens.append((symbol, symbol))
        else:
            raise FieldParseError(f"unexpected character {symbol!r} at {m.start(2)} in {text!r}")
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def parse(self) -> FieldElement:
        if not self.tokens:
            raise FieldParseError("empty field expression")
        value = self.expr()
        if self.pos != len(self.tokens):
            raise FieldParseError(f"trailing input in {self.text!r}")
        return value

    def expr(self) -> FieldElement:
        negate = False
        if self.peek() in ('+', '-'):
            negate = self.take()[0] == '-'
        value = self.term()
        if negate:
            value = -value
        while self.peek() in ('+', '-'):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == '+' else value - rhs
        return value

    def term(self) -> FieldElement:
        value = self.power()
        while True:
            kind = self.peek()
            if kind == '*':
                self.take()
                value = value * self.power()
            elif kind == '/':
                self.take()
                value = value / self.power()
            elif kind in ('int', 'u', 'v', '('):
                value = value * self.power()
            else:
                return value

    def power(self) -> FieldElement:
        base = self.atom()
        if self.peek() == '^':
            self.take()
            if self.peek() != 'int':
                raise FieldParseError(f"exponent must be an integer in {self.text!r}")
            base = base ** self.take()[1]
        return base

    def atom(self) -> FieldElement:
        kind = self.peek()
        if kind is None:
            raise FieldParseError(f"unexpected end of {self.text!r}")
        kind, value = self.take()
        if kind == 'int':
            return FieldElement(value)
        if kind == 'u':
            return U
        if kind == 'v':
            return V
        if kind == '(':
            inner = self.expr()
            if self.peek() != ')':
                raise FieldParseError(f"missing ')' in {self.text!r}")
            self.take()
            return inner
        raise FieldParseError(f"unexpected {value!r} in {self.text!r}")


def parse(text: Union[str, int]) -> FieldElement:
    """Parse the printed notation a + bu + cu^2 + v(d + eu + fu^2) and its factored forms."""
    if isinstance(text, int):
        return FieldElement(text)
    return _Parser(str(text)).parse()
