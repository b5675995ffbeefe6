"""Exact arithmetic: rationals extended by infinity, p-adic valuations,
dense polynomials over Q and F_p, resultants and factorization mod p.

Polynomials are stored lowest degree first.  Rationals are plain
``fractions.Fraction``; the only extension is the ``INF`` singleton.
"""

from fractions import Fraction
from functools import total_ordering
from math import gcd, lcm

from sympy.polys.domains import QQ, ZZ
from sympy.polys.euclidtools import dup_resultant
from sympy.polys.galoistools import gf_factor

from .errors import InvalidInput, ParseError


@total_ordering
class _Infinity:
    """Positive infinity for valuations: absorbs addition, beats every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    __str__ = __repr__

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("regmodels.INF")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __mul__(self, other):
        if other == 0:
            raise ValueError("0 * INF is undefined")
        if other < 0:
            raise ValueError("negative multiples of INF are not valuations")
        return self

    __rmul__ = __mul__

    def __sub__(self, other):
        if other is self:
            raise ValueError("INF - INF is undefined")
        return self

    def __truediv__(self, other):
        if other <= 0:
            raise ValueError("INF divided by a non-positive number")
        return self


INF = _Infinity()


def is_inf(x):
    return x is INF


def as_rat(x):
    """Coerce ints, Fractions and "num/den" strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    raise ParseError(f"not a rational: {x!r}")


def parse_ext(text):
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return as_rat(text)


def fmt_rat(x):
    if x is INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_prime(n):
    if not isinstance(n, int) or n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def p_valuation(x, p):
    """Exponent of p in the rational x; INF for zero."""
    x = as_rat(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return Fraction(v)


def denominator_lcm(values):
    out = 1
    for x in values:
        if x is not INF:
            out = lcm(out, Fraction(x).denominator)
    return out


def gcd_all(*values):
    out = 0
    for x in values:
        out = gcd(out, int(x))
    return out


class QPoly:
    """Dense polynomial in t over Q, coefficients lowest degree first."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=()):
        cs = [as_rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._hash = hash(self.coeffs)

    @classmethod
    def t(cls):
        return cls((0, 1))

    @classmethod
    def const(cls, c):
        return cls((c,))

    @classmethod
    def linear(cls, c):
        """The monic polynomial t - c."""
        return cls((-as_rat(c), 1))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def is_constant(self):
        return len(self.coeffs) <= 1

    def is_p_integral(self, p):
        return all(c.denominator % p != 0 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, QPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == QPoly.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"QPoly({str(self)!r})"

    def __str__(self):
        return poly_str(self.coeffs)

    @staticmethod
    def _lift(x):
        return x if isinstance(x, QPoly) else QPoly.const(x)

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return QPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return QPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return QPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return QPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power")
        out, base = QPoly.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lc
        if len(rem) - 1 < dq:
            return QPoly(), QPoly(rem)
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lead
            quot[k] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    rem[k + j] -= c * y
        return QPoly(quot), QPoly(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, x):
        """Evaluate at a rational, or compose with another polynomial."""
        acc = QPoly() if isinstance(x, QPoly) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def expansion(self, phi):
        """Coefficients a_i with self = sum a_i phi^i and deg a_i < deg phi."""
        if phi.degree < 1:
            raise InvalidInput("expansion base must have positive degree")
        out = []
        rest = self
        while not rest.is_zero():
            rest, r = divmod(rest, phi)
            out.append(r)
        return out or [QPoly()]

    def scale_roots(self, c, b, p):
        """p^{-b deg} * self(c + p^b t): translate and rescale the roots."""
        s = Fraction(p) ** b
        moved = self(QPoly((c, s)))
        return moved * (Fraction(1) / s**self.degree)


def poly_str(coeffs, var="t"):
    """Render lowest-first coefficients as highest-first text, e.g. 't^2 - 3'."""
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[k])
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if k == 0:
            body = fmt_rat(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{fmt_rat(mag)}*{mono}"
        terms.append((sign, body))
    if not terms:
        return "0"
    head_sign, head = terms[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


class FpPoly:
    """Dense polynomial over F_p, coefficients lowest degree first."""

    __slots__ = ("coeffs", "p")

    def __init__(self, coeffs, p):
        cs = [int(c) % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self.p = p

    @classmethod
    def reduce(cls, poly, p):
        """Reduction of a p-integral rational polynomial."""
        if not poly.is_p_integral(p):
            raise InvalidInput(f"{poly} is not {p}-integral")
        return cls(
            (c.numerator * pow(c.denominator, -1, p) for c in poly.coeffs), p
        )

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return (
            isinstance(other, FpPoly)
            and self.p == other.p
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.coeffs, self.p))

    def __repr__(self):
        return f"FpPoly({str(self)!r}, p={self.p})"

    def __str__(self):
        return poly_str(self.coeffs)

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return FpPoly((), self.p)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return FpPoly(out, self.p)

    def monic(self):
        inv = pow(self.coeffs[-1], -1, self.p)
        return FpPoly((c * inv for c in self.coeffs), self.p)

    def roots(self):
        return [x for x in range(self.p) if self(x) == 0]

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc


def factor_mod_p(g):
    """Monic irreducible factors of g over F_p with multiplicities."""
    if g.is_zero():
        raise InvalidInput("cannot factor the zero polynomial")
    _, pairs = gf_factor([ZZ(c) for c in reversed(g.coeffs)], g.p, ZZ)
    out = [
        (FpPoly([int(c) for c in reversed(f)], g.p), int(k)) for f, k in pairs
    ]
    out.sort(key=lambda fk: (fk[0].degree, fk[0].coeffs))
    return out


def resultant(f, g):
    """Res(f, g) over Q."""
    if f.is_zero() or g.is_zero():
        return Fraction(0)
    r = dup_resultant(
        [QQ(c.numerator, c.denominator) for c in reversed(f.coeffs)],
        [QQ(c.numerator, c.denominator) for c in reversed(g.coeffs)],
        QQ,
    )
    return Fraction(int(QQ.numer(r)), int(QQ.denom(r)))


def root_valuation(phi, g, p):
    """v_K(phi(theta)) for a root theta of the monic p-integral g.

    All roots of an irreducible g are conjugate over Q_p, so the value is
    the p-adic valuation of prod phi(theta_i) = Res(g, phi) divided by deg g.
    For reducible g this is the average over the roots.
    """
    if not g.is_monic() or not g.is_p_integral(p):
        raise InvalidInput(f"{g} must be monic and {p}-integral")
    if phi.is_zero():
        raise InvalidInput("root_valuation of the zero polynomial")
    if g.degree == 0:
        raise InvalidInput("constant polynomial has no roots")
    return p_valuation(resultant(g, phi), p) / g.degree
