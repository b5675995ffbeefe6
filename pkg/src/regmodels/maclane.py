"""Mac Lane inductive valuations and pseudovaluations on Q_p(t).

A valuation is a chain of augmentations [v0, v1(phi_1) = l_1, ...] over
the Gauss valuation v0.  The chain is always stored in minimal
presentation: key degrees strictly increase and each value exceeds the
value of its key under the prefix.  A final value of INF makes the chain
a pseudovaluation.

Equality of MacLaneVal objects is equality of valuations, not of
presentations, so [v0, v1(t - 1) = 1] == [v0, v1(t - 4) = 1] for p = 3.
"""

from fractions import Fraction
from functools import lru_cache
from math import ceil

from .arith import (
    INF,
    FpPoly,
    QPoly,
    denominator_lcm,
    factor_mod_p,
    fmt_rat,
    p_valuation,
    root_valuation,
)
from .errors import (
    InvalidAugmentation,
    InvalidInput,
    NonTermination,
    NotKeyPolynomial,
    ReducibleInput,
    RequiresResidueExtension,
    StructureViolation,
)


def _canon_key(phi, lam, p):
    # t - c may be replaced by t - c' whenever v_K(c - c') >= lam; pick the
    # least nonnegative c so that printed strings do not depend on history.
    if phi.degree != 1 or lam is INF:
        return phi
    c = -phi.coeffs[0] if phi.coeffs else Fraction(0)
    if c.denominator % p == 0:
        return phi
    k = max(ceil(lam), 0)
    mod = p**k
    red = (c.numerator * pow(c.denominator, -1, mod)) % mod if mod > 1 else 0
    return QPoly.linear(red)


class MacLaneVal:
    """A Mac Lane (pseudo)valuation in minimal presentation."""

    __slots__ = ("p", "chain", "_hash")

    def __init__(self, p, chain=()):
        self.p = p
        self.chain = tuple(
            (_canon_key(phi, lam, p), lam if lam is INF else Fraction(lam))
            for phi, lam in chain
        )
        self._hash = hash(
            (p, tuple((phi.degree, lam) for phi, lam in self.chain))
        )

    @classmethod
    def gauss(cls, p):
        return cls(p, ())

    @property
    def length(self):
        return len(self.chain)

    @property
    def is_pseudo(self):
        return bool(self.chain) and self.chain[-1][1] is INF

    @property
    def last_key(self):
        return self.chain[-1][0] if self.chain else QPoly.t()

    @property
    def last_value(self):
        return self.chain[-1][1] if self.chain else Fraction(0)

    def prefix(self, k):
        return MacLaneVal(self.p, self.chain[:k])

    def same_presentation(self, other):
        return self.p == other.p and self.chain == other.chain

    def __eq__(self, other):
        if not isinstance(other, MacLaneVal):
            return NotImplemented
        if self._hash != other._hash or self.p != other.p:
            return False
        if self.chain == other.chain:
            return True
        return leq(self, other) and leq(other, self)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"MacLaneVal({str(self)!r}, p={self.p})"

    def __str__(self):
        parts = ["v0"]
        for i, (phi, lam) in enumerate(self.chain, start=1):
            parts.append(f"v{i}({phi}) = {fmt_rat(lam)}")
        return "[" + ", ".join(parts) + "]"

    def sort_key(self):
        return tuple(
            (phi.degree, (1, 0) if lam is INF else (0, lam), str(phi))
            for phi, lam in self.chain
        )


@lru_cache(maxsize=200_000)
def _value(p, chain, g):
    if g.is_zero():
        return INF
    if not chain:
        return min(p_valuation(c, p) for c in g.coeffs)
    phi, lam = chain[-1]
    pre = chain[:-1]
    if g.degree < phi.degree:
        return _value(p, pre, g)
    coeffs = g.expansion(phi)
    if lam is INF:
        return _value(p, pre, coeffs[0])
    best = INF
    for i, a in enumerate(coeffs):
        if not a.is_zero():
            best = min(best, _value(p, pre, a) + i * lam)
    return best


def valuate(v, g):
    """v(g) for a polynomial, a rational constant, or a pair (num, den)."""
    if isinstance(g, tuple):
        num, den = g
        vn, vd = valuate(v, num), valuate(v, den)
        if vd is INF:
            raise InvalidInput("denominator has infinite value")
        return vn if vn is INF else vn - vd
    if not isinstance(g, QPoly):
        g = QPoly.const(g)
    if g.is_zero():
        raise InvalidInput("valuation of zero")
    return _value(v.p, v.chain, g)


def ram_index(v):
    """e_v, with value group (1/e_v)Z."""
    if v.is_pseudo:
        raise InvalidInput("ramification index of a pseudovaluation")
    return denominator_lcm(lam for _, lam in v.chain)


def leq(v, w):
    """v <= w, i.e. v(g) <= w(g) for every polynomial g."""
    if v.p != w.p:
        raise InvalidInput("valuations over different primes")
    return all(_value(w.p, w.chain, phi) >= lam for phi, lam in v.chain)


def lt(v, w):
    return leq(v, w) and not leq(w, v)


def comparable(v, w):
    return leq(v, w) or leq(w, v)


def _with_last(prefix, phi, lam):
    # [prefix, phi = lam] where phi is a proper key over prefix
    if lam is not INF and lam <= _value(prefix.p, prefix.chain, phi):
        return prefix
    return MacLaneVal(prefix.p, prefix.chain + ((phi, lam),))


def inf(v, w):
    """The largest (pseudo)valuation below both v and w."""
    if v.p != w.p:
        raise InvalidInput("valuations over different primes")
    for i, (phi, lam) in enumerate(v.chain):
        wv = _value(w.p, w.chain, phi)
        if wv < lam:
            return _with_last(v.prefix(i), phi, wv)
    return v


def augment(v, phi, lam):
    """[v, v'(phi) = lam] in minimal presentation."""
    if v.is_pseudo:
        raise InvalidAugmentation("cannot augment a pseudovaluation")
    if not phi.is_monic():
        raise NotKeyPolynomial(f"{phi} is not monic")
    cur = _value(v.p, v.chain, phi)
    if lam is not INF and lam < cur:
        raise InvalidAugmentation(
            f"value {fmt_rat(lam)} is below v({phi}) = {fmt_rat(cur)}"
        )
    if lam is not INF and lam == cur:
        return v
    if v.chain and phi.degree == v.last_key.degree:
        # same-degree augmentation merges into the last entry
        if _value(v.p, v.chain, phi - v.last_key) < v.last_value:
            raise NotKeyPolynomial(f"{phi} is not equivalent to {v.last_key}")
        return _with_last(v.prefix(v.length - 1), phi, lam)
    if not v.chain and phi.degree == 1:
        if not phi.is_p_integral(v.p):
            raise NotKeyPolynomial(f"{phi} is not integral")
        return MacLaneVal(v.p, ((phi, lam),))
    try:
        proper = is_proper_key(v, phi)
    except ReducibleInput as exc:
        raise NotKeyPolynomial(str(exc)) from exc
    if not proper:
        raise NotKeyPolynomial(f"{phi} is not a proper key over {v}")
    return MacLaneVal(v.p, v.chain + ((phi, lam),))


def predecessors(v):
    return [v.prefix(k) for k in range(v.length)]


def relative_index(v, lam):
    """Order of lam in Gamma_w / Gamma_v for w = [v, phi = lam]."""
    return (Fraction(lam) * ram_index(v)).denominator


def unit_monomial(v, target, integral=True):
    """p^j0 * prod phi_i^j_i (0 <= j_i < e_i) with v-value equal to target.

    With integral=False the power of p may be negative.
    """
    p = v.p
    out = QPoly.const(1)
    rest = Fraction(target)
    for i in range(v.length, 0, -1):
        phi, lam = v.chain[i - 1]
        below = ram_index(v.prefix(i - 1))
        e_i = relative_index(v.prefix(i - 1), lam)
        for j in range(e_i):
            if ((rest - j * lam) * below).denominator == 1:
                break
        else:
            raise StructureViolation(f"{fmt_rat(target)} is not in the value group")
        rest -= j * lam
        out = out * phi**j
    if rest.denominator != 1 or (integral and rest < 0):
        raise StructureViolation("unit monomial would not be integral")
    return out * Fraction(p) ** int(rest)


def _min_index(w, g, key):
    # index of the first term realising w(g) in the key-adic expansion of g
    coeffs = g.expansion(key)
    wk = _value(w.p, w.chain, key)
    vals = [
        _value(w.p, w.chain, a) + i * wk if not a.is_zero() else INF
        for i, a in enumerate(coeffs)
    ]
    low = min(vals)
    return vals.index(low)


@lru_cache(maxsize=4096)
def _chain_cached(g, p):
    if g.degree == 1:
        return MacLaneVal.gauss(p)
    facs = factor_mod_p(FpPoly.reduce(g, p))
    if len(facs) > 1:
        raise ReducibleInput(f"{g} has several distinct factors mod {p}")
    psi = facs[0][0]
    if psi.degree > 1:
        raise RequiresResidueExtension(
            f"{g} reduces to a power of {psi}, irreducible of degree {psi.degree} mod {p}"
        )
    v = MacLaneVal.gauss(p)
    phi = QPoly.linear((-psi.coeffs[0]) % p)
    for _ in range(64 * g.degree + 64):
        if phi == g:
            return v
        m, r = divmod(g.degree, phi.degree)
        if r:
            raise StructureViolation("key degree does not divide the degree")
        coeffs = g.expansion(phi)
        vals = [_value(p, v.chain, a) for a in coeffs]
        if vals[0] is INF:
            raise ReducibleInput(f"{phi} divides {g}")
        lam = vals[0] / m
        if any(val + i * lam < vals[0] for i, val in enumerate(vals)):
            raise ReducibleInput(f"{g} has a Newton polygon with several slopes")
        if lam != root_valuation(phi, g, p):
            raise ReducibleInput(f"roots of {g} are not conjugate")
        if lam <= _value(p, v.chain, phi):
            raise StructureViolation("approximation did not improve")
        w = MacLaneVal(p, v.chain + ((phi, lam),))
        e = relative_index(v, lam)
        if m % e:
            raise ReducibleInput(f"{g} has degree incompatible with its key")
        if m == e:
            return w if e > 1 else v
        pi = unit_monomial(v, e * lam)
        base = phi**e
        hits = []
        for c in range(1, p):
            k = _min_index(w, g, base - c * pi)
            if k:
                hits.append((c, k))
        if not hits:
            raise RequiresResidueExtension(
                f"a residual polynomial of {g} has no roots in F_{p}"
            )
        if len(hits) > 1 or hits[0][1] < m // e:
            if len(hits) > 1:
                raise ReducibleInput(f"{g} splits over Q_{p}")
            raise RequiresResidueExtension(
                f"a residual polynomial of {g} has a nonlinear factor over F_{p}"
            )
        nxt = base - hits[0][0] * pi
        if e > 1:
            v = w
        phi = nxt
    raise NonTermination(f"Mac Lane approximation of {g} did not stop")


def maclane_chain(g, p):
    """v_g: the valuation over which g is a proper key polynomial."""
    if not isinstance(g, QPoly) or not g.is_monic() or not g.is_p_integral(p):
        raise InvalidInput(f"{g} must be monic and {p}-integral")
    if g.degree < 1:
        raise InvalidInput("constant polynomial has no Mac Lane chain")
    return _chain_cached(g, p)


def infinity_valuation(g, p):
    """v_g^inf = [v_g, g = inf]."""
    v = maclane_chain(g, p)
    return MacLaneVal(p, v.chain + ((g, INF),))


def is_proper_key(v, g):
    """True iff g is a proper key polynomial over the valuation v."""
    if v.is_pseudo:
        return False
    if not g.is_monic() or not g.is_p_integral(v.p):
        return False
    if v.length == 0:
        return g.degree == 1
    phi, lam = v.chain[-1]
    if g.degree <= phi.degree or g.degree % phi.degree:
        return False
    e = relative_index(v.prefix(v.length - 1), lam)
    if g.degree // phi.degree != e:
        return False
    coeffs = g.expansion(phi)
    pre = v.chain[:-1]
    a0 = _value(v.p, pre, coeffs[0])
    if a0 != e * lam:
        return False
    if any(
        _value(v.p, pre, a) + i * lam < a0 for i, a in enumerate(coeffs) if not a.is_zero()
    ):
        return False
    return maclane_chain(g, v.p) == v
