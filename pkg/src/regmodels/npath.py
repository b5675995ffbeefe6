"""Shortest N-paths between rationals, and the two-dimensional lattices
whose reduced bases decide when a crossing is already regular.

An N-path is a decreasing sequence b_i/c_i (lowest terms) with

    b_i/c_i - b_{i+1}/c_{i+1} = N / (lcm(N, c_i) * lcm(N, c_{i+1})).

Multiplying every entry by N turns an N-path into a 1-path, i.e. a walk
along edges of the Farey graph, so everything reduces to the case N = 1.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import floor, gcd, lcm

from .arith import INF, as_rat, fmt_rat
from .errors import DegenerateLattice, InvalidInput


@dataclass(frozen=True)
class NPath:
    N: int
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self):
        return " > ".join(fmt_rat(x) for x in self.entries)


def simplest_between(lo, hi):
    """The rational of least denominator strictly inside (lo, hi).

    hi may be INF.  When several integers fit, the smallest one is taken.
    """
    lo = Fraction(lo)
    n = floor(lo) + 1
    if hi is INF or n < hi:
        return Fraction(n)
    fl = floor(lo)
    top = INF if lo == fl else 1 / (lo - fl)
    return fl + 1 / simplest_between(1 / (Fraction(hi) - fl), top)


def farey_adjacent(x, y):
    """True iff x > y are neighbours in the Farey graph."""
    return x.numerator * y.denominator - y.numerator * x.denominator == 1


def _shortest_one_path(hi, lo):
    out = [hi]
    stack = [(hi, lo)]
    # iterative in-order insertion keeps deep paths off the call stack
    pending = []
    while stack:
        a, b = stack.pop()
        if farey_adjacent(a, b):
            pending.append(b)
            continue
        m = simplest_between(b, a)
        stack.append((m, b))
        stack.append((a, m))
    out.extend(pending)
    return out


def shortest_n_path(N, hi, lo):
    """The unique shortest N-path from hi down to lo, endpoints included."""
    if not isinstance(N, int) or N < 1:
        raise InvalidInput(f"N must be a positive integer, got {N!r}")
    hi, lo = as_rat(hi), as_rat(lo)
    if hi <= lo:
        raise InvalidInput(f"need hi > lo, got {fmt_rat(hi)} <= {fmt_rat(lo)}")
    one = _shortest_one_path(N * hi, N * lo)
    return NPath(N, tuple(x / N for x in one))


def n_path_step_ok(N, x, y):
    """The defining difference identity for one step x > y."""
    return x - y == Fraction(
        N, lcm(N, x.denominator) * lcm(N, y.denominator)
    )


def is_n_path(N, entries):
    entries = [as_rat(x) for x in entries]
    if len(entries) < 2:
        return False
    return all(n_path_step_ok(N, a, b) for a, b in zip(entries, entries[1:]))


def is_aligned(N, lo, hi):
    """True iff hi > lo is already a shortest N-path (two entries)."""
    lo, hi = as_rat(lo), as_rat(hi)
    if hi <= lo:
        raise InvalidInput("is_aligned needs lo < hi")
    return len(shortest_n_path(N, hi, lo)) == 2


def solve_r(e, d):
    """Least r >= 0 with r * e/gcd(d,e) = 1 mod d/gcd(d,e)."""
    g = gcd(d, e)
    mod = d // g
    if mod == 1:
        return 0
    return pow((e // g) % mod, -1, mod)


@dataclass(frozen=True)
class CrossingShape:
    """Parameters of the three-generator lattice attached to a crossing."""

    N: int
    d: int
    e: int
    s: int
    lam: Fraction
    lam2: Fraction
    r: int

    def generators(self):
        N, d, e, s = self.N, self.d, self.e, self.s
        lam, lam2 = Fraction(self.lam), Fraction(self.lam2)
        return (
            (Fraction(1, N), Fraction(1, N)),
            (lam, lam2),
            ((Fraction(s, N) + e * lam) / d, (Fraction(s, N) + e * lam2) / d),
        )


@dataclass(frozen=True)
class Lattice2:
    generators: tuple
    shape: CrossingShape = None

    @classmethod
    def from_shape(cls, shape):
        return cls(shape.generators(), shape)


def _hnf2(rows):
    # integer row reduction to [[a, b], [0, c]] with a, c > 0
    rows = [list(r) for r in rows if any(r)]
    basis = []
    for col in range(2):
        live = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                r = [x - q * y for x, y in zip(r, piv)]
                (nxt if r[col] else rest).append(r)
            live = nxt
        if not live:
            raise DegenerateLattice("lattice has rank below 2")
        piv = live[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        rows = rest
    return basis


def lattice_basis(L):
    """((1/Nt, 1/Nt), (lt, lt2)): minimal diagonal and minimal positive gap.

    For the crossing shape the closed forms are returned; otherwise the
    minimal-gap element is normalised to have first coordinate in [0, 1/Nt).
    """
    gens = [(as_rat(x), as_rat(y)) for x, y in L.generators]
    if not gens:
        raise DegenerateLattice("empty generator list")
    den = 1
    for x, y in gens:
        den = lcm(den, x.denominator, y.denominator)
    # coordinates (gap, x) so that the diagonal is the second axis
    rows = [(int((y - x) * den), int(x * den)) for x, y in gens]
    (gap, x1), (_, diag) = _hnf2(rows)
    if gap <= 0 or diag <= 0:
        raise DegenerateLattice("lattice has no positive gap or diagonal")
    delta = Fraction(diag, den)
    x1 = Fraction(x1 % diag, den)
    generic = ((delta, delta), (x1, x1 + Fraction(gap, den)))
    if L.shape is None:
        return generic
    sh = L.shape
    g = gcd(sh.d, sh.e)
    nt = sh.N * g // gcd(g, sh.s)
    shift = Fraction(sh.r * sh.s, sh.N * sh.d)
    lt = Fraction(g, sh.d) * sh.lam + shift
    lt2 = Fraction(g, sh.d) * sh.lam2 + shift
    return (Fraction(1, nt), Fraction(1, nt)), (lt, lt2)
