"""Finite sets of Mac Lane (pseudo)valuations viewed as normal models of
the projective line: closures, the Hasse diagram, standard crossings,
finite cusps, where horizontal divisors specialize, intersection numbers.
"""

from dataclasses import dataclass
from fractions import Fraction

from .arith import QPoly, fmt_rat
from .errors import StructureViolation
from .maclane import (
    MacLaneVal,
    _with_last,
    inf,
    infinity_valuation,
    leq,
    predecessors,
    ram_index,
    valuate,
)


class ValuationForest:
    """An immutable finite set of (pseudo)valuations with its Hasse diagram."""

    def __init__(self, p, members=()):
        self.p = p
        uniq = []
        for v in members:
            if v.p != p:
                raise StructureViolation("forest mixes primes")
            if v not in uniq:
                uniq.append(v)
        uniq.sort(key=lambda v: (v.sort_key(), str(v)))
        self.members = tuple(uniq)
        self._order = None
        self._edges = None

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, v):
        return v in self.members

    def __eq__(self, other):
        if not isinstance(other, ValuationForest):
            return NotImplemented
        return (
            self.p == other.p
            and len(self) == len(other)
            and all(v in other.members for v in self.members)
        )

    def __repr__(self):
        return f"ValuationForest({self.strings()!r})"

    def strings(self):
        return [str(v) for v in self.members]

    def union(self, extra):
        return ValuationForest(self.p, list(self.members) + list(extra))

    def without(self, drop):
        drop = list(drop)
        return ValuationForest(self.p, [v for v in self.members if v not in drop])

    def valuations(self):
        return [v for v in self.members if not v.is_pseudo]

    def pseudos(self):
        return [v for v in self.members if v.is_pseudo]

    def model(self):
        """The same forest with pseudovaluations dropped."""
        return ValuationForest(self.p, self.valuations())

    def _leq_matrix(self):
        if self._order is None:
            ms = self.members
            self._order = [[leq(a, b) for b in ms] for a in ms]
        return self._order

    def index(self, v):
        for i, w in enumerate(self.members):
            if w == v:
                return i
        raise KeyError(str(v))

    def hasse_edges(self):
        """Pairs (i, j) of member indices with i < j in the order and nothing between."""
        if self._edges is None:
            le = self._leq_matrix()
            n = len(self.members)
            lt = [[le[i][j] and i != j for j in range(n)] for i in range(n)]
            edges = []
            for i in range(n):
                for j in range(n):
                    if lt[i][j] and not any(lt[i][k] and lt[k][j] for k in range(n)):
                        edges.append((i, j))
            self._edges = edges
        return self._edges

    def above(self, v, strict=True):
        return [w for w in self.members if leq(v, w) and not (strict and w == v)]

    def below(self, v, strict=True):
        return [w for w in self.members if leq(w, v) and not (strict and w == v)]

    def minimal(self):
        le = self._leq_matrix()
        n = len(self.members)
        return [
            self.members[j]
            for j in range(n)
            if not any(le[i][j] and i != j for i in range(n))
        ]

    def maximal(self):
        le = self._leq_matrix()
        n = len(self.members)
        return [
            self.members[i]
            for i in range(n)
            if not any(le[i][j] and i != j for j in range(n))
        ]

    def is_inf_closed(self):
        ms = self.members
        return all(inf(a, b) in ms for a in ms for b in ms)

    def is_predecessor_closed(self):
        return all(u in self.members for v in self.members for u in predecessors(v))

    def as_dict(self):
        return {
            "members": self.strings(),
            "edges": [
                [str(self.members[i]), str(self.members[j])]
                for i, j in self.hasse_edges()
            ],
        }


def neighbors(V, v):
    """Members adjacent to v in the Hasse diagram."""
    i = V.index(v)
    out = []
    for a, b in V.hasse_edges():
        if a == i:
            out.append(V.members[b])
        elif b == i:
            out.append(V.members[a])
    return out


def inf_closure(V):
    members = list(V.members)
    grew = True
    while grew:
        grew = False
        for a in list(members):
            for b in list(members):
                c = inf(a, b)
                if c not in members:
                    members.append(c)
                    grew = True
    return ValuationForest(V.p, members)


def predecessor_closure(V):
    members = list(V.members)
    for v in V.members:
        members.extend(predecessors(v))
    return ValuationForest(V.p, members)


@dataclass(frozen=True)
class CrossingPoint:
    """The point where [prefix, phi = lam_lo] meets [prefix, phi = lam_hi]."""

    prefix: MacLaneVal
    phi: QPoly
    lam_lo: Fraction
    lam_hi: Fraction

    @property
    def lower(self):
        return _with_last(self.prefix, self.phi, self.lam_lo)

    @property
    def upper(self):
        return _with_last(self.prefix, self.phi, self.lam_hi)

    @property
    def N(self):
        return ram_index(self.prefix)

    def __str__(self):
        return f"{self.lower} -- {self.upper}"

    def presentation(self):
        """The lower valuation written with the shared prefix and key."""
        parts = [str(self.prefix)[1:-1]]
        parts.append(f"v{self.prefix.length + 1}({self.phi}) = {fmt_rat(self.lam_lo)}")
        return "[" + ", ".join(parts) + "]"


def crossing_point(v, w):
    """Shared-prefix form of an adjacent pair v < w."""
    if w.is_pseudo or v.is_pseudo:
        raise StructureViolation("crossings involve valuations only")
    if w.length == 0:
        raise StructureViolation(f"{w} cannot be the upper end of a crossing")
    n = w.length
    prefix = w.prefix(n - 1)
    phi, lam_hi = w.chain[-1]
    lam_lo = valuate(v, phi)
    if not leq(prefix, v) or lam_lo >= lam_hi or _with_last(prefix, phi, lam_lo) != v:
        raise StructureViolation(f"{v} and {w} do not share a prefix")
    return CrossingPoint(prefix, phi, lam_lo, lam_hi)


def standard_crossings(V):
    out = []
    for i, j in V.hasse_edges():
        a, b = V.members[i], V.members[j]
        if a.is_pseudo or b.is_pseudo:
            continue
        out.append(crossing_point(a, b))
    return out


@dataclass(frozen=True)
class CuspPoint:
    v: MacLaneVal

    @property
    def phi(self):
        return self.v.last_key

    @property
    def prefix(self):
        return self.v.prefix(self.v.length - 1)

    @property
    def lam(self):
        return self.v.last_value

    def __str__(self):
        return f"cusp on {self.v} (meets {self.phi})"


def has_cusp(V, v):
    if v.is_pseudo or v.length == 0:
        return False
    pre = v.prefix(v.length - 1)
    if ram_index(v) <= ram_index(pre):
        return False
    phi, lam = v.chain[-1]
    return all(valuate(w, phi) == lam for w in V.valuations() if leq(v, w))


def finite_cusps(V):
    return [CuspPoint(v) for v in V.valuations() if has_cusp(V, v)]


class _AtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AtInfinityRegion"

    __str__ = __repr__


AtInfinityRegion = _AtInfinity()


def specialization(V, g):
    """Maximal valuation of V below v_g^inf, or AtInfinityRegion."""
    top = infinity_valuation(g, V.p) if isinstance(g, QPoly) else g
    below = [v for v in V.valuations() if leq(v, top)]
    if not below:
        return AtInfinityRegion
    best = [v for v in below if all(leq(u, v) for u in below)]
    if len(best) != 1:
        raise StructureViolation(f"no unique maximal member below {top}")
    return best[0]


def intersection_number(c):
    lo, hi = c.lower, c.upper
    return Fraction(c.N) / ((c.lam_hi - c.lam_lo) * ram_index(lo) * ram_index(hi))


def is_rooted_tree(V):
    """Hasse diagram of the valuations is a tree with a unique minimum."""
    M = V.model()
    n = len(M)
    if n == 0:
        return False
    if len(M.minimal()) != 1:
        return False
    return len(M.hasse_edges()) == n - 1 and _connected(M)


def _connected(V):
    n = len(V)
    adj = {i: set() for i in range(n)}
    for i, j in V.hasse_edges():
        adj[i].add(j)
        adj[j].add(i)
    seen, todo = {0}, [0]
    while todo:
        for k in adj[todo.pop()]:
            if k not in seen:
                seen.add(k)
                todo.append(k)
    return len(seen) == n

