"""The superelliptic pipeline for z^d = f(t).

validate_normalize puts the input in the shape the construction expects,
build_vreg runs the resolution algorithm (links over crossings, tails over
cusps, tails over branch points), removability_pass deletes leaves that
the normalization does not need, and minimize performs the last
contraction towards infinity.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, gcd

from .arith import INF, FpPoly, QPoly, factor_mod_p, fmt_rat, gcd_all, is_prime, root_valuation
from .errors import (
    BranchMeetsCrossing,
    InvalidInput,
    NonTermination,
    NotPartitioned,
    StructureViolation,
)
from .maclane import (
    MacLaneVal,
    _with_last,
    infinity_valuation,
    leq,
    maclane_chain,
    ram_index,
    valuate,
)
from .model import (
    AtInfinityRegion,
    CrossingPoint,
    CuspPoint,
    ValuationForest,
    crossing_point,
    finite_cusps,
    inf_closure,
    neighbors,
    predecessor_closure,
    specialization,
    standard_crossings,
)
from .npath import is_aligned, shortest_n_path, solve_r


@dataclass(frozen=True)
class CoverSpec:
    """z^d = p^a * prod f_i^a_i over Q_p."""

    p: int
    d: int
    a: int
    factors: tuple
    substitutions: tuple = ()

    @property
    def polys(self):
        return [f for f, _ in self.factors]

    @property
    def exps(self):
        return [k for _, k in self.factors]

    @property
    def deg_f(self):
        return sum(k * f.degree for f, k in self.factors)

    @cached_property
    def infinities(self):
        return tuple(infinity_valuation(f, self.p) for f in self.polys)

    @cached_property
    def bases(self):
        return tuple(maclane_chain(f, self.p) for f in self.polys)

    def f_value(self, v):
        """v(f) = a + sum a_i v(f_i)."""
        return self.a + sum(k * valuate(v, f) for f, k in self.factors)

    def describe(self):
        body = " * ".join(
            f"({f})" if k == 1 else f"({f})^{k}" for f, k in self.factors
        )
        pre = f"{self.p}^{self.a} * " if self.a else ""
        return f"z^{self.d} = {pre}{body}  over Q_{self.p}"


def _common_residue(spec):
    # the c with every factor = (t - c)^deg mod p, or None
    seen = set()
    for f in spec.polys:
        facs = factor_mod_p(FpPoly.reduce(f, spec.p))
        if len(facs) != 1 or facs[0][0].degree != 1:
            return None
        seen.add((-facs[0][0].coeffs[0]) % spec.p)
    return seen.pop() if len(seen) == 1 else None


def validate_normalize(spec, max_rounds=64):
    """Check the input, drop d-th power factors, and rescale until no
    residue class holds every root."""
    p, d = spec.p, spec.d
    if not is_prime(p):
        raise InvalidInput(f"p = {p} is not prime")
    if not isinstance(d, int) or d < 2:
        raise InvalidInput(f"d = {d} must be an integer >= 2")
    if d % p == 0:
        raise InvalidInput(f"p = {p} divides d = {d}")
    if not spec.factors:
        raise InvalidInput("f has no non-constant factors")
    polys = []
    for f, k in spec.factors:
        if not isinstance(f, QPoly) or f.degree < 1:
            raise InvalidInput(f"factor {f} is not a non-constant polynomial")
        if not f.is_monic():
            raise InvalidInput(f"factor {f} is not monic")
        if not f.is_p_integral(p):
            raise InvalidInput(f"factor {f} is not {p}-integral")
        if not isinstance(k, int) or not 1 <= k <= d:
            raise InvalidInput(f"exponent {k} of {f} is outside [1, {d}]")
        if f in polys:
            raise InvalidInput(f"factor {f} is repeated")
        polys.append(f)
    if spec.deg_f % d:
        raise InvalidInput(f"d = {d} does not divide deg f = {spec.deg_f}")
    CoverSpec(p, d, spec.a, tuple(spec.factors)).bases  # irreducibility of every factor
    # f_i^d is a d-th power: z -> z / f_i removes it without changing the cover
    kept = tuple((f, k) for f, k in spec.factors if k < d)
    if not kept:
        raise InvalidInput("f is a constant times a d-th power")
    spec = CoverSpec(p, d, spec.a, kept, tuple(spec.substitutions))
    polys = [f for f, _ in kept]
    if spec.deg_f % d:
        raise InvalidInput(f"d = {d} does not divide deg f = {spec.deg_f}")
    if spec.deg_f < 3:
        raise InvalidInput("deg f must be at least 3")
    if sum(f.degree for f in polys) < 2:
        raise InvalidInput("f needs at least two distinct roots")
    spec = CoverSpec(p, d, spec.a % d, tuple(spec.factors), tuple(spec.substitutions))
    for _ in range(max_rounds):
        spec.bases  # irreducibility and residue checks
        c = _common_residue(spec)
        if c is None:
            return spec
        lin = QPoly.linear(c)
        b = min(root_valuation(lin, f, p) for f in spec.polys)
        b = int(b)  # floor; b >= 1 since every root is congruent to c
        if b < 1:
            return spec
        facs = tuple((f.scale_roots(c, b, p), k) for f, k in spec.factors)
        a = (spec.a + b * spec.deg_f) % d
        spec = CoverSpec(p, d, a, facs, spec.substitutions + ((c, b),))
    raise NonTermination("normalization did not stop")


@dataclass(frozen=True)
class CrossingData:
    point: CrossingPoint
    N: int
    e: int
    s: int
    Nt: int
    r: int
    lt: Fraction
    lt2: Fraction
    members: tuple

    def row(self):
        return {
            "lower": str(self.point.lower),
            "upper": str(self.point.upper),
            "N": self.N,
            "e": self.e,
            "s": self.s,
            "Nt": self.Nt,
            "r": self.r,
            "lt": fmt_rat(self.lt),
            "lt2": fmt_rat(self.lt2),
        }


def _split(spec, c, above):
    # factor indices on the high side of c, after checking no factor meets it
    lo, hi = c.lam_lo, c.lam_hi
    g = []
    for i, (f, _) in enumerate(spec.factors):
        inf_i = spec.infinities[i]
        if leq(c.prefix, inf_i):
            rv = root_valuation(c.phi, f, spec.p)
            if lo < rv < hi:
                raise BranchMeetsCrossing(
                    f"the roots of {f} meet the crossing {c}"
                )
            if above(inf_i) != (rv >= hi):
                raise StructureViolation(f"order test disagrees with roots of {f}")
        if above(inf_i):
            g.append(i)
    return g


def _bundle(spec, c, g):
    N = c.N
    deg_g = sum(spec.factors[i][1] * spec.factors[i][0].degree for i in g)
    if deg_g % c.phi.degree:
        raise StructureViolation("deg g is not a multiple of the key degree")
    e = deg_g // c.phi.degree
    vh = spec.a + sum(
        k * valuate(c.lower, f) for i, (f, k) in enumerate(spec.factors) if i not in g
    )
    s = N * vh
    if s.denominator != 1:
        raise StructureViolation("N v(h) is not an integer")
    s = int(s)
    d = spec.d
    ge = gcd(d, e)
    Nt = N * ge // gcd(ge, s)
    r = solve_r(e, d)
    shift = Fraction(r * s, N * d)
    hi = INF if c.lam_hi is INF else Fraction(ge, d) * c.lam_hi + shift
    return CrossingData(
        c, N, e, s, Nt, r, Fraction(ge, d) * c.lam_lo + shift, hi, tuple(g)
    )


def crossing_data(spec, c):
    """The numeric bundle attached to a (potential) standard crossing."""
    up = c.upper
    return _bundle(spec, c, _split(spec, c, lambda inf_i: leq(up, inf_i)))


def link(spec, c):
    """Valuations along the shortest Nt-path between the two ends of c."""
    if c.lam_lo == c.lam_hi:
        return [c.lower]
    cd = crossing_data(spec, c)
    ge = gcd(spec.d, cd.e)
    shift = Fraction(cd.r * cd.s, cd.N * spec.d)
    path = shortest_n_path(cd.Nt, cd.lt2, cd.lt)
    out = []
    for x in path:
        lam = (x - shift) * spec.d / ge
        out.append(_with_last(c.prefix, c.phi, lam))
    return out


@dataclass(frozen=True)
class TailData:
    v: MacLaneVal
    Nt: int
    lam: Fraction
    lam2: Fraction
    chain: tuple


def _cusp_meeting(spec, v):
    # factors whose roots lie in the direction of the last key of v
    pre = v.prefix(v.length - 1)
    phi, lam = v.chain[-1]
    return [
        i
        for i, inf_i in enumerate(spec.infinities)
        if leq(pre, inf_i) and valuate(inf_i, phi) > lam
    ]


def tail_data(spec, cusp):
    v = cusp.v if isinstance(cusp, CuspPoint) else cusp
    pre = v.prefix(v.length - 1)
    phi, lam = v.chain[-1]
    g = _cusp_meeting(spec, v)
    probe = CrossingPoint(pre, phi, lam, lam)
    Nt = _bundle(spec, probe, g).Nt
    lam2 = Fraction(ceil(lam * Nt), Nt)
    for i in g:
        rv = root_valuation(phi, spec.factors[i][0], spec.p)
        if lam < rv < lam2:
            raise BranchMeetsCrossing(f"roots of {spec.factors[i][0]} lie inside the tail")
    chain = (v,) if lam2 == lam else tuple(link(spec, CrossingPoint(pre, phi, lam, lam2)))
    return TailData(v, Nt, lam, lam2, chain)


def tail(spec, cusp):
    """Resolution of the cusp on v: the link up to the next value in (1/Nt)Z."""
    return list(tail_data(spec, cusp).chain)


@dataclass(frozen=True)
class BranchTailData:
    index: int
    start: MacLaneVal
    N: int
    s: int
    Nt: int
    lam: Fraction
    lam2: Fraction
    chain: tuple


def branch_tail_data(spec, V, i):
    f, ai = spec.factors[i]
    v = specialization(V, spec.infinities[i])
    if v is AtInfinityRegion:
        raise StructureViolation(f"{f} has no member of the forest below it")
    base = spec.bases[i]
    if not leq(base, v):
        raise StructureViolation(f"{v} is not above the base of {f}")
    lam = valuate(v, f)
    N = ram_index(base)
    vh = spec.a + sum(k * valuate(v, g) for j, (g, k) in enumerate(spec.factors) if j != i)
    s = N * vh
    if s.denominator != 1:
        raise StructureViolation("N v(h) is not an integer")
    s = int(s)
    d = spec.d
    ge = gcd(d, ai)
    Nt = N * ge // gcd(ge, s)
    lead = s * Nt // N
    k = ceil(lam * Nt)
    for _ in range(d + 1):
        if (lead + ai * k) % d == 0:
            break
        k += 1
    else:
        raise NonTermination("no admissible value for the branch tail")
    lam2 = Fraction(k, Nt)
    if lam2 == lam:
        chain = (v,)
    else:
        chain = tuple(link(spec, CrossingPoint(base, f, lam, lam2)))
    return BranchTailData(i, v, N, s, Nt, lam, lam2, chain)


def branch_tail(spec, V, i):
    return list(branch_tail_data(spec, V, i).chain)


@dataclass
class VregResult:
    spec: CoverSpec
    stages: dict
    vreg: ValuationForest
    links: list = field(default_factory=list)
    tails: list = field(default_factory=list)
    branch_tails: list = field(default_factory=list)

    def crossings(self):
        return [crossing_data(self.spec, c) for c in standard_crossings(self.vreg)]


def _resolve_links(spec, V):
    out, used = [], []
    for c in standard_crossings(V.model()):
        cd = crossing_data(spec, c)
        used.append(cd)
        out.extend(link(spec, c))
    return V.union(out), used


def _resolve_cusps(spec, V):
    out, used = [], []
    for cusp in finite_cusps(V.model()):
        td = tail_data(spec, cusp)
        used.append(td)
        out.extend(td.chain)
    return V.union(out), used


def _resolve_branches(spec, V):
    out, used = [], []
    for i in range(len(spec.factors)):
        bd = branch_tail_data(spec, V, i)
        used.append(bd)
        out.extend(bd.chain)
    return V.union(out), used


def build_vreg(spec):
    """Run the resolution algorithm; stages V1..V5 are kept for reporting."""
    p = spec.p
    V1 = predecessor_closure(
        ValuationForest(p, [MacLaneVal.gauss(p), *spec.infinities])
    )
    V2 = inf_closure(V1)
    if not V2.is_predecessor_closed():
        raise StructureViolation("inf-closure lost predecessor closure")
    V3, links = _resolve_links(spec, V2)
    V4, tails = _resolve_cusps(spec, V3)
    V5, btails = _resolve_branches(spec, V4)
    vreg = V5.model()
    stages = {"V1": V1, "V2": V2, "V3": V3, "V4": V4, "V5": V5}
    return VregResult(spec, stages, vreg, links, tails, btails)


def resolution_is_fixed_point(spec, V):
    """Rerunning links, tails and branch tails on V adds nothing."""
    W = V.union(spec.infinities)
    W3, _ = _resolve_links(spec, W)
    W4, _ = _resolve_cusps(spec, W3)
    W5, _ = _resolve_branches(spec, W4)
    return W5.model() == V.model()


def lower_neighbor(V, v):
    low = [w for w in neighbors(V, v) if leq(w, v) and w != v]
    return low[0] if len(low) == 1 else None


@dataclass(frozen=True)
class Removal:
    v: MacLaneVal
    index: int
    clauses: dict


def removability_report(spec, V, v):
    """Clause-by-clause evaluation of the removability criterion for v."""
    d = spec.d
    rep = {"maximal": v in V.maximal() and v.length > 0}
    owners = [i for i, b in enumerate(spec.bases) if b == v]
    rep["a"] = len(owners) == 1
    if not (rep["maximal"] and rep["a"]):
        return rep, None
    i = owners[0]
    ai = spec.factors[i][1]
    rep["b"] = d % 2 == 0 and ai % d == d // 2
    N = ram_index(v.prefix(v.length - 1))
    ev = ram_index(v)
    rep["c"] = ev == 2 * N
    w = lower_neighbor(V, v)
    if w is None:
        rep["d"] = False
    else:
        ew = ram_index(w)
        lhs = Fraction(ew, N)
        rhs = Fraction(gcd(d, int(ew * spec.f_value(w))), gcd(d, int(ev * spec.f_value(v))))
        rep["d"] = lhs == rhs
    return rep, i


def removability_pass(spec, V):
    """Delete every maximal member that meets the removability criterion."""
    V = V.model()
    removed = []
    for v in V.maximal():
        rep, i = removability_report(spec, V, v)
        if all(rep.get(k, False) for k in ("maximal", "a", "b", "c", "d")):
            removed.append(Removal(v, i, rep))
    return V.without([r.v for r in removed]), removed


@dataclass(frozen=True)
class InftyData:
    v: MacLaneVal
    meeting: tuple
    s: int
    e: int
    beta: int
    flags: dict

    @property
    def in_S(self):
        f = self.flags
        return f["i"] and (f["ii"] or f["iii"] or f["iv"])


def infty_data(spec, v):
    """Local data at the standard infinity point of a length <= 1 member."""
    if v.length > 1 or v.is_pseudo:
        raise StructureViolation(f"{v} has inductive length > 1")
    d, a = spec.d, spec.a
    meeting = tuple(i for i, inf_i in enumerate(spec.infinities) if not leq(v, inf_i))
    s = len(meeting)
    ais = [spec.factors[i][1] for i in meeting]
    e = sum(k * f.degree for i, (f, k) in enumerate(spec.factors) if i not in meeting)
    beta = gcd_all(d, a, *ais, e)
    ev = ram_index(v)
    flags = {"i": (gcd_all(d, *ais, e) // beta) % ev == 0, "ii": s == 0}
    flags["iii"] = False
    flags["iv"] = False
    if s == 1:
        f1, a1 = spec.factors[meeting[0]]
        m = ev * spec.f_value(v)
        if f1.degree == 1 and m.denominator == 1:
            flags["iii"] = gcd(d // gcd(d, a1), d // gcd(d, int(m))) == 1
        phi, lam = (v.chain[0] if v.length else (QPoly.t(), Fraction(0)))
        vf = spec.f_value(v)
        flags["iv"] = (
            ev == 1
            and d == 2 * beta
            and vf.denominator == 1
            and int(vf) % (2 * beta) == 0
            and f1.degree == 2
            and root_valuation(phi, f1, spec.p) == lam - Fraction(1, 2)
        )
    return InftyData(v, meeting, s, e, beta, flags)


def compute_S(spec, V):
    """Members of length <= 1 whose infinity point is regular with normal crossings."""
    return [v for v in V.valuations() if v.length <= 1 and infty_data(spec, v).in_S]


@dataclass(frozen=True)
class InftyCrossingData:
    v: MacLaneVal
    w: MacLaneVal
    delta: int
    delta2: int
    a: int
    r: int
    Nt: int
    hi: Fraction
    lo: Fraction
    regular: bool


def infty_crossing_data(spec, v, w):
    if v.length != 1 or w.length != 1:
        raise NotPartitioned("both ends of an infinity crossing need length 1")
    (phi, mu), (phi2, mu2) = v.chain[0], w.chain[0]
    if phi.degree != 1 or phi2.degree != 1:
        raise NotPartitioned("infinity crossing keys must be linear")
    c, c2 = -phi.coeffs[0] if phi.coeffs else 0, -phi2.coeffs[0] if phi2.coeffs else 0
    if (Fraction(c - c2).numerator % spec.p) == 0:
        raise NotPartitioned("the two centres are congruent mod p")
    delta = delta2 = 0
    for i, (f, k) in enumerate(spec.factors):
        up, up2 = leq(v, spec.infinities[i]), leq(w, spec.infinities[i])
        if up == up2:
            raise NotPartitioned(f"{f} is not above exactly one of the two")
        if up:
            delta += k * f.degree
        else:
            delta2 += k * f.degree
    d, a = spec.d, spec.a
    if (delta + delta2) % d:
        raise StructureViolation("d does not divide delta + delta'")
    g = gcd(d, delta2)
    Nt = g // gcd_all(d, a, delta2)
    r = solve_r(delta2, d)
    shift = Fraction(r * a, d)
    hi = Fraction(g, d) * mu2 + shift
    lo = -Fraction(g, d) * mu + shift
    return InftyCrossingData(v, w, delta, delta2, a, r, Nt, hi, lo, is_aligned(Nt, lo, hi))


def infty_crossing_check(spec, v, w):
    return infty_crossing_data(spec, v, w).regular


@dataclass
class MinResult:
    case: str
    vmin: ValuationForest
    S: list
    pair: InftyCrossingData = None
    contracted: MacLaneVal = None
    leaf_check: dict = None


def base_contraction_report(spec, V, v):
    """Hypotheses and conditions for removing the minimal member v of V."""
    rep = {"length1": v.length == 1}
    ups = [w for w in neighbors(V, v) if leq(v, w) and w != v]
    rep["unique_upper"] = len(ups) == 1
    if not (rep["length1"] and rep["unique_upper"]):
        return rep
    w = ups[0]
    rep["w"] = str(w)
    rep["length2"] = w.length == 2
    if not rep["length2"]:
        return rep
    d = spec.d
    ew = ram_index(w)
    wf = spec.f_value(w)
    rep.update(d=d, e_w=ew, a=spec.a, w_f=fmt_rat(wf))
    rep["i"] = ram_index(v) == 2
    rep["ii"] = all(leq(w, inf_i) and w != inf_i for inf_i in spec.infinities)
    rep["iii"] = gcd(d, int(ew * wf)) == 2 * ew * gcd(d, spec.a)
    return rep


def _fires(rep):
    keys = ("length1", "unique_upper", "length2", "i", "ii", "iii")
    return all(rep.get(k, False) for k in keys)


def minimize(spec, V):
    """Contract V (after the removability pass) to the minimal base."""
    V = V.model()
    p = spec.p
    v0 = MacLaneVal.gauss(p)
    if v0 not in V:
        raise StructureViolation("the base does not contain v0")
    S = compute_S(spec, V)
    if v0 not in S:
        raise StructureViolation("v0 fails the infinity condition")
    nb = neighbors(V, v0)
    if len(S) == 1:
        if len(nb) != 2:
            return MinResult("3(i)", V, S)
        w, w2 = nb
        cands = [u for u in V.valuations() if u.length == 1 and leq(w, u)]
        cands2 = [u for u in V.valuations() if u.length == 1 and leq(w2, u)]
        good = []
        for u in cands:
            for u2 in cands2:
                if not all(
                    leq(u, inf_i) or leq(u2, inf_i) for inf_i in spec.infinities
                ):
                    continue
                icd = infty_crossing_data(spec, u, u2)
                if icd.regular:
                    good.append(icd)
        if not good:
            return MinResult("3(ii)", V, S)
        top = [
            x
            for x in good
            if not any(
                y is not x and leq(x.v, y.v) and leq(x.w, y.w) for y in good
            )
        ]
        if len(top) != 1:
            raise StructureViolation("no unique maximal pair for the infinity crossing")
        best = top[0]
        keep = [u for u in V.valuations() if leq(best.v, u) or leq(best.w, u)]
        return MinResult("3(ii)", ValuationForest(p, keep), S, pair=best)
    tops = [u for u in S if not any(u != x and leq(u, x) for x in S)]
    if len(tops) != 1:
        raise StructureViolation("S has several maximal elements")
    v = tops[0]
    Vp = ValuationForest(p, [u for u in V.valuations() if leq(v, u)])
    rep = base_contraction_report(spec, Vp, v)
    if _fires(rep):
        return MinResult("3(iii)", Vp.without([v]), S, contracted=v, leaf_check=rep)
    return MinResult("3(iii)", Vp, S, leaf_check=rep)


@dataclass
class Pipeline:
    spec: CoverSpec
    reg: VregResult
    vreg_prime: ValuationForest
    removed: list
    minres: MinResult

    @property
    def vreg(self):
        return self.reg.vreg

    @property
    def vmin(self):
        return self.minres.vmin


def run_pipeline(spec):
    spec = validate_normalize(spec)
    reg = build_vreg(spec)
    vp, removed = removability_pass(spec, reg.vreg)
    return Pipeline(spec, reg, vp, removed, minimize(spec, vp))


def verify_regular(spec, V):
    """Re-check the regularity conditions on a resolved base V.

    Returns a list of human-readable failures (empty when all pass).
    """
    fails = []
    M = V.model()
    for c in standard_crossings(M):
        cd = crossing_data(spec, c)
        if not is_aligned(cd.Nt, cd.lt, cd.lt2):
            fails.append(f"crossing {c} is not aligned")
    for cusp in finite_cusps(M):
        td = tail_data(spec, cusp)
        if td.lam2 != td.lam:
            fails.append(f"cusp on {cusp.v} needs value {fmt_rat(td.lam2)}")
    for i in range(len(spec.factors)):
        bd = branch_tail_data(spec, M, i)
        if bd.lam2 != bd.lam:
            fails.append(f"branch point of {spec.factors[i][0]} is not resolved")
    return fails
