"""The special fiber of the normalization of a base in K(X).

Over the v-component the cover is a Kummer cover of P^1_k of degree
D = gcd(d, e_v v(f)) (counted with all lifts).  It is determined by the
reduction of f / w^m, where w is a uniformizer of v and m = e_v v(f); the
orders of that reduction at the marked points of the component give the
number of lifts, the ramification, and (with the local point counts
above each marked point) how the lifts are glued.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd

from .arith import INF, fmt_rat, gcd_all
from .cover import crossing_data, infty_crossing_data, _cusp_meeting
from .errors import StructureViolation
from .maclane import (
    MacLaneVal,
    _value,
    inf,
    leq,
    ram_index,
    unit_monomial,
)
from .model import crossing_point, has_cusp, neighbors, specialization


def mult_upstairs(spec, v):
    """Multiplicity of each component of the special fiber above v."""
    ev = ram_index(v)
    m = ev * spec.f_value(v)
    return ev * spec.d // gcd(spec.d, int(m))


def _slope(p, pre, key, lam, g, upward):
    # one-sided derivative of mu -> [pre, key = mu](g) at mu = lam
    vals = [
        (i, _value(p, pre, a) + i * lam)
        for i, a in enumerate(g.expansion(key))
        if not a.is_zero()
    ]
    low = min(x for _, x in vals)
    hits = [i for i, x in vals if x == low]
    return min(hits) if upward else max(hits)


@dataclass(frozen=True)
class Direction:
    """A point on the v-component, given by how valuations leave v."""

    kind: str  # "down", "up" or "key"
    rep: MacLaneVal = None  # a valuation above v in this direction, for "key"

    def label(self, v):
        if self.kind == "down":
            return "towards infinity" if v.length == 0 else "down"
        if self.kind == "up":
            return f"{v.last_key} -> 0"
        return f"towards {self.rep}"


def _direction(v, target):
    if not leq(v, target):
        return Direction("down")
    if v.length and _value(v.p, target.chain, v.last_key) > v.last_value:
        return Direction("up")
    return Direction("key", target)


def _same(v, a, b):
    if a.kind != b.kind:
        return False
    if a.kind != "key":
        return True
    return inf(a.rep, b.rep) != v


def _slope_at(v, direction, g):
    """(e_u / e_v) * slope of g when leaving v in the given direction."""
    p = v.p
    ev = ram_index(v)
    if direction.kind == "key":
        t = direction.rep
        n = v.length
        key = t.chain[n][0] if t.length > n and t.prefix(n) == v else t.chain[n - 1][0]
        return Fraction(_slope(p, v.chain, key, _value(p, v.chain, key), g, True))
    if v.length == 0:
        key, pre = v.last_key, ()
        eu = 1
    else:
        key, pre = v.last_key, v.chain[:-1]
        eu = ram_index(v.prefix(v.length - 1))
    s = _slope(p, pre, key, v.last_value, g, direction.kind == "up")
    sign = 1 if direction.kind == "up" else -1
    return Fraction(sign * s * eu, ev)


@dataclass
class MarkedPoint:
    direction: Direction
    kind: str  # crossing, infinity, infinity-crossing, cusp, branch, smooth
    order: int
    branches: int = 0
    points: int = 0
    other: MacLaneVal = None
    factors: tuple = ()

    def as_dict(self, v):
        out = {
            "where": self.direction.label(v),
            "kind": self.kind,
            "order": self.order,
            "branches": self.branches,
        }
        if self.other is not None:
            out["other"] = str(self.other)
        if self.factors:
            out["factors"] = list(self.factors)
        return out


def _marked_points(spec, V, v):
    M = V.model()
    pts = [Direction("down")]
    if v.length:
        pts.append(Direction("up"))

    def slot(t):
        dr = _direction(v, t)
        for k, q in enumerate(pts):
            if _same(v, q, dr):
                return k
        pts.append(dr)
        return len(pts) - 1

    nb = {}
    for w in neighbors(M, v):
        if w != v and leq(v, w):
            k = slot(w)
            if k in nb:
                raise StructureViolation(f"two neighbours of {v} in one direction")
            nb[k] = w
    fac = {}
    for i, inf_i in enumerate(spec.infinities):
        if specialization(M, inf_i) == v:
            fac.setdefault(slot(inf_i), []).append(i)
    return pts, nb, fac


def residual_divisor(spec, V, v):
    """Orders of the reduction of f / w^m at the marked points of v.

    w is a fixed uniformizer of v (a monomial in p and the keys) and
    m = e_v v(f).  Another choice of w changes each order by a multiple
    of m, which leaves every gcd with gcd(d, m) unchanged.
    """
    pts, _, _ = _marked_points(spec, V, v)
    return {q: _order(spec, v, q) for q in pts}


def _order(spec, v, q):
    ev = ram_index(v)
    m = ev * spec.f_value(v)
    if m.denominator != 1:
        raise StructureViolation(f"e_v v(f) is not an integer at {v}")
    unif = unit_monomial(v, Fraction(1, ev), integral=False)
    k = sum(a * _slope_at(v, q, f) for f, a in spec.factors) - m * _slope_at(v, q, unif)
    if k.denominator != 1:
        raise StructureViolation(f"non-integral residual order at {v}")
    return int(k)


def component_count(spec, V, v):
    """Number of irreducible components of the fiber above v."""
    ev = ram_index(v)
    m = int(ev * spec.f_value(v))
    return gcd_all(spec.d, m, *residual_divisor(spec, V, v).values())


@dataclass
class Vertex:
    v: MacLaneVal
    lift: int
    mult: int
    count: int
    degree: int
    genus: int
    nodes: int = 0
    selfint: int = None
    marks: list = field(default_factory=list)

    @property
    def key(self):
        return (str(self.v), self.lift)

    @property
    def arithmetic_genus(self):
        return self.genus + self.nodes


@dataclass
class FiberGraph:
    spec: object
    vertices: list
    edges: list  # (index, index, label)
    loops: list  # (index, label)

    def index(self, v, lift):
        for k, x in enumerate(self.vertices):
            if x.v == v and x.lift == lift:
                return k
        raise KeyError((str(v), lift))

    def components_above(self, v):
        return [x for x in self.vertices if x.v == v]

    def degree_matrix(self):
        n = len(self.vertices)
        out = [[0] * n for _ in range(n)]
        for a, b, _ in self.edges:
            out[a][b] += 1
            out[b][a] += 1
        return out

    def degree(self, k):
        return sum((a == k) + (b == k) for a, b, _ in self.edges if a != b)

    def connected_components(self):
        parent = list(range(len(self.vertices)))

        def root(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b, _ in self.edges:
            parent[root(a)] = root(b)
        groups = {}
        for k in range(len(self.vertices)):
            groups.setdefault(root(k), []).append(k)
        return list(groups.values())

    def canonical_degree_sum(self):
        """sum over components of mult * K.W computed by adjunction."""
        total = 0
        for x in self.vertices:
            total += x.mult * (2 * x.arithmetic_genus - 2 - x.selfint)
        return total

    def as_dict(self):
        return {
            "vertices": [
                {
                    "valuation": str(x.v),
                    "lift": x.lift,
                    "multiplicity": x.mult,
                    "components_above": x.count,
                    "reduced_degree": x.degree,
                    "genus": x.genus,
                    "nodes": x.nodes,
                    "self_intersection": x.selfint,
                    "marked_points": x.marks,
                }
                for x in self.vertices
            ],
            "edges": [
                {
                    "from": list(self.vertices[a].key),
                    "to": list(self.vertices[b].key),
                    "at": lab,
                }
                for a, b, lab in self.edges
            ],
            "self_loops": [
                {"at": list(self.vertices[a].key), "where": lab} for a, lab in self.loops
            ],
        }


def _local_points(spec, V, v, q, kind, other, facs):
    d, a = spec.d, spec.a
    ev = ram_index(v)
    m = int(ev * spec.f_value(v))
    if kind == "crossing":
        lo, hi = (other, v) if leq(other, v) else (v, other)
        cd = crossing_data(spec, crossing_point(lo, hi))
        return gcd_all(d, cd.e, cd.s)
    if kind == "infinity":
        meet = [i for i, t in enumerate(spec.infinities) if not leq(v, t)]
        e = sum(k * f.degree for i, (f, k) in enumerate(spec.factors) if i not in meet)
        return gcd_all(d, a, *[spec.factors[i][1] for i in meet], e)
    if kind == "infinity-crossing":
        icd = infty_crossing_data(spec, v, other)
        return gcd_all(d, icd.delta2, a)
    if kind == "cusp":
        pre = v.prefix(v.length - 1)
        phi = v.last_key
        meet = _cusp_meeting(spec, v)
        deg_g = sum(spec.factors[i][1] * spec.factors[i][0].degree for i in meet)
        if deg_g % phi.degree:
            raise StructureViolation("cusp exponent is not integral")
        vh = a + sum(
            k * _value(v.p, v.chain, f)
            for i, (f, k) in enumerate(spec.factors)
            if i not in meet
        )
        s = ram_index(pre) * vh
        if s.denominator != 1:
            raise StructureViolation("cusp datum s is not an integer")
        return gcd_all(d, deg_g // phi.degree, int(s))
    if kind == "branch":
        return gcd_all(d, m, *[spec.factors[i][1] for i in facs])
    return gcd(d, m)


def _classify(spec, V, v, q, other, facs):
    M = V.model()
    if q.kind == "down":
        low = [w for w in neighbors(M, v) if leq(w, v) and w != v]
        if low:
            return "crossing", low[0]
        mins = M.minimal()
        if len(mins) == 1:
            return "infinity", None
        if len(mins) == 2:
            return "infinity-crossing", [w for w in mins if w != v][0]
        raise StructureViolation("more than two minimal members")
    if other is not None:
        if facs:
            raise StructureViolation(f"a branch point sits on a crossing at {v}")
        return "crossing", other
    if q.kind == "up" and has_cusp(M, v):
        return "cusp", None
    if facs:
        return "branch", None
    return "smooth", None


def analyse_component(spec, V, v):
    """Marked points of v with orders, branch counts and point counts."""
    pts, nb, fac = _marked_points(spec, V, v)
    d = spec.d
    ev = ram_index(v)
    m = int(ev * spec.f_value(v))
    D = gcd(d, m)
    out = []
    for k, q in enumerate(pts):
        other = nb.get(k)
        facs = tuple(fac.get(k, ()))
        kind, other = _classify(spec, V, v, q, other, facs)
        if kind == "infinity" and q.kind == "down":
            facs = tuple(i for i, t in enumerate(spec.infinities) if not leq(v, t))
        order = _order(spec, v, q)
        mp = MarkedPoint(q, kind, order, gcd(D, order), 0, other, facs)
        mp.points = _local_points(spec, V, v, q, kind, other, facs)
        out.append(mp)
    if sum(x.order for x in out) != 0:
        raise StructureViolation(f"residual orders on {v} do not sum to zero")
    return D, out


def dual_graph(spec, V):
    """Decorated dual graph of the fiber over the base V.

    The fiber over V_reg is assembled from local data.  A smaller base
    inside V_reg is reached from there by contracting the components
    above the dropped valuations, which is how such bases arise.
    """
    from .cover import build_vreg

    M = V.model()
    reg = build_vreg(spec).vreg
    if M != reg and all(v in reg for v in M):
        return contract(local_graph(spec, reg), M)
    return local_graph(spec, M)


def local_graph(spec, V):
    """Assemble the dual graph from the local data at every marked point."""
    M = V.model()
    d = spec.d
    vertices, info = [], {}
    for v in M.valuations():
        D, pts = analyse_component(spec, M, v)
        n = gcd_all(D, *[x.order for x in pts])
        deg = D // n
        ram = Fraction(0)
        for x in pts:
            if x.branches % n:
                raise StructureViolation(f"branch count not divisible by {n} at {v}")
            ram += Fraction(x.branches, n) * (Fraction(D, x.branches) - 1)
            ratio = Fraction(x.branches, x.points)
            if ratio not in (1, 2):
                raise StructureViolation(
                    f"{x.branches} branches over {x.points} points on {v}: not normal crossings"
                )
        two_g = -2 * deg + ram + 2
        if two_g.denominator != 1 or int(two_g) % 2 or two_g < 0:
            raise StructureViolation(f"Riemann-Hurwitz gives a bad genus on {v}")
        genus = int(two_g) // 2
        mult = mult_upstairs(spec, v)
        marks = [x.as_dict(v) for x in pts]
        info[v] = (n, pts)
        for j in range(n):
            vertices.append(Vertex(v, j, mult, n, deg, genus, marks=marks))
    graph = FiberGraph(spec, vertices, [], [])
    seen = set()
    for v in M.valuations():
        n, pts = info[v]
        for x in pts:
            if x.kind in ("crossing", "infinity-crossing"):
                w = x.other
                pair = frozenset((str(v), str(w)))
                if pair in seen:
                    continue
                seen.add(pair)
                nw, pw = info[w]
                back = [y for y in pw if y.other == v and y.kind == x.kind]
                if len(back) != 1:
                    raise StructureViolation(f"crossing {v} / {w} seen from one side only")
                y = back[0]
                if not (x.branches == y.branches == x.points == y.points):
                    raise StructureViolation(f"crossing {v} / {w} is not transversal")
                lab = "infinity crossing" if x.kind == "infinity-crossing" else "crossing"
                for j in range(x.points):
                    graph.edges.append(
                        (graph.index(v, j % n), graph.index(w, j % nw), lab)
                    )
            elif x.branches == 2 * x.points:
                for j in range(x.points):
                    a = graph.index(v, j % n)
                    b = graph.index(v, (j + x.points) % n)
                    lab = f"node ({x.kind})"
                    if a == b:
                        graph.loops.append((a, lab))
                        vertices[a].nodes += 1
                    else:
                        graph.edges.append((a, b, lab))
    _fill_self_intersections(graph)
    return graph


def contract(graph, keep):
    """Blow down every component above a valuation outside keep.

    Each connected cluster of dropped components becomes one point on
    the kept components it met; two branches there make a node.
    """
    kept = [k for k, x in enumerate(graph.vertices) if x.v in keep]
    where = {k: i for i, k in enumerate(kept)}
    vertices = [replace(graph.vertices[k], selfint=None) for k in kept]
    edges = [(where[a], where[b], lab) for a, b, lab in graph.edges if a in where and b in where]
    loops = [(where[a], lab) for a, lab in graph.loops if a in where]
    dropped = [k for k in range(len(graph.vertices)) if k not in where]
    seen = set()
    for start in dropped:
        if start in seen:
            continue
        cluster, todo = {start}, [start]
        while todo:
            k = todo.pop()
            for a, b, _ in graph.edges:
                for x, y in ((a, b), (b, a)):
                    if x == k and y not in where and y not in cluster:
                        cluster.add(y)
                        todo.append(y)
        seen |= cluster
        touch = []
        for a, b, _ in graph.edges:
            if a in cluster and b in where:
                touch.append(where[b])
            elif b in cluster and a in where:
                touch.append(where[a])
        if not touch:
            raise StructureViolation("a whole connected piece of the fiber was contracted")
        if len(touch) > 2:
            raise StructureViolation("contraction leaves a point on three branches")
        if len(touch) == 2:
            a, b = touch
            if a == b:
                loops.append((a, "contracted"))
                vertices[a].nodes += 1
            else:
                edges.append((a, b, "contracted"))
    out = FiberGraph(graph.spec, vertices, edges, loops)
    _fill_self_intersections(out)
    return out


def _fill_self_intersections(graph):
    want = gcd_all(graph.spec.d, graph.spec.a, *graph.spec.exps)
    got = len(graph.connected_components())
    if got != want:
        raise StructureViolation(f"special fiber has {got} connected pieces, expected {want}")
    for k, x in enumerate(graph.vertices):
        if graph.degree(k) == 0:
            # alone in its connected piece, so W is a whole fiber piece: W.W = 0
            x.selfint = 0
            continue
        tot = 0
        for a, b, _ in graph.edges:
            if a == k and b != k:
                tot += graph.vertices[b].mult
            elif b == k and a != k:
                tot += graph.vertices[a].mult
        val = Fraction(-tot, x.mult)
        if val.denominator != 1 or val >= 0:
            raise StructureViolation(f"self-intersection {fmt_rat(val)} at {x.v}")
        x.selfint = int(val)


def self_intersections(graph):
    """W.W for every vertex (0 when the vertex meets nothing else)."""
    return {x.key: x.selfint for x in graph.vertices}


def expected_canonical_degree(spec):
    """2g(X) - 2 from the generic fiber, as sum over geometric components."""
    d = spec.d
    c = gcd_all(d, *spec.exps)
    d1 = d // c
    two_g = -2 * d1 + sum(f.degree * (d1 - gcd(d1, k // c)) for f, k in spec.factors)
    return c * two_g


def exceptional_components(graph):
    """Orbits of disjoint (-1)-curves of genus 0 that could be contracted."""
    out = []
    mat = graph.degree_matrix()
    by_v = {}
    for k, x in enumerate(graph.vertices):
        by_v.setdefault(str(x.v), []).append(k)
    for key, idx in by_v.items():
        xs = [graph.vertices[k] for k in idx]
        if any(x.selfint != -1 or x.arithmetic_genus != 0 for x in xs):
            continue
        if any(mat[a][b] for a in idx for b in idx):
            continue
        if len(idx) == len(graph.vertices):
            continue
        ok = True
        for k in idx:
            nbrs = [
                (b, mat[k][b]) for b in range(len(graph.vertices)) if b != k and mat[k][b]
            ]
            ms = [graph.vertices[b].mult for b, c in nbrs for _ in range(c)]
            m = graph.vertices[k].mult
            if not ((len(ms) == 1 and ms[0] == m) or (len(ms) == 2 and sum(ms) == m)):
                ok = False
        if ok:
            out.append(key)
    return out
