import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from regmodels.arith import QPoly
from regmodels.cover import (
    CoverSpec,
    branch_tail,
    build_vreg,
    compute_S,
    crossing_data,
    infty_crossing_check,
    link,
    base_contraction_report,
    minimize,
    removability_pass,
    removability_report,
    resolution_is_fixed_point,
    run_pipeline,
    tail,
    validate_normalize,
    verify_regular,
)
from regmodels.errors import BranchMeetsCrossing, InvalidInput, ReducibleInput, RequiresResidueExtension
from regmodels.maclane import MacLaneVal
from regmodels.model import finite_cusps, standard_crossings

from goldens import OCTIC_VREG, QUINTIC_VREG, elliptic, octic, quintic, two_cusps
from specgen import random_spec

F = Fraction
t = QPoly.t()


def test_validate_rescales_common_residue_class():
    s = validate_normalize(CoverSpec(3, 2, 0, ((t - 3, 1), (t - 6, 1), (t - 12, 1), (t - 21, 1))))
    assert s.substitutions == ((0, 1),)
    assert [str(f) for f in s.polys] == ["t - 1", "t - 2", "t - 4", "t - 7"]


def test_validate_drops_dth_powers():
    s = validate_normalize(CoverSpec(5, 2, 0, ((t - 1, 2), (t - 2, 1), (t - 3, 1), (t, 1), (t - 4, 1))))
    assert [str(f) for f in s.polys] == ["t - 2", "t - 3", "t", "t - 4"]


@pytest.mark.parametrize(
    "args, exc",
    [
        ((3, 6, 0, ((t - 1, 3), (t, 3))), InvalidInput),
        ((5, 3, 0, ((t - 1, 1), (t - 2, 1))), InvalidInput),
        ((5, 2, 0, ((t**2 - 1, 1), (t - 2, 1), (t - 3, 1))), ReducibleInput),
        ((3, 2, 0, ((t**2 + 1, 1), (t - 1, 1), (t, 1))), RequiresResidueExtension),
        ((4, 3, 0, ((t - 1, 1), (t - 2, 1), (t - 3, 1))), InvalidInput),
    ],
)
def test_validate_rejects(args, exc):
    with pytest.raises(exc):
        validate_normalize(CoverSpec(*args))


def test_quintic_stages():
    b = build_vreg(quintic())
    assert len(b.stages["V1"].model()) == 2
    assert sorted(b.vreg.model().strings()) == sorted(QUINTIC_VREG)
    (cd,) = [crossing_data(quintic(), c) for c in standard_crossings(b.stages["V2"].model())]
    assert (cd.N, cd.e, cd.s, cd.Nt, cd.r, cd.lt, cd.lt2) == (1, 3, 0, 1, 2, F(0), F(2, 15))
    assert [str(v) for v in link(quintic(), cd.point)] == [
        "[v0, v1(t) = 2/3]",
        "[v0, v1(t) = 5/8]",
        "[v0]",
    ]


def test_quintic_tail_and_branch_tail():
    s = quintic()
    V3 = build_vreg(s).stages["V3"].model()
    (cusp,) = finite_cusps(V3)
    assert [str(v) for v in tail(s, cusp)] == [
        "[v0, v1(t) = 4/5]",
        "[v0, v1(t) = 7/10]",
        "[v0, v1(t) = 2/3]",
    ]
    V4 = build_vreg(s).stages["V4"]
    got = [str(v) for v in branch_tail(s, V4, 1)]
    assert got == [
        "[v0, v1(t) = 2/3, v2(t^3 - 9) = 10/3]",
        "[v0, v1(t) = 2/3, v2(t^3 - 9) = 5/2]",
        "[v0, v1(t) = 2/3, v2(t^3 - 9) = 20/9]",
        "[v0, v1(t) = 2/3, v2(t^3 - 9) = 25/12]",
        "[v0, v1(t) = 2/3]",
    ]


def test_quintic_minimization_is_trivial():
    r = run_pipeline(quintic())
    assert r.removed == []
    assert r.minres.case == "3(i)"
    assert r.vmin == r.vreg


@pytest.mark.parametrize("p", [3, 7, 11])
def test_elliptic_removes_the_branch_component(p):
    s = elliptic(p)
    r = run_pipeline(s)
    assert r.vreg.strings() == ["[v0]", "[v0, v1(t) = 1/2]"]
    (rem,) = r.removed
    assert str(rem.v) == "[v0, v1(t) = 1/2]"
    assert all(rem.clauses[k] for k in ("maximal", "a", "b", "c", "d"))
    assert r.vmin.strings() == ["[v0]"]


def test_removability_clause_failures():
    s = quintic()
    V = build_vreg(s).vreg
    rep, _ = removability_report(s, V, MacLaneVal.gauss(3))
    assert rep["maximal"] is False
    _, removed = removability_pass(s, V)
    assert removed == []


def test_octic_case_iii():
    s = octic()
    r = run_pipeline(s)
    assert sorted(r.vreg.strings()) == sorted(OCTIC_VREG)
    assert r.minres.case == "3(iii)"
    lem = r.minres.leaf_check
    assert (lem["d"], lem["e_w"], lem["a"], lem["w_f"]) == (8, 4, 1, "6")
    assert all(lem[k] for k in ("i", "ii", "iii"))
    assert r.vmin.strings() == ["[v0, v1(t) = 1/2, v2(t^2 - 3) = 5/4]"]


def test_octic_leaf_report_on_first_removed():
    s = octic()
    V = run_pipeline(s).vreg_prime
    rep = base_contraction_report(s, V.without([MacLaneVal.gauss(3)]), V.members[1])
    assert rep["length1"] and rep["unique_upper"]
    assert rep["length2"] is False


def test_two_cusps_case_ii():
    s = two_cusps()
    r = run_pipeline(s)
    assert r.vreg_prime.strings() == [
        "[v0]",
        "[v0, v1(t) = 1/3]",
        "[v0, v1(t - 1) = 1/3]",
    ]
    assert r.minres.case == "3(ii)"
    pair = r.minres.pair
    assert (pair.Nt, pair.hi, pair.lo, pair.regular) == (3, F(1, 3), F(0), True)
    v, w = r.vreg_prime.members[1:]
    assert infty_crossing_check(s, v, w)
    assert r.vmin.strings() == ["[v0, v1(t) = 1/3]", "[v0, v1(t - 1) = 1/3]"]


def test_compute_S_goldens():
    assert [str(v) for v in compute_S(quintic(), build_vreg(quintic()).vreg)] == ["[v0]"]
    assert len(compute_S(octic(), build_vreg(octic()).vreg)) == 5


def test_minimize_requires_v0():
    s = octic()
    V = build_vreg(s).vreg.without([MacLaneVal.gauss(3)])
    with pytest.raises(Exception):
        minimize(s, V)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(seed=st.integers(0, 10**9))
def test_vreg_is_regular_and_a_fixed_point(seed):
    rng = random.Random(seed)
    raw = random_spec(rng)
    if raw is None:
        return
    try:
        s = validate_normalize(raw)
    except (InvalidInput, RequiresResidueExtension):
        return
    V = build_vreg(s).vreg
    assert verify_regular(s, V) == []
    assert resolution_is_fixed_point(s, V)


def _link_with_r(spec, c, r):
    from math import gcd

    from regmodels.maclane import _with_last
    from regmodels.npath import shortest_n_path

    cd = crossing_data(spec, c)
    ge = gcd(spec.d, cd.e)
    shift = Fraction(r * cd.s, cd.N * spec.d)
    lo = Fraction(ge, spec.d) * c.lam_lo + shift
    hi = Fraction(ge, spec.d) * c.lam_hi + shift
    return [
        _with_last(c.prefix, c.phi, (x - shift) * spec.d / ge)
        for x in shortest_n_path(cd.Nt, hi, lo)
    ]


def test_links_do_not_depend_on_r():
    from math import gcd

    from specgen import random_specs

    seen = 0
    for s in random_specs(31, 40):
        for V in build_vreg(s).stages.values():
            for c in standard_crossings(V.model()):
                try:
                    cd = crossing_data(s, c)
                except BranchMeetsCrossing:
                    continue  # resolved later in the pipeline
                step = s.d // gcd(s.d, cd.e)
                want = link(s, c)
                for k in (1, 2, -3):
                    assert _link_with_r(s, c, cd.r + k * step) == want
                seen += 1
    assert seen > 20
