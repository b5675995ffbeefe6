"""Random valuations and brute-force oracles shared by the property and
acceptance suites."""

import random
from fractions import Fraction

from regmodels.arith import INF, QPoly
from regmodels.errors import RegModelsError
from regmodels.maclane import (
    MacLaneVal,
    _with_last,
    augment,
    leq,
    maclane_chain,
    valuate,
)

t = QPoly.t()


def random_key(rng, p):
    c = rng.randint(-p * p, p * p)
    if rng.random() < 0.4:
        return QPoly.linear(c)
    k = rng.randint(2, 3)
    j = rng.randint(1, 5)
    u = rng.randint(1, p - 1)
    g = (t - c) ** k - u * p**j
    if rng.random() < 0.3:
        g = g + p ** (j + 1) * t
    return g


def random_valuation(rng, p, pseudo=False):
    """A valuation reached by approximating a random irreducible polynomial."""
    for _ in range(20):
        g = random_key(rng, p)
        try:
            v = maclane_chain(g, p)
        except RegModelsError:
            continue
        roll = rng.random()
        if pseudo and roll < 0.15:
            return MacLaneVal(p, v.chain + ((g, INF),))
        if roll < 0.35:
            return v.prefix(rng.randint(0, v.length))
        step = Fraction(rng.randint(1, 6), rng.randint(1, 4))
        return augment(v, g, valuate(v, g) + step)
    return MacLaneVal.gauss(p)


def random_poly(rng, p, max_deg=5):
    deg = rng.randint(0, max_deg)
    coeffs = []
    for _ in range(deg + 1):
        c = Fraction(rng.randint(-50, 50))
        r = rng.random()
        if r < 0.2:
            c *= p ** rng.randint(1, 4)
        elif r < 0.3:
            c /= p
        coeffs.append(c)
    if all(c == 0 for c in coeffs):
        coeffs[-1] = Fraction(1)
    return QPoly(coeffs)


def sampling_leq(v, w, rng, extra=12):
    """v <= w decided by comparing values on the keys of both chains plus
    random samples."""
    p = v.p
    samples = [phi for phi, _ in v.chain] + [phi for phi, _ in w.chain]
    samples += [t, QPoly.const(p)]
    samples += [random_poly(rng, p) for _ in range(extra)]
    return all(valuate(v, g) <= valuate(w, g) for g in samples)


def truncation_inf(v, w, max_den=24):
    """Largest common lower bound among truncations of v, by search.

    Candidates are [v_0..v_i, phi_{i+1} = mu] for mu on a rational grid
    between the prefix value of phi_{i+1} and its value in v, together with
    the values w and v take on that key.
    """
    cands = [MacLaneVal.gauss(v.p)]
    for i, (phi, lam) in enumerate(v.chain):
        pre = v.prefix(i)
        lo = valuate(pre, phi)
        hi = lam
        mus = {hi, valuate(w, phi)}
        top = hi if hi is not INF else lo + 8
        for den in range(1, max_den + 1):
            n0 = int(lo * den)
            for n in range(n0, int(top * den) + 2):
                mus.add(Fraction(n, den))
        for mu in mus:
            if mu is INF and hi is not INF:
                continue
            if mu is not INF and (mu < lo or (hi is not INF and mu > hi)):
                continue
            cands.append(_with_last(pre, phi, mu))
    good = [u for u in cands if leq(u, v) and leq(u, w)]
    best = [u for u in good if all(leq(x, u) for x in good)]
    assert len(best) >= 1, "oracle found no maximum"
    return best[0]


def rng_for(seed):
    return random.Random(seed)
