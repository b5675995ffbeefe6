"""Deterministic random covers for the property and acceptance suites."""

import random

from regmodels.arith import QPoly
from regmodels.cover import CoverSpec, validate_normalize
from regmodels.errors import InvalidInput, RequiresResidueExtension


def _factor(rng, p, max_deg):
    kind = rng.random()
    if kind < 0.4:
        return QPoly.linear(rng.randint(-p * p, p * p))
    k = rng.randint(2, max(2, max_deg))
    c = rng.randint(0, p - 1)
    j = rng.randint(1, 4)
    u = rng.choice([1, -1, 2, p + 1])
    # (t - c)^k - p^j u, plus an optional small perturbation
    poly = QPoly.linear(c) ** k - QPoly.const(u * p**j)
    if rng.random() < 0.3 and k > 2:
        poly = poly + QPoly((0, p ** (j + 1)))
    return poly


def random_spec(rng, monic=False, odd=False, max_total=8):
    """One raw (unvalidated) random spec, or None when the draw is unusable."""
    p = rng.choice([3, 5, 7])
    ds = [d for d in range(2, 9) if d % p and (not odd or d % 2)]
    d = rng.choice(ds)
    q = rng.randint(1, 3)
    facs = []
    for _ in range(q):
        left = max_total - sum(f.degree for f, _ in facs)
        if left < 1:
            break
        f = _factor(rng, p, min(left, 4))
        if f.degree > left or any(f == g for g, _ in facs):
            continue
        facs.append((f, rng.randint(1, d)))
    if not facs:
        return None
    # fix the last exponent so that d divides the weighted degree
    f, _ = facs[-1]
    rest = sum(k * g.degree for g, k in facs[:-1])
    for k in range(1, d + 1):
        if (rest + k * f.degree) % d == 0:
            facs[-1] = (f, k)
            break
    else:
        return None
    a = 0 if monic else rng.randint(0, d - 1)
    return CoverSpec(p, d, a, tuple(facs))


def random_specs(seed, count, **kw):
    """count validated specs; draws that fail validation are skipped."""
    rng = random.Random(seed)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 200 * count:
            raise RuntimeError("generator could not find enough valid specs")
        raw = random_spec(rng, **kw)
        if raw is None:
            continue
        try:
            out.append(validate_normalize(raw))
        except (InvalidInput, RequiresResidueExtension):
            continue
    return out
