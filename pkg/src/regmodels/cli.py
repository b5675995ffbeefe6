"""Command line front end.

    regmodels <check|valuations|vreg|vmin|fiber|graph> --input FILE
              [--format text|json|dot] [--dump-stages] [--base vreg|vmin]

The input is a JSON object with keys p, d, pi_exponent and factors; each
factor is [coefficients, exponent] (or {"coeffs": ..., "exp": ...}) with
coefficients listed lowest degree first, as integers or "num/den" strings.

Exit codes: 0 success, 2 invalid input, 3 needs a residue field extension,
4 internal invariant violation.
"""

import argparse
import json
import sys
from dataclasses import dataclass

from .arith import QPoly, as_rat, fmt_rat
from .cover import (
    CoverSpec,
    build_vreg,
    compute_S,
    infty_data,
    minimize,
    removability_pass,
    validate_normalize,
)
from .errors import ParseError, RegModelsError
from .fiber import dual_graph, expected_canonical_degree

COMMANDS = ("check", "valuations", "vreg", "vmin", "fiber", "graph")
FORMATS = ("text", "json", "dot")


@dataclass(frozen=True)
class RunConfig:
    command: str
    source: dict
    fmt: str = "text"
    dump_stages: bool = False
    base: str = "vmin"


def _need(obj, key):
    if key not in obj:
        raise ParseError(f"missing key {key!r}")
    return obj[key]


def _int(x, name):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{name} must be an integer, got {x!r}")
    return x


def parse_input(source):
    """Build a raw CoverSpec from a decoded JSON object (not yet validated)."""
    if not isinstance(source, dict):
        raise ParseError("input must be a JSON object")
    p = _int(_need(source, "p"), "p")
    d = _int(_need(source, "d"), "d")
    a = _int(source.get("pi_exponent", 0), "pi_exponent")
    raw = _need(source, "factors")
    if not isinstance(raw, list) or not raw:
        raise ParseError("factors must be a non-empty list")
    factors = []
    for item in raw:
        if isinstance(item, dict):
            coeffs, k = _need(item, "coeffs"), item.get("exp", 1)
        elif isinstance(item, list) and len(item) == 2:
            coeffs, k = item
        else:
            raise ParseError(f"bad factor entry {item!r}")
        if not isinstance(coeffs, list) or not coeffs:
            raise ParseError(f"bad coefficient list {coeffs!r}")
        factors.append((QPoly([as_rat(c) for c in coeffs]), _int(k, "exponent")))
    return CoverSpec(p, d, a, tuple(factors))


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _spec_report(raw, spec):
    return {
        "p": spec.p,
        "d": spec.d,
        "pi_exponent": spec.a,
        "equation": spec.describe(),
        "factors": [
            {
                "poly": str(f),
                "coeffs_low_first": [fmt_rat(c) for c in f.coeffs],
                "exp": k,
            }
            for f, k in spec.factors
        ],
        "substitutions": [
            f"t -> {c} + {spec.p}^{b} t" for c, b in spec.substitutions
        ],
        "input_equation": raw.describe(),
    }


def _forest(V):
    return V.as_dict()


def run(cfg):
    """Execute the requested stage and return a JSON-ready report."""
    raw = parse_input(cfg.source)
    spec = validate_normalize(raw)
    rep = {"command": cfg.command, "spec": _spec_report(raw, spec)}
    if cfg.command == "valuations":
        rep["factors"] = [
            {
                "poly": str(f),
                "base": str(b),
                "pseudovaluation": str(inf_i),
            }
            for (f, _), b, inf_i in zip(spec.factors, spec.bases, spec.infinities)
        ]
        return rep
    reg = build_vreg(spec)
    if cfg.dump_stages:
        rep["stages"] = {k: _forest(V) for k, V in reg.stages.items()}
        rep["links"] = [cd.row() for cd in reg.links]
        rep["tails"] = [
            {
                "at": str(td.v),
                "Nt": td.Nt,
                "from": fmt_rat(td.lam),
                "to": fmt_rat(td.lam2),
                "chain": [str(x) for x in td.chain],
            }
            for td in reg.tails
        ]
        rep["branch_tails"] = [
            {
                "factor": str(spec.factors[bd.index][0]),
                "start": str(bd.start),
                "N": bd.N,
                "s": bd.s,
                "Nt": bd.Nt,
                "from": fmt_rat(bd.lam),
                "to": fmt_rat(bd.lam2),
                "chain": [str(x) for x in bd.chain],
            }
            for bd in reg.branch_tails
        ]
    vp, removed = removability_pass(spec, reg.vreg)
    mres = minimize(spec, vp)
    if cfg.command in ("check", "vreg"):
        rep["vreg"] = _forest(reg.vreg)
        rep["crossings"] = [cd.row() for cd in reg.crossings()]
    if cfg.command == "check":
        # every later stage must succeed for check to pass
        dual_graph(spec, reg.vreg)
        dual_graph(spec, mres.vmin)
        rep["status"] = "ok"
        return rep
    if cfg.command == "vreg":
        return rep
    if cfg.command == "vmin":
        rep["vreg"] = reg.vreg.strings()
        rep["removed"] = [
            {
                "valuation": str(r.v),
                "factor": str(spec.factors[r.index][0]),
                "clauses": r.clauses,
            }
            for r in removed
        ]
        rep["vreg_prime"] = vp.strings()
        S = compute_S(spec, vp)
        rep["S"] = [
            {"valuation": str(v), "flags": infty_data(spec, v).flags} for v in S
        ]
        rep["case"] = mres.case
        if mres.pair is not None:
            pr = mres.pair
            rep["infinity_crossing"] = {
                "v": str(pr.v),
                "v'": str(pr.w),
                "delta": pr.delta,
                "delta'": pr.delta2,
                "a": pr.a,
                "r": pr.r,
                "Nt": pr.Nt,
                "path": f"{fmt_rat(pr.hi)} > {fmt_rat(pr.lo)}",
            }
        if mres.leaf_check is not None:
            rep["leaf_contraction"] = {
                k: v for k, v in mres.leaf_check.items()
            }
            rep["contracted"] = str(mres.contracted) if mres.contracted else None
        rep["vmin"] = _forest(mres.vmin)
        return rep
    V = mres.vmin if cfg.base == "vmin" else reg.vreg
    graph = dual_graph(spec, V)
    rep["base"] = cfg.base
    rep["fiber"] = graph.as_dict()
    rep["canonical_degree"] = {
        "from_graph": graph.canonical_degree_sum(),
        "from_generic_fiber": expected_canonical_degree(spec),
    }
    rep["_graph"] = graph
    return rep


def emit_dot(graph):
    """DOT text for a fiber graph with deterministic ordering."""
    order = sorted(
        range(len(graph.vertices)),
        key=lambda k: (str(graph.vertices[k].v), graph.vertices[k].lift),
    )
    name = {k: f"n{i}" for i, k in enumerate(order)}
    lines = ["graph fiber {", "  node [shape=box];"]
    for k in order:
        x = graph.vertices[k]
        lab = f"{x.v} #{x.lift} | {x.mult} | {x.selfint}"
        lines.append(f'  {name[k]} [label="{lab}"];')
    edges = sorted(
        (min(name[a], name[b]), max(name[a], name[b]), lab) for a, b, lab in graph.edges
    )
    for a, b, lab in edges:
        lines.append(f'  {a} -- {b} [label="{lab}"];')
    for a, lab in sorted((name[a], lab) for a, lab in graph.loops):
        lines.append(f'  {a} -- {a} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _text_forest(title, F, out):
    out.append(f"{title} ({len(F['members'])}):")
    out.extend(f"  {m}" for m in F["members"])
    if F.get("edges"):
        out.append("  edges:")
        out.extend(f"    {a} -- {b}" for a, b in F["edges"])


def emit_text(rep):
    out = []
    sp = rep["spec"]
    out.append(sp["equation"])
    for f in sp["factors"]:
        out.append(f"  factor {f['poly']}  (low-first {f['coeffs_low_first']}) ^{f['exp']}")
    for sub in sp["substitutions"]:
        out.append(f"  normalized by {sub} (input: {sp['input_equation']})")
    if "factors" in rep:
        for f in rep["factors"]:
            out.append(f"{f['poly']}: base {f['base']}")
            out.append(f"  pseudovaluation {f['pseudovaluation']}")
    for key in ("V1", "V2", "V3", "V4", "V5"):
        if "stages" in rep:
            _text_forest(key, rep["stages"][key], out)
    for key, title in (("links", "link data"),):
        if key in rep:
            out.append(f"{title}:")
            out.extend("  " + _row(r) for r in rep[key])
    if "tails" in rep:
        out.append("tails:")
        for t in rep["tails"]:
            out.append(f"  at {t['at']}: Nt={t['Nt']} {t['from']} -> {t['to']}")
    if "branch_tails" in rep:
        out.append("branch tails:")
        for t in rep["branch_tails"]:
            out.append(
                f"  {t['factor']} from {t['start']}: N={t['N']} s={t['s']} "
                f"Nt={t['Nt']} {t['from']} -> {t['to']}"
            )
    if isinstance(rep.get("vreg"), dict):
        _text_forest("V_reg", rep["vreg"], out)
    elif "vreg" in rep:
        out.append(f"V_reg ({len(rep['vreg'])}):")
        out.extend(f"  {m}" for m in rep["vreg"])
    if "crossings" in rep:
        out.append("crossings:")
        out.extend("  " + _row(r) for r in rep["crossings"])
    if "removed" in rep:
        if rep["removed"]:
            for r in rep["removed"]:
                out.append(f"removed {r['valuation']} (leaf of {r['factor']}; clauses a-d hold)")
        else:
            out.append("removed: none")
        out.append("S: " + ", ".join(s["valuation"] for s in rep["S"]))
        out.append(f"case {rep['case']}")
        if "infinity_crossing" in rep:
            ic = rep["infinity_crossing"]
            other = ic["v'"]
            out.append(
                f"  infinity crossing {ic['v']} / {other}: "
                f"Nt={ic['Nt']} path {ic['path']}"
            )
        if rep.get("contracted"):
            lem = rep["leaf_contraction"]
            out.append(
                f"  contracted {rep['contracted']} (d={lem['d']}, e_w={lem['e_w']}, "
                f"a={lem['a']}, w(f)={lem['w_f']})"
            )
        _text_forest("V_min", rep["vmin"], out)
    if "fiber" in rep:
        fb = rep["fiber"]
        out.append(f"fiber over {rep['base']}: {len(fb['vertices'])} components")
        for x in fb["vertices"]:
            out.append(
                f"  {x['valuation']} #{x['lift']}: mult {x['multiplicity']}, "
                f"genus {x['genus']}, nodes {x['nodes']}, self-int {x['self_intersection']}"
            )
        for e in fb["edges"]:
            out.append(f"  {e['from'][0]} #{e['from'][1]} -- {e['to'][0]} #{e['to'][1]} ({e['at']})")
        for e in fb["self_loops"]:
            out.append(f"  node on {e['at'][0]} #{e['at'][1]} ({e['where']})")
        cd = rep["canonical_degree"]
        out.append(f"  K.F = {cd['from_graph']} (generic fiber: {cd['from_generic_fiber']})")
    if rep.get("status"):
        out.append(f"status: {rep['status']}")
    return "\n".join(out) + "\n"


def _row(r):
    return (
        f"{r['lower']} -- {r['upper']}: N={r['N']} e={r['e']} s={r['s']} "
        f"Nt={r['Nt']} r={r['r']} lt={r['lt']} lt'={r['lt2']}"
    )


def build_parser():
    ap = argparse.ArgumentParser(
        prog="regmodels",
        description="Regular and minimal normal crossings models of z^d = f(t).",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", required=True, help="JSON file describing the cover")
    ap.add_argument("--format", choices=FORMATS, default=None)
    ap.add_argument("--dump-stages", action="store_true", help="include V1..V5")
    ap.add_argument(
        "--base",
        choices=("vmin", "vreg"),
        default="vmin",
        help="which base the fiber/graph commands use",
    )
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    fmt = args.format or ("dot" if args.command == "graph" else "text")
    if fmt == "dot" and args.command not in ("graph", "fiber"):
        print("error: --format dot needs the graph or fiber command", file=sys.stderr)
        return 2
    try:
        cfg = RunConfig(args.command, load(args.input), fmt, args.dump_stages, args.base)
        rep = run(cfg)
    except RegModelsError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, ValueError) as exc:
        print(f"error (internal): {exc}", file=sys.stderr)
        return 4
    graph = rep.pop("_graph", None)
    if fmt == "dot":
        sys.stdout.write(emit_dot(graph))
    elif fmt == "json":
        sys.stdout.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(emit_text(rep))
    return 0


if __name__ == "__main__":
    sys.exit(main())
