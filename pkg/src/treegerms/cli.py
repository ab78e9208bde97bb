"""The ``treegerms`` command line.

Every subcommand prints a table (TSV, one header line) or a JSON document.
Batch commands keep going past a bad entry and record the error in its row;
the exit status is 0 on success, 1 if any entry failed and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from . import burger_mozes as bm
from . import germ as gm
from . import portrait as pt
from . import treepair as tp
from .catalog import CatalogEntry, inline_entry, load_catalog
from .errors import TreeGroupError
from .named import agaml18, beta_gf7_to_gf8, named_group, psl27
from .permgroup import (
    DEFAULT_CAP,
    DEFAULT_MAX_SYM_DEGREE,
    Perm,
    PermGroup,
    is_permutation_equivalence,
    is_primitive,
    normalizer_in_sym,
    orbits,
    parse_generators,
    permutation_equivalence,
    point_stabilizer,
    structure_flags,
    transitivity_degree,
)

ENTRY_ERRORS = (TreeGroupError, ValueError, KeyError, OSError)


class EntryFailed(Exception):
    """Raised inside a command to report an input error and exit with 1."""


# -- output ------------------------------------------------------------------


def _cell(value):
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_cell(v) for v in value)
    return str(value).replace("\t", " ").replace("\n", " | ")


def write_table(out, rows, columns=None):
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(c for c in row if c not in columns)
    out.write("\t".join(columns) + "\n")
    for row in rows:
        out.write("\t".join(_cell(row.get(c)) for c in columns) + "\n")


def write_json(out, obj):
    out.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _run_batch(func, entries, jobs):
    """Map ``func`` over entries, in input order, optionally in processes."""
    if jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, entries))
    return [func(e) for e in entries]


# -- input helpers -----------------------------------------------------------


def resolve_group(spec, degree=None):
    """A group from a fixture name or a generator string."""
    try:
        g = named_group(spec)
    except KeyError:
        gens = parse_generators(spec, degree)
        g = PermGroup(gens[0].degree, gens, name=spec)
    if degree is not None and g.degree != degree:
        raise ValueError(f"{spec} has degree {g.degree}, expected {degree}")
    return g


def read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _entries(args):
    if args.inline is not None:
        return [inline_entry(args.inline, args.degree)]
    if args.name is not None:
        g = named_group(args.name)
        return [
            CatalogEntry(
                name=g.name or args.name,
                degree=g.degree,
                generators=tuple(str(s) for s in g.generators),
            )
        ]
    return load_catalog(args.catalog)


# -- group -------------------------------------------------------------------


def group_row(entry, cap=DEFAULT_CAP, max_degree=DEFAULT_MAX_SYM_DEGREE, timing=False):
    start = time.perf_counter()
    row = {"name": entry.name, "degree": entry.degree}
    try:
        g = entry.group()
        order = g.order(cap)
        orbs = orbits(g)
        transitive = len(orbs) == 1
        row.update(
            order=order,
            orbits="|".join(" ".join(map(str, o)) for o in orbs),
            transitive=transitive,
            transitivity_degree=transitivity_degree(g, cap),
            primitive=is_primitive(g, cap) if transitive else False,
        )
        try:
            row["normalizer_order"] = normalizer_in_sym(g, max_degree, cap).order(cap)
        except TreeGroupError as exc:
            row["normalizer_order"] = None
            row["note"] = str(exc)
        flags = structure_flags(g, cap)
        row.update(
            derived_order=flags.derived_order,
            perfect=flags.is_perfect,
            in_alternating=flags.in_alternating,
            no_global_fixed_point=flags.no_global_fixed_point,
            semiregular=flags.semiregular,
        )
        if entry.points is not None:
            row["points"] = " ".join(f"{i}={p}" for i, p in enumerate(entry.points))
        row["error"] = None
    except ENTRY_ERRORS as exc:
        row["error"] = str(exc)
    if timing:
        row["seconds"] = round(time.perf_counter() - start, 4)
    return row


GROUP_COLUMNS = [
    "name",
    "degree",
    "order",
    "orbits",
    "transitive",
    "transitivity_degree",
    "primitive",
    "normalizer_order",
    "derived_order",
    "perfect",
    "in_alternating",
    "no_global_fixed_point",
    "semiregular",
    "points",
    "note",
    "error",
]


def cmd_group(args, out):
    entries = _entries(args)
    worker = partial(group_row, cap=args.cap, max_degree=args.max_degree, timing=args.timing)
    rows = _run_batch(worker, entries, args.jobs)
    if args.format == "json":
        write_json(out, rows)
    else:
        columns = GROUP_COLUMNS + (["seconds"] if args.timing else [])
        write_table(out, rows, columns)
    return 1 if any(r.get("error") for r in rows) else 0


# -- audit -------------------------------------------------------------------


def audit_row(entry, cap=DEFAULT_CAP, max_degree=DEFAULT_MAX_SYM_DEGREE, timing=False):
    start = time.perf_counter()
    try:
        row = bm.audit_theorems(entry.group(), cap=cap, max_degree=max_degree).as_dict()
        row["name"] = entry.name
        notes = list(row.pop("notes"))
        if entry.points is not None and row["two_transitive"]:
            notes.append(f"point {entry.degree - 1} stands for {entry.points[-1]}")
        row["notes"] = "; ".join(notes)
        row["error"] = None
    except ENTRY_ERRORS as exc:
        row = {"name": entry.name, "degree": entry.degree, "error": str(exc)}
    if timing:
        row["seconds"] = round(time.perf_counter() - start, 4)
    return row


AUDIT_COLUMNS = [
    "name",
    "degree",
    "order",
    "bm_admissible",
    "locally_primitive",
    "two_transitive",
    "F0_order",
    "F0_normalizer_order",
    "F0_self_normalizing",
    "F0_perfect",
    "F0_in_alt",
    "predicted_LG_compactly_generated",
    "predicted_commensurator_index",
    "notes",
    "error",
]


def audit_summary(rows):
    applicable = [r for r in rows if r.get("F0_self_normalizing") is not None]
    passed = sum(1 for r in applicable if r["F0_self_normalizing"])
    errors = sum(1 for r in rows if r.get("error"))
    return {"condition_iii_passed": passed, "applicable": len(applicable), "errors": errors}


def cmd_audit(args, out):
    entries = load_catalog(args.catalog)
    worker = partial(audit_row, cap=args.cap, max_degree=args.max_degree, timing=args.timing)
    rows = _run_batch(worker, entries, args.jobs)
    summary = audit_summary(rows)
    if args.format == "json":
        write_json(out, {"rows": rows, "summary": summary})
    else:
        write_table(out, rows, AUDIT_COLUMNS + (["seconds"] if args.timing else []))
        out.write(
            f"# summary: condition (iii) N_Sym(d)(F_0) = F_0 passed "
            f"{summary['condition_iii_passed']}/{summary['applicable']}"
            f" ({summary['errors']} errors)\n"
        )
    return 1 if summary["errors"] else 0


# -- example-psl-agl ---------------------------------------------------------


def psl_agl_report(cap=DEFAULT_CAP, perturb=False):
    """Compare PSL(2,7) on the projective line with AGammaL(1,8) on GF(8)."""
    F = psl27()
    G = agaml18()
    if perturb:
        # deliberately wrong fixture: the Frobenius replaced by a transposition
        G = PermGroup(8, list(G.generators[:2]) + [Perm.from_cycles([(0, 1)], 8)], name="perturbed AGammaL(1,8)")
    checks = []

    def check(name, passed, detail):
        checks.append({"check": name, "passed": bool(passed), "detail": detail})

    orders = (F.order(cap), G.order(cap))
    degrees = (transitivity_degree(F, cap), transitivity_degree(G, cap))
    check(
        "2-transitive of order 168",
        orders == (168, 168) and degrees == (2, 2),
        f"orders {orders[0]}, {orders[1]}; transitivity degrees {degrees[0]}, {degrees[1]}",
    )
    sF = point_stabilizer(F, 7, cap).restricted  # stabilizer of infinity
    sG = point_stabilizer(G, 0, cap).restricted  # stabilizer of 0 in GF(8)
    stab_orders = (sF.order(cap), sG.order(cap))
    check("point stabilizers of order 21", stab_orders == (21, 21), f"orders {stab_orders[0]}, {stab_orders[1]}")
    witness = permutation_equivalence(sF, sG, cap)
    check(
        "stabilizers permutation-equivalent",
        witness is not None,
        "witness " + (str(list(witness.images)) if witness else "none"),
    )
    beta = beta_gf7_to_gf8()
    check(
        "n -> zeta^n is an equivalence",
        is_permutation_equivalence(sF, sG, beta, cap),
        f"beta {list(beta.images)} (GF(8) point v shown as v-1)",
    )
    fF = structure_flags(F, cap)
    fG = structure_flags(G, cap)
    check(
        "groups not isomorphic",
        fF.is_perfect != fG.is_perfect,
        f"perfect: {_cell(fF.is_perfect)}, {_cell(fG.is_perfect)}; derived orders {fF.derived_order}, {fG.derived_order}",
    )
    all_pass = all(c["passed"] for c in checks)
    if all_pass:
        verdict = (
            "U(F)+ and U(F')+ for F = PSL(2,7), F' = AGammaL(1,8) on the 8-regular tree "
            "are locally isomorphic but not isomorphic"
        )
    else:
        verdict = "not all checks passed; no conclusion drawn"
    return {
        "groups": [F.name, G.name],
        "points": {
            F.name: [str(i) for i in range(7)] + ["inf"],
            G.name: "point v is the element of GF(2)[x]/(x^3+x+1) with bit i the coefficient of x^i",
        },
        "checks": checks,
        "beta": list(beta.images),
        "witness": list(witness.images) if witness else None,
        "all_pass": all_pass,
        "verdict": verdict,
    }


def cmd_example_psl_agl(args, out):
    report = psl_agl_report(args.cap, perturb=args.perturb)
    if args.format == "json":
        write_json(out, report)
    else:
        write_table(out, report["checks"], ["check", "passed", "detail"])
        out.write(f"# verdict: {report['verdict']}\n")
    return 1 if args.strict and not report["all_pass"] else 0


# -- tower -------------------------------------------------------------------


def cmd_tower(args, out):
    D = resolve_group(args.D, args.d)
    res = pt.tower_orders(D, args.n, cap=args.cap, cross_check=args.cross_check)
    row = {
        "d": D.degree,
        "D": args.D,
        "n": args.n,
        "w": res.w_order,
        "a": res.a_order,
        "ratio": res.ratio,
        "index": res.index,
        "exhaustive_w": res.exhaustive[0] if res.exhaustive else None,
        "exhaustive_a": res.exhaustive[1] if res.exhaustive else None,
    }
    if args.format == "json":
        write_json(out, row)
    else:
        write_table(out, [row])
    if res.exhaustive and res.exhaustive != (res.w_order, res.a_order):
        return 1
    return 0


# -- ball --------------------------------------------------------------------


def cmd_ball(args, out):
    F = resolve_group(args.F)
    center = bm.EDGE if (args.independence or args.recover) else args.center
    group = bm.build_ball_group(F, args.R, center, args.cap)
    predicted = (bm.predicted_edge_order if center == bm.EDGE else bm.predicted_vertex_order)(F, args.R, args.cap)
    row = {
        "F": F.name or args.F,
        "d": F.degree,
        "R": args.R,
        "center": center,
        "vertices": len(group.ball.vertices),
        "order": group.order(),
        "predicted_order": predicted,
    }
    lines = []
    if args.independence:
        rec = bm.tits_independence_check(F, args.R, args.cap, group=group)
        row.update(rec.__dict__)
    if args.recover:
        rec = bm.recover_local_action(group, args.cap)
        row.update(
            K_order=rec.K_order,
            KL_order=rec.KL_order,
            C_order=rec.C_order,
            quotient_order=rec.quotient_order,
            equivalent=rec.equivalent,
            witness=list(rec.witness.images) if rec.witness else None,
        )
        if rec.equivalent:
            lines.append(f"recovered ≅ {F.name} (|K/C| = {rec.quotient_order})")
        else:
            lines.append(f"recovered K/C of order {rec.quotient_order}, not permutation-equivalent to {F.name}")
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(bm.dumps(group) + "\n")
    if args.format == "json":
        if lines:
            row["message"] = lines[0]
        write_json(out, row)
    else:
        write_table(out, [row])
        for line in lines:
            out.write(f"# {line}\n")
    failed = (args.independence and not row["factorizes"]) or (args.recover and not row["equivalent"])
    return 1 if failed else 0


# -- thompson ----------------------------------------------------------------


def pair_json(t):
    return {
        "k": t.k,
        "d": t.d,
        "dom": [pt.format_address(x) for x in t.dom.leaves],
        "cod": [pt.format_address(x) for x in t.cod.leaves],
        "sigma": list(t.sigma),
        "text": tp.format_pair(t),
    }


def _emit_pair(args, out, t, extra=None):
    if args.format == "json":
        obj = pair_json(t)
        obj.update(extra or {})
        write_json(out, obj)
    else:
        out.write(tp.format_pair(t) + "\n")
        for key, value in (extra or {}).items():
            out.write(f"# {key}: {_cell(value)}\n")


def _read_pair(args, path):
    try:
        return tp.parse_pair(read_text(path), args.k, args.d, reduce_result=False)
    except ENTRY_ERRORS as exc:
        raise EntryFailed(f"{path}: {exc}") from None


def cmd_thompson(args, out):
    if args.action == "reduce":
        _emit_pair(args, out, tp.reduce(_read_pair(args, args.files[0])))
    elif args.action == "compose":
        s, t = (_read_pair(args, p) for p in args.files)
        _emit_pair(args, out, tp.compose(s, t))
    elif args.action == "parity":
        t = tp.reduce(_read_pair(args, args.files[0]))
        par = tp.parity(t)
        row = {"parity": par.value, "representative_dependent": par.representative_dependent}
        if par.representative_dependent:
            found = tp.parity_flip_witness(t)
            if found is not None:
                diagram, path = found
                row["witness"] = tp.format_pair(diagram)
                row["witness_parity"] = tp.sign_of(diagram)
                row["refinements"] = [pt.format_address(x) for x in path]
            else:
                row["witness"] = None
        if args.format == "json":
            write_json(out, row)
        else:
            write_table(out, [row])
    elif args.action == "random":
        rng = tp.default_rng(args.seed)
        t = tp.random_pair(args.k, args.d, rng, max_carets=args.carets, order_preserving=args.order_preserving)
        _emit_pair(args, out, t)
    return 0


# -- germ --------------------------------------------------------------------


def _read_germ(args, path):
    try:
        return gm.germ_from_json(json.loads(read_text(path)), cap=args.cap)
    except ENTRY_ERRORS as exc:
        raise EntryFailed(f"{path}: {exc}") from None


def cmd_germ(args, out):
    if args.action == "random":
        ctx = gm.context_from_spec(args.D, args.d, args.k, args.cap)
        g = gm.random_germ(ctx, tp.default_rng(args.seed), max_carets=args.carets, max_label_depth=args.label_depth)
        write_json(out, gm.germ_to_json(g))
        return 0
    g = _read_germ(args, args.file)
    if args.action == "factor":
        f, a = gm.factor_FA(g)
        m = gm.membership(g)
        flags = {
            "in_F(f)": tp.is_order_preserving(f),
            "in_A(a)": gm.membership(a).in_A,
            "reconstructs": gm.compose_FA(g.ctx, f, a) == g,
            "g_in_F": m.in_F,
            "g_in_A": m.in_A,
            "g_in_Wtilde": m.in_Wtilde,
            "a_is_identity": a.is_identity(),
        }
        if args.format == "json":
            write_json(out, {"f": pair_json(f), "a": gm.germ_to_json(a), "flags": flags})
        else:
            row = {
                "f_dom": " ".join(pt.format_address(x) for x in f.dom.leaves),
                "f_cod": " ".join(pt.format_address(x) for x in f.cod.leaves),
                "f_sigma": " ".join(map(str, f.sigma)),
                "a": json.dumps(gm.germ_to_json(a), sort_keys=True),
            }
            row.update(flags)
            write_table(out, [row])
        return 0 if flags["reconstructs"] else 1
    if args.action == "chi":
        det = gm.chi_detail(g, args.level)
        row = {"chi": det.value, "level": det.level, "stable": det.stable, "note": det.note}
    else:
        verdict = gm.in_M(g)
        row = {"in_M": verdict.member, "chi": gm.chi_sign(g), "rationale": verdict.rationale}
    if args.format == "json":
        write_json(out, row)
    else:
        write_table(out, [row])
    return 0


# -- parser ------------------------------------------------------------------


GLOBAL_DEFAULTS = {
    "format": "tsv",
    "cap": DEFAULT_CAP,
    "seed": 0,
    "jobs": 1,
    "max_degree": DEFAULT_MAX_SYM_DEGREE,
    "timing": False,
}


def _add_global_flags(p, defaults):
    p.add_argument("--format", choices=("tsv", "json"), default=defaults["format"], help="output format (tsv)")
    p.add_argument("--cap", type=int, default=defaults["cap"], help=f"element enumeration cap ({DEFAULT_CAP})")
    p.add_argument("--seed", type=int, default=defaults["seed"], help="seed for random choices (0)")
    p.add_argument("--jobs", type=int, default=defaults["jobs"], help="worker processes for catalogs (1)")
    p.add_argument(
        "--max-degree",
        type=int,
        default=defaults["max_degree"],
        help=f"largest degree for brute-force normalizers ({DEFAULT_MAX_SYM_DEGREE})",
    )
    p.add_argument("--timing", action="store_true", default=defaults["timing"], help="add wall-clock seconds")


def _common():
    # the same flags after the subcommand; suppressed defaults keep them from
    # overwriting values given before it
    p = argparse.ArgumentParser(add_help=False)
    _add_global_flags(p, dict.fromkeys(GLOBAL_DEFAULTS, argparse.SUPPRESS))
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="treegerms", description=__doc__.splitlines()[0])
    _add_global_flags(parser, GLOBAL_DEFAULTS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", parents=[common], help="orders, orbits, primitivity, normalizers")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--inline", help='generators such as "(0 1 2),(0 1)"')
    src.add_argument("--catalog", help="JSON catalog file (or the name of a bundled one)")
    src.add_argument("--name", help="a bundled named group, e.g. S4 or PSL(2,7)")
    p.add_argument("--degree", type=int, help="degree for --inline (default: largest point + 1)")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("audit", parents=[common], help="condition (iii) and related hypotheses per group")
    p.add_argument("--catalog", default="two_transitive.json", help="JSON catalog (default: bundled two_transitive.json)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("example-psl-agl", parents=[common], help="PSL(2,7) versus AGammaL(1,8)")
    p.add_argument("--perturb", action="store_true", help="use deliberately wrong generators (negative control)")
    p.add_argument("--strict", action="store_true", help="exit 1 when a check fails")
    p.set_defaults(func=cmd_example_psl_agl)

    p = sub.add_parser("tower", parents=[common], help="orders of the wreath tower and its normalizer tower")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--D", required=True, help="group name or generators")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cross-check", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_tower)

    p = sub.add_parser("ball", parents=[common], help="finite ball model of U(F)")
    p.add_argument("--F", required=True, help="group name or generators")
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--center", choices=(bm.VERTEX, bm.EDGE), default=bm.VERTEX)
    p.add_argument("--independence", action="store_true", help="check the edge-fixator factorization")
    p.add_argument("--recover", action="store_true", help="recover the local action as K/C")
    p.add_argument("--dump", metavar="PATH", help="write the ball group as JSON")
    p.set_defaults(func=cmd_ball)

    p = sub.add_parser("thompson", parents=[common], help="tree pair diagrams (three-line text format)")
    tsub = p.add_subparsers(dest="action", required=True)
    for action, nfiles in (("reduce", 1), ("compose", 2), ("parity", 1), ("random", 0)):
        q = tsub.add_parser(action, parents=[common])
        q.add_argument("--k", type=int, default=1)
        q.add_argument("--d", type=int, default=2)
        if nfiles:
            q.add_argument("files", nargs=nfiles, metavar="FILE", help="pair file, '-' for stdin")
        else:
            q.add_argument("--carets", type=int, default=4)
            q.add_argument("--order-preserving", action="store_true")
    p.set_defaults(func=cmd_thompson)

    p = sub.add_parser("germ", parents=[common], help="germs in Germ JSON")
    gsub = p.add_subparsers(dest="action", required=True)
    for action in ("factor", "chi", "inM"):
        q = gsub.add_parser(action, parents=[common])
        q.add_argument("file", metavar="FILE", help="Germ JSON file, '-' for stdin")
        if action == "chi":
            q.add_argument("--level", type=int)
    q = gsub.add_parser("random", parents=[common])
    q.add_argument("--d", type=int, default=3)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--D", default="A3")
    q.add_argument("--carets", type=int, default=3)
    q.add_argument("--label-depth", type=int, default=2)
    p.set_defaults(func=cmd_germ)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cap < 1 or args.jobs < 1:
        parser.error("--cap and --jobs must be positive")
    try:
        return args.func(args, out)
    except (EntryFailed, *ENTRY_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
