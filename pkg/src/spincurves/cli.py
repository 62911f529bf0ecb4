"""Command-line surface: every computation of the library with
machine-readable, reproducible output.

Exit codes: 0 success, 2 validation error, 3 numerical ambiguity.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

VALIDATION_ERROR = 2
NUMERICAL_ERROR = 3


def _out_stream(args):
    return open(args.output, "w", newline="") if args.output else sys.stdout


def _emit_json(args, payload) -> None:
    stream = _out_stream(args)
    json.dump(payload, stream, indent=1, sort_keys=True)
    stream.write("\n")
    if stream is not sys.stdout:
        stream.close()


def _cmd_bouquet(args) -> int:
    from .strata import bouquet

    spec = bouquet(args.z1, dim_cap=args.cap)
    _emit_json(args, spec.to_json())
    return 0


def _cmd_tables(args) -> int:
    from . import spin4, weyl

    which = args.table
    payload = {}
    if which in ("quat4", "all"):
        payload["quat4"] = spin4.quat4_group().export_json()
    if which in ("btilde", "all"):
        payload["btilde"] = spin4.btilde_group().export_json()
    if which in ("refinement", "all"):
        payload["refinement"] = {
            sigma.name: sorted([p.name for p in w] for w in words)
            for sigma, words in weyl.REFINEMENT_TABLE.items()
        }
    _emit_json(args, payload)
    return 0


def _cmd_classify(args) -> int:
    from . import bruhat, spin4

    vals = [float(x) for x in args.coords]
    if len(vals) != 8:
        print("classify expects 8 coordinates (left wxyz, right wxyz)", file=sys.stderr)
        return VALIDATION_ERROR
    z = spin4.SpinPoint.from_array(np.array(vals)).renormalized()
    rep = bruhat.spin_lift_rep(z, tol=args.tol)
    _emit_json(
        args,
        {
            "perm": list(rep.perm.images),
            "perm_name": rep.perm.name or "e",
            "signs": list(rep.signs),
            "lift": rep.lift,
            "serialized": rep.serialize(),
        },
    )
    return 0


def _cmd_chopadv(args) -> int:
    from . import bruhat, spin4
    from .weyl import ETA, Permutation

    bt = spin4.btilde_group()
    rows = []
    for i in range(len(bt)):
        if Permutation(bt.perms[i]) == ETA:
            continue
        rep = bruhat.SignedRep(Permutation(bt.perms[i]), bt.signs[i], bt.lifts[i])
        rows.append(
            {
                "element": rep.serialize(),
                "chop": bruhat.chop(rep).serialize(),
                "adv": bruhat.adv(rep).serialize(),
            }
        )
    _emit_json(args, rows)
    return 0


def _cmd_enumerate(args) -> int:
    from .strata import contraction_schedule, strata_enumerate
    from .weyl import word_name

    words = strata_enumerate(args.mu0, args.mu1)
    payload = {
        "mu": [args.mu0, args.mu1],
        "strata": [{"word": word_name(w), "codim": c} for w, c in words],
    }
    if args.schedule:
        payload["schedule"] = [
            {"hyperplane": list(h), "merges": [e.to_json() for e in events]}
            for h, events in contraction_schedule(args.mu0, args.mu1)
        ]
    _emit_json(args, payload)
    return 0


def _cmd_scan_bacb(args) -> int:
    from .curves import scan_sphere

    nlat = args.grid[0]
    nlon = args.grid[1] if len(args.grid) > 1 else 2 * args.grid[0] - 1
    rows = scan_sphere(radius=args.radius, nlat=nlat, nlon=nlon)
    stream = _out_stream(args)
    writer = csv.writer(stream)
    writer.writerow(
        ["x1", "x2", "x3", "itinerary", "s_ab", "s_ba", "s_ac", "s_bc", "s_cb"]
    )
    for r in rows:
        s = r["q_signs"]
        writer.writerow(
            [
                f"{r['x1']:.12g}",
                f"{r['x2']:.12g}",
                f"{r['x3']:.12g}",
                r["word_str"],
                int(s["q_ab"]),
                int(s["q_ba"]),
                int(s["q_ac"]),
                int(s["q_bc"]),
                int(s["q_cb"]),
            ]
        )
    if stream is not sys.stdout:
        stream.close()
    return 0


def _cmd_verify_lemmas(args) -> int:
    from .curves import verify_transversal_identities
    from .weyl import (
        M_LETTERS,
        lemma_refinement_pairs,
        mu,
        refines_word,
        word_name,
    )

    expected = {
        ("aba",): "bacb",
        ("bcb",): "bacb",
        ("aba", "cba"): "abacba",
        ("cba", "aba"): "abacba",
    }
    pairs = {
        (tuple(p.name for p in w), sigma.name)
        for w, sigma in lemma_refinement_pairs()
    }
    ok_pairs = pairs == {(w, s) for w, s in expected.items()}

    # closure of blockwise refinement on short words over M
    letters = list(M_LETTERS)
    ok_closure = True
    words = [()]
    for _ in range(args.max_len):
        words = [w + (s,) for w in words for s in letters]
        for w0 in words:
            for w1 in _refinement_targets(w0):
                if not refines_word(w0, w1):
                    continue
                if any(s not in M_LETTERS for s in w1) or mu(w0) != mu(w1):
                    ok_closure = False

    ident = verify_transversal_identities(n_random=args.samples)
    report = {
        "refinement_pairs": sorted(["".join(w), s] for w, s in pairs),
        "refinement_pairs_ok": ok_pairs,
        "word_closure_ok": ok_closure,
        "identities_exact": {k: bool(v) for k, v in ident["exact"].items()},
        "identities_max_rel_err": ident["max_rel_err"],
    }
    _emit_json(args, report)
    all_ok = ok_pairs and ok_closure and all(ident["exact"].values()) and ident[
        "max_rel_err"
    ] < 1e-9
    return 0 if all_ok else NUMERICAL_ERROR


def _refinement_targets(w0):
    from .weyl import TABULATED_LETTERS, refines_letter

    targets = {()} if not w0 else set()
    n = len(w0)

    def rec(i, prefix):
        if i == n:
            targets.add(prefix)
            return
        for j in range(i + 1, n + 1):
            for sigma in TABULATED_LETTERS:
                if refines_letter(w0[i:j], sigma):
                    rec(j, prefix + (sigma,))

    rec(0, ())
    return targets


def _cmd_itinerary(args) -> int:
    from .curves import CurvatureProfile, integrate, itinerary

    if args.profile:
        with open(args.profile) as fh:
            profile = CurvatureProfile.from_json(json.load(fh))
    elif args.seed is not None:
        rng = np.random.default_rng(args.seed)
        profile = CurvatureProfile.random_trig(rng)
    elif args.constant:
        profile = CurvatureProfile.constant(args.constant)
    else:
        print("provide --profile, --constant or --seed", file=sys.stderr)
        return VALIDATION_ERROR
    sample = integrate(profile, steps=args.steps)
    iti = itinerary(sample, validate=not args.no_validate)
    _emit_json(args, iti.to_json())
    return 0


def _cmd_normal_form(args) -> int:
    from .curves import eta_family_curve, eta_normal_form, itinerary

    ones = (lambda t: 1.0, lambda t: 1.0, lambda t: 1.0)
    nf = eta_normal_form(*ones, args.x32)
    payload = {"x32": nf.x32, "t31": nf.t31, "z2": nf.z2, "z3": nf.z3}
    if args.with_curve:
        curve = eta_family_curve(args.x32, nf.z3, nf.z2)
        iti = itinerary(curve, validate=False)
        payload["itinerary"] = iti.to_json()["word"]
    _emit_json(args, payload)
    return 0


def _cmd_monodromy(args) -> int:
    import sympy as sp

    from .monodromy import CoefficientTriple, classify_triple, monodromy_matrix

    t = sp.symbols("t")
    fns = []
    for text in (args.c0, args.c1, args.c2):
        try:
            expr = sp.sympify(text, locals={"t": t})
        except (sp.SympifyError, SyntaxError) as exc:
            print(f"cannot parse coefficient {text!r}: {exc}", file=sys.stderr)
            return VALIDATION_ERROR
        fns.append(sp.lambdify(t, expr, "numpy"))
    try:
        triple = CoefficientTriple(*[lambda x, f=f: float(f(x)) for f in fns])
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return VALIDATION_ERROR
    label, residual = classify_triple(triple, tol=args.tol)
    Phi = monodromy_matrix(triple)
    _emit_json(
        args,
        {
            "class": label,
            "residual": residual,
            "monodromy": [[float(x) for x in row] for row in Phi],
        },
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spincurves",
        description="Itineraries, signed cells and strata of locally convex curves in S^3.",
    )
    ap.add_argument("--output", "-o", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bouquet", help="sphere dimensions per central endpoint")
    p.add_argument("--z1", required=True, choices=["1", "-1", "ac", "-ac"])
    p.add_argument("--cap", type=int, default=16)
    p.set_defaults(func=_cmd_bouquet)

    p = sub.add_parser("tables", help="dump finite group / refinement tables as JSON")
    p.add_argument("--table", choices=["quat4", "btilde", "refinement", "all"], default="all")
    p.set_defaults(func=_cmd_tables)

    p = sub.add_parser("classify", help="signed cell of a spin point")
    p.add_argument("coords", nargs=8, help="left wxyz then right wxyz")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("chopadv", help="chop/adv of every positive-codimension representative")
    p.set_defaults(func=_cmd_chopadv)

    p = sub.add_parser("enumerate", help="strata of the coincidence polytope")
    p.add_argument("mu0", type=int)
    p.add_argument("mu1", type=int)
    p.add_argument("--schedule", action="store_true", help="include the merge schedule")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("scan-bacb", help="CSV itinerary scan of the quartic family sphere")
    p.add_argument("--grid", type=int, nargs="+", default=[101, 201],
                   help="latitude and longitude counts")
    p.add_argument("--radius", type=float, default=1.0)
    p.set_defaults(func=_cmd_scan_bacb)

    p = sub.add_parser("verify-lemmas", help="refinement pairs and the six exact identities")
    p.add_argument("--max-len", type=int, default=4, dest="max_len")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=_cmd_verify_lemmas)

    p = sub.add_parser("itinerary", help="itinerary of a curve from curvature data")
    p.add_argument("--profile", help="JSON file with piecewise-polynomial curvatures")
    p.add_argument("--constant", type=float, nargs=3, help="constant curvatures")
    p.add_argument("--seed", type=int, help="seeded random trigonometric profile")
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--no-validate", action="store_true")
    p.set_defaults(func=_cmd_itinerary)

    p = sub.add_parser("normal-form", help="slice normal form around the top letter")
    p.add_argument("--x32", type=float, required=True)
    p.add_argument("--with-curve", action="store_true")
    p.set_defaults(func=_cmd_normal_form)

    p = sub.add_parser("monodromy", help="classify a periodic coefficient triple")
    p.add_argument("--c0", required=True)
    p.add_argument("--c1", required=True)
    p.add_argument("--c2", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_monodromy)

    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .bruhat import NotConvergent, RankAmbiguous
    from .weyl import AmbiguousOrder

    try:
        return args.func(args)
    except (RankAmbiguous, NotConvergent, AmbiguousOrder) as exc:
        print(f"numerical ambiguity: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return VALIDATION_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
