"""Command-line interface.

Exit codes: 0 success (and every requested property holds), 1 a property
fails or a witness was found, 2 bad input, 3 a resource or iteration limit
was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import NumericError, ResourceLimitError, ScoreVotingError
from .model import fraction_to_json, load_election
from .score import ScoreFunction, TieBreak, default_names, load_matrix, load_tiebreak, matrix_to_csv, tally, winners

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _emit(doc, pretty_lines, args, out=None):
    out = out or sys.stdout
    if args.pretty:
        for line in pretty_lines:
            print(line, file=out)
    else:
        json.dump(doc, out, indent=2 if args.indent else None)
        out.write("\n")


def _fixture(args):
    path = getattr(args, "fixture", None)
    if not path:
        return None
    from .instances import load_fixture

    return load_fixture(path)


def _election(args, required=True):
    if getattr(args, "election", None):
        return load_election(args.election)
    fx = _fixture(args)
    if fx is not None and fx.election is not None:
        return fx.election
    if required:
        raise ScoreVotingError("an election is required (--election or a --fixture with one)")
    return None


def _names(args, m):
    inst = _election(args, required=False)
    if inst is not None:
        if inst.m != m:
            raise ScoreVotingError(f"election has {inst.m} objects, matrix has {m}")
        return list(inst.objects)
    if getattr(args, "names", None):
        names = [s.strip() for s in args.names.split(",")]
        if len(names) != m:
            raise ScoreVotingError(f"{len(names)} names for {m} objects")
        return names
    fx = _fixture(args)
    if fx is not None and len(fx.names) == m:
        return list(fx.names)
    return default_names(m)


def _score_function(args):
    fx = _fixture(args)
    if args.matrix:
        M = load_matrix(args.matrix)
    elif fx is not None and fx.score_function is not None:
        M = fx.score_function.matrix
    else:
        raise ScoreVotingError("a score matrix is required (--matrix or a --fixture with one)")
    names = _names(args, M.m)
    if args.tiebreak:
        tb = load_tiebreak(args.tiebreak, names)
    elif not args.matrix and fx is not None:
        tb = fx.score_function.tiebreak
    else:
        tb = TieBreak.natural(M.m)
    return ScoreFunction(M, tb), names


# -- subcommands -----------------------------------------------------------


def cmd_solve(args):
    from .welfare import solve

    inst = _election(args)
    res = solve(inst, args.objective, args.max_objects)
    doc = {
        "objective": args.objective,
        "winning_set": inst.names(res.winning_set),
        "objective_value": fraction_to_json(res.objective_value),
        "utility_sum": fraction_to_json(res.secondary_value),
        "weight": fraction_to_json(inst.weight(res.winning_set)),
    }
    lines = [f"{args.objective} winning set: {{{', '.join(doc['winning_set'])}}}",
             f"objective value: {res.objective_value}", f"utility sum: {res.secondary_value}"]
    _emit(doc, lines, args)
    return EXIT_OK


def cmd_winners(args):
    sf, names = _score_function(args)
    inst = _election(args)
    fx = _fixture(args)
    W = args.W
    if W is None and fx is not None and fx.W is not None:
        W = fx.W
    if W is None and inst.budget.denominator != 1:
        raise ScoreVotingError("the election budget is not an integer; pass --W")
    if W is None:
        W = int(inst.budget)
    e = tally(inst.profile, sf.m)
    ws = winners(sf, e, W)
    doc = {
        "W": W,
        "tally": list(e),
        "scores": [fraction_to_json(s) for s in ws.scores],
        "winners": [names[o] for o in sorted(ws.winners)],
        "ranking": [names[o] for o in ws.ranking],
        "ties_at_cut": [names[o] for o in ws.ties_at_cut],
    }
    lines = [f"tally: {tuple(e)}", f"scores: ({', '.join(str(s) for s in ws.scores)})",
             f"winners (W={W}): {{{', '.join(doc['winners'])}}}"]
    _emit(doc, lines, args)
    return EXIT_OK


def cmd_check(args):
    from .properties import certify

    sf, names = _score_function(args)
    checks = [c for c, flag in (("neutral", args.neutral), ("total", args.total), ("delta", args.delta),
                                ("delta_plus", args.delta_plus), ("ccp", args.ccp)) if flag]
    if not checks:
        checks = ["neutral", "total", "delta", "delta_plus", "ccp"]
    cert, passed = certify(sf, checks, names, args.distinct_only, args.max_tally, args.jobs)
    cert["passed"] = passed
    lines = []
    for c in checks:
        entry = cert[c]
        ok = (not entry) if isinstance(entry, list) else entry.get("holds", entry.get("holds_on_bounds"))
        lines.append(f"{c}: {'pass' if ok else 'FAIL'}")
    lines.append(f"all requested checks: {'pass' if passed else 'FAIL'}")
    _emit(cert, lines, args)
    return EXIT_OK if passed else EXIT_FAIL


def _parse_bounds(text):
    out = {}
    if not text:
        return out
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in ("m", "n", "W", "T"):
            raise ScoreVotingError(f"bad bound {part!r}; expected m=.., n=.., W=.. or T=..")
        out[key] = int(val)
    return out


def _parse_fuzz(text, seed):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return seed, int(parts[0])
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise ScoreVotingError(f"bad --fuzz {text!r}; expected iters or seed,iters")


def cmd_oracle(args):
    from . import oracle as orc

    bounds = _parse_bounds(args.bounds)
    n = bounds.get("n", 3)
    if args.mechanism == "score":
        sf, names = _score_function(args)
        if "m" in bounds and bounds["m"] != sf.m:
            raise ScoreVotingError(f"bound m={bounds['m']} differs from the {sf.m}x{sf.m} matrix")
        fx = _fixture(args)
        if "W" in bounds:
            W_values = [bounds["W"]]
        elif fx is not None and fx.W is not None:
            W_values = [fx.W]
        else:
            W_values = list(range(sf.m + 1))
        if "T" in bounds:
            tw = orc.find_tally_manipulation(sf, bounds["T"], W_values)
            if tw is None:
                doc, lines = {"witness": None, "message": "none within bounds"}, ["none within bounds"]
                _emit(doc, lines, args)
                return EXIT_OK
            doc = {"witness": {
                "W": tw.W, "others_tally": list(tw.others),
                "sincere_ballot": [names[o] for o in sorted(tw.sincere)],
                "deviant_ballot": [names[o] for o in sorted(tw.deviant)],
                "outcome_sincere": [names[o] for o in sorted(tw.outcome_sincere)],
                "outcome_deviant": [names[o] for o in sorted(tw.outcome_deviant)],
                "utility_sincere": tw.utility_sincere, "utility_deviant": tw.utility_deviant,
            }}
            w = doc["witness"]
            lines = [f"manipulation (W={tw.W}, others {tuple(tw.others)}): {w['sincere_ballot']} -> "
                     f"{w['deviant_ballot']}; utility {tw.utility_sincere} -> {tw.utility_deviant}"]
            _emit(doc, lines, args)
            return EXIT_FAIL
        mechs = [orc.Mechanism.score(sf, W, names=tuple(names)) for W in W_values]
    else:
        inst = _election(args, required=False)
        if inst is not None:
            m, weights, budget, names = inst.m, inst.weights, inst.budget, inst.objects
        else:
            if "m" not in bounds or "W" not in bounds:
                raise ScoreVotingError("welfare mechanisms need --election or bounds m=..,W=..")
            m, weights, budget, names = bounds["m"], None, Fraction(bounds["W"]), None
        make = orc.Mechanism.fair if args.mechanism == "fair" else orc.Mechanism.utilitarian
        mechs = [make(m, budget, weights=weights, names=names, weighted_utility=args.weighted_utility)]
    witness, used = None, None
    for mech in mechs:
        if args.fuzz:
            seed, iters = _parse_fuzz(args.fuzz, args.seed)
            witness = orc.fuzz_manipulation(mech, seed, iters, n, args.ballot_space)
        else:
            witness = orc.find_manipulation(mech, orc.OracleBounds(n=n, ballot_space=args.ballot_space),
                                            jobs=args.jobs)
        if witness is not None:
            used = mech
            break
    if witness is None:
        _emit({"witness": None, "message": "none within bounds"}, ["none within bounds"], args)
        return EXIT_OK
    doc = {"witness": orc.witness_to_dict(witness), "verified": orc.verify_witness(used, witness)}
    if used.kind == orc.SCORE:
        doc["W"] = used.W
    lines = [f"manipulation found: {witness.describe()}",
             "profile: " + "; ".join(f"v{i + 1} {witness.instance.names(b.approved)}"
                                     for i, b in enumerate(witness.instance.profile))]
    _emit(doc, lines, args)
    return EXIT_FAIL


def cmd_project(args):
    from .projection import NO_STRICT_POINT, NOT_TOTAL, closest_strategyproof, result_to_dict

    sf, names = _score_function(args)
    res = closest_strategyproof(sf.matrix, sf.tiebreak, args.delta, args.eps, args.tol,
                                distinct_only=not args.literal, max_points=args.max_points)
    csv_text = matrix_to_csv(res.matrix)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(csv_text)
    doc = result_to_dict(res)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    lines = [f"status: {res.status.kind}", f"distance: {res.distance:.12g}", "matrix:"]
    lines += ["  " + ", ".join(str(v) for v in row) for row in res.matrix.entries]
    _emit(doc, lines, args)
    return EXIT_FAIL if res.status.kind in (NO_STRICT_POINT, NOT_TOTAL) else EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scorevoting", description="Score voting: solve, evaluate, certify, manipulate, project.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    common.add_argument("--indent", action="store_true", help="indent JSON output")
    common.add_argument("--fixture", help="JSON bundle supplying matrix, tie-break, election and W")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="welfare-optimal winning set of an election")
    s.add_argument("--election")
    s.add_argument("--objective", choices=("utilitarian", "fair"), default="utilitarian")
    s.add_argument("--max-objects", type=int, default=None)
    s.set_defaults(func=cmd_solve)

    def matrix_args(q):
        q.add_argument("--matrix", help="score matrix CSV")
        q.add_argument("--tiebreak", help="tie-break JSON: object names, highest priority first")
        q.add_argument("--names", help="comma-separated object names (default o1..om)")

    w = sub.add_parser("winners", parents=[common], help="score-voting winners of an election")
    matrix_args(w)
    w.add_argument("--election")
    w.add_argument("--W", type=int, default=None, help="number of winners (default: the budget)")
    w.set_defaults(func=cmd_winners)

    c = sub.add_parser("check", parents=[common], help="certify properties of a score function")
    matrix_args(c)
    c.add_argument("--election", help="take object names from this election")
    c.add_argument("--neutral", action="store_true")
    c.add_argument("--total", action="store_true")
    c.add_argument("--delta", action="store_true")
    c.add_argument("--delta-plus", action="store_true")
    c.add_argument("--ccp", action="store_true")
    c.add_argument("--distinct-only", action="store_true",
                   help="column-difference identities over pairwise distinct objects only")
    c.add_argument("--max-tally", type=int, default=5)
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("oracle", parents=[common], help="search for a single-voter manipulation")
    o.add_argument("--mechanism", choices=("score", "fair", "utilitarian"), required=True)
    matrix_args(o)
    o.add_argument("--election", help="objects, weights and budget (its ballots are ignored)")
    o.add_argument("--bounds", default="n=3", help="e.g. m=4,n=3,W=2; T=.. searches tallies instead")
    o.add_argument("--ballot-space", choices=("w_subsets", "feasible", "all"), default=None)
    o.add_argument("--weighted-utility", action="store_true")
    o.add_argument("--fuzz", help="iters or seed,iters: random search instead of exhaustive")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--jobs", type=int, default=1)
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("project", parents=[common], help="closest strategyproof score matrix")
    matrix_args(r)
    r.add_argument("--delta", type=float, default=1e-2)
    r.add_argument("--eps", type=float, default=1e-3)
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--literal", action="store_true",
                   help="column-difference identities over all objects, not only distinct ones")
    r.add_argument("--max-points", type=int, default=5_000_000)
    r.add_argument("--out", help="write the projected matrix CSV here")
    r.add_argument("--json-out", help="write the result JSON here as well")
    r.set_defaults(func=cmd_project)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ResourceLimitError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ScoreVotingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
