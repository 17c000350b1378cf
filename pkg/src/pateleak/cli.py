"""Command-line front end: ``pateleak <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 accuracy or verification failure,
4 I/O error. On failure a JSON object ``{"error": ..., "message": ...}`` is
written to stderr.

Relative ``--output`` paths are resolved against ``$PATELEAK_OUTPUT_DIR``
when that variable is set.
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import channels as ch
from .accountant import POLICIES, BudgetLedger, calibrate_gamma, worst_case_plan
from .errors import (AccuracyError, ConsistencyError, InvalidInputError,
                     NoSolutionError, ResourceError)
from .laplace import (h_value, leakage_at_vmax, per_query_bound,
                      win_prob_uniform_closed)
from .majorization import compare
from .noise import laplace_model, noise_from_config
from .pate import LabeledDataset, TeacherEnsemble, run_queries
from .rnm import DEFAULT_TOL, entrywise_leakage
from .suites import SUITES

EXIT_OK, EXIT_INPUT, EXIT_ACCURACY, EXIT_IO = 0, 2, 3, 4
OUTPUT_DIR_ENV = "PATELEAK_OUTPUT_DIR"
NATS_PER_BIT = math.log(2.0)


class VerificationFailed(Exception):
    pass


def _sig(obj, digits=12):
    """Round every float in a JSON-able structure to ``digits`` significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sig(v, digits) for v in obj]
    if isinstance(obj, np.generic):
        return _sig(obj.item(), digits)
    return obj


def _out_path(path):
    base = os.environ.get(OUTPUT_DIR_ENV)
    if path and base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(text, path):
    path = _out_path(path)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, path):
    _emit(json.dumps(_sig(obj), indent=2) + "\n", path)


def _floats(text):
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    out = []
    for part in text.split(","):
        if ":" in part:
            lo, hi, *step = (int(p) for p in part.split(":"))
            out.extend(range(lo, hi + 1, step[0] if step else 1))
        elif part.strip():
            out.append(int(part))
    return out


def _noise(args):
    if getattr(args, "noise", None):
        return noise_from_config(json.loads(args.noise))
    if getattr(args, "sigma", None) is not None:
        return noise_from_config({"kind": "gaussian", "sigma": args.sigma})
    if getattr(args, "gamma", None) is not None:
        return laplace_model(args.gamma)
    raise InvalidInputError("give --gamma, --sigma or --noise")


def _add_noise_flags(p):
    p.add_argument("--gamma", type=float, help="Laplace noise parameter (scale 1/gamma)")
    p.add_argument("--sigma", type=float, help="Gaussian noise standard deviation")
    p.add_argument("--noise", help='noise JSON, e.g. \'{"kind":"laplace","gamma":0.1}\'')


# -- commands -----------------------------------------------------------------

def cmd_leak(args):
    if args.input:
        with open(args.input) as fh:
            request = json.load(fh)
        v_minus = request["v_minus"]
        noise = noise_from_config(request["noise"])
        tol = float(request.get("tol", DEFAULT_TOL))
    else:
        if args.v is None:
            raise InvalidInputError("give --v or --input")
        v_minus, noise, tol = _floats(args.v), _noise(args), args.tol
    report = entrywise_leakage(v_minus, noise, tol).to_dict()
    report["v_minus"] = list(v_minus)
    report["parameters"]["noise_config"] = (
        noise.to_config() if noise.kind != "custom" else None)
    if args.bits:
        report["value_bits"] = report["value_nats"] / NATS_PER_BIT
    _emit_json(report, args.output)


def cmd_bound(args):
    out = {"gamma": args.gamma, "per_query_bound_nats": per_query_bound(args.gamma)}
    if args.m is not None:
        out["m"] = args.m
        out["leakage_at_vmax_nats"] = leakage_at_vmax(args.m, args.gamma)
        out["win_prob_uniform"] = win_prob_uniform_closed(args.m, args.gamma)
    if args.k is not None:
        out["k"] = args.k
        out["total_bound_nats"] = worst_case_plan(args.k, args.gamma)
    _emit_json(out, args.output)


def _sweep_rows(ms, gammas, quadrature_max_m):
    for g in gammas:
        noise = laplace_model(g)
        for m in ms:
            closed = leakage_at_vmax(m, g)
            row = {"m": m, "gamma": g, "H_m": h_value(m, g),
                   "win_prob_uniform": win_prob_uniform_closed(m, g),
                   "leakage_nats": closed, "gamma_bound": g}
            if m <= quadrature_max_m:
                quad = entrywise_leakage([0] * m, noise).value_nats
                row["quadrature_leakage_nats"] = quad
                row["closed_minus_quadrature"] = math.exp(closed) - math.exp(quad)
            yield row


def cmd_sweep(args):
    gammas = _floats(args.gamma)
    if args.mode == "uniform":
        ms = _ints(args.m)
        if not ms or not gammas:
            raise InvalidInputError("sweep grid is empty")
        rows = list(_sweep_rows(ms, gammas, args.quadrature_max_m))
    else:
        if not args.histograms:
            raise InvalidInputError("--histograms is required in histogram-file mode")
        with open(args.histograms) as fh:
            hists = [json.loads(line) for line in fh if line.strip()]
        rows = []
        for g in gammas:
            noise = laplace_model(g)
            for h in hists:
                rows.append({"v_minus": " ".join(str(x) for x in h), "gamma": g,
                             "leakage_nats": entrywise_leakage(h, noise).value_nats,
                             "gamma_bound": g})
    fields = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    _emit(buf.getvalue(), args.output)


def cmd_majorize(args):
    p, q = json.loads(args.p), json.loads(args.q)
    verdict = compare(p, q)
    _emit_json({"relation": verdict.relation, "prefix_sums_p": verdict.prefix_sums_p,
                "prefix_sums_q": verdict.prefix_sums_q}, args.output)


def cmd_channel(args):
    with open(args.file) as fh:
        channel = ch.ConditionalChannel.from_json(json.load(fh))
    value = ch.pcml(channel)
    out = {"pcml_nats": value, "n_inputs": len(channel.x_support),
           "n_outputs": len(channel.y_alphabet)}
    if args.bits:
        out["pcml_bits"] = value / NATS_PER_BIT
    _emit_json(out, args.output)


def cmd_verify(args):
    name = args.suite
    if name == "schur":
        result = SUITES[name](total=args.total, m=args.m)
    elif name in ("composition", "adversary"):
        result = SUITES[name](n=args.n, seed=args.seed)
    elif name == "mc":
        result = SUITES[name](samples=int(float(args.samples)), seed=args.seed)
    else:
        result = SUITES[name]()
    lines = [f"{'PASS' if ok else 'FAIL'}  {check}" for check, ok in result.checks.items()]
    lines.append(json.dumps(_sig(result.details), sort_keys=True))
    lines.append(f"suite {name}: {'PASS' if result.passed else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.output)
    if not result.passed:
        raise VerificationFailed(f"suite {name} failed")


def _load_manifest(args):
    manifest = {}
    if args.manifest:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    for key in ("data", "queries", "L", "m", "gamma", "budget_nats", "policy",
                "seed", "n_queries", "target_entry_index"):
        val = getattr(args, key, None)
        if val is not None:
            manifest[key] = val
    for key in ("data", "L", "m"):
        if key not in manifest:
            raise InvalidInputError(f"simulate needs {key!r} (flag or manifest)")
    return manifest


def cmd_simulate(args):
    man = _load_manifest(args)
    m, L, seed = int(man["m"]), int(man["L"]), int(man.get("seed", 0))
    noise = (noise_from_config(man["noise"]) if "noise" in man
             else laplace_model(man.get("gamma", 0.1)))
    data = LabeledDataset.from_csv(man["data"], m)
    ensemble = TeacherEnsemble.train(data, L, seed)
    if man.get("queries"):
        with open(man["queries"], newline="") as fh:
            rows = list(csv.reader(fh))
        queries = np.array([[float(x) for x in r] for r in rows[1:]])
    else:
        rng = np.random.default_rng([seed, 1])
        lo, hi = data.features.min(axis=0), data.features.max(axis=0)
        queries = rng.uniform(lo, hi, size=(int(man.get("n_queries", 50)), lo.size))
    budget = man.get("budget_nats")
    policy = man.get("policy") or ("refuse_over_budget" if budget else "account_only")
    ledger = BudgetLedger(budget_nats=budget, policy=policy)
    answers = run_queries(ensemble, queries, noise, ledger,
                          man.get("target_entry_index"), seed=seed)
    lines = []
    for entry, ans in zip(ledger.entries, answers):
        lines.append(json.dumps(_sig({
            "id": entry.id, "label": ans.label, "nats": entry.nats, "cum": entry.cum,
            "refused": entry.refused, "histogram": ans.histogram,
            "v_minus": ans.v_minus})))
    _emit("\n".join(lines) + "\n", args.output)
    if args.ledger:
        ledger.to_jsonl(_out_path(args.ledger))


def cmd_calibrate(args):
    v_minus = _floats(args.v)
    gamma = calibrate_gamma(v_minus, args.target, tol=args.tol)
    achieved = entrywise_leakage(v_minus, laplace_model(gamma)).value_nats
    _emit_json({"v_minus": v_minus, "target_nats": args.target, "gamma": gamma,
                "achieved_nats": achieved}, args.output)


# -- parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="pateleak",
        description="Entrywise leakage of noisy-argmax aggregation and finite channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("leak", help="entrywise leakage of one known-votes histogram")
    p.add_argument("--v", help="known-votes histogram, e.g. 4,3,2,1")
    p.add_argument("--input", help='JSON file {"v_minus": [...], "noise": {...}, "tol": ...}')
    _add_noise_flags(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--bits", action="store_true", help="also report bits")
    p.add_argument("--output")
    p.set_defaults(func=cmd_leak)

    p = sub.add_parser("bound", help="closed-form Laplace bounds")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int, help="number of queries for the total bound")
    p.add_argument("--output")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="CSV over a grid of m and gamma")
    p.add_argument("--gamma", required=True, help="comma-separated gammas")
    p.add_argument("--m", default="2:16", help="list or lo:hi[:step] ranges")
    p.add_argument("--mode", choices=("uniform", "histogram-file"), default="uniform")
    p.add_argument("--histograms", help="JSON-lines file of histograms")
    p.add_argument("--quadrature-max-m", type=int, default=64,
                   help="also run quadrature for m up to this value")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("majorize", help="compare two vectors under majorization")
    p.add_argument("p", help="JSON array")
    p.add_argument("q", help="JSON array")
    p.add_argument("--output")
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("channel", help="leakage of a finite channel JSON file")
    p.add_argument("file")
    p.add_argument("--bits", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--total", type=int, default=6)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", default="1e6")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run the PATE simulator with accounting")
    p.add_argument("--manifest", help="run manifest JSON")
    p.add_argument("--data", help="CSV with feature columns and a 'label' column")
    p.add_argument("--queries", help="CSV of query features (header row required)")
    p.add_argument("--L", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--budget-nats", dest="budget_nats", type=float)
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-queries", dest="n_queries", type=int)
    p.add_argument("--target-entry-index", dest="target_entry_index", type=int)
    p.add_argument("--ledger", help="also write the ledger as JSON lines")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="gamma achieving a target leakage")
    p.add_argument("--v", required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--output")
    p.set_defaults(func=cmd_calibrate)
    return parser


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidInputError, NoSolutionError, ResourceError, KeyError,
            json.JSONDecodeError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    except (AccuracyError, ConsistencyError, VerificationFailed) as exc:
        return _fail(EXIT_ACCURACY, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
