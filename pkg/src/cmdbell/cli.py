"""``cmd-bell`` command-line interface.

Exit codes: 0 success, 1 invalid model, 2 verification failure,
64 malformed input or usage, 65 bad parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import constructors as C
from .classifier import classify
from .constraints import build_cmd_matrix, build_nosignal_matrix, kernel_basis, rank
from .metrics import bell_report
from .model import ModelError, ModelFormatError, SettingPair, dumps_model, load_model, save_model
from .sampler import estimate_correlation, sample_run
from . import verification

EXIT_OK = 0
EXIT_INVALID_MODEL = 1
EXIT_VERIFY_FAILED = 2
EXIT_PARSE = 64
EXIT_PARAM = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(v) -> str:
    return f"{float(v):.12g}"


def _emit(args, data: dict, lines: list[str]) -> None:
    if getattr(args, "json", False):
        print(json.dumps(data, indent=2))
    else:
        print("\n".join(lines))


def _load(path):
    try:
        return load_model(path)
    except OSError as exc:
        raise ModelFormatError(f"cannot read {path}: {exc}") from exc


def cmd_kernel_info(args) -> int:
    M, N = build_cmd_matrix(), build_nosignal_matrix()
    rm, rn = rank(M), rank(N)
    km, kn = kernel_basis(M).dimension, kernel_basis(N).dimension
    om, on = M.pairwise_orthogonal(), N.pairwise_orthogonal()
    ok = (rm, km, rn, kn) == (6, 42, 7, 41) and om and on
    data = {"M": {"shape": list(M.shape), "rank": rm, "nullity": km, "orthogonal": om},
            "N": {"shape": list(N.shape), "rank": rn, "nullity": kn, "orthogonal": on},
            "consistent": ok}
    yes = {True: "yes", False: "no"}
    _emit(args, data, [
        f"rank(M)={rm} nullity={km} rank(N)={rn} nullity={kn}",
        f"M rows pairwise orthogonal: {yes[om]}",
        f"N rows pairwise orthogonal: {yes[on]}",
    ])
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def cmd_matrix(args) -> int:
    matrix = build_cmd_matrix() if args.which == "M" else build_nosignal_matrix()
    text = matrix.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classify(args) -> int:
    model = _load(args.model)
    c = classify(model, tol=args.tol)
    _emit(args, c.to_dict(), [
        c.case,
        f"in ker(M): {c.in_ker_M}  residual_M = {fmt(c.residual_M)}",
        f"in ker(N): {c.in_ker_N}  residual_N = {fmt(c.residual_N)}",
    ])
    return EXIT_OK


def cmd_bell(args) -> int:
    model = _load(args.model)
    r = bell_report(model)
    lines = [f"{w.label}  S = {fmt(s)}  gamma = {fmt(g)}" for w, s, g in zip(r.weights, r.values, r.gammas)]
    lines += [
        f"max CHSH = {fmt(r.max_value)}",
        f"gamma_max = {fmt(r.gamma_max)}",
        f"hall measure = {fmt(r.hall_measure)}",
        f"hall bound = {fmt(r.hall_bound)}",
    ]
    _emit(args, r.to_dict(), lines)
    return EXIT_OK


def _parse_epsilon(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise C.ParameterError(f"cannot parse epsilon {text!r}") from None


def cmd_construct(args) -> int:
    kind = args.kind
    if kind == "uniform":
        model = C.uniform_mi_model()
    elif kind == "witness":
        model = C.signaling_cmd_witness(_parse_epsilon(args.epsilon))
    elif kind == "prbox":
        model = C.pr_box_model()
    elif kind == "brans":
        angles = args.angles if args.angles else C.STANDARD_ANGLES
        if not all(math.isfinite(a) for a in angles):
            raise C.ParameterError("angles must be finite")
        model = C.brans_model(angles)
    elif kind == "random-cmd":
        model = C.random_cmd_model(args.seed, args.magnitude)
    else:
        model = C.random_model(args.seed, args.magnitude)
    c = classify(model)
    summary = f"{kind}: {c.case} (residual_M = {fmt(c.residual_M)}, residual_N = {fmt(c.residual_N)})"
    if args.out:
        save_model(model, args.out, exact=args.exact)
        print(summary)
    else:
        print(dumps_model(model, exact=args.exact, indent=2))
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = _load(args.model)
    if args.shots < 1:
        raise C.ParameterError(f"shots must be >= 1, got {args.shots}")
    try:
        pair = SettingPair.parse(args.pair)
    except ValueError as exc:
        raise C.ParameterError(str(exc)) from None
    result = sample_run(model, pair, args.shots, args.seed, workers=args.workers)
    est, se = estimate_correlation(result)
    data = result.to_dict()
    data["estimate"] = est
    data["stderr"] = se
    lines = [f"pair {pair.name}, shots {result.shots}, seed {result.seed}"]
    lines += [f"  {cell}: {n}" for cell, n in result.counts.items()]
    lines.append(f"E = {fmt(est)} +- {fmt(se)}")
    _emit(args, data, lines)
    return EXIT_OK


def cmd_verify(args, config: verification.Config | None = None) -> int:
    results = verification.run_all(config)
    ok = all(r.passed for r in results)
    _emit(args, {"passed": ok, "checks": [r.to_dict() for r in results]},
          [r.line() for r in results] + [f"{sum(r.passed for r in results)}/{len(results)} checks passed"])
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmd-bell", description="Concealed measurement dependence analysis for CHSH scenarios.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("kernel-info", help="ranks, nullities and orthogonality of M and N")
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("matrix", help="export M or N as CSV")
    s.add_argument("which", choices=["M", "N"])
    s.add_argument("--out")

    s = sub.add_parser("classify", help="S1-S4 case of a model file")
    s.add_argument("model")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("bell", help="CHSH values, gamma, gamma_max and Hall bound")
    s.add_argument("model")
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("construct", help="write a landmark or random model")
    s.add_argument("kind", choices=["uniform", "witness", "prbox", "brans", "random-cmd", "random"])
    s.add_argument("--epsilon", default="1/16", help="witness perturbation, at most 1/16")
    s.add_argument("--angles", type=float, nargs=4, metavar=("T11", "T12", "T21", "T22"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--magnitude", type=float, default=1 / 16)
    s.add_argument("--exact", action="store_true", help="write rationals as \"p/q\" strings")
    s.add_argument("--out")

    s = sub.add_parser("sample", help="simulate measurement runs on one setting pair")
    s.add_argument("model")
    s.add_argument("--pair", default="A1B1")
    s.add_argument("--shots", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--json", action="store_true")

    s = sub.add_parser("verify", help="run the acceptance suite")
    s.add_argument("--json", action="store_true")
    return p


HANDLERS = {
    "kernel-info": cmd_kernel_info,
    "matrix": cmd_matrix,
    "classify": cmd_classify,
    "bell": cmd_bell,
    "construct": cmd_construct,
    "sample": cmd_sample,
}


def main(argv=None, verify_config: verification.Config | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "verify":
            return cmd_verify(args, verify_config)
        return HANDLERS[args.command](args)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except C.ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except ModelError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID_MODEL


def run() -> None:
    sys.exit(main())
