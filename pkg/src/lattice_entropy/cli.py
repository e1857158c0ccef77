"""``lattice-entropy`` command line."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from .automata import is_permutative, power
from .entropy import perimeter
from .errors import LatticeEntropyError, ResourceLimitError, UnsupportedDimensionError
from .experiments import (
    BUILTIN_RULES,
    ENTROPY_HEADER,
    GEOMETRY_TOL,
    KINDS,
    LYAPUNOV_HEADER,
    ExperimentConfig,
    Manifest,
    emit_table,
    entropy_rows,
    load_rule,
    lyapunov_rows,
    render_table,
    run_experiment,
)
from .lyapunov import chi_estimate
from .polytope import morphological_boundary_counts, quermass, volume
from .rulefile import format_rule_file
from .spheres import Degenerate, Nondegenerate, structuring_sphere
from .textio import format_point, format_polytope, parse_domain

EPILOG = f"""\
rules:    a rule file path, or builtin:NAME with NAME in {{{', '.join(sorted(BUILTIN_RULES))}}}
domains:  square:n  cross:n  poly:(x,y),...  slabdual:R  or  'dim=2; vertices=(0,0),...'
          --n scales the domain; windows are n*O
tolerances:
          geometry equalities {GEOMETRY_TOL:g} (exact rationals where possible);
          asymptotic rates 2% at the largest configured n; Ruelle check 5% relative slack
exit codes:
          0 success, 1 invalid input or failed verdict, 2 resource cap exceeded
outputs:  with --out, tables go to files (CSV plus a JSON-lines mirror, or JSON-lines
          only) and manifest.jsonl logs the configuration, versions and wall-clock per row;
          result files are byte-identical for a fixed seed whatever --threads is
"""


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _Exit(1)

    def exit(self, status: int = 0, message: str | None = None):
        if message:
            print(message, file=sys.stderr)
        raise _Exit(status)


def _common(defaults: bool) -> argparse.ArgumentParser:
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p = _Parser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, **({"default": 0} if defaults else kw))
    g.add_argument("--threads", type=int, **({"default": 1} if defaults else kw))
    g.add_argument("--out", **({"default": None} if defaults else kw),
                   help="output directory (default: print to stdout)")
    g.add_argument("--format", choices=("csv", "jsonl"), **({"default": "csv"} if defaults else kw))
    return p


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lattice-entropy", parents=[_common(True)],
                     description="Exact lattice geometry and entropy bounds for "
                                 "multidimensional cellular automata.",
                     epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = [_common(False)]
    fmt = argparse.RawDescriptionHelpFormatter

    g = sub.add_parser("geom", parents=common, epilog=EPILOG, formatter_class=fmt,
                       help="bounding sphere of I U {0}, quermass and boundary counts")
    g.add_argument("--rule", required=True)
    g.add_argument("--domain", help="domain O for quermass and boundary counts")

    r = sub.add_parser("rule", parents=common, epilog=EPILOG, formatter_class=fmt,
                       help="inspect a rule file")
    rs = r.add_subparsers(dest="action", required=True, parser_class=_Parser)
    rc = rs.add_parser("check", parents=common, help="validate and report permutativity")
    rc.add_argument("rule")
    rp = rs.add_parser("power", parents=common, help="minimized rule file of f^k")
    rp.add_argument("rule")
    rp.add_argument("--k", type=_positive_int, default=2)

    e = sub.add_parser("entropy", parents=common, epilog=EPILOG, formatter_class=fmt,
                       help="itinerary counts and rate sandwich on n*O")
    e.add_argument("--rule", required=True)
    e.add_argument("--domain", default="square:1")
    e.add_argument("--n", type=_positive_int, nargs="+", default=[1])
    e.add_argument("--kmax", type=_positive_int, default=2)
    e.add_argument("--mode", choices=("exact", "sampled", "auto", "none"), default="auto")
    e.add_argument("--samples", type=_positive_int, default=100_000)

    ly = sub.add_parser("lyapunov", parents=common, epilog=EPILOG, formatter_class=fmt,
                        help="growth-based Lyapunov exponent estimate on n*O")
    ly.add_argument("--rule", required=True)
    ly.add_argument("--domain", default="square:1")
    ly.add_argument("--n", type=_positive_int, default=20)
    ly.add_argument("--kmax", type=_positive_int, default=2)
    ly.add_argument("--samples", type=_positive_int, default=8)

    v = sub.add_parser("verify", parents=common, epilog=EPILOG, formatter_class=fmt,
                       help="run an experiment and print its verdict")
    v.add_argument("kind", choices=KINDS)
    v.add_argument("--rule")
    v.add_argument("--domain", help="limit domain; ';' separates several for counting")
    v.add_argument("--n", type=_positive_int, nargs="+")
    v.add_argument("--kmax", type=_positive_int, default=2)
    v.add_argument("--samples", type=_positive_int, default=8)
    return parser


# -------------------------------------------------------------- commands

def _cmd_geom(args, out) -> int:
    rule = load_rule(args.rule)
    if rule.dim > 3:
        raise UnsupportedDimensionError("dimension above 3")
    sphere = structuring_sphere(rule.domain)
    cl = sphere.classification
    info = {"radius": f"{sphere.radius:.9g}", "radius_sq": str(sphere.radius_sq),
            "center": format_point(sphere.center),
            "support": " ".join(format_point(p) for p in sphere.support)}
    if isinstance(cl, Nondegenerate):
        info["classification"] = "nondegenerate"
        info["generating"] = format_polytope(cl.generating)
    elif isinstance(cl, Degenerate):
        info["classification"] = "degenerate"
        info["hyperplane"] = f"normal={format_point(cl.hyperplanes[0].normal)} " \
                             f"offset={cl.hyperplanes[0].offset}"
        info["terminal_dual"] = format_polytope(cl.dual)
    else:
        info["classification"] = "point"
    info["rate_bound"] = f"{sphere.radius * math.log(rule.q):.9g}"
    if args.domain:
        o = parse_domain(args.domain, rule.dim, rule.domain)
        counts = morphological_boundary_counts(o, rule.domain)
        p = perimeter(o)
        info["domain"] = format_polytope(o)
        info["volume"] = str(volume(o))
        info["perimeter"] = f"{p:.9g}"
        if o.dim > 1:
            info["quermass"] = f"{quermass(rule.hull, o):.9g}"
        info["inner_boundary"] = str(counts.inner)
        info["outer_boundary"] = str(counts.outer)
    if args.format == "jsonl":
        out.write(json.dumps(info) + "\n")
    else:
        for k, val in info.items():
            out.write(f"{k}: {val}\n")
    return 0


def _cmd_rule(args, out) -> int:
    rule = load_rule(args.rule)
    if args.action == "check":
        rep = is_permutative(rule)
        out.write(f"dim: {rule.dim}\nalphabet: {rule.q}\n"
                  f"type: {'algebraic' if rule.is_algebraic else 'table'}\n"
                  f"domain: {' '.join(format_point(c) for c in rule.domain)}\n"
                  f"extreme points: {' '.join(format_point(c) for c in rep.checked)}\n"
                  f"permutative: {'yes' if rep.permutative else 'no'}\n")
        if rep.failed:
            out.write(f"not permutative at: {' '.join(format_point(c) for c in rep.failed)}\n")
        return 0
    rk, derived = power(rule, args.k)
    if rk is None:
        raise ResourceLimitError(f"f^{args.k} exceeds the table cap; only its hull "
                                 f"{format_polytope(derived.hull_k)} is known")
    out.write(f"# f^{args.k}, hull {format_polytope(derived.hull_k)}\n")
    out.write(format_rule_file(rk))
    return 0


def _config(args, **extra) -> ExperimentConfig:
    return ExperimentConfig(seed=args.seed, threads=args.threads,
                            out_path=args.out or ".", format=args.format, **extra)


def _cmd_entropy(args, out) -> int:
    rule = load_rule(args.rule)
    base = parse_domain(args.domain, rule.dim, rule.domain)
    config = _config(args, rule_path=args.rule, domain_spec=args.domain, n_list=tuple(args.n),
                     k_max=args.kmax, mode=args.mode, samples=args.samples)
    manifest = Manifest(Path(args.out), "entropy", config) if args.out else None
    rows, asym = entropy_rows(rule, base, args.n, args.kmax, args.mode, samples=args.samples,
                              seed=args.seed, threads=args.threads, label="O",
                              manifest=manifest)
    if args.out:
        files = emit_table(rows, args.format, Path(args.out) / "entropy", ENTROPY_HEADER)
        files.append(manifest.close())
        out.write("".join(f"{f}\n" for f in files))
    else:
        out.write(render_table(rows, args.format, ENTROPY_HEADER))
    print(f"asymptotic upper rate V_I(O)/p(O)*log q = {asym:.9g}", file=sys.stderr)
    return 0


def _cmd_lyapunov(args, out) -> int:
    rule = load_rule(args.rule)
    base = parse_domain(args.domain, rule.dim, rule.domain)
    chi = chi_estimate(rule, base, args.n, args.kmax, args.samples, args.seed)
    bound = math.log(rule.q) * chi.chi_hat
    rows = lyapunov_rows(chi, bound, chi.subadditivity_violations == 0)
    if args.out:
        config = _config(args, rule_path=args.rule, domain_spec=args.domain, n_list=(args.n,),
                         k_max=args.kmax, samples=args.samples)
        files = emit_table(rows, args.format, Path(args.out) / "lyapunov", LYAPUNOV_HEADER)
        files.append(Manifest(Path(args.out), "lyapunov", config).close())
        out.write("".join(f"{f}\n" for f in files))
    else:
        out.write(render_table(rows, args.format, LYAPUNOV_HEADER))
    return 0


def _cmd_verify(args, out) -> int:
    config = _config(args, rule_path=args.rule, domain_spec=args.domain,
                     n_list=tuple(args.n or ()), k_max=args.kmax, samples=args.samples)
    if not args.out:
        config.out_path = str(Path("verify-out") / args.kind)
    report = run_experiment(config, args.kind)
    out.write(report.verdict + "\n")
    for f in report.files:
        out.write(f"wrote {f}\n")
    return 0 if report.passed else 1


COMMANDS = {"geom": _cmd_geom, "rule": _cmd_rule, "entropy": _cmd_entropy,
            "lyapunov": _cmd_lyapunov, "verify": _cmd_verify}


def run_cli(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Run the command line; returns the exit code instead of exiting."""
    out = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
        if args.threads < 1:
            parser.error("--threads must be positive")
        return COMMANDS[args.command](args, out)
    except _Exit as exc:
        return exc.code
    except ResourceLimitError as exc:
        print(f"lattice-entropy: resource limit: {exc}", file=sys.stderr)
        return 2
    except (LatticeEntropyError, ValueError, OSError) as exc:
        print(f"lattice-entropy: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
