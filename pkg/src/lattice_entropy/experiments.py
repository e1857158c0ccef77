"""Experiment orchestration and table emission.

Result files (CSV, JSON-lines, summary JSON) depend only on the
configuration, never on the thread budget. Wall-clock times go to
``manifest.jsonl`` alone.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import scipy

from . import __version__
from .automata import LocalRule, and_rule, shift_rule
from .entropy import (
    ExhaustionSpec,
    EntropyRow,
    perimeter,
    rescaled_entropy_table,
    upper_bound_rate,
)
from .errors import InvalidInputError
from .lemmas import SUITES, SuiteResult
from .lyapunov import ExponentEstimate, ruelle_report
from .polytope import (
    Polytope,
    boundary_measure,
    cube,
    morphological_boundary_counts,
    quermass,
)
from .rulefile import parse_rule_file
from .spheres import (
    Degenerate,
    Nondegenerate,
    PointSphere,
    dual_polytope,
    slab_domain,
    structuring_sphere,
)
from .textio import format_polytope, parse_domain

KINDS = ("theorem1", "counting", "supremum", "ruelle", "lemmas")
GEOMETRY_TOL = 1e-9
RATE_TOL = 0.02

ENTROPY_HEADER = EntropyRow.HEADER
LYAPUNOV_HEADER = ("k", "n", "p_J", "mean_gr", "normalized", "chi_hat", "bound", "satisfied")

BUILTIN_RULES = {
    "xor2d": lambda: LocalRule.algebraic(2, 2, {(1, 0): 1, (0, 1): 1}),
    "cross": lambda: LocalRule.algebraic(2, 2, {(1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1}),
    "ledrappier": lambda: LocalRule.algebraic(1, 2, {(0,): 1, (1,): 1}),
    "and1d": lambda: and_rule(1),
    "shift1d": lambda: shift_rule(1, 2, (1,)),
}


def load_rule(source: str) -> LocalRule:
    """Read a rule file, or build ``builtin:NAME`` (see :data:`BUILTIN_RULES`)."""
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in BUILTIN_RULES:
            raise InvalidInputError(
                f"unknown builtin rule {name!r}; choose from {', '.join(sorted(BUILTIN_RULES))}")
        return BUILTIN_RULES[name]()
    return parse_rule_file(Path(source).read_text())


@dataclass
class ExperimentConfig:
    rule_path: str | None = None
    domain_spec: str | None = None
    n_list: tuple = ()
    k_max: int = 2
    mode: str = "auto"
    samples: int = 100_000
    seed: int = 0
    threads: int = 1
    out_path: str = "out"
    format: str = "csv"
    slab_radii: tuple = (1, 2, 5, 10, 20, 50)

    def __post_init__(self):
        if self.mode not in ("exact", "sampled", "auto", "none"):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.format not in ("csv", "jsonl"):
            raise InvalidInputError(f"unknown format {self.format!r}")
        if self.threads < 1 or self.samples < 1:
            raise InvalidInputError("threads and samples must be positive")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["n_list"] = [str(n) for n in self.n_list]
        d["slab_radii"] = [str(r) for r in self.slab_radii]
        return d


@dataclass
class ExperimentReport:
    kind: str
    passed: bool
    verdict: str
    summary: dict
    files: list[Path] = field(default_factory=list)


# ------------------------------------------------------------- emission

def _decimal(n: int) -> str:
    """Decimal text of an integer of any size."""
    limit = getattr(sys, "get_int_max_str_digits", None)
    if limit is None or limit() == 0:
        return str(n)
    old = limit()
    sys.set_int_max_str_digits(0)
    try:
        return str(n)
    finally:
        sys.set_int_max_str_digits(old)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return _decimal(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    if isinstance(value, Fraction):
        return str(value)
    return str(value)


def _json_value(value: Any, key: str, string_fields: Iterable[str]) -> Any:
    if value is None or isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        if key in string_fields or abs(int(value)) >= 2**53:
            return _decimal(int(value))
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(f"{float(value):.9g}")
        return v if math.isfinite(v) else str(v)
    return str(value)


def render_table(rows: Sequence[Mapping[str, Any]], format: str,
                 header: Sequence[str] | None = None,
                 string_fields: Iterable[str] = ("N_k",)) -> str:
    """Text of a table: CSV over ``header`` columns, or JSON lines over every key.

    Floats use nine significant digits; ``string_fields`` (big counts) are
    decimal strings in JSON.
    """
    if format == "csv":
        if header is None:
            header = list(rows[0].keys()) if rows else []
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row.get(h)) for h in header])
        return buf.getvalue()
    if format != "jsonl":
        raise InvalidInputError(f"unknown format {format!r}")
    string_fields = tuple(string_fields)
    return "".join(json.dumps({k: _json_value(v, k, string_fields) for k, v in row.items()}) + "\n"
                   for row in rows)


def emit_table(rows: Sequence[Mapping[str, Any]], format: str, path: str | Path,
               header: Sequence[str] | None = None,
               string_fields: Iterable[str] = ("N_k",)) -> list[Path]:
    """Write ``rows`` next to ``path``; CSV output also gets a ``.jsonl`` mirror."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    if format == "csv":
        written.append(path.with_suffix(".csv"))
        written[-1].write_text(render_table(rows, "csv", header))
    elif format != "jsonl":
        raise InvalidInputError(f"unknown format {format!r}")
    written.append(path.with_suffix(".jsonl"))
    written[-1].write_text(render_table(rows, "jsonl", header, string_fields))
    return written


def _write_json(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")
    return path


class Manifest:
    """JSON-lines log: configuration and versions first, then one timed entry per row."""

    def __init__(self, out: Path, kind: str, config: ExperimentConfig):
        self.path = out / "manifest.jsonl"
        out.mkdir(parents=True, exist_ok=True)
        self._lines = [json.dumps({
            "kind": kind,
            "config": config.as_dict(),
            "versions": {"lattice_entropy": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
        })]

    def row(self, table: str, key: Mapping[str, Any], seconds: float) -> None:
        self._lines.append(json.dumps({"table": table, **{k: str(v) for k, v in key.items()},
                                       "wall_clock_s": round(seconds, 6)}))

    def close(self) -> Path:
        self.path.write_text("".join(line + "\n" for line in self._lines))
        return self.path


# -------------------------------------------------------------- helpers

def _entropy_dict(row: EntropyRow) -> dict:
    d = {h: getattr(row, h) for h in ENTROPY_HEADER}
    d["J_id"] = row.J_id
    d["perp_count"] = row.perp_count
    d["inner_count"] = row.inner_count
    return d


def entropy_rows(rule: LocalRule, base: Polytope, scales: Sequence, k_max: int, mode: str, *,
                 samples: int, seed: int, threads: int, label: str,
                 manifest: Manifest | None = None) -> tuple[list[dict], float]:
    """Entropy table rows for ``n * base``; also returns the asymptotic upper rate."""
    rows: list[dict] = []
    asym = None
    for n in scales:
        t0 = time.perf_counter()
        table = rescaled_entropy_table(rule, ExhaustionSpec(base, (n,), label), k_max, mode,
                                       samples=samples, seed=seed, threads=threads)
        asym = table.asymptotic_upper
        rows.extend(_entropy_dict(r) for r in table.rows)
        if manifest is not None:
            manifest.row(label, {"n": n}, time.perf_counter() - t0)
    if asym is None:
        asym = upper_bound_rate(rule, base)
    return rows, asym


def _centered(p: Polytope, center) -> Polytope:
    return p.translate(tuple(-c for c in center))


def _classification_name(cl) -> str:
    if isinstance(cl, PointSphere):
        return "point"
    if isinstance(cl, Nondegenerate):
        return "nondegenerate"
    return "degenerate"


def _default_scales(config: ExperimentConfig, default: Sequence) -> tuple:
    return tuple(config.n_list) if config.n_list else tuple(default)


# ---------------------------------------------------------------- kinds

def _theorem1(rule: LocalRule, config: ExperimentConfig, out: Path,
              manifest: Manifest) -> ExperimentReport:
    logq = math.log(rule.q)
    sphere = structuring_sphere(rule.domain)
    cl = sphere.classification
    target = sphere.radius * logq
    scales = _default_scales(config, (1, 2, 5, 10, 20, 50, 100))
    files: list[Path] = []
    families: dict[str, dict] = {}

    square = cube(1, rule.dim)
    rows, asym = entropy_rows(rule, square, scales, 1, "none", samples=config.samples,
                              seed=config.seed, threads=config.threads, label="squares",
                              manifest=manifest)
    files += emit_table(rows, config.format, out / "theorem1_squares", ENTROPY_HEADER)
    families["squares"] = {"asymptotic_rate": asym, "rows": len(rows)}
    checks: list[tuple[str, bool]] = []

    if isinstance(cl, PointSphere):
        ok = all(r["lower_rate"] == 0 and r["upper_rate"] == 0 for r in rows)
        checks.append(("lower = upper = 0 on every square", ok))
    elif isinstance(cl, Nondegenerate):
        dual = _centered(dual_polytope(cl.generating, sphere), sphere.center)
        drows, dasym = entropy_rows(rule, dual, scales, 1, "none", samples=config.samples,
                                    seed=config.seed, threads=config.threads, label="dual",
                                    manifest=manifest)
        files += emit_table(drows, config.format, out / "theorem1_dual", ENTROPY_HEADER)
        dev = max(max(abs(r["lower_rate"] - target), abs(r["upper_rate"] - target)) for r in drows)
        last = drows[-1]
        families["dual"] = {"domain": format_polytope(dual), "asymptotic_rate": dasym,
                            "max_deviation": dev, "exact_every_n": dev <= GEOMETRY_TOL}
        checks.append(("dual asymptotic rate = R log q", abs(dasym - target) <= GEOMETRY_TOL))
        checks.append(("dual window rates within 2% at largest n",
                       abs(last["lower_rate"] - target) <= RATE_TOL * target
                       and abs(last["upper_rate"] - target) <= RATE_TOL * target))
    else:
        assert isinstance(cl, Degenerate)
        srows = []
        for r in config.slab_radii:
            slab = _centered(slab_domain(rule.domain, float(r)), sphere.center)
            v = quermass(rule.hull, slab)
            p = boundary_measure(slab)
            srows.append({"R": float(r), "p_O": p, "quermass": v, "rate": v / p * logq,
                          "target": target})
        files += emit_table(srows, config.format, out / "theorem1_slab",
                            ("R", "p_O", "quermass", "rate", "target"))
        rates = [s["rate"] for s in srows]
        families["slab"] = {"rates": rates}
        checks.append(("slab rates increase with R", all(a < b for a, b in zip(rates, rates[1:]))))
        checks.append(("slab rates stay below R log q", all(x <= target + GEOMETRY_TOL for x in rates)))
        checks.append(("slab rate within 2% of R log q at the largest R",
                       abs(rates[-1] - target) <= RATE_TOL * target))
    checks.append(("lower <= upper on every row", all(r["lower_rate"] <= r["upper_rate"] + 1e-12
                                                       for r in rows)))
    passed = all(ok for _, ok in checks)
    verdict = (f"VERDICT {'PASS' if passed else 'FAIL'}: R={sphere.radius:.9g} "
               f"({_classification_name(cl)}), R*log q={target:.9g}; "
               + "; ".join(f"{name}: {'ok' if ok else 'FAILED'}" for name, ok in checks))
    summary = {"radius": sphere.radius, "radius_sq": str(sphere.radius_sq),
               "center": [str(c) for c in sphere.center], "classification": _classification_name(cl),
               "target_rate": target, "log_q": logq, "families": families,
               "checks": {name: ok for name, ok in checks}, "verdict": verdict}
    files.append(_write_json(out / "theorem1_summary.json", summary))
    return ExperimentReport("theorem1", passed, verdict, summary, files)


DEFAULT_COUNTING_DOMAINS = ("square:1", "poly:(0,0),(1,0),(0,1)")


def counting_rows(rule: LocalRule, base: Polytope, scales: Sequence) -> tuple[list[dict], float]:
    target = quermass(rule.hull, base) / boundary_measure(base) if base.dim > 1 else \
        upper_bound_rate(rule, base) / math.log(rule.q)
    rows = []
    for n in scales:
        j = base.scale(n)
        bc = morphological_boundary_counts(j, rule.domain)
        p = perimeter(j)
        row = {"n": n, "p_J": p, "inner": bc.inner, "outer": bc.outer,
               "inner_rate": bc.inner / p, "outer_rate": bc.outer / p, "target": target}
        for side in ("inner", "outer"):
            err = abs(row[f"{side}_rate"] - target)
            row[f"{side}_error"] = err / target if target else err
        rows.append(row)
    return rows, target


COUNTING_HEADER = ("n", "p_J", "inner", "outer", "inner_rate", "outer_rate", "target",
                   "inner_error", "outer_error")


def _counting(rule: LocalRule, config: ExperimentConfig, out: Path,
              manifest: Manifest) -> ExperimentReport:
    specs = config.domain_spec.split(";") if config.domain_spec else list(DEFAULT_COUNTING_DOMAINS)
    scales = _default_scales(config, (50, 100, 200, 300))
    files, summary, passed = [], {}, True
    for idx, spec in enumerate(specs, start=1):
        base = parse_domain(spec, rule.dim, rule.domain)
        t0 = time.perf_counter()
        rows, target = counting_rows(rule, base, scales)
        manifest.row(f"O{idx}", {"domain": spec}, time.perf_counter() - t0)
        files += emit_table(rows, config.format, out / f"counting_O{idx}", COUNTING_HEADER)
        errs = [max(r["inner_error"], r["outer_error"]) for r in rows]
        ok_final = errs[-1] <= RATE_TOL
        ok_trend = all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
        passed &= ok_final and ok_trend
        summary[f"O{idx}"] = {"domain": spec, "target": target, "final_error": errs[-1],
                              "nonincreasing": ok_trend}
    verdict = f"VERDICT {'PASS' if passed else 'FAIL'}: boundary counts per perimeter within " \
              f"{RATE_TOL:.0%} of V_I(O)/p(O) at n={scales[-1]} with nonincreasing error"
    summary["verdict"] = verdict
    files.append(_write_json(out / "counting_summary.json", summary))
    return ExperimentReport("counting", passed, verdict, summary, files)


def _suite_rows(results: Sequence[SuiteResult]) -> list[dict]:
    return [{"suite": r.name, "cases": r.cases, "violations": r.violations,
             "first_failure": r.first_failure} for r in results]


def _suites(kind: str, names: Sequence[str], config: ExperimentConfig, out: Path,
            manifest: Manifest) -> ExperimentReport:
    results = []
    for name in names:
        t0 = time.perf_counter()
        results.append(SUITES[name](config.seed))
        manifest.row(kind, {"suite": name}, time.perf_counter() - t0)
    files = emit_table(_suite_rows(results), config.format, out / kind,
                       ("suite", "cases", "violations", "first_failure"))
    bad = [r.name for r in results if not r.passed]
    passed = not bad
    total = sum(r.violations for r in results)
    verdict = (f"VERDICT {'PASS' if passed else 'FAIL'}: {len(results)} suites, "
               f"{sum(r.cases for r in results)} checks, {total} violations"
               + (f" (in {', '.join(bad)})" if bad else ""))
    summary = {r.name: {"cases": r.cases, "violations": r.violations, **r.extra} for r in results}
    summary["verdict"] = verdict
    files.append(_write_json(out / f"{kind}_summary.json", summary))
    return ExperimentReport(kind, passed, verdict, summary, files)


def lyapunov_rows(chi: ExponentEstimate, bound: float, satisfied: bool) -> list[dict]:
    return [{"k": k, "n": chi.n, "p_J": chi.p_J, "mean_gr": m, "normalized": v,
             "chi_hat": chi.chi_hat, "bound": bound, "satisfied": satisfied, "variance": var}
            for k, m, v, var in zip(chi.k_list, chi.mean_gr, chi.per_k, chi.variances)]


def _ruelle(rule: LocalRule, config: ExperimentConfig, out: Path,
            manifest: Manifest) -> ExperimentReport:
    base = parse_domain(config.domain_spec or "square:1", rule.dim, rule.domain)
    n = int(config.n_list[0]) if config.n_list else 20
    samples = min(config.samples, 64)
    t0 = time.perf_counter()
    rep = ruelle_report(rule, base, n, max(1, config.k_max), samples, config.seed)
    manifest.row("lyapunov", {"n": n}, time.perf_counter() - t0)
    files = emit_table(lyapunov_rows(rep.chi, rep.bound, rep.satisfied), config.format,
                       out / "lyapunov", LYAPUNOV_HEADER)
    verdict = (f"VERDICT {'PASS' if rep.satisfied else 'FAIL'}: h_rate={rep.h_rate:.9g} "
               f"{'<=' if rep.satisfied else '>'} log q * chi_hat * 1.05 = {rep.bound * 1.05:.9g}"
               f" ({'exact' if rep.exact else 'sampled'} counts)")
    summary = {"h_rate": rep.h_rate, "bound": rep.bound, "satisfied": rep.satisfied,
               "exact_counts": rep.exact, "chi_hat": rep.chi.chi_hat,
               "subadditivity_violations": rep.chi.subadditivity_violations, "verdict": verdict}
    files.append(_write_json(out / "ruelle_summary.json", summary))
    return ExperimentReport("ruelle", rep.satisfied, verdict, summary, files)


def run_experiment(config: ExperimentConfig, kind: str,
                   rule: LocalRule | None = None) -> ExperimentReport:
    """Run one experiment kind and write its files under ``config.out_path``."""
    if kind not in KINDS:
        raise InvalidInputError(f"unknown experiment kind {kind!r}; choose from {', '.join(KINDS)}")
    out = Path(config.out_path)
    manifest = Manifest(out, kind, config)
    needs_rule = kind in ("theorem1", "counting", "ruelle")
    if needs_rule and rule is None:
        if not config.rule_path:
            raise InvalidInputError(f"{kind} needs a rule")
        rule = load_rule(config.rule_path)
    if kind == "theorem1":
        report = _theorem1(rule, config, out, manifest)
    elif kind == "counting":
        report = _counting(rule, config, out, manifest)
    elif kind == "ruelle":
        report = _ruelle(rule, config, out, manifest)
    elif kind == "supremum":
        report = _suites(kind, ["supremum", "quermass_laws"], config, out, manifest)
    else:
        names = [n for n in SUITES if n != "supremum"]
        report = _suites(kind, names, config, out, manifest)
    report.files.append(manifest.close())
    return report
