"""Command-line front end.

Subcommands
-----------
estimate
    Every estimator on one sample (tokens, counts, prevalences or text).
simulate
    Replicate simulations on a synthetic population (bundled scenario or
    flags).
ci
    Percentile-bootstrap intervals for one sample, or coverage of those
    intervals on a synthetic population.
corpus
    Letter-sampling experiments on a text file.

Exit codes are 0 on success, 1 for unreadable or invalid input and 2 when
the sample is statistically degenerate (for instance all singletons).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import jsonschema

from . import corpus as corpus_mod
from .estimators import estimate_all
from .exceptions import CIUnreliable, DegeneracyError, InputError, RichnessError
from .freq import from_raw_sample, read_counts, read_prevalences, read_tokens
from .montecarlo import (
    PopulationSpec, bootstrap_ci, confidence_coverage, generate_population, run_replicates,
)
from .reconstruct import reconstruct_population

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2

#: column order of CSV outputs, per table kind
SUMMARY_COLUMNS = ("estimator", "n", "mean", "sd", "rmse", "mse", "count")
INTERVAL_COLUMNS = ("level", "lower", "upper", "point", "B", "n_degenerate", "unreliable")
COVERAGE_COLUMNS = ("level", "n", "B", "repeats", "true_t", "hits", "hit_fraction",
                    "mean_width", "n_unreliable")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# -- loading ------------------------------------------------------------------

def load_schema(name: str) -> dict:
    text = resources.files("richness").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def bundled_scenarios() -> list:
    folder = resources.files("richness").joinpath("scenarios")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def load_scenario(name_or_path: str) -> dict:
    """Bundled scenario by name, or a JSON file; validated against its schema."""
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        res = resources.files("richness").joinpath("scenarios", f"{name_or_path}.json")
        if not res.is_file():
            raise InputError(
                f"unknown scenario {name_or_path!r}; bundled: {', '.join(bundled_scenarios())}"
            )
        text = res.read_text("utf-8")
    try:
        scenario = json.loads(text)
        jsonschema.validate(scenario, load_schema("scenario"))
    except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
        raise InputError(f"invalid scenario {name_or_path!r}: {exc}") from exc
    return scenario


def read_sample(path: str, fmt: str, charset=None):
    if fmt == "tokens":
        return read_tokens(path)
    if fmt == "counts":
        return read_counts(path)
    if fmt == "prevalences":
        return read_prevalences(path)
    text = Path(path).read_text(encoding="utf-8")
    letters = corpus_mod.normalize_text(text, charset)
    return from_raw_sample(letters)


# -- output -------------------------------------------------------------------

def _csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _table(rows, columns) -> str:
    cells = [[str(c) for c in columns]] + [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _finite(obj):
    """Copy of ``obj`` with NaN and infinite floats replaced by ``None``."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _emit(doc: dict, rows, columns, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(_finite(doc), indent=2, allow_nan=False))
        out.write("\n")
    elif fmt == "csv":
        out.write(_csv(rows, columns))
    else:
        out.write(_table(rows, columns))


def _summary_rows(summaries) -> list:
    return [row for s in summaries for row in s.rows()]


# -- commands -----------------------------------------------------------------

def cmd_estimate(args, out) -> int:
    freq = read_sample(args.input, args.format, args.charset)
    report = estimate_all(freq, esty_k=args.esty_k, t2_coupled=args.t2_coupled)
    doc = {"schema_version": SCHEMA_VERSION, "command": "estimate", **report.to_dict()}
    if args.population_out:
        reconstruct_population(freq, tail=args.tail).to_csv(args.population_out)
    rows = [{"field": k, "value": v} for k, v in doc.items() if k not in ("schema_version", "command")]
    _emit(doc, rows, ("field", "value"), args.output, out)
    return EXIT_OK


def _population_from_args(args, scenario):
    if scenario is not None:
        spec = PopulationSpec.from_dict(scenario["population"])
    else:
        if args.generator is None:
            raise InputError("give --scenario or --generator")
        spec = PopulationSpec(T=args.T, generator=args.generator, seed=args.pop_seed,
                              shape=args.shape)
    return spec, generate_population(spec)


def _spec_dict(spec) -> dict:
    d = {"T": spec.T, "generator": spec.generator, "seed": spec.seed}
    if spec.generator == "normal":
        d.update(mu=spec.mu, sigma=spec.sigma)
    if spec.generator == "gamma":
        d["shape"] = spec.shape
    return d


def _pick(cli_value, scenario, key, default):
    if cli_value is not None:
        return cli_value
    if scenario is not None and key in scenario:
        return scenario[key]
    return default


def cmd_simulate(args, out) -> int:
    scenario = load_scenario(args.scenario) if args.scenario else None
    if scenario is not None and scenario["kind"] != "simulate":
        raise InputError(f"scenario {scenario['name']!r} is a {scenario['kind']} scenario")
    spec, probs = _population_from_args(args, scenario)
    ns = _pick(args.n, scenario, "n", None)
    if ns is None:
        raise InputError("give --n or a scenario")
    ns = [ns] if isinstance(ns, int) else list(ns)
    R = _pick(args.replicates, scenario, "replicates", 1000)
    seed = _pick(args.seed, scenario, "seed", 0)
    summaries = [
        run_replicates(probs, n, R, seed=seed, true_t=args.true_t, esty_k=args.esty_k,
                       t2_coupled=args.t2_coupled, workers=args.workers)
        for n in ns
    ]
    doc = {
        "schema_version": SCHEMA_VERSION, "command": "simulate",
        "scenario": scenario["name"] if scenario else None, "seed": seed,
        "population": _spec_dict(spec), "letters": None,
        "results": [s.to_dict() for s in summaries],
    }
    _emit(doc, _summary_rows(summaries), SUMMARY_COLUMNS, args.output, out)
    return EXIT_OK


def cmd_ci(args, out) -> int:
    levels = args.level or [0.90, 0.95, 0.99]
    if args.input:
        freq = read_sample(args.input, args.format, args.charset)
        seed = 0 if args.seed is None else args.seed
        B = args.bootstrap or 1000
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CIUnreliable)
            intervals = bootstrap_ci(freq, n=args.n, level=levels, B=B, seed=seed)
        if intervals[0].unreliable:
            print(f"warning: {intervals[0].n_degenerate} of {B} resamples were degenerate; "
                  "intervals are unreliable", file=sys.stderr)
        doc = {"schema_version": SCHEMA_VERSION, "command": "ci", "mode": "sample",
               "scenario": None, "seed": seed, "population": None,
               "intervals": [ci.to_dict() for ci in intervals]}
        _emit(doc, doc["intervals"], INTERVAL_COLUMNS, args.output, out)
        return EXIT_OK

    scenario = load_scenario(args.scenario) if args.scenario else None
    if scenario is not None and scenario["kind"] != "ci":
        raise InputError(f"scenario {scenario['name']!r} is a {scenario['kind']} scenario")
    spec, probs = _population_from_args(args, scenario)
    n = _pick(args.n, scenario, "n", 400)
    if isinstance(n, list):
        n = n[0]
    if args.level is None and scenario is not None and "levels" in scenario:
        levels = scenario["levels"]
    B = _pick(args.bootstrap, scenario, "bootstrap", 1000)
    repeats = _pick(args.repeats, scenario, "repeats", 100)
    seed = _pick(args.seed, scenario, "seed", 0)
    runs = confidence_coverage(probs, n, levels=levels, B=B, repeats=repeats, seed=seed,
                               true_t=args.true_t)
    doc = {"schema_version": SCHEMA_VERSION, "command": "ci", "mode": "coverage",
           "scenario": scenario["name"] if scenario else None, "seed": seed,
           "population": _spec_dict(spec), "coverage": [r.to_dict() for r in runs]}
    _emit(doc, doc["coverage"], COVERAGE_COLUMNS, args.output, out)
    return EXIT_OK


def cmd_corpus(args, out) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    letters, _ = corpus_mod.letter_distribution(text, args.charset)
    seed = 0 if args.seed is None else args.seed
    R = args.replicates or 1000
    summaries = [
        corpus_mod.run_corpus(text, n, R, seed=seed, true_t=args.true_t, charset=args.charset,
                              esty_k=args.esty_k, workers=args.workers)
        for n in (args.n or [50])
    ]
    doc = {"schema_version": SCHEMA_VERSION, "command": "corpus", "scenario": None,
           "seed": seed, "population": None, "letters": "".join(letters),
           "results": [s.to_dict() for s in summaries]}
    _emit(doc, _summary_rows(summaries), SUMMARY_COLUMNS, args.output, out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="richness", description="Estimate the number of species in a population.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, formats=True):
        p.add_argument("--output", choices=("json", "csv", "table"), default="json")
        p.add_argument("--esty-k", type=float, default=2.0,
                       help="constant k of Esty's estimator (default 2)")
        p.add_argument("--t2-coupled", action="store_true",
                       help="re-solve T for each lambda inside the second-moment estimator")
        p.add_argument("--charset", help="keep only these letters when reading text")
        if formats:
            p.add_argument("--format", choices=("tokens", "counts", "prevalences", "text"),
                           default="counts")

    def population(p):
        p.add_argument("--scenario", help="bundled scenario name or path to a scenario JSON")
        p.add_argument("--generator", choices=("normal", "uniform", "exponential", "gamma"))
        p.add_argument("--T", type=int, default=1000, help="species in the synthetic population")
        p.add_argument("--pop-seed", type=int, default=0)
        p.add_argument("--shape", type=float, default=0.11, help="shape of the gamma generator")
        p.add_argument("--true-t", type=float, help="true T for error columns (default: population size)")

    p = sub.add_parser("estimate", help="all estimators on one sample")
    p.add_argument("--input", required=True)
    p.add_argument("--population-out", help="write the reconstructed population as CSV")
    p.add_argument("--tail", choices=("geometric", "uniform"), default="geometric")
    common(p)

    p = sub.add_parser("simulate", help="replicate simulations on a synthetic population")
    population(p)
    p.add_argument("--n", type=int, nargs="+", help="sample size(s)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    common(p, formats=False)

    p = sub.add_parser("ci", help="bootstrap confidence intervals")
    p.add_argument("--input", help="sample file; omit to measure coverage on a population")
    population(p)
    p.add_argument("--n", type=int, help="sample (or resample) size")
    p.add_argument("--level", type=float, nargs="+")
    p.add_argument("--bootstrap", type=int, help="bootstrap resamples B (default 1000)")
    p.add_argument("--repeats", type=int, help="outer repeats for coverage runs")
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("corpus", help="letter-sampling experiments on a text")
    p.add_argument("--input", required=True, help="UTF-8 text file")
    p.add_argument("--n", type=int, nargs="+", help="letters per sample (default 50)")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--true-t", type=float, help="true alphabet size (default: letters in text)")
    p.add_argument("--workers", type=int, default=1)
    common(p, formats=False)
    return parser


_COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "ci": cmd_ci, "corpus": cmd_corpus}


def _validate(args, parser) -> None:
    if args.command == "ci" and args.level:
        if any(not 0 < lv < 1 for lv in args.level):
            parser.error("--level values must lie in (0, 1)")
    for name in ("replicates", "bootstrap", "repeats"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            parser.error(f"--{name} must be positive")
    if getattr(args, "bootstrap", None) is not None and args.bootstrap < 100:
        parser.error("--bootstrap must be at least 100")
    if getattr(args, "n", None) is not None:
        ns = args.n if isinstance(args.n, list) else [args.n]
        if any(n < 2 for n in ns):
            parser.error("--n must be at least 2")
    if args.esty_k <= 0:
        parser.error("--esty-k must be positive")


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    try:
        return _COMMANDS[args.command](args, out)
    except DegeneracyError as exc:
        print(f"degenerate sample: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, OSError, UnicodeDecodeError, ValueError, RichnessError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
