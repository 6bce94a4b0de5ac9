"""Command-line entry point: ``fraccite <subcommand> [options]``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from functools import cached_property
from pathlib import Path

from . import __version__
from .citations import CitationWindow, DataIntegrityError, resolve_citations, write_links
from .graph import build_graph, components, density, export_graph, maximal_cliques
from .metrics import impact_table, paper_distributions, per_paper_scores, read_impact_tsv
from .records import (
    DEFAULT_DOC_TYPES,
    CorpusReadError,
    DocType,
    ParseIssue,
    parse_canonical,
    write_canonical,
    write_issues,
)
from .reporting import (
    Tabular,
    correlation_tables,
    export_report,
    impact_tables,
    rank_units,
    ranking_tables,
)
from .stats import (
    ConvergenceError,
    DegenerateSample,
    GroupedSample,
    UndefinedCorrelation,
    anova_oneway,
    correlation_matrix,
    dunnett_c,
    kruskal_wallis,
    levene,
)
from .synthetic import FieldProfile, RefCountDistribution, SyntheticSpec, generate, realize_aggregates, units_config
from .units import assign_units, filter_corpus, parse_units
from .wos import parse_wos_export

log = logging.getLogger("fraccite")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DATA = 4
EXIT_UNITS = 5
EXIT_STATS = 6
EXIT_OUTPUT = 7

EXIT_CODES_HELP = """\
exit codes:
  0  success
  2  invalid command line
  3  input file missing or unreadable
  4  data integrity or parse failure
  5  unit definition or query error
  6  statistical degeneracy (e.g. no variance to test)
  7  output destination not writable

environment:
  FRACCITE_LOG_LEVEL  logging verbosity (DEBUG, INFO, WARNING, ERROR); default WARNING
"""

DEFAULT_WINDOWS = ("2005:2007", "2005:2009")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# --- argument parsing ------------------------------------------------------

def _doc_types(text: str) -> frozenset[DocType] | None:
    if text.strip().lower() == "all":
        return None
    out = set()
    for part in text.split(","):
        if not part.strip():
            continue
        dt = DocType.parse(part)
        if dt is DocType.OTHER and part.strip().lower() != "other":
            raise argparse.ArgumentTypeError(f"unknown document type {part.strip()!r}")
        out.add(dt)
    return frozenset(out)


def _window(text: str) -> CitationWindow:
    try:
        return CitationWindow.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraccite",
        description="Integer and fractional citation impact of research units, with significance tests.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    io_opts = argparse.ArgumentParser(add_help=False)
    io_opts.add_argument("--input", action="append", required=True, metavar="PATH",
                         help="corpus file; repeat to merge several (duplicate ids keep the first)")
    io_opts.add_argument("--format", choices=("wos", "canonical"), default="wos",
                         help="input format (default: wos)")
    io_opts.add_argument("--out", required=True, metavar="DIR", help="output directory")

    unit_opts = argparse.ArgumentParser(add_help=False)
    unit_opts.add_argument("--units", required=True, metavar="PATH", help="unit definition file (INI)")
    unit_opts.add_argument("--cited-year", type=int, default=2005, help="publication year of the cited set (default: 2005)")
    unit_opts.add_argument("--doc-types", type=_doc_types, default=DEFAULT_DOC_TYPES, metavar="LIST",
                           help="cited-side document types (default: article,review,proceedings-paper)")

    count_opts = argparse.ArgumentParser(add_help=False)
    count_opts.add_argument("--window", type=_window, action="append", metavar="Y1:Y2",
                            help="citation window; repeatable (default: 2005:2007 and 2005:2009)")
    count_opts.add_argument("--exclude-self-citations", action="store_true",
                            help="drop links whose citing record is itself in the cited set")
    count_opts.add_argument("--citing-doc-types", type=_doc_types, default=None, metavar="LIST",
                            help="citing-side document types, comma-separated, or 'all' (default: all)")

    stat_opts = argparse.ArgumentParser(add_help=False)
    stat_opts.add_argument("--alpha", type=_alpha, default=0.05, help="significance level (default: 0.05)")
    stat_opts.add_argument("--include-uncited", choices=("yes", "no"), default="yes",
                           help="keep zero-cited papers in per-paper distributions (default: yes)")
    stat_opts.add_argument("--measure", choices=("fc", "ic"), default="fc",
                           help="per-paper value tested across units (default: fc)")

    sub.add_parser("ingest", parents=[io_opts], help="parse and validate inputs, write the canonical corpus",
                   epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub.add_parser("assign", parents=[io_opts, unit_opts], help="assign cited publications to units",
                   epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    for name, helptext in (("count", "impact table (P, IC, FC, IC/P, FC/P)"),
                           ("rank", "ranking tables with rank changes")):
        sub.add_parser(name, parents=[io_opts, unit_opts, count_opts], help=helptext,
                       epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    for name, helptext in (("stats", "correlations, k-sample tests and Dunnett's C"),
                           ("graph", "homogeneity graph exports and summary"),
                           ("report", "run every stage above into one directory")):
        sub.add_parser(name, parents=[io_opts, unit_opts, count_opts, stat_opts], help=helptext,
                       epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)

    sim = sub.add_parser("simulate", help="write a seeded synthetic corpus",
                         epilog=EXIT_CODES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    source = sim.add_mutually_exclusive_group()
    source.add_argument("--spec", metavar="PATH", help="JSON generator specification (default: built-in 3-field demo)")
    source.add_argument("--from-table", metavar="PATH",
                        help="unit aggregates (tab-delimited impact table) to realize as a corpus")
    sim.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default: 0)")
    sim.add_argument("--out", required=True, metavar="DIR", help="output directory")
    return parser


# --- pipeline --------------------------------------------------------------

def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise CliError(EXIT_INPUT, f"input file not found: {path}") from exc
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from exc


class Pipeline:
    """Lazily evaluated stages shared by the subcommands."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.digests: dict[str, str] = {}

    @cached_property
    def parsed(self) -> tuple[list, list[ParseIssue]]:
        records, issues, seen = [], [], set()
        for path in self.args.input:
            data = _read_bytes(path)
            self.digests[path] = hashlib.sha256(data).hexdigest()
            try:
                recs, errs = (parse_wos_export if self.args.format == "wos" else parse_canonical)(data)
            except CorpusReadError as exc:
                raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc
            for e in errs:
                issues.append(ParseIssue(e.line, e.record_id, f"{path}: {e.message}"))
            for r in recs:
                if r.id in seen:
                    issues.append(ParseIssue(None, r.id, f"{path}: duplicate id across inputs; first kept"))
                    continue
                seen.add(r.id)
                records.append(r)
        if issues:
            log.warning("%d record-level parse issue(s); see parse_report.tsv from 'ingest'", len(issues))
        return records, issues

    @property
    def records(self):
        return self.parsed[0]

    @cached_property
    def units(self):
        text = _read_bytes(self.args.units)
        self.digests[self.args.units] = hashlib.sha256(text).hexdigest()
        try:
            return parse_units(text.decode("utf-8-sig"))
        except UnicodeDecodeError as exc:
            raise CliError(EXIT_INPUT, f"{self.args.units}: not UTF-8 text") from exc
        except ValueError as exc:
            raise CliError(EXIT_UNITS, f"{self.args.units}: {exc}") from exc

    @cached_property
    def cited(self):
        doc_types = list(DocType) if self.args.doc_types is None else self.args.doc_types
        return filter_corpus(self.records, doc_types, self.args.cited_year)

    @cached_property
    def assignment(self):
        try:
            result = assign_units(self.units, self.cited)
        except ValueError as exc:
            raise CliError(EXIT_UNITS, str(exc)) from exc
        for ex in result.excluded:
            log.info("unit %s excluded: %s", ex.unit, ex.reason)
        return result

    @cached_property
    def members(self) -> dict[str, list[str]]:
        members = {u: sorted(ids) for u, ids in self.assignment.members.items()}
        if not members:
            raise CliError(EXIT_UNITS, "no unit reached its minimum publication count")
        return members

    @property
    def windows(self) -> list[CitationWindow]:
        return self.args.window or [CitationWindow.parse(w) for w in DEFAULT_WINDOWS]

    @cached_property
    def links(self):
        member_ids = self.assignment.all_members()
        cited = [r for r in self.cited if r.id in member_ids]
        citing = self.records
        if self.args.citing_doc_types is not None:
            citing = filter_corpus(citing, self.args.citing_doc_types)
        try:
            return resolve_citations(cited, citing, include_self=not self.args.exclude_self_citations)
        except DataIntegrityError as exc:
            raise CliError(EXIT_DATA, str(exc)) from exc

    @cached_property
    def table(self):
        return impact_table(self.members, self.links, self.windows)

    @cached_property
    def sample(self) -> GroupedSample:
        widest = max(self.windows, key=lambda w: (w.years, w.end_year))
        all_ids = [pid for ids in self.members.values() for pid in ids]
        scores = per_paper_scores(self.links, all_ids, widest)
        dist = paper_distributions(self.members, scores, self.args.measure, self.args.include_uncited == "yes")
        empty = [u for u, v in dist.items() if not v]
        if empty:
            raise CliError(EXIT_STATS, f"no per-paper observations for unit(s): {', '.join(empty)}")
        return GroupedSample.from_mapping(dist)

    @cached_property
    def posthoc(self):
        """Dunnett's C over units with nonzero variance; the rest are listed as dropped."""
        keep = [(l, g) for l, g in zip(self.sample.labels, self.sample.groups) if len(g) >= 2 and g.var() > 0]
        dropped = [l for l in self.sample.labels if l not in {k for k, _ in keep}]
        if len(keep) < 2:
            raise CliError(EXIT_STATS, "fewer than two units have per-paper variance; Dunnett's C is undefined")
        sample = GroupedSample.from_mapping(keep)
        comparisons = dunnett_c(sample, self.args.alpha)
        return sample, comparisons, dropped


def correlation_parameters(table) -> list[tuple[str, list[float]]]:
    """P, then IC/P, FC/P, IC and FC for every window."""
    out = [("P", [float(v) for v in table.values("P")])]
    for param in ("IC/P", "FC/P", "IC", "FC"):
        for w in table.windows:
            out.append((f"{param} {w.label}", [float(v) for v in table.values(param, w)]))
    return out


# --- stage outputs ---------------------------------------------------------

def _write(out: Path, name: str, text: str) -> None:
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def stage_ingest(p: Pipeline, out: Path) -> None:
    records, issues = p.parsed
    _write(out, "corpus.jsonl", write_canonical(records))
    _write(out, "parse_report.tsv", write_issues(issues))


def stage_assign(p: Pipeline, out: Path) -> None:
    a = p.assignment
    _write(out, "units.tsv", a.report())
    rows = ["unit\tpaper_id\n"]
    for unit, ids in a.members.items():
        rows += [f"{unit}\t{pid}\n" for pid in sorted(ids)]
    _write(out, "members.tsv", "".join(rows))


def stage_count(p: Pipeline, out: Path) -> None:
    export_report([impact_tables(p.table)], out)
    _write(out, "links.tsv", write_links(p.links))


def stage_rank(p: Pipeline, out: Path) -> None:
    tables = []
    for w in p.table.windows:
        tables.append(ranking_tables(rank_units(p.table, "IC", w), rank_units(p.table, "FC", w),
                                     f"rank_counts_{w.label}"))
        tables.append(ranking_tables(rank_units(p.table, "IC/P", w), rank_units(p.table, "FC/P", w),
                                     f"rank_ratios_{w.label}"))
    export_report(tables, out)


def _g(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.10g}"


def stage_stats(p: Pipeline, out: Path) -> None:
    params = correlation_parameters(p.table)
    constant = [label for label, v in params if len(set(v)) < 2]
    if constant:
        log.warning("constant across units, left out of correlations: %s", ", ".join(constant))
    try:
        matrix = correlation_matrix([(label, v) for label, v in params if label not in constant])
        results = [kruskal_wallis(p.sample), levene(p.sample), anova_oneway(p.sample)]
        sample, comparisons, dropped = p.posthoc
    except (DegenerateSample, UndefinedCorrelation, ConvergenceError, ValueError) as exc:
        raise CliError(EXIT_STATS, f"statistics undefined: {exc}") from exc

    tests = Tabular("tests", ["test", "statistic", "df", "p"])
    shown = Tabular("tests", ["test", "statistic", "df", "p"])
    for r in results:
        df = ",".join(str(int(d)) for d in r.df)
        tests.rows.append([r.name, _g(r.statistic), df, _g(r.p_value)])
        shown.rows.append([r.name, f"{r.statistic:.3f}", df, f"{r.p_value:.4f}" if r.p_value >= 1e-4 else "<.0001"])
    note = (f"per-paper {p.args.measure} values, {p.sample.k} units, "
            f"N = {p.sample.n_total}, uncited papers {'included' if p.args.include_uncited == 'yes' else 'excluded'}")
    shown.notes.append(note)

    headers = ["unit_a", "unit_b", "mean_diff", "critical_range", "significant"]
    pairs, pairs_shown = Tabular("dunnett", headers, align="llrrl"), Tabular("dunnett", headers, align="llrrl")
    for c in comparisons:
        pairs.rows.append([c.unit_a, c.unit_b, _g(c.mean_diff), _g(c.critical_range), "yes" if c.significant else "no"])
        pairs_shown.rows.append([c.unit_a, c.unit_b, f"{c.mean_diff:.4f}", f"{c.critical_range:.4f}",
                                 "*" if c.significant else ""])
    pairs_shown.notes.append(f"Dunnett's C at alpha = {p.args.alpha:g}; {len(comparisons)} unordered pairs")
    if dropped:
        pairs_shown.notes.append("left out (no per-paper variance): " + ", ".join(dropped))
    pairs.notes = list(pairs_shown.notes)
    corr = correlation_tables(matrix)
    if constant:
        corr[1].notes.append("left out (same value for every unit): " + ", ".join(constant))
    export_report([corr, (tests, shown), (pairs, pairs_shown)], out)


def stage_graph(p: Pipeline, out: Path) -> None:
    try:
        sample, comparisons, dropped = p.posthoc
    except (DegenerateSample, ConvergenceError, ValueError) as exc:
        raise CliError(EXIT_STATS, f"statistics undefined: {exc}") from exc
    graph = build_graph(comparisons, sample.labels)
    for fmt in ("dot", "graphml", "net"):
        _write(out, f"homogeneity.{fmt}", export_graph(graph, fmt))
    summary = Tabular("homogeneity", ["item", "value"], align="ll")
    summary.rows += [
        ["alpha", f"{p.args.alpha:g}"],
        ["nodes", str(len(graph.nodes))],
        ["edges", str(len(graph.edges))],
        ["density", f"{density(graph):.6f}"],
    ]
    for i, comp in enumerate(components(graph), start=1):
        summary.rows.append([f"component {i} (size {len(comp)})", "; ".join(comp)])
    for i, clique in enumerate(maximal_cliques(graph), start=1):
        summary.rows.append([f"maximal clique {i} (size {len(clique)})", "; ".join(clique)])
    if dropped:
        summary.rows.append(["left out (no per-paper variance)", "; ".join(dropped)])
    export_report([(summary, summary)], out)


STAGES = {
    "ingest": [stage_ingest],
    "assign": [stage_assign],
    "count": [stage_count],
    "rank": [stage_rank],
    "stats": [stage_stats],
    "graph": [stage_graph],
    "report": [stage_ingest, stage_assign, stage_count, stage_rank, stage_stats, stage_graph],
}


def _config_dict(args: argparse.Namespace) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key == "out":
            continue  # where results go does not change them
        if isinstance(value, frozenset):
            value = sorted(v.value for v in value)
        elif isinstance(value, list) and value and isinstance(value[0], CitationWindow):
            value = [w.label for w in value]
        out[key] = value
    if "window" in out and out["window"] is None:
        out["window"] = [CitationWindow.parse(w).label for w in DEFAULT_WINDOWS]
    return out


def write_manifest(out: Path, args: argparse.Namespace, digests: dict[str, str]) -> None:
    manifest = {
        "program": "fraccite",
        "version": __version__,
        "config": _config_dict(args),
        "inputs": [{"path": path, "sha256": digest} for path, digest in sorted(digests.items())],
    }
    _write(out, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# --- simulate --------------------------------------------------------------

def demo_spec(seed: int) -> SyntheticSpec:
    """Three fields whose citation rates scale with their reference-list length."""
    fields = tuple(
        FieldProfile(name, RefCountDistribution.constant(k), rate, unit_names=(f"{name} Dept",))
        for name, k, rate in (("Mathematics", 6, 0.6), ("Engineering", 20, 2.0), ("Biomedicine", 40, 4.0))
    )
    return SyntheticSpec(fields, papers_per_unit=50, seed=seed)


def spec_from_json(obj: dict, seed: int) -> SyntheticSpec:
    """Build a generator spec from parsed JSON (see README for the layout)."""
    fields = []
    for f in obj["fields"]:
        k = f["k"]
        dist = RefCountDistribution(k["kind"], k.get("a", 0.0), k.get("b", 0.0), tuple(k.get("values", ())))
        half_life = f.get("half_life")
        fields.append(FieldProfile(
            name=f["name"],
            ref_count_distribution=dist,
            citations_per_paper_rate=float(f["rate"]),
            half_life=math.inf if half_life is None else float(half_life),
            unit_names=tuple(f.get("units", ())),
            cited_refs_per_doc=int(f.get("refs_per_doc", 1)),
        ))
    return SyntheticSpec(
        fields=tuple(fields),
        papers_per_unit=int(obj.get("papers_per_unit", 20)),
        cited_year=int(obj.get("cited_year", 2005)),
        citing_year_range=CitationWindow.parse(obj.get("citing_years", "2005:2009")),
        seed=seed,
    )


def run_simulate(args: argparse.Namespace, out: Path) -> dict[str, str]:
    digests = {}
    if args.from_table:
        data = _read_bytes(args.from_table)
        digests[args.from_table] = hashlib.sha256(data).hexdigest()
        try:
            realized = realize_aggregates(read_impact_tsv(data.decode("utf-8-sig")), seed=args.seed)
        except (ValueError, UnicodeDecodeError) as exc:
            raise CliError(EXIT_DATA, f"{args.from_table}: {exc}") from exc
        _write(out, "corpus.jsonl", write_canonical(realized.records))
        _write(out, "units.ini", realized.units_ini)
        return digests
    if args.spec:
        data = _read_bytes(args.spec)
        digests[args.spec] = hashlib.sha256(data).hexdigest()
        try:
            spec = spec_from_json(json.loads(data), args.seed)
        except (ValueError, KeyError, TypeError) as exc:
            raise CliError(EXIT_DATA, f"{args.spec}: invalid generator spec: {exc}") from exc
    else:
        spec = demo_spec(args.seed)
    corpus = generate(spec)
    _write(out, "corpus.jsonl", corpus.to_canonical())
    _write(out, "labels.tsv", corpus.labels_tsv())
    units = [u for f in spec.fields for u in f.units]
    _write(out, "units.ini", units_config(units, "Synthetic Univ", spec.cited_year, min_pubs=1))
    return digests


# --- entry point -----------------------------------------------------------

def _prepare_out(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_OUTPUT, f"cannot create output directory {path}: {exc.strerror or exc}") from exc
    if not os.access(out, os.W_OK):
        raise CliError(EXIT_OUTPUT, f"output directory is not writable: {path}")
    return out


def run(args: argparse.Namespace) -> int:
    out = _prepare_out(args.out)
    try:
        if args.command == "simulate":
            digests = run_simulate(args, out)
        else:
            pipeline = Pipeline(args)
            for stage in STAGES[args.command]:
                stage(pipeline, out)
            digests = pipeline.digests
        write_manifest(out, args, digests)
    except CliError:
        raise
    except OSError as exc:
        raise CliError(EXIT_OUTPUT, f"cannot write output: {exc}") from exc
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("FRACCITE_LOG_LEVEL", "WARNING").upper(), logging.WARNING),
        format="fraccite: %(levelname)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except CliError as exc:
        print(f"fraccite: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
