"""Integer and fractional citation counting for research-unit evaluation."""

__version__ = "0.1.0"

from .citations import CitationLink, CitationWindow, DataIntegrityError, apply_window, fractional_weight, resolve_citations
from .graph import HomogeneityGraph, build_graph, components, density, export_graph, maximal_cliques
from .metrics import ImpactTable, PerPaperScore, UnitImpact, impact_table, per_paper_scores, unit_impact
from .query import evaluate_query, parse_affiliation_query
from .records import DocType, ParseIssue, PublicationRecord, parse_canonical, write_canonical
from .reporting import RankChange, RankingTable, export_report, rank_change, rank_units, render_correlation
from .synthetic import FieldProfile, RefCountDistribution, SyntheticSpec, expected_metrics, generate
from .units import UnitDefinition, assign_units, filter_corpus, parse_units
from .wos import parse_wos_export

__all__ = [
    "CitationLink",
    "CitationWindow",
    "DataIntegrityError",
    "DocType",
    "FieldProfile",
    "HomogeneityGraph",
    "ImpactTable",
    "ParseIssue",
    "PerPaperScore",
    "PublicationRecord",
    "RankChange",
    "RankingTable",
    "RefCountDistribution",
    "SyntheticSpec",
    "UnitDefinition",
    "UnitImpact",
    "apply_window",
    "assign_units",
    "build_graph",
    "components",
    "density",
    "evaluate_query",
    "expected_metrics",
    "export_graph",
    "export_report",
    "filter_corpus",
    "fractional_weight",
    "generate",
    "impact_table",
    "maximal_cliques",
    "parse_affiliation_query",
    "parse_canonical",
    "parse_units",
    "parse_wos_export",
    "per_paper_scores",
    "rank_change",
    "rank_units",
    "render_correlation",
    "resolve_citations",
    "unit_impact",
    "write_canonical",
]
