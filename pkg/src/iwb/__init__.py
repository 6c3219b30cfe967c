"""DOM-based evaluation toolkit for image-to-web generation."""

from .dom import DomNode, DomTree, ParseError, extract_events, parse_html, serialize, structural_equal, traverse
from .metrics import (
    ElementScore,
    EvalConfig,
    EvalReport,
    element_accuracy,
    evaluate_documents,
    layout_accuracy,
    lcs_length,
    match_elements,
    rank_correlation,
    text_similarity,
)
from .simplify import ComplexityLevel, SimplificationLog, VisualOracleConfig, classify, simplify, visually_equal
from .render import RendererCommand, RendererFailure

__version__ = "0.1.0"

__all__ = [
    "DomNode",
    "DomTree",
    "ParseError",
    "parse_html",
    "serialize",
    "traverse",
    "extract_events",
    "structural_equal",
    "ElementScore",
    "EvalConfig",
    "EvalReport",
    "element_accuracy",
    "evaluate_documents",
    "layout_accuracy",
    "lcs_length",
    "match_elements",
    "rank_correlation",
    "text_similarity",
    "ComplexityLevel",
    "SimplificationLog",
    "VisualOracleConfig",
    "classify",
    "simplify",
    "visually_equal",
    "RendererCommand",
    "RendererFailure",
    "__version__",
]
