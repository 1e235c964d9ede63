"""Export canonical tree documents for raw texts.

One document per input text; a parse failure produces an explicit
tree_absent marker instead of crashing the batch, so downstream
segmentation can fall back to sliding windows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .parsers import HeuristicParser, NeuralParser, ParserUnavailable
from .treedoc import absent_marker, tree_document

log = logging.getLogger(__name__)


@dataclass
class AdapterConfig:
    parser_model: str = "heuristic"
    scorer_model: str = "echo"
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def make_parser(config: AdapterConfig):
    if config.parser_model == "heuristic":
        return HeuristicParser()
    return NeuralParser(model_id=config.parser_model, device=config.device)


def export_trees(texts: list[tuple[str, str]],
                 config: AdapterConfig | None = None) -> list[str]:
    """(source_id, text) pairs -> canonical tree documents or markers."""
    config = config or AdapterConfig()
    parser = make_parser(config)  # load failures surface here, not per text
    out = []
    for source_id, text in texts:
        if not text.strip():
            out.append(absent_marker(source_id, "empty text"))
            continue
        try:
            edu_spans, root = parser.parse(text)
        except (ParserUnavailable, ValueError) as exc:
            log.warning("parse failed for %s: %s", source_id, exc)
            out.append(absent_marker(source_id, str(exc)))
            continue
        out.append(tree_document(source_id, text, edu_spans, root))
    return out
