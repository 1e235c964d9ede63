"""Neural-model bridges for the discourse factuality pipeline.

Couples to the pipeline only through its external formats: canonical tree
documents and the subprocess/HTTP scorer wire protocols.
"""

from .parsers import HeuristicParser, NeuralParser, ParserUnavailable
from .serve import clamp_score, make_scorer, serve_http, serve_stdio
from .treeexport import AdapterConfig, export_trees

__version__ = "0.1.0"
