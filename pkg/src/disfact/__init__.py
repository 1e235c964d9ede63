"""Discourse-aware factual inconsistency scoring for long-document summaries.

The pipeline: ingest discourse trees, compute per-EDU salience features,
align summary sentences to EDU ranges, segment source documents along the
tree (or by sliding windows), score sentence/segment pairs with a pluggable
backend, re-weight by discourse structure, and aggregate to summary-level
factuality scores with a benchmark evaluation kit on top.
"""

from .aggregate import (AggregationConfig, SentenceScore, aggregate_summary,
                        build_sentence_scores, max_over_segments, reweight)
from .align import SentenceAlignment, align_sentences, depth_category_histogram
from .corpus import PairRecord, load_manifest
from .errors import (AlignmentError, BackendError, ConfigError, DisfactError,
                     InputError, ManifestError, ProtocolError, TransportError,
                     TreeFormatError, TreeValidationError)
from .evalkit import (EvalRecord, aspl, kendall_tau, paired_bootstrap, roc_auc,
                      welch_t_test)
from .features import (EduFeatures, EduFeatureTable, SentenceFeatures,
                       compute_edu_features, compute_promotion_sets,
                       sentence_features)
from .pipeline import RunConfig, run_analyze, run_eval, run_score
from .scoring import (ScoreCache, ScoreRequest, ScorerSpec, builtin_overlap,
                      score_pairs)
from .segment import Segment, SegmentPlan, fallback_chunk, segment_by_level
from .tree import (DiscourseTree, Edu, Nuclearity, TreeNode, ingest_tree,
                   tree_to_document, validate_tree)

__version__ = "0.1.0"
