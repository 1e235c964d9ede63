"""Per-EDU and per-sentence discourse salience features.

Three features are computed for every EDU, all driven by nuclearity:

* satellite penalty: number of Satellite nodes on the root-to-leaf path
  (leaf included, root excluded; the root's pseudo-nuclearity never counts);
* depth score: tree depth minus the level of the EDU's highest promotion,
  i.e. the node closest to the root whose promotion set contains the EDU;
* promotion score: number of levels the EDU is promoted from its leaf up to
  its highest promotion.

Levels count edges from the root (root = 0) and the tree depth D is
1 + max leaf level, so a single-EDU tree has D = 1.  Normalized variants
divide by D.  Promotion sets follow the usual salience rule: a leaf promotes
itself, an internal node the union of its Nucleus children's sets.

Everything here is a pure function over immutable trees.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .tree import DiscourseTree, Nuclearity, TreeNode

Span = tuple[int, int]


def compute_promotion_sets(tree: DiscourseTree) -> dict[Span, frozenset[int]]:
    """Promotion set per node, keyed by the node's (lo, hi) span."""
    sets: dict[Span, frozenset[int]] = {}

    def visit(node: TreeNode) -> frozenset[int]:
        if node.is_leaf:
            result = frozenset({node.lo})
        else:
            promoted: set[int] = set()
            for child in node.children:
                child_set = visit(child)
                if child.nuclearity is Nuclearity.NUCLEUS:
                    promoted |= child_set
            result = frozenset(promoted)
        sets[node.span] = result
        return result

    visit(tree.root)
    return sets


@dataclass(frozen=True)
class EduFeatures:
    ono_penalty: int
    depth_score: int
    promotion_score: int
    tree_depth: int

    @property
    def ono_norm(self) -> float:
        return self.ono_penalty / self.tree_depth

    @property
    def depth_norm(self) -> float:
        return self.depth_score / self.tree_depth

    @property
    def promo_norm(self) -> float:
        return self.promotion_score / self.tree_depth


@dataclass(frozen=True)
class EduFeatureTable:
    tree_depth: int
    rows: tuple[EduFeatures, ...]

    @property
    def edu_count(self) -> int:
        return len(self.rows)

    def row(self, edu_index: int) -> EduFeatures:
        """1-based lookup."""
        if not 1 <= edu_index <= len(self.rows):
            raise InputError(
                f"EDU index {edu_index} outside [1, {len(self.rows)}]")
        return self.rows[edu_index - 1]


def compute_edu_features(tree: DiscourseTree) -> EduFeatureTable:
    promotion = compute_promotion_sets(tree)

    node_level: dict[Span, int] = {}
    leaf_level: dict[int, int] = {}
    satellite_count: dict[int, int] = {}

    def visit(node: TreeNode, level: int, satellites: int) -> None:
        if node.nuclearity is Nuclearity.SATELLITE:
            satellites += 1
        node_level[node.span] = level
        if node.is_leaf:
            leaf_level[node.lo] = level
            satellite_count[node.lo] = satellites
            return
        for child in node.children:
            visit(child, level + 1, satellites)

    visit(tree.root, 0, 0)
    depth = 1 + max(leaf_level.values())

    # Highest promotion = node of minimal level containing the EDU.
    highest: dict[int, int] = {}
    for span, members in promotion.items():
        level = node_level[span]
        for edu in members:
            if edu not in highest or level < highest[edu]:
                highest[edu] = level

    rows = []
    for edu in range(1, tree.edu_count + 1):
        top = highest.get(edu, leaf_level[edu])  # a never-promoted EDU tops out at its own leaf
        rows.append(EduFeatures(
            ono_penalty=satellite_count[edu],
            depth_score=depth - top,
            promotion_score=leaf_level[edu] - top,
            tree_depth=depth,
        ))
    return EduFeatureTable(tree_depth=depth, rows=tuple(rows))


@dataclass(frozen=True)
class SentenceFeatures:
    """Max over the constituent EDUs, raw and normalized alike."""

    ono_penalty: int
    depth_score: int
    promotion_score: int
    ono_norm: float
    depth_norm: float
    promo_norm: float


def sentence_features(table: EduFeatureTable, lo: int, hi: int) -> SentenceFeatures:
    if not (1 <= lo <= hi <= table.edu_count):
        raise InputError(
            f"EDU range [{lo}, {hi}] outside [1, {table.edu_count}]")
    rows = table.rows[lo - 1:hi]
    return SentenceFeatures(
        ono_penalty=max(r.ono_penalty for r in rows),
        depth_score=max(r.depth_score for r in rows),
        promotion_score=max(r.promotion_score for r in rows),
        ono_norm=max(r.ono_norm for r in rows),
        depth_norm=max(r.depth_norm for r in rows),
        promo_norm=max(r.promo_norm for r in rows),
    )
