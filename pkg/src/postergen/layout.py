"""Guillotine panel layout: binary split trees searched under shape + symmetry loss.

Coordinates are page-normalized with the origin at the top-left corner and
``y`` growing downwards, so a ``top_bottom`` split puts its first subtree on top.
"""

from dataclasses import dataclass
from functools import lru_cache
import json

TOP_BOTTOM = "top_bottom"
LEFT_RIGHT = "left_right"
DIRECTIONS = (TOP_BOTTOM, LEFT_RIGHT)
DEFAULT_ALPHA = 0.1
# losses closer than this count as tied, so rounding never overrides the tie order
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def area(self):
        return self.w * self.h

    @property
    def aspect(self):
        return self.w / self.h

    def scaled(self, sx, sy=None):
        sy = sx if sy is None else sy
        return Rect(self.x * sx, self.y * sy, self.w * sx, self.h * sy)

    def split(self, direction, t):
        if direction == TOP_BOTTOM:
            return (
                Rect(self.x, self.y, self.w, self.h * t),
                Rect(self.x, self.y + self.h * t, self.w, self.h * (1 - t)),
            )
        return (
            Rect(self.x, self.y, self.w * t, self.h),
            Rect(self.x + self.w * t, self.y, self.w * (1 - t), self.h),
        )

    def to_dict(self):
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


UNIT_PAGE = Rect(0.0, 0.0, 1.0, 1.0)


@dataclass(frozen=True)
class Leaf:
    panel_index: int


@dataclass(frozen=True)
class Node:
    direction: str
    ratio: float
    first: "Leaf | Node"
    second: "Leaf | Node"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown split direction {self.direction!r}")
        if not 0 < self.ratio < 1:
            raise ValueError("split ratio must lie in (0, 1)")


def leaves(tree):
    if isinstance(tree, Leaf):
        return [tree.panel_index]
    return leaves(tree.first) + leaves(tree.second)


def splits(tree):
    """Internal nodes in pre-order."""
    if isinstance(tree, Leaf):
        return []
    return [tree] + splits(tree.first) + splits(tree.second)


def tree_to_dict(tree):
    if isinstance(tree, Leaf):
        return {"panel": tree.panel_index}
    return {
        "direction": tree.direction,
        "ratio": tree.ratio,
        "first": tree_to_dict(tree.first),
        "second": tree_to_dict(tree.second),
    }


def tree_from_dict(data):
    if "panel" in data:
        return Leaf(int(data["panel"]))
    return Node(
        data["direction"], float(data["ratio"]), tree_from_dict(data["first"]), tree_from_dict(data["second"])
    )


@dataclass(frozen=True)
class LayoutResult:
    tree: "Leaf | Node"
    rects: tuple
    loss: float
    updated_r: tuple

    def to_dict(self):
        return {
            "tree": tree_to_dict(self.tree),
            "rects": [r.to_dict() for r in self.rects],
            "loss": self.loss,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _check_region(region):
    if not (region.w > 0 and region.h > 0):
        raise ValueError("layout region must have positive width and height")


def arrange(panels, region=UNIT_PAGE, alpha=DEFAULT_ALPHA):
    """Best contiguous split tree for ``panels = [(s_p, r_p), ...]``.

    Every split index is tried in both directions, recursively. Leaves cost
    ``|r_p - w/h|`` and each split costs ``alpha * |t - 0.5|``. Equal losses
    (within ``TIE_TOL``) keep the first candidate met: top_bottom before
    left_right, then the smaller split index.
    """
    panels = [(float(s), float(r)) for s, r in panels]
    if not panels:
        raise ValueError("need at least one panel")
    _check_region(region)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    sizes = [s for s, _ in panels]
    ratios = [r for _, r in panels]

    # the loss of a subproblem depends only on the panel range and region shape
    @lru_cache(maxsize=None)
    def search(lo, hi, w, h):
        if hi - lo == 1:
            return abs(ratios[lo] - w / h), None
        total = sum(sizes[lo:hi])
        best_loss, best_split = float("inf"), None
        for direction in DIRECTIONS:
            prefix = 0.0
            for i in range(lo + 1, hi):
                prefix += sizes[i - 1]
                t = prefix / total
                if not 0 < t < 1:
                    continue
                if direction == TOP_BOTTOM:
                    loss1, _ = search(lo, i, w, h * t)
                    loss2, _ = search(i, hi, w, h * (1 - t))
                else:
                    loss1, _ = search(lo, i, w * t, h)
                    loss2, _ = search(i, hi, w * (1 - t), h)
                loss = loss1 + loss2 + alpha * abs(t - 0.5)
                if loss < best_loss - TIE_TOL:
                    best_loss, best_split = loss, (direction, i, t)
        if best_split is None:
            raise ValueError("panel sizes must be positive")
        return best_loss, best_split

    def build(lo, hi, w, h):
        _, choice = search(lo, hi, w, h)
        if choice is None:
            return Leaf(lo)
        direction, i, t = choice
        if direction == TOP_BOTTOM:
            return Node(direction, t, build(lo, i, w, h * t), build(i, hi, w, h * (1 - t)))
        return Node(direction, t, build(lo, i, w * t, h), build(i, hi, w * (1 - t), h))

    loss, _ = search(0, len(panels), region.w, region.h)
    tree = build(0, len(panels), region.w, region.h)
    rects = realize(tree, sizes, region)
    return LayoutResult(
        tree=tree,
        rects=tuple(rects),
        loss=loss,
        updated_r=tuple(r.aspect for r in rects),
    )


def realize(tree, sizes, region=UNIT_PAGE):
    """Rectangles per panel index; each node's ratio is recomputed from ``sizes``."""
    n_leaves = len(leaves(tree))
    if n_leaves != len(sizes):
        raise ValueError(f"tree has {n_leaves} leaves but {len(sizes)} sizes were given")
    _check_region(region)
    rects = [None] * len(sizes)

    def walk(node, rect):
        if isinstance(node, Leaf):
            rects[node.panel_index] = rect
            return sum_sizes(node)
        t = sum_sizes(node.first) / sum_sizes(node)
        first, second = rect.split(node.direction, t)
        walk(node.first, first)
        walk(node.second, second)

    def sum_sizes(node):
        return sum(sizes[i] for i in leaves(node))

    walk(tree, region)
    return rects


def layout_loss(panels, tree, region=UNIT_PAGE, alpha=DEFAULT_ALPHA):
    sizes = [s for s, _ in panels]
    rects = realize(tree, sizes, region)
    shape = sum(abs(r - rect.aspect) for (_, r), rect in zip(panels, rects))
    aesthetic = 0.0
    for node in splits(tree):
        first = sum(sizes[i] for i in leaves(node.first))
        total = sum(sizes[i] for i in leaves(node))
        aesthetic += alpha * abs(first / total - 0.5)
    return shape + aesthetic
