"""Exhaustive reference for the guillotine search, written without the library's helpers."""

import itertools


def all_trees(lo, hi):
    """Every contiguous binary split tree over panels lo..hi-1 as nested tuples.

    A leaf is an int; a node is ``(direction, split_index, first, second)``.
    """
    if hi - lo == 1:
        yield lo
        return
    for i in range(lo + 1, hi):
        for first, second in itertools.product(list(all_trees(lo, i)), list(all_trees(i, hi))):
            for direction in ("top_bottom", "left_right"):
                yield (direction, i, first, second)


def _members(tree):
    if isinstance(tree, int):
        return [tree]
    return _members(tree[2]) + _members(tree[3])


def score(tree, sizes, ratios, x, y, w, h, alpha):
    """Shape loss of every leaf plus alpha |t - 0.5| at every node, with panel rects."""
    if isinstance(tree, int):
        return abs(ratios[tree] - w / h), {tree: (x, y, w, h)}
    direction, _, first, second = tree
    a = sum(sizes[i] for i in _members(first))
    b = sum(sizes[i] for i in _members(second))
    t = a / (a + b)
    if direction == "top_bottom":
        l1, r1 = score(first, sizes, ratios, x, y, w, h * t, alpha)
        l2, r2 = score(second, sizes, ratios, x, y + h * t, w, h * (1 - t), alpha)
    else:
        l1, r1 = score(first, sizes, ratios, x, y, w * t, h, alpha)
        l2, r2 = score(second, sizes, ratios, x + w * t, y, w * (1 - t), h, alpha)
    return l1 + l2 + alpha * abs(t - 0.5), {**r1, **r2}


def brute_force(sizes, ratios, alpha, w=1.0, h=1.0):
    """Minimum loss over all trees and the list of (loss, tree) pairs."""
    scored = [(score(t, sizes, ratios, 0.0, 0.0, w, h, alpha)[0], t) for t in all_trees(0, len(sizes))]
    return min(loss for loss, _ in scored), scored
