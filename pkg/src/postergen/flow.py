"""Sequential top-to-bottom filling of a panel with text and placed elements."""

from dataclasses import dataclass, replace
import math

SIDE_TEXT_MIN = 0.3


@dataclass(frozen=True)
class Block:
    kind: str  # "text" or "element"
    x: float
    y: float
    w: float
    h: float
    lines: tuple = ()
    element_id: str | None = None

    def to_dict(self):
        out = {"kind": self.kind, "x": self.x, "y": self.y, "w": self.w, "h": self.h}
        if self.kind == "text":
            out["lines"] = list(self.lines)
        else:
            out["element_id"] = self.element_id
        return out


@dataclass(frozen=True)
class FlowResult:
    blocks: tuple
    placements: tuple
    overflow: float = 0.0
    panel_id: str = ""
    content_height: float = 0.0

    @property
    def fits(self):
        return self.overflow <= 0

    def to_dict(self):
        return {
            "panel_id": self.panel_id,
            "overflow": self.overflow,
            "blocks": [b.to_dict() for b in self.blocks],
        }


def _take_lines(words, max_chars, max_lines=None):
    """Greedy line filling; returns (lines, words left over)."""
    lines = []
    i = 0
    while i < len(words) and (max_lines is None or len(lines) < max_lines):
        line = words[i]
        if len(line) > max_chars:
            # hard-break words wider than the column
            lines.append(line[:max_chars])
            words = words[:i] + [line[max_chars:]] + words[i + 1:]
            continue
        i += 1
        while i < len(words) and len(line) + 1 + len(words[i]) <= max_chars:
            line += " " + words[i]
            i += 1
        lines.append(line)
    return lines, words[i:]


def _segments(words, n_elements):
    """Split words into ``n_elements + 1`` runs of near-equal length."""
    bounds = [round(i * len(words) / (n_elements + 1)) for i in range(n_elements + 2)]
    return [words[bounds[i]:bounds[i + 1]] for i in range(n_elements + 1)]


def flow_content(panel, text, placements, aspects, char_width, line_height, gap=None, panel_id=""):
    """Lay out ``text`` and the placed elements inside ``panel`` from the top down.

    ``aspects`` maps element id to width/height. Text is cut into one more run
    than there are elements and the runs alternate with the elements. A left or
    right element lets the following text run wrap beside it when that leaves
    at least 30% of the panel width; otherwise it, like a centered element,
    takes the full row.
    """
    if char_width <= 0 or line_height <= 0:
        raise ValueError("font metrics must be positive")
    gap = line_height * 0.5 if gap is None else gap
    x0, width = panel.x, panel.w
    words = text.split()
    runs = _segments(words, len(placements))

    blocks = []
    placed = []
    cursor = panel.y
    side = None  # (x, width, bottom) of text column beside a side element

    def emit_text(run_words, x, col_width, max_lines=None):
        nonlocal cursor
        chars = max(1, int(math.floor(col_width / char_width + 1e-9)))
        lines, rest = _take_lines(run_words, chars, max_lines)
        if lines:
            h = len(lines) * line_height
            blocks.append(Block("text", x, cursor, col_width, h, lines=tuple(lines)))
            cursor += h
        return rest

    for index, run in enumerate(runs):
        if side is not None:
            sx, sw, bottom = side
            room = max(0, int(math.floor((bottom - cursor) / line_height + 1e-9)))
            if room:
                run = emit_text(run, sx, sw, max_lines=room)
            cursor = max(cursor, bottom + gap)
            side = None
            emit_text(run, x0, width)
        else:
            emit_text(run, x0, width)
        if index == len(placements):
            break

        pl = placements[index]
        if blocks and blocks[-1].kind == "text":
            cursor += gap * 0.5
        ew = min(pl.u_g, 1.0) * width
        eh = ew / aspects[pl.element_id]
        beside = width - ew - gap
        if pl.hpos != "center" and beside >= SIDE_TEXT_MIN * width:
            ex = x0 if pl.hpos == "left" else x0 + width - ew
            tx = x0 + ew + gap if pl.hpos == "left" else x0
            side = (tx, beside, cursor + eh)
            blocks.append(Block("element", ex, cursor, ew, eh, element_id=pl.element_id))
            placed.append(replace(pl, y_offset=cursor - panel.y))
        else:
            if pl.hpos == "left":
                ex = x0
            elif pl.hpos == "right":
                ex = x0 + width - ew
            else:
                ex = x0 + (width - ew) / 2
            blocks.append(Block("element", ex, cursor, ew, eh, element_id=pl.element_id))
            placed.append(replace(pl, y_offset=cursor - panel.y))
            cursor += eh + gap

    bottom = max([b.y + b.h for b in blocks], default=panel.y)
    return FlowResult(
        blocks=tuple(blocks),
        placements=tuple(placed),
        overflow=max(0.0, bottom - (panel.y + panel.h)),
        panel_id=panel_id,
        content_height=bottom - panel.y,
    )
