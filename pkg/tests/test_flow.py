import json

import pytest
from hypothesis import given, settings, strategies as st

from postergen.corpus import ElementPlacement
from postergen.flow import flow_content
from postergen.layout import Rect

from conftest import GOLDEN
from regen_goldens import FLOW_ASPECTS, FLOW_PANEL, FLOW_PLACEMENTS, FLOW_TEXT

PANEL = Rect(0.0, 0.0, 100.0, 200.0)


def place(element_id, hpos, u):
    return ElementPlacement(element_id, hpos, u, section_id="s")


class TestFlow:
    def test_plain_text(self):
        result = flow_content(PANEL, "short text here", [], {}, char_width=5.0, line_height=10.0)
        assert len(result.blocks) == 1
        block = result.blocks[0]
        assert (block.kind, block.x, block.y, block.w) == ("text", 0.0, 0.0, 100.0)
        assert block.lines == ("short text here",)
        assert result.fits

    def test_full_width_center_element(self):
        text = " ".join(["word"] * 12)
        result = flow_content(PANEL, text, [place("f", "center", 1.0)], {"f": 2.0}, 5.0, 10.0)
        kinds = [b.kind for b in result.blocks]
        assert kinds == ["text", "element", "text"]
        el = result.blocks[1]
        assert (el.x, el.w, el.h) == (0.0, 100.0, 50.0)
        assert result.blocks[0].y + result.blocks[0].h <= el.y
        assert result.blocks[2].y >= el.y + el.h

    def test_side_element_wraps_text(self):
        text = " ".join(["ab"] * 40)
        result = flow_content(PANEL, text, [place("f", "right", 0.5)], {"f": 1.0}, 5.0, 10.0)
        el = next(b for b in result.blocks if b.kind == "element")
        beside = [b for b in result.blocks if b.kind == "text" and b.y < el.y + el.h and b.y >= el.y]
        assert el.x + el.w == pytest.approx(100.0)
        assert beside and beside[0].x == 0.0
        assert beside[0].x + beside[0].w <= el.x

    def test_narrow_remainder_goes_full_width(self):
        text = " ".join(["ab"] * 40)
        result = flow_content(PANEL, text, [place("f", "left", 0.8)], {"f": 1.0}, 5.0, 10.0)
        el = next(b for b in result.blocks if b.kind == "element")
        following = [b for b in result.blocks if b.kind == "text" and b.y >= el.y]
        assert el.x == 0.0
        assert all(b.y >= el.y + el.h for b in following)

    def test_overflow_report(self):
        text = " ".join(["overflowing"] * 200)
        result = flow_content(PANEL, text, [], {}, 5.0, 10.0, panel_id="p3")
        assert not result.fits
        assert result.panel_id == "p3"
        assert result.overflow == pytest.approx(result.content_height - PANEL.h)

    def test_placements_get_offsets(self):
        result = flow_content(Rect(0, 50, 100, 200), "a b c", [place("f", "center", 0.5)], {"f": 1.0}, 5.0, 10.0)
        assert result.placements[0].y_offset == pytest.approx(result.blocks[1].y - 50)

    def test_golden(self):
        result = flow_content(FLOW_PANEL, FLOW_TEXT, list(FLOW_PLACEMENTS), FLOW_ASPECTS, 5.0, 12.0, panel_id="s")
        golden = json.loads((GOLDEN / "flow_two_elements.json").read_text())
        assert result.to_dict() == golden

    def test_font_metrics_checked(self):
        with pytest.raises(ValueError):
            flow_content(PANEL, "x", [], {}, 0.0, 10.0)


_words = st.lists(st.text(alphabet="abcdefghij", min_size=1, max_size=25), max_size=120)


class TestProperties:
    @settings(max_examples=100, deadline=None)
    @given(
        _words,
        st.lists(st.tuples(st.sampled_from(["left", "center", "right"]), st.floats(0.1, 1.0), st.floats(0.3, 3.0)), max_size=3),
        st.floats(2.0, 8.0),
    )
    def test_blocks_stay_inside_horizontally(self, words, specs, char_width):
        placements = [place(f"f{i}", h, u) for i, (h, u, _) in enumerate(specs)]
        aspects = {f"f{i}": a for i, (_, _, a) in enumerate(specs)}
        result = flow_content(PANEL, " ".join(words), placements, aspects, char_width, 10.0)
        for b in result.blocks:
            assert b.x >= PANEL.x - 1e-9
            assert b.x + b.w <= PANEL.x + PANEL.w + 1e-9
            if b.kind == "text":
                assert all(len(line) * char_width <= b.w + 1e-9 for line in b.lines)
        # every word is emitted exactly once, in order
        emitted = " ".join(" ".join(b.lines) for b in result.blocks if b.kind == "text").split()
        assert "".join(emitted) == "".join(words)
        assert [p.element_id for p in result.placements] == [p.element_id for p in placements]
        ys = [b.y for b in result.blocks if b.kind == "element"]
        assert ys == sorted(ys)
