"""SVG and beamerposter output for a finished poster layout."""

from dataclasses import dataclass, field, fields
import json
from xml.sax.saxutils import escape, quoteattr

from .flow import flow_content
from .layout import Rect

MIN_FONT_SCALE = 0.6


@dataclass(frozen=True)
class Theme:
    background: str = "#ffffff"
    panel_fill: str = "#f4f6fa"
    panel_stroke: str = "#2c3e66"
    title_fill: str = "#2c3e66"
    title_color: str = "#ffffff"
    text_color: str = "#1a1a1a"
    placeholder_fill: str = "#c8c8c8"
    font_family: str = "Helvetica, Arial, sans-serif"
    base_font_size: float = 10.0
    padding: float = 8.0
    char_width: float = 0.5  # per unit font size
    line_height: float = 1.3  # per unit font size
    image_paths: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown theme keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class PanelBox:
    panel_id: str
    rect: Rect
    title: str
    blocks: tuple
    font_size: float
    captions: dict = field(default_factory=dict)
    overflow: float = 0.0


@dataclass(frozen=True)
class PosterLayout:
    page: Rect
    title: str
    authors: str
    panels: tuple
    theme: Theme = field(default_factory=Theme)
    header: Rect | None = None


def _title_height(theme):
    return theme.base_font_size * 2.0


def _flow_panel(rect, text, placements, aspects, theme, panel_id):
    inner_top = rect.y + _title_height(theme) + theme.padding
    content = Rect(
        rect.x + theme.padding,
        inner_top,
        max(rect.w - 2 * theme.padding, 1e-6),
        max(rect.y + rect.h - theme.padding - inner_top, 1e-6),
    )
    scale = 1.0
    # shrink the text until it fits, but never below the minimum scale
    for _ in range(20):
        size = theme.base_font_size * scale
        result = flow_content(
            content,
            text,
            placements,
            aspects,
            char_width=size * theme.char_width,
            line_height=size * theme.line_height,
            panel_id=panel_id,
        )
        if result.fits or scale <= MIN_FONT_SCALE:
            break
        needed = result.content_height
        scale = max(MIN_FONT_SCALE, scale * min(content.h / needed, 0.97))
    return result, size


def build_poster_layout(generated, page_width, page_height, header_fraction=0.08, theme=None):
    """Place the generated panels on a physical page and flow their content.

    Panel rectangles are the layout rectangles mapped onto the area below the
    header band.
    """
    theme = theme or Theme()
    doc = generated.doc
    header_h = page_height * header_fraction
    header = Rect(0.0, 0.0, page_width, header_h) if header_h > 0 else None
    body = Rect(0.0, header_h, page_width, page_height - header_h)
    panels = []
    for i, (section, rect, comp) in enumerate(zip(doc.sections, generated.layout.rects, generated.compositions)):
        physical = Rect(body.x + rect.x * body.w, body.y + rect.y * body.h, rect.w * body.w, rect.h * body.h)
        aspects = {el.id: el.aspect for el in section.elements}
        flowed, size = _flow_panel(
            physical, generated.summaries[section.id], list(comp.placements), aspects, theme, section.id
        )
        panels.append(
            PanelBox(
                panel_id=section.id,
                rect=physical,
                title=section.title,
                blocks=flowed.blocks,
                font_size=size,
                captions={el.id: el.caption for el in section.elements},
                overflow=flowed.overflow,
            )
        )
    return PosterLayout(
        page=Rect(0.0, 0.0, page_width, page_height),
        title=doc.title,
        authors=doc.authors,
        panels=tuple(panels),
        theme=theme,
        header=header,
    )


def _f(v):
    return f"{v:.2f}"


def _svg_text(x, y, text, size, color, family, weight=None, ident=None, anchor=None):
    attrs = [f'x="{_f(x)}"', f'y="{_f(y)}"', f'font-size="{_f(size)}"', f"fill={quoteattr(color)}"]
    attrs.append(f"font-family={quoteattr(family)}")
    if weight:
        attrs.append(f'font-weight="{weight}"')
    if anchor:
        attrs.append(f'text-anchor="{anchor}"')
    if ident:
        attrs.insert(0, f'id="{ident}"')
    return f"<text {' '.join(attrs)}>{escape(text)}</text>"


def to_svg(layout):
    theme = layout.theme
    page = layout.page
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" '
        f'width="{_f(page.w)}" height="{_f(page.h)}" viewBox="0 0 {_f(page.w)} {_f(page.h)}">',
        f'<rect id="background" x="0.00" y="0.00" width="{_f(page.w)}" height="{_f(page.h)}" fill="{theme.background}"/>',
    ]
    if layout.header is not None:
        h = layout.header
        out.append('<g id="header">')
        out.append(
            _svg_text(h.x + h.w / 2, h.y + h.h * 0.45, layout.title, theme.base_font_size * 1.8,
                      theme.title_fill, theme.font_family, weight="bold", ident="poster-title", anchor="middle")
        )
        out.append(
            _svg_text(h.x + h.w / 2, h.y + h.h * 0.8, layout.authors, theme.base_font_size * 1.1,
                      theme.text_color, theme.font_family, ident="poster-authors", anchor="middle")
        )
        out.append("</g>")

    for i, panel in enumerate(layout.panels):
        r = panel.rect
        pid = f"panel-{i}"
        out.append(f'<g id="{pid}" class="panel">')
        out.append(
            f'<rect id="{pid}-frame" x="{_f(r.x)}" y="{_f(r.y)}" width="{_f(r.w)}" height="{_f(r.h)}" '
            f'fill="{theme.panel_fill}" stroke="{theme.panel_stroke}" stroke-width="1.00"/>'
        )
        th = _title_height(theme)
        out.append(
            f'<rect id="{pid}-titlebar" x="{_f(r.x)}" y="{_f(r.y)}" width="{_f(r.w)}" height="{_f(th)}" '
            f'fill="{theme.title_fill}"/>'
        )
        out.append(
            _svg_text(r.x + theme.padding, r.y + th * 0.7, panel.title, theme.base_font_size * 1.2,
                      theme.title_color, theme.font_family, weight="bold", ident=f"{pid}-title")
        )
        for j, block in enumerate(panel.blocks):
            bid = f"{pid}-block-{j}"
            if block.kind == "text":
                lh = panel.font_size * theme.line_height
                out.append(f'<g id="{bid}" class="text">')
                for k, line in enumerate(block.lines):
                    out.append(
                        _svg_text(block.x, block.y + lh * (k + 0.8), line, panel.font_size,
                                  theme.text_color, theme.font_family)
                    )
                out.append("</g>")
                continue
            out.append(f'<g id="{bid}" class="element">')
            path = theme.image_paths.get(block.element_id)
            if path:
                out.append(
                    f'<image x="{_f(block.x)}" y="{_f(block.y)}" width="{_f(block.w)}" height="{_f(block.h)}" '
                    f'preserveAspectRatio="xMidYMid meet" xlink:href={quoteattr(path)}/>'
                )
            else:
                out.append(
                    f'<rect x="{_f(block.x)}" y="{_f(block.y)}" width="{_f(block.w)}" height="{_f(block.h)}" '
                    f'fill="{theme.placeholder_fill}"/>'
                )
                caption = panel.captions.get(block.element_id, "")
                label = f"{block.element_id}: {caption}" if caption else block.element_id
                max_chars = max(1, int(block.w / (panel.font_size * 0.8 * theme.char_width)))
                if len(label) > max_chars:
                    label = label[: max(1, max_chars - 3)] + "..."
                out.append(
                    _svg_text(block.x + 2, block.y + block.h / 2, label, panel.font_size * 0.8,
                              theme.text_color, theme.font_family)
                )
            out.append("</g>")
        out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


_LATEX_SPECIAL = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
}


def latex_escape(text):
    return "".join(_LATEX_SPECIAL.get(ch, ch) for ch in text)


def _frac(v):
    return f"{v:.4f}"


def to_latex(layout):
    """beamerposter source; each panel is a ``textblock*`` at its page fraction."""
    page = layout.page
    theme = layout.theme
    lines = [
        r"\documentclass[final]{beamer}",
        f"\\usepackage[orientation=portrait,size=custom,width={page.w / 10:.1f},height={page.h / 10:.1f},scale=1.0]{{beamerposter}}",
        r"\usepackage[absolute,overlay]{textpos}",
        r"\usepackage{graphicx}",
        r"\setlength{\TPHorizModule}{\paperwidth}",
        r"\setlength{\TPVertModule}{\paperheight}",
        r"\setbeamertemplate{navigation symbols}{}",
        r"\begin{document}",
        r"\begin{frame}[t]",
    ]
    if layout.header is not None:
        h = layout.header
        lines += [
            f"\\begin{{textblock*}}{{{_frac(h.w / page.w)}\\paperwidth}}({_frac(h.x / page.w)}\\paperwidth,{_frac(h.y / page.h)}\\paperheight)",
            r"\begin{center}",
            f"{{\\Huge\\bfseries {latex_escape(layout.title)}}}\\\\[0.5ex]",
            f"{{\\Large {latex_escape(layout.authors)}}}",
            r"\end{center}",
            r"\end{textblock*}",
        ]
    for panel in layout.panels:
        r = panel.rect
        lines.append(f"% panel {panel.panel_id}")
        lines.append(
            f"\\begin{{textblock*}}{{{_frac(r.w / page.w)}\\paperwidth}}({_frac(r.x / page.w)}\\paperwidth,{_frac(r.y / page.h)}\\paperheight)"
        )
        lines.append(f"\\begin{{block}}{{{latex_escape(panel.title)}}}")
        for block in panel.blocks:
            if block.kind == "text":
                lines.append(latex_escape(" ".join(block.lines)))
                lines.append("")
                continue
            fraction = block.w / max(r.w - 2 * theme.padding, 1e-9)
            if abs(block.x - (r.x + theme.padding)) < 1e-6:
                env = "flushleft"
            elif abs(block.x + block.w - (r.x + r.w - theme.padding)) < 1e-6:
                env = "flushright"
            else:
                env = "center"
            path = theme.image_paths.get(block.element_id)
            if path:
                body = f"\\includegraphics[width={_frac(fraction)}\\linewidth]{{{path}}}"
            else:
                caption = latex_escape(panel.captions.get(block.element_id, block.element_id))
                body = f"\\fbox{{\\parbox{{{_frac(fraction)}\\linewidth}}{{\\centering {caption}}}}}"
            lines += [f"\\begin{{{env}}}", body, f"\\end{{{env}}}"]
        lines.append(r"\end{block}")
        lines.append(r"\end{textblock*}")
    lines += [r"\end{frame}", r"\end{document}"]
    return "\n".join(lines) + "\n"
