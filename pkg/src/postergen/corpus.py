"""Domain types plus readers/writers for paper-content and poster-annotation XML.

Paper content::

    <paper title=".." authors=".." page_width="8.5" page_height="11">
      <section id="intro" title="Introduction" order="0" extraction_ratio="0.4">
        <paragraph>Text ...</paragraph>
        <figure id="fig1" width="4" height="3" kind="figure" rank="1">
          <caption>...</caption>
        </figure>
      </section>
    </paper>

Poster annotation::

    <poster id="p01" width="841" height="1189">
      <panel section="intro" width="400" height="300">
        <element ref="fig1" hpos="left" width_ratio="0.5"/>
      </panel>
    </poster>

An ``<element>`` may carry an absolute ``width`` (same unit as the panel)
instead of ``width_ratio``.
"""

from collections.abc import Mapping
from dataclasses import dataclass, replace
import math
import xml.etree.ElementTree as ET

HPOS_VALUES = ("left", "center", "right")
ELEMENT_KINDS = ("figure", "table")
DEFAULT_EXTRACTION_RATIO = 0.4


class CorpusError(ValueError):
    """Base class for malformed paper or annotation input."""


class XMLSyntaxError(CorpusError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(CorpusError):
    pass


class AnnotationReferenceError(CorpusError):
    pass


@dataclass(frozen=True)
class GraphicalElement:
    id: str
    native_width: float
    native_height: float
    kind: str = "figure"
    caption: str = ""
    importance_rank: int = 1
    section_id: str = ""

    def __post_init__(self):
        if not (self.native_width > 0 and self.native_height > 0):
            raise SchemaError(f"element {self.id!r}: width and height must be positive")
        if self.kind not in ELEMENT_KINDS:
            raise SchemaError(f"element {self.id!r}: unknown kind {self.kind!r}")
        if self.importance_rank < 1:
            raise SchemaError(f"element {self.id!r}: rank must be a positive integer")

    @property
    def native_area(self):
        return self.native_width * self.native_height

    @property
    def aspect(self):
        """r_g: width over height."""
        return self.native_width / self.native_height

    def relative_size(self, page_width, page_height):
        """s_g: element area as a fraction of one paper page."""
        return (self.native_width / page_width) * (self.native_height / page_height)


@dataclass(frozen=True)
class Section:
    id: str
    title: str
    order_index: int
    paragraphs: tuple = ()
    elements: tuple = ()
    extraction_ratio: float = DEFAULT_EXTRACTION_RATIO

    def __post_init__(self):
        if not (0 < self.extraction_ratio <= 1):
            raise SchemaError(f"section {self.id!r}: extraction_ratio must lie in (0, 1]")
        ranks = [el.importance_rank for el in self.elements]
        if len(set(ranks)) != len(ranks):
            raise SchemaError(f"section {self.id!r}: importance ranks must be unique")
        for el in self.elements:
            if el.section_id != self.id:
                raise SchemaError(f"element {el.id!r} is not tagged with section {self.id!r}")

    @property
    def text(self):
        return " ".join(p for p in self.paragraphs if p.strip())


@dataclass(frozen=True)
class PaperDoc:
    title: str
    authors: str
    sections: tuple
    page_width: float = 8.5
    page_height: float = 11.0

    def __post_init__(self):
        if not self.sections:
            raise SchemaError("a paper needs at least one section")
        if sorted(s.order_index for s in self.sections) != list(range(len(self.sections))):
            raise SchemaError("section order values must be contiguous 0..k-1")
        if [s.order_index for s in self.sections] != list(range(len(self.sections))):
            object.__setattr__(
                self, "sections", tuple(sorted(self.sections, key=lambda s: s.order_index))
            )
        if not (self.page_width > 0 and self.page_height > 0):
            raise SchemaError("page dimensions must be positive")

    def section(self, section_id):
        for s in self.sections:
            if s.id == section_id:
                return s
        raise KeyError(section_id)

    @property
    def elements(self):
        return tuple(el for s in self.sections for el in s.elements)

    def element(self, element_id):
        for el in self.elements:
            if el.id == element_id:
                return el
        raise KeyError(element_id)

    def element_size(self, element):
        return element.relative_size(self.page_width, self.page_height)


@dataclass(frozen=True)
class PanelSpec:
    """Per-panel attributes. ``s_p``/``r_p`` stay ``None`` until inferred or annotated."""

    section_id: str
    l_p: int = 0
    t_p: float = 0.0
    n_p: int = 0
    g_p: float = 0.0
    s_p: float | None = None
    r_p: float | None = None

    @property
    def features(self):
        return (self.t_p, float(self.n_p), self.g_p)

    def with_geometry(self, s_p, r_p):
        return replace(self, s_p=float(s_p), r_p=float(r_p))


@dataclass(frozen=True)
class ElementPlacement:
    element_id: str
    hpos: str
    u_g: float
    y_offset: float = 0.0
    section_id: str = ""

    def __post_init__(self):
        if self.hpos not in HPOS_VALUES:
            raise SchemaError(f"element {self.element_id!r}: hpos must be one of {HPOS_VALUES}")
        if not (0 < self.u_g <= 1):
            raise SchemaError(f"element {self.element_id!r}: u_g must lie in (0, 1]")

    @property
    def hpos_code(self):
        return HPOS_VALUES.index(self.hpos)


@dataclass(frozen=True)
class PosterAnnotation:
    poster_id: str
    panels: tuple
    placements: tuple = ()
    poster_width: float = 1.0
    poster_height: float = 1.0

    def __post_init__(self):
        known = {p.section_id for p in self.panels}
        for pl in self.placements:
            if pl.section_id not in known:
                raise AnnotationReferenceError(
                    f"placement {pl.element_id!r} refers to unknown panel {pl.section_id!r}"
                )

    @property
    def aspect(self):
        return self.poster_width / self.poster_height

    def panel(self, section_id):
        for p in self.panels:
            if p.section_id == section_id:
                return p
        raise KeyError(section_id)

    def placements_for(self, section_id):
        return [pl for pl in self.placements if pl.section_id == section_id]


# -- parsing ---------------------------------------------------------------


def _parse_root(xml_bytes, expected_tag):
    if isinstance(xml_bytes, str):
        xml_bytes = xml_bytes.encode("utf-8")
    try:
        root = ET.fromstring(xml_bytes)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XMLSyntaxError(f"malformed XML at line {line}, column {column}: {exc}", line, column) from None
    if root.tag != expected_tag:
        raise SchemaError(f"expected <{expected_tag}> root element, got <{root.tag}>")
    return root


def _attr(node, name, owner, default=None, required=True):
    value = node.get(name)
    if value is None:
        if required and default is None:
            raise SchemaError(f"{owner}: missing required attribute {name!r}")
        return default
    return value


def _float_attr(node, name, owner, default=None, positive=True):
    raw = _attr(node, name, owner, default=None if default is None else str(default))
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"{owner}: attribute {name!r} is not a number: {raw!r}") from None
    if not math.isfinite(value) or (positive and value <= 0):
        raise SchemaError(f"{owner}: attribute {name!r} must be positive, got {raw!r}")
    return value


def parse_paper(xml_bytes, default_extraction_ratio=DEFAULT_EXTRACTION_RATIO):
    root = _parse_root(xml_bytes, "paper")
    sections = []
    for position, snode in enumerate(root.findall("section")):
        sid = _attr(snode, "id", f"section #{position}")
        owner = f"section {sid!r}"
        try:
            order = int(_attr(snode, "order", owner, default=str(position)))
        except ValueError:
            raise SchemaError(f"{owner}: 'order' must be an integer") from None
        ratio = _float_attr(snode, "extraction_ratio", owner, default=default_extraction_ratio)
        paragraphs = tuple((p.text or "").strip() for p in snode.findall("paragraph"))
        elements = []
        for fpos, fnode in enumerate(snode.findall("figure")):
            fid = fnode.get("id")
            if fid is None:
                raise SchemaError(f"{owner}: figure #{fpos} has no id")
            fowner = f"figure {fid!r}"
            caption_node = fnode.find("caption")
            try:
                rank = int(_attr(fnode, "rank", fowner, default=str(fpos + 1)))
            except ValueError:
                raise SchemaError(f"{fowner}: 'rank' must be an integer") from None
            elements.append(
                GraphicalElement(
                    id=fid,
                    native_width=_float_attr(fnode, "width", fowner),
                    native_height=_float_attr(fnode, "height", fowner),
                    kind=_attr(fnode, "kind", fowner, default="figure"),
                    caption=(caption_node.text or "").strip() if caption_node is not None else "",
                    importance_rank=rank,
                    section_id=sid,
                )
            )
        sections.append(
            Section(
                id=sid,
                title=snode.get("title", ""),
                order_index=order,
                paragraphs=paragraphs,
                elements=tuple(elements),
                extraction_ratio=ratio,
            )
        )
    return PaperDoc(
        title=root.get("title", ""),
        authors=root.get("authors", ""),
        sections=tuple(sections),
        page_width=_float_attr(root, "page_width", "paper", default=8.5),
        page_height=_float_attr(root, "page_height", "paper", default=11.0),
    )


def parse_annotation(xml_bytes, doc=None):
    """Read a poster annotation; with ``doc`` given, section and element refs are checked."""
    root = _parse_root(xml_bytes, "poster")
    poster_id = _attr(root, "id", "poster")
    width = _float_attr(root, "width", f"poster {poster_id!r}")
    height = _float_attr(root, "height", f"poster {poster_id!r}")

    raw = []
    placements = []
    for ppos, pnode in enumerate(root.findall("panel")):
        sid = _attr(pnode, "section", f"panel #{ppos}")
        owner = f"panel {sid!r}"
        if doc is not None and sid not in {s.id for s in doc.sections}:
            raise AnnotationReferenceError(f"{owner} refers to unknown section {sid!r}")
        pw = _float_attr(pnode, "width", owner)
        ph = _float_attr(pnode, "height", owner)
        raw.append((sid, pw, ph))
        for enode in pnode.findall("element"):
            ref = _attr(enode, "ref", f"{owner} element")
            eowner = f"element {ref!r}"
            if doc is not None:
                section_ids = {el.id for el in doc.section(sid).elements}
                if ref not in section_ids:
                    raise AnnotationReferenceError(f"{eowner} is not a figure of section {sid!r}")
            if enode.get("width_ratio") is not None:
                u_g = _float_attr(enode, "width_ratio", eowner)
            else:
                u_g = _float_attr(enode, "width", eowner) / pw
            if u_g > 1 + 1e-9:
                raise SchemaError(f"{eowner}: wider than its panel (u_g={u_g:.4g})")
            placements.append(
                ElementPlacement(
                    element_id=ref,
                    hpos=_attr(enode, "hpos", eowner),
                    u_g=min(u_g, 1.0),
                    section_id=sid,
                )
            )
    if not raw:
        raise SchemaError(f"poster {poster_id!r} has no panels")

    # sizes relative to the poster, then normalized so they sum to one
    rel = [(sid, pw / width, ph / height) for sid, pw, ph in raw]
    total = sum(w * h for _, w, h in rel)
    panels = tuple(PanelSpec(section_id=sid, s_p=w * h / total, r_p=w / h) for sid, w, h in rel)
    return PosterAnnotation(
        poster_id=poster_id,
        panels=panels,
        placements=tuple(placements),
        poster_width=width,
        poster_height=height,
    )


# -- serialization ---------------------------------------------------------


def _num(value):
    return repr(float(value))


def _tostring(root):
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def paper_to_xml(doc):
    root = ET.Element(
        "paper",
        title=doc.title,
        authors=doc.authors,
        page_width=_num(doc.page_width),
        page_height=_num(doc.page_height),
    )
    for s in doc.sections:
        snode = ET.SubElement(
            root,
            "section",
            id=s.id,
            title=s.title,
            order=str(s.order_index),
            extraction_ratio=_num(s.extraction_ratio),
        )
        for text in s.paragraphs:
            ET.SubElement(snode, "paragraph").text = text
        for el in s.elements:
            fnode = ET.SubElement(
                snode,
                "figure",
                id=el.id,
                width=_num(el.native_width),
                height=_num(el.native_height),
                kind=el.kind,
                rank=str(el.importance_rank),
            )
            ET.SubElement(fnode, "caption").text = el.caption
    return _tostring(root)


def annotation_to_xml(annotation):
    """Inverse of :func:`parse_annotation`, writing panel sizes in poster units."""
    root = ET.Element(
        "poster",
        id=annotation.poster_id,
        width=_num(annotation.poster_width),
        height=_num(annotation.poster_height),
    )
    for panel in annotation.panels:
        w = math.sqrt(panel.s_p * panel.r_p) * annotation.poster_width
        h = math.sqrt(panel.s_p / panel.r_p) * annotation.poster_height
        pnode = ET.SubElement(root, "panel", section=panel.section_id, width=_num(w), height=_num(h))
        for pl in annotation.placements_for(panel.section_id):
            ET.SubElement(pnode, "element", ref=pl.element_id, hpos=pl.hpos, width_ratio=_num(pl.u_g))
    return _tostring(root)


# -- panel attributes ------------------------------------------------------


def derive_panel_specs(doc, summaries):
    """Content-derived panel attributes (l_p, t_p, n_p, g_p) in section order.

    ``summaries`` maps section id to panel text, or is a sequence aligned with
    ``doc.sections``.
    """
    if not isinstance(summaries, Mapping):
        summaries = list(summaries)
        if len(summaries) != len(doc.sections):
            raise ValueError("need one summary per section")
        summaries = {s.id: text for s, text in zip(doc.sections, summaries)}
    missing = [s.id for s in doc.sections if s.id not in summaries]
    if missing:
        raise ValueError(f"no summary for sections {missing}")

    lengths = [len(summaries[s.id]) for s in doc.sections]
    total_len = sum(lengths)
    if total_len == 0:
        raise ValueError("all summaries are empty; text ratios are undefined")
    areas = [sum(el.native_area for el in s.elements) for s in doc.sections]
    total_area = sum(areas)
    return [
        PanelSpec(
            section_id=s.id,
            l_p=length,
            t_p=length / total_len,
            n_p=len(s.elements),
            g_p=area / total_area if total_area > 0 else 0.0,
        )
        for s, length, area in zip(doc.sections, lengths, areas)
    ]


def select_elements(section, max_elements=None):
    """Keep the ``max_elements`` best-ranked elements, in document order."""
    if max_elements is None or len(section.elements) <= max_elements:
        return section.elements
    keep = {el.id for el in sorted(section.elements, key=lambda el: el.importance_rank)[:max_elements]}
    return tuple(el for el in section.elements if el.id in keep)
