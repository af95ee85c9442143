"""Minimal X3D scene-graph document model with deterministic XML output.

Only the small node set the generator actually emits is representable; this
keeps every document trivially loadable by lightweight clients and makes
byte-for-byte output comparison meaningful.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

ALLOWED_TAGS = frozenset(
    {
        "X3D",
        "Scene",
        "Viewpoint",
        "Transform",
        "Shape",
        "Appearance",
        "Material",
        "Sphere",
        "Box",
        "IndexedFaceSet",
        "Coordinate",
        "Billboard",
        "Fog",
        "NavigationInfo",
    }
)

X3D_VERSION = "3.3"
X3D_PROFILE = "Immersive"


class X3DError(ValueError):
    """Malformed document or a node outside the supported set."""


@dataclass
class X3DNode:
    """One scene-graph element: a tag, string attributes, child nodes."""

    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list["X3DNode"] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.tag not in ALLOWED_TAGS:
            raise X3DError(f"unsupported node tag {self.tag!r}")

    def add(self, child: "X3DNode") -> "X3DNode":
        self.children.append(child)
        return child

    def find_all(self, tag: str) -> list["X3DNode"]:
        """All descendants (and self) with the given tag, document order."""
        found = []
        if self.tag == tag:
            found.append(self)
        for child in self.children:
            found.extend(child.find_all(tag))
        return found


@dataclass
class X3DDocument:
    """A Scene plus the nominal polygon accounting of its thermal shapes.

    ``nominal_polygons`` counts data-bearing (thermal) primitives only;
    structural geometry such as walls is accounted separately so scene
    complexity budgeting tracks the thermal payload.
    """

    scene: X3DNode
    nominal_polygons: int = 0
    structural_polygons: int = 0

    def __post_init__(self) -> None:
        if self.scene.tag != "Scene":
            raise X3DError("document root child must be a Scene node")


def fmt_num(v: float | int) -> str:
    """Shortest exact decimal form: ints stay ints, floats use repr."""
    if isinstance(v, int):
        return str(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def fmt_vec(*components: float) -> str:
    return " ".join(fmt_num(c) for c in components)


def _write_node(node: X3DNode, lines: list[str], depth: int) -> None:
    pad = "  " * depth
    parts = [f"{pad}<{node.tag}"]
    for name in sorted(node.attrs):
        parts.append(f" {name}={quoteattr(node.attrs[name])}")
    if node.children:
        lines.append("".join(parts) + ">")
        for child in node.children:
            _write_node(child, lines, depth + 1)
        lines.append(f"{pad}</{node.tag}>")
    else:
        lines.append("".join(parts) + "/>")


def serialize_x3d(doc: X3DDocument) -> str:
    """Render the document as UTF-8 XML with stable attribute ordering.

    Attributes are emitted sorted by name and numbers are formatted by a
    single rule, so identical documents always serialize to identical bytes.
    """
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<X3D profile={quoteattr(X3D_PROFILE)} version={quoteattr(X3D_VERSION)}>',
    ]
    _write_node(doc.scene, lines, 1)
    lines.append("</X3D>")
    return "\n".join(lines) + "\n"


def _from_element(el: ET.Element) -> X3DNode:
    if el.tag not in ALLOWED_TAGS:
        raise X3DError(f"unsupported node tag {el.tag!r}")
    node = X3DNode(el.tag, dict(el.attrib))
    for child in el:
        node.children.append(_from_element(child))
    return node


def parse_x3d(text: str) -> X3DDocument:
    """Parse XML back into the node model, rejecting unknown tags.

    Polygon accounting is presentation metadata, not scene content, so a
    parsed document carries zeroed counters; tree equality is the round-trip
    contract.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise X3DError(f"invalid XML: {exc}") from exc
    if root.tag != "X3D":
        raise X3DError(f"root element must be X3D, got {root.tag!r}")
    scenes = [el for el in root if el.tag == "Scene"]
    if len(scenes) != 1:
        raise X3DError("document must contain exactly one Scene")
    return X3DDocument(scene=_from_element(scenes[0]))


def used_tags(doc: X3DDocument) -> set[str]:
    tags: set[str] = {"X3D"}

    def walk(node: X3DNode) -> None:
        tags.add(node.tag)
        for child in node.children:
            walk(child)

    walk(doc.scene)
    return tags
