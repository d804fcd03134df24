"""Text codec for point annotations embedded in captions.

Each point serializes as ``<point>XX.XX,YY.YY</point> NAME; `` — coordinates
are percentages of the media's width/height with exactly two decimals, the
name follows after a single space, and every entry ends with a semicolon and
a space. A training response is the caption text, a newline, then the
serialized points.

``parse_points`` is the strict inverse of ``serialize_points`` on its own
output and is additionally tolerant of real-world sloppiness (extra
whitespace, a missing final separator), reporting anything it had to skip
as diagnostics instead of raising.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import PointAnnotation, canonical_coord, format_coord

POINT_OPEN = "<point>"
POINT_CLOSE = "</point>"

# One serialized point entry: tag, space, name (no '<' or ';'), ';' and
# usually a trailing space. Coordinates admit 1+ digits and optional decimals
# on input; output is always exactly two decimals.
_ENTRY = re.compile(
    r"<point>\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*</point>[ \t]*([^<;]*?)\s*;",
)
_ANY_TAG = re.compile(r"<point>.*?</point>|<point>|</point>", re.DOTALL)


@dataclass
class ParseResult:
    """Outcome of parsing point markup out of a caption."""

    residual: str
    points: list[PointAnnotation]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def serialize_points(points: list[PointAnnotation] | tuple[PointAnnotation, ...]) -> str:
    """Render points to the caption micro-format, one entry per point."""
    parts = []
    for p in points:
        parts.append(f"{POINT_OPEN}{format_coord(p.x)},{format_coord(p.y)}{POINT_CLOSE} {p.name}; ")
    return "".join(parts)


def build_training_response(caption: str, points: list[PointAnnotation] | tuple[PointAnnotation, ...]) -> str:
    """Caption text plus the serialized point block on its own line."""
    if not points:
        return caption
    return f"{caption}\n{serialize_points(points)}"


def parse_points(text: str) -> ParseResult:
    """Extract point entries from text; the inverse of `serialize_points`.

    Returns the residual text with every recognized entry removed, the
    points in document order, and a diagnostic per stray fragment (an
    unmatched tag, a tag without a terminating ';', an empty name, or an
    out-of-range coordinate — offending entries are skipped, never guessed
    at).
    """
    points: list[PointAnnotation] = []
    diagnostics: list[str] = []
    consumed: list[tuple[int, int]] = []

    for m in _ENTRY.finditer(text):
        x_raw, y_raw, name = m.group(1), m.group(2), m.group(3).strip()
        if not name:
            diagnostics.append(f"entry at {m.start()}: empty name")
            continue
        x, y = canonical_coord(x_raw), canonical_coord(y_raw)
        if not (0.0 <= x <= 100.0 and 0.0 <= y <= 100.0):
            diagnostics.append(f"entry at {m.start()}: coordinate out of range ({x_raw},{y_raw})")
            continue
        points.append(PointAnnotation(name=name, x=x, y=y, order=len(points)))
        consumed.append(m.span())

    # Remove consumed entries (plus one trailing space each, when present),
    # then flag any point tags that survived.
    out = []
    cursor = 0
    for start, end in consumed:
        out.append(text[cursor:start])
        cursor = end
        if cursor < len(text) and text[cursor] == " ":
            cursor += 1
    out.append(text[cursor:])
    residual = "".join(out)

    for m in _ANY_TAG.finditer(residual):
        diagnostics.append(f"unparsed point markup: {m.group(0)[:60]!r}")

    return ParseResult(residual=residual, points=points, diagnostics=diagnostics)


def parse_training_response(text: str) -> tuple[str, list[PointAnnotation]]:
    """Split a training response back into (caption, points).

    Convenience inverse of `build_training_response` for well-formed input;
    the caption comes back stripped of the point block and any trailing
    whitespace the block's own line introduced.
    """
    result = parse_points(text)
    return result.residual.rstrip(" \n"), result.points


def grounding_report(
    gold: list[PointAnnotation] | tuple[PointAnnotation, ...],
    candidate: str,
) -> dict[str, object]:
    """Score a generated response's point markup against expectations.

    consistency: fraction of parsed points whose names also appear in the
    residual caption text (case-insensitive substring) — points that name
    things the text never mentions pull it down. 1.0 when nothing parsed.
    duplicates: count of (name, x, y) triples appearing more than once.
    out_of_range: count of entries rejected for coordinates outside [0, 100].
    """
    result = parse_points(candidate)
    out_of_range = sum("out of range" in d for d in result.diagnostics)

    residual_lower = result.residual.lower()
    if result.points:
        grounded = sum(p.name.lower() in residual_lower for p in result.points)
        consistency = grounded / len(result.points)
    else:
        consistency = 1.0

    seen: dict[tuple[str, float, float], int] = {}
    for p in result.points:
        key = (p.name, p.x, p.y)
        seen[key] = seen.get(key, 0) + 1
    duplicates = sum(n - 1 for n in seen.values())

    return {
        "consistency": consistency,
        "duplicates": duplicates,
        "out_of_range": out_of_range,
        "parsed": len(result.points),
        "gold": len(gold),
    }
