"""Tour of the point micro-format: how captions carry their coordinates.

Run:  python3 demos/point_microformat.py
"""
from pointscribe.model import PointAnnotation
from pointscribe.pointing import (
    build_training_response,
    grounding_report,
    parse_points,
    parse_training_response,
)

caption = "a cluttered desk with a mug next to the keyboard"
points = [
    PointAnnotation(name="mug", x=38.5, y=61.25, order=0),
    PointAnnotation(name="keyboard", x=55.0, y=64.0, order=1),
    PointAnnotation(name="desk", x=50.0, y=80.0, order=2),
]

print("== serialize ==")
response = build_training_response(caption, points)
print(response)

print("== parse back ==")
recovered_caption, recovered_points = parse_training_response(response)
assert recovered_caption == caption
assert recovered_points == points
for p in recovered_points:
    print(f"  {p.order}: {p.name} at ({p.x:.2f}, {p.y:.2f})")

print("\n== lenient parsing ==")
messy = (
    "two plants on the sill\n"
    "<point>12.00,9.00</point> fern; <point>broken</point> ; "
    "<point>200.00,9.00</point> cactus; "
)
result = parse_points(messy)
print(f"residual text : {result.residual.strip()!r}")
print(f"parsed points : {[(p.name, p.x, p.y) for p in result.points]}")
for note in result.diagnostics:
    print(f"diagnostic    : {note}")

print("\n== grounding report ==")
report = grounding_report(points, response)
for key, value in report.items():
    print(f"  {key}: {value}")
