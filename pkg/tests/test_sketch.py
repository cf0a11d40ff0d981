import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sketchplay.errors import DegenerateOutline, EmptyCanvas, TooFewPoints
from sketchplay.sketch import (
    SketchCanvas,
    SketchObject,
    beautify_stroke,
    lift_to_3d,
    load_canvas,
    segment_objects,
)
from sketchplay.trajectory import Stroke, TimedPoint


def xy_stroke(samples):
    return Stroke(tuple(TimedPoint(t, (x, y, 0.0)) for t, x, y in samples))


def point_polyline_distance(p, polyline):
    best = math.inf
    for a, b in zip(polyline, polyline[1:]):
        ab = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
        ap = (p[0] - a[0], p[1] - a[1], p[2] - a[2])
        denom = sum(c * c for c in ab)
        t = 0.0 if denom == 0 else max(0.0, min(1.0, sum(x * y for x, y in zip(ap, ab)) / denom))
        q = (a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2])
        best = min(best, math.dist(p, q))
    return best


# --- beautification ---------------------------------------------------------

def test_epsilon_zero_returns_input_unchanged():
    stroke = xy_stroke([(0.0, 0, 0), (0.1, 0.3, 0.01), (0.2, 0.5, 0.0)])
    assert beautify_stroke(stroke, 0.0) is stroke


def test_collinear_points_collapse_to_endpoints():
    stroke = xy_stroke([(0.01 * i, 0.01 * i, 0.02 * i) for i in range(10)])
    out = beautify_stroke(stroke, 1e-3)
    assert len(out.points) == 2
    assert out.points[0] == stroke.points[0]
    assert out.points[-1] == stroke.points[-1]


def test_noisy_circle_simplifies_within_epsilon():
    rng = random.Random(7)
    n, radius, sigma, epsilon = 200, 0.1, 0.002, 0.005
    pts = []
    for i in range(n):
        a = 2 * math.pi * i / n
        pts.append((
            0.01 * i,
            radius * math.cos(a) + rng.gauss(0, sigma),
            radius * math.sin(a) + rng.gauss(0, sigma),
        ))
    stroke = xy_stroke(pts)
    out = beautify_stroke(stroke, epsilon)
    assert len(out.points) < 40
    # brute force: every dropped input point sits within epsilon of the output
    polyline = [p.pos for p in out.points]
    for p in stroke.points:
        assert point_polyline_distance(p.pos, polyline) <= epsilon + 1e-12


def test_closure_snapping_merges_near_endpoints():
    eps = 0.01
    pts = [(0.0, 0.0, 0.0), (0.1, 0.1, 0.0), (0.2, 0.1, 0.1), (0.3, 0.0, 0.012)]
    out = beautify_stroke(xy_stroke([(t, x, y) for (t, x, y) in pts]), eps)
    assert out.points[-1].pos == out.points[0].pos


def test_beautify_rejects_single_point():
    with pytest.raises(TooFewPoints):
        Stroke((TimedPoint(0.0, (0, 0, 0)),))


@st.composite
def jagged_strokes(draw):
    n = draw(st.integers(min_value=3, max_value=30))
    coords = st.integers(min_value=0, max_value=1000).map(lambda k: k / 1000.0)
    return xy_stroke([(0.01 * i, draw(coords), draw(coords)) for i in range(n)])


@given(jagged_strokes(), st.floats(min_value=1e-4, max_value=0.05))
@settings(max_examples=40)
def test_simplified_stroke_stays_within_epsilon(stroke, epsilon):
    out = beautify_stroke(stroke, epsilon)
    polyline = [p.pos for p in out.points]
    for p in stroke.points:
        # closure snapping may move the final vertex by up to 2*epsilon
        assert point_polyline_distance(p.pos, polyline) <= 3 * epsilon + 1e-12


# --- segmentation -----------------------------------------------------------

def square_stroke(t0, cx, cy, side=0.05, dt=0.2):
    h = side / 2
    corners = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h), (cx - h, cy - h)]
    return xy_stroke([(t0 + dt * i / 4, x, y) for i, (x, y) in enumerate(corners)])


def test_single_stroke_single_object():
    canvas = SketchCanvas(strokes=(square_stroke(0.0, 0.5, 0.5),), extent=(1.0, 1.0))
    objects = segment_objects(canvas)
    assert len(objects) == 1
    assert objects[0].strokes == canvas.strokes


def test_temporal_pause_splits_objects():
    s1 = square_stroke(0.0, 0.3, 0.5)
    s2 = square_stroke(s1.t_end + 2.0, 0.32, 0.5)
    canvas = SketchCanvas(strokes=(s1, s2), extent=(1.0, 1.0))
    objects = segment_objects(canvas, temporal_gap=0.5)
    assert len(objects) == 2


def test_three_clusters_match_brute_force_components():
    diag = math.hypot(1.0, 1.0)
    centers = [(0.15, 0.15), (0.15 + 0.4 * diag, 0.15), (0.15, 0.15 + 0.4 * diag)]
    strokes = []
    t = 0.0
    for cx, cy in centers:
        for k in range(3):  # three strokes per cluster, drawn back to back
            strokes.append(square_stroke(t, cx + 0.01 * k, cy, side=0.04))
            t = strokes[-1].t_end + 0.1
    canvas = SketchCanvas(strokes=tuple(strokes), extent=(1.0, 1.0))
    frac = 0.15
    objects = segment_objects(canvas, temporal_gap=0.5, spatial_gap_fraction=frac)

    # brute-force oracle: connected components over consecutive-stroke links
    links = []
    for a, b in zip(strokes, strokes[1:]):
        pause = b.t0 - a.t_end
        gap = math.dist(a.points[-1].pos, b.points[0].pos)
        links.append(pause <= 0.5 and gap <= frac * canvas.diagonal)
    expected_groups = []
    group = [0]
    for i, linked in enumerate(links):
        if linked:
            group.append(i + 1)
        else:
            expected_groups.append(group)
            group = [i + 1]
    expected_groups.append(group)

    assert len(objects) == len(expected_groups) == 3
    memberships = [tuple(canvas.strokes.index(s) for s in o.strokes) for o in objects]
    assert memberships == [tuple(g) for g in expected_groups]


def test_segmentation_is_a_partition():
    strokes = tuple(square_stroke(1.2 * i, 0.1 + 0.2 * i, 0.4) for i in range(4))
    canvas = SketchCanvas(strokes=strokes, extent=(1.0, 1.0))
    objects = segment_objects(canvas)
    seen = [s for o in objects for s in o.strokes]
    assert sorted(map(id, seen)) == sorted(map(id, strokes))


def test_empty_canvas_raises():
    with pytest.raises(EmptyCanvas):
        segment_objects(SketchCanvas(strokes=(), extent=(1.0, 1.0)))


def test_object_ids_are_deterministic():
    canvas = SketchCanvas(strokes=(square_stroke(0.0, 0.5, 0.5),), extent=(1.0, 1.0))
    a = segment_objects(canvas)
    b = segment_objects(canvas)
    assert [o.id for o in a] == [o.id for o in b]
    different = segment_objects(
        SketchCanvas(strokes=(square_stroke(0.0, 0.51, 0.5),), extent=(1.0, 1.0)))
    assert [o.id for o in different] != [o.id for o in a]


def test_load_canvas_json():
    text = '{"extent": [1.0, 0.5], "strokes": [[{"t":0,"x":0.1,"y":0.1},{"t":0.1,"x":0.2,"y":0.1}]]}'
    canvas = load_canvas(text)
    assert canvas.extent == (1.0, 0.5)
    assert len(canvas.strokes) == 1


# --- lifting ----------------------------------------------------------------

def unit_square_object():
    canvas = SketchCanvas(strokes=(square_stroke(0.0, 0.5, 0.5, side=1.0 - 1e-9),), extent=(1.0, 1.0))
    return segment_objects(canvas)[0]


def circle_object(n=64, r=0.1):
    pts = [(0.01 * i, 0.5 + r * math.cos(2 * math.pi * i / n), 0.5 + r * math.sin(2 * math.pi * i / n))
           for i in range(n + 1)]
    canvas = SketchCanvas(strokes=(xy_stroke(pts),), extent=(1.0, 1.0))
    return segment_objects(canvas)[0]


def test_square_prism_volume_is_area_times_thickness():
    obj = unit_square_object()
    prism = lift_to_3d(obj, thickness=0.1)
    area = obj.descriptors["area"]
    assert prism.kind == "extruded_prism"
    assert prism.volume == pytest.approx(area * 0.1, rel=1e-9)


def test_circle_fits_sphere_of_equal_area():
    obj = circle_object()
    out = lift_to_3d(obj, thickness=0.05, fit_primitives=True)
    assert out.kind == "sphere"
    assert out.radius == pytest.approx(math.sqrt(obj.descriptors["area"] / math.pi), rel=1e-9)


def test_rectangle_fits_box():
    obj = unit_square_object()
    out = lift_to_3d(obj, thickness=0.1, fit_primitives=True)
    assert out.kind == "box"
    assert out.volume == pytest.approx(
        obj.descriptors["width"] * obj.descriptors["height"] * 0.1, rel=1e-9)


def test_degenerate_outline_raises():
    tiny = SketchObject(
        id="x", strokes=(), outline=((0, 0), (1e-5, 0), (1e-5, 1e-5)),
        bbox=(0, 0, 1e-5, 1e-5), centroid=(5e-6, 5e-6),
        descriptors={"area": 5e-11, "circularity": 0, "rectangularity": 0,
                     "aspect_ratio": 1, "compactness": 0, "stroke_count": 1,
                     "width": 1e-5, "height": 1e-5},
    )
    with pytest.raises(DegenerateOutline):
        lift_to_3d(tiny, thickness=0.1)


def test_prism_volume_invariant_under_rotation():
    obj = circle_object()
    base = lift_to_3d(obj, thickness=0.07)
    for angle in (0.3, 1.1, 2.0):
        c, s = math.cos(angle), math.sin(angle)
        pts = [
            (0.01 * i,
             0.5 + c * (p.pos[0] - 0.5) - s * (p.pos[1] - 0.5),
             0.5 + s * (p.pos[0] - 0.5) + c * (p.pos[1] - 0.5))
            for i, p in enumerate(obj.strokes[0].points)
        ]
        rotated = segment_objects(SketchCanvas(strokes=(xy_stroke(pts),), extent=(1.0, 1.0)))[0]
        lifted = lift_to_3d(rotated, thickness=0.07)
        assert lifted.volume == pytest.approx(base.volume, rel=1e-6)


def test_prism_is_watertight():
    # every edge appears exactly twice across the face triangles
    prism = lift_to_3d(unit_square_object(), thickness=0.1)
    edge_count = {}
    for f in prism.faces:
        for i in range(3):
            e = tuple(sorted((f[i], f[(i + 1) % 3])))
            edge_count[e] = edge_count.get(e, 0) + 1
    assert all(c == 2 for c in edge_count.values())
