import re

import numpy as np
import pytest

from homotop import ValidationError
from homotop.persistence import PersistenceDiagram
from homotop.render import DIM_COLORS, render


def test_barcode_essential_marker(tmp_path):
    out = tmp_path / "b.svg"
    text = render("barcode", PersistenceDiagram({0: [[0, np.inf]]}), out, cap=3.0)
    assert out.read_text() == text
    assert text.startswith("<svg") and text.count("<polygon") == 1
    assert "H0" in text


def test_barcode_dimension_colors():
    text = render("barcode", PersistenceDiagram({1: [[0, 1]], 2: [[0.2, 0.5]]}))
    assert DIM_COLORS[1] == "#d62728" and DIM_COLORS[2] == "#1f77b4"
    assert DIM_COLORS[1] in text and DIM_COLORS[2] in text


def test_distance_series_polylines():
    rng = np.random.default_rng(0)
    text = render("distance_series", {1: rng.uniform(size=15), 2: rng.uniform(size=15)})
    assert text.count("<polyline") == 2
    for line in re.findall(r'points="([^"]+)"', text):
        assert len(line.split()) == 15


def test_scatter3_markers_only():
    text = render("scatter3", np.eye(3))
    assert text.count("<circle") == 3 and "<polyline" not in text


@pytest.mark.parametrize("kind,payload", [("barcode", PersistenceDiagram({})),
                                          ("diagram", PersistenceDiagram({})),
                                          ("scatter3", np.empty((0, 3))),
                                          ("distance_series", {})])
def test_empty_payloads(kind, payload):
    assert "empty" in render(kind, payload)


def test_diagram_and_determinism():
    d = PersistenceDiagram({0: [[0, 0.5], [0, np.inf]], 1: [[0.2, 0.4]]})
    a, b = render("diagram", d), render("diagram", d)
    assert a == b and a.count("<circle") == 3


def test_unknown_kind():
    with pytest.raises(ValidationError):
        render("heatmap", None)
