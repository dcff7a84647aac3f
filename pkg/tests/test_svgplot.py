import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from blockkaczmarz.harness import Bands
from blockkaczmarz.svgplot import write_svg_plot


def make_bands(name, errors, cpu=None):
    errors = np.asarray(errors, dtype=float)
    n = errors.size
    return Bands(
        method=name,
        epochs=np.arange(n),
        median=errors,
        lo=errors * 0.5,
        hi=errors * 2.0,
        cpu_median=np.asarray(cpu, dtype=float) if cpu is not None else np.linspace(0, 1, n),
    )


def polyline_points(path):
    text = path.read_text()
    pts = []
    for match in re.findall(r'<polyline points="([^"]+)"', text):
        pts.append([tuple(map(float, pair.split(","))) for pair in match.split()])
    return pts


def test_valid_xml_and_series_count(tmp_path):
    bands = {"a": make_bands("a", [1.0, 0.1, 0.01]), "b": make_bands("b", [2.0, 0.5, 0.2])}
    path = tmp_path / "plot.svg"
    write_svg_plot(bands, path)
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    text = path.read_text()
    # one median polyline and one band polygon per method (legend uses <line>)
    assert text.count("<polyline") == 2
    assert text.count("<polygon") == 2
    # two distinguishable stroke colors
    colors = set(re.findall(r'stroke="(#[0-9a-f]{6})"', text))
    assert len(colors) >= 2


def test_single_point_series_does_not_crash(tmp_path):
    bands = {"only": make_bands("only", [0.5])}
    path = tmp_path / "one.svg"
    write_svg_plot(bands, path)
    assert path.read_text().startswith("<?xml")


def test_affine_transform_of_data(tmp_path):
    errors = [1.0, 0.25, 0.0625, 0.015625]
    bands = {"m": make_bands("m", errors)}
    path = tmp_path / "p.svg"
    write_svg_plot(bands, path, x_axis="epoch", log_y=True)
    series = polyline_points(path)[0]
    assert len(series) == 4
    xs_data = np.arange(4.0)
    ys_data = np.log10(errors)
    # fit the affine map from the endpoints, verify the interior points
    (x0, y0), (x3, y3) = series[0], series[-1]
    ax = (x3 - x0) / (xs_data[-1] - xs_data[0])
    ay = (y3 - y0) / (ys_data[-1] - ys_data[0])
    for k in (1, 2):
        assert series[k][0] == pytest.approx(x0 + ax * xs_data[k], abs=0.01)
        assert series[k][1] == pytest.approx(y0 + ay * (ys_data[k] - ys_data[0]), abs=0.01)


def test_affine_transform_linear_axis(tmp_path):
    errors = [3.0, 2.0, 1.0]
    bands = {"m": make_bands("m", errors, cpu=[0.0, 1.0, 4.0])}
    path = tmp_path / "p.svg"
    write_svg_plot(bands, path, x_axis="cpu_seconds", log_y=False)
    series = polyline_points(path)[0]
    xs = np.array([0.0, 1.0, 4.0])
    (x0, y0), (x2, y2) = series[0], series[-1]
    ax = (x2 - x0) / (xs[-1] - xs[0])
    ay = (y2 - y0) / (errors[-1] - errors[0])
    assert series[1][0] == pytest.approx(x0 + ax * 1.0, abs=0.01)
    assert series[1][1] == pytest.approx(y0 + ay * (2.0 - 3.0), abs=0.01)


def test_empty_input_rejected(tmp_path):
    with pytest.raises(ValueError, match="no bands"):
        write_svg_plot({}, tmp_path / "x.svg")


def test_bad_axis_rejected(tmp_path):
    with pytest.raises(ValueError, match="x_axis"):
        write_svg_plot({"a": make_bands("a", [1.0, 0.5])}, tmp_path / "x.svg", x_axis="wall")
