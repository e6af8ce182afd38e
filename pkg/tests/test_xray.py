import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dirichlet_xray.errors import SeedNotOnCurve
from dirichlet_xray.evaluator import truncated_general
from dirichlet_xray.series import zeta_spec
from dirichlet_xray.xray import (
    CLOSED,
    CURVE_CSV_COLUMNS,
    GAMMA_K0,
    GAMMA_KJ,
    REAL,
    UNCLASSIFIED,
    UNIT,
    CurveComponent,
    TraceConfig,
    classify_component,
    curves_csv,
    detect_embracing,
    export_csv,
    find_seeds,
    render_svg,
    residual,
    strip_report,
    trace_component,
    xray,
)
from dirichlet_xray.zeros import SearchRegion, locate_zeros

SVG = "{http://www.w3.org/2000/svg}"


def comp(points, values=None, kind=REAL, exits=(), closed=False):
    pts = np.asarray(points, dtype=complex)
    vals = np.zeros(len(pts), dtype=complex) if values is None else np.asarray(values, dtype=complex)
    return CurveComponent(pts, vals, kind, exits=tuple(exits), closed=closed)


def test_config_validation():
    w = SearchRegion(0, 1, 0, 1)
    with pytest.raises(ValueError):
        TraceConfig(w, grid_step=0.1, arc_step=0.2)
    with pytest.raises(ValueError):
        TraceConfig(w, arc_step=0.02, corrector_tol=0.01)


def test_seeds(zeta):
    cfg = TraceConfig(SearchRegion(-2, 3, 10, 16))
    seeds = find_seeds(zeta, cfg)
    real = [z for z, k in seeds if k == REAL]
    assert min(abs(z - (0.5 + 14.134725j)) for z in real) < 0.3
    for z, k in seeds:
        assert residual(zeta(z), k) <= cfg.corrector_tol
    cfg = TraceConfig(SearchRegion(2, 3, 1, 2))
    for z, k in find_seeds(zeta, cfg):
        assert residual(zeta(z), k) <= cfg.corrector_tol


def test_constant_has_no_seeds():
    one = truncated_general(zeta_spec(), 1)
    assert find_seeds(one, TraceConfig(SearchRegion(-1, 1, 1, 3))) == []


def test_trace_through_first_zero(zeta):
    cfg = TraceConfig(SearchRegion(-2, 3, 10, 16))
    c = trace_component(zeta, 0.5 + 14.13j, REAL, cfg)
    assert np.min(np.abs(c.points - (0.5 + 14.134725141734693j))) <= cfg.arc_step
    assert np.all(residual(c.values, REAL) <= cfg.corrector_tol)


class _ConstantI:
    """f = 2i: no point has Im f = 0 and f' vanishes, so correction must fail."""

    def value_and_derivative(self, s):
        return 2j, 0j


def test_seed_not_on_curve():
    cfg = TraceConfig(SearchRegion(-2, 3, 10, 16))
    with pytest.raises(SeedNotOnCurve):
        trace_component(_ConstantI(), 0.3 + 1j, REAL, cfg)


def test_unit_circle_component(zeta):
    cfg = TraceConfig(SearchRegion(-2, 3, 10, 16))
    seeds = [z for z, k in find_seeds(zeta, cfg) if k == UNIT]
    c = trace_component(zeta, seeds[0], UNIT, cfg)
    assert c.closed or c.exits
    assert np.all(residual(c.values, UNIT) <= cfg.corrector_tol)


def test_classification_rules():
    assert classify_component(comp([0, 1], [-5, 0.999], exits=("left", "right"))) == GAMMA_K0
    assert classify_component(comp([0, 1], [-5, 1.2], exits=("left", "right"))) == UNCLASSIFIED
    assert classify_component(comp([0, 1, 2], [-5, 3, -4], exits=("left", "left"))) == GAMMA_KJ
    assert classify_component(comp([0, 1, 1j], closed=True)) == CLOSED


def test_embracing_geometry():
    square = comp([0, 4, 4 + 4j, 4j], closed=True)
    square.classification = CLOSED
    inner = comp([1 + 2j, 3 + 2j])
    assert detect_embracing([square, inner]) == [(0, 1)]
    other = comp([10 + 1j, 12 + 1j])
    assert detect_embracing([comp([0, 1, 1 + 1j], closed=True), other]) == []


@pytest.fixture(scope="module")
def zeta_xray(zeta):
    cfg = TraceConfig(SearchRegion(-2, 3, 10, 40))
    zs = locate_zeros(zeta, cfg.window)
    return cfg, zs, xray(zeta, cfg, extra_seeds=[z.location for z in zs])


def test_zero_coverage_and_residuals(zeta_xray):
    cfg, zs, comps = zeta_xray
    real = [c for c in comps if c.kind == REAL]
    for z in zs:
        assert min(np.min(np.abs(c.points - z.location)) for c in real) <= 2 * cfg.arc_step
    for c in comps:
        assert np.all(residual(c.values, c.kind) <= cfg.corrector_tol)
        assert np.all([cfg.window.contains(p, pad=1e-9) for p in c.points])


def test_gamma_k0_monotone(zeta_xray):
    _, _, comps = zeta_xray
    k0 = [c for c in comps if c.classification == GAMMA_K0]
    assert k0
    for c in k0:
        re = c.values.real
        if c.points[0].real > c.points[-1].real:
            re = re[::-1]
        assert re.max() < 1
        assert np.all(np.diff(re) > 0)


def test_no_gamma_k0_embraced(zeta_xray):
    _, _, comps = zeta_xray
    for _, j in detect_embracing(comps):
        assert comps[j].classification != GAMMA_K0


def test_step_halving_stability(zeta):
    cfg = TraceConfig(SearchRegion(-2, 3, 12, 16), arc_step=0.04)
    fine = TraceConfig(cfg.window, arc_step=0.02)
    a = trace_component(zeta, 0.5 + 14.134725141734693j, REAL, cfg)
    b = trace_component(zeta, 0.5 + 14.134725141734693j, REAL, fine)
    d_ab = max(np.min(np.abs(b.points - p)) for p in a.points)
    d_ba = max(np.min(np.abs(a.points - p)) for p in b.points)
    assert max(d_ab, d_ba) < cfg.arc_step


def test_dh_pair_on_distinct_components(dh, dh_fixture):
    p = dh_fixture["off_line_pairs"][0]
    t1 = p["t"]
    cfg = TraceConfig(SearchRegion(-8, 8, t1 - 4, t1 + 4))
    right = complex(p["sigma_right"], t1)
    left = complex(p["sigma_left"], t1)
    a = trace_component(dh, right, REAL, cfg)
    b = trace_component(dh, left, REAL, cfg)
    assert np.min(np.abs(a.points - left)) > 0.05
    assert a.classification == GAMMA_K0
    assert b.classification == GAMMA_KJ
    comps = xray(dh, cfg, kinds=(REAL,), extra_seeds=[right, left])
    for _, j in detect_embracing(comps):
        assert comps[j].classification != GAMMA_K0


def test_strip_reports(zeta):
    rep = strip_report(zeta, 0, 100, 0.0)
    assert 6 <= rep.mean_spacing <= 12
    assert len(rep.zero_counts) == len(rep.intercepts) - 1
    assert rep.table().startswith("k,t_lower,t_upper,spacing,zero_count")
    empty = strip_report(zeta, 50, 50)
    assert empty.intercepts == [] and empty.zero_counts == []
    with pytest.raises(ValueError):
        strip_report(zeta, 0, 10, 9.0)


def test_svg_output(tmp_path, zeta_xray):
    p = render_svg([], [], tmp_path / "empty.svg", SearchRegion(-1, 1, -1, 1))
    root = ET.parse(p).getroot()
    assert root.tag == SVG + "svg"
    assert len(root.findall(f".//{SVG}line")) >= 2
    assert not root.findall(f".//{SVG}polyline")
    c = comp(np.linspace(0, 1, 100) + 1j)
    root = ET.parse(render_svg([c], [0.5 + 1j], tmp_path / "one.svg")).getroot()
    lines = root.findall(f".//{SVG}polyline")
    assert len(lines) == 1 and len(lines[0].get("points").split()) == 100
    assert len(root.findall(f".//{SVG}circle")) == 1
    cfg, zs, comps = zeta_xray
    a = render_svg(comps, [z.location for z in zs], tmp_path / "a.svg", cfg.window).read_bytes()
    b = render_svg(comps, [z.location for z in zs], tmp_path / "b.svg", cfg.window).read_bytes()
    assert a == b
    dashed = [e for e in ET.fromstring(a).iter() if e.get("stroke-dasharray") and UNIT in (e.get("class") or "")]
    assert dashed


def test_svg_y_axis_points_up(tmp_path):
    c = comp([0.5 + 1j, 0.5 + 2j])
    root = ET.parse(render_svg([c], [], tmp_path / "y.svg", SearchRegion(0, 1, 0, 3))).getroot()
    pts = root.find(f".//{SVG}polyline").get("points").split()
    y = [float(p.split(",")[1]) for p in pts]
    assert y[0] > y[1]


def test_curve_csv(tmp_path):
    c = comp([0.1 + 1j, 0.2 + 1j], [0.5, 0.6])
    text = curves_csv([c])
    assert text.splitlines()[0] == ",".join(CURVE_CSV_COLUMNS)
    assert len(text.splitlines()) == 3
    assert export_csv([c], tmp_path / "c.csv").read_text() == text
