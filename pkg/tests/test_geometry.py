import math

import numpy as np
import pytest

from gptcorners.errors import GeometryError
from gptcorners.geometry import (
    BUILTIN_NAMES,
    builtin_curve,
    cap_constants,
    curve_from_spec,
    eval_boundary,
    local_param,
    measured_external_angle,
    mirror_curve,
    polygon_curve,
    reflect_curve,
    winding_number,
)


def test_unit_circle_sample():
    s = eval_boundary(builtin_curve("disk", [1.0]), 0.25)
    assert abs(s.position - 1j) < 1e-15
    assert abs(s.outward_normal - 1j) < 1e-15
    assert s.speed == pytest.approx(2 * np.pi)
    assert s.curvature == pytest.approx(1.0)


def test_ellipse_vertex_curvature():
    s = eval_boundary(builtin_curve("ellipse", [2.0, 1.0]), 0.0)
    assert abs(s.position - 2) < 1e-15
    assert s.curvature == pytest.approx(2.0)


def test_normal_is_tangent_rotated():
    c = builtin_curve("cap_shaped")
    for t in (0.05, 0.3, 0.7):
        s = eval_boundary(c, t)
        assert abs(s.outward_normal - s.unit_tangent * -1j) < 1e-15
        assert abs(abs(s.unit_tangent) - 1) < 1e-14


def test_cap_straight_segment_has_zero_curvature(cap):
    _, _, _, t1, t2 = cap_constants()
    for t in np.linspace(t1, t2, 7)[1:-1]:
        assert abs(eval_boundary(cap, t).curvature) < 1e-12


def test_corner_sample_is_one_sided(cap):
    _, _, _, t1, _ = cap_constants()
    assert eval_boundary(cap, t1).one_sided
    assert not eval_boundary(cap, 0.3).one_sided


def test_cap_corners(cap):
    _, _, _, t1, t2 = cap_constants()
    assert cap.corner_params == pytest.approx((0.0, t1, t2))
    for tc, beta in zip(cap.corner_params, cap.external_angles):
        assert measured_external_angle(cap, tc) == pytest.approx(beta, abs=1e-12)


def test_triangle_external_angles_exact(triangle):
    assert triangle.external_angles == (-2 / 3,) * 3
    assert triangle.corner_params == pytest.approx((0.0, 1 / 3, 2 / 3))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_closed_and_positive(name):
    params = {"polynomial_image": [0, 0, 1, 0, 0.1, 0], "polygon_reflection": [1, 0, 0, 1, -1, 0, 0, -1]}.get(name, [])
    c = builtin_curve(name, params)
    z0 = c.pieces[0](np.array([0.0]))[0][0]
    z1 = c.pieces[-1](np.array([1.0]))[0][0]
    assert abs(z0 - z1) < 1e-14
    assert winding_number(c) == 1
    assert winding_number(reflect_curve(c)) == 1


def test_unknown_builtin():
    with pytest.raises(GeometryError):
        builtin_curve("heart")


def test_non_univalent_polynomial_rejected():
    # z + z^2 has a critical point on the circle; 1.2 z^2 folds the image
    with pytest.raises(GeometryError):
        builtin_curve("polynomial_image", [0, 0, 1, 0, 1.2, 0])


def test_origin_excluding_curve_rejected():
    with pytest.raises(GeometryError):
        polygon_curve(np.array([2, 3, 3 + 1j, 2 + 1j]))


def test_reflect_circle():
    r = reflect_curve(builtin_curve("disk", [2.0]))
    t = np.linspace(0, 1, 33)
    assert np.allclose(np.abs(r.position(t)), 0.5, atol=1e-15)
    u = reflect_curve(builtin_curve("disk", [1.0]))
    assert np.allclose(np.abs(u.position(t)), 1.0, atol=1e-15)


@pytest.mark.parametrize("name", ["ellipse", "cap_shaped", "reflected_equilateral_triangle"])
def test_double_reflection_is_identity(name):
    c = builtin_curve(name)
    rr = reflect_curve(reflect_curve(c))
    t = np.linspace(0, 1, 101)[:-1]
    assert np.max(np.abs(rr.position(t) - c.position(t))) < 1e-12
    assert rr.corner_params == pytest.approx(c.corner_params)
    assert rr.external_angles == pytest.approx(c.external_angles)


def test_reflection_flips_angle_sign(cap):
    r = reflect_curve(cap)
    # t -> 1 - t reorders the corners
    for tc, beta in zip(cap.corner_params, cap.external_angles):
        j = int(np.argmin([min(abs((1 - tc) % 1 - u), 1 - abs((1 - tc) % 1 - u)) for u in r.corner_params]))
        assert r.external_angles[j] == pytest.approx(-beta)


def test_mirror_conjugates(cap):
    m = mirror_curve(cap)
    t = np.linspace(0.01, 0.99, 50)
    # mirrored curve is traversed in reverse
    assert np.allclose(m.position(1 - t), np.conj(cap.position(t)), atol=1e-14)


@pytest.mark.parametrize("name", ["ellipse", "cap_shaped"])
def test_derivatives_match_finite_differences(name):
    c = builtin_curve(name)
    h = 1e-6
    for t in (0.07, 0.2, 0.61, 0.83):
        z, dz, ddz = c.evaluate(np.array([t - h, t, t + h]))
        fd1 = (z[2] - z[0]) / (2 * h)
        assert abs(fd1 - dz[1]) < 1e-6 * abs(dz[1])
        fd2 = (dz[2] - dz[0]) / (2 * h)
        assert abs(fd2 - ddz[1]) < 1e-6 * max(abs(ddz[1]), abs(dz[1]))


def test_local_param_zero(cap):
    for l in range(3):
        assert local_param(cap, l, 0.0)[0] == 0


def test_local_param_on_segment(cap):
    _, _, c, t1, _ = cap_constants()
    s = np.array([1e-14, 1e-9, 1e-4])
    d = local_param(cap, 1, s)
    assert np.allclose(d.imag, 0.0, atol=1e-300)
    assert np.allclose(d.real, 2 * np.pi * c * s, rtol=1e-13)


def test_local_param_relative_accuracy_at_t2(cap):
    _, _, _, _, t2 = cap_constants()
    s = 1e-12
    d = complex(local_param(cap, 2, np.array([s]))[0])
    naive = complex(cap.position(t2 + s)[0] - cap.position(t2)[0])
    # z(t2 + s) - z(t2) = s z'(t2+) + O(s^2) with O(s^2) far below 1e-10 relative
    v = complex(cap.evaluate(np.array([t2]))[1][0])
    assert abs(d - s * v) < 1e-10 * abs(s * v)
    assert abs(naive - s * v) > 1e-6 * abs(s * v)


def test_curve_from_spec_builtin_and_pieces():
    c = curve_from_spec({"curve": "ellipse", "params": [3, 1]})
    assert abs(c.position(0.0)[0] - 3) < 1e-15
    sq = curve_from_spec({
        "pieces": [
            {"kind": "line", "coeffs": [1, -1, 1, 1], "t_range": [0, 0.25]},
            {"kind": "line", "coeffs": [1, 1, -1, 1], "t_range": [0.25, 0.5]},
            {"kind": "line", "coeffs": [-1, 1, -1, -1], "t_range": [0.5, 0.75]},
            {"kind": "line", "coeffs": [-1, -1, 1, -1], "t_range": [0.75, 1]},
        ],
        "corners": [{"t": x, "beta": 0.5} for x in (0, 0.25, 0.5, 0.75)],
    })
    assert sq.n_corners == 4
    assert measured_external_angle(sq, 0.25) == pytest.approx(0.5)


def test_curve_from_spec_rejects_garbage():
    with pytest.raises(GeometryError):
        curve_from_spec([1, 2])
    with pytest.raises(GeometryError):
        curve_from_spec({"foo": 1})
    with pytest.raises(GeometryError):
        curve_from_spec({"pieces": [{"kind": "spline", "coeffs": [], "t_range": [0, 1]}]})


def test_bad_external_angle_rejected():
    sq = {
        "pieces": [
            {"kind": "line", "coeffs": [1, -1, 1, 1], "t_range": [0, 0.5]},
            {"kind": "line", "coeffs": [1, 1, 1, -1], "t_range": [0.5, 1]},
        ],
    }
    with pytest.raises(GeometryError):
        curve_from_spec(sq)


def test_cap_constants_closed_form():
    a, b, c, t1, t2 = cap_constants()
    assert a == pytest.approx(0.5 - math.asin(math.sinh(0.5)) / (2 * math.pi))
    assert t1 == pytest.approx(1 / (8 * c))
