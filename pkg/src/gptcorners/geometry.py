"""Piecewise-analytic closed boundary curves with corners.

A curve is parametrized over ``t in [0, 1)`` by an ordered list of analytic
pieces.  Each piece evaluates ``(z, z', z'')`` as complex numbers for global
parameter values inside its own subinterval.  Corners sit at piece
breakpoints and carry an explicit external angle ``beta`` (signed tangent turn
divided by pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_legendre

from .errors import GeometryError

PieceFunc = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

_GL_X, _GL_W = roots_legendre(32)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class Piece:
    """One analytic arc on ``[t0, t1]``.

    ``local`` optionally overrides the displacement ``z(t_end + s) - z(t_end)``
    near an endpoint; it is called as ``local(s, at_start)``.  Pieces whose
    velocity is singular at an endpoint (Schwarz-Christoffel traces) need it.
    """

    t0: float
    t1: float
    func: PieceFunc
    local: Callable[[np.ndarray, bool], np.ndarray] | None = None

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CurveSample:
    position: complex
    unit_tangent: complex
    outward_normal: complex
    speed: float
    curvature: float
    one_sided: bool = False


@dataclass(frozen=True)
class BoundaryCurve:
    """Closed, positively oriented, piecewise-analytic Jordan curve."""

    pieces: tuple[Piece, ...]
    corner_params: tuple[float, ...] = ()
    external_angles: tuple[float, ...] = ()
    name: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "corner_params", tuple(float(t) for t in self.corner_params))
        object.__setattr__(self, "external_angles", tuple(float(b) for b in self.external_angles))
        if self.validate:
            check_curve(self)

    @property
    def breaks(self) -> np.ndarray:
        return np.array([p.t0 for p in self.pieces] + [self.pieces[-1].t1])

    @property
    def n_corners(self) -> int:
        return len(self.corner_params)

    def piece_index(self, t, side="right"):
        t = np.asarray(t, dtype=float)
        b = self.breaks
        if side == "right":
            idx = np.searchsorted(b, t, side="right") - 1
        else:
            idx = np.searchsorted(b, t, side="left") - 1
            idx = np.where(idx < 0, len(self.pieces) - 1, idx)
        return np.clip(idx, 0, len(self.pieces) - 1)

    def evaluate(self, t, side="right"):
        """Return ``(z, dz, ddz)`` at parameters ``t`` (wrapped into [0, 1))."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tw = np.mod(t, 1.0)
        if side == "left":
            tw = np.where(tw == 0.0, 1.0, tw)
        idx = self.piece_index(tw, side=side)
        z = np.empty(t.shape, complex)
        dz = np.empty(t.shape, complex)
        ddz = np.empty(t.shape, complex)
        for i in np.unique(idx):
            m = idx == i
            z[m], dz[m], ddz[m] = self.pieces[i](tw[m])
        return z, dz, ddz

    def position(self, t):
        return self.evaluate(t)[0]

    def corner_position(self, l: int) -> complex:
        return complex(self.position(self.corner_params[l])[0])

    def diameter_bound(self, n=2048) -> float:
        z = self.position(np.arange(n) / n)
        return float(np.max(np.abs(z)))


def curvature(dz, ddz):
    """Signed curvature ``(x'y'' - x''y') / |alpha'|^3``."""
    return np.imag(np.conj(dz) * ddz) / np.abs(dz) ** 3


def eval_boundary(curve: BoundaryCurve, t: float) -> CurveSample:
    """Evaluate geometry at ``t``; at a corner the limit from above is returned."""
    tw = float(t) % 1.0
    one_sided = any(abs(tw - tc) < 1e-15 for tc in curve.corner_params)
    z, dz, ddz = curve.evaluate(tw)
    z, dz, ddz = z[0], dz[0], ddz[0]
    speed = abs(dz)
    tau = dz / speed
    return CurveSample(
        position=complex(z),
        unit_tangent=complex(tau),
        outward_normal=complex(-1j * tau),
        speed=float(speed),
        curvature=float(curvature(dz, ddz)),
        one_sided=one_sided,
    )


# ---------------------------------------------------------------------------
# validation


def winding_number(curve: BoundaryCurve, n_per_piece=512, about=0.0) -> int:
    pts = []
    for p in curve.pieces:
        t = np.linspace(p.t0, p.t1, n_per_piece + 1)[:-1]
        pts.append(p(t)[0])
    z = np.concatenate(pts) - about
    dang = np.angle(np.roll(z, -1) / z)
    return int(round(dang.sum() / (2 * np.pi)))


def _one_sided_velocities(curve: BoundaryCurve, t: float):
    i_after = int(curve.piece_index(t % 1.0))
    i_before = (i_after - 1) % len(curve.pieces)
    pa, pb = curve.pieces[i_after], curve.pieces[i_before]
    va = pa(np.array([pa.t0]))[1][0]
    vb = pb(np.array([pb.t1]))[1][0]
    return vb, va


def measured_external_angle(curve: BoundaryCurve, t: float) -> float:
    """Signed tangent turn at ``t`` (divided by pi) from one-sided velocities."""
    vb, va = _one_sided_velocities(curve, t)
    return float(np.angle(va / vb) / np.pi)


def check_curve(curve: BoundaryCurve, tol=1e-13):
    pieces = curve.pieces
    if not pieces:
        raise GeometryError("curve has no pieces")
    if abs(pieces[0].t0) > 0 or abs(pieces[-1].t1 - 1.0) > 0:
        raise GeometryError("pieces must cover [0, 1]")
    scale = max(1.0, float(np.max(np.abs(pieces[0](np.array([pieces[0].t0]))[0]))))
    for a, b in zip(pieces, pieces[1:] + pieces[:1]):
        if b is not pieces[0] and a.t1 != b.t0:
            raise GeometryError("pieces are not contiguous")
        za = a(np.array([a.t1]))[0][0]
        zb = b(np.array([b.t0]))[0][0]
        if abs(za - zb) > tol * scale * 10:
            raise GeometryError(f"curve is not closed/continuous at t={a.t1}: gap {abs(za - zb):.3e}")
    if len(curve.corner_params) != len(curve.external_angles):
        raise GeometryError("one external angle is required per corner")
    bset = set(p.t0 for p in pieces)
    for tc, beta in zip(curve.corner_params, curve.external_angles):
        if tc not in bset:
            raise GeometryError(f"corner parameter {tc} is not a piece breakpoint")
        if not -1.0 < beta < 1.0:
            raise GeometryError(f"external angle {beta} outside (-1, 1)")
    for p in pieces:
        t = np.linspace(p.t0, p.t1, 257)
        if p.local is not None:
            t = t[1:-1]
        if np.min(np.abs(p(t)[1])) == 0.0:
            raise GeometryError("velocity vanishes on a piece")
    if winding_number(curve) != 1:
        raise GeometryError("curve must wind once counterclockwise about the origin")


# ---------------------------------------------------------------------------
# local parametrization near corners


def local_param(curve: BoundaryCurve, l: int, s):
    """Cancellation-free ``z(t_l + s) - z(t_l)`` for small signed offsets ``s``.

    The displacement is the integral of the analytic velocity over
    ``[t_l, t_l + s]``, so relative accuracy holds for arbitrarily small ``s``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    tl = curve.corner_params[l]
    i_after = int(curve.piece_index(tl))
    i_before = (i_after - 1) % len(curve.pieces)
    out = np.zeros(s.shape, complex)
    for sign, ip in ((1, i_after), (-1, i_before)):
        m = (s > 0) if sign > 0 else (s < 0)
        if not m.any():
            continue
        p = curve.pieces[ip]
        ss = s[m]
        if p.local is not None:
            out[m] = p.local(ss, sign > 0)
            continue
        base = p.t0 if sign > 0 else p.t1
        tq = base + np.outer(ss, _GL_X)
        v = p(tq.ravel())[1].reshape(tq.shape)
        out[m] = ss * (v @ _GL_W)
    return out


# ---------------------------------------------------------------------------
# transformations


def _reflect_piece(p: Piece) -> Piece:
    f = p.func

    def func(t):
        z, dz, ddz = f(1.0 - t)
        w = 1.0 / z
        return w, dz * w * w, -ddz * w * w + 2.0 * dz * dz * w ** 3

    local = None
    if p.local is not None:
        pl = p.local

        def local(s, at_start):
            # end of original piece <-> start of reflected piece
            d = pl(-s, not at_start)
            z0 = f(np.array([p.t1 if at_start else p.t0]))[0][0]
            return -d / (z0 * (z0 + d))

    return Piece(1.0 - p.t1, 1.0 - p.t0, func, local)


def reflect_curve(curve: BoundaryCurve) -> BoundaryCurve:
    """Image of the curve under ``z -> 1/z``, re-oriented counterclockwise.

    Inversion maps interior angle ``theta`` to ``2 pi - theta`` at every
    corner, so external angles change sign.
    """
    z = curve.position(np.linspace(0, 1, 1025))
    if np.min(np.abs(z)) == 0.0:
        raise GeometryError("curve passes through the origin")
    pieces = [_reflect_piece(p) for p in reversed(curve.pieces)]
    corners = sorted(((1.0 - tc) % 1.0, -b) for tc, b in zip(curve.corner_params, curve.external_angles))
    return BoundaryCurve(
        tuple(pieces),
        tuple(c[0] for c in corners),
        tuple(c[1] for c in corners),
        name=f"reflected({curve.name})" if not curve.name.startswith("reflected(") else curve.name[10:-1],
    )


def _mirror_piece(p: Piece) -> Piece:
    f = p.func

    def func(t):
        z, dz, ddz = f(1.0 - t)
        return np.conj(z), -np.conj(dz), np.conj(ddz)

    local = None
    if p.local is not None:
        pl = p.local

        def local(s, at_start):
            return np.conj(pl(-s, not at_start))

    return Piece(1.0 - p.t1, 1.0 - p.t0, func, local)


def mirror_curve(curve: BoundaryCurve) -> BoundaryCurve:
    """Reflection across the real axis (complex conjugation), re-oriented."""
    pieces = [_mirror_piece(p) for p in reversed(curve.pieces)]
    corners = sorted(((1.0 - tc) % 1.0, b) for tc, b in zip(curve.corner_params, curve.external_angles))
    return BoundaryCurve(
        tuple(pieces), tuple(c[0] for c in corners), tuple(c[1] for c in corners), name=f"mirror({curve.name})"
    )


# ---------------------------------------------------------------------------
# piece factories


def line_piece(a: complex, b: complex, t0: float, t1: float) -> Piece:
    a, b = complex(a), complex(b)
    v = (b - a) / (t1 - t0)

    def func(t):
        return a + v * (t - t0), np.full(t.shape, v), np.zeros(t.shape, complex)

    def local(s, at_start):
        return v * s

    return Piece(t0, t1, func, local)


def arc_piece(center: complex, radius: float, ang0: float, ang1: float, t0: float, t1: float) -> Piece:
    w = (ang1 - ang0) / (t1 - t0)

    def func(t):
        e = np.exp(1j * (ang0 + w * (t - t0)))
        return center + radius * e, 1j * w * radius * e, -(w ** 2) * radius * e

    def local(s, at_start):
        a = ang0 if at_start else ang1
        # r(e^{i(a+ws)} - e^{ia}) = 2ir sin(ws/2) e^{i(a+ws/2)}
        return 2j * radius * np.sin(w * s / 2) * np.exp(1j * (a + w * s / 2))

    return Piece(t0, t1, func, local)


def polynomial_piece(coeffs: Sequence[complex], t0: float, t1: float) -> Piece:
    """``z = sum c_k u^k`` with ``u = (t - t0) / (t1 - t0)``."""
    c = np.asarray(coeffs, complex)
    p = np.polynomial.Polynomial(c)
    dp, ddp = p.deriv(1), p.deriv(2)
    h = t1 - t0

    def func(t):
        u = (t - t0) / h
        return p(u), dp(u) / h, ddp(u) / h ** 2

    return Piece(t0, t1, func)


def closed_polynomial_curve(coeffs: Sequence[complex], name="polynomial_image") -> BoundaryCurve:
    """``{P(e^{2 pi i t})}`` for a complex polynomial ``P`` (coefficients from degree 0)."""
    c = np.asarray(coeffs, complex)
    p = np.polynomial.Polynomial(c)
    dp, ddp = p.deriv(1), p.deriv(2)
    tp = 2j * np.pi

    def func(t):
        w = np.exp(tp * t)
        d1 = dp(w)
        return p(w), d1 * tp * w, ddp(w) * (tp * w) ** 2 + d1 * tp * tp * w

    return BoundaryCurve((Piece(0.0, 1.0, func),), name=name)


def polygon_curve(vertices: Sequence[complex], name="polygon") -> BoundaryCurve:
    """Straight-edged polygon, one parameter interval of length 1/n per edge."""
    v = np.asarray(vertices, complex)
    n = len(v)
    if n < 3:
        raise GeometryError("a polygon needs at least three vertices")
    pieces = [line_piece(v[j], v[(j + 1) % n], j / n, (j + 1) / n) for j in range(n)]
    pieces[-1] = line_piece(v[-1], v[0], (n - 1) / n, 1.0)
    betas = polygon_turns(v)
    if abs(betas.sum() - 2.0) > 1e-9:
        raise GeometryError("polygon is not simple and counterclockwise")
    return BoundaryCurve(tuple(pieces), tuple(j / n for j in range(n)), tuple(betas), name=name)


def polygon_turns(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, complex)
    e_in = v - np.roll(v, 1)
    e_out = np.roll(v, -1) - v
    return np.angle(e_out / e_in) / np.pi


# ---------------------------------------------------------------------------
# self-intersection


def polyline_self_intersects(z: np.ndarray, block=256) -> bool:
    """Pairwise proper-intersection test for the closed polyline through ``z``."""
    z = np.asarray(z, complex)
    n = len(z)
    a = z
    b = np.roll(z, -1)
    idx = np.arange(n)

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for s in range(0, n, block):
        ia = idx[s : s + block, None]
        a1, b1 = a[s : s + block, None], b[s : s + block, None]
        d1 = cross(b1 - a1, a[None, :] - a1)
        d2 = cross(b1 - a1, b[None, :] - a1)
        d3 = cross(b[None, :] - a[None, :], a1 - a[None, :])
        d4 = cross(b[None, :] - a[None, :], b1 - a[None, :])
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        adjacent = (np.abs(ia - idx[None, :]) <= 1) | (np.abs(ia - idx[None, :]) == n - 1)
        if np.any(hit & ~adjacent):
            return True
    return False


# ---------------------------------------------------------------------------
# built-in domains


def cap_constants():
    """Closed-form constants ``a, b, c, t1, t2`` of the cap-shaped domain."""
    a = 0.5 - math.asin(math.sinh(0.5)) / (2 * math.pi)
    s2 = math.sqrt(2.0)
    asn = math.asin(s2 / 2 * math.cos(2 * math.pi * a))
    b = a - 1 / (4 * math.pi) - s2 / 8 + s2 / (2 * math.pi) * asn
    c = 9 / 8 - b
    t1 = 1 / (8 * c)
    t2 = t1 + (a - b) / c
    return a, b, c, t1, t2


def cap_shaped_curve() -> BoundaryCurve:
    a, b, c, t1, t2 = cap_constants()
    s2 = math.sqrt(2.0)
    w1 = 4 * math.pi * c
    w3 = 2 * math.pi * c
    x_right = -s2 * math.asin(s2 / 2 * math.cos(2 * math.pi * a))
    x_left = -s2 * math.pi / 4

    def f1(t):
        th = w1 * t
        z = (-0.5 * np.sin(th) + x_left) + 1j * (-0.5 + 0.5 * np.cos(th))
        dz = w1 * (-0.5 * np.cos(th) - 0.5j * np.sin(th))
        ddz = w1 ** 2 * (0.5 * np.sin(th) - 0.5j * np.cos(th))
        return z, dz, ddz

    def local1(s, at_start):
        th0 = 0.0 if at_start else w1 * t1
        h = w1 * s
        # -1/2 (sin(th0+h) - sin th0) , 1/2 (cos(th0+h) - cos th0)
        ds = 2 * np.cos(th0 + h / 2) * np.sin(h / 2)
        dc = -2 * np.sin(th0 + h / 2) * np.sin(h / 2)
        return -0.5 * ds + 0.5j * dc

    def f2(t):
        z = w3 * (t - t2) + x_right - 0.5j
        return z, np.full(t.shape, w3 + 0j), np.zeros(t.shape, complex)

    def local2(s, at_start):
        return w3 * s + 0j

    def f3(t):
        th = w3 * (t - t2) + 2 * np.pi * a
        sn, cs = np.sin(th), np.cos(th)
        g = 1 - cs ** 2 / 2
        q = 1 + sn ** 2
        x = -s2 * np.arcsin(s2 / 2 * cs)
        y = -np.arcsinh(sn)
        dx = sn / np.sqrt(g)
        dy = -cs / np.sqrt(q)
        ddx = cs / np.sqrt(g) - sn ** 2 * cs / (2 * g ** 1.5)
        ddy = sn / np.sqrt(q) + sn * cs ** 2 / q ** 1.5
        return x + 1j * y, w3 * (dx + 1j * dy), w3 ** 2 * (ddx + 1j * ddy)

    pieces = (Piece(0.0, t1, f1, local1), Piece(t1, t2, f2, local2), Piece(t2, 1.0, f3))
    provisional = BoundaryCurve(pieces, validate=False)
    corners = (0.0, t1, t2)
    betas = tuple(measured_external_angle(provisional, tc) for tc in corners)
    return BoundaryCurve(pieces, corners, betas, name="cap_shaped")


def equilateral_triangle_vertices(capacity=1.0) -> np.ndarray:
    """Vertices of the triangle whose interior map has pre-vertices at cube roots of unity."""
    from scipy.special import beta as beta_fn

    r = beta_fn(1 / 3, 1 / 3) / 3 / capacity
    return r * np.exp(2j * np.pi * np.arange(3) / 3)


def disk_curve(r=1.0) -> BoundaryCurve:
    r = float(r)
    tp = 2j * np.pi

    def f(t):
        e = np.exp(tp * t)
        return r * e, r * tp * e, r * tp * tp * e

    return BoundaryCurve((Piece(0.0, 1.0, f),), name=f"disk(r={r:g})")


def ellipse_curve(a=2.0, b=1.0) -> BoundaryCurve:
    a, b = float(a), float(b)
    w = 2 * np.pi

    def f(t):
        c, s = np.cos(w * t), np.sin(w * t)
        return a * c + 1j * b * s, w * (-a * s + 1j * b * c), -(w ** 2) * (a * c + 1j * b * s)

    return BoundaryCurve((Piece(0.0, 1.0, f),), name=f"ellipse({a:g},{b:g})")


def polygon_reflection_curve(vertices) -> BoundaryCurve:
    poly = polygon_curve(vertices)
    out = reflect_curve(poly)
    return BoundaryCurve(out.pieces, out.corner_params, out.external_angles, name="polygon_reflection")


BUILTIN_NAMES = (
    "disk",
    "ellipse",
    "reflected_equilateral_triangle",
    "cap_shaped",
    "polynomial_image",
    "polygon_reflection",
)


def _pairs_to_complex(params):
    if len(params) % 2:
        raise GeometryError("expected (re, im) pairs")
    p = np.asarray(params, float)
    return p[0::2] + 1j * p[1::2]


def builtin_curve(name: str, params: Sequence[float] = ()) -> BoundaryCurve:
    """Construct one of the named domains.

    ``polynomial_image`` takes (re, im) coefficient pairs starting at degree 0,
    ``polygon_reflection`` takes (x, y) vertex pairs in counterclockwise order.
    """
    params = list(params or [])
    if name == "disk":
        return disk_curve(*(params or [1.0]))
    if name == "ellipse":
        return ellipse_curve(*(params or [2.0, 1.0]))
    if name == "reflected_equilateral_triangle":
        c = params[0] if params else 1.0
        out = reflect_curve(polygon_curve(equilateral_triangle_vertices(c)))
        return BoundaryCurve(out.pieces, out.corner_params, (-2 / 3,) * 3, name=name)
    if name == "cap_shaped":
        return cap_shaped_curve()
    if name == "polynomial_image":
        coeffs = _pairs_to_complex(params)
        curve = closed_polynomial_curve(coeffs)
        t = np.arange(2048) / 2048
        if polyline_self_intersects(curve.position(t)):
            raise GeometryError("polynomial is not univalent on the closed disk")
        return curve
    if name == "polygon_reflection":
        return polygon_reflection_curve(_pairs_to_complex(params))
    raise GeometryError(f"unknown curve {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def curve_from_spec(spec: dict) -> BoundaryCurve:
    """Build a curve from the domain-spec JSON object.

    Either ``{"curve": name, "params": [...]}`` or a piecewise description
    ``{"pieces": [{"kind", "coeffs", "t_range"}], "corners": [{"t", "beta"}]}``
    with kinds ``line`` (x0, y0, x1, y1), ``arc`` (cx, cy, r, ang0, ang1) and
    ``polynomial`` ((re, im) pairs in the local parameter ``u in [0, 1]``).
    """
    if not isinstance(spec, dict):
        raise GeometryError("domain spec must be a JSON object")
    if "curve" in spec:
        return builtin_curve(spec["curve"], spec.get("params", []))
    if "pieces" not in spec:
        raise GeometryError("domain spec needs 'curve' or 'pieces'")
    pieces = []
    for item in spec["pieces"]:
        t0, t1 = map(float, item["t_range"])
        c = list(map(float, item["coeffs"]))
        kind = item["kind"]
        if kind == "line":
            pieces.append(line_piece(c[0] + 1j * c[1], c[2] + 1j * c[3], t0, t1))
        elif kind == "arc":
            pieces.append(arc_piece(c[0] + 1j * c[1], c[2], c[3], c[4], t0, t1))
        elif kind == "polynomial":
            pieces.append(polynomial_piece(_pairs_to_complex(c), t0, t1))
        else:
            raise GeometryError(f"unknown piece kind {kind!r}")
    corners = spec.get("corners", [])
    return BoundaryCurve(
        tuple(pieces),
        tuple(float(c["t"]) for c in corners),
        tuple(float(c["beta"]) for c in corners),
        name=spec.get("name", "custom"),
    )
