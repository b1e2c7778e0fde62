"""Schwarz-Christoffel ground truth for polygons and polygonal approximation of curves.

For a polygon ``P`` with external angles ``beta_j`` and pre-vertices ``a_j``
the interior map ``S`` of the unit disk satisfies
``C S'(w) = pi(w) = prod_j (1 - w / a_j)^(-beta_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi, roots_legendre

from .coeffs import GeometricFactors, sigma_from_b
from .errors import GeometryError
from .geometry import BoundaryCurve, Piece, polygon_turns, polyline_self_intersects

GJ_ORDER = 64
_GL_X, _GL_W = roots_legendre(GJ_ORDER)


def polygon_external_angles(vertices) -> np.ndarray:
    v = np.asarray(vertices, complex)
    if len(v) < 3:
        raise GeometryError("a polygon needs at least three vertices")
    beta = polygon_turns(v)
    if abs(beta.sum() - 2.0) > 1e-9:
        raise GeometryError("vertices do not form a simple counterclockwise polygon")
    return beta


@dataclass(frozen=True)
class Polygon:
    vertices: np.ndarray
    external_angles: np.ndarray
    pre_vertices: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, complex)
        b = np.asarray(self.external_angles, float)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "external_angles", b)
        if len(v) != len(b):
            raise GeometryError("one external angle per vertex is required")
        if abs(b.sum() - 2.0) > 1e-12:
            raise GeometryError(f"external angles sum to {b.sum():.15g}, not 2")
        if np.any(np.abs(b) >= 1):
            raise GeometryError("external angles must lie in (-1, 1)")
        if polyline_self_intersects(v):
            raise GeometryError("polygon is not simple")
        w = np.angle(np.roll(v, -1) / v).sum() / (2 * np.pi)
        if round(w) != 1:
            raise GeometryError("polygon must contain the origin")
        if self.pre_vertices is not None:
            a = np.asarray(self.pre_vertices, complex)
            object.__setattr__(self, "pre_vertices", a)
            if len(a) != len(v) or np.max(np.abs(np.abs(a) - 1.0)) > 1e-12:
                raise GeometryError("pre-vertices must be unit-modulus, one per vertex")
            th = np.mod(np.angle(a / a[0]), 2 * np.pi)
            th[0] = 0.0
            if np.any(np.diff(th) <= 0):
                raise GeometryError("pre-vertices must be distinct and counterclockwise ordered")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @classmethod
    def from_vertices(cls, vertices, pre_vertices=None) -> "Polygon":
        v = np.asarray(vertices, complex)
        if pre_vertices is None:
            pre_vertices = symmetric_pre_vertices(v)
        return cls(v, polygon_external_angles(v), pre_vertices)


def symmetric_pre_vertices(vertices) -> np.ndarray | None:
    """Pre-vertices of a regular polygon centered at the origin, ``None`` otherwise."""
    v = np.asarray(vertices, complex)
    n = len(v)
    r = np.abs(v)
    ratios = v[1:] / v[:-1]
    if np.ptp(r) > 1e-12 * r.max() or np.max(np.abs(ratios - np.exp(2j * np.pi / n))) > 1e-12:
        return None
    return v / r


def regular_polygon(n: int, capacity: float = 1.0, rotation: float = 0.0) -> Polygon:
    """Regular ``n``-gon whose interior map has pre-vertices ``e^{i(rotation + 2 pi j/n)}``."""
    if n < 3:
        raise GeometryError("n must be at least 3")
    a = np.exp(1j * (rotation + 2 * np.pi * np.arange(n) / n))
    radius = beta_fn(1 / n, 1 - 2 / n) / n / capacity
    return Polygon(radius * a, np.full(n, 2.0 / n), a)


def _require_pre(polygon: Polygon) -> np.ndarray:
    if polygon.pre_vertices is None:
        raise GeometryError("pre-vertices are required (the parameter problem is not solved here)")
    return polygon.pre_vertices


def sigma_from_prevertices(polygon: Polygon, K: int) -> GeometricFactors:
    a = _require_pre(polygon)
    k = np.arange(1, K + 1)[:, None]
    s = (polygon.external_angles[None, :] * a[None, :] ** (-k)).sum(axis=1)
    return GeometricFactors(s, "from-SC-oracle")


def sc_taylor(polygon: Polygon, K: int):
    """``(b_1..b_{K+1}, sigma_1..sigma_K)`` from the Taylor recurrence of ``pi``.

    With ``p_k = pi^{(k)}(0)/k!`` the logarithmic derivative gives
    ``k p_k = sum_{j<k} p_j st_{k-j}``, ``st_k = sum_j beta_j a_j^{-k}``, and
    ``b_{k+1} = p_k / (k+1)``.
    """
    st = sigma_from_prevertices(polygon, K).sigma
    p = np.zeros(K + 1, complex)
    p[0] = 1.0
    for k in range(1, K + 1):
        p[k] = (st[k - 1] + np.dot(p[1:k], st[k - 2 :: -1][: k - 1])) / k
    b = p / np.arange(1, K + 2)
    return b, sigma_from_b(b, K, "from-SC-oracle")


# ------------------------------------------------------------- SC integral


def sc_pi(polygon: Polygon, w, skip: int | None = None):
    """``prod_j (1 - w/a_j)^(-beta_j)``, optionally omitting factor ``skip``."""
    a = _require_pre(polygon)
    w = np.asarray(w, complex)
    out = np.ones(w.shape, complex)
    for j, (aj, bj) in enumerate(zip(a, polygon.external_angles)):
        if j != skip:
            out *= np.exp(-bj * np.log(1.0 - w / aj))
    return out


def sc_pi_prime(polygon: Polygon, w):
    a = _require_pre(polygon)
    w = np.asarray(w, complex)
    return sc_pi(polygon, w) * sum(bj / (aj - w) for aj, bj in zip(a, polygon.external_angles))


def _radial_vertex_integral(polygon: Polygon, j: int) -> complex:
    """``int_0^{a_j} pi(w) dw`` along the radius."""
    a = polygon.pre_vertices[j]
    bj = polygon.external_angles[j]
    s = 0.25 * (_GL_X + 1.0)
    head = 0.25 * np.sum(_GL_W * sc_pi(polygon, s * a))
    x, w = roots_jacobi(GJ_ORDER, 0.0, -bj)
    u = 0.25 * (1.0 + x)  # u = 1 - s in [0, 1/2]
    tail = 0.25 ** (1.0 - bj) * np.sum(w * sc_pi(polygon, (1.0 - u) * a, skip=j))
    return complex(a * (head + tail))


def _arc_integral(polygon: Polygon, j: int, phi_end: float) -> complex:
    """``int pi(w) dw`` along the unit circle from ``a_j`` to ``a_j e^{i phi_end}``."""
    if phi_end == 0.0:
        return 0j
    a = polygon.pre_vertices[j]
    bj = polygon.external_angles[j]
    sg = 1.0 if phi_end > 0 else -1.0
    L = abs(phi_end)
    x, w = roots_jacobi(GJ_ORDER, 0.0, -bj)
    psi = 0.5 * L * (1.0 + x)
    phi = sg * psi
    # (1 - e^{i phi}) = |phi| * R(phi), R smooth
    mod = 2.0 * np.sin(psi / 2.0) / psi
    arg = (phi - sg * np.pi) / 2.0
    reg = mod ** (-bj) * np.exp(-1j * bj * arg)
    wz = a * np.exp(1j * phi)
    f = reg * sc_pi(polygon, wz, skip=j) * 1j * wz * sg
    return complex((0.5 * L) ** (1.0 - bj) * np.sum(w * f))


class SCMap:
    """Boundary trace ``S(e^{2 pi i t})`` of the normalized interior map."""

    def __init__(self, polygon: Polygon, capacity: float | None = None):
        a = _require_pre(polygon)
        self.polygon = polygon
        self.t_pre = np.mod(np.angle(a) / (2 * np.pi), 1.0)
        raw = np.array([_radial_vertex_integral(polygon, j) for j in range(polygon.n)])
        if capacity is None:
            per_raw = np.abs(np.roll(raw, -1) - raw).sum()
            per = np.abs(np.roll(polygon.vertices, -1) - polygon.vertices).sum()
            capacity = per_raw / per
        self.C = float(capacity)
        self.raw_vertices = raw

    @property
    def vertices(self) -> np.ndarray:
        return self.raw_vertices / self.C

    def _nearest(self, t):
        d = np.mod(t - self.t_pre + 0.5, 1.0) - 0.5
        j = int(np.argmin(np.abs(d)))
        return j, float(d[j])

    def trace(self, t):
        t = np.atleast_1d(np.asarray(t, float))
        out = np.empty(t.shape, complex)
        for i, ti in enumerate(t):
            j, d = self._nearest(ti)
            out[i] = self.raw_vertices[j] + _arc_integral(self.polygon, j, 2 * np.pi * d)
        return out / self.C

    def displacement(self, j: int, s):
        """``S(a_j e^{2 pi i s}) - S(a_j)`` without cancellation."""
        s = np.atleast_1d(np.asarray(s, float))
        return np.array([_arc_integral(self.polygon, j, 2 * np.pi * si) for si in s]) / self.C

    def derivatives(self, t):
        """``(alpha', alpha'')`` of ``alpha(t) = S(e^{2 pi i t})`` away from pre-vertices."""
        w = np.exp(2j * np.pi * np.asarray(t, float))
        tp = 2j * np.pi
        with np.errstate(divide="ignore", invalid="ignore"):
            # infinite or zero speed at pre-vertices is expected
            d1 = sc_pi(self.polygon, w) / self.C
            d2 = sc_pi_prime(self.polygon, w) / self.C
        return d1 * tp * w, d2 * (tp * w) ** 2 + d1 * tp * tp * w


def sc_boundary_trace(polygon: Polygon, t, capacity: float | None = None):
    return SCMap(polygon, capacity).trace(t)


def sc_curve(polygon: Polygon, capacity: float | None = None, name: str = "sc_trace") -> BoundaryCurve:
    """The polygon boundary parametrized conformally, ``t -> S(e^{2 pi i t})``."""
    m = SCMap(polygon, capacity)
    order = np.argsort(m.t_pre)
    tp = m.t_pre[order]
    breaks = sorted(set([0.0, 1.0] + list(tp)))
    pieces = []
    for t0, t1 in zip(breaks[:-1], breaks[1:]):
        pieces.append(_sc_piece(m, t0, t1))
    betas = polygon.external_angles[order]
    return BoundaryCurve(tuple(pieces), tuple(tp), tuple(betas), name=name)


def _sc_piece(m: SCMap, t0: float, t1: float) -> Piece:
    def func(t):
        t = np.asarray(t, float)
        z = m.trace(t)
        d1, d2 = m.derivatives(t)
        return z, d1, d2

    def local(s, at_start):
        tc = t0 if at_start else t1
        j = int(np.argmin(np.abs(np.mod(m.t_pre - tc + 0.5, 1.0) - 0.5)))
        return m.displacement(j, s)

    return Piece(t0, t1, func, local)


# -------------------------------------------------- polygon approximation


@dataclass(frozen=True)
class ApproxPolygonData:
    n: int
    nodes: np.ndarray
    pre_images: np.ndarray
    external_angles: np.ndarray
    snapped: tuple[int, ...]
    params: np.ndarray


def approx_polygon(curve: BoundaryCurve, n: int) -> ApproxPolygonData:
    """Inscribed polygon through ``alpha(j/n)`` with nodes snapped onto the corners."""
    if n < 3:
        raise GeometryError("n must be at least 3")
    t = np.arange(n) / n
    if curve.n_corners > n:
        raise GeometryError("more corners than polygon nodes")
    snapped: list[int] = []
    for tc in curve.corner_params:
        j = int(np.floor(tc * n + 0.5)) % n
        while j in snapped:
            # tie: the later corner moves on to the next index
            j = (j + 1) % n
        t[j] = tc
        snapped.append(j)
    nodes = curve.position(t)
    if polyline_self_intersects(nodes):
        raise GeometryError(f"approximating polygon with n={n} is not simple; increase n")
    beta = polygon_external_angles(nodes)
    return ApproxPolygonData(n, nodes, np.exp(2j * np.pi * t), beta, tuple(snapped), t)


def sigma_tilde(data: ApproxPolygonData, K: int) -> GeometricFactors:
    k = np.arange(1, K + 1)[:, None]
    s = (data.external_angles[None, :] * data.pre_images[None, :] ** (-k)).sum(axis=1)
    return GeometricFactors(s, "polygon-approximation")
