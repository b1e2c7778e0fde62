"""Composite 16-point Gauss-Legendre panel meshes with dyadic corner refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .geometry import BoundaryCurve, curvature, local_param

GL_ORDER = 16
_X, _W = roots_legendre(GL_ORDER)

DEFAULT_PANELS = 16
DEFAULT_DEPTH = 30


@dataclass(frozen=True)
class Panel:
    t0: float
    t1: float
    piece: int
    corner: int = -1
    s0: float = 0.0
    s1: float = 0.0
    level: int = 0

    @property
    def length(self) -> float:
        """Parameter length, exact even for deeply refined panels."""
        return self.s1 - self.s0 if self.corner >= 0 else self.t1 - self.t0


@dataclass(frozen=True, eq=False)
class PanelMesh:
    """Nodes, arclength weights and cached geometry of a panel discretization.

    ``corner`` holds, per node, the index of the corner whose refinement zone
    the node lies in (-1 elsewhere) and ``local`` the displacement of the node
    from that corner, so differences between nearby nodes stay accurate.
    """

    curve: BoundaryCurve
    panels: tuple[Panel, ...]
    depth: int
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    weights: np.ndarray
    corner: np.ndarray
    local: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.t)

    @property
    def speed(self):
        return np.abs(self.dz)

    @property
    def tangent(self):
        return self.dz / np.abs(self.dz)

    @property
    def normal(self):
        return -1j * self.tangent

    @property
    def curvature(self):
        return curvature(self.dz, self.ddz)

    @property
    def panel_arclengths(self):
        return self.weights.reshape(-1, GL_ORDER).sum(axis=1)

    def differences(self) -> np.ndarray:
        """Matrix of ``z_i - z_j`` with corner-local cancellation removed."""
        d = self.z[:, None] - self.z[None, :]
        for l in np.unique(self.corner[self.corner >= 0]):
            idx = np.flatnonzero(self.corner == l)
            loc = self.local[idx]
            d[np.ix_(idx, idx)] = loc[:, None] - loc[None, :]
        return d

    def stats(self) -> dict:
        return {
            "panels": len(self.panels),
            "nodes": self.n_nodes,
            "depth": self.depth,
            "min_panel_param_length": min(p.length for p in self.panels),
            "max_panel_arclength": float(self.panel_arclengths.max()),
            "arclength": float(self.weights.sum()),
        }


def _dyadic_offsets(h: float, depth: int):
    """Breakpoints 0, h/2^d, ..., h/2, h of a panel refined toward offset 0."""
    return np.concatenate([[0.0], h * 0.5 ** np.arange(depth, -1, -1)])


def build_mesh(curve: BoundaryCurve, base_panels_per_piece: int = DEFAULT_PANELS, depth: int | None = None) -> PanelMesh:
    if base_panels_per_piece < 2:
        raise ValueError("base_panels_per_piece must be at least 2")
    if depth is None:
        depth = DEFAULT_DEPTH if curve.corner_params else 0
    if depth < 0:
        raise ValueError("depth must be non-negative")
    corner_of = {tc: l for l, tc in enumerate(curve.corner_params)}
    panels: list[Panel] = []
    for ip, p in enumerate(curve.pieces):
        edges = np.linspace(p.t0, p.t1, base_panels_per_piece + 1)
        lc = corner_of.get(p.t0, -1)
        rc = corner_of.get(p.t1 % 1.0, -1)
        for j in range(base_panels_per_piece):
            a, b = edges[j], edges[j + 1]
            if j == 0 and lc >= 0:
                off = _dyadic_offsets(b - a, depth)
                tl = curve.corner_params[lc]
                for lev, (s0, s1) in enumerate(zip(off[:-1], off[1:])):
                    panels.append(Panel(tl + s0, tl + s1, ip, lc, s0, s1, depth - lev))
            elif j == base_panels_per_piece - 1 and rc >= 0:
                off = -_dyadic_offsets(b - a, depth)[::-1]
                for lev, (s0, s1) in enumerate(zip(off[:-1], off[1:])):
                    panels.append(Panel(p.t1 + s0, p.t1 + s1, ip, rc, s0, s1, lev))
            else:
                panels.append(Panel(a, b, ip))

    n = len(panels) * GL_ORDER
    t = np.empty(n)
    z = np.empty(n, complex)
    dz = np.empty(n, complex)
    ddz = np.empty(n, complex)
    w = np.empty(n)
    corner = np.full(n, -1, dtype=int)
    local = np.zeros(n, complex)
    for k, pan in enumerate(panels):
        sl = slice(k * GL_ORDER, (k + 1) * GL_ORDER)
        piece = curve.pieces[pan.piece]
        if pan.corner >= 0:
            half = 0.5 * (pan.s1 - pan.s0)
            s = pan.s0 + half * (_X + 1.0)
            base = piece.t0 if pan.s0 >= 0 else piece.t1
            tt = base + s
            zz, d1, d2 = piece(tt)
            loc = local_param(curve, pan.corner, s)
            zz = curve.corner_position(pan.corner) + loc
            corner[sl] = pan.corner
            local[sl] = loc
        else:
            half = 0.5 * (pan.t1 - pan.t0)
            tt = pan.t0 + half * (_X + 1.0)
            zz, d1, d2 = piece(tt)
        t[sl] = tt
        z[sl], dz[sl], ddz[sl] = zz, d1, d2
        w[sl] = _W * half * np.abs(d1)
    return PanelMesh(curve, tuple(panels), depth, t, z, dz, ddz, w, corner, local)


def integrate(mesh: PanelMesh, f):
    """Arclength quadrature ``sum_i f_i w_i`` of node values."""
    f = np.asarray(f)
    if f.shape[0] != mesh.n_nodes:
        raise ValueError(f"expected {mesh.n_nodes} node values, got {f.shape[0]}")
    return np.tensordot(mesh.weights, f, axes=(0, 0))


def integrate_parameter(mesh: PanelMesh, f):
    """Quadrature in the curve parameter ``t`` (weights without the speed factor)."""
    f = np.asarray(f)
    return np.tensordot(mesh.weights / np.abs(mesh.dz), f, axes=(0, 0))
