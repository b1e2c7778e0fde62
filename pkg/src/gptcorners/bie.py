"""Nystrom discretization of the Neumann-Poincare equation and GPT extraction.

The insulated inclusion problem is represented as ``u = h + S[phi]`` with the
single-layer potential ``S`` and density ``phi`` solving
``(-1/2 I - K*) phi = d h / d nu`` on the boundary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import OrderError, SolverError
from .geometry import CurveSample
from .mesh import PanelMesh

log = logging.getLogger(__name__)

MEAN_TOL = 1e-8
RESIDUAL_TOL = 1e-10


def neumann_data(n: int, flavor: str, sample) -> np.ndarray:
    """Normal derivative of ``P_n^c = Re z^n`` or ``P_n^s = Im z^n``.

    ``sample`` is a :class:`CurveSample` or a :class:`PanelMesh`; values are
    ``Re(n z^{n-1} nu)`` and ``Im(n z^{n-1} nu)`` respectively.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(sample, CurveSample):
        z, nu = sample.position, sample.outward_normal
    else:
        z, nu = sample.z, sample.normal
    g = n * np.asarray(z) ** (n - 1) * nu
    if flavor == "cos":
        return np.real(g)
    if flavor == "sin":
        return np.imag(g)
    raise ValueError("flavor must be 'cos' or 'sin'")


@dataclass(eq=False)
class NpSystem:
    """Dense matrix of ``-1/2 I - K*`` with arclength weights folded in.

    The factorization is taken of the similarity transform
    ``W^{1/2} A W^{-1/2}``, which is far better conditioned on dyadically
    refined meshes; one step of iterative refinement on ``A`` follows.
    """

    mesh: PanelMesh
    matrix: np.ndarray
    kstar: np.ndarray
    _lu: tuple | None = field(default=None, repr=False)

    @property
    def _sw(self):
        return np.sqrt(self.mesh.weights)

    @property
    def lu(self):
        if self._lu is None:
            sw = self._sw
            self._lu = sla.lu_factor(sw[:, None] * self.matrix / sw[None, :], check_finite=False)
        return self._lu

    def rcond(self) -> float:
        """Reciprocal 1-norm condition estimate of the scaled system."""
        sw = self._sw
        anorm = np.linalg.norm(sw[:, None] * self.matrix / sw[None, :], 1)
        rc, info = sla.lapack.dgecon(self.lu[0], anorm, norm="1")
        return float(rc)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        sw = self._sw if rhs.ndim == 1 else self._sw[:, None]
        phi = sla.lu_solve(self.lu, sw * rhs, check_finite=False) / sw
        corr = sla.lu_solve(self.lu, sw * (rhs - self.matrix @ phi), check_finite=False) / sw
        return phi + corr


def kstar_matrix(mesh: PanelMesh) -> np.ndarray:
    d = mesh.differences()
    nu = mesh.normal
    n = mesh.n_nodes
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.real(d * np.conj(nu)[:, None]) / np.abs(d) ** 2
    np.fill_diagonal(k, 0.0)
    off = np.abs(d) + np.eye(n)
    if np.any(off == 0.0):
        raise SolverError("coincident quadrature nodes")
    k *= mesh.weights[None, :] / (2 * np.pi)
    k[np.diag_indices(n)] = mesh.curvature * mesh.weights / (4 * np.pi)
    return k


def gauss_residual(system: NpSystem) -> float:
    """Max deviation of ``int K*[.] ds = 1/2 int . ds`` over nodes away from corners."""
    mesh = system.mesh
    col = (mesh.weights @ system.kstar) / mesh.weights
    far = mesh.corner < 0
    if not far.any():
        return 0.0
    return float(np.max(np.abs(col[far] - 0.5)))


def assemble_np(mesh: PanelMesh) -> NpSystem:
    k = kstar_matrix(mesh)
    a = -0.5 * np.eye(mesh.n_nodes) - k
    system = NpSystem(mesh, a, k)
    if not mesh.curve.corner_params:
        res = gauss_residual(system)
        if res > 1e-8:
            log.warning("Gauss identity residual %.2e on a smooth curve; mesh too coarse?", res)
    return system


@dataclass
class Density:
    values: np.ndarray
    mean: float
    residual: float = 0.0


def solve_density(system: NpSystem, rhs) -> Density:
    """Solve ``(-1/2 I - K*) phi = rhs`` for mean-zero data.

    A right-hand side whose arclength mean exceeds ``MEAN_TOL`` (relative to
    its L1 size) lies outside the invertibility class and is rejected; smaller
    means are quadrature noise and are projected out.
    """
    mesh = system.mesh
    rhs = np.asarray(rhs, float)
    w = mesh.weights
    length = w.sum()
    scale = max(float(np.abs(rhs) @ w), np.finfo(float).tiny)
    mean = float(rhs @ w) / length
    if abs(mean) * length > MEAN_TOL * scale:
        raise SolverError(f"right-hand side has non-zero mean {mean:.3e}")
    rhs = rhs - mean
    phi = system.solve(rhs)
    if not np.all(np.isfinite(phi)):
        raise SolverError(f"singular system (rcond={system.rcond():.2e})")
    res = float(np.max(np.abs(system.matrix @ phi - rhs)) / max(np.max(np.abs(rhs)), np.finfo(float).tiny))
    if res > RESIDUAL_TOL:
        raise SolverError(f"residual {res:.2e} exceeds {RESIDUAL_TOL:g} (rcond={system.rcond():.2e})")
    return Density(phi, float(phi @ w) / length, res)


@dataclass(frozen=True)
class GptTable:
    """Contracted GPTs ``M^{ab}_{kn}``, arrays indexed ``[k-1, n-1]``.

    The first superscript refers to the test harmonic ``P_k`` and the second
    to the excitation ``P_n``; this is the ordering under which the gamma
    combinations are the multipole coefficients of ``u - h``.
    """

    cc: np.ndarray
    cs: np.ndarray
    sc: np.ndarray
    ss: np.ndarray

    @property
    def order(self) -> int:
        return self.cc.shape[0]


def _powers(z, n):
    out = np.empty((n + 1, len(z)), complex)
    out[0] = 1.0
    for k in range(1, n + 1):
        out[k] = out[k - 1] * z
    return out


def excitation_densities(mesh: PanelMesh, system: NpSystem, n_max: int):
    """Densities for all excitations ``P_n^c, P_n^s``, ``n = 1..n_max``, shape ``(2, n_max, N)``."""
    zp = _powers(mesh.z, n_max)
    g = (np.arange(1, n_max + 1)[:, None] * zp[:-1]) * mesh.normal[None, :]
    rhs = np.concatenate([g.real, g.imag]).T
    w = mesh.weights
    length = w.sum()
    means = (w @ rhs) / length
    scale = np.abs(rhs).T @ w
    bad = np.abs(means) * length > MEAN_TOL * np.maximum(scale, np.finfo(float).tiny)
    if bad.any():
        raise SolverError("excitation data has non-zero mean; curve or mesh is inconsistent")
    rhs = rhs - means[None, :]
    phi = system.solve(rhs)
    res = np.max(np.abs(system.matrix @ phi - rhs), axis=0) / np.max(np.abs(rhs), axis=0)
    if not np.all(np.isfinite(phi)) or res.max() > RESIDUAL_TOL:
        raise SolverError(f"residual {res.max():.2e} exceeds tolerance (rcond={system.rcond():.2e})")
    return phi.T.reshape(2, n_max, -1)


def gpt_table(mesh: PanelMesh, system: NpSystem, n_max: int) -> GptTable:
    """``M^{ab}_{kn} = int P_k^a phi_n^b ds`` for ``1 <= k, n <= n_max``."""
    if n_max < 1:
        raise OrderError("n_max must be >= 1", required=1)
    phi = excitation_densities(mesh, system, n_max)
    zp = _powers(mesh.z, n_max)[1:]
    pc = zp.real * mesh.weights
    ps = zp.imag * mesh.weights
    return GptTable(
        cc=pc @ phi[0].T,
        cs=pc @ phi[1].T,
        sc=ps @ phi[0].T,
        ss=ps @ phi[1].T,
    )


def compute_gpts(curve, n_max: int, panels: int | None = None, depth: int | None = None):
    """Convenience pipeline: mesh, assemble, solve; returns ``(mesh, system, table)``."""
    from .mesh import DEFAULT_PANELS, build_mesh

    mesh = build_mesh(curve, panels or DEFAULT_PANELS, depth)
    system = assemble_np(mesh)
    return mesh, system, gpt_table(mesh, system, n_max)


def single_layer_eval(mesh: PanelMesh, phi, z: complex) -> float:
    """``(1/2 pi) int log|z - y| phi(y) ds(y)`` for targets well off the boundary."""
    values = phi.values if isinstance(phi, Density) else np.asarray(phi)
    dist = np.min(np.abs(mesh.z - z))
    if dist <= 2 * mesh.panel_arclengths.max():
        raise ValueError("target too close to the boundary for plain quadrature")
    return float(np.log(np.abs(z - mesh.z)) @ (values * mesh.weights) / (2 * np.pi))


def multipole_eval(gamma, excitation, z: complex, tail_tol=1e-8) -> float:
    """Far-field perturbation ``u - h`` from the multipole series.

    ``excitation = (n, "cos")`` means ``h = Re z^n`` and ``(n, "sin")`` means
    ``h = Im z^n``. All table rows are summed; symmetric domains have exactly
    vanishing rows, so convergence is judged from the last few terms only.
    """
    n, flavor = excitation
    if n > gamma.order:
        raise OrderError(f"excitation order {n} exceeds table order {gamma.order}", required=n)
    col = n - 1
    coef = gamma.g1[:, col] + gamma.g2[:, col] if flavor == "cos" else gamma.g1[:, col] - gamma.g2[:, col]
    terms = coef * (1.0 / z) ** np.arange(1, gamma.order + 1)
    total = complex(np.sum(terms[::-1]))
    tail = np.abs(terms[-min(3, len(terms)) :]).max()
    if gamma.order > 1 and tail > tail_tol * max(np.abs(terms).max(), 1e-300):
        raise OrderError("multipole series has not converged at this radius; increase the order")
    return float(-total.real) if flavor == "cos" else float(-total.imag)
