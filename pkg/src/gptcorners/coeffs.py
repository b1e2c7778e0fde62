"""Recurrences linking GPTs, Riemann-map coefficients and geometric factors.

Array conventions (all 0-based numpy arrays):

* ``b[j]`` holds ``b_{j+1}`` so ``b[0] = b_1 = 1``;
* ``mu[j]`` holds ``mu_{j-1}`` so ``mu[0] = mu_{-1} = 1``;
* ``sigma[j]`` holds ``sigma_{j+1}``;
* gamma and GPT tables are indexed ``[k-1, n-1]``.

Inner sums use compensated summation (``math.fsum`` on real and imaginary
parts) because power-table entries mix very different magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, OrderError


def csum(terms) -> complex:
    """Compensated sum of complex terms."""
    terms = list(terms)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


def _as_complex(seq) -> np.ndarray:
    return np.asarray(seq, dtype=complex).ravel()


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class GammaTable:
    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        if self.g1.shape != self.g2.shape or self.g1.ndim != 2 or self.g1.shape[0] != self.g1.shape[1]:
            raise ValueError("gamma arrays must be square and of equal shape")

    @property
    def order(self) -> int:
        return self.g1.shape[0]

    def gamma1(self, k: int, n: int) -> complex:
        return complex(self.g1[k - 1, n - 1])

    def gamma2(self, k: int, n: int) -> complex:
        return complex(self.g2[k - 1, n - 1])

    def truncate(self, n: int) -> "GammaTable":
        if n > self.order:
            raise OrderError(f"table has order {self.order}, requested {n}", required=n)
        return GammaTable(self.g1[:n, :n].copy(), self.g2[:n, :n].copy())


def gamma_from_gpt(gpt) -> GammaTable:
    """Complex gamma tensors from the four real contracted GPT tables."""
    n = gpt.cc.shape[0]
    k = np.arange(1, n + 1)[:, None]
    g1 = (gpt.cc - gpt.ss + 1j * (gpt.cs + gpt.sc)) / (4 * np.pi * k)
    g2 = (gpt.cc + gpt.ss - 1j * (gpt.cs - gpt.sc)) / (4 * np.pi * k)
    return GammaTable(g1, g2)


def gpt_from_gamma(gamma: GammaTable, imag_tol: float | None = None):
    """Invert :func:`gamma_from_gpt`; returns a ``GptTable``.

    With ``imag_tol`` set, raises :class:`ConsistencyError` when the
    reconstruction is not real to that relative tolerance.
    """
    from .bie import GptTable

    n = gamma.order
    k = np.arange(1, n + 1)[:, None]
    a = 4 * np.pi * k * gamma.g1
    b = 4 * np.pi * k * gamma.g2
    # a = (cc - ss) + i(cs + sc), b = (cc + ss) - i(cs - sc)
    cc, ss = (a.real + b.real) / 2, (b.real - a.real) / 2
    cs, sc = (a.imag - b.imag) / 2, (a.imag + b.imag) / 2
    if imag_tol is not None:
        # Both combinations come from real tables, so nothing else can leak in;
        # the only check is finiteness.
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ConsistencyError("non-finite gamma entries")
    return GptTable(cc=cc, cs=cs, sc=sc, ss=ss)


@dataclass(frozen=True)
class PowerCoeffTable:
    """Coefficients ``P[m, k]`` of ``x^k`` in ``(sum_j c_j x^j)^m``.

    Only entries with ``k - m + 1 <= n_known`` are determined by the supplied
    series; :meth:`get` raises :class:`OrderError` for the others.
    """

    table: np.ndarray
    n_known: int

    @property
    def K(self) -> int:
        return self.table.shape[1] - 1

    def get(self, m: int, k: int) -> complex:
        if k < m:
            return 0j
        if k - m + 1 > self.n_known or k > self.K:
            raise OrderError(f"power coefficient ({m},{k}) needs {k - m + 1} series terms", required=k - m + 1)
        return complex(self.table[m, k])


def series_power_coeffs(c, K: int, m_max: int | None = None) -> PowerCoeffTable:
    """Power table of the series ``c[0] x + c[1] x^2 + ...`` up to ``x^K``.

    Row ``m`` is the Cauchy product of row ``m - 1`` with the base series.
    """
    c = _as_complex(c)
    m_max = K if m_max is None else m_max
    L = len(c)
    base = np.zeros(K + 1, complex)
    base[1 : min(L, K) + 1] = c[: min(L, K)]
    t = np.zeros((m_max + 1, K + 1), complex)
    t[0, 0] = 1.0
    for m in range(1, m_max + 1):
        for k in range(m, K + 1):
            t[m, k] = csum(base[j] * t[m - 1, k - j] for j in range(1, k - m + 2))
    return PowerCoeffTable(t, L)


# ---------------------------------------------------------- coefficients


@dataclass(frozen=True)
class MappingCoefficients:
    C: float
    b: np.ndarray
    mu: np.ndarray

    def b_k(self, k: int) -> complex:
        return complex(self.b[k - 1])

    def mu_k(self, k: int) -> complex:
        return complex(self.mu[k + 1])

    @property
    def order(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class GeometricFactors:
    sigma: np.ndarray
    provenance: str = "analytic"

    def __getitem__(self, k: int) -> complex:
        if k < 1:
            raise IndexError("sigma is indexed from 1")
        return complex(self.sigma[k - 1])

    def __len__(self) -> int:
        return len(self.sigma)

    @property
    def K(self) -> int:
        return len(self.sigma)

    def conj(self) -> "GeometricFactors":
        return GeometricFactors(np.conj(self.sigma), self.provenance)


def capacity(gamma: GammaTable, imag_tol: float = 1e-6) -> float:
    g = gamma.gamma2(1, 1)
    if not g.real < 0:
        raise ConsistencyError(f"gamma2_11 = {g:.6g} must have negative real part")
    if abs(g.imag) > imag_tol * abs(g):
        raise ConsistencyError(f"gamma2_11 = {g:.6g} is not real")
    return math.sqrt(-g.real)


def b_from_gamma(gamma: GammaTable, K: int | None = None, C: float | None = None) -> np.ndarray:
    """``b_1..b_K`` from the first gamma2 column; requires ``gamma.order >= K``."""
    K = gamma.order if K is None else K
    if K > gamma.order:
        raise OrderError(f"b_{K} needs gamma2_k1 up to k = {K}", required=K)
    C = capacity(gamma) if C is None else C
    col = gamma.g2[:, 0]
    b = np.zeros(K, complex)
    b[0] = 1.0
    # P[m, k] built column by column: column k only needs b_j with j < k for m >= 2
    P = np.zeros((K + 1, K + 1), complex)
    P[1, 1] = 1.0
    for k in range(2, K + 1):
        for m in range(2, k + 1):
            P[m, k] = csum(b[j - 1] * P[m - 1, k - j] for j in range(1, k - m + 2))
        b[k - 1] = csum(col[m - 1] / C ** (m + 1) * P[m, k] for m in range(2, k + 1))
        P[1, k] = b[k - 1]
    return b


def mu_from_b(b, K: int | None = None) -> np.ndarray:
    """``mu_{-1}..mu_{K-1}`` from ``b_1..b_{K+1}`` via the Cauchy-product identity."""
    b = _as_complex(b)
    K = len(b) - 1 if K is None else K
    if len(b) < K + 1:
        raise OrderError(f"mu_{K - 1} needs b up to b_{K + 1}", required=K + 1)
    mu = np.zeros(K + 1, complex)
    mu[0] = 1.0
    for k in range(1, K + 1):
        # mu_{k-1} = -b_{k+1} - sum_{j=2}^{k} b_j mu_{k-j}
        mu[k] = -csum([b[k]] + [b[j - 1] * mu[k - j + 1] for j in range(2, k + 1)])
    return mu


def b_from_mu(mu, K: int | None = None) -> np.ndarray:
    """Inverse of :func:`mu_from_b`: ``b_1..b_{K+1}`` from ``mu_{-1}..mu_{K-1}``."""
    mu = _as_complex(mu)
    K = len(mu) - 1 if K is None else K
    if len(mu) < K + 1:
        raise OrderError(f"b_{K + 1} needs mu up to mu_{K - 1}", required=K + 1)
    b = np.zeros(K + 1, complex)
    b[0] = 1.0
    for k in range(1, K + 1):
        b[k] = -csum([mu[k]] + [b[j - 1] * mu[k - j + 1] for j in range(2, k + 1)])
    return b


def sigma_from_b(b, K: int | None = None, provenance: str = "analytic") -> GeometricFactors:
    b = _as_complex(b)
    K = len(b) - 1 if K is None else K
    if len(b) < K + 1:
        raise OrderError(f"sigma_{K} needs b up to b_{K + 1}", required=K + 1)
    s = np.zeros(K, complex)
    for k in range(1, K + 1):
        terms = [k * (k + 1) * b[k]] + [-(j + 1) * b[j] * s[k - j - 1] for j in range(1, k)]
        s[k - 1] = csum(terms)
    return GeometricFactors(s, provenance)


def b_from_sigma(sigma, K: int | None = None) -> np.ndarray:
    """Exact inverse of :func:`sigma_from_b`; returns ``b_1..b_{K+1}``."""
    s = _as_complex(sigma.sigma if isinstance(sigma, GeometricFactors) else sigma)
    K = len(s) if K is None else K
    if len(s) < K:
        raise OrderError(f"b_{K + 1} needs sigma up to sigma_{K}", required=K)
    b = np.zeros(K + 1, complex)
    b[0] = 1.0
    for k in range(1, K + 1):
        b[k] = csum([s[k - 1]] + [(j + 1) * b[j] * s[k - j - 1] for j in range(1, k)]) / (k * (k + 1))
    return b


def mu_requirement(N: int) -> int:
    """Number of ``mu`` entries (from ``mu_{-1}``) that :func:`gamma_forward` needs at order ``N``."""
    return 2 * N + 1


def gamma_forward(C: float, b, mu, N: int) -> GammaTable:
    """Full gamma tables of order ``N`` from the map coefficients."""
    b, mu = _as_complex(b), _as_complex(mu)
    if len(b) < N:
        raise OrderError(f"order {N} needs b up to b_{N}", required=N)
    need = mu_requirement(N)
    if len(mu) < need:
        raise OrderError(f"order {N} needs mu up to mu_{need - 2}", required=need)
    bp = series_power_coeffs(b[:N], N)
    mp = series_power_coeffs(mu[:need], 3 * N, m_max=N)
    g1 = np.zeros((N, N), complex)
    g2 = np.zeros((N, N), complex)
    for n in range(1, N + 1):
        for k in range(1, N + 1):
            s1 = csum(g1[m - 1, n - 1] / C ** (m + n) * bp.get(m, k) for m in range(1, k))
            g1[k - 1, n - 1] = C ** (k + n) * (mp.get(n, 2 * n + k) - s1)
            s2 = csum(g2[m - 1, n - 1] / C ** (m + n) * bp.get(m, k) for m in range(1, k))
            if k <= n:
                g2[k - 1, n - 1] = -(C ** (k + n)) * (np.conj(mp.get(n, 2 * n - k)) + s2)
            else:
                g2[k - 1, n - 1] = -(C ** (k + n)) * s2
    return GammaTable(g1, g2)


def bk2_residual(gamma: GammaTable, C: float, b, mu, K: int) -> np.ndarray:
    """Residuals ``r_2..r_K`` of the gamma1 identity for ``b_k``."""
    b, mu = _as_complex(b), _as_complex(mu)
    if gamma.order < K or len(b) < K or len(mu) < K + 2:
        raise OrderError(f"residual to order {K} needs gamma, b and mu_k up to {K}", required=K)
    bp = series_power_coeffs(b[:K], K)
    g11 = gamma.gamma1(1, 1)
    out = np.zeros(K - 1)
    for k in range(2, K + 1):
        s = csum(gamma.gamma1(m, 1) / C ** (m + 1) * bp.get(m, k) for m in range(2, k + 1))
        out[k - 2] = abs(g11 * b[k - 1] - C * C * (mu[k + 1] - s))
    return out


def cauchy_product_residual(b, mu) -> np.ndarray:
    """``|mu_{k-1} + b_{k+1} + sum_{j=2}^k b_j mu_{k-j}|`` for every representable ``k``."""
    b, mu = _as_complex(b), _as_complex(mu)
    K = min(len(b) - 1, len(mu) - 1)
    out = np.zeros(K)
    for k in range(1, K + 1):
        out[k - 1] = abs(csum([mu[k], b[k]] + [b[j - 1] * mu[k - j + 1] for j in range(2, k + 1)]))
    return out


@dataclass
class FactorResult:
    coefficients: MappingCoefficients
    sigma: GeometricFactors
    diagnostics: dict = field(default_factory=dict)


def factors_from_gamma(gamma: GammaTable, K: int | None = None, provenance: str = "from-GPTs") -> FactorResult:
    """C, ``b_1..b_{K+1}``, ``mu_{-1}..mu_{K-1}`` and ``sigma_1..sigma_K``.

    ``sigma_K`` needs gamma of order ``K + 1``; the default uses the largest
    ``K`` the table supports.
    """
    K = gamma.order - 1 if K is None else K
    if K < 1 or K + 1 > gamma.order:
        raise OrderError(f"sigma_{K} needs gamma2_k1 up to k = {K + 1}", required=K + 1)
    C = capacity(gamma)
    b = b_from_gamma(gamma, K + 1, C)
    mu = mu_from_b(b, K)
    sigma = sigma_from_b(b, K, provenance)
    kr = min(K, gamma.order)
    # bk2 needs mu_k, i.e. k <= K - 1
    kb = min(kr, K - 1)
    diag = {
        "capacity": C,
        "gamma2_11": [gamma.gamma2(1, 1).real, gamma.gamma2(1, 1).imag],
        "bk2_residuals": bk2_residual(gamma, C, b, mu, kb).tolist() if kb >= 2 else [],
        "cauchy_product_residuals": cauchy_product_residual(b, mu).tolist(),
    }
    return FactorResult(MappingCoefficients(C, b, mu), sigma, diag)
