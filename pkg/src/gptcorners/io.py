"""Versioned CSV/JSON exchange formats between CLI stages."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .bie import GptTable
from .coeffs import GammaTable, GeometricFactors, MappingCoefficients
from .errors import GptCornersError

SCHEMA_VERSION = 1

SCHEMAS = {
    "gpt": ["k", "n", "Mcc", "Mcs", "Msc", "Mss"],
    "gamma": ["k", "n", "re_gamma1", "im_gamma1", "re_gamma2", "im_gamma2"],
    "factors": ["k", "re_sigma", "im_sigma", "re_b", "im_b", "re_mu_km2", "im_mu_km2"],
    "theta": ["t", "theta"],
    "boundary": ["t", "re_phi", "im_phi"],
    "curve": ["t", "x", "y"],
    "sc_coeffs": ["k", "re_sigma", "im_sigma", "re_b", "im_b"],
    "sc_trace": ["t", "x", "y"],
    "sigma_tilde": ["n", "k", "re_sigma_tilde", "im_sigma_tilde", "abs_error"],
    "sigma_check": ["k", "re_sigma", "im_sigma", "re_exact", "im_exact", "abs_error"],
}


class SchemaError(GptCornersError, ValueError):
    """A CSV file does not carry the expected schema header."""


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def write_csv(path, schema: str, rows, meta: dict | None = None) -> str:
    """Write rows under the schema header; returns the text written."""
    cols = SCHEMAS[schema]
    buf = io.StringIO()
    head = f"# schema={schema} version={SCHEMA_VERSION}"
    if meta:
        head += " " + json.dumps(meta, sort_keys=True, separators=(",", ":"))
    buf.write(head + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        if len(r) != len(cols):
            raise ValueError(f"row of length {len(r)} does not fit schema {schema}")
        w.writerow([str(int(v)) if isinstance(v, (int, np.integer)) else fmt(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path, schema: str):
    """Parse a schema CSV into ``(meta, rows)`` with float rows."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing schema header")
    head = lines[0][2:].split(" ", 2)
    name = head[0].split("=", 1)[1]
    version = int(head[1].split("=", 1)[1])
    if name != schema:
        raise SchemaError(f"{path}: expected schema {schema!r}, found {name!r}")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema version {version}")
    meta = json.loads(head[2]) if len(head) > 2 else {}
    reader = csv.reader(lines[1:])
    cols = next(reader)
    if cols != SCHEMAS[schema]:
        raise SchemaError(f"{path}: columns {cols} do not match schema {schema}")
    rows = []
    for r in reader:
        if r:
            try:
                rows.append([float(v) for v in r])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric entry in row {r}") from exc
    return meta, np.array(rows, float).reshape(-1, len(cols))


def write_json(path, obj) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ------------------------------------------------------------ tables


def gpt_rows(t: GptTable):
    N = t.order
    return [
        (k, n, t.cc[k - 1, n - 1], t.cs[k - 1, n - 1], t.sc[k - 1, n - 1], t.ss[k - 1, n - 1])
        for k in range(1, N + 1)
        for n in range(1, N + 1)
    ]


def gamma_rows(g: GammaTable):
    N = g.order
    out = []
    for k in range(1, N + 1):
        for n in range(1, N + 1):
            a, b = g.g1[k - 1, n - 1], g.g2[k - 1, n - 1]
            out.append((k, n, a.real, a.imag, b.real, b.imag))
    return out


def _square(rows, what):
    kk = rows[:, 0].astype(int)
    nn = rows[:, 1].astype(int)
    N = int(kk.max()) if len(kk) else 0
    if N == 0 or len(rows) != N * N or nn.max() != N or kk.min() < 1 or nn.min() < 1:
        raise SchemaError(f"{what} table must contain every (k, n) pair for 1 <= k, n <= N")
    if len(set(zip(kk, nn))) != N * N:
        raise SchemaError(f"{what} table has duplicate (k, n) entries")
    return N, kk - 1, nn - 1


def read_gamma(path) -> GammaTable:
    _, rows = read_csv(path, "gamma")
    N, ki, ni = _square(rows, "gamma")
    g1 = np.zeros((N, N), complex)
    g2 = np.zeros((N, N), complex)
    g1[ki, ni] = rows[:, 2] + 1j * rows[:, 3]
    g2[ki, ni] = rows[:, 4] + 1j * rows[:, 5]
    return GammaTable(g1, g2)


def read_gpt(path) -> GptTable:
    _, rows = read_csv(path, "gpt")
    N, ki, ni = _square(rows, "gpt")
    arrs = [np.zeros((N, N)) for _ in range(4)]
    for a, col in zip(arrs, range(2, 6)):
        a[ki, ni] = rows[:, col]
    return GptTable(*arrs)


def factor_rows(coeffs: MappingCoefficients, sigma: GeometricFactors):
    """Rows ``k = 1..K+1``: ``sigma_k`` (nan past ``K``), ``b_k``, ``mu_{k-2}``."""
    K = sigma.K
    rows = []
    for k in range(1, K + 2):
        s = sigma[k] if k <= K else complex(math.nan, math.nan)
        b = coeffs.b[k - 1] if k - 1 < len(coeffs.b) else complex(math.nan, math.nan)
        m = coeffs.mu[k - 1] if k - 1 < len(coeffs.mu) else complex(math.nan, math.nan)
        rows.append((k, s.real, s.imag, b.real, b.imag, m.real, m.imag))
    return rows


def read_factors(path):
    """Returns ``(C, sigma, b, mu)`` from a factors CSV."""
    meta, rows = read_csv(path, "factors")
    if "capacity" not in meta:
        raise SchemaError(f"{path}: factors CSV lacks the capacity in its header")
    k = rows[:, 0].astype(int)
    if not np.array_equal(k, np.arange(1, len(k) + 1)):
        raise SchemaError(f"{path}: rows must be k = 1, 2, ...")
    s = rows[:, 1] + 1j * rows[:, 2]
    b = rows[:, 3] + 1j * rows[:, 4]
    mu = rows[:, 5] + 1j * rows[:, 6]
    return float(meta["capacity"]), s[np.isfinite(s)], b[np.isfinite(b)], mu[np.isfinite(mu)]
