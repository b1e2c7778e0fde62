"""Command-line interface: ``gptcorners <subcommand> ...``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.  Errors are
reported on stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as gio
from .bie import assemble_np, gpt_table
from .coeffs import factors_from_gamma, gamma_from_gpt, sigma_from_b
from .errors import ConsistencyError, GeometryError, OrderError, SolverError
from .geometry import builtin_curve, curve_from_spec, reflect_curve
from .mesh import DEFAULT_PANELS, build_mesh
from .oracle import Polygon, SCMap, approx_polygon, regular_polygon, sc_curve, sc_taylor, sigma_from_prevertices, sigma_tilde
from .reconstruct import DEFAULT_TAU, classify_decay, detect_corners, phi_truncated, theta_partial

THREADS_ENV = "GPTCORNERS_THREADS"

# pinned smooth test domains: Omega is the reflection of P(unit disk)
SMOOTH_SYMMETRIC_POLY = [0.0, 1.0, 0.0, 0.0, 1.0 / 16]
SMOOTH_ASYMMETRIC_POLY = [0.0, 1.0, 0.15, 0.08]


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    order: int | None = None
    panels: int = DEFAULT_PANELS
    depth: int | None = None
    grid: int | None = None
    tau: float = DEFAULT_TAU
    threads: int | None = None
    out: Path = Path(".")
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("order", "panels", "depth", "grid", "threads"):
            v = getattr(self, name)
            if v is not None and v <= 0 and not (name == "depth" and v == 0):
                raise ValueError(f"--{name} must be positive")
        if not self.tau > 0:
            raise ValueError("--tau must be positive")
        self.out.mkdir(parents=True, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise ValueError(f"output directory {self.out} is not writable")


class InputError(ValueError):
    pass


# ------------------------------------------------------------ helpers


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc


def _load_curve(path):
    spec = _load_json(path)
    try:
        return curve_from_spec(spec)
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"{path}: malformed domain spec ({exc})") from exc


def _load_polygon(path) -> Polygon:
    spec = _load_json(path)
    if not isinstance(spec, dict):
        raise InputError("polygon spec must be a JSON object")
    if "regular" in spec:
        return regular_polygon(int(spec["regular"]), float(spec.get("capacity", 1.0)))
    try:
        v = np.array([complex(x, y) for x, y in spec["vertices"]])
        pre = spec.get("pre_vertices")
        pre = None if pre is None else np.array([complex(x, y) for x, y in pre])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed polygon spec ({exc})") from exc
    return Polygon.from_vertices(v, pre)


def _gpts_for(curve, order, panels, depth):
    t0 = time.perf_counter()
    mesh = build_mesh(curve, panels, depth)
    system = assemble_np(mesh)
    table = gpt_table(mesh, system, order)
    report = {
        "curve": curve.name,
        "order": order,
        "mesh": mesh.stats(),
        "rcond_scaled": system.rcond(),
        "seconds": time.perf_counter() - t0,
    }
    return table, gamma_from_gpt(table), report


def _sigma_rows(sigma, exact=None):
    rows = []
    for k in range(1, sigma.K + 1):
        s = sigma[k]
        e = exact[k] if exact is not None else complex(np.nan, np.nan)
        rows.append((k, s.real, s.imag, e.real, e.imag, abs(s - e)))
    return rows


def _theta_rows(th):
    return list(zip(th.t, th.values))


def _boundary_rows(t, z):
    return [(ti, zi.real, zi.imag) for ti, zi in zip(t, z)]


def _curve_rows(curve, G):
    t = np.arange(G) / G
    z = curve.position(t)
    return [(ti, zi.real, zi.imag) for ti, zi in zip(t, z)]


def _corner_report(res, m, grid, tau):
    sig = res.sigma
    th = theta_partial(sig, m, grid)
    mu = res.coefficients.mu
    rep = detect_corners(th, tau=tau, C=res.coefficients.C, mu=mu)
    if sig.K >= 16:
        rep.verdict, rep.slope = classify_decay(sig)
    rep.extra["phi_order"] = min(m, len(mu) - 2)
    rep.extra["theta_order"] = m
    return th, rep


# ------------------------------------------------------------ commands


def cmd_gpts(cfg: RunConfig):
    curve = _load_curve(cfg.input)
    order = cfg.order or 10
    table, gamma, report = _gpts_for(curve, order, cfg.panels, cfg.depth)
    gio.write_csv(cfg.out / "gpt.csv", "gpt", gio.gpt_rows(table), {"order": order})
    gio.write_csv(cfg.out / "gamma.csv", "gamma", gio.gamma_rows(gamma), {"order": order})
    gio.write_json(cfg.out / "gpts_report.json", report)
    return report


def cmd_factors(cfg: RunConfig):
    gamma = gio.read_gamma(cfg.input)
    K = cfg.order if cfg.order else gamma.order - 1
    res = factors_from_gamma(gamma, K)
    gio.write_csv(
        cfg.out / "factors.csv",
        "factors",
        gio.factor_rows(res.coefficients, res.sigma),
        {"capacity": res.coefficients.C, "order": K},
    )
    gio.write_json(cfg.out / "factors_diagnostics.json", res.diagnostics)
    return res.diagnostics


def cmd_reconstruct(cfg: RunConfig):
    C, sigma, b, mu = gio.read_factors(cfg.input)
    m = cfg.order or len(sigma)
    if m > len(sigma):
        raise OrderError(f"--order {m} exceeds the {len(sigma)} available geometric factors", required=m)
    grid = cfg.grid or 16 * m
    th = theta_partial(sigma, m, grid)
    rep = detect_corners(th, tau=cfg.tau, C=C, mu=mu)
    if len(sigma) >= 16:
        rep.verdict, rep.slope = classify_decay(sigma)
    pm = min(m, len(mu) - 2)
    rep.extra.update(phi_order=pm, theta_order=m)
    gio.write_csv(cfg.out / "theta.csv", "theta", _theta_rows(th), {"order": m})
    gio.write_csv(cfg.out / "boundary.csv", "boundary", _boundary_rows(th.t, phi_truncated(C, mu, pm, th.t)), {"order": pm})
    out = rep.to_json()
    gio.write_json(cfg.out / "corners.json", out)
    return out


def cmd_classify(cfg: RunConfig):
    _, sigma, _, _ = gio.read_factors(cfg.input)
    K = cfg.order or len(sigma)
    verdict, slope = classify_decay(sigma, K)
    out = {"verdict": verdict, "slope": slope, "decay_ratio": float(np.exp(slope)), "order": K}
    gio.write_json(cfg.out / "classify.json", out)
    return out


def cmd_oracle_sc(cfg: RunConfig):
    poly = _load_polygon(cfg.input)
    K = cfg.order or 30
    b, sig = sc_taylor(poly, K)
    exact = sigma_from_prevertices(poly, K)
    rows = [(k, sig[k].real, sig[k].imag, b[k - 1].real, b[k - 1].imag) for k in range(1, K + 1)]
    gio.write_csv(cfg.out / "sc_coeffs.csv", "sc_coeffs", rows, {"order": K})
    M = cfg.extra.get("trace_samples") or 512
    m = SCMap(poly)
    t = np.arange(M) / M
    z = m.trace(t)
    gio.write_csv(cfg.out / "sc_trace.csv", "sc_trace", _boundary_rows(t, z), {"capacity": m.C})
    out = {
        "capacity": m.C,
        "taylor_vs_prevertex_max_deviation": float(np.max(np.abs(sig.sigma - exact.sigma))),
        "vertex_max_error": float(np.max(np.abs(m.vertices - poly.vertices))),
    }
    gio.write_json(cfg.out / "sc_report.json", out)
    return out


def cmd_oracle_approx(cfg: RunConfig):
    spec = _load_json(cfg.input)
    K = cfg.order or 6
    ns = cfg.extra.get("n_list") or [48, 96, 192, 384, 768]
    if isinstance(spec, dict) and ("regular" in spec or "vertices" in spec):
        poly = _load_polygon(cfg.input)
        curve = sc_curve(poly)
        exact = sigma_from_prevertices(poly, K)
    else:
        curve = reflect_curve(_load_curve(cfg.input))
        exact = None
    rows = []
    for n in ns:
        st = sigma_tilde(approx_polygon(curve, n), K)
        for k in range(1, K + 1):
            err = abs(st[k] - exact[k]) if exact is not None else np.nan
            rows.append((n, k, st[k].real, st[k].imag, err))
    gio.write_csv(cfg.out / "sigma_tilde.csv", "sigma_tilde", rows, {"order": K})
    return {"n": ns, "order": K, "exact_reference": exact is not None}


# ------------------------------------------------------------ repro


def _triangle():
    return builtin_curve("reflected_equilateral_triangle")


def _cap():
    return builtin_curve("cap_shaped")


def _smooth(coeffs):
    params = []
    for c in coeffs:
        params += [float(np.real(c)), float(np.imag(c))]
    return reflect_curve(builtin_curve("polynomial_image", params))


def _factors(curve, order, cfg):
    _, gamma, rep = _gpts_for(curve, order, cfg.panels, cfg.depth)
    return factors_from_gamma(gamma), rep


def repro_table(cfg: RunConfig, which: str):
    curve = _triangle() if which == "table1" else _cap()
    res, rep = _factors(curve, 21, cfg)
    exact = sigma_from_prevertices(regular_polygon(3), 20) if which == "table1" else None
    gio.write_csv(cfg.out / f"{which}.csv", "sigma_check", _sigma_rows(res.sigma, exact), {"domain": curve.name})
    rep["diagnostics"] = res.diagnostics
    gio.write_json(cfg.out / f"{which}_report.json", rep)
    return rep


def repro_corner_fig(cfg: RunConfig, name, curve, order, m, exact=None):
    res, rep = _factors(curve, order, cfg)
    grid = cfg.grid or 32 * m
    th, corners = _corner_report(res, m, grid, cfg.tau)
    gio.write_csv(cfg.out / f"{name}_sigma.csv", "sigma_check", _sigma_rows(res.sigma, exact))
    gio.write_csv(cfg.out / f"{name}_theta.csv", "theta", _theta_rows(th), {"order": m})
    gio.write_csv(cfg.out / f"{name}_domain.csv", "curve", _curve_rows(curve, 1024))
    gio.write_csv(cfg.out / f"{name}_reflected.csv", "curve", _curve_rows(reflect_curve(curve), 1024))
    out = corners.to_json()
    out["solver"] = rep
    gio.write_json(cfg.out / f"{name}_corners.json", out)
    return out


def repro_fig3(cfg: RunConfig):
    cap = _cap()
    res, rep = _factors(cap, 29, cfg)
    out = {"solver": rep}
    for N in (6, 29):
        m = N - 1
        grid = cfg.grid or 32 * m
        th, corners = _corner_report(res, m, grid, cfg.tau)
        t = np.arange(1024) / 1024
        z = phi_truncated(res.coefficients.C, res.coefficients.mu, N - 2, t)
        gio.write_csv(cfg.out / f"fig3_N{N}_boundary.csv", "boundary", _boundary_rows(t, z), {"order": N - 2})
        gio.write_csv(cfg.out / f"fig3_N{N}_theta.csv", "theta", _theta_rows(th), {"order": m})
        out[f"N{N}"] = corners.to_json()
    gio.write_csv(cfg.out / "fig3_domain.csv", "curve", _curve_rows(cap, 1024))
    gio.write_json(cfg.out / "fig3_corners.json", out)
    return out


def repro_smooth(cfg: RunConfig, name, coeffs):
    # Omega^r = P(disk) and P'(0) = 1, so the b_k are the coefficients of P
    b = np.zeros(30, complex)
    b[: len(coeffs) - 1] = coeffs[1:]
    exact = sigma_from_b(b, 28)
    return repro_corner_fig(cfg, name, _smooth(coeffs), 29, 28, exact)


def cmd_repro(cfg: RunConfig):
    target = cfg.extra["target"]
    if target in ("table1", "table2"):
        return repro_table(cfg, target)
    if target == "fig1":
        return repro_corner_fig(cfg, "fig1", _triangle(), 22, 21, sigma_from_prevertices(regular_polygon(3), 21))
    if target == "fig2":
        return repro_corner_fig(cfg, "fig2", _cap(), 29, 28)
    if target == "fig3":
        return repro_fig3(cfg)
    if target == "fig4":
        return repro_smooth(cfg, "fig4", SMOOTH_SYMMETRIC_POLY)
    if target == "fig5":
        return repro_smooth(cfg, "fig5", SMOOTH_ASYMMETRIC_POLY)
    raise InputError(f"unknown repro target {target!r}")


# ------------------------------------------------------------ parsing


def _common(p, order=True):
    if order:
        p.add_argument("--order", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gptcorners", description="GPTs, geometric factors and corner detection")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gpts", help="compute GPT and gamma tables for a domain")
    p.add_argument("domain")
    _common(p)
    p.add_argument("--panels", type=int, default=DEFAULT_PANELS)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("factors", help="capacity, map coefficients and geometric factors from gamma CSV")
    p.add_argument("gamma")
    _common(p)

    p = sub.add_parser("reconstruct", help="Theta partial sum, truncated exterior map and corner report")
    p.add_argument("factors")
    _common(p)
    p.add_argument("--grid", type=int)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)

    p = sub.add_parser("classify", help="smooth/cornered verdict from sigma decay")
    p.add_argument("factors")
    _common(p)

    p = sub.add_parser("oracle", help="Schwarz-Christoffel reference computations")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    q = osub.add_parser("sc")
    q.add_argument("polygon")
    _common(q)
    q.add_argument("--trace-samples", type=int, default=512)
    q = osub.add_parser("approx")
    q.add_argument("domain")
    _common(q)
    q.add_argument("--n", type=str, default="48,96,192,384,768")

    p = sub.add_parser("repro", help="regenerate table/figure data with pinned settings")
    p.add_argument("target", choices=["table1", "table2", "fig1", "fig2", "fig3", "fig4", "fig5"])
    _common(p, order=False)
    p.add_argument("--panels", type=int, default=DEFAULT_PANELS)
    p.add_argument("--depth", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    return ap


def config_from_args(ns) -> RunConfig:
    cmd = ns.command if ns.command != "oracle" else f"oracle {ns.oracle_command}"
    inp = getattr(ns, "domain", None) or getattr(ns, "gamma", None) or getattr(ns, "factors", None) or getattr(ns, "polygon", None)
    threads = ns.threads
    if threads is None and os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError as exc:
            raise InputError(f"{THREADS_ENV} must be an integer") from exc
    extra = {}
    if cmd == "repro":
        extra["target"] = ns.target
    if cmd == "oracle sc":
        extra["trace_samples"] = ns.trace_samples
    if cmd == "oracle approx":
        try:
            extra["n_list"] = [int(x) for x in ns.n.split(",") if x.strip()]
        except ValueError as exc:
            raise InputError("--n must be a comma-separated list of integers") from exc
    return RunConfig(
        command=cmd,
        input=inp,
        order=getattr(ns, "order", None),
        panels=getattr(ns, "panels", DEFAULT_PANELS),
        depth=getattr(ns, "depth", None),
        grid=getattr(ns, "grid", None),
        tau=getattr(ns, "tau", DEFAULT_TAU),
        threads=threads,
        out=ns.out,
        extra=extra,
    )


COMMANDS = {
    "gpts": cmd_gpts,
    "factors": cmd_factors,
    "reconstruct": cmd_reconstruct,
    "classify": cmd_classify,
    "oracle sc": cmd_oracle_sc,
    "oracle approx": cmd_oracle_approx,
    "repro": cmd_repro,
}


def run(cfg: RunConfig):
    cfg.validate()
    if cfg.threads:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=cfg.threads):
            return COMMANDS[cfg.command](cfg)
    return COMMANDS[cfg.command](cfg)


def _fail(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, OrderError) and exc.required is not None:
        payload["required_order"] = exc.required
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = config_from_args(ns)
        result = run(cfg)
    except (SolverError, ConsistencyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail("numeric", exc, 1)
    except (InputError, GeometryError, OrderError, gio.SchemaError, ValueError, OSError) as exc:
        return _fail("input", exc, 2)
    print(json.dumps({"status": "ok", "command": cfg.command, "out": str(cfg.out)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
