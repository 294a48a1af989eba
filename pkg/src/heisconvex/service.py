"""Command execution shared by the HTTP service and the CLI.

``execute`` maps a validated :class:`RunConfig` to a :class:`RunResult`. Exit codes:
0 consistent, 2 violation witnessed, 1 usage or hypothesis error. Nothing here reads the
clock, so equal configs give equal results.
"""

from __future__ import annotations

import io
import math
from dataclasses import asdict
from typing import Any, Callable

import numpy as np

from . import degree2d as dg
from . import domains as dm
from . import gallery as gl
from . import harnack as hk
from . import monge as mg
from . import principles as pr
from .domains import DomainError
from .fields import check_convexity, horizontal_gradient_arr
from .heis_core import from_plane_arr
from .models import RunConfig, RunResult
from .subdiff import default_p_grid, normal_map_raster, region_grid

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2

# Per-command CSV layouts, also shown by the CLI help.
CSV_COLUMNS: dict[str, str] = {
    "verify comparison": "p1,p2,witness (one row per witness cell centre)",
    "verify boundary-min": "set,kind,size,measure_v,measure_u,holds (kind 0 = box, 1 = gauge ball)",
    "verify aleksandrov": "x,y,t,dist,ratio[,j] (sharpness entry adds the dyadic index j)",
    "verify geometric": "x,y,t,dist,slice_dist,D,ratio,set (set 0 = grid, 1 = flat face)",
    "verify scaling": "lambda,identity,rel_error (identity 0 diam_HS, 1 dist_H, 2 subdifferential)",
    "verify harnack": "step,ratio_bound (per-step Lemma factors and the product)",
    "verify convexity": "xi1_x,xi1_y,xi1_t,xi2_x,xi2_y,xi2_t,lam,gap (one row per witness)",
    "measure normal-map": "p1,p2,flag (p-cell centres)",
    "measure slicing": "base_x,base_y,base_t,measure",
    "measure diam-hs": "base_x,base_y,base_t,slice_diameter",
    "experiment sharpness": "table,row,key,value (long format: ratios and image areas)",
    "experiment prop-ma": "table,row,key,value (long format: quadrature levels and slice table)",
    "degree brouwer": "case,expected,degree",
    "degree set-valued": "case,lambda,eps,degree",
}


class UsageError(ValueError):
    pass


# ------------------------------------------------------------------ helpers


def jsonable(v: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf' and 'nan'."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    return v


def _num(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    if not rows:
        return ",".join(columns or ["index", "value"]) + "\n"
    cols = columns or list(rows[0])
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_num(r.get(c, "")) for c in cols) + "\n")
    return buf.getvalue()


def _long_rows(table: str, rows: list[dict]) -> list[dict]:
    out = []
    for i, r in enumerate(rows):
        for k, v in r.items():
            out.append({"table": table, "row": i, "key": k, "value": v})
    return out


def _grid(cfg: RunConfig, key: str, default):
    v = getattr(cfg.grids, key)
    return default if v is None else v


def _field_key(cfg: RunConfig, entry: gl.GalleryEntry, prefer: str | None = None) -> str:
    if cfg.field:
        return cfg.field
    if prefer and prefer in entry.fields:
        return prefer
    return entry.default_field


def _centre(dom: dm.ConvexDomain) -> np.ndarray:
    c = 0.5 * (dom.lo + dom.hi)
    if not dom.contains(c[None, :])[0]:
        raise DomainError("bounding-box centre lies outside the domain")
    return c


def _verdict(violated: bool) -> tuple[str, int]:
    return ("violated", EXIT_VIOLATION) if violated else ("consistent", EXIT_OK)


Outcome = tuple[bool, dict, str]
Handler = Callable[[RunConfig, gl.GalleryEntry], Outcome]


# ------------------------------------------------------------------ verify


def _comparison(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    cell = _grid(cfg, "cell", 0.05)
    kw = dict(
        cell=cell,
        t_spacing=_grid(cfg, "t_spacing", 0.5),
        slice_samples=_grid(cfg, "slice_samples", 192),
        test_radius=float(cfg.options.get("test_radius", 0.25)),
        threads=cfg.threads,
        seed=cfg.grids.seed,
    )
    if entry.name == "cylinder-bump" and not cfg.field:
        u, v = entry.field("u"), entry.field("v")
        rep = pr.comparison_inclusion_check(u, v, entry.domain, **kw)
        pair = {"u": u.label, "v": v.label, "subdomain": entry.domain.label}
    else:
        # u = (1+s)(V - c) + c on the sublevel set {V < c}: u <= V inside, u = V on its boundary.
        V = entry.field(_field_key(cfg, entry, "apex"))
        anchor = _centre(entry.domain)
        vc = float(V(anchor[None, :])[0])
        if not vc < 0:
            raise UsageError(f"field {V.label} must be negative at the domain centre")
        c = float(cfg.options.get("level", 0.5 * vc))
        s = float(cfg.options.get("s", 0.2))
        dom0 = dm.sublevel(entry.domain, V, c, f"{{{V.label} < {c:g}}}")
        u = V.scaled(1 + s, -s * c)
        rep = pr.comparison_inclusion_check(u, V, entry.domain, dom0, anchor=anchor, **kw)
        pair = {"u": u.label, "v": V.label, "subdomain": dom0.label, "level": c, "s": s}
    out = rep.to_dict()
    out["pair"] = pair
    return rep.verdict == "violated", out, rep.to_csv()


def _boundary_min(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    f = entry.field(_field_key(cfg, entry))
    corollary = bool(cfg.options.get("corollary", False))
    factor = 1.0 if corollary else float(cfg.options.get("factor", 1.2))
    rep = pr.boundary_min_check(
        f.scaled(factor),
        f,
        entry.domain,
        cell=_grid(cfg, "cell", 0.1),
        t_spacing=_grid(cfg, "t_spacing", 0.25),
        slice_samples=_grid(cfg, "slice_samples", 96),
        corollary=corollary,
        threads=cfg.threads,
        seed=cfg.grids.seed,
    )
    out = rep.to_dict()
    out["pair"] = {"u": f"{factor:g}*{f.label}", "v": f.label}
    return rep.verdict == "violated", out, rep.to_csv()


def _aleksandrov(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    cell = _grid(cfg, "cell", 0.1)
    if entry.name == "sharpness":
        rep = pr.sharpness_statistic(entry.field(), entry.domain, entry.params["eps"], cell=cell, threads=cfg.threads)
        _require_probes(rep)
        return rep.verdict == "violated", rep.to_dict(), rep.to_csv()
    u = entry.field(_field_key(cfg, entry, "apex"))
    xi = dm.grid_points(entry.domain, int(cfg.options.get("per_axis", 6)))
    reps = []
    for c in (cell, cell / 2):
        rep = pr.aleksandrov_ratio(
            u, entry.domain, xi, cell=c, base_grid=cfg.grids.base_grid,
            slice_samples=_grid(cfg, "slice_samples", 96), threads=cfg.threads, seed=cfg.grids.seed,
        )
        _require_probes(rep)
        reps.append(rep)
    a, b = reps[0].statistic, reps[1].statistic
    change = abs(b - a) / max(abs(a), abs(b)) if max(abs(a), abs(b)) > 0 else 0.0
    out = reps[1].to_dict()
    out["resolutions"] = [{"cell": c, "constant": r.statistic} for c, r in zip((cell, cell / 2), reps)]
    out["relative_change"] = change
    violated = not all(math.isfinite(r.statistic) for r in reps)
    out["verdict"] = "violated" if violated else "consistent"
    return violated, out, reps[1].to_csv()


def _require_probes(rep: pr.PrincipleReport) -> None:
    failed = [p for p in rep.hypothesis_probes if not p["passed"]]
    if failed:
        raise pr.HypothesisError(f"{rep.name}: hypothesis probes failed: {[p['name'] for p in failed]}", rep.hypothesis_probes)


def _geometric(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    dom = entry.domain
    rep = pr.geometric_ratio(dom, per_axis=int(cfg.options.get("per_axis", 10)), seed=cfg.grids.seed)
    rows = [dict(r, set=0) for r in rep.rows]
    out = {"grid": rep.to_dict()}
    violated = rep.verdict == "violated"
    if dom.meta.get("kind") == "cylinder" or entry.name in ("cylinder", "cylinder-bump"):
        h = float(dom.hi[-1])
        ff = pr.geometric_ratio(dom, pr.flat_face_points(h), bound=pr.FLAT_FACE_CONSTANT, seed=cfg.grids.seed)
        rows += [dict(r, set=1) for r in ff.rows]
        out["flat_face"] = ff.to_dict()
        violated |= ff.verdict == "violated"
    return violated, out, rows_to_csv(rows)


def _scaling(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    f = entry.field(_field_key(cfg, entry))
    lams = [float(x) for x in cfg.options.get("lambdas", (0.5, 2.0))]
    reps = [
        pr.scaling_check(f, entry.domain, lam, base_grid=cfg.grids.base_grid,
                         slice_samples=_grid(cfg, "slice_samples", 96), seed=cfg.grids.seed)
        for lam in lams
    ]
    rows = [{"lambda": r.details["lambda"], **row} for r in reps for row in r.rows]
    out = {"field": f.label, "checks": [r.to_dict() for r in reps]}
    return any(r.verdict == "violated" for r in reps), out, rows_to_csv(rows)


def _harnack(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    f = entry.field(_field_key(cfg, entry))
    R = cfg.R if cfg.R is not None else 0.33
    xi0 = np.asarray(cfg.options.get("xi0", [0.0] * entry.domain.dim), dtype=float)
    rep = hk.ball_harnack_check(f, entry.domain, xi0, R, sample_pairs=int(cfg.options.get("pairs", 500)), seed=cfg.grids.seed)
    out = asdict(rep)
    out.update(field=f.label, R=R, xi0=xi0, closed_form_constant=hk.closed_form_constant())
    steps = [{"step": i, "ratio_bound": a * b} for i, (a, b) in enumerate(hk.chain_points(np.zeros(entry.domain.dim)).step_factors)]
    steps.append({"step": len(steps), "ratio_bound": rep.product_constant})
    return rep.verdict == "violated", out, rows_to_csv(steps)


def _convexity(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    f = entry.field(_field_key(cfg, entry))
    mode = str(cfg.options.get("mode", "H"))
    if mode not in ("H", "strictH", "euclidean"):
        raise UsageError("mode must be H, strictH or euclidean")
    rep = check_convexity(f, entry.domain, mode, seed=cfg.grids.seed)
    out = asdict(rep)
    out.update(field=f.label, mode=mode)
    rows = []
    for a, b, lam, gap in rep.violations:
        rows.append({"xi1_x": a[0], "xi1_y": a[1], "xi1_t": a[-1], "xi2_x": b[0], "xi2_y": b[1], "xi2_t": b[-1], "lam": lam, "gap": gap})
    cols = ["xi1_x", "xi1_y", "xi1_t", "xi2_x", "xi2_y", "xi2_t", "lam", "gap"]
    return rep.verdict != "pass", out, rows_to_csv(rows, cols)


# ------------------------------------------------------------------ measure


def _normal_map(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    key = _field_key(cfg, entry)
    u = entry.field(key)
    cell = _grid(cfg, "cell", 0.05)
    spacing = float(cfg.options.get("e_spacing", cell / 2))
    E = region_grid(entry.domain, spacing, _grid(cfg, "t_spacing", 0.5))
    pg = default_p_grid(u, E, cell)
    img = normal_map_raster(u, entry.domain, E, pg, _grid(cfg, "slice_samples", 96), threads=cfg.threads)
    out = {"field": u.label, "value": img.measure.value, "cell": cell, "e_points": int(E.shape[0]), "flagged_cells": int(img.flags.sum())}
    if key == "v" and entry.name in ("cylinder-bump", "cylinder"):
        r = float(entry.params.get("r", 1.0))
        ref = 4 * math.pi * r * r
        out.update(reference=ref, relative_error=abs(img.measure.value / ref - 1))
    return False, out, img.to_csv()


def _slicing(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    u = entry.field(_field_key(cfg, entry))
    cell = _grid(cfg, "cell", 0.1)
    val, per = pr.slicing_measure_estimate(u, entry.domain, cell, cfg.grids.base_grid,
                                           slice_samples=_grid(cfg, "slice_samples", 96), threads=cfg.threads)
    bases = dm.grid_points(entry.domain, cfg.grids.base_grid)
    rows = [{"base_x": b[0], "base_y": b[1], "base_t": b[-1], "measure": m} for b, m in zip(bases, per)]
    return False, {"field": u.label, "value": val, "cell": cell, "bases": len(per)}, rows_to_csv(rows)


def _diam(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    dom = entry.domain
    bases = dm.grid_points(dom, cfg.grids.base_grid)
    diams = [dm.slice_diameter(dom, b, 64, cfg.grids.seed) for b in bases]
    rows = [{"base_x": b[0], "base_y": b[1], "base_t": b[-1], "slice_diameter": d} for b, d in zip(bases, diams)]
    return False, {"domain": dom.label, "value": max(diams), "bases": len(diams)}, rows_to_csv(rows)


# --------------------------------------------------------------- experiment


def _lens(entry: gl.GalleryEntry, allowed: tuple[str, ...]) -> None:
    if entry.name not in allowed:
        raise UsageError(f"this experiment needs one of the gallery entries {list(allowed)}")


def _exp_sharpness(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    _lens(entry, ("sharpness",))
    stat = pr.sharpness_statistic(entry.field(), entry.domain, entry.params["eps"], cell=_grid(cfg, "cell", 0.1), threads=cfg.threads)
    _require_probes(stat)
    image = pr.normal_image_refinement(entry.field(), entry.domain)
    out = {"statistic": stat.to_dict(), "normal_image": image.to_dict(), "alpha": entry.extras["alpha"]}
    rows = _long_rows("ratio", stat.rows) + _long_rows("image", image.rows)
    # Growth along the dyadic points witnesses failure of the 1+eps exponent; the image must stay bounded.
    return stat.verdict == "violated", out, rows_to_csv(rows)


def _exp_prop_ma(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    _lens(entry, ("prop-ma", "sharpness"))
    u, dom = entry.field(), entry.domain
    graded = mg.s_ma_integral_experiment(u, dom, levels=(1 / 32, 1 / 64, 1 / 128), chart="graded")
    box = mg.s_ma_integral_experiment(u, dom, levels=(0.04, 0.02), chart="box")
    table = mg.slice_growth_table(u, dom, cell=_grid(cfg, "cell", 0.05))
    rtol = float(cfg.options.get("quadrature_rtol", 0.02))
    out = {
        "graded": graded.to_dict(),
        "box": box.to_dict(),
        "graded_relative_gap": graded.relative_gap,
        "quadrature_converged": graded.relative_gap <= rtol,
        "slice_measures": {"ks": table.ks, "measures": table.measures, "window": table.window, "cell": table.cell,
                           "increasing": table.increasing, "factor": table.factor, "window_sweep": table.window_sweep},
    }
    rows = (
        _long_rows("graded", [{"h": h, "value": v} for h, v in graded.refinement_levels])
        + _long_rows("box", [{"h": h, "value": v} for h, v in box.refinement_levels])
        + _long_rows("slice", [{"k": k, "measure": m} for k, m in zip(table.ks, table.measures)])
        + _long_rows("window", [{"window": w, "measure": m} for w, m in table.window_sweep])
    )
    return not out["quadrature_converged"], out, rows_to_csv(rows)


# ------------------------------------------------------------------- degree


def _square(p: np.ndarray) -> np.ndarray:
    return np.stack([p[:, 0] ** 2 - p[:, 1] ** 2, 2 * p[:, 0] * p[:, 1]], axis=1)


def _brouwer(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    square = dg.PlanarRegion.rectangle((-1, -1), (1, 1))
    disk = dg.PlanarRegion.regular((0, 0), 1.0, 256)
    cases = [
        ("identity", lambda p: p, square, (0.2, 0.1), 1),
        ("z^2", _square, disk, (0.1, 0.0), 2),
        ("z^2-outside", _square, disk, (3.0, 0.0), 0),
    ]
    f = entry.field(_field_key(cfg, entry))
    base = _centre(entry.domain)
    g0 = horizontal_gradient_arr(f, base[None, :])[0]
    if np.all(np.isfinite(g0)):
        region = dg.PlanarRegion.from_slice(entry.domain, base, shrink=0.8)

        def grad_map(w: np.ndarray) -> np.ndarray:
            return horizontal_gradient_arr(f, from_plane_arr(base, w))

        cases.append((f"gradient({f.label})", grad_map, region, tuple(g0), 1))
    rows = []
    for name, fn, region, y, want in cases:
        rows.append({"case": name, "expected": want, "degree": dg.brouwer_degree_2d(fn, region, y)})
    bad = [r for r in rows if r["degree"] != r["expected"]]
    return bool(bad), {"cases": rows, "mismatches": bad}, rows_to_csv(rows)


def _set_valued(cfg: RunConfig, entry: gl.GalleryEntry) -> Outcome:
    f = entry.field(_field_key(cfg, entry))
    base = np.zeros(entry.domain.dim) if entry.domain.contains(np.zeros((1, entry.domain.dim)))[0] else _centre(entry.domain)
    g0 = horizontal_gradient_arr(f, base[None, :])[0]
    default_p0 = g0 if np.all(np.isfinite(g0)) and entry.name != "koranyi-cone" else np.array([0.2, 0.1])
    p0 = np.asarray(cfg.options.get("p0", default_p0), dtype=float)
    region = dg.PlanarRegion.from_slice(entry.domain, base, shrink=float(cfg.options.get("shrink", 0.8)))
    F = dg.subdifferential_map(f, entry.domain, base, _grid(cfg, "slice_samples", 96)).shifted(p0)
    centre = tuple(base[:2])
    rows = []
    out: dict = {"field": f.label, "base": base, "p0": p0}
    ident = dg.sv_degree_trace(dg.SetValuedMap2D.identity(), dg.PlanarRegion.rectangle((-1, -1), (1, 1)), (0.2, 0.1))
    out["identity"] = {"degree": ident.degree, "per_eps": ident.per_eps}
    rows += [{"case": "identity", "lambda": "", "eps": e, "degree": d} for e, d in ident.per_eps]
    sub = dg.sv_degree_trace(F, region, (0.0, 0.0))
    out["subdifferential"] = {"degree": sub.degree, "per_eps": sub.per_eps, "boundary_gap": sub.boundary_gap}
    rows += [{"case": "subdifferential", "lambda": "", "eps": e, "degree": d} for e, d in sub.per_eps]
    homotopy = []
    for lam in np.linspace(0.0, 1.0, int(cfg.options.get("homotopy_points", 5))):
        r = dg.sv_degree_trace(F.homotopy_with_identity(float(lam), centre), region, (0.0, 0.0))
        homotopy.append({"lambda": float(lam), "degree": r.degree})
        rows += [{"case": "homotopy", "lambda": float(lam), "eps": e, "degree": d} for e, d in r.per_eps]
    out["homotopy"] = homotopy
    constant = len({h["degree"] for h in homotopy}) == 1
    out["homotopy_constant"] = constant
    violated = ident.degree != 1 or sub.degree != 1 or not constant
    return violated, out, rows_to_csv(rows, ["case", "lambda", "eps", "degree"])


HANDLERS: dict[str, Handler] = {
    "verify comparison": _comparison,
    "verify boundary-min": _boundary_min,
    "verify aleksandrov": _aleksandrov,
    "verify geometric": _geometric,
    "verify scaling": _scaling,
    "verify harnack": _harnack,
    "verify convexity": _convexity,
    "measure normal-map": _normal_map,
    "measure slicing": _slicing,
    "measure diam-hs": _diam,
    "experiment sharpness": _exp_sharpness,
    "experiment prop-ma": _exp_prop_ma,
    "degree brouwer": _brouwer,
    "degree set-valued": _set_valued,
}

USAGE_ERRORS = (
    UsageError,
    gl.GalleryError,
    pr.HypothesisError,
    hk.HarnackError,
    dg.DegreeError,
    mg.MongeError,
    DomainError,
    ValueError,
)


def execute(cfg: RunConfig) -> RunResult:
    """Run one command. Errors from bad input or failed hypotheses map to exit code 1."""
    try:
        entry = gl.builtin(cfg.gallery.name, cfg.gallery.params)
        violated, body, csv = HANDLERS[cfg.command](cfg, entry)
    except USAGE_ERRORS as exc:
        report = {"command": cfg.command, "gallery": cfg.gallery.model_dump(), "verdict": "error", "error": str(exc)}
        if isinstance(exc, pr.HypothesisError):
            report["probes"] = exc.probes
        return RunResult(exit_code=EXIT_USAGE, verdict="error", report=jsonable(report), csv="index,value\n", message=str(exc))
    verdict, code = _verdict(violated)
    report = {
        "command": cfg.command,
        "gallery": {"name": entry.name, "params": entry.params},
        "grids": cfg.grids.model_dump(),
        "field": cfg.field,
        "verdict": verdict,
        "exit_code": code,
        "result": body,
    }
    return RunResult(exit_code=code, verdict=verdict, report=jsonable(report), csv=csv)
