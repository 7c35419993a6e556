"""Text tables and the versioned JSON document for solve results."""

import numpy as np

from realvar import pp

__all__ = ["SCHEMA_VERSION", "SOLVE_SCHEMA", "result_to_json", "render_result", "render_dims", "render_ranks"]

SCHEMA_VERSION = 1
DASH = "—"

_int_list = {"type": "array", "items": {"type": "integer", "minimum": 0}}
_pair = {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}]}
_verdict = {
    "oneOf": [
        {"type": "null"},
        {
            "type": "object",
            "required": ["kind", "t", "s", "s_below_D", "candidates", "strong"],
            "properties": {
                "kind": {"enum": [pp.EMPTY, pp.DIMS, pp.STRONG, pp.RANK, pp.NOT_YET]},
                "t": {"type": "integer"},
                "s": {"type": ["integer", "null"]},
                "s_below_D": {"type": "boolean"},
                "candidates": _int_list,
                "strong": _int_list,
            },
            "additionalProperties": False,
        },
    ]
}
_coord = {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_root = {
    "type": "object",
    "required": ["coords", "residual", "is_real", "cluster_size", "seed"],
    "properties": {
        "coords": {"type": "array", "items": _coord},
        "residual": {"type": "number", "minimum": 0},
        "is_real": {"type": "boolean"},
        "cluster_size": {"type": "integer", "minimum": 1},
        "seed": {"type": ["integer", "null"]},
    },
    "additionalProperties": False,
}

SOLVE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "realvar solve result",
    "type": "object",
    "required": [
        "schema_version", "system", "config", "status", "verdict", "iterations", "basis",
        "border_basis", "commutativity_error", "roots", "rejected", "radical_certified", "first_success",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "system": {
            "type": "object",
            "required": ["vars", "polynomials", "D"],
            "properties": {
                "vars": {"type": "array", "items": {"type": "string"}},
                "polynomials": {"type": "array", "items": {"type": "string"}},
                "D": {"type": "integer"},
            },
        },
        "config": {"type": "object"},
        "status": {"enum": ["solved", "empty", "incomplete"]},
        "message": {"type": "string"},
        "verdict": _verdict,
        "iterations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "dims_G", "dims_Gplus", "verdict", "rank_profile", "rank_verdict", "extraction"],
                "properties": {
                    "t": {"type": "integer"},
                    "dims_G": _int_list,
                    "dims_Gplus": _int_list,
                    "verdict": _verdict,
                    "rank_profile": {"oneOf": [{"type": "null"}, _int_list]},
                    "rank_verdict": _verdict,
                    "face_reductions": {"type": "integer"},
                    "extraction": {
                        "oneOf": [
                            {"type": "null"},
                            {
                                "type": "object",
                                "required": ["t", "s", "source", "ok", "message"],
                                "properties": {
                                    "t": {"type": "integer"},
                                    "s": {"type": "integer"},
                                    "source": {"enum": ["dims", "rank"]},
                                    "ok": {"type": "boolean"},
                                    "message": {"type": "string"},
                                    "n_roots": {"type": "integer"},
                                    "max_residual": {"type": "number"},
                                },
                            },
                        ]
                    },
                },
            },
        },
        "basis": {"type": "array", "items": {"type": "string"}},
        "border_basis": {"type": "array", "items": {"type": "string"}},
        "commutativity_error": {"type": ["number", "null"]},
        "roots": {"type": "array", "items": _root},
        "rejected": {"type": "array", "items": _root},
        "radical_certified": {"type": "boolean"},
        "first_success": {
            "type": "object",
            "required": ["dims", "rank"],
            "properties": {"dims": _pair, "rank": _pair},
        },
    },
}


def _config_json(cfg):
    out = {}
    for k, v in vars(cfg).items():
        if v is None or isinstance(v, (bool, int, float, str)):
            out[k] = v
        else:
            out[k] = repr(v)
    return out


def _verdict_json(v):
    return None if v is None else v.to_json()


def result_to_json(sys, result):
    ex = result.extraction
    names = list(sys.names)
    seed = result.config.seed
    iters = []
    for it in result.iterations:
        e = it.extraction
        iters.append({
            "t": it.t,
            "dims_G": list(it.table.dims_G),
            "dims_Gplus": list(it.table.dims_Gplus),
            "verdict": _verdict_json(it.verdict),
            "rank_profile": None if it.rank_profile is None else list(it.rank_profile),
            "rank_verdict": _verdict_json(it.rank_verdict),
            "face_reductions": int(it.face_reductions),
            "extraction": None if e is None else {
                "t": e.t, "s": e.s, "source": e.source, "ok": e.ok, "message": e.message,
                "n_roots": len(e.roots), "max_residual": float(e.max_residual),
            },
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "system": {"vars": names, "polynomials": [g.format(names) for g in sys.generators], "D": sys.D},
        "config": _config_json(result.config),
        "status": result.status,
        "message": result.message,
        "verdict": _verdict_json(result.verdict),
        "iterations": iters,
        "basis": [m.format(names) for m in ex.basis.monomials] if ex and ex.basis else [],
        "border_basis": ex.border.format(names) if ex and ex.border else [],
        "commutativity_error": float(ex.multiplication.commutativity_error) if ex and ex.multiplication else None,
        "roots": [r.to_json(seed) for r in result.roots],
        "rejected": [r.to_json(seed) for r in result.rejected],
        "radical_certified": bool(result.radical_certified),
        "first_success": {
            "dims": None if result.first_dims is None else list(result.first_dims),
            "rank": None if result.first_rank is None else list(result.first_rank),
        },
    }


def _grid(header, rows):
    widths = [max(len(str(r[k])) for r in [header] + rows) for k in range(len(header))]
    lines = []
    for k, r in enumerate([header] + rows):
        cells = [str(r[0]).ljust(widths[0])] + [str(c).rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if k == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines)


def render_dims(iterations, mode="real"):
    """Dimension table in the published layout; missing cells are dashes."""
    if not iterations:
        return ""
    width = max(it.t for it in iterations) + 2
    header = ["s ="] + list(range(width))
    rows = []
    for it in iterations:
        t = it.t
        g = it.table.dims_G + [DASH] * (width - len(it.table.dims_G))
        gp = it.table.dims_Gplus + [DASH] * (width - len(it.table.dims_Gplus))
        sym = "G" if mode == "real" else "H"
        rows.append([f"dim π_s({sym}_{t}^⊥)"] + g)
        rows.append([f"dim π_s(({sym}_{t}^+)^⊥)"] + gp)
    return _grid(header, rows)


def render_ranks(iterations):
    its = [it for it in iterations if it.rank_profile is not None]
    if not its:
        return ""
    width = max(len(it.rank_profile) for it in its)
    header = [""] + [f"s={s}" for s in range(width)]
    rows = [[f"t={it.t}"] + it.rank_profile + [DASH] * (width - len(it.rank_profile)) for it in its]
    return "rank M_s(L*)\n" + _grid(header, rows)


def _fmt_coord(z, digits=6):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.{digits}g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.{digits}g}{sign}{abs(z.imag):.{digits}g}i"


def _fmt_verdict(v):
    if v is None:
        return "none"
    if v.kind == pp.EMPTY:
        return f"{v.kind} at t={v.t}"
    tail = " (s < D: roots checked against the input)" if v.s_below_D else ""
    return f"{v.kind} at (t, s) = ({v.t}, {v.s}){tail}"


def render_result(sys, result):
    names = list(sys.names)
    cfg = result.config
    out = [f"mode: {cfg.mode}   criterion: {cfg.criterion}   policy: {cfg.policy}   seed: {cfg.seed}", ""]
    out.append(render_dims(result.iterations, cfg.mode))
    ranks = render_ranks(result.iterations)
    if ranks:
        out += ["", ranks]
    out.append("")
    out.append(f"status: {result.status}")
    if result.message:
        out.append(result.message)
    out.append(f"verdict: {_fmt_verdict(result.verdict)}")
    if cfg.criterion == "both":
        fd = "none" if result.first_dims is None else f"({result.first_dims[0]}, {result.first_dims[1]})"
        fr = "none" if result.first_rank is None else f"({result.first_rank[0]}, {result.first_rank[1]})"
        out.append(f"first success: dimension conditions {fd}   rank condition {fr}")
    for it in result.iterations:
        e = it.extraction
        if e is not None and not e.ok:
            out.append(f"extraction at (t, s) = ({e.t}, {e.s}) failed: {e.message}")
    ex = result.extraction
    if ex is not None:
        out.append("basis B: " + ", ".join(m.format(names) for m in ex.basis.monomials))
        out.append("border basis F0:")
        out += ["  " + f for f in ex.border.format(names)]
        out.append(f"c(X) = {ex.multiplication.commutativity_error:.3g}")
        out.append(f"roots ({len(ex.roots)}):")
        for r in ex.roots:
            coords = ", ".join(_fmt_coord(z) for z in r.coordinates)
            mult = f"  multiplicity {r.cluster_size}" if r.cluster_size > 1 else ""
            out.append(f"  ({coords})  eps = {r.residual:.2e}{mult}")
        if ex.rejected:
            out.append(f"rejected candidates ({len(ex.rejected)}):")
            for r in ex.rejected:
                coords = ", ".join(_fmt_coord(z) for z in r.coordinates)
                out.append(f"  ({coords})  eps = {r.residual:.2e}")
        if cfg.mode == "real":
            out.append(f"radical_certified: {str(result.radical_certified).lower()}")
    return "\n".join(out)


def roots_array(result):
    return np.array([r.coordinates for r in result.roots])
