"""Command-line front end.

Every command resolves a full configuration (built-in defaults, then an
optional JSON file, then explicit flags), writes its CSV or JSON output,
and writes ``<out>.manifest.json`` echoing that configuration together with
the library version and wall time. Exit status: 0 on success, 2 for invalid
input, 3 for numerical failures such as a closed gap.
"""
import argparse
import json
import sys
import time

import numpy as np

from . import __version__, _kernels
from .errors import NumericalError, ValidationError
from .models import FAMILIES, ModelSpec

COMMANDS = ("bands", "invariants", "qgt-map", "wilson", "sweep", "dynamics", "selfcheck")

COMMON_DEFAULTS = {
    "family": "cp_lattice",
    "n": 1,
    "alpha": [1, 1, 1],
    "mass": 2.0,
    "kz": 0.0,
    "radius": 0.1,
    "gauge": None,
    "threads": None,
    "out": None,
}
COMMAND_DEFAULTS = {
    "bands": {"ny": 60, "open_axis": "y", "sweep_axis": "x", "kx": 0.0, "points": 201},
    "invariants": {"grid": "201"},
    "qgt-map": {"grid": "101"},
    "wilson": {"n_kx": 121, "n_ky": 400},
    "sweep": {"grid": "101", "mass_min": -4.0, "mass_max": 4.0, "mass_step": 0.1},
    "dynamics": {"family": "cp_sphere_plus", "observable": "berry", "v": None, "dt": 1e-3,
                 "grid": None, "component": "11", "radius": None},
    "selfcheck": {"samples": 200},
}
OUTPUT_EXT = {"bands": "csv", "invariants": "json", "qgt-map": "csv", "wilson": "csv",
              "sweep": "csv", "dynamics": None, "selfcheck": "json"}


def _alpha(text):
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    try:
        vals = [int(x) for x in str(text).split(",")]
    except ValueError:
        raise ValidationError(f"--alpha expects three comma-separated signs, got {text!r}") from None
    return vals


def _grid(text, sphere=False):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        vals = [int(x) for x in text]
    else:
        try:
            vals = [int(x) for x in str(text).lower().split("x")]
        except ValueError:
            raise ValidationError(f"--grid expects N or NxM, got {text!r}") from None
    if any(v < 1 for v in vals) or len(vals) > 2:
        raise ValidationError(f"invalid grid {text!r}")
    if sphere:
        return (vals[0], vals[1] if len(vals) > 1 else 2 * vals[0])
    if len(vals) > 1 and vals[0] != vals[1]:
        raise ValidationError("Brillouin-zone grids are square")
    return vals[0]


def build_parser():
    p = argparse.ArgumentParser(prog="nqgt", description="Non-Abelian quantum geometry toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with keys mirroring the flag names")
        s.add_argument("--model", "--family", dest="family", choices=FAMILIES)
        s.add_argument("--n", type=int)
        s.add_argument("--alpha", help="signs, e.g. 1,1,-1")
        s.add_argument("--mass", type=float)
        s.add_argument("--kz", type=float)
        s.add_argument("--radius", type=float)
        s.add_argument("--grid", help="N, or NxM for sphere grids")
        s.add_argument("--gauge", choices=("complex", "real"))
        s.add_argument("--threads", type=int)
        s.add_argument("--out")
        if name == "bands":
            s.add_argument("--ny", type=int)
            s.add_argument("--open-axis", dest="open_axis", choices=("x", "y", "z"))
            s.add_argument("--sweep-axis", dest="sweep_axis", choices=("x", "y", "z"))
            s.add_argument("--kx", type=float)
            s.add_argument("--points", type=int)
        if name == "wilson":
            s.add_argument("--n-kx", dest="n_kx", type=int)
            s.add_argument("--n-ky", dest="n_ky", type=int)
        if name == "sweep":
            s.add_argument("--mass-min", dest="mass_min", type=float)
            s.add_argument("--mass-max", dest="mass_max", type=float)
            s.add_argument("--mass-step", dest="mass_step", type=float)
        if name == "dynamics":
            s.add_argument("--observable", choices=("berry", "metric"))
            s.add_argument("--v", type=float)
            s.add_argument("--dt", type=float)
            s.add_argument("--component")
        if name == "selfcheck":
            s.add_argument("--samples", type=int)
    return p


def resolve_config(args):
    """Defaults, overlaid by the JSON config file, overlaid by explicit flags."""
    cmd = args.command
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[cmd])
    allowed = set(cfg)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        data.pop("command", None)
        if "model" in data:
            data["family"] = data.pop("model")
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(data)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    cfg["alpha"] = _alpha(cfg["alpha"])
    if cfg["gauge"] is not None:
        cfg["gauge"] = {"complex": "complex_phase", "real": "real_orthogonal"}.get(cfg["gauge"], cfg["gauge"])
    cfg["command"] = cmd
    return cfg


def _spec(cfg):
    kwargs = {"family": cfg["family"], "n": cfg["n"], "alpha": tuple(cfg["alpha"]), "mass": cfg["mass"]}
    if cfg.get("radius") is not None:
        kwargs["radius"] = cfg["radius"]
    return ModelSpec(**kwargs)


def _default_out(cfg, ext):
    return cfg["out"] or f"{cfg['command'].replace('-', '_')}.{ext}"


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


def cmd_bands(cfg):
    from .slab import SLAB_CSV_HEADER, slab_rows, slab_spectrum
    from .qgt import write_csv
    spec = _spec(cfg)
    open_axis, sweep_axis = cfg["open_axis"], cfg["sweep_axis"]
    fixed = {}
    for ax in ("x", "y", "z"):
        if ax not in (open_axis, sweep_axis):
            fixed["k" + ax] = cfg["kz"] if ax == "z" else cfg["kx"] if ax == "x" else 0.0
    sweep = np.linspace(-np.pi, np.pi, int(cfg["points"]))
    spectra = slab_spectrum(spec, open_axis, cfg["ny"], fixed, sweep_axis, sweep)
    out = _default_out(cfg, "csv")
    write_csv(out, SLAB_CSV_HEADER, slab_rows(spectra, sweep_axis))
    return out, {"states": len(spectra) * 4 * int(cfg["ny"])}


def cmd_invariants(cfg):
    from . import topology as T
    spec = _spec(cfg)
    payload = {"model": spec.to_dict(), "kz": cfg["kz"]}
    if spec.is_sphere:
        grid = _grid(cfg["grid"], sphere=True) if cfg["grid"] != "201" else (200, 400)
        payload["charge"] = {m: T.monopole_charge(spec, grid, m).value for m in T.EULER_METHODS}
        payload["grid"] = list(grid)
    else:
        grid = _grid(cfg["grid"])
        chern = {key: T.chern_number(spec, cfg["kz"], grid, m).value
                 for key, m in (("curvature", "curvature_sum"), ("metric", "metric_sign"),
                                ("plaquette", "plaquette_oracle"))}
        payload["chern"] = chern
        payload["euler"] = ({key: T.euler_class(spec, cfg["kz"], grid, m).value
                             for key, m in (("curvature", "curvature_sum"), ("metric", "metric_sign"))}
                            if spec.is_c2t else None)
        payload["winding"] = T.wilson_spectrum(spec, cfg["kz"]).winding
        payload["grid"] = [grid, grid]
    out = _default_out(cfg, "json")
    _write_json(out, payload)
    return out, payload


def cmd_qgt_map(cfg):
    from .qgt import QGT_CSV_HEADER, qgt_map_rows, write_csv
    spec = _spec(cfg)
    out = _default_out(cfg, "csv")
    write_csv(out, QGT_CSV_HEADER, qgt_map_rows(spec, cfg["kz"], _grid(cfg["grid"]), cfg["gauge"]))
    return out, {}


def cmd_wilson(cfg):
    from . import topology as T
    from .qgt import write_csv
    spec = _spec(cfg)
    res = T.wilson_spectrum(spec, cfg["kz"], cfg["n_kx"], cfg["n_ky"])
    rows = []
    for i, kx in enumerate(res.kx_samples):
        theta = float(res.transition[i]) if res.transition is not None else ""
        rows.append([float(kx), float(res.eigenphases[i, 0]), float(res.eigenphases[i, 1]), theta])
    out = _default_out(cfg, "csv")
    write_csv(out, ["kx", "phase_1", "phase_2", "theta"], rows)
    return out, {"winding": res.winding}


def cmd_sweep(cfg):
    from . import topology as T
    from .qgt import write_csv
    spec = _spec(cfg)
    masses = T.default_masses(cfg["mass_min"], cfg["mass_max"], cfg["mass_step"])
    rows = T.phase_sweep(spec, masses, cfg["kz"], _grid(cfg["grid"]))
    out = _default_out(cfg, "csv")
    write_csv(out, ["mass", "value", "rounded"], rows)
    return out, {"transitions": T.transitions(rows)}


def cmd_dynamics(cfg):
    from . import dynamics as D
    spec = _spec(cfg)
    if spec.is_sphere:
        grid = _grid(cfg["grid"], sphere=True) if cfg["grid"] else (24, 6)
        radius = cfg["radius"] if cfg["radius"] is not None else 1.0
        res = D.dynamic_invariant(spec, grid, cfg["v"], cfg["observable"], cfg["dt"], radius)
        payload = {"model": spec.to_dict(), "observable": res.observable, "v": res.v, "dt": cfg["dt"],
                   "grid": list(res.grid), "radius": radius, "value": res.value, "rounded": res.rounded,
                   "gauge": spec.default_gauge}
        out = cfg["out"] or "dynamics.json"
        _write_json(out, payload)
        return out, payload
    grid = _grid(cfg["grid"]) if cfg["grid"] else 41
    v = cfg["v"] if cfg["v"] is not None else 0.1
    extract = D.extract_berry if cfg["observable"] == "berry" else D.extract_metric
    dmap = extract(spec, cfg["kz"], grid, v, cfg["component"], dt=cfg["dt"], gauge=cfg["gauge"])
    rows = D.map_rows(dmap)
    out = cfg["out"] or "dynamics.csv"
    D.write_map_csv(out, rows)
    ok, worst, count = D.map_agreement(dmap)
    return out, {"v": v, "grid": grid, "gauge": dmap.meta["gauge"], "within_5pct": ok,
                 "worst_ratio": worst, "compared_points": count}


def cmd_selfcheck(cfg):
    from . import clifford as C
    from . import models as M
    from . import qgt as Q
    rng = np.random.default_rng(0)
    ns = int(cfg["samples"])
    checks = {}
    cset = C.build_clifford_set()
    checks["anticommutators"] = C.anticommutator_check(cset) == 0.0
    checks["model_triples"] = max(C.anticommutator_check(C.CP_GAMMAS), C.anticommutator_check(C.C2T_GAMMAS)) == 0.0
    ks = rng.uniform(-np.pi, np.pi, (ns, 3))
    worst = 0.0
    for fam in ("cp_lattice", "c2t_lattice"):
        for n in (1, 2):
            spec = ModelSpec(fam, n=n)
            worst = max(worst, C.check_global_degeneracy(lambda k: M.hamiltonian(spec, k), ks))
    checks["global_degeneracy"] = worst < 1e-12
    trace_err = det_err = 0.0
    for fam in ("cp_lattice", "c2t_lattice"):
        spec = ModelSpec(fam)
        geo = Q.geometry_grid(spec, ks, 0, 1)
        trace_err = max(trace_err, float(np.max(np.abs(geo["tr_g"][:, 1] - Q.unit_metric(spec, ks, 0, 1)))))
        lhs = np.sqrt(np.maximum(geo["det_g_mat"], 0.0))
        det_err = max(det_err, float(np.max(np.abs(lhs - np.abs(geo["solid"])))))
    checks["trace_identity"] = trace_err < 1e-8
    checks["determinant_relation"] = det_err < 1e-8
    mismatched = sorted(f"{a}{b}" for (a, b), entry in C.COMMUTATOR_TABLE.items()
                        if np.max(np.abs(cset.comm[(a, b)] - C.table_matrix(entry))) > 0)
    payload = {"checks": checks, "passed": all(checks.values()),
               "info": {"printed_commutator_entries_differing_from_computed": mismatched,
                        "backend": _kernels.backend()}}
    out = _default_out(cfg, "json")
    _write_json(out, payload)
    if not payload["passed"]:
        raise NumericalError(f"selfcheck failed: {[k for k, v in checks.items() if not v]}")
    return out, payload


HANDLERS = {"bands": cmd_bands, "invariants": cmd_invariants, "qgt-map": cmd_qgt_map,
            "wilson": cmd_wilson, "sweep": cmd_sweep, "dynamics": cmd_dynamics,
            "selfcheck": cmd_selfcheck}


def dispatch(cfg):
    """Run one resolved configuration; returns (output path, summary dict)."""
    if cfg.get("threads"):
        _kernels.set_threads(cfg["threads"])
    t0 = time.perf_counter()
    out, summary = HANDLERS[cfg["command"]](cfg)
    manifest = {"config": cfg, "version": __version__, "backend": _kernels.backend(),
                "wall_time_s": time.perf_counter() - t0, "output": out, "summary": summary}
    _write_json(out + ".manifest.json", manifest)
    return out, summary


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out, summary = dispatch(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps({"output": out, "summary": summary}, default=_jsonable, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
