"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 degenerate transform, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, FresnelError
from .fockspace import TruncationSpec
from .kernels import ComplexField2D, GridSpec2D, fresnel_transform_field, kernel_eta, kernel_xi, load_field, save_field
from .optics_dsl import __doc__ as GRAMMAR_DOC
from .optics_dsl import system_matrix
from .states import state_from_dict
from .symplectic import RayMatrix, ray_to_sr

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_NUMERIC = 0, 1, 2, 3, 4

DEFAULTS = {
    "out": ".",
    "representation": "eta",
    "center": "0,0",
    "half_extent": 6.0,
    "samples": 64,
    "truncation": 24,
    "format": "csv",
    "output_half_extent": 3.0,
    "output_samples": 32,
}


class Problems:
    """Collects every configuration violation before failing once."""

    def __init__(self):
        self.items = []

    def add(self, msg):
        self.items.append(msg)

    def guard(self, fn, *args):
        try:
            return fn(*args)
        except ConfigError as exc:
            self.add(str(exc))
        except (ValueError, TypeError, KeyError) as exc:
            self.add(f"{fn.__name__}: {exc}")
        return None

    def raise_if_any(self):
        if self.items:
            raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(self.items))


def _merged(args) -> dict:
    """Config-file values overlaid by explicit flags, then defaults."""
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    merged = dict(DEFAULTS)
    merged.update(cfg)
    merged.update({k: v for k, v in vars(args).items() if v is not None and k not in ("func", "config")})
    return merged


def _pair(text) -> complex:
    if isinstance(text, (list, tuple)):
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float)):
        return complex(text)
    re_, im_ = str(text).split(",")
    return complex(float(re_), float(im_))


def _matrix(cfg) -> RayMatrix:
    if cfg.get("system") and cfg.get("abcd"):
        raise ConfigError("give either --system or --abcd, not both")
    if cfg.get("system"):
        return system_matrix(cfg["system"])
    if cfg.get("abcd") is not None:
        vals = cfg["abcd"]
        vals = [float(v) for v in (vals.split(",") if isinstance(vals, str) else vals)]
        if len(vals) != 4:
            raise ConfigError("--abcd needs four comma-separated numbers")
        return RayMatrix(*vals).check(1e-9)
    raise ConfigError("an optical system is required (--system TEXT or --abcd A,B,C,D)")


def _state(cfg):
    spec = cfg.get("state")
    if spec is None:
        raise ConfigError("a state is required (--state vacuum or a JSON state spec)")
    if isinstance(spec, str):
        spec = json.loads(spec) if spec.strip().startswith("{") else {"kind": spec.strip()}
    return state_from_dict(spec)


def _grid(cfg) -> GridSpec2D:
    return GridSpec2D(_pair(cfg["center"]), float(cfg["half_extent"]), int(cfg["samples"]))


def _truncation(cfg) -> TruncationSpec:
    return TruncationSpec(int(cfg["truncation"]))


def _out_dir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj):
    print(json.dumps(obj, indent=2))


def _c(z):
    return [float(np.real(z)) + 0.0, float(np.imag(z)) + 0.0]


# -- commands ----------------------------------------------------------------

def cmd_abcd(cfg):
    m = _matrix(cfg)
    p = ray_to_sr(m, 1e-9)
    _emit({"A": m.A, "B": m.B, "C": m.C, "D": m.D, "s": _c(p.s), "r": _c(p.r),
           "unimodularity_residual": abs(m.det - 1.0)})
    return EXIT_OK


def cmd_kernel(cfg):
    pr = Problems()
    m = pr.guard(_matrix, cfg)
    rep = cfg["representation"]
    if rep not in ("eta", "xi"):
        pr.add(f"representation must be eta or xi, got {rep!r}")
    pts = [pr.guard(_pair, cfg.get(k, "0,0")) for k in ("point_out", "point_in")]
    pr.raise_if_any()
    fn = kernel_eta if rep == "eta" else kernel_xi
    val = fn(m, pts[0], pts[1])
    _emit({"representation": rep, "value": _c(val), "modulus": abs(val)})
    return EXIT_OK


def cmd_fresnel_field(cfg):
    pr = Problems()
    m = pr.guard(_matrix, cfg)
    field = None
    if cfg.get("input"):
        if not Path(cfg["input"]).exists():
            pr.add(f"input field {cfg['input']} does not exist")
        else:
            field = pr.guard(load_field, cfg["input"])
    else:
        grid = pr.guard(_grid, cfg)
        width = float(cfg.get("gaussian", 1.0))
        if width <= 0:
            pr.add("--gaussian width must be positive")
        elif grid is not None:
            field = ComplexField2D.sample(grid, lambda z: np.exp(-np.abs(z) ** 2 / width ** 2))
    pr.raise_if_any()
    result = fresnel_transform_field(m, field, field.grid)
    path = _out_dir(cfg) / "field.csv"
    save_field(result, path)
    _emit({"files": [str(path), str(path.with_suffix(".json"))],
           "input_energy": field.energy(), "output_energy": result.energy()})
    return EXIT_OK


def cmd_wigner(cfg):
    from .wigner import PhasePoint, UniformAxis, save_wigner_grid, wigner_grid, wigner_value

    pr = Problems()
    st = pr.guard(_state, cfg)
    t = pr.guard(_truncation, cfg)
    if cfg["format"] not in ("csv", "bin"):
        pr.add(f"format must be csv or bin, got {cfg['format']!r}")
    pr.raise_if_any()
    if cfg.get("point"):
        vals = [float(v) for v in str(cfg["point"]).split(",")]
        if len(vals) != 4:
            raise ConfigError("--point needs sigma1,sigma2,gamma1,gamma2")
        pt = PhasePoint(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
        _emit({"sigma": _c(pt.sigma), "gamma": _c(pt.gamma), "W": wigner_value(st, pt, t)})
        return EXIT_OK
    ax = UniformAxis.symmetric(float(cfg["output_half_extent"]), int(cfg["output_samples"]))
    grid = wigner_grid(st, (ax,) * 4, t)
    path = save_wigner_grid(grid, _out_dir(cfg) / "wigner", cfg["format"])
    _emit({"files": [str(path)], "integral": grid.integral(), "max": float(grid.values.max())})
    return EXIT_OK


def cmd_tomogram(cfg):
    from .tomography import (
        ReconstructionParams, forward_tomogram_eta, forward_tomogram_xi, save_manifest, save_tomogram,
        tomogram_family,
    )
    from .wigner import UniformAxis

    pr = Problems()
    st = pr.guard(_state, cfg)
    grid = pr.guard(_grid, cfg)
    t = pr.guard(_truncation, cfg)
    family = cfg.get("family")
    m = None if family else pr.guard(_matrix, cfg)
    rep = cfg["representation"]
    if rep not in ("eta", "xi"):
        pr.add(f"representation must be eta or xi, got {rep!r}")
    if cfg["format"] not in ("csv", "bin"):
        pr.add(f"format must be csv or bin, got {cfg['format']!r}")
    rp = None
    if family:
        if rep != "eta":
            pr.add("angle families are written in the eta representation only")
        ax = pr.guard(UniformAxis.symmetric, float(cfg["output_half_extent"]), int(cfg["output_samples"]))
        if ax is not None:
            rp = pr.guard(ReconstructionParams, int(family), (ax,) * 4, cfg.get("r_max"))
    pr.raise_if_any()

    out = _out_dir(cfg)
    if family:
        tomos = tomogram_family(st, int(family), grid, t)
        n = int(family)
        paths = [save_tomogram(tm, out / f"tomogram_{i // n:03d}_{i % n:03d}", cfg["format"]) for i, tm in enumerate(tomos)]
        manifest = save_manifest(paths, rp, out / "manifest.json", st)
        norms = [abs(tm.normalization() - 1) for tm in tomos]
        _emit({"files": len(paths), "manifest": str(manifest),
               "normalization_residual": max(norms), "min": min(float(tm.values.min()) for tm in tomos)})
        return EXIT_OK
    tomo = (forward_tomogram_eta if rep == "eta" else forward_tomogram_xi)(st, m, grid, t)
    path = save_tomogram(tomo, out / "tomogram", cfg["format"])
    _emit({"files": [str(path)], "normalization_residual": abs(tomo.normalization() - 1),
           "min": float(tomo.values.min()), "max": float(tomo.values.max())})
    return EXIT_OK


def cmd_reconstruct(cfg):
    from .tomography import inverse_radon, l2_error, load_manifest, load_tomogram
    from .wigner import save_wigner_grid, wigner_grid

    if not cfg.get("manifest"):
        raise ConfigError("--manifest is required")
    paths, rp, state = load_manifest(cfg["manifest"])
    missing = [str(p) for p in paths if not Path(p).with_suffix(".json").exists()]
    if missing:
        raise ConfigError("missing tomogram files: " + ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else ""))
    tomos = [load_tomogram(p) for p in paths]
    rec = inverse_radon(tomos, rp, names=[str(p) for p in paths])
    out = _out_dir(cfg)
    path = save_wigner_grid(rec, out / "reconstruction", cfg["format"])
    report = {"files": [str(path)], "n_angles": rp.n_angles, "integral": rec.integral()}
    if state is not None:
        ref = wigner_grid(state_from_dict(state), rp.output_axes, _truncation(cfg))
        report["l2_error"] = l2_error(rec, ref.values)
        report["reference"] = state
    (out / "report.json").write_text(json.dumps(report, indent=2))
    _emit(report)
    return EXIT_OK


def cmd_verify(cfg):
    from .verify import run_all

    groups = cfg.get("groups")
    if isinstance(groups, str):
        groups = [g for g in groups.split(",") if g]
    results = run_all(groups, report=lambda c: print(c.line(), flush=True))
    failed = [c for c in results if not c.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


# -- parser --------------------------------------------------------------------

def _system_flags(p):
    p.add_argument("--system", help="element chain, e.g. \"free(1) lens(2)\"")
    p.add_argument("--abcd", help="ray matrix as A,B,C,D")


def _grid_flags(p):
    p.add_argument("--center", help="grid center re,im (default 0,0)")
    p.add_argument("--half-extent", dest="half_extent", type=float, help="grid half width (default 6)")
    p.add_argument("--samples", type=int, help="samples per axis, even, >= 8 (default 64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fresneltomo",
        description="Two-mode Fresnel transforms and entangled-state tomography.",
        epilog="Optical system grammar:\n" + GRAMMAR_DOC.split("Grammar", 1)[1].split("\n\n", 2)[1]
        + "\n\nExit codes: 0 ok, 1 verification failure, 2 config, 3 degenerate transform, 4 numeric.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values; flags override it")
    common.add_argument("--out", help="output directory (default .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("abcd", parents=[common], help="ray matrix and (s, r) of an optical system")
    _system_flags(p)
    p.set_defaults(func=cmd_abcd)

    p = sub.add_parser("kernel", parents=[common], help="evaluate the Fresnel kernel at one point pair")
    _system_flags(p)
    p.add_argument("--representation", choices=["eta", "xi"])
    p.add_argument("--point-out", dest="point_out", help="output label re,im")
    p.add_argument("--point-in", dest="point_in", help="input label re,im")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("fresnel-field", parents=[common], help="transform a sampled field (output on the input grid)")
    _system_flags(p)
    _grid_flags(p)
    p.add_argument("--input", help="field CSV (with JSON sidecar); default is a sampled Gaussian")
    p.add_argument("--gaussian", type=float, help="width w of the default input exp(-|eta|^2/w^2)")
    p.set_defaults(func=cmd_fresnel_field)

    for name, func, helptext in (("wigner", cmd_wigner, "Wigner function at a point or on a 4D grid"),
                                 ("tomogram", cmd_tomogram, "forward tomogram or angle family")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--state", help="vacuum | JSON spec, e.g. '{\"kind\":\"coherent\",\"z1\":[0.3,0],\"z2\":[0,-0.2]}'")
        p.add_argument("--truncation", type=int, help="per-mode Fock cutoff N (default 24)")
        p.add_argument("--format", choices=["csv", "bin"])
        p.add_argument("--output-half-extent", dest="output_half_extent", type=float,
                       help="half width of the 4D output axes (default 3)")
        p.add_argument("--output-samples", dest="output_samples", type=int, help="samples per 4D output axis (default 32)")
        p.set_defaults(func=func)
        if name == "wigner":
            p.add_argument("--point", help="sigma1,sigma2,gamma1,gamma2 (prints one value)")
        else:
            _system_flags(p)
            _grid_flags(p)
            p.add_argument("--representation", choices=["eta", "xi"])
            p.add_argument("--family", type=int, help="write the independent-angle family with this many angles per axis")
            p.add_argument("--r-max", dest="r_max", type=float, help="filter cutoff stored in the manifest")

    p = sub.add_parser("reconstruct", parents=[common], help="filtered back-projection from a manifest")
    p.add_argument("--manifest", help="manifest JSON written by 'tomogram --family'")
    p.add_argument("--format", choices=["csv", "bin"])
    p.add_argument("--truncation", type=int)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--groups", help="comma-separated subset of check groups")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(_merged(args))
    except FresnelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
