"""Command line entry point: one subcommand per reconstruction stage, plus ``pipeline``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dynamic import (InexactnessMap, add_uniform_noise, compute_inexactness, forward_dynamic,
                      noise_level_from_blank)
from .errors import ContractViolation, HybridCTError
from .fbp import FbpConfig, dynamic_fbp
from .geometry import ImageGrid, RectanglePhantom, make_rectangle_phantom, relative_l2_error
from .io import export_png, read_image, read_sinogram, write_image, write_sinogram
from .landmarks import detect_rectangle_corners, match_corner_correspondence
from .motion import AffineMotion
from .pipeline import PipelineConfig, PipelineStageError, landmark_motion, run_hybrid_pipeline
from .radon import ScanGeometry, forward_static
from .resesop import ResesopConfig, resesop_kaczmarz


def _read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2))


def _read_corners(path) -> np.ndarray:
    return np.asarray(_read_json(path)["corners"], dtype=float)


def save_inexactness(path, m: InexactnessMap) -> None:
    np.savez(path, eta=m.eta, delta=m.delta, rho=m.rho, p=m.geometry.p, q=m.geometry.q)


def load_inexactness(path) -> InexactnessMap:
    with np.load(path) as z:
        geom = ScanGeometry(int(z["p"]), int(z["q"]))
        return InexactnessMap(geom, z["eta"], z["delta"], float(z["rho"]))


def _parse_blank(spec: str) -> slice:
    lo, _, hi = spec.partition(":")
    return slice(int(lo) if lo else None, int(hi) if hi else None)


# --- subcommands -------------------------------------------------------------

def cmd_phantom(a):
    spec = RectanglePhantom(tuple(a.center), tuple(a.half_extents), a.rotation, a.intensity)
    img, corners = make_rectangle_phantom(ImageGrid(a.n), spec)
    write_image(a.out, img)
    if a.corners:
        _write_json(a.corners, {"corners": corners.tolist()})
    if a.png:
        export_png(img, a.png)


def cmd_forward(a):
    img = read_image(a.image)
    geom = ScanGeometry(a.p, a.q)
    if a.mode == "static":
        sino = forward_static(img, geom)
    else:
        if not a.motion:
            raise ContractViolation("dynamic forward projection needs --motion")
        sino = forward_dynamic(img, AffineMotion.from_dict(_read_json(a.motion)), geom)
    write_sinogram(a.out, sino)


def cmd_noise(a):
    write_sinogram(a.out, add_uniform_noise(read_sinogram(a.sinogram), a.amplitude, a.seed))


def cmd_inexactness(a):
    dyn = read_sinogram(a.dynamic)
    ref = read_sinogram(a.static)
    bound = a.noise_bound
    if a.blank_columns:
        bound = noise_level_from_blank(dyn, _parse_blank(a.blank_columns))
    if bound is None:
        raise ContractViolation("give --noise-bound or --blank-columns")
    save_inexactness(a.out, compute_inexactness(dyn, ref, bound, a.rho))


def cmd_resesop(a):
    sino = read_sinogram(a.sinogram)
    geom = sino.geometry
    inexact = load_inexactness(a.inexactness) if a.inexactness else InexactnessMap.exact(geom)
    cfg = ResesopConfig(tau=a.tau, max_full_iterations=a.iterations,
                        nonnegativity=not a.no_nonnegativity)
    img, rep = resesop_kaczmarz(sino, inexact, geom, ImageGrid(a.n), cfg)
    write_image(a.out, img)
    if a.report:
        d = {k: v for k, v in vars(rep).items() if k != "stopped"}
        _write_json(a.report, d)


def cmd_landmarks(a):
    corners = detect_rectangle_corners(read_image(a.image))
    if a.match_to:
        corners = match_corner_correspondence(_read_corners(a.match_to), corners)
    _write_json(a.out, {"corners": corners.tolist()})


def cmd_estimate_motion(a):
    motion, landmark_map = landmark_motion(_read_corners(a.start), _read_corners(a.end), a.N,
                                           shift_only=a.shift_only)
    _write_json(a.out, {**motion.to_dict(), "landmark_map": landmark_map})


def cmd_dynfbp(a):
    sino = read_sinogram(a.sinogram)
    if a.motion:
        motion = AffineMotion.from_dict(_read_json(a.motion))
    else:
        motion = AffineMotion.identity(sino.geometry.p)
    img = dynamic_fbp(sino, motion, FbpConfig(gamma=a.gamma, n_pix_out=a.n_out))
    write_image(a.out, img)
    if a.png:
        export_png(img, a.png)


def cmd_png(a):
    export_png(read_image(a.image), a.out)


def cmd_compare(a):
    img, ref = read_image(a.image), read_image(a.reference)
    mask = ref.grid.disk_mask() if a.disk else None
    print(json.dumps({"relative_l2_error": relative_l2_error(img, ref, mask)}))


def cmd_pipeline(a):
    cfg = PipelineConfig(
        phantom=RectanglePhantom(tuple(a.center), tuple(a.half_extents), a.rotation, a.intensity),
        synthesis_grid=a.synthesis_grid, coarse_grid=a.coarse_grid, fbp_grid=a.fbp_grid,
        p=a.p, q=a.q, shift_pixels=tuple(a.shift_pixels),
        matrix=None if a.matrix is None else ((a.matrix[0], a.matrix[1]), (a.matrix[2], a.matrix[3])),
        noise=a.noise, tau=a.tau, coarse_iterations=a.coarse_iterations,
        baseline_iterations=a.baseline_iterations, gamma=a.gamma, seed=a.seed,
        allow_inverse_crime=a.allow_inverse_crime, run_baselines=not a.no_baselines)
    res = run_hybrid_pipeline(cfg, out_dir=a.out_dir)
    print(json.dumps(res.report.to_dict(), indent=2))
    if res.report.failed_stage:
        raise PipelineStageError(res.report.failed_stage, RuntimeError("; ".join(res.report.notes)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridct", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def phantom_args(p):
        p.add_argument("--center", type=float, nargs=2, default=(0.1, 0.1))
        p.add_argument("--half-extents", type=float, nargs=2, default=(0.3, 0.2))
        p.add_argument("--rotation", type=float, default=0.0)
        p.add_argument("--intensity", type=float, default=1.0)

    p = sub.add_parser("phantom", help="rasterize a rectangle phantom")
    p.add_argument("--n", type=int, default=512)
    phantom_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--corners", help="write ground-truth corners (JSON)")
    p.add_argument("--png")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", help="static or dynamic sinogram of an image")
    p.add_argument("--image", required=True)
    p.add_argument("--mode", choices=("static", "dynamic"), default="static")
    p.add_argument("--motion", help="motion JSON {A, b, N}")
    p.add_argument("--p", type=int, default=450)
    p.add_argument("--q", type=int, default=150)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("noise", help="add seeded uniform noise")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--amplitude", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("inexactness", help="per-ray model error |dynamic - static|")
    p.add_argument("--dynamic", required=True)
    p.add_argument("--static", required=True)
    p.add_argument("--noise-bound", type=float)
    p.add_argument("--blank-columns", help="estimate the noise bound from offset columns lo:hi")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--out", required=True, help=".npz output")
    p.set_defaults(func=cmd_inexactness)

    p = sub.add_parser("resesop", help="RESESOP-Kaczmarz reconstruction")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--inexactness", help=".npz from the inexactness command (default: exact)")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--tau", type=float, default=1.00001)
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--no-nonnegativity", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_resesop)

    p = sub.add_parser("landmarks", help="detect the four rectangle corners")
    p.add_argument("--image", required=True)
    p.add_argument("--match-to", help="reorder corners to match this corners JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_landmarks)

    p = sub.add_parser("estimate-motion", help="motion from start/end corners")
    p.add_argument("--start", required=True)
    p.add_argument("--end", required=True)
    p.add_argument("--N", type=int, required=True, help="number of time points (= angles)")
    p.add_argument("--shift-only", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate_motion)

    p = sub.add_parser("dynfbp", help="dynamic filtered backprojection")
    p.add_argument("--sinogram", required=True)
    p.add_argument("--motion", help="motion JSON (default: identity, i.e. static FBP)")
    p.add_argument("--n-out", type=int, default=487)
    p.add_argument("--gamma", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--png")
    p.set_defaults(func=cmd_dynfbp)

    p = sub.add_parser("png", help="export an image file as 8-bit PNG")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_png)

    p = sub.add_parser("compare", help="relative L2 error between two images")
    p.add_argument("--image", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--disk", action="store_true", help="restrict to the unit disk")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run the full hybrid method and baselines")
    phantom_args(p)
    p.add_argument("--synthesis-grid", type=int, default=512)
    p.add_argument("--coarse-grid", type=int, default=128)
    p.add_argument("--fbp-grid", type=int, default=487)
    p.add_argument("--p", type=int, default=450)
    p.add_argument("--q", type=int, default=150)
    p.add_argument("--shift-pixels", type=float, nargs=2, default=(51.0, 51.0))
    p.add_argument("--matrix", type=float, nargs=4, metavar=("A11", "A12", "A21", "A22"))
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--tau", type=float, default=1.00001)
    p.add_argument("--coarse-iterations", type=int, default=3)
    p.add_argument("--baseline-iterations", type=int, default=30)
    p.add_argument("--gamma", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-inverse-crime", action="store_true")
    p.add_argument("--no-baselines", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except PipelineStageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 2
    except (HybridCTError, OSError) as exc:
        print(f"error [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
