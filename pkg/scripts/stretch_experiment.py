"""Stretch of the rectangle by diag(2, 1) over the scan."""
from _common import SCALES, parser, setup_logging, summarize

from hybridct.geometry import RectanglePhantom
from hybridct.pipeline import PipelineConfig, run_hybrid_pipeline


def main():
    ap = parser(__doc__)
    ap.add_argument("--factor", type=float, default=2.0, help="end-state stretch along x1")
    a = ap.parse_args()
    setup_logging(a.verbose)
    # Gamma_end = diag(factor, 1) shrinks the object seen at the end by 1/factor in x1,
    # so a small centred rectangle stays inside the disk
    cfg = PipelineConfig(phantom=RectanglePhantom((0.0, 0.0), (0.3, 0.2)), shift_pixels=(0.0, 0.0),
                         matrix=((a.factor, 0.0), (0.0, 1.0)), seed=a.seed, **SCALES[a.scale])
    rep = run_hybrid_pipeline(cfg, out_dir=a.out_dir).report
    summarize(rep)
    if rep.landmark_map:
        print("landmark map A (end = A start + b):", rep.landmark_map["A"])


if __name__ == "__main__":
    main()
