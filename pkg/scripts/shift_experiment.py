"""Diagonal shift of a rectangle: hybrid reconstruction against its baselines."""
from _common import SCALES, parser, setup_logging, summarize

from hybridct.pipeline import PipelineConfig, run_hybrid_pipeline


def main():
    ap = parser(__doc__)
    ap.add_argument("--shift", type=float, nargs=2, help="pixels on the synthesis grid")
    a = ap.parse_args()
    setup_logging(a.verbose)
    scale = SCALES[a.scale]
    default = (51.0, 51.0) if a.scale == "full" else (26.0, 26.0)
    shift = tuple(a.shift) if a.shift else default
    cfg = PipelineConfig(shift_pixels=shift, seed=a.seed, **scale)
    summarize(run_hybrid_pipeline(cfg, out_dir=a.out_dir).report)


if __name__ == "__main__":
    main()
