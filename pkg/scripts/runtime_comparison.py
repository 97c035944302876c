"""Wall clock of the hybrid path against 30-sweep RESESOP, both at 128x128."""
from _common import SCALES, parser, setup_logging

from hybridct.pipeline import PipelineConfig, run_hybrid_pipeline, warmup


def main():
    ap = parser(__doc__)
    ap.add_argument("--repeats", type=int, default=3)
    a = ap.parse_args()
    setup_logging(a.verbose)
    scale = dict(SCALES[a.scale], fbp_grid=128)
    shift = (51.0, 51.0) if a.scale == "full" else (26.0, 26.0)
    warmup()
    for r in range(a.repeats):
        rep = run_hybrid_pipeline(PipelineConfig(shift_pixels=shift, seed=a.seed, **scale)).report
        base = rep.timings["baseline_resesop"]
        print(f"run {r}: hybrid {rep.hybrid_seconds:.2f}s  resesop-30 {base:.2f}s  "
              f"ratio {rep.hybrid_seconds / base:.3f}")
        for k, v in rep.timings.items():
            print(f"    {k:22s} {v:.3f}s")


if __name__ == "__main__":
    main()
