import argparse
import json
import logging

SCALES = {
    # full experiment: 512 synthesis grid, 450 angles, 301 offsets, 487 output grid
    "full": dict(synthesis_grid=512, coarse_grid=128, fbp_grid=487, p=450, q=150),
    # halved: runs in seconds on one core
    "desk": dict(synthesis_grid=256, coarse_grid=128, fbp_grid=243, p=300, q=100),
}


def parser(description: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--scale", choices=sorted(SCALES), default="desk")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", help="write images, sinograms and report.json here")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def summarize(rep) -> None:
    print(json.dumps({"errors": rep.errors, "true_motion": rep.true_motion,
                      "estimated_motion": rep.estimated_motion,
                      "shift_error_pixels": rep.shift_error_pixels,
                      "hybrid_seconds": rep.hybrid_seconds,
                      "baseline_resesop_seconds": rep.timings.get("baseline_resesop"),
                      "failed_stage": rep.failed_stage}, indent=2))


def setup_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)
