"""Hybrid dynamic CT reconstruction for affine motion.

Coarse RESESOP-Kaczmarz reconstructions of the start and end states, landmark
based motion estimation, then dynamic filtered backprojection.
"""
from .dynamic import (InexactnessMap, add_uniform_noise, compute_inexactness, forward_dynamic,
                      dynamic_ray_integral)
from .fbp import FbpConfig, dynamic_fbp, filter_sinogram, backproject_filtered, kernel_value, static_fbp
from .geometry import (Image, ImageGrid, RectanglePhantom, make_disk_phantom,
                       make_rectangle_phantom, pixel_center, relative_l2_error)
from .landmarks import detect_rectangle_corners, match_corner_correspondence
from .motion import (AffineMotion, estimate_affine_motion, h_of_theta, motion_at_time,
                     motion_inverse_apply)
from .pipeline import ComparisonReport, PipelineConfig, run_hybrid_pipeline
from .radon import (ScanGeometry, Sinogram, adjoint_row_apply, backproject_static, forward_static,
                    ray_integral, ray_row_norm)
from .resesop import (ResesopConfig, ResesopReport, StripeParams, project_stripe_single,
                      project_two_stripes, resesop_kaczmarz)
from .special import dawson

__version__ = "0.1.0"
