"""
padictree: exact finite-precision calculus on the p-adic ball tree (library + CLI).
"""

from .balls import Ball, ball_from_point, build_set_S, recover_from_S, sup, tangent_class
from .core import PAdic, PAdicVec, parse_padic
from .functions import LCFunction, WaveletIndex, integral, pushforward, wavelet
from .harness import ExperimentConfig, Report, run_experiment
from .morphisms import compose, make_dilation, make_isometry, parabolic_normalize
from .operators import KernelSpec, Window, kernel_op, vf_op, vladimirov

__all__ = [
    "Ball",
    "ball_from_point",
    "build_set_S",
    "recover_from_S",
    "sup",
    "tangent_class",
    "PAdic",
    "PAdicVec",
    "parse_padic",
    "LCFunction",
    "WaveletIndex",
    "integral",
    "pushforward",
    "wavelet",
    "ExperimentConfig",
    "Report",
    "run_experiment",
    "compose",
    "make_dilation",
    "make_isometry",
    "parabolic_normalize",
    "KernelSpec",
    "Window",
    "kernel_op",
    "vf_op",
    "vladimirov",
]
