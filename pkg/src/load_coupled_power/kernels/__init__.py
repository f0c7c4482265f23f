"""Numerical kernels: special functions and guarded bisection."""

from .bisection import Bracket, bisect_monotone, expand_bracket
from .special import log_u_eval, u_eval, u_inv, u_inv_log, w_eval, w_inv

__all__ = [
    "Bracket",
    "bisect_monotone",
    "expand_bracket",
    "log_u_eval",
    "u_eval",
    "u_inv",
    "u_inv_log",
    "w_eval",
    "w_inv",
]
