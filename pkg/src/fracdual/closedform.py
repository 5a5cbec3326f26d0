"""Closed-form radial reference solutions on balls.

For the fractional Laplacian of order s on the ball B_R, the solution of
L u = 1 with zero exterior condition is

    u(x) = gamma(n, s) (R^2 - |x|^2)_+^s,
    gamma(n, s) = Gamma(n/2) / (4^s Gamma(n/2 + s) Gamma(1 + s)),

and conversely L (R^2 - |x|^2)_+^s = 1 / gamma(n, s) inside the ball
(the Getoor identity).  These serve as independent oracles for the
convergence and consistency suites.
"""

from __future__ import annotations

import numpy as np

from .kernels import lanczos_gamma


def ball_solution_constant(n: int, s: float) -> float:
    return lanczos_gamma(n / 2.0) / (
        4.0**s * lanczos_gamma(n / 2.0 + s) * lanczos_gamma(1.0 + s)
    )


def ball_solution(n: int, s: float, radius: float = 1.0, center=None):
    """u with L^s u = 1 on the ball, as a vectorized callable on points."""
    c = np.zeros(n) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
    g = ball_solution_constant(n, s)

    def u(pts):
        pts = np.asarray(pts, dtype=float)
        if n == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts.reshape(pts.shape + (1,))
        r2 = np.sum((pts - c) ** 2, axis=-1)
        return g * np.clip(radius**2 - r2, 0.0, None) ** s

    return u


def getoor_profile(n: int, s: float, radius: float = 1.0, center=None):
    """(R^2 - |x|^2)_+^s; its image under L^s is the constant below."""
    c = np.zeros(n) if center is None else np.atleast_1d(np.asarray(center, dtype=float))

    def v(pts):
        pts = np.asarray(pts, dtype=float)
        if n == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts.reshape(pts.shape + (1,))
        r2 = np.sum((pts - c) ** 2, axis=-1)
        return np.clip(radius**2 - r2, 0.0, None) ** s

    return v


def getoor_constant(n: int, s: float) -> float:
    return 1.0 / ball_solution_constant(n, s)
