"""Deterministic self-similar sequences with a prescribed inversion ratio.

A sequence of exact height ``h`` is assembled as ``s1 || invert(s2) || s1``
where ``s1`` has height ``a`` and ``s2`` has height ``c ~= alpha*h``, so every
scale carries an opposite-sign excursion of relative size ``alpha``.  The
deviation of the result grows like ``t**theta`` where ``theta`` solves

    2*((1+alpha)/2)**(1/theta) + alpha**(1/theta) = 1

which :func:`solve_theta` computes by bisection.  :func:`fractal_length`
evaluates the length recurrence without materializing anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .sequences import BitSequence

__all__ = [
    "ALPHA_MAX",
    "BASE_HEIGHT",
    "FractalParams",
    "solve_theta",
    "theta_residual",
    "part_heights",
    "build_fractal",
    "fractal_length",
    "split_points",
    "measured_exponent",
]

ALPHA_MAX = 0.5
BASE_HEIGHT = 4
_THETA_TOL = 1e-10


def theta_residual(alpha: float, theta: float) -> float:
    """Value of ``2*((1+alpha)/2)**(1/theta) + alpha**(1/theta) - 1``."""
    x = 1.0 / theta
    return 2.0 * ((1.0 + alpha) / 2.0) ** x + alpha**x - 1.0


def solve_theta(alpha: float) -> float:
    """Deviation exponent for inversion ratio ``alpha``.

    The defining equation has a unique root because the left side is strictly
    decreasing in ``1/theta``; we bisect on ``x = 1/theta`` over [1, 64],
    which brackets the root for every ``alpha <= 1/2``.
    """
    if not (0.0 <= alpha <= ALPHA_MAX):
        raise ConfigurationError(f"alpha must lie in [0, {ALPHA_MAX}], got {alpha}")
    if alpha == 0.0:
        return 1.0

    def f(x: float) -> float:
        return 2.0 * ((1.0 + alpha) / 2.0) ** x + alpha**x - 1.0

    lo, hi = 1.0, 64.0
    assert f(lo) >= 0.0 and f(hi) < 0.0
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    theta = 1.0 / x
    assert abs(theta_residual(alpha, theta)) < _THETA_TOL
    return theta


@dataclass(frozen=True)
class FractalParams:
    """Inversion ratio, target height, and the derived deviation exponent."""

    alpha: float
    target_height: int
    theta: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= ALPHA_MAX):
            raise ConfigurationError(f"alpha must lie in (0, {ALPHA_MAX}], got {self.alpha}")
        if not isinstance(self.target_height, int) or self.target_height < 1:
            raise ConfigurationError(f"target_height must be a positive integer, got {self.target_height}")
        if self.theta is None:
            object.__setattr__(self, "theta", solve_theta(self.alpha))
        elif abs(theta_residual(self.alpha, self.theta)) >= _THETA_TOL:
            raise ConfigurationError(
                f"theta={self.theta} does not solve the exponent equation for alpha={self.alpha}"
            )


def part_heights(height: int, alpha: float) -> tuple[int, int]:
    """Heights ``(a, c)`` of the outer copies and the inverted middle part.

    ``c`` is ``ceil(alpha*height)`` lifted to the parity of ``height`` so
    that the outer parts can be identical: the total is ``2a - c = height``
    exactly.  Requires ``height > BASE_HEIGHT``.
    """
    c = math.ceil(alpha * height)
    if (height + c) % 2:
        c += 1
    a = (height + c) // 2
    assert 0 < c < height and a < height
    return a, c


def _render(height: int, alpha: float, cache: dict[int, np.ndarray]) -> np.ndarray:
    got = cache.get(height)
    if got is not None:
        return got
    if height <= BASE_HEIGHT:
        arr = np.ones(height, dtype=np.int8)
    else:
        a, c = part_heights(height, alpha)
        s1 = _render(a, alpha, cache)
        s2 = _render(c, alpha, cache)
        arr = np.concatenate([s1, -s2, s1])
    cache[height] = arr
    return arr


def build_fractal(params: FractalParams) -> BitSequence:
    """Materialize the fractal sequence of exact height ``params.target_height``."""
    seq = BitSequence(_render(params.target_height, params.alpha, {}))
    assert seq.height() == params.target_height
    return seq


def fractal_length(params: FractalParams) -> int:
    """Length of :func:`build_fractal` output via the recurrence L(h) = 2L(a) + L(c)."""
    memo: dict[int, int] = {}

    def length(h: int) -> int:
        if h <= BASE_HEIGHT:
            return h
        got = memo.get(h)
        if got is None:
            a, c = part_heights(h, params.alpha)
            got = memo[h] = 2 * length(a) + length(c)
        return got

    return length(params.target_height)


def split_points(params: FractalParams) -> tuple[int, int] | None:
    """Top-level boundaries ``(i, j)``: ``seq[:i]`` and ``seq[j:]`` are the identical
    outer copies, ``seq[i:j]`` the inverted middle.  ``None`` below the base threshold."""
    h = params.target_height
    if h <= BASE_HEIGHT:
        return None
    a, c = part_heights(h, params.alpha)
    la = fractal_length(FractalParams(params.alpha, a, params.theta))
    lc = fractal_length(FractalParams(params.alpha, c, params.theta))
    return la, la + lc


def measured_exponent(params: FractalParams) -> float:
    """``log L / log h`` for the built length; approaches ``1/theta`` for large heights."""
    if params.target_height < 2:
        raise ConfigurationError("exponent needs target_height >= 2")
    return math.log(fractal_length(params)) / math.log(params.target_height)
