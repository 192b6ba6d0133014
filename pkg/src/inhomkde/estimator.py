"""Fixed and variable bandwidth kernel density estimates.

Evaluation uses the sorted sample: for each point ``x`` only observations in
``[x - R h, x + R h]`` are visited (``R`` the kernel support radius), found by
binary search. Polynomial kernels and the Gaussian comparator run through a
compiled loop; other kernels fall back to a chunked numpy path.

No boundary correction is applied. Estimates within one bandwidth of the
edge of the density's support are biased, as for any plain kernel estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numba
import numpy as np
from scipy import integrate

from .kernel import Kernel

__all__ = [
    "Sample",
    "EvaluationGrid",
    "load_sample",
    "write_sample",
    "fixed_estimate",
    "estimate_many",
    "naive_estimate",
    "variable_estimate",
    "convolve_density",
]

# windows larger than this are summed with Neumaier compensation
COMPENSATED_THRESHOLD = 100_000


class Sample:
    """Sorted, finite, read-only one-dimensional sample."""

    def __init__(self, values):
        arr = np.array(values, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("sample is empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        arr.sort(kind="stable")
        arr.setflags(write=False)
        self.values = arr

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"Sample(n={self.n}, range=[{self.values[0]:.4g}, {self.values[-1]:.4g}])"


def load_sample(path) -> Sample:
    """Read one float per line. Blank lines and ``#`` comments are ignored."""
    values = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {s!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"{path}:{lineno}: non-finite value {s!r}")
        values.append(v)
    return Sample(values)


def write_sample(values: Iterable[float], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in values:
            fh.write(f"{float(v)!r}\n")


@dataclass(frozen=True)
class EvaluationGrid:
    points: np.ndarray
    interval: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        c, d = map(float, self.interval)
        if pts.size < 2:
            raise ValueError("evaluation grid needs at least 2 points")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("evaluation grid must be strictly increasing")
        if pts[0] < c or pts[-1] > d:
            raise ValueError("evaluation grid points must lie inside the interval")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "interval", (c, d))

    @classmethod
    def uniform(cls, c: float, d: float, m: int, extra: Sequence[float] = ()) -> "EvaluationGrid":
        """``m`` equispaced points on ``[c, d]`` plus any ``extra`` points inside it."""
        pts = np.linspace(c, d, m)
        extra = [e for e in extra if c <= e <= d]
        if extra:
            pts = np.unique(np.concatenate([pts, extra]))
        return cls(pts, (c, d))

    def __len__(self):
        return self.points.size


# ---------------------------------------------------------------------------
# compiled window sums
# ---------------------------------------------------------------------------

_POLY = 0
_GAUSS = 1


@numba.njit(cache=True)
def _kernel_value(u, kind, coeffs):
    if kind == _POLY:
        if abs(u) > 1.0:
            return 0.0
        acc = 0.0
        for k in range(coeffs.size - 1, -1, -1):
            acc = acc * u + coeffs[k]
        return acc
    if abs(u) > 8.0:
        return 0.0
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


@numba.njit(cache=True)
def _window_sums(values, xs, hs, lo, hi, kind, coeffs, threshold):
    out = np.empty(xs.size)
    for i in range(xs.size):
        x = xs[i]
        h = hs[i]
        s = 0.0
        if hi[i] - lo[i] > threshold:
            c = 0.0
            for j in range(lo[i], hi[i]):
                t = _kernel_value((values[j] - x) / h, kind, coeffs)
                y = s + t
                if abs(s) >= abs(t):
                    c += (s - y) + t
                else:
                    c += (t - y) + s
                s = y
            s += c
        else:
            for j in range(lo[i], hi[i]):
                s += _kernel_value((values[j] - x) / h, kind, coeffs)
        out[i] = s
    return out


def _windows(values, xs, reach):
    lo = np.searchsorted(values, xs - reach, side="left")
    hi = np.searchsorted(values, xs + reach, side="right")
    return lo, hi


def _numpy_window_sums(kernel, values, xs, hs, lo, hi, chunk=1 << 21):
    out = np.zeros(xs.size)
    counts = hi - lo
    start = 0
    while start < xs.size:
        # group consecutive points so that each chunk gathers at most `chunk` terms
        cum = np.cumsum(counts[start:])
        stop = start + max(1, int(np.searchsorted(cum, chunk, side="right")))
        c = counts[start:stop]
        total = int(c.sum())
        if total:
            owner = np.repeat(np.arange(start, stop), c)
            offsets = np.arange(total) - np.repeat(np.cumsum(c) - c, c)
            idx = lo[owner] + offsets
            k = kernel.evaluate((values[idx] - xs[owner]) / hs[owner])
            nz = c > 0
            sums = np.add.reduceat(k, (np.cumsum(c) - c)[nz])
            out[np.arange(start, stop)[nz]] = sums
        start = stop
    return out


def _check_bandwidths(hs, xs, allow_above_one):
    bad = ~(hs > 0) if allow_above_one else ~((hs > 0) & (hs <= 1))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(f"bandwidth {float(hs[i])!r} at x={float(xs[i])!r} is outside (0, 1]")


def estimate_many(sample: Sample, kernel: Kernel, h, xs, *, allow_above_one: bool = False) -> np.ndarray:
    """Evaluate ``fhat_h(x)`` at every ``x`` in ``xs``; ``h`` is a scalar or one value per point.

    Bandwidths above one are rejected unless ``allow_above_one`` is set (the
    Gaussian comparator can legitimately exceed it).
    """
    if sample.n == 0:
        raise ValueError("sample is empty")
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(xs, dtype=float)))
    hs = np.ascontiguousarray(np.broadcast_to(np.asarray(h, dtype=float), xs.shape), dtype=float)
    _check_bandwidths(hs, xs, allow_above_one)
    values = sample.values
    lo, hi = _windows(values, xs, kernel.radius * hs)
    if kernel.coeffs is not None and kernel.radius == 1.0:
        sums = _window_sums(values, xs, hs, lo, hi, _POLY, np.asarray(kernel.coeffs, dtype=float),
                            COMPENSATED_THRESHOLD)
    elif kernel.name == "gaussian" and kernel.comparator_only:
        sums = _window_sums(values, xs, hs, lo, hi, _GAUSS, np.zeros(1), COMPENSATED_THRESHOLD)
    else:
        sums = _numpy_window_sums(kernel, values, xs, hs, lo, hi)
    return sums / (sample.n * hs)


def fixed_estimate(sample: Sample, kernel: Kernel, h: float, x: float) -> float:
    """``fhat_h(x) = n^-1 sum_i K_h(X_i - x)`` summed over the window around ``x`` only."""
    return float(estimate_many(sample, kernel, h, [x])[0])


def naive_estimate(sample: Sample, kernel: Kernel, h: float, x: float) -> float:
    """Reference O(n) full-sum evaluation."""
    v = np.asarray(sample.values)
    return float(np.sum(kernel.evaluate((v - x) / h)) / (v.size * h))


def variable_estimate(sample: Sample, kernel: Kernel, hfun: Callable, grid) -> np.ndarray:
    """Estimate with a bandwidth depending on the evaluation point.

    ``hfun`` may be vectorised or scalar; it is applied to each grid point.
    """
    xs = grid.points if isinstance(grid, EvaluationGrid) else np.asarray(grid, dtype=float)
    try:
        hs = np.asarray(hfun(xs), dtype=float)
        if hs.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        # scalar-only callable
        hs = np.array([float(hfun(x)) for x in xs])
    return estimate_many(sample, kernel, hs, xs)


def convolve_density(pdf: Callable, kernel: Kernel, h: float, x: float,
                     points: Optional[Sequence[float]] = None, tol: float = 1e-11) -> float:
    """``f_h(x) = int K(u) f(x + u h) du`` by adaptive quadrature.

    ``points`` are locations where ``pdf`` is not smooth; the integral is split
    there (and at the kernel's own break points).
    """
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    r = kernel.radius
    edges = set(kernel.pieces.tolist())
    for p in points or ():
        u = (p - x) / h
        # a split within rounding distance of an edge only yields a degenerate interval
        if -r < u < r and min(abs(u - e) for e in edges) > 1e-12:
            edges.add(u)
    edges = sorted(edges)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda u: float(kernel.evaluate(u)) * float(pdf(x + u * h)),
                                a, b, epsabs=tol, epsrel=1e-12, limit=200)
        total += val
    return total
