"""Compactly supported kernels, their norms and moments, and variance bounds.

A :class:`Kernel` is a symmetric function on ``[-1, 1]`` integrating to one.
Kernels of order ``r`` have vanishing moments ``1 .. r-1``. Polynomial
kernels carry their coefficients so that the estimator can evaluate them in
compiled code; arbitrary vectorised callables are accepted as well.

The two variance bounds consumed by the bandwidth selector are

    v(h)^2      = M * ||K||_2^2 / (n h)
    v(h, eta)^2 = M / (n h) * int (K(u) - (h/eta) K(u h / eta))^2 du
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import optimize

__all__ = [
    "Kernel",
    "KernelNorms",
    "polynomial_kernel",
    "RECTANGULAR",
    "EPANECHNIKOV",
    "ORDER4",
    "GAUSSIAN",
    "KERNELS",
    "get_kernel",
    "eval_scaled",
    "compute_norms",
    "moment",
    "verify_order",
    "variance_bound",
    "diff_integral",
    "diff_variance_bound",
]

SIMPSON_NODES = 4097
# Gauss-Legendre nodes per piece; exact for polynomials up to degree 255
GL_NODES = 128


@dataclass(frozen=True, eq=False)
class Kernel:
    """Symmetric kernel with support in ``[-radius, radius]``.

    Parameters
    ----------
    name : str
        Identifier, used by the CLI and in reports.
    order : int
        Declared order ``r_K``.
    func : callable
        Vectorised evaluation on the *unscaled* argument. Must already be zero
        outside the support.
    coeffs : tuple of float, optional
        Ascending polynomial coefficients when the kernel is a polynomial on
        ``[-1, 1]`` (zero outside). Enables the compiled evaluation path.
    radius : float
        Half-width of the support. 1 for every proper kernel; the Gaussian
        comparator uses a truncation radius instead.
    comparator_only : bool
        Marks kernels that violate compact support and are only used for the
        fixed-bandwidth comparator.
    """

    name: str
    order: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    coeffs: Optional[tuple] = None
    radius: float = 1.0
    comparator_only: bool = False
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("kernel order must be a positive integer")
        object.__setattr__(self, "_ratio_cache", {})

    def evaluate(self, u):
        u = np.asarray(u, dtype=float)
        return self.func(u)

    __call__ = evaluate

    @cached_property
    def norms(self) -> "KernelNorms":
        return compute_norms(self)

    @cached_property
    def pieces(self) -> np.ndarray:
        """Sorted points splitting the support into pieces on which ``|K|`` is smooth."""
        return _smooth_pieces(self)


def _poly_func(coeffs):
    c = np.asarray(coeffs[::-1], dtype=float)

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, np.polyval(c, u), 0.0)

    return f


def polynomial_kernel(name: str, coeffs: Iterable[float], order: int) -> Kernel:
    """Build a kernel equal to ``sum_k coeffs[k] u**k`` on ``[-1, 1]``."""
    coeffs = tuple(float(c) for c in coeffs)
    return Kernel(name=name, order=order, func=_poly_func(coeffs), coeffs=coeffs)


def _gauss(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 8.0, np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi), 0.0)


RECTANGULAR = polynomial_kernel("rectangular", (0.5,), order=2)
EPANECHNIKOV = polynomial_kernel("epanechnikov", (0.75, 0.0, -0.75), order=2)
ORDER4 = polynomial_kernel("order4", (9 / 8, 0.0, -15 / 8), order=4)
# truncated at 8 standard deviations (relative tail mass < 1e-15)
GAUSSIAN = Kernel("gaussian", order=2, func=_gauss, radius=8.0, comparator_only=True)

KERNELS = {k.name: k for k in (RECTANGULAR, EPANECHNIKOV, ORDER4, GAUSSIAN)}


def get_kernel(name: str) -> Kernel:
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def eval_scaled(kernel: Kernel, h: float, u):
    """Return ``K_h(u) = K(u / h) / h``."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return kernel.evaluate(np.asarray(u, dtype=float) / h) / h


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _sign_changes(func, lo, hi, nodes=SIMPSON_NODES):
    u = np.linspace(lo, hi, nodes)
    y = func(u)
    roots = []
    for i in np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]:
        roots.append(optimize.brentq(func, u[i], u[i + 1], xtol=1e-15))
    roots.extend(u[1:-1][y[1:-1] == 0.0])
    return roots


def _smooth_pieces(kernel: Kernel) -> np.ndarray:
    r = kernel.radius
    pts = {-r, 0.0, r}
    pts.update(b for b in kernel.breakpoints if -r < b < r)
    if kernel.coeffs is not None:
        for root in np.roots(np.asarray(kernel.coeffs[::-1])) if len(kernel.coeffs) > 1 else ():
            if abs(root.imag) < 1e-12 and -1 < root.real < 1:
                pts.add(float(root.real))
    else:
        pts.update(_sign_changes(lambda u: kernel.evaluate(np.asarray(u)), -r, r))
    return np.array(sorted(pts))


def _piecewise_gauss(func, edges, nodes=GL_NODES):
    # interior nodes only, so jumps at piece ends never leak into a piece
    t, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        total += half * float(np.dot(w, func(0.5 * (a + b) + half * t)))
    return float(total)


@dataclass(frozen=True)
class KernelNorms:
    """Norms of a kernel. ``l1`` is ``int |K|``; ``integral`` is ``int K``."""

    l1: float
    l2sq: float
    sup: float
    integral: float
    lp: dict = field(default_factory=dict)

    @property
    def l2(self) -> float:
        return math.sqrt(self.l2sq)


def compute_norms(kernel: Kernel, p_list: Iterable[float] = ()) -> KernelNorms:
    """Norms by Gauss-Legendre quadrature on each smooth piece of the support."""
    edges = kernel.pieces
    f = kernel.evaluate
    l1 = _piecewise_gauss(lambda u: np.abs(f(u)), edges)
    l2sq = _piecewise_gauss(lambda u: f(u) ** 2, edges)
    total = _piecewise_gauss(f, edges)
    grid = np.unique(np.concatenate([np.linspace(-kernel.radius, kernel.radius, SIMPSON_NODES), edges]))
    sup = float(np.max(np.abs(f(grid))))
    lp = {}
    for p in p_list:
        if p < 1:
            raise ValueError("p must be >= 1")
        lp[float(p)] = _piecewise_gauss(lambda u: np.abs(f(u)) ** p, edges) ** (1.0 / p)
    return KernelNorms(l1=l1, l2sq=l2sq, sup=sup, integral=total, lp=lp)


def moment(kernel: Kernel, k: int) -> float:
    return _piecewise_gauss(lambda u: u**k * kernel.evaluate(u), kernel.pieces)


def verify_order(kernel: Kernel, tol: float = 1e-8, order: Optional[int] = None) -> bool:
    """Check ``int K = 1``, vanishing moments below ``order`` and a non-zero one at ``order``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    r = kernel.order if order is None else order
    if abs(moment(kernel, 0) - 1.0) > tol:
        return False
    if any(abs(moment(kernel, k)) > tol for k in range(1, r)):
        return False
    return abs(moment(kernel, r)) > tol


# ---------------------------------------------------------------------------
# variance bounds
# ---------------------------------------------------------------------------

def _check_positive(**kw):
    for name, val in kw.items():
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")


def variance_bound(M: float, kernel: Kernel, n: int, h: float) -> float:
    """``v(h) = sqrt(M ||K||_2^2 / (n h))``."""
    _check_positive(M=M, n=n, h=h)
    if h > 1:
        raise ValueError(f"bandwidth must be <= 1, got {h}")
    return math.sqrt(M * kernel.norms.l2sq / (n * h))


def _diff_integral_uncached(kernel: Kernel, ratio: float) -> float:
    f = kernel.evaluate
    pieces = kernel.pieces
    edges = np.unique(np.concatenate([pieces, pieces / ratio]))
    edges = edges[(edges >= -kernel.radius) & (edges <= kernel.radius)]
    return _piecewise_gauss(lambda u: (f(u) - ratio * f(ratio * u)) ** 2, edges)


def diff_integral(kernel: Kernel, ratio: float, key=None) -> float:
    """``int (K(u) - r K(r u))^2 du`` for ``r = h / eta``, memoised per kernel.

    ``key`` should identify the ratio exactly, e.g. ``(a, k)`` with
    ``r = a**k`` on a geometric grid. Without a key the float ratio is used.
    """
    cache = kernel._ratio_cache
    k = ("r", float(ratio)) if key is None else key
    val = cache.get(k)
    if val is None:
        val = _diff_integral_uncached(kernel, ratio)
        cache[k] = val
    return val


def diff_variance_bound(M: float, kernel: Kernel, n: int, h: float, eta: float, key=None) -> float:
    """``v(h, eta)``, the bound on the standard deviation of ``fhat_h - fhat_eta``."""
    _check_positive(M=M, n=n, h=h, eta=eta)
    if not eta < h:
        raise ValueError(f"need eta < h, got eta={eta}, h={h}")
    if h > 1:
        raise ValueError(f"bandwidth must be <= 1, got {h}")
    return math.sqrt(M / (n * h) * diff_integral(kernel, h / eta, key))
