"""Regularity-aware oracle bandwidth functions.

Given the smoothness class of a density and the locations of its
irregularities, these functions return the pointwise bandwidth ``h0(x)``
balancing a bias bound against the variance bound ``v(h)``:

* piecewise Hölder densities (regularity ``alpha`` away from the
  irregularities, ``beta`` everywhere): small constant bandwidth at the
  irregularities, distance-to-irregularity in between, and the usual
  ``(kappa n)^(-1/(2 alpha + 1))`` far away;
* piecewise differentiable densities whose ``l``-th derivative blows up like
  ``|x - x_i|^-gamma``, with two regimes depending on ``gamma`` versus
  ``l - beta``;
* densities unbounded at zero like ``x^-eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .estimator import EvaluationGrid, convolve_density
from .kernel import Kernel, KernelNorms, variance_bound

__all__ = [
    "PIECEWISE_HOLDER",
    "PIECEWISE_DIFFERENTIABLE",
    "UNBOUNDED_DENSITY",
    "SmoothnessSpec",
    "kappa",
    "h0_piecewise_holder",
    "h0_pw_diff",
    "h0_unbounded",
    "oracle_bandwidth",
    "BiasReport",
    "check_bias_dominated",
]

PIECEWISE_HOLDER = "PiecewiseHolder"
PIECEWISE_DIFFERENTIABLE = "PiecewiseDifferentiable"
UNBOUNDED_DENSITY = "UnboundedDensity"
KINDS = (PIECEWISE_HOLDER, PIECEWISE_DIFFERENTIABLE, UNBOUNDED_DENSITY)

# irregularities closer than this are treated as coincident
MIN_SPACING = 1e-12


@dataclass(frozen=True)
class SmoothnessSpec:
    """Smoothness class metadata.

    ``alpha`` is the regularity between irregularities (the integer ``l`` for
    the piecewise differentiable class), ``beta`` the global one. ``gamma``
    only matters for the piecewise differentiable class and ``eta`` only for
    unbounded densities.
    """

    kind: str
    alpha: float
    beta: float = 0.0
    L: float = 1.0
    M: float = 1.0
    irregularities: tuple = ()
    gamma: Optional[float] = None
    eta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown smoothness kind {self.kind!r}; choose from {KINDS}")
        irr = tuple(sorted(float(x) for x in self.irregularities))
        object.__setattr__(self, "irregularities", irr)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.L <= 0 or self.M <= 0:
            raise ValueError("L and M must be positive")
        if self.kind == UNBOUNDED_DENSITY:
            if self.eta is None or not 0 < self.eta < 0.5:
                raise ValueError("eta must lie in (0, 1/2) for an unbounded density")
            if self.alpha != int(self.alpha):
                raise ValueError("the derivative order l must be an integer")
            return
        if not 0 <= self.beta < self.alpha:
            raise ValueError(f"need 0 <= beta < alpha, got beta={self.beta}, alpha={self.alpha}")
        if any(b - a < MIN_SPACING for a, b in zip(irr[:-1], irr[1:])):
            raise ValueError("irregularities must be distinct")
        if self.kind == PIECEWISE_DIFFERENTIABLE:
            if self.alpha != int(self.alpha):
                raise ValueError("the derivative order l must be a positive integer")
            if self.gamma is None or not self.gamma > 0:
                raise ValueError("gamma must be positive for a piecewise differentiable density")

    @property
    def c0(self) -> float:
        """``min(1, half the smallest spacing between irregularities)``."""
        irr = self.irregularities
        if len(irr) < 2:
            return 1.0
        return min(1.0, 0.5 * min(b - a for a, b in zip(irr[:-1], irr[1:])))

    def distance(self, x):
        """Distance from ``x`` to the nearest irregularity (``inf`` if there are none)."""
        x = np.asarray(x, dtype=float)
        if not self.irregularities:
            return np.full(x.shape, np.inf)
        irr = np.asarray(self.irregularities)
        return np.min(np.abs(x[..., None] - irr), axis=-1)

    # flat key = value serialisation -------------------------------------
    def to_kv(self) -> dict:
        d = {"kind": self.kind, "alpha": self.alpha, "beta": self.beta, "L": self.L, "M": self.M,
             "irregularities": ", ".join(repr(x) for x in self.irregularities)}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        if self.eta is not None:
            d["eta"] = self.eta
        return d

    @classmethod
    def from_kv(cls, kv: dict) -> "SmoothnessSpec":
        known = {"kind", "alpha", "beta", "gamma", "eta", "L", "M", "irregularities"}
        unknown = set(kv) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        if "kind" not in kv or "alpha" not in kv:
            raise ValueError("spec needs at least 'kind' and 'alpha'")
        irr = kv.get("irregularities", "")
        if isinstance(irr, str):
            irr = [float(t) for t in irr.replace(";", ",").split(",") if t.strip()]
        opt = lambda k: None if kv.get(k) in (None, "") else float(kv[k])  # noqa: E731
        return cls(kind=str(kv["kind"]), alpha=float(kv["alpha"]), beta=float(kv.get("beta", 0.0)),
                   L=float(kv.get("L", 1.0)), M=float(kv.get("M", 1.0)), irregularities=tuple(irr),
                   gamma=opt("gamma"), eta=opt("eta"))


def kappa(spec: SmoothnessSpec, norms: KernelNorms) -> float:
    """Constant scaling ``n`` in the oracle bandwidths.

    ``||K||_1`` is taken as ``int |K|`` (which exceeds one for higher order kernels).
    """
    base = norms.l1**2 * spec.L**2 / (norms.l2sq * spec.M)
    if spec.kind == PIECEWISE_DIFFERENTIABLE:
        return base * 2.0 ** (2 * spec.gamma)
    return base


def _kn(n, kap):
    kn = kap * n
    if not kn > 1:
        raise ValueError(f"kappa * n = {kn:.4g} <= 1: sample too small for the oracle bandwidth")
    return kn


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def h0_piecewise_holder(x, spec: SmoothnessSpec, n: int, kap: float):
    """Three-branch bandwidth for piecewise Hölder densities."""
    if spec.kind != PIECEWISE_HOLDER:
        raise ValueError("spec is not piecewise Hölder")
    kn = _kn(n, kap)
    t_beta = kn ** (-1.0 / (2 * spec.beta + 1))
    t_alpha = kn ** (-1.0 / (2 * spec.alpha + 1))
    d = spec.distance(x)
    h = np.where(d <= t_beta, t_beta, np.where(d <= t_alpha, d, t_alpha))
    return _scalar_or_array(x, np.minimum(h, 1.0))


def h0_pw_diff(x, spec: SmoothnessSpec, n: int, kap: float):
    """Bandwidth for piecewise differentiable densities with blowing-up derivatives.

    Dispatches on ``gamma <= l - beta`` (four branches) versus
    ``gamma > l - beta`` (three branches). All branches carry the factor 1/2.
    """
    if spec.kind != PIECEWISE_DIFFERENTIABLE:
        raise ValueError("spec is not piecewise differentiable")
    kn = _kn(n, kap)
    ell, beta, gamma = spec.alpha, spec.beta, spec.gamma
    d = spec.distance(x)
    c0 = spec.c0
    t_beta = kn ** (-1.0 / (2 * beta + 1))
    far = 0.5 * kn ** (-1.0 / (2 * ell + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = 0.5 * kn ** (-1.0 / (2 * ell + 1)) * np.where(np.isfinite(d), d, 1.0) ** (2 * gamma / (2 * ell + 1))
    if gamma <= ell - beta:
        t_one = kn ** (-1.0 / (2 * ell - 2 * gamma + 1))
        near = np.where(d <= t_beta, 0.5 * t_beta, np.where(d <= t_one, 0.5 * d, scaled))
    else:
        t_zero = kn ** (-((ell - beta) / gamma) / (2 * beta + 1))
        near = np.where(d <= t_zero, 0.5 * t_beta, scaled)
    h = np.where(d >= c0, far, near)
    return _scalar_or_array(x, np.minimum(h, 1.0))


def h0_unbounded(x, spec: SmoothnessSpec, n: int):
    """Bandwidth for a density behaving like ``x^-eta`` at zero (``x > 0``).

    The innermost branch ``x^(2 eta) / n`` can exceed ``x`` for tiny ``x``; it is
    only clamped to ``(0, 1]``.
    """
    if spec.kind != UNBOUNDED_DENSITY:
        raise ValueError("spec is not an unbounded density")
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError("the unbounded-density bandwidth is defined for x > 0 only")
    eta, ell = spec.eta, spec.alpha
    b1 = (2.0 * n) ** (-1.0 / (1 - eta))
    h = np.where(xa <= b1, xa ** (2 * eta) / n,
                 np.where(xa <= 1.0, (xa ** (eta + 2 * ell) / n) ** (1.0 / (2 * ell + 1)),
                          n ** (-1.0 / (2 * ell + 1))))
    return _scalar_or_array(x, np.minimum(h, 1.0))


def oracle_bandwidth(spec: SmoothnessSpec, n: int, kernel: Kernel, kappa_scale: float = 1.0):
    """Return the vectorised function ``x -> h0(x)`` for ``spec``."""
    if spec.kind == UNBOUNDED_DENSITY:
        return lambda x: h0_unbounded(x, spec, n)
    kap = kappa(spec, kernel.norms) * kappa_scale
    _kn(n, kap)
    if spec.kind == PIECEWISE_HOLDER:
        return lambda x: h0_piecewise_holder(x, spec, n, kap)
    return lambda x: h0_pw_diff(x, spec, n, kap)


@dataclass
class BiasReport:
    x: np.ndarray
    h: np.ndarray
    bias: np.ndarray
    v: np.ndarray
    ratio: np.ndarray = field(init=False)
    tolerance: float = 1e-6

    def __post_init__(self):
        self.ratio = self.bias / self.v

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratio))

    @property
    def worst_x(self) -> float:
        return float(self.x[int(np.argmax(self.ratio))])

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + self.tolerance


def check_bias_dominated(model, spec: SmoothnessSpec, kernel: Kernel, n: int, grid,
                         kappa_scale: float = 1.0) -> BiasReport:
    """Compare the exact bias ``|f_h0(x) - f(x)|`` with ``v(h0(x))`` on a grid.

    The bias is computed by quadrature of ``K * f`` split at the model's
    irregularities; ``v`` uses the sup-norm bound ``spec.M`` ``M``.
    """
    xs = grid.points if isinstance(grid, EvaluationGrid) else np.asarray(grid, dtype=float)
    hfun = oracle_bandwidth(spec, n, kernel, kappa_scale)
    hs = np.asarray(hfun(xs), dtype=float)
    f = np.asarray(model.pdf(xs), dtype=float)
    bias = np.array([abs(convolve_density(model.pdf, kernel, h, x, model.irregularities) - fx)
                     for x, h, fx in zip(xs, hs, f)])
    v = np.array([variance_bound(spec.M, kernel, n, h) for h in hs])
    return BiasReport(x=xs, h=hs, bias=bias, v=v)
