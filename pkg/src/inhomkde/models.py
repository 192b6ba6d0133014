"""Example densities with isolated irregularities.

Each model bundles a vectorised pdf and cdf, a seeded sampler, its support,
the points where the density or a derivative breaks, a default estimation
interval ``I0`` and smoothness metadata.

Densities whose printed form does not integrate to one are rescaled, keeping
the shape. At a jump the pdf takes the midpoint of its one-sided limits,
which is where a symmetric kernel estimate converges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special, stats

from .estimator import Sample
from .oracle import PIECEWISE_DIFFERENTIABLE, PIECEWISE_HOLDER, SmoothnessSpec

__all__ = ["DensityModel", "MODEL_NAMES", "make_model", "pdf_l2sq", "sample"]

SQRT2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True, eq=False)
class DensityModel:
    name: str
    pdf_open: Callable = field(repr=False)
    cdf: Callable = field(repr=False)
    sampler: Callable = field(repr=False)
    support: tuple
    irregularities: tuple
    I0: tuple
    smoothness: Optional[SmoothnessSpec] = None
    description: str = ""

    def pdf(self, x):
        """Density, with the midpoint of the one-sided limits at jumps."""
        xa = np.asarray(x, dtype=float)
        out = np.asarray(self.pdf_open(xa), dtype=float)
        if self.irregularities:
            out = np.array(out, copy=True)
            for p, mid in zip(self.irregularities, self._midpoints):
                out = np.where(xa == p, mid, out)
        return float(out) if np.ndim(x) == 0 else out

    @cached_property
    def _midpoints(self):
        eps = 1e-12
        return [0.5 * (float(self.pdf_open(np.array(p - eps * max(1, abs(p)))))
                       + float(self.pdf_open(np.array(p + eps * max(1, abs(p))))))
                for p in self.irregularities]

    @cached_property
    def l2sq_on_I0(self) -> float:
        return pdf_l2sq(self, self.I0)

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.asarray(self.sampler(rng, count), dtype=float)


def _split_quad(func, a, b, points, tol=1e-12):
    edges = sorted({a, b, *[p for p in points if a < p < b]})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(func, lo, hi, epsabs=tol, epsrel=1e-12, limit=500)
        total += val
    return total


def pdf_l2sq(model: DensityModel, I0) -> float:
    """``int_{I0} f^2``, split at the irregularities."""
    c, d = map(float, I0)
    lo, hi = model.support
    a, b = max(c, lo), min(d, hi)
    if b <= a:
        return 0.0
    return _split_quad(lambda t: float(model.pdf_open(np.array(t))) ** 2, a, b, model.irregularities)


def sample(model: DensityModel, rng_seed: int, count: int) -> Sample:
    """Draw ``count`` observations; deterministic given ``rng_seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return Sample(model.draw(np.random.default_rng(rng_seed), count))


# ---------------------------------------------------------------------------
# model definitions
# ---------------------------------------------------------------------------

def _gaussian():
    return DensityModel(
        name="gaussian",
        pdf_open=lambda x: np.exp(-0.5 * x * x) / SQRT2PI,
        cdf=stats.norm.cdf,
        sampler=lambda rng, k: rng.standard_normal(k),
        support=(-np.inf, np.inf),
        irregularities=(),
        I0=(-2.0, 2.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=3 / SQRT2PI, M=1 / SQRT2PI),
        description="standard Gaussian",
    )


def _sym_exp(name, lam, I0, description):
    # (lam / 2) exp(-lam |x|); kink at 0
    dist = stats.laplace(scale=1 / lam)
    return DensityModel(
        name=name,
        pdf_open=lambda x: 0.5 * lam * np.exp(-lam * np.abs(x)),
        cdf=dist.cdf,
        sampler=lambda rng, k: dist.ppf(rng.random(k)),
        support=(-np.inf, np.inf),
        irregularities=(0.0,),
        I0=I0,
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=1, L=max(lam**5 / 2, lam**2),
                                  M=lam / 2, irregularities=(0.0,)),
        description=description,
    )


def _exponential():
    return DensityModel(
        name="exponential",
        pdf_open=lambda x: np.where(x > 0, np.exp(-np.maximum(x, 0)), 0.0),
        cdf=lambda x: np.where(x > 0, -np.expm1(-np.maximum(x, 0)), 0.0),
        sampler=lambda rng, k: -np.log1p(-rng.random(k)),
        support=(0.0, np.inf),
        irregularities=(0.0,),
        I0=(-1.0, 1.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=1.0, M=1.0, irregularities=(0.0,)),
        description="standard exponential exp(-x) 1{x >= 0}",
    )


def _uniform():
    return DensityModel(
        name="uniform",
        pdf_open=lambda x: np.where(np.abs(x) < 1, 0.5, 0.0),
        cdf=lambda x: np.clip((np.asarray(x) + 1) / 2, 0.0, 1.0),
        sampler=lambda rng, k: 2.0 * rng.random(k) - 1.0,
        support=(-1.0, 1.0),
        irregularities=(-1.0, 1.0),
        I0=(-2.0, 2.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=0.5, M=0.5, irregularities=(-1.0, 1.0)),
        description="uniform on [-1, 1]",
    )


def _beta():
    # 1.1 (1 - x)^0.1 on [0, 1]: jump at 0, infinite derivative at 1
    def pdf(x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        return np.where(inside, 1.1 * np.clip(1 - x, 0, None) ** 0.1, 0.0)

    return DensityModel(
        name="beta_1_1.1",
        pdf_open=pdf,
        cdf=lambda x: 1.0 - np.clip(1 - np.asarray(x, dtype=float), 0.0, 1.0) ** 1.1,
        sampler=lambda rng, k: 1.0 - (1.0 - rng.random(k)) ** (1 / 1.1),
        support=(0.0, 1.0),
        irregularities=(0.0, 1.0),
        I0=(-0.5, 1.5),
        smoothness=SmoothnessSpec(PIECEWISE_DIFFERENTIABLE, alpha=4, beta=0, gamma=3.9, L=1.1, M=1.1,
                                  irregularities=(0.0, 1.0)),
        description="Beta(1, 1.1) density 1.1 (1 - x)^0.1 on [0, 1]",
    )


_CLAW_MEANS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _gaussian_mixture():
    # claw: 1/2 N(0, 1) + sum_l 1/10 N(mu_l, 0.1^2)
    def pdf(x):
        x = np.asarray(x, dtype=float)
        out = 0.5 * np.exp(-0.5 * x * x)
        for mu in _CLAW_MEANS:
            out = out + np.exp(-50.0 * (x - mu) ** 2)
        return out / SQRT2PI

    def cdf(x):
        out = 0.5 * stats.norm.cdf(x)
        for mu in _CLAW_MEANS:
            out = out + 0.1 * stats.norm.cdf((np.asarray(x) - mu) / 0.1)
        return out

    def sampler(rng, k):
        comp = rng.random(k)
        z = rng.standard_normal(k)
        means = np.array(_CLAW_MEANS)
        bump = comp >= 0.5
        which = np.minimum(((comp - 0.5) / 0.1).astype(int), 4)
        return np.where(bump, means[which] + 0.1 * z, z)

    return DensityModel(
        name="gaussian_mixture",
        pdf_open=pdf,
        cdf=cdf,
        sampler=sampler,
        support=(-np.inf, np.inf),
        irregularities=(),
        I0=(-2.0, 2.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=3 * 10**4 / SQRT2PI, M=float(pdf(0.0))),
        description="claw mixture 1/2 N(0,1) + sum 1/10 N(mu, 0.01), mu in {-1, -1/2, 0, 1/2, 1}",
    )


def _exponential_mixture():
    # 1/2 e^x 1{x<0} + 5 e^{-10x} 1{x>0}; each side carries mass 1/2
    def pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0)), np.where(x > 0, 5 * np.exp(-10 * np.maximum(x, 0)), 0.0))

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0)), 0.5 - 0.5 * np.expm1(-10 * np.maximum(x, 0)))

    def sampler(rng, k):
        side = rng.random(k) < 0.5
        e = -np.log1p(-rng.random(k))
        return np.where(side, -e, e / 10.0)

    return DensityModel(
        name="exponential_mixture",
        pdf_open=pdf,
        cdf=cdf,
        sampler=sampler,
        support=(-np.inf, np.inf),
        irregularities=(0.0,),
        I0=(-1.0, 1.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=5e4, M=5.0, irregularities=(0.0,)),
        description="1/2 e^x 1{x<0} + 5 e^-10x 1{x>0}",
    )


_TG_RIGHT = 0.5 / math.sqrt(2)  # mass of the printed right half
_TG_Z = 0.5 + _TG_RIGHT


def _truncated_gaussian():
    def pdf(x):
        x = np.asarray(x, dtype=float)
        left = np.exp(-0.5 * x * x) / SQRT2PI
        right = np.exp(-0.25 * x * x) / (2 * SQRT2PI)
        return np.where(x < 0, left, np.where(x > 0, right, 0.0)) / _TG_Z

    def cdf(x):
        x = np.asarray(x, dtype=float)
        left = stats.norm.cdf(np.minimum(x, 0))
        right = _TG_RIGHT * 2 * (stats.norm.cdf(np.maximum(x, 0) / math.sqrt(2)) - 0.5)
        return (left + np.where(x > 0, right, 0.0)) / _TG_Z

    def sampler(rng, k):
        side = rng.random(k) < 0.5 / _TG_Z
        z = np.abs(rng.standard_normal(k))
        return np.where(side, -z, math.sqrt(2) * z)

    return DensityModel(
        name="truncated_gaussian",
        pdf_open=pdf,
        cdf=cdf,
        sampler=sampler,
        support=(-np.inf, np.inf),
        irregularities=(0.0,),
        I0=(-1.0, 1.0),
        smoothness=SmoothnessSpec(PIECEWISE_HOLDER, alpha=4, beta=0, L=3 / SQRT2PI / _TG_Z,
                                  M=1 / SQRT2PI / _TG_Z, irregularities=(0.0,)),
        description="phi(x) 1{x<0} + phi(x/sqrt2)/2 1{x>0}, renormalised",
    )


def _osc_antiderivative(t):
    # int_0^t sin(1/s) ds for t > 0, extended evenly to t < 0
    t = np.abs(np.asarray(t, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        si, ci = special.sici(1.0 / t)
        out = t * np.sin(1.0 / t) - ci
    return np.where(t == 0, 0.0, out)


def _oscillating():
    # 1/4 (1 + sin(1/x)) on [-2, 2]; sin(1/x) is odd so the mass is exactly 1
    def pdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 0.25 * (1 + np.sin(1.0 / x))
        return np.where((np.abs(x) < 2) & (x != 0), val, 0.0)

    a2 = float(_osc_antiderivative(2.0))

    def cdf(x):
        x = np.clip(np.asarray(x, dtype=float), -2, 2)
        return np.clip(0.25 * (x + 2) + 0.25 * (_osc_antiderivative(x) - a2), 0.0, 1.0)

    def sampler(rng, k):
        out = np.empty(0)
        while out.size < k:
            m = 2 * (k - out.size) + 16
            u = rng.uniform(-2, 2, m)
            keep = rng.random(m) * 2 <= 1 + np.sin(1.0 / u)
            out = np.concatenate([out, u[keep]])
        return out[:k]

    return DensityModel(
        name="oscillating",
        pdf_open=pdf,
        cdf=cdf,
        sampler=sampler,
        support=(-2.0, 2.0),
        irregularities=(-2.0, 0.0, 2.0),
        I0=(-1.0, 1.0),
        smoothness=SmoothnessSpec(PIECEWISE_DIFFERENTIABLE, alpha=4, beta=0, gamma=8, L=0.5, M=0.5,
                                  irregularities=(0.0,)),
        description="1/4 (1 + sin(1/x)) on [-2, 2]",
    )


_FACTORIES = {
    "gaussian": _gaussian,
    "laplace": lambda: _sym_exp("laplace", 0.5, (-2.0, 2.0), "Laplace 1/4 exp(-|x|/2)"),
    "exponential": _exponential,
    "uniform": _uniform,
    "beta_1_1.1": _beta,
    "gaussian_mixture": _gaussian_mixture,
    "exponential_mixture": _exponential_mixture,
    "truncated_gaussian": _truncated_gaussian,
    "sym_exponential": lambda: _sym_exp("sym_exponential", 1.0, (-1.0, 1.0), "1/2 exp(-|x|)"),
    "oscillating": _oscillating,
}

MODEL_NAMES = tuple(_FACTORIES)
_CACHE: dict = {}


def make_model(name: str) -> DensityModel:
    if name not in _FACTORIES:
        raise ValueError(f"unknown model {name!r}; valid names: {', '.join(MODEL_NAMES)}")
    model = _CACHE.get(name)
    if model is None:
        model = _CACHE[name] = _FACTORIES[name]()
    return model
