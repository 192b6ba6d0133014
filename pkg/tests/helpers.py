"""Shared test utilities."""

import numpy as np

from inhomkde.estimator import EvaluationGrid
from inhomkde.oracle import kappa


def bias_probe_grid(model, n, kernel, m=201):
    """Equispaced points on I0 plus dense probes of every branch around each irregularity."""
    spec = model.smoothness
    kn = kappa(spec, kernel.norms) * n
    t_beta = kn ** (-1 / (2 * spec.beta + 1))
    t_alpha = kn ** (-1 / (2 * spec.alpha + 1))
    extra = [np.asarray(model.irregularities)]
    for p in model.irregularities:
        for s in (-1, 1):
            extra.append(p + s * np.linspace(0.0, 1.2, 25) * t_beta)
            extra.append(p + s * np.geomspace(t_beta, 1.5 * t_alpha, 40))
    c, d = model.I0
    return EvaluationGrid.uniform(c, d, m, extra=np.concatenate(extra))
