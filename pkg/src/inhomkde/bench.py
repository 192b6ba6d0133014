"""Monte Carlo risk evaluation.

For each replication a sample is drawn with seed ``base_seed + rep`` and the
estimators are evaluated on a uniform integration grid over ``I0`` (with the
irregularities inserted as extra nodes):

* ``adaptive``: order-4 kernel with the data-driven pointwise bandwidth;
* ``scott``: Gaussian kernel at ``1.06 sd n^(-1/5)``;
* ``oracle``: the model's theoretical bandwidth function ``h0`` (needs a
  smoothness spec on the model).

Replications are independent, so they may run in worker processes; results
are folded in replication order, which makes the report independent of the
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .estimator import Sample, estimate_many
from .kernel import GAUSSIAN, get_kernel
from .lepski import PLUGIN, SelectorConfig, adaptive_estimate, build_grid
from .models import DensityModel, make_model, pdf_l2sq
from .oracle import oracle_bandwidth

__all__ = [
    "BenchConfig",
    "RiskEntry",
    "RiskReport",
    "ESTIMATORS",
    "integration_grid",
    "lp_risk",
    "scott_bandwidth",
    "run_replication",
    "run_benchmark",
    "rate_slope",
]

log = logging.getLogger(__name__)

ESTIMATORS = ("adaptive", "scott", "oracle")


@dataclass(frozen=True)
class BenchConfig:
    model: str
    n_list: tuple = (10_000,)
    replications: int = 200
    p: float = 2.0
    I0: Optional[tuple] = None
    nodes: int = 2001
    seed: int = 0
    a: float = 2.0
    D1: float = 1.0
    D2: float = 0.4
    sup_norm: object = PLUGIN
    kernel: str = "order4"
    estimators: tuple = ("adaptive", "scott")

    def __post_init__(self):
        make_model(self.model)
        get_kernel(self.kernel)
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if self.nodes < 101:
            raise ValueError("need at least 101 integration nodes")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if not self.n_list:
            raise ValueError("n_list is empty")
        bad = set(self.estimators) - set(ESTIMATORS)
        if bad:
            raise ValueError(f"unknown estimators {sorted(bad)}; choose from {ESTIMATORS}")
        if self.I0 is not None:
            c, d = map(float, self.I0)
            if not c < d:
                raise ValueError("I0 must satisfy c < d")
            object.__setattr__(self, "I0", (c, d))

    @property
    def interval(self) -> tuple:
        return self.I0 if self.I0 is not None else make_model(self.model).I0

    def selector(self) -> SelectorConfig:
        sup = self.sup_norm if self.sup_norm == PLUGIN else float(self.sup_norm)
        return SelectorConfig(D1=self.D1, D2=self.D2, sup_norm=sup, kernel=get_kernel(self.kernel))

    # flat key = value serialisation -------------------------------------
    @classmethod
    def from_kv(cls, kv: dict) -> "BenchConfig":
        conv = {
            "model": str,
            "n_list": lambda s: tuple(int(float(t)) for t in str(s).split(",") if t.strip()),
            "replications": int,
            "p": float,
            "I0": lambda s: tuple(float(t) for t in str(s).split(",")),
            "nodes": int,
            "seed": int,
            "a": float,
            "D1": float,
            "D2": float,
            "sup_norm": lambda s: PLUGIN if str(s).strip().lower() == PLUGIN else float(s),
            "kernel": str,
            "estimators": lambda s: tuple(t.strip() for t in str(s).split(",") if t.strip()),
        }
        unknown = set(kv) - set(conv)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "model" not in kv:
            raise ValueError("config needs a 'model' key")
        return cls(**{k: conv[k](v) for k, v in kv.items()})

    def to_kv(self) -> dict:
        return {
            "model": self.model,
            "n_list": ",".join(map(str, self.n_list)),
            "replications": self.replications,
            "p": self.p,
            "I0": ",".join(repr(v) for v in self.interval),
            "nodes": self.nodes,
            "seed": self.seed,
            "a": self.a,
            "D1": self.D1,
            "D2": self.D2,
            "sup_norm": self.sup_norm,
            "kernel": self.kernel,
            "estimators": ",".join(self.estimators),
        }


# geometric refinement around each irregularity: offsets from REFINE_MIN to one grid step
REFINE_MIN = 1e-7
REFINE_POINTS = 40


def integration_grid(model: DensityModel, I0, nodes: int = 2001) -> np.ndarray:
    """``nodes`` equispaced points on ``I0``, refined geometrically on both sides of each irregularity.

    Without the refinement the node sitting on a jump keeps a fixed trapezoid
    weight, so an estimator whose bandwidth shrinks like ``1/n`` there would
    see a risk floor that the exact integral does not have.
    """
    c, d = map(float, I0)
    pts = [np.linspace(c, d, nodes)]
    step = (d - c) / (nodes - 1)
    offsets = np.geomspace(REFINE_MIN * step, step, REFINE_POINTS)
    for p in model.irregularities:
        if c <= p <= d:
            near = np.concatenate([[p], p - offsets, p + offsets])
            pts.append(near[(near >= c) & (near <= d)])
    return np.unique(np.concatenate(pts))


def lp_risk(estimate, model: DensityModel, I0, p: float = 2.0, nodes: int = 2001,
            xs: Optional[np.ndarray] = None) -> float:
    """``int_{I0} |fhat - f|^p`` by the trapezoid rule; divided by ``int_{I0} f^2`` when ``p == 2``.

    ``estimate`` holds the estimator's values on ``integration_grid(model, I0, nodes)``
    (or on ``xs`` when given).
    """
    xs = integration_grid(model, I0, nodes) if xs is None else xs
    est = np.asarray(estimate, dtype=float)
    if est.shape != xs.shape:
        raise ValueError(f"estimate has shape {est.shape}, integration grid has {xs.shape}")
    err = np.abs(est - model.pdf(xs)) ** p
    num = float(np.trapezoid(err, xs)) if hasattr(np, "trapezoid") else float(np.trapz(err, xs))
    if p == 2:
        I0 = tuple(map(float, I0))
        return num / (model.l2sq_on_I0 if I0 == tuple(model.I0) else pdf_l2sq(model, I0))
    return num


def scott_bandwidth(sample: Sample) -> float:
    """``1.06 * sd * n^(-1/5)`` with the unbiased sample standard deviation."""
    n = sample.n
    if n < 2:
        raise ValueError("need at least 2 observations")
    sd = float(np.std(sample.values, ddof=1))
    if not sd > 0:
        raise ValueError("sample has zero variance")
    return 1.06 * sd * n ** -0.2


def _estimate(name: str, sample: Sample, model: DensityModel, cfg: BenchConfig, xs: np.ndarray):
    if name == "adaptive":
        grid = build_grid(sample.n, cfg.a)
        return adaptive_estimate(sample, cfg.selector(), grid, xs).fhat
    if name == "scott":
        return estimate_many(sample, GAUSSIAN, scott_bandwidth(sample), xs, allow_above_one=True)
    if name == "oracle":
        if model.smoothness is None:
            raise ValueError(f"model {model.name!r} has no smoothness spec for the oracle bandwidth")
        kern = get_kernel(cfg.kernel)
        hfun = oracle_bandwidth(model.smoothness, sample.n, kern)
        return estimate_many(sample, kern, hfun(xs), xs)
    raise ValueError(name)


def run_replication(cfg: BenchConfig, n: int, rep: int):
    """Risks and runtimes (ms) of every estimator for one replication.

    Returns ``(rep, {estimator: (risk, ms)}, error_message_or_None)``.
    """
    model = make_model(cfg.model)
    I0 = cfg.interval
    xs = integration_grid(model, I0, cfg.nodes)
    try:
        smp = Sample(model.draw(np.random.default_rng(_seed(cfg.seed, n, rep)), n))
        out = {}
        for name in cfg.estimators:
            t0 = time.perf_counter()
            est = _estimate(name, smp, model, cfg, xs)
            ms = 1e3 * (time.perf_counter() - t0)
            risk = lp_risk(est, model, I0, cfg.p, xs=xs)
            if not math.isfinite(risk):
                raise FloatingPointError(f"non-finite risk for estimator {name}")
            out[name] = (risk, ms)
        return rep, out, None
    except Exception as exc:  # recorded and reported by the caller
        return rep, None, f"{type(exc).__name__}: {exc}"


def _seed(base: int, n: int, rep: int) -> int:
    # the same seed is reused across sample sizes (common random numbers)
    return base + rep


def _run_chunk(args):
    cfg, n, reps = args
    return [run_replication(cfg, n, r) for r in reps]


@dataclass
class RiskEntry:
    model: str
    n: int
    estimator: str
    mean_risk: float
    std_risk: float
    runtime_ms: float
    replications: int
    risks: list = field(default_factory=list, repr=False)


@dataclass
class RiskReport:
    config: BenchConfig
    entries: list
    failures: list = field(default_factory=list)

    def get(self, n: int, estimator: str) -> RiskEntry:
        for e in self.entries:
            if e.n == n and e.estimator == estimator:
                return e
        raise KeyError((n, estimator))

    def to_csv(self, timing: bool = False, header: Sequence[str] = ()) -> str:
        """CSV text. Runtimes vary between runs, so the column stays empty unless ``timing``."""
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "n", "estimator", "mean_risk", "std_risk", "runtime_ms"])
        for e in self.entries:
            w.writerow([e.model, e.n, e.estimator, repr(e.mean_risk), repr(e.std_risk),
                        f"{e.runtime_ms:.3f}" if timing else ""])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "config": self.config.to_kv(),
            "entries": [{k: v for k, v in asdict(e).items()} for e in self.entries],
            "failures": self.failures,
        }
        return json.dumps(doc, indent=2)

    def table(self) -> str:
        """Aligned text table, one row per sample size."""
        ests = list(self.config.estimators)
        head = f"{'n':>8} | " + " | ".join(f"{e:^22}" for e in ests)
        lines = [f"{self.config.model}, I0 = [{self.config.interval[0]:g}, {self.config.interval[1]:g}]",
                 head, "-" * len(head)]
        for n in self.config.n_list:
            cells = []
            for e in ests:
                try:
                    r = self.get(n, e)
                    cells.append(f"{r.mean_risk:>9.2g} ({r.std_risk:.2g})".ljust(22))
                except KeyError:
                    cells.append("failed".center(22))
            lines.append(f"{n:>8} | " + " | ".join(cells))
        return "\n".join(lines)


def run_benchmark(cfg: BenchConfig, workers: int = 1, chunk: int = 10) -> RiskReport:
    """Run every ``(n, replication)`` pair and aggregate in replication order."""
    tasks = [(cfg, n, tuple(range(s, min(s + chunk, cfg.replications))))
             for n in cfg.n_list for s in range(0, cfg.replications, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = [_run_chunk(t) for t in tasks]

    entries, failures = [], []
    for n in cfg.n_list:
        results = [r for (c, nn, _), res in zip(tasks, chunks) if nn == n for r in res]
        results.sort(key=lambda r: r[0])
        ok = [r for r in results if r[2] is None]
        for rep, _, err in results:
            if err is not None:
                failures.append({"n": n, "replication": rep, "error": err})
                warnings.warn(f"{cfg.model} n={n} replication {rep} failed: {err}", RuntimeWarning)
        if not ok:
            continue
        for name in cfg.estimators:
            risks = np.array([r[1][name][0] for r in ok])
            ms = np.array([r[1][name][1] for r in ok])
            entries.append(RiskEntry(
                model=cfg.model, n=n, estimator=name, mean_risk=float(np.mean(risks)),
                std_risk=float(np.std(risks, ddof=1)) if risks.size > 1 else 0.0,
                runtime_ms=float(np.mean(ms)), replications=int(risks.size), risks=risks.tolist()))
    return RiskReport(config=cfg, entries=entries, failures=failures)


def rate_slope(ns, risks) -> float:
    """Least-squares slope of ``log(risk)`` against ``log(n)``."""
    ns = np.asarray(ns, dtype=float)
    risks = np.asarray(risks, dtype=float)
    if ns.size < 3 or ns.size != risks.size:
        raise ValueError("need at least 3 (n, risk) pairs")
    if np.any(risks <= 0) or np.any(ns <= 0):
        raise ValueError("risks and sample sizes must be positive")
    slope, _ = np.polyfit(np.log(ns), np.log(risks), 1)
    return float(slope)
