"""Monte Carlo estimates of tail probabilities and MGFs.

Samples are split into a fixed shard plan. Shard ``i`` draws from the
``i``-th child of ``SeedSequence(master_seed)`` and its size depends only on
``(n_samples, shards)``, so a report is a function of
``(master_seed, shards, n_samples)`` no matter how many threads execute it.
``EXPSAMP_THREADS`` caps the worker count.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import InvalidParameterError
from .oracle import threshold_reached
from .walk import simulate_sums

MIN_SAMPLES = 100
# Pearson kurtosis of alpha^S_n above this gets a heavy-tail warning.
KURTOSIS_WARN = 20.0


@dataclass(frozen=True)
class EstimateReport:
    kind: str
    point_estimate: float
    ci_low: float
    ci_high: float
    n_samples: int
    master_seed: int
    shards: int
    parameter: float
    warnings: tuple = field(default=())

    def to_dict(self):
        d = asdict(self)
        d["warnings"] = list(self.warnings)
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d["warnings"] = tuple(d["warnings"])
        return cls(**d)


def shard_sizes(n_samples, shards):
    base, extra = divmod(n_samples, shards)
    return [base + (i < extra) for i in range(shards)]


def worker_count(shards):
    env = os.environ.get("EXPSAMP_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, shards))


def sample_sums(op, marks, n_samples, master_seed, shards=1):
    """S_n for ``n_samples`` walks, concatenated in shard order."""
    if n_samples < 1 or shards < 1:
        raise InvalidParameterError("n_samples and shards must be positive")
    children = np.random.SeedSequence(master_seed).spawn(shards)
    sizes = shard_sizes(n_samples, shards)

    def run(i):
        return simulate_sums(op, marks, sizes[i], np.random.default_rng(children[i]))

    workers = worker_count(shards)
    if workers == 1:
        parts = [run(i) for i in range(shards)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(shards)))
    return np.concatenate(parts)


def clopper_pearson(k, n, level=0.95):
    """Exact two-sided binomial confidence interval for k successes in n trials."""
    tail = (1.0 - level) / 2.0
    low = 0.0 if k == 0 else float(stats.beta.ppf(tail, k, n - k + 1))
    high = 1.0 if k == n else float(stats.beta.ppf(1.0 - tail, k + 1, n - k))
    return low, high


def _check_samples(n_samples):
    if n_samples < MIN_SAMPLES:
        raise InvalidParameterError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")


def estimate_tail(op, marks, t, n_samples, master_seed, shards=1):
    """Fraction of walks with S_n >= t * phi, with a Clopper-Pearson 95% interval."""
    if not t > 0:
        raise InvalidParameterError(f"t must be positive, got {t}")
    _check_samples(n_samples)
    sums = sample_sums(op, marks, n_samples, master_seed, shards)
    hits = int(np.count_nonzero(threshold_reached(sums, t * marks.phi)))
    low, high = clopper_pearson(hits, n_samples)
    return EstimateReport(
        "tail", hits / n_samples, low, high, n_samples, master_seed, shards, float(t)
    )


def estimate_mgf(op, marks, alpha, n_samples, master_seed, shards=1):
    """Sample mean of alpha^S_n with a normal-approximation 95% interval."""
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    _check_samples(n_samples)
    warnings = []
    hi = math.inf if op.lam == 0 else 1.0 / op.lam
    if not 1.0 < alpha < hi:
        warnings.append(f"alpha={alpha} outside (1, {hi}); the MGF bound does not apply")
    x = alpha ** sample_sums(op, marks, n_samples, master_seed, shards)
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1))
    half = 1.959963984540054 * sd / math.sqrt(n_samples)
    if sd > 0:
        kurt = float(np.mean((x - mean) ** 4) / np.var(x) ** 2)
        if kurt > KURTOSIS_WARN:
            warnings.append(f"heavy-tailed alpha^S_n (kurtosis {kurt:.1f}); interval may undercover")
    return EstimateReport(
        "mgf",
        mean,
        mean - half,
        mean + half,
        n_samples,
        master_seed,
        shards,
        float(alpha),
        tuple(warnings),
    )
