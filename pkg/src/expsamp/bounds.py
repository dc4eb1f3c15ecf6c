"""Closed-form moment-generating-function, tail, monomial and moment bounds.

Every bound takes the spectral value ``lam`` directly, so it applies to any
operator with that value. Exponential bounds come in two flavours: a
``log_*`` function that never overflows, and a plain one returning
``exp`` of it (``inf`` past the float range).

Step indices in monomials are 0-based.
"""

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, SizeLimitError, SpectralDegenerateError

MAX_MOMENT_ORDER = 64
DEFAULT_TRUNCATION = 64


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _check_lam(lam):
    if lam >= 1.0:
        raise SpectralDegenerateError(
            f"lam={lam}: bounds need lam < 1 (the walk is disconnected or bipartite)"
        )
    if lam < 0.0:
        raise DomainError(f"lam must lie in [0, 1), got {lam}")


def _check_phi(phi):
    if not phi >= 0.0:
        raise DomainError(f"phi must be non-negative, got {phi}")


def alpha_upper(lam):
    return math.inf if lam == 0.0 else 1.0 / lam


def _check_alpha(lam, alpha):
    _check_lam(lam)
    hi = alpha_upper(lam)
    if not 1.0 < alpha < hi:
        raise DomainError(f"alpha={alpha} outside the valid interval (1, {hi})")


def _check_t(lam, t):
    _check_lam(lam)
    if lam == 0.0:
        raise SpectralDegenerateError(
            "the tail bound needs lam > 0; with lam = 0 use the MGF bound with any alpha > 1"
        )
    if not t * lam > 1.0:
        raise DomainError(f"t={t} outside the valid range t > 1/lam = {1.0 / lam}")


@dataclass(frozen=True)
class BoundParams:
    lam: float
    phi: float
    alpha: float = None
    t: float = None

    def __post_init__(self):
        _check_lam(self.lam)
        _check_phi(self.phi)
        if self.alpha is not None:
            _check_alpha(self.lam, self.alpha)
        if self.t is not None:
            _check_t(self.lam, self.t)


BOUND_KINDS = (
    "mgf_thm1",
    "tail_cor2",
    "monomial",
    "increasing_tuple",
    "moment",
    "series_truncated",
)


@dataclass(frozen=True)
class BoundReport:
    kind: str
    value: float
    log_value: float
    params: BoundParams

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "log_value": self.log_value,
            "params": asdict(self.params),
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(
            kind=data["kind"],
            value=float(data["value"]),
            log_value=float(data["log_value"]),
            params=BoundParams(**data["params"]),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# -- MGF and tail ----------------------------------------------------------


def log_mgf_bound_thm1(lam, alpha, phi):
    """log of exp((alpha - 1) * phi * (1 - lam) / (1 - alpha * lam))."""
    _check_alpha(lam, alpha)
    _check_phi(phi)
    return (alpha - 1.0) * phi * (1.0 - lam) / (1.0 - alpha * lam)


def mgf_bound_thm1(lam, alpha, phi):
    """Upper bound on E[alpha^S_n] for 1 < alpha < 1/lam."""
    return _exp(log_mgf_bound_thm1(lam, alpha, phi))


def optimal_alpha(lam, t):
    """The alpha that turns the MGF bound into the tail bound at level t * phi."""
    _check_t(lam, t)
    return 1.0 / lam - (1.0 - lam) / (math.sqrt(t) * lam**1.5)


def log_tail_bound_cor2(lam, t, phi):
    _check_phi(phi)
    alpha = optimal_alpha(lam, t)
    return -t * phi * math.log(alpha) + phi * (1.0 - lam) * (math.sqrt(t * lam) - 1.0) / lam


def tail_bound_cor2(lam, t, phi):
    """Upper bound on Pr[S_n >= t * phi] for t > 1/lam."""
    return _exp(log_tail_bound_cor2(lam, t, phi))


def mgf_report(lam, alpha, phi):
    log_value = log_mgf_bound_thm1(lam, alpha, phi)
    return BoundReport("mgf_thm1", _exp(log_value), log_value, BoundParams(lam, phi, alpha=alpha))


def tail_report(lam, t, phi):
    log_value = log_tail_bound_cor2(lam, t, phi)
    return BoundReport("tail_cor2", _exp(log_value), log_value, BoundParams(lam, phi, t=t))


# -- monomials -------------------------------------------------------------


@dataclass(frozen=True)
class MonomialIndex:
    """A nondecreasing tuple of 0-based step indices."""

    w: tuple

    def __post_init__(self):
        w = tuple(int(i) for i in self.w)
        if not w:
            raise DomainError("monomial index must be non-empty")
        if any(b < a for a, b in zip(w, w[1:])):
            raise DomainError(f"monomial index {w} is not nondecreasing")
        if w[0] < 0:
            raise DomainError("step indices are 0-based and non-negative")
        object.__setattr__(self, "w", w)

    @property
    def gaps(self):
        return tuple(b - a for a, b in zip(self.w, self.w[1:]))

    def __len__(self):
        return len(self.w)


def _as_index(w):
    return w if isinstance(w, MonomialIndex) else MonomialIndex(tuple(w))


def monomial_bound(lam, mus, w):
    """Bound on E[Z_{w_1} ... Z_{w_k}] in product form.

    ``mus[j]`` is the mean of f_j. Each consecutive pair contributes
    ``(1 - lam^d) sqrt(mu mu') + lam^d`` where d is the step gap.
    """
    _check_lam(lam)
    w = _as_index(w).w
    m = [mus[i] for i in w]
    value = math.sqrt(m[0] * m[-1])
    for a, b, d in zip(m, m[1:], _as_index(w).gaps):
        decay = lam**d
        value *= (1.0 - decay) * math.sqrt(a * b) + decay
    return value


def monomial_bound_sum_form(lam, mus, w, max_k=20):
    """The same bound expanded as a sum over s in {0, 1}^(k-1)."""
    _check_lam(lam)
    idx = _as_index(w)
    if len(idx) > max_k:
        raise SizeLimitError(f"sum form enumerates 2^(k-1) terms; k={len(idx)} > {max_k}")
    m = [mus[i] for i in idx.w]
    gaps = idx.gaps
    head = math.sqrt(m[0] * m[-1])
    total = 0.0
    for s in range(1 << len(gaps)):
        term = head
        for i, d in enumerate(gaps):
            decay = lam**d
            if s >> i & 1:
                term *= decay
            else:
                term *= (1.0 - decay) * math.sqrt(m[i] * m[i + 1])
        total += term
    return total


def increasing_tuple_bound(k, lam, phi):
    """Bound on the expected sum of Z-products over strictly increasing k-tuples."""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    _check_lam(lam)
    _check_phi(phi)
    ratio = lam / (1.0 - lam)
    return math.fsum(
        math.comb(k - 1, i) * phi ** (i + 1) * ratio ** (k - i - 1) / math.factorial(i + 1)
        for i in range(k)
    )


# -- moments and series ----------------------------------------------------


@lru_cache(maxsize=None)
def stirling2(q, k):
    """Stirling number of the second kind, exact."""
    if q == k:
        return 1
    if k == 0 or k > q:
        return 0
    return k * stirling2(q - 1, k) + stirling2(q - 1, k - 1)


def surjections(q, k):
    """S(q, k) * k!, the number of maps from q labelled items onto k labelled boxes."""
    return stirling2(q, k) * math.factorial(k)


def moment_bound(q, lam, phi):
    """Upper bound on E[S_n^q]."""
    if q < 1:
        raise DomainError(f"q must be positive, got {q}")
    if q > MAX_MOMENT_ORDER:
        raise SizeLimitError(f"q={q} exceeds the cap {MAX_MOMENT_ORDER}")
    _check_lam(lam)
    _check_phi(phi)
    return math.fsum(
        float(surjections(q, k)) * increasing_tuple_bound(k, lam, phi) for k in range(1, q + 1)
    )


def stirling_partial_sum(k, alpha, Q):
    """sum_{q=k}^{Q} S(q, k) log(alpha)^q / q!, which tends to (alpha - 1)^k / k!."""
    if not alpha > 1.0:
        raise DomainError(f"alpha must exceed 1, got {alpha}")
    if k < 1 or Q < k:
        raise DomainError(f"need 1 <= k <= Q, got k={k}, Q={Q}")
    s = math.log(alpha)
    return math.fsum(
        float(Fraction(stirling2(q, k), math.factorial(q))) * s**q for q in range(k, Q + 1)
    )


def negative_binomial_partial_sum(i, x, J):
    """sum_{j=i}^{J} C(j-1, i-1) x^(j-i), which tends to (1 - x)^(-i)."""
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must lie in [0, 1), got {x}")
    if i < 1 or J < i:
        raise DomainError(f"need 1 <= i <= J, got i={i}, J={J}")
    return math.fsum(math.comb(j - 1, i - 1) * x ** (j - i) for j in range(i, J + 1))


def mgf_series_terms(lam, alpha, phi, Q=DEFAULT_TRUNCATION):
    """Terms log(alpha)^q * moment_bound(q) / q! for q = 1..Q."""
    _check_alpha(lam, alpha)
    _check_phi(phi)
    if not 1 <= Q <= MAX_MOMENT_ORDER:
        raise DomainError(f"truncation order must lie in [1, {MAX_MOMENT_ORDER}], got {Q}")
    s = math.log(alpha)
    inner = [increasing_tuple_bound(k, lam, phi) for k in range(1, Q + 1)]
    terms = []
    for q in range(1, Q + 1):
        coeff = math.fsum(
            float(Fraction(surjections(q, k), math.factorial(q))) * inner[k - 1]
            for k in range(1, q + 1)
        )
        terms.append(coeff * s**q)
    return terms


def mgf_series_truncated(lam, alpha, phi, Q=DEFAULT_TRUNCATION):
    """Taylor series of E[alpha^S_n] with every moment replaced by its bound, cut at Q."""
    return 1.0 + math.fsum(mgf_series_terms(lam, alpha, phi, Q))
