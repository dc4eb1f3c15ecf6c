"""Exact expectations for small walks.

Two independent routes are provided: transfer-matrix products (diagonal
marking matrices interleaved with walk-matrix powers) and explicit
enumeration of every path. They share nothing beyond the operator and the
marking, so agreement between them is a meaningful check.

Internally vectors carry plain (unnormalized) entries; expectations are
taken at the end against the starting distribution, which for symmetric
operators is the entry average, i.e. the normalized 1-norm.
"""

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bounds import MonomialIndex, _check_alpha, _check_lam
from .errors import DomainError, ShapeError, SizeLimitError
from .spectral import operator_norm

MAX_PATHS = 10**7
MAX_TUPLES = 10**6
MAX_ATOMS = 10**6
# Sums closer than this are merged into one atom.
ATOM_DECIMALS = 12


def _check_dims(op, marks):
    if marks.n_vertices != op.n_vertices:
        raise ShapeError(
            f"marking has {marks.n_vertices} vertices, operator has {op.n_vertices}"
        )


def threshold_reached(s, threshold):
    """S >= threshold up to float noise in the threshold itself."""
    return s >= threshold - 1e-9 * max(1.0, abs(threshold))


@dataclass(frozen=True, eq=False)
class SnDistribution:
    """Exact law of S_n as atoms with strictly increasing values."""

    values: np.ndarray
    probabilities: np.ndarray

    @classmethod
    def from_samples(cls, sums, probs):
        probs = np.asarray(probs, dtype=float)
        # Values reachable only along zero-probability paths are not atoms.
        keep = probs > 0
        keys = np.round(np.asarray(sums, dtype=float)[keep], ATOM_DECIMALS)
        values, inverse = np.unique(keys, return_inverse=True)
        masses = np.bincount(inverse, weights=probs[keep])
        return cls(values, masses)

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.probabilities.tolist()))

    def moment(self, q):
        return float(np.dot(self.probabilities, self.values**q))

    def mgf(self, alpha):
        return float(np.dot(self.probabilities, alpha**self.values))

    def tail(self, threshold):
        """Pr[S_n >= threshold]."""
        mask = threshold_reached(self.values, threshold)
        return float(math.fsum(self.probabilities[mask]))

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["value", "probability"])
        for v, p in zip(self.values, self.probabilities):
            writer.writerow([repr(float(v)), repr(float(p))])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            np.array([float(r["value"]) for r in rows]),
            np.array([float(r["probability"]) for r in rows]),
        )


# -- transfer-matrix route -------------------------------------------------


def exact_monomial_expectation(op, marks, w):
    """E[Z_{w_1} ... Z_{w_k}] as <start, U_1 A^{d_1} U_2 ... U_k 1>."""
    _check_dims(op, marks)
    idx = w if isinstance(w, MonomialIndex) else MonomialIndex(tuple(w))
    if idx.w[-1] >= marks.n_steps:
        raise ShapeError(f"step index {idx.w[-1]} out of range for n={marks.n_steps}")
    f = marks.values
    v = f[idx.w[-1]].copy()
    for step, d in zip(reversed(idx.w[:-1]), reversed(idx.gaps)):
        v = f[step] * (np.linalg.matrix_power(op.matrix, d) @ v)
    return float(op.stationary @ v)


def log_exact_mgf(op, marks, alpha):
    """log E[alpha^S_n] by the backward transfer product.

    The running vector is rescaled by its largest entry each step and the
    scale is accumulated in log form, so long walks do not overflow.
    """
    _check_dims(op, marks)
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    weights = alpha**marks.values
    v = weights[-1].copy()
    log_scale = 0.0
    for i in range(marks.n_steps - 2, -1, -1):
        v = weights[i] * (op.matrix @ v)
        top = v.max()
        if top > 0:
            v /= top
            log_scale += math.log(top)
    return log_scale + math.log(float(op.stationary @ v))


def exact_mgf(op, marks, alpha):
    """E[alpha^S_n], exactly (up to rounding)."""
    try:
        return math.exp(log_exact_mgf(op, marks, alpha))
    except OverflowError:
        return math.inf


def transfer_distribution(op, marks, max_atoms=MAX_ATOMS):
    """Law of S_n by propagating, per partial-sum value, the mass on each vertex.

    Cheap when S_n takes few values (indicator markings); the number of
    atoms is capped at ``max_atoms``.
    """
    _check_dims(op, marks)
    f = marks.values
    layer = {}
    for v in range(op.n_vertices):
        _deposit(layer, f[0, v], v, op.stationary[v], op.n_vertices)
    for i in range(1, marks.n_steps):
        nxt = {}
        for s, mass in layer.items():
            moved = mass @ op.matrix
            for v in np.flatnonzero(moved):
                _deposit(nxt, s + f[i, v], v, moved[v], op.n_vertices)
        if len(nxt) > max_atoms:
            raise SizeLimitError(f"more than {max_atoms} distinct partial sums")
        layer = nxt
    values = np.array(sorted(layer))
    probs = np.array([layer[s].sum() for s in values])
    return SnDistribution(values, probs)


def _deposit(layer, s, v, p, n):
    key = round(float(s), ATOM_DECIMALS)
    vec = layer.get(key)
    if vec is None:
        vec = layer[key] = np.zeros(n)
    vec[v] += p


def exact_tail(op, marks, t):
    """Pr[S_n >= t * phi] from :func:`transfer_distribution`."""
    return transfer_distribution(op, marks).tail(t * marks.phi)


# -- enumeration route -----------------------------------------------------


def brute_force_distribution(op, marks, max_paths=MAX_PATHS):
    """Law of S_n by listing all N^n vertex sequences with their probabilities."""
    _check_dims(op, marks)
    n_vertices, n = op.n_vertices, marks.n_steps
    if n_vertices**n > max_paths:
        raise SizeLimitError(f"N^n = {n_vertices}^{n} exceeds {max_paths} paths")
    f, a = marks.values, op.matrix
    all_sums, all_probs = [], []
    # One block per starting vertex keeps peak memory at N^(n-1) paths.
    for y1 in range(n_vertices):
        last = np.array([y1])
        prob = np.array([op.stationary[y1]])
        sums = np.array([f[0, y1]])
        for i in range(1, n):
            prob = (prob[:, None] * a[last]).ravel()
            sums = (sums[:, None] + f[i][None, :]).ravel()
            last = np.tile(np.arange(n_vertices), last.size)
        all_sums.append(sums)
        all_probs.append(prob)
    return SnDistribution.from_samples(np.concatenate(all_sums), np.concatenate(all_probs))


def increasing_tuple_exact_sum(op, marks, k, max_tuples=MAX_TUPLES):
    """Sum of E[Z_{w_1} ... Z_{w_k}] over all strictly increasing k-tuples."""
    n = marks.n_steps
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if math.comb(n, k) > max_tuples:
        raise SizeLimitError(f"C({n}, {k}) exceeds {max_tuples} tuples")
    return math.fsum(
        exact_monomial_expectation(op, marks, w)
        for w in itertools.combinations(range(n), k)
    )


# -- two-state closed forms ------------------------------------------------


def two_state_limit_mgf(lam, phi, alpha):
    """n -> infinity limit of the two-state chain's MGF with mu = phi / n."""
    _check_alpha(lam, alpha)
    try:
        return math.exp(phi * (1.0 - lam) * (alpha - 1.0) / (1.0 - alpha * lam))
    except OverflowError:
        return math.inf


def two_state_exact_monomial(lam, mu, w):
    """Probability the two-state chain sits in the marked state at all steps of w."""
    _check_lam(lam)
    if not 0.0 < mu < 1.0:
        raise DomainError(f"mu must lie in (0, 1), got {mu}")
    idx = w if isinstance(w, MonomialIndex) else MonomialIndex(tuple(w))
    value = mu
    for d in idx.gaps:
        decay = lam**d
        value *= (1.0 - decay) * mu + decay
    return value


# -- proof-step checkers ---------------------------------------------------


def normalized_norm(v, p=1):
    """(mean |v_i|^p)^(1/p)."""
    v = np.asarray(v, dtype=float)
    return float(np.mean(np.abs(v) ** p) ** (1.0 / p))


def claim_jbetween_sides(matrices):
    """(lhs, rhs) of ||R_1 J R_2 J ... J R_k 1||_1 <= prod ||R_i 1||_1."""
    n = matrices[0].shape[0]
    v = np.ones(n)
    for i, r in enumerate(reversed(matrices)):
        if i:
            v = np.full(n, v.mean())
        v = r @ v
    lhs = normalized_norm(v)
    rhs = math.prod(normalized_norm(r @ np.ones(n)) for r in matrices)
    return lhs, rhs


def check_claim_jbetween(matrices, slack=1e-9):
    lhs, rhs = claim_jbetween_sides(matrices)
    return lhs <= rhs + slack


def claim_diag_norm_sides(diag_vectors, matrices):
    """(lhs, rhs) of ||U_1 T_1 ... T_{k-1} U_k 1||_1 <= sqrt(||u_1||_1 ||u_k||_1) prod ||T_i||."""
    if len(matrices) != len(diag_vectors) - 1:
        raise ShapeError("need exactly one matrix between consecutive diagonal factors")
    v = np.asarray(diag_vectors[-1], dtype=float).copy()
    for u, t in zip(reversed(diag_vectors[:-1]), reversed(matrices)):
        v = np.asarray(u) * (t @ v)
    lhs = normalized_norm(v)
    rhs = math.sqrt(normalized_norm(diag_vectors[0]) * normalized_norm(diag_vectors[-1]))
    rhs *= math.prod(operator_norm(t) for t in matrices)
    return lhs, rhs


def check_claim_diag_norm(diag_vectors, matrices, slack=1e-9):
    lhs, rhs = claim_diag_norm_sides(diag_vectors, matrices)
    return lhs <= rhs + slack


def evaluate_polynomial(coeffs, x):
    """Evaluate a sparse polynomial given as {exponent tuple: coefficient}."""
    x = np.asarray(x, dtype=float)
    return math.fsum(c * float(np.prod(x ** np.asarray(e))) for e, c in coeffs.items())


def claim_poly_cs_sides(coeffs, x, y):
    """(lhs, rhs) of P(x*y) <= max(P(x^2), P(y^2)) for non-negative coefficients."""
    if any(c < 0 for c in coeffs.values()):
        raise DomainError("polynomial coefficients must be non-negative")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    lhs = evaluate_polynomial(coeffs, x * y)
    rhs = max(evaluate_polynomial(coeffs, x * x), evaluate_polynomial(coeffs, y * y))
    return lhs, rhs


def check_claim_poly_cs(coeffs, x, y, slack=1e-9):
    lhs, rhs = claim_poly_cs_sides(coeffs, x, y)
    return lhs <= rhs + slack
