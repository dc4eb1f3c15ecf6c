"""Walk operators, marking functions and seeded random-walk sampling.

A :class:`WalkOperator` is a row-stochastic matrix together with the
distribution the walk starts from. For graphs and the interpolation
operator ``lam * I + (1 - lam) * J`` the matrix is symmetric and the start
is uniform; the two-state chain is only reversible and starts from its
stationary law. Everything downstream works on the symmetrized matrix
``D^{1/2} A D^{-1/2}``, which equals ``A`` in the symmetric case.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidParameterError, InvalidSizeError, ShapeError
from .spectral import symmetric_eigenvalues

TOL = 1e-12
LAMBDA_SNAP = 1e-10


def _frozen(array):
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class WalkOperator:
    """Transition matrix of a reversible walk plus its cached spectral value.

    ``stationary`` defaults to uniform, in which case ``matrix`` must be
    symmetric. ``degree`` is set only for graph-backed operators; every entry
    is then a multiple of ``1 / degree``. ``lam`` is computed with
    :func:`compute_lambda` unless the constructor knows it analytically.
    """

    matrix: np.ndarray
    stationary: np.ndarray = None
    degree: int = None
    lam: float = None

    def __post_init__(self):
        a = _frozen(self.matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ShapeError(f"walk matrix must be square and non-empty, got {a.shape}")
        n = a.shape[0]
        if self.stationary is None:
            pi = _frozen(np.full(n, 1.0 / n))
        else:
            pi = _frozen(self.stationary)
            if pi.shape != (n,):
                raise ShapeError(f"stationary has shape {pi.shape}, expected ({n},)")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "stationary", pi)
        _validate(a, pi, self.degree)
        if self.lam is None:
            object.__setattr__(self, "lam", compute_lambda(self))

    @property
    def n_vertices(self):
        return self.matrix.shape[0]

    @property
    def is_symmetric(self):
        return bool(np.all(np.abs(self.stationary - 1.0 / self.n_vertices) <= TOL))

    def symmetrized(self):
        """``D^{1/2} A D^{-1/2}`` with ``D = diag(stationary)``."""
        s = np.sqrt(self.stationary)
        return (s[:, None] * self.matrix) / s[None, :]


def _validate(a, pi, degree):
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise InvalidParameterError(f"negative transition probability at ({i}, {j})")
    rows = np.abs(a.sum(axis=1) - 1.0)
    if np.any(rows > TOL):
        raise InvalidParameterError(f"row {int(np.argmax(rows))} does not sum to 1")
    if np.any(pi <= 0) or abs(pi.sum() - 1.0) > TOL:
        raise InvalidParameterError("stationary distribution must be positive and sum to 1")
    flow = pi[:, None] * a
    if np.any(np.abs(flow - flow.T) > TOL):
        what = "symmetric" if np.allclose(pi, pi[0]) else "reversible w.r.t. its stationary law"
        raise InvalidParameterError(f"walk matrix is not {what}")
    if degree is not None:
        if degree < 1:
            raise InvalidParameterError("degree must be positive")
        scaled = a * degree
        if np.any(np.abs(scaled - np.round(scaled)) > 1e-9):
            raise InvalidParameterError(f"entries are not multiples of 1/{degree}")


@dataclass(frozen=True, eq=False)
class MarkingFunctions:
    """The functions f_1..f_n as an (n, N) array of values in [0, 1].

    ``mus[i]`` is the expectation of f_i under ``weights`` (uniform unless
    given, see :func:`marks_for`) and ``phi`` is their sum.
    """

    values: np.ndarray
    weights: np.ndarray = None
    mus: np.ndarray = field(init=False)
    phi: float = field(init=False)

    def __post_init__(self):
        v = _frozen(np.atleast_2d(self.values))
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ShapeError(f"marking values must be an (n, N) array, got {v.shape}")
        if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
            raise InvalidParameterError("marking values must lie in [0, 1]")
        n_vertices = v.shape[1]
        w = np.full(n_vertices, 1.0 / n_vertices) if self.weights is None else self.weights
        w = _frozen(w)
        if w.shape != (n_vertices,):
            raise ShapeError(f"weights have shape {w.shape}, expected ({n_vertices},)")
        mus = _frozen(v @ w)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "mus", mus)
        object.__setattr__(self, "phi", float(mus.sum()))

    @property
    def n_steps(self):
        return self.values.shape[0]

    @property
    def n_vertices(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class WalkSample:
    vertices: tuple
    z_values: tuple
    s_n: float
    seed_bits: float


# -- constructors ----------------------------------------------------------


def _check_size(n):
    if int(n) != n or n < 1:
        raise InvalidSizeError(f"number of vertices must be a positive integer, got {n}")
    return int(n)


def make_complete_with_loops(n):
    """Complete graph with a self-loop at every vertex: A = J, lambda = 0."""
    n = _check_size(n)
    return WalkOperator(np.full((n, n), 1.0 / n), degree=n, lam=0.0)


def make_interpolation(n, lam):
    """The operator ``lam * I + (1 - lam) * J`` on ``n`` vertices."""
    n = _check_size(n)
    if not 0.0 <= lam < 1.0:
        raise InvalidParameterError(f"lam must lie in [0, 1), got {lam}")
    a = np.full((n, n), (1.0 - lam) / n)
    a[np.diag_indices(n)] += lam
    # A single vertex has no non-trivial eigenvalue.
    return WalkOperator(a, lam=float(lam) if n > 1 else 0.0)


def make_two_state_chain(lam, mu):
    """Two-state chain: stay with probability ``lam``, else resample from (mu, 1 - mu).

    State 0 is the marked state. The chain is reversible with stationary law
    (mu, 1 - mu) and its non-trivial eigenvalue is exactly ``lam``.
    """
    if not 0.0 <= lam < 1.0:
        raise InvalidParameterError(f"lam must lie in [0, 1), got {lam}")
    if not 0.0 < mu < 1.0:
        raise InvalidParameterError(f"mu must lie in (0, 1), got {mu}")
    pi = np.array([mu, 1.0 - mu])
    a = lam * np.eye(2) + (1.0 - lam) * np.tile(pi, (2, 1))
    return WalkOperator(a, stationary=pi, lam=float(lam))


def make_random_regular(n, d, seed, max_attempts=100):
    """Random d-regular multigraph as a sum of matchings or permutations.

    With ``n`` even the graph is a union of ``d`` uniformly random perfect
    matchings; otherwise ``d`` must be even and the graph is the union of
    ``d / 2`` random permutations together with their inverses. Self-loops
    and multi-edges are allowed, so entries are multiples of ``1 / d``.
    If the result has lambda = 1 (disconnected or bipartite) the next seed
    is tried.
    """
    n = _check_size(n)
    if d < 3 or n <= d or (n * d) % 2:
        raise InvalidParameterError(f"need d >= 3, N > d and N*d even; got N={n}, d={d}")
    last = None
    for attempt in range(max_attempts):
        rng = np.random.default_rng(seed + attempt)
        a = np.zeros((n, n))
        rows = np.arange(n)
        if n % 2 == 0:
            for _ in range(d):
                perm = rng.permutation(n)
                left, right = perm[: n // 2], perm[n // 2 :]
                a[left, right] += 1.0
                a[right, left] += 1.0
        else:
            for _ in range(d // 2):
                perm = rng.permutation(n)
                a[rows, perm] += 1.0
                a[perm, rows] += 1.0
        last = WalkOperator(a / d, degree=d)
        if last.lam < 1.0 - 1e-9:
            return last
    return last


def operator_from_matrix(matrix, degree=None):
    """Wrap a user-supplied symmetric doubly stochastic matrix."""
    return WalkOperator(np.asarray(matrix, dtype=float), degree=degree)


# -- spectral value --------------------------------------------------------


def compute_lambda(op, method="auto"):
    """Largest absolute eigenvalue of the walk restricted to mean-zero functions.

    For a symmetric operator this is ``||A - J||``. Reversible operators use
    the symmetrized matrix minus the projection onto ``sqrt(stationary)``.
    """
    n = op.n_vertices
    if n == 1:
        return 0.0
    s = np.sqrt(op.stationary)
    m = op.symmetrized() - np.outer(s, s)
    eig = symmetric_eigenvalues(0.5 * (m + m.T), method=method)
    lam = float(max(abs(eig[0]), abs(eig[-1])))
    # Snap to 1 within solver tolerance so degenerate walks are rejected by the bounds.
    return 1.0 if lam > 1.0 - LAMBDA_SNAP else lam


# -- sampling --------------------------------------------------------------


def seed_length_bits(n_vertices, degree, n_steps):
    """Random bits used by an expander sampler: log2 N + (n - 1) log2 d."""
    return float(np.log2(n_vertices) + (n_steps - 1) * np.log2(degree))


def _effective_degree(op):
    # Weighted operators have no degree; count the largest row support instead.
    if op.degree is not None:
        return op.degree
    return int(np.max(np.count_nonzero(op.matrix > 0, axis=1)))


def _cumulative(probabilities):
    cum = np.cumsum(probabilities, axis=-1)
    # Normalizing by the last column makes the final positive entry exactly 1,
    # so a uniform draw in [0, 1) never lands on a zero-probability state.
    return cum / cum[..., -1:]


def _check_dims(op, marks):
    if marks.n_vertices != op.n_vertices:
        raise ShapeError(
            f"marking has {marks.n_vertices} vertices, operator has {op.n_vertices}"
        )


def sample_walk(op, marks, seed):
    """One walk Y_1..Y_n, deterministic for a fixed ``seed``."""
    _check_dims(op, marks)
    rng = np.random.default_rng(seed)
    start = _cumulative(op.stationary)
    steps = _cumulative(op.matrix)
    n = marks.n_steps
    vertices = np.empty(n, dtype=np.intp)
    vertices[0] = np.searchsorted(start, rng.random(), side="right")
    for i in range(1, n):
        vertices[i] = np.searchsorted(steps[vertices[i - 1]], rng.random(), side="right")
    z = marks.values[np.arange(n), vertices]
    return WalkSample(
        vertices=tuple(int(v) for v in vertices),
        z_values=tuple(float(x) for x in z),
        s_n=float(z.sum()),
        seed_bits=seed_length_bits(op.n_vertices, _effective_degree(op), n),
    )


def simulate_sums(op, marks, n_walks, rng, chunk_cells=1 << 22):
    """S_n for ``n_walks`` independent walks drawn from ``rng``.

    Walks advance in lockstep; memory per chunk is bounded by
    ``chunk_cells`` (walks times vertices).
    """
    _check_dims(op, marks)
    start = _cumulative(op.stationary)
    steps = _cumulative(op.matrix)
    n_vertices = op.n_vertices
    chunk = max(1, chunk_cells // n_vertices)
    out = np.empty(n_walks)
    for lo in range(0, n_walks, chunk):
        m = min(chunk, n_walks - lo)
        pos = np.searchsorted(start, rng.random(m), side="right")
        total = marks.values[0, pos].copy()
        for i in range(1, marks.n_steps):
            u = rng.random(m)
            pos = np.count_nonzero(steps[pos] <= u[:, None], axis=1)
            total += marks.values[i, pos]
        out[lo : lo + m] = total
    return out


# -- markings --------------------------------------------------------------


def marks_for(op, values):
    """Marking whose means are taken under ``op``'s starting distribution."""
    return MarkingFunctions(np.atleast_2d(values), weights=op.stationary)


def constant_marking(op, n_steps, value):
    return marks_for(op, np.full((n_steps, op.n_vertices), float(value)))


def indicator_marking(op, n_steps, marked):
    """Every f_i is the indicator of the vertex set ``marked``."""
    f = np.zeros(op.n_vertices)
    f[list(marked)] = 1.0
    return marks_for(op, np.tile(f, (n_steps, 1)))


def random_density_marking(op, n_steps, mu, seed):
    """Mark round(mu * N) uniformly chosen vertices, the same set at every step."""
    if not 0.0 <= mu <= 1.0:
        raise InvalidParameterError(f"mu must lie in [0, 1], got {mu}")
    k = int(round(mu * op.n_vertices))
    chosen = np.random.default_rng(seed).choice(op.n_vertices, size=k, replace=False)
    return indicator_marking(op, n_steps, chosen)


# -- file formats ----------------------------------------------------------


def _parse_row(line, lineno, width):
    try:
        row = [float(tok) for tok in line.split()]
    except ValueError as exc:
        raise FormatError(f"non-numeric entry ({exc})", lineno) from None
    if len(row) != width:
        raise FormatError(f"expected {width} entries, found {len(row)}", lineno)
    return row


def parse_matrix(text):
    """Matrix file: line 1 is N, then N rows of N decimals."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("missing size header", 1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError(f"size header {lines[0].strip()!r} is not an integer", 1) from None
    if n < 1:
        raise FormatError("N must be positive", 1)
    if len(lines) - 1 < n:
        raise FormatError(f"expected {n} matrix rows, found {len(lines) - 1}", len(lines) + 1)
    rows = [_parse_row(lines[i], i + 1, n) for i in range(1, n + 1)]
    a = np.array(rows)
    for i, row in enumerate(a):
        if np.any(row < 0) or abs(row.sum() - 1.0) > TOL:
            raise FormatError("row is not a probability vector", i + 2)
    try:
        return operator_from_matrix(a)
    except InvalidParameterError as exc:
        raise FormatError(str(exc)) from None


def format_matrix(op):
    rows = [" ".join(repr(float(x)) for x in row) for row in op.matrix]
    return "\n".join([str(op.n_vertices), *rows]) + "\n"


def load_matrix(path):
    return parse_matrix(Path(path).read_text())


def save_matrix(op, path):
    Path(path).write_text(format_matrix(op))


def parse_marking(text, weights=None):
    """Marking file: line 1 is "n N", then n rows of N values in [0, 1]."""
    lines = text.splitlines()
    header = lines[0].split() if lines else []
    if len(header) != 2:
        raise FormatError('header must be "n N"', 1)
    try:
        n, width = int(header[0]), int(header[1])
    except ValueError:
        raise FormatError('header must be two integers "n N"', 1) from None
    if n < 1 or width < 1:
        raise FormatError("n and N must be positive", 1)
    if len(lines) - 1 < n:
        raise FormatError(f"expected {n} rows, found {len(lines) - 1}", len(lines) + 1)
    rows = []
    for i in range(1, n + 1):
        row = _parse_row(lines[i], i + 1, width)
        if any(x < 0 or x > 1 for x in row):
            raise FormatError("values must lie in [0, 1]", i + 1)
        rows.append(row)
    return MarkingFunctions(np.array(rows), weights=weights)


def format_marking(marks):
    rows = [" ".join(repr(float(x)) for x in row) for row in marks.values]
    return "\n".join([f"{marks.n_steps} {marks.n_vertices}", *rows]) + "\n"


def load_marking(path, weights=None):
    return parse_marking(Path(path).read_text(), weights=weights)


def save_marking(marks, path):
    Path(path).write_text(format_marking(marks))
