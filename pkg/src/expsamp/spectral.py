"""Symmetric eigenvalues by Jacobi rotations.

Rotations are applied in round-robin (Brent-Luk) order so each round zeroes
N/2 disjoint off-diagonal pairs at once with vectorized numpy updates.
"""

import numpy as np

from .errors import ShapeError, SizeLimitError

MAX_DIM = 2048
# Above this size LAPACK is used by default; Jacobi stays available on request.
JACOBI_AUTO_MAX = 256


def _round_robin(m):
    """Pairings for a round-robin tournament on ``m`` (even) players.

    Returns an array of shape (m - 1, m // 2, 2); every unordered pair
    appears in exactly one round.
    """
    others = list(range(1, m))
    rounds = []
    for _ in range(m - 1):
        order = [0] + others
        rounds.append([(order[i], order[m - 1 - i]) for i in range(m // 2)])
        others = others[-1:] + others[:-1]
    return np.array(rounds, dtype=np.intp)


def jacobi_eigenvalues(a, tol=1e-13, max_sweeps=60):
    """Eigenvalues of the symmetric matrix ``a`` in ascending order.

    Sweeps continue until the off-diagonal Frobenius norm drops below
    ``tol`` times the Frobenius norm of ``a``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n <= 1:
        return np.diag(a).copy()
    a = 0.5 * (a + a.T)
    m = n + (n % 2)
    if m != n:
        # Pad with an isolated zero row/column; its eigenvalue 0 is dropped below.
        padded = np.zeros((m, m))
        padded[:n, :n] = a
        a = padded
    rounds = _round_robin(m)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    threshold = tol * scale
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= threshold:
            break
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            col_p, col_q = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * col_p - s * col_q
            a[:, q] = s * col_p + c * col_q
            row_p, row_q = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * row_p - s[:, None] * row_q
            a[q, :] = s[:, None] * row_p + c[:, None] * row_q
            a[p, q] = 0.0
            a[q, p] = 0.0
    # A padded coordinate never mixes with the others since its row stays zero.
    return np.sort(np.diag(a)[:n])


def symmetric_eigenvalues(a, method="auto"):
    """Eigenvalues of a symmetric matrix via ``method`` in {auto, jacobi, lapack}."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > MAX_DIM:
        raise SizeLimitError(f"N={n} exceeds the eigensolver cap of {MAX_DIM}")
    if method == "auto":
        method = "jacobi" if n <= JACOBI_AUTO_MAX else "lapack"
    if method == "jacobi":
        return jacobi_eigenvalues(a)
    if method == "lapack":
        return np.linalg.eigvalsh(0.5 * (a + a.T))
    raise ValueError(f"unknown eigensolver method {method!r}")


def operator_norm(t, method="auto"):
    """Largest singular value of ``t``, from the eigenvalues of t^T t."""
    t = np.asarray(t, dtype=float)
    eig = symmetric_eigenvalues(t.T @ t, method=method)
    return float(np.sqrt(max(eig[-1], 0.0)))
