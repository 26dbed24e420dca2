"""Independent brute-force references used only by the tests.

Nothing here shares code with the package: each routine solves its problem
by exhaustive enumeration so that it can serve as ground truth.
"""

from itertools import combinations, permutations

import numpy as np


def _equality_projection(x, A, b):
    # argmin |y - x| subject to A y = b, via the normal equations
    if A.shape[0] == 0:
        return x.copy()
    lam, *_ = np.linalg.lstsq(A @ A.T, A @ x - b, rcond=None)
    return x - A.T @ lam


def qp_projection(x, normals, offsets, feas_tol=1e-9):
    """Projection onto ``{y : normals @ y <= offsets}`` by active-set enumeration."""
    x = np.asarray(x, dtype=float)
    best, best_d = None, np.inf
    p = len(offsets)
    for size in range(p + 1):
        for S in combinations(range(p), size):
            S = list(S)
            y = _equality_projection(x, normals[S], offsets[S])
            if np.all(normals @ y <= offsets + feas_tol):
                d = np.sum((y - x) ** 2)
                if d < best_d:
                    best, best_d = y, d
    return best


def hull_min_norm(points):
    """Min-norm point of conv(points) by enumerating supporting subsets."""
    P = np.asarray(points, dtype=float)
    best, best_n = None, np.inf
    for size in range(1, len(P) + 1):
        for S in combinations(range(len(P)), size):
            Q = P[list(S)]
            k = len(S)
            kkt = np.zeros((k + 1, k + 1))
            kkt[:k, :k] = Q @ Q.T
            kkt[:k, k] = 1.0
            kkt[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            w = sol[:k]
            if np.all(w >= -1e-12) and abs(w.sum() - 1) < 1e-9:
                y = w @ Q
                nrm = np.linalg.norm(y)
                if nrm < best_n:
                    best, best_n = y, nrm
    return best


def assignment_w2(a, b):
    """Squared W2 between equal-size point clouds over all pairings."""
    a = np.asarray(a, dtype=float).reshape(len(a), -1)
    b = np.asarray(b, dtype=float).reshape(len(b), -1)
    return min(np.mean(np.sum((a - b[list(perm)]) ** 2, axis=1))
               for perm in permutations(range(len(b))))


def random_polytope(gen, n, p):
    """``p`` random cuts ``<a_i, x> <= b_i`` with ``b_i > 0``, so 0 is interior."""
    return gen.standard_normal((p, n)), gen.uniform(0.1, 1.5, p)
