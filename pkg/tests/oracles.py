"""Independent reference computations used by the tests.

Each oracle recomputes a quantity from first principles with plain numpy;
the homotopy construction only borrows the package's map container.
"""
import itertools
import math

import numpy as np

from twistlab.vn_core import AMap


def ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def flat_band_count(n, theta, j, s, lam):
    """binom(n, j) * |{xi : |2 pi xi|^2 + s^2 |theta|^2 <= lam}|."""
    gap = s * s * float(np.dot(theta, theta))
    r = math.sqrt(max(lam - gap, 0.0)) / (2 * math.pi)
    return math.comb(n, j) * ball_volume(n) * r ** n


def twisted_circle_matrix(N, period, s=1.0):
    """Degree-0 twisted Laplacian on the N-gon of length 1 with a constant per-edge twist.

    Edge i goes from vertex i to i+1 and reads e^{t/2} f(i+1) - e^{-t/2} f(i),
    divided by the spacing h = 1/N; t = s * period / N.
    """
    h = 1.0 / N
    t = s * period / N
    D = np.zeros((N, N))
    for i in range(N):
        D[i, (i + 1) % N] += math.exp(t / 2)
        D[i, i] -= math.exp(-t / 2)
    D /= h
    return D.T @ D


def group_trace(coeffs):
    """tau(sum_g c_g g) on a group algebra is the coefficient of the identity."""
    return coeffs[0]


def singular_counts(d, lam):
    """#{nonzero singular values sigma of d with sigma^2 <= lam}."""
    if d.size == 0:
        return 0
    sv = np.linalg.svd(d, compute_uv=False)
    sv2 = sv ** 2
    return int(np.sum((sv2 > 1e-10) & (sv2 <= lam)))


def betti_from_matrices(ds, dims):
    """Betti numbers of a cochain complex of plain matrices (ranks by SVD)."""
    ranks = [np.linalg.matrix_rank(d, tol=1e-9) if d.size else 0 for d in ds]
    out = []
    for k, n in enumerate(dims):
        r_out = ranks[k] if k < len(ranks) else 0
        r_in = ranks[k - 1] if k >= 1 else 0
        out.append(n - r_out - r_in)
    return out


def harmonic_oscillator_levels(hessian, j, count):
    """Closed-form spectrum of the degree-j Witten model at one zero.

    For Hessian eigenvalues a_i, the level set is
    sum_i |a_i| (2 nu_i + 1) + sum_{i in S} a_i - sum_{i not in S} a_i
    over multi-indices nu and subsets S of size j.
    """
    a = np.asarray(hessian, dtype=float)
    n = a.size
    top = count + 2
    vals = []
    for S in itertools.combinations(range(n), j):
        shift = sum(a[i] if i in S else -a[i] for i in range(n))
        for nu in itertools.product(range(top), repeat=n):
            vals.append(float(np.sum(np.abs(a) * (2 * np.asarray(nu) + 1)) + shift))
    return np.sort(vals)[:count]


def minus_projection_onto_summand(c, E, total, k):
    """T_{k+1} : total_{k+1} -> total_k, equal to -Id on the contractible summand."""
    blocks = []
    for a_src, a_tgt, e in zip(c.modules[k + 1].ranks, c.modules[k].ranks, E.modules[k].ranks):
        m = np.zeros((a_tgt + e, a_src + e), dtype=complex)
        m[a_tgt:, a_src:] = -np.eye(e)
        blocks.append(m)
    return AMap(total.modules[k + 1], total.modules[k], blocks)
