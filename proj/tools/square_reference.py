"""Reference value u(1,1) for the square model problem.

Solves the Dirichlet Laplace problem on [0,2]^2 with the 5-point stencil at
h = 1/128 and h = 1/256, Richardson-extrapolates the centre value, and
cross-checks against a Fourier series solution.
"""
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad


def f(x, y):
    if x <= 0.5:
        return 4.0 * (x - 0.5) ** 2
    if x >= 1.5:
        return 4.0 * (x - 1.5) ** 2
    return 0.0


def fd_centre(h):
    n = int(round(2.0 / h))
    k = n - 1
    xs = np.linspace(0.0, 2.0, n + 1)
    idx = lambda i, j: (i - 1) * k + (j - 1)
    rows, cols, vals = [], [], []
    rhs = np.zeros(k * k)
    for i in range(1, n):
        for j in range(1, n):
            r = idx(i, j)
            rows.append(r); cols.append(r); vals.append(4.0)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if a in (0, n) or b in (0, n):
                    rhs[r] += f(xs[a], xs[b])
                else:
                    rows.append(r); cols.append(idx(a, b)); vals.append(-1.0)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(k * k, k * k))
    u = spla.spsolve(A.tocsc(), rhs)
    return u[idx(n // 2, n // 2)]


def series_centre(terms=200):
    # Left and right edges carry f = 1: by symmetry they contribute 1/2.
    total = 0.5
    # Bottom and top edges carry h(x) = f(x, 0); each contributes the same.
    for m in range(1, terms + 1):
        bn = quad(lambda x: f(x, 0.0) * np.sin(m * np.pi * x / 2.0), 0.0, 2.0,
                  points=[0.5, 1.5], limit=200)[0]
        total += 2.0 * bn * np.sin(m * np.pi / 2.0) / (2.0 * np.cosh(m * np.pi / 2.0))
    return total


if __name__ == "__main__":
    u128 = fd_centre(1.0 / 128)
    u256 = fd_centre(1.0 / 256)
    rich = (4.0 * u256 - u128) / 3.0
    print(f"fd h=1/128   {u128:.10f}")
    print(f"fd h=1/256   {u256:.10f}")
    print(f"richardson   {rich:.10f}")
    print(f"series       {series_centre():.10f}")
