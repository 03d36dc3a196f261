"""Shared builders for randomized test systems."""

import numpy as np

import supertomo as st


def random_sparse_system(rng, m, grid, box=(0.0, 1.0)):
    """A consistent random system with its solution strictly inside the box.

    Rows get random sparse supports with positive weights, mimicking ray
    traces; b is the exact projection of the returned solution.
    """
    n = grid.n
    rows = []
    for _ in range(m):
        nnz = int(rng.integers(3, n + 1))
        idx = np.sort(rng.choice(n, size=nnz, replace=False))
        w = rng.uniform(0.1, 1.0, size=nnz)
        rows.append(st.SparseRow(idx, w))
    lo, hi = box
    span = hi - lo
    x_star = rng.uniform(lo + 0.1 * span, hi - 0.1 * span, size=grid.shape)
    system = st.ProjectionSystem(rows=rows, b=np.zeros(m), box=box, grid=grid)
    return system.with_b(st.forward_project(system, x_star)), x_star


def naive_residual(x, system):
    """Plain double-loop ||Ax - b||; independent of the library's res()."""
    flat = np.asarray(x, dtype=float).ravel()
    total = 0.0
    for row, b_i in zip(system.rows, system.b):
        dot = 0.0
        for idx, w in zip(row.indices, row.weights):
            dot += w * flat[idx]
        total += (b_i - dot) ** 2
    return total ** 0.5
