"""Maximally separated class prototypes.

The prototypes for ``N`` classes are the columns of an ``(N-1) x N`` matrix
built by the recursion

    P_1 = [1, -1]
    P_k = [[1, -(1/k) 1^T], [0, sqrt(1 - 1/k^2) P_{k-1}]]

Every column has unit norm and every pair of distinct columns has dot product
``-1/(N-1)``, i.e. the columns are the vertices of a regular simplex centred
at the origin.
"""

from __future__ import annotations

import math

import numpy as np

NORM_TOL = 1e-12
DOT_TOL = 1e-12
SUM_TOL = 1e-10


def build_prototypes(num_classes: int) -> np.ndarray:
    """Return the ``(N-1, N)`` prototype matrix; column ``c`` belongs to class ``c``.

    The result is read-only so it can be shared freely.
    """
    if int(num_classes) != num_classes or num_classes < 2:
        raise ValueError(f"num_classes must be an integer >= 2, got {num_classes!r}")
    p = np.array([[1.0, -1.0]])
    for k in range(2, int(num_classes)):
        nxt = np.zeros((k, k + 1))
        nxt[0, 0] = 1.0
        nxt[0, 1:] = -1.0 / k
        nxt[1:, 1:] = math.sqrt(1.0 - 1.0 / (k * k)) * p
        p = nxt
    p.setflags(write=False)
    return p


def validate_prototypes(p: np.ndarray) -> list[str]:
    """Check the simplex invariants of a prototype matrix.

    Returns one human-readable entry per violation; an empty list means the
    matrix is a valid prototype set.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] < 2 or p.shape[0] != p.shape[1] - 1:
        return [f"shape {p.shape} is not (N-1, N) with N >= 2"]
    n = p.shape[1]
    problems = []
    norms = np.linalg.norm(p, axis=0)
    for c in range(n):
        if abs(norms[c] - 1.0) >= NORM_TOL:
            problems.append(f"norm: column {c} has norm {norms[c]!r}, expected 1")
    gram = p.T @ p
    target = -1.0 / (n - 1)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(gram[i, j] - target) >= DOT_TOL:
                problems.append(f"dot: columns ({i}, {j}) have dot {gram[i, j]!r}, expected {target!r}")
    total = p.sum(axis=1)
    worst = float(np.max(np.abs(total)))
    if worst >= SUM_TOL:
        problems.append(f"sum: column sum has max abs component {worst!r}, expected 0")
    return problems
