"""GF(2) linear algebra on dense uint8 bit matrices.

Used for plaquette independence (rank), stabilizer-group membership and the
symplectic solves that construct logical operators. Sizes here are tiny
(hundreds of bits), so plain Gaussian elimination is plenty.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString


def symplectic_vector(p: PauliString, site_index: dict[int, int]) -> np.ndarray:
    """(x|z) bit vector of a Pauli string over a fixed site ordering."""
    n = len(site_index)
    v = np.zeros(2 * n, dtype=np.uint8)
    for site, letter in p.support:
        i = site_index[site]
        if letter in ("X", "Y"):
            v[i] = 1
        if letter in ("Z", "Y"):
            v[n + i] = 1
    return v


def pauli_from_vector(v: np.ndarray, sites: list[int], phase: int = 0) -> PauliString:
    n = len(sites)
    letters: dict[int, str] = {}
    for i, site in enumerate(sites):
        x, z = int(v[i]), int(v[n + i])
        if x and z:
            letters[site] = "Y"
        elif x:
            letters[site] = "X"
        elif z:
            letters[site] = "Z"
    return PauliString.from_dict(letters, phase)


def rank(mat: np.ndarray) -> int:
    """Rank of a binary matrix over GF(2). ``mat`` is copied, rows x cols."""
    a = np.array(mat, dtype=np.uint8) % 2
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        mask = a[:, c].copy()
        mask[r] = 0
        a[mask == 1] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def solve(mat: np.ndarray, target: np.ndarray) -> np.ndarray | None:
    """Solve x·mat = target over GF(2) (x selects rows). None if insoluble."""
    a = np.array(mat, dtype=np.uint8) % 2
    rows, cols = a.shape
    t = np.array(target, dtype=np.uint8) % 2
    # Track row operations in an augmented identity.
    combo = np.eye(rows, dtype=np.uint8)
    r = 0
    pivots: list[int] = []
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        combo[[r, pivot]] = combo[[pivot, r]]
        mask = a[:, c].copy()
        mask[r] = 0
        combo[mask == 1] ^= combo[r]
        a[mask == 1] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    x = np.zeros(rows, dtype=np.uint8)
    residual = t.copy()
    for i, c in enumerate(pivots):
        if residual[c]:
            residual ^= a[i]
            x ^= combo[i]
    if residual.any():
        return None
    return x


def in_span(mat: np.ndarray, target: np.ndarray) -> bool:
    return solve(mat, target) is not None


def symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    """Commutation pairing: 0 if the Paulis commute, 1 if they anticommute."""
    n = len(u) // 2
    return int((u[:n] @ v[n:] + u[n:] @ v[:n]) % 2)


def solve_symplectic(
    constraints: list[tuple[np.ndarray, int]], n_sites: int
) -> np.ndarray | None:
    """Find a (x|z) vector with prescribed commutation pairings.

    Each constraint is (vector, parity): the result must have
    symplectic_product(result, vector) == parity. Returns None if the
    system is inconsistent, otherwise a deterministic solution.
    """
    if not constraints:
        return np.zeros(2 * n_sites, dtype=np.uint8)
    # symplectic_product(r, v) is linear in r: it is r · J(v) with J swapping
    # the x and z halves, so this is an ordinary linear solve.
    rows = []
    rhs = []
    for v, parity in constraints:
        swapped = np.concatenate([v[n_sites:], v[:n_sites]])
        rows.append(swapped)
        rhs.append(parity)
    a = np.array(rows, dtype=np.uint8)
    b = np.array(rhs, dtype=np.uint8)
    # Solve a · r^T = b by eliminating over the 2n unknowns.
    m = a.shape[0]
    aug = np.concatenate([a, b[:, None]], axis=1).astype(np.uint8)
    r = 0
    pivots = []
    for c in range(2 * n_sites):
        pivot = None
        for i in range(r, m):
            if aug[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        aug[[r, pivot]] = aug[[pivot, r]]
        mask = aug[:, c].copy()
        mask[r] = 0
        aug[mask == 1] ^= aug[r]
        pivots.append(c)
        r += 1
    for i in range(r, m):
        if aug[i, -1]:
            return None
    x = np.zeros(2 * n_sites, dtype=np.uint8)
    for i in range(r - 1, -1, -1):
        c = pivots[i]
        val = aug[i, -1]
        row = aug[i, :-1]
        acc = int((row * x).sum() % 2) ^ int(row[c]) * int(x[c])
        x[c] = (int(val) ^ acc) % 2
    return x
