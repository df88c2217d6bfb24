"""Exact dense references: lattice state vectors and small Majorana Fock spaces.

The state-vector side handles lattices up to 20 sites (qubit order = site id
order) and is the cross-validation target for the tableau simulator. The Fock
side builds explicit Majorana matrices for up to 6 modes and backs the
braiding equivalence checks.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString

MAX_DENSE_SITES = 20

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_LETTER_MATRIX = {"X": _X, "Y": _Y, "Z": _Z}


class DegenerateStateError(ValueError):
    """A projection annihilated the state (norm below tolerance)."""


def pauli_matrix(p: PauliString, sites: list[int]) -> np.ndarray:
    """Dense matrix of ``p`` over the given qubit ordering (site ids)."""
    n = len(sites)
    mat = np.array([[p.phase.value]], dtype=np.complex128)
    letters = p.letters()
    for site in sites:
        mat = np.kron(mat, _LETTER_MATRIX.get(letters.get(site, "I"), np.eye(2)))
    return mat


def apply_pauli(amps: np.ndarray, p: PauliString, sites: list[int]) -> np.ndarray:
    """Apply a Pauli string to a 2^n amplitude vector (qubit k = sites[k])."""
    n = len(sites)
    index = {s: k for k, s in enumerate(sites)}
    out = amps.reshape((2,) * n)
    for site, letter in p.support:
        axis = index[site]
        if letter in ("X", "Y"):
            out = np.flip(out, axis=axis)
        if letter in ("Z", "Y"):
            sign = np.ones((1,) * axis + (2,) + (1,) * (n - axis - 1))
            sign[(0,) * axis + (1,) + (0,) * (n - axis - 1)] = -1.0
            out = out * sign
        if letter == "Y":
            # flip-then-sign realizes Z·X = i·Y, so a uniform -i completes Y
            out = out * (-1j)
    return (p.phase.value * out).reshape(-1)


def _check_size(n: int):
    if n > MAX_DENSE_SITES:
        raise ValueError(f"dense oracle capped at {MAX_DENSE_SITES} sites, got {n}")


def zero_state(n: int) -> np.ndarray:
    _check_size(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = 1.0
    return amps


def project_eigenvalue(
    amps: np.ndarray, p: PauliString, sites: list[int], sign: int
) -> np.ndarray:
    """Project onto the ``sign`` (+1/-1) eigenspace of ``p``; not normalized."""
    return 0.5 * (amps + sign * apply_pauli(amps, p, sites))


def prepare_ground(lat, pin_vacuum: bool = True) -> np.ndarray:
    """Common +1 eigenstate of all plaquettes via sequential projection.

    With ``pin_vacuum`` every twist pair's parity string is also projected to
    its vacuum (-1) eigenvalue, fixing the logical sector deterministically.
    """
    from . import jw
    from .lattice import all_plaquette_operators

    _check_size(lat.n_sites)
    sites = list(lat.sites)
    amps = zero_state(lat.n_sites)
    for op in all_plaquette_operators(lat):
        amps = project_eigenvalue(amps, op, sites, +1)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise DegenerateStateError(
                "plaquette projection annihilated the state; "
                "stabilizer set is inconsistent"
            )
        amps /= norm
    if pin_vacuum:
        for pair in range(lat.n_pairs):
            path = jw.default_path(lat, pair)
            parity = jw.parity_operator(lat, path, pair)
            amps = project_eigenvalue(amps, parity, sites, -1)
            norm = np.linalg.norm(amps)
            if norm < 1e-12:
                raise DegenerateStateError("parity projection annihilated the state")
            amps /= norm
    return amps


def expectation(amps: np.ndarray, p: PauliString, sites: list[int]) -> complex:
    return complex(np.vdot(amps, apply_pauli(amps, p, sites)))


def measure_projective(
    amps: np.ndarray,
    p: PauliString,
    sites: list[int],
    rng: np.random.Generator,
    force: int | None = None,
) -> tuple[int, np.ndarray]:
    """Born-rule measurement of a Hermitian Pauli string; returns (±1, state)."""
    if not p.is_hermitian:
        raise ValueError(f"cannot measure non-Hermitian operator {p}")
    plus = project_eigenvalue(amps, p, sites, +1)
    w_plus = float(np.linalg.norm(plus) ** 2)
    if force is None:
        outcome = 1 if rng.random() < w_plus else -1
    else:
        outcome = force
        w = w_plus if force == 1 else 1.0 - w_plus
        if w < 1e-12:
            raise ValueError(f"forced outcome {force} has zero probability")
    post = plus if outcome == 1 else project_eigenvalue(amps, p, sites, -1)
    norm = np.linalg.norm(post)
    if norm < 1e-12:
        raise DegenerateStateError("measurement branch has vanishing norm")
    return outcome, post / norm


def fidelity_up_to_phase(u: np.ndarray, v: np.ndarray) -> float:
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(abs(np.vdot(u, v)))


class FockSpace:
    """Explicit matrices for ``n_modes`` Majorana operators (n_modes even).

    Mode 2k/2k+1 come from fermion k under the usual chain construction, so
    the matrices square to one and pairwise anticommute. Numbering is
    1-based to match the anyon labels used elsewhere.
    """

    def __init__(self, n_modes: int):
        if n_modes % 2 or n_modes < 2:
            raise ValueError("number of Majorana modes must be even and positive")
        self.n_modes = n_modes
        self.n_fermions = n_modes // 2
        self.dim = 2**self.n_fermions
        self.gammas: list[np.ndarray] = []
        for mode in range(n_modes):
            k, which = divmod(mode, 2)
            ops = [_Z] * k + [_X if which == 0 else _Y]
            ops += [np.eye(2)] * (self.n_fermions - k - 1)
            mat = np.array([[1.0]], dtype=np.complex128)
            for op in ops:
                mat = np.kron(mat, op)
            self.gammas.append(mat)

    def gamma(self, label: int) -> np.ndarray:
        """Majorana matrix for 1-based mode label."""
        return self.gammas[label - 1]

    def parity_op(self, a: int, b: int) -> np.ndarray:
        """i * gamma_a * gamma_b; fermion number of the pair is (1 + P)/2."""
        return 1j * self.gamma(a) @ self.gamma(b)

    def number_op(self, a: int, b: int) -> np.ndarray:
        return 0.5 * (np.eye(self.dim) + self.parity_op(a, b))

    def braid_op(self, a: int, b: int) -> np.ndarray:
        """Exchange of modes a and b: (1 + gamma_b gamma_a) / sqrt(2)."""
        return (np.eye(self.dim) + self.gamma(b) @ self.gamma(a)) / np.sqrt(2)

    def measure_number(
        self,
        amps: np.ndarray,
        a: int,
        b: int,
        rng: np.random.Generator,
        force: int | None = None,
    ) -> tuple[int, np.ndarray]:
        """Measure the pair's fermion number; returns (n in {0,1}, state)."""
        n_op = self.number_op(a, b)
        pop = amps.conj() @ n_op @ amps
        p1 = float(pop.real)
        if force is None:
            n = 1 if rng.random() < p1 else 0
        else:
            n = force
            w = p1 if force == 1 else 1.0 - p1
            if w < 1e-12:
                raise ValueError(f"forced number {force} has zero probability")
        proj = n_op if n == 1 else np.eye(self.dim) - n_op
        post = proj @ amps
        norm = np.linalg.norm(post)
        if norm < 1e-12:
            raise DegenerateStateError("measurement branch has vanishing norm")
        return n, post / norm

    def pairing_basis(self, pairs: list[tuple[int, int]]) -> dict[tuple[int, ...], np.ndarray]:
        """Joint number eigenbasis of disjoint pairs, with a fixed gauge.

        The all-zero state's phase is fixed by making its first nonzero
        amplitude real positive; occupied states are generated from it with
        the creation operators (gamma_a - i gamma_b)/2 in pair order.
        """
        flat = [m for pair in pairs for m in pair]
        if sorted(flat) != list(range(1, self.n_modes + 1)):
            raise ValueError(f"pairs {pairs} must partition the modes")
        vac = np.ones(self.dim, dtype=np.complex128)
        for a, b in pairs:
            vac = (np.eye(self.dim) - self.number_op(a, b)) @ vac
        norm = np.linalg.norm(vac)
        if norm < 1e-12:
            raise DegenerateStateError("pairing vacuum projection vanished")
        vac /= norm
        lead = np.flatnonzero(np.abs(vac) > 1e-9)[0]
        vac = vac * (abs(vac[lead]) / vac[lead])
        basis = {}
        for labels in np.ndindex(*(2,) * len(pairs)):
            vec = vac
            for (a, b), n in zip(pairs, labels):
                if n:
                    vec = 0.5 * (self.gamma(a) - 1j * self.gamma(b)) @ vec
            basis[tuple(int(x) for x in labels)] = vec
        return basis
