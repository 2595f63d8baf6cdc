"""4x4 Clifford matrices and the global-degeneracy check.

Kronecker convention used everywhere in the package: the first factor
(sigma) labels the outer 2x2 block, the second (tau or s) the inner one,
so the basis order is (sigma, s) = (0,0), (0,1), (1,0), (1,1).
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ValidationError

S0 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"0": S0, "x": SX, "y": SY, "z": SZ}

I4 = np.eye(4, dtype=complex)


def kron(a, b):
    """Outer factor ``a`` (sigma), inner factor ``b`` (tau / s)."""
    return np.kron(a, b)


def pauli_product(outer, inner, sign=1):
    return sign * kron(PAULI[outer], PAULI[inner])


# Literal generator / commutator assignments, as (sign, sigma, tau).
GENERATOR_TABLE = {
    0: (1, "0", "0"),
    1: (1, "z", "x"),
    2: (1, "0", "y"),
    3: (1, "0", "z"),
    4: (1, "x", "x"),
    5: (1, "y", "x"),
}
COMMUTATOR_TABLE = {
    (1, 2): (1, "z", "z"),
    (1, 3): (-1, "z", "y"),
    (1, 4): (1, "y", "0"),  # printed as sigma_2 tau_0
    (1, 5): (1, "x", "0"),
    (2, 3): (1, "0", "x"),
    (2, 4): (-1, "x", "z"),
    (2, 5): (-1, "y", "z"),
    (3, 4): (-1, "x", "y"),
    (3, 5): (1, "y", "y"),
    (4, 5): (1, "z", "0"),
}

# Dirac triples of the two model families.
CP_GAMMAS = np.array([kron(SX, SX), kron(S0, SY), kron(SX, SZ)])
C2T_GAMMAS = np.array([kron(S0, SZ), kron(SY, SY), kron(S0, SX)])

# Real antisymmetric J = i sigma_y (x) s_0 commutes with every C2T Hamiltonian
# and squares to -1, so it orients the real ground plane globally.
C2T_ORIENTATION = np.real(1j * kron(SY, S0))


@dataclass(frozen=True)
class CliffordSet:
    gamma: np.ndarray  # (5, 4, 4), Gamma_1 ... Gamma_5
    comm: dict = field(default_factory=dict)  # (a, b) -> Gamma_ab, 1-based, a < b
    model: dict = field(default_factory=dict)

    def generator(self, a):
        return self.gamma[a - 1]


def table_matrix(entry):
    sign, outer, inner = entry
    return pauli_product(outer, inner, sign)


def build_clifford_set():
    gamma = np.array([table_matrix(GENERATOR_TABLE[a]) for a in range(1, 6)])
    comm = {}
    for a, b in combinations(range(1, 6), 2):
        ga, gb = gamma[a - 1], gamma[b - 1]
        comm[(a, b)] = (ga @ gb - gb @ ga) / 2j
    model = {
        "cp_x": CP_GAMMAS[0], "cp_y": CP_GAMMAS[1], "cp_z": CP_GAMMAS[2],
        "c2t_x": C2T_GAMMAS[0], "c2t_y": C2T_GAMMAS[1], "c2t_z": C2T_GAMMAS[2],
    }
    return CliffordSet(gamma=gamma, comm=comm, model=model)


def anticommutator_check(matrices):
    """Max-norm residual of {G_a, G_b} - 2 delta_ab I over all ordered pairs.

    Accepts a ``CliffordSet`` or any sequence of 4x4 matrices.
    """
    if isinstance(matrices, CliffordSet):
        matrices = matrices.gamma
    mats = [np.asarray(m) for m in matrices]
    worst = 0.0
    for a, ga in enumerate(mats):
        for b, gb in enumerate(mats):
            target = 2.0 * I4 if a == b else 0.0
            worst = max(worst, float(np.max(np.abs(ga @ gb + gb @ ga - target))))
    return worst


def commutator_table_residual(cset=None):
    """Max entrywise mismatch between computed Gamma_ab and the literal table."""
    cset = cset or build_clifford_set()
    return max(
        float(np.max(np.abs(cset.comm[key] - table_matrix(entry))))
        for key, entry in COMMUTATOR_TABLE.items()
    )


def hermiticity_residual(h):
    h = np.asarray(h)
    return float(np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))))


def check_global_degeneracy(h, samples, herm_tol=1e-12):
    """Max over ``samples`` of ||H(k)^2 - f(k) I||_inf with f = Tr(H^2)/4."""
    worst = 0.0
    for k in samples:
        m = np.asarray(h(k), dtype=complex)
        if hermiticity_residual(m) > herm_tol * max(1.0, np.max(np.abs(m))):
            raise ValidationError(f"Hamiltonian is not Hermitian at k={k!r}")
        h2 = m @ m
        f = np.trace(h2).real / 4.0
        worst = max(worst, float(np.max(np.abs(h2 - f * I4))))
    return worst
