"""Microwave coupling Hamiltonians over J <-> J' Zeeman manifolds.

All matrices are in angular-frequency units (energy / hbar). The coupling
strength ``rabi_0`` is normalized so that the pi-transition element of the
J = 1/2 <-> J' = 1/2 system is ``rabi_0 / 2``; every other element follows
from its 3-j value relative to 1/sqrt(6).
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .angular import (
    HalfInt,
    RationalRoot,
    SphericalPolarization,
    dipole_factor,
    m_values,
)
from .exceptions import DomainError, EigensolverError, UnsupportedTransitionError

# sqrt(6)/2: converts a unit-reduced dipole element into units of rabi_0
_RABI_SCALE = RationalRoot(1, 3, 2)


class Manifold(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class Ordering(enum.Enum):
    LOWER_THEN_UPPER = "lower_then_upper"
    MORRIS_SHORE = "morris_shore"


def check_transition(lower_J, upper_J) -> tuple[HalfInt, HalfInt]:
    J, Jp = HalfInt.of(lower_J), HalfInt.of(upper_J)
    if J.twice_value < 0 or Jp.twice_value < 0:
        raise DomainError(f"J values must be non-negative, got {J}, {Jp}")
    if abs(Jp.twice_value - J.twice_value) > 2:
        raise UnsupportedTransitionError(f"dipole transition needs |J - J'| <= 1, got J={J}, J'={Jp}")
    if (Jp.twice_value - J.twice_value) % 2:
        raise UnsupportedTransitionError(f"J={J} and J'={Jp} differ by a half-integer")
    return J, Jp


def _pi_partners(J: HalfInt, Jp: HalfInt) -> list[tuple[HalfInt, RationalRoot]]:
    """(m, exact coupling factor) for every non-vanishing m <-> m pi transition."""
    out = []
    for m in m_values(J):
        if abs(m.twice_value) > Jp.twice_value:
            continue
        factor = _RABI_SCALE * dipole_factor(J, m, Jp, m, 0)
        if factor:
            out.append((m, factor))
    return out


@dataclass(frozen=True)
class ZeemanBasis:
    lower_J: HalfInt
    upper_J: HalfInt
    ordering: Ordering
    states: tuple

    @classmethod
    def build(cls, lower_J, upper_J, ordering=Ordering.LOWER_THEN_UPPER) -> "ZeemanBasis":
        J, Jp = check_transition(lower_J, upper_J)
        ordering = Ordering(ordering)
        if ordering is Ordering.LOWER_THEN_UPPER:
            states = [(Manifold.LOWER, m) for m in m_values(J)]
            states += [(Manifold.UPPER, m) for m in m_values(Jp)]
        else:
            states = []
            for m, _ in _pi_partners(J, Jp):
                states += [(Manifold.LOWER, m), (Manifold.UPPER, m)]
            paired = set(states)
            states += [
                s
                for s in [(Manifold.LOWER, m) for m in m_values(J)]
                + [(Manifold.UPPER, m) for m in m_values(Jp)]
                if s not in paired
            ]
        return cls(J, Jp, ordering, tuple(states))

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, manifold, m) -> int:
        return self.states.index((Manifold(manifold), HalfInt.of(m)))

    def manifold_indices(self, manifold) -> list[int]:
        manifold = Manifold(manifold)
        return [i for i, (man, _) in enumerate(self.states) if man is manifold]


@dataclass(frozen=True)
class CouplingHamiltonian:
    basis: ZeemanBasis
    matrix: np.ndarray = field(repr=False)
    rabi_0: complex
    theta: float | None = None

    def __post_init__(self):
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class EigenReport:
    """Distinct eigenvalues (rad/s) with their multiplicities."""

    eigenvalues: tuple
    multiplicities: tuple
    distinct_count: int
    dedup_tolerance: float
    spectrum: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Block:
    lower_m: HalfInt
    upper_m: HalfInt
    factor: RationalRoot
    coupling: float


@dataclass(frozen=True)
class BlockDecomposition:
    lower_J: HalfInt
    upper_J: HalfInt
    rabi_0: float
    blocks: tuple
    spectators: tuple
    pairing: tuple

    def assemble(self) -> np.ndarray:
        """Block-diagonal matrix in Morris-Shore ordering."""
        dim = 2 * len(self.blocks) + len(self.spectators)
        mat = np.zeros((dim, dim), dtype=complex)
        for k, blk in enumerate(self.blocks):
            mat[2 * k + 1, 2 * k] = blk.coupling
            mat[2 * k, 2 * k + 1] = np.conj(blk.coupling)
        return mat

    def exact_distinct_count(self) -> int:
        """Number of distinct eigenvalues from exact coupling magnitudes."""
        magnitudes = {blk.factor.square for blk in self.blocks}
        if self.rabi_0 == 0:
            return 1
        return 2 * len(magnitudes) + (1 if self.spectators else 0)


def build_hamiltonian(
    lower_J,
    upper_J,
    rabi_0,
    polarization: SphericalPolarization,
    basis_ordering=Ordering.LOWER_THEN_UPPER,
    theta=None,
) -> CouplingHamiltonian:
    """Resonant RWA microwave coupling between two Zeeman manifolds.

    ``rabi_0`` may be complex; the lower-to-upper block carries ``rabi_0``
    and its Hermitian partner carries the conjugate. ``theta`` is stored as
    metadata only.
    """
    basis = ZeemanBasis.build(lower_J, upper_J, basis_ordering)
    if not isinstance(polarization, SphericalPolarization):
        raise DomainError("polarization must be a SphericalPolarization")
    if not np.isfinite(rabi_0) or (np.isreal(rabi_0) and np.real(rabi_0) < 0):
        raise DomainError(f"rabi_0 must be finite and non-negative, got {rabi_0!r}")
    J, Jp = basis.lower_J, basis.upper_J
    mat = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    lower_idx = {m: basis.index(Manifold.LOWER, m) for m in m_values(J)}
    upper_idx = {m: basis.index(Manifold.UPPER, m) for m in m_values(Jp)}
    scale = float(_RABI_SCALE) * np.conj(rabi_0)
    for m, i in lower_idx.items():
        for mp, k in upper_idx.items():
            # eps . r = sum_q (-1)^q eps_q r_{-q}; only q = m - m' survives
            dq = mp.twice_value - m.twice_value
            if abs(dq) > 2:
                continue
            q = -dq // 2
            factor = dipole_factor(J, m, Jp, mp, -q)
            if not factor:
                continue
            eps = polarization.component(q)
            mat[k, i] = scale * (-1) ** q * eps * float(factor)
    upper = mat[np.ix_(list(upper_idx.values()), list(lower_idx.values()))]
    mat[np.ix_(list(lower_idx.values()), list(upper_idx.values()))] = upper.conj().T
    return CouplingHamiltonian(basis, mat, rabi_0, theta)


def linear_hamiltonian(lower_J, upper_J, rabi_0, theta, basis_ordering=Ordering.LOWER_THEN_UPPER):
    """Shortcut for linear polarization rotated by ``theta`` about y."""
    return build_hamiltonian(
        lower_J, upper_J, rabi_0, SphericalPolarization.linear(theta), basis_ordering, theta
    )


def default_tolerance(eigenvalues, rabi_0) -> float:
    scale = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return max(1e-9 * scale, 1e-12 * abs(rabi_0))


def group_values(values, tolerance):
    """Group sorted values whose consecutive gaps are <= tolerance."""
    groups = []
    for v in values:
        if groups and v - groups[-1][-1] <= tolerance:
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def eigen_report(h: CouplingHamiltonian, dedup_tolerance=None) -> EigenReport:
    mat = np.asarray(h.matrix)
    norm = np.max(np.abs(mat)) if mat.size else 0.0
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-14 * max(norm, 1e-300):
        raise DomainError("coupling matrix is not Hermitian")
    try:
        evals, evecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed: {exc}") from exc
    residual = np.max(np.abs(mat @ evecs - evecs * evals), initial=0.0)
    if residual > 1e-10 * max(norm, 1.0):
        raise EigensolverError(f"eigen decomposition residual {residual:.3e} too large")
    evals = np.sort(evals)
    tol = default_tolerance(evals, h.rabi_0) if dedup_tolerance is None else float(dedup_tolerance)
    groups = group_values(evals, tol)
    return EigenReport(
        eigenvalues=tuple(float(np.mean(g)) for g in groups),
        multiplicities=tuple(len(g) for g in groups),
        distinct_count=len(groups),
        dedup_tolerance=tol,
        spectrum=evals,
    )


def predict_neig(J, J_prime) -> int:
    """Number of distinct dressed eigenenergies for a linearly driven J <-> J'."""
    J, Jp = check_transition(J, J_prime)
    total = J.value + Jp.value
    if J.twice_value % 2:
        n = total + 1
    elif J != Jp:
        n = total + 2
    else:
        n = total + 1
    assert n.denominator == 1
    return int(n)


def morris_shore_blocks(J, J_prime, rabi_0=1.0) -> BlockDecomposition:
    """Decompose the linear-polarization coupling into independent 2x2 blocks.

    With the quantization axis along the polarization only m <-> m
    transitions survive. Each gives one block; transitions m and -m have
    the same strength and are listed in ``pairing``. States left without a
    partner (the stretched states of the larger J, or the m = 0 pair when
    J = J' is an integer) are spectators with zero eigenvalue.
    """
    J, Jp = check_transition(J, J_prime)
    rabi_0 = float(rabi_0)
    if rabi_0 < 0:
        raise DomainError("rabi_0 must be non-negative")
    blocks = tuple(
        Block(m, m, factor, float(factor) * rabi_0) for m, factor in _pi_partners(J, Jp)
    )
    coupled = {(Manifold.LOWER, b.lower_m) for b in blocks} | {(Manifold.UPPER, b.upper_m) for b in blocks}
    spectators = tuple(
        s
        for s in [(Manifold.LOWER, m) for m in m_values(J)] + [(Manifold.UPPER, m) for m in m_values(Jp)]
        if s not in coupled
    )
    pairing = []
    for a, blk in enumerate(blocks):
        for b in range(a + 1, len(blocks)):
            if blocks[b].lower_m == -blk.lower_m:
                if blocks[b].factor.square != blk.factor.square:
                    raise AssertionError(f"pair symmetry broken for m = {blk.lower_m}")
                pairing.append((a, b))
    return BlockDecomposition(J, Jp, rabi_0, blocks, spectators, tuple(pairing))


def predict_peak_count(J, J_prime, probe_connects) -> int:
    """Number of EIT peaks when the coupling laser addresses one manifold.

    ``probe_connects`` is ``"lower"`` or ``"upper"`` (or a :class:`Manifold`).
    """
    J, Jp = check_transition(J, J_prime)
    n = predict_neig(J, Jp)
    probed = Manifold(probe_connects)
    if J == Jp:
        return n
    probed_J, other_J = (J, Jp) if probed is Manifold.LOWER else (Jp, J)
    return n if probed_J > other_J else n - 1


def invariance_scan(lower_J, upper_J, rabi_0, theta_grid, n_jobs=1) -> float:
    """Largest L-inf shift of the sorted eigenvalues relative to theta = 0."""
    thetas = list(theta_grid)
    if not thetas:
        raise DomainError("theta grid is empty")
    ref = eigen_report(linear_hamiltonian(lower_J, upper_J, rabi_0, 0.0)).spectrum

    def deviation(theta):
        spec = eigen_report(linear_hamiltonian(lower_J, upper_J, rabi_0, theta)).spectrum
        return float(np.max(np.abs(spec - ref), initial=0.0))

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            devs = list(pool.map(deviation, thetas))
    else:
        devs = [deviation(t) for t in thetas]
    return max(devs)


def supported_pairs(max_twice_j=9):
    """All (J, J') with 2J, 2J' <= max_twice_j and |J - J'| <= 1."""
    pairs = []
    for a in range(0, max_twice_j + 1):
        for b in range(0, max_twice_j + 1):
            if abs(a - b) in (0, 2):
                pairs.append((HalfInt(a), HalfInt(b)))
    return pairs


__all__ = [
    "Block",
    "BlockDecomposition",
    "CouplingHamiltonian",
    "EigenReport",
    "Manifold",
    "Ordering",
    "ZeemanBasis",
    "build_hamiltonian",
    "check_transition",
    "eigen_report",
    "group_values",
    "invariance_scan",
    "linear_hamiltonian",
    "morris_shore_blocks",
    "predict_neig",
    "predict_peak_count",
    "supported_pairs",
]
