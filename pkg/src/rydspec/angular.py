"""Exact angular-momentum algebra.

Quantum numbers are stored as twice their value so that half-integers stay
exact. 3-j symbols are evaluated with the Racah alternating factorial sum in
integer arithmetic and returned as a signed square root of a rational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Real

import numpy as np

from .exceptions import DomainError

#: largest supported 2j; keeps every factorial argument <= 4 * j_max
MAX_TWICE_J = 20


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-integer, stored as ``2 * value``."""

    twice_value: int

    def __post_init__(self):
        if isinstance(self.twice_value, bool) or not isinstance(self.twice_value, Integral):
            raise DomainError(f"twice_value must be an integer, got {self.twice_value!r}")
        object.__setattr__(self, "twice_value", int(self.twice_value))

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Parse ``value`` as a half-integer.

        Accepts another HalfInt, ints, Fractions, floats that are exact
        multiples of 1/2, and strings such as ``"3/2"``, ``"-1/2"``, ``"0.5"``
        or ``"2"``.
        """
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            text = value.strip()
            try:
                frac = Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise DomainError(f"cannot parse {value!r} as a half-integer") from None
        elif isinstance(value, bool):
            raise DomainError(f"cannot parse {value!r} as a half-integer")
        elif isinstance(value, (Integral, Fraction)):
            frac = Fraction(value)
        elif isinstance(value, Real):
            if not math.isfinite(value):
                raise DomainError(f"cannot parse {value!r} as a half-integer")
            frac = Fraction(float(value))
        else:
            raise DomainError(f"cannot parse {value!r} as a half-integer")
        twice = 2 * frac
        if twice.denominator != 1:
            raise DomainError(f"{value!r} is not a multiple of 1/2")
        return cls(int(twice))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def __float__(self):
        return self.twice_value / 2

    def __add__(self, other):
        other = HalfInt.of(other)
        return HalfInt(self.twice_value + other.twice_value)

    __radd__ = __add__

    def __sub__(self, other):
        other = HalfInt.of(other)
        return HalfInt(self.twice_value - other.twice_value)

    def __rsub__(self, other):
        return HalfInt.of(other) - self

    def __neg__(self):
        return HalfInt(-self.twice_value)

    def __abs__(self):
        return HalfInt(abs(self.twice_value))

    def __str__(self):
        if self.is_integer:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def m_values(j) -> list[HalfInt]:
    """Magnetic quantum numbers -j, -j+1, ..., j in ascending order."""
    j = HalfInt.of(j)
    if j.twice_value < 0:
        raise DomainError(f"j must be non-negative, got {j}")
    return [HalfInt(t) for t in range(-j.twice_value, j.twice_value + 1, 2)]


@dataclass(frozen=True)
class RationalRoot:
    """Exact number ``sign * sqrt(numerator / denominator)``."""

    sign: int
    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.denominator <= 0:
            raise DomainError("denominator must be positive")
        if self.numerator < 0:
            raise DomainError("numerator must be non-negative")
        if self.sign not in (-1, 0, 1):
            raise DomainError("sign must be -1, 0 or +1")
        g = math.gcd(self.numerator, self.denominator)
        num, den = self.numerator // g, self.denominator // g
        sign = self.sign if num else 0
        if num and not sign:
            raise DomainError("sign is zero for a non-zero value")
        if not num:
            den = 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "sign", sign)

    @classmethod
    def from_signed_square(cls, sign: int, square: Fraction) -> "RationalRoot":
        square = Fraction(square)
        if square < 0:
            raise DomainError("square must be non-negative")
        return cls(sign if square else 0, square.numerator, square.denominator)

    @property
    def square(self) -> Fraction:
        """The (unsigned) square of the value, as an exact rational."""
        return Fraction(self.numerator, self.denominator)

    def __float__(self):
        return self.sign * math.sqrt(self.numerator / self.denominator)

    def __bool__(self):
        return self.sign != 0

    def __neg__(self):
        return RationalRoot(-self.sign, self.numerator, self.denominator)

    def __abs__(self):
        return RationalRoot(abs(self.sign), self.numerator, self.denominator)

    def __mul__(self, other):
        if isinstance(other, RationalRoot):
            return RationalRoot.from_signed_square(self.sign * other.sign, self.square * other.square)
        if isinstance(other, (Integral, Fraction)):
            other = Fraction(other)
            sgn = (other > 0) - (other < 0)
            return RationalRoot.from_signed_square(self.sign * sgn, self.square * other * other)
        return float(self) * other

    __rmul__ = __mul__

    def __str__(self):
        if not self.sign:
            return "0"
        s = "-" if self.sign < 0 else ""
        return f"{s}sqrt({self.numerator}/{self.denominator})"


@dataclass(frozen=True)
class SphericalPolarization:
    """Polarization vector in the spherical basis (eps_-1, eps_0, eps_+1)."""

    q_minus: complex
    q_zero: complex
    q_plus: complex

    def __post_init__(self):
        for name in ("q_minus", "q_zero", "q_plus"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        norm = abs(self.q_minus) ** 2 + abs(self.q_zero) ** 2 + abs(self.q_plus) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"polarization not normalized: |eps|^2 = {norm!r}")

    @classmethod
    def linear(cls, theta: float) -> "SphericalPolarization":
        """Linear polarization tilted by ``theta`` from z toward x (about y)."""
        s = math.sin(theta) / math.sqrt(2.0)
        return cls(s, math.cos(theta), -s)

    @classmethod
    def from_cartesian(cls, ex, ey, ez) -> "SphericalPolarization":
        ex, ey, ez = complex(ex), complex(ey), complex(ez)
        return cls((ex - 1j * ey) / math.sqrt(2.0), ez, -(ex + 1j * ey) / math.sqrt(2.0))

    def component(self, q: int) -> complex:
        return {-1: self.q_minus, 0: self.q_zero, 1: self.q_plus}[q]


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return math.factorial(n)


def _check_jm(j: HalfInt, m: HalfInt, label: str):
    if j.twice_value < 0:
        raise DomainError(f"{label}: j must be non-negative, got {j}")
    if j.twice_value > MAX_TWICE_J:
        raise DomainError(f"{label}: j = {j} exceeds supported maximum {MAX_TWICE_J // 2}")
    if (j.twice_value - m.twice_value) % 2:
        raise DomainError(f"{label}: m = {m} and j = {j} differ by a non-integer")
    if abs(m.twice_value) > j.twice_value:
        raise DomainError(f"{label}: |m| = {abs(m)} exceeds j = {j}")


def wigner3j(j1, j2, j3, m1, m2, m3) -> RationalRoot:
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3), exact.

    Returns zero when the projections do not sum to zero or the triangle
    rule fails. Raises :class:`DomainError` for |m| > j or for an m whose
    integer/half-integer character does not match its j.
    """
    j1, j2, j3, m1, m2, m3 = (HalfInt.of(x) for x in (j1, j2, j3, m1, m2, m3))
    for idx, (j, m) in enumerate(((j1, m1), (j2, m2), (j3, m3)), start=1):
        _check_jm(j, m, f"column {idx}")

    if m1.twice_value + m2.twice_value + m3.twice_value != 0:
        return RationalRoot(0, 0)
    a, b, c = j1.twice_value, j2.twice_value, j3.twice_value
    if c > a + b or c < abs(a - b) or (a + b + c) % 2:
        return RationalRoot(0, 0)

    # Work with plain integers: every combination below is integral.
    def h(*twice):
        total = sum(twice)
        assert total % 2 == 0
        return total // 2

    J1, J2, J3 = j1.twice_value, j2.twice_value, j3.twice_value
    M1, M2, M3 = m1.twice_value, m2.twice_value, m3.twice_value
    f = _factorial

    triangle = Fraction(
        f(h(J1, J2, -J3)) * f(h(J1, -J2, J3)) * f(h(-J1, J2, J3)),
        f(h(J1, J2, J3) + 1),
    )
    prod = (
        f(h(J1, M1)) * f(h(J1, -M1)) * f(h(J2, M2)) * f(h(J2, -M2)) * f(h(J3, M3)) * f(h(J3, -M3))
    )

    k_min = max(0, h(J2, -J3, -M1), h(J1, -J3, M2))
    k_max = min(h(J1, J2, -J3), h(J1, -M1), h(J2, M2))
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            f(k)
            * f(h(J3, -J2, M1) + k)
            * f(h(J3, -J1, -M2) + k)
            * f(h(J1, J2, -J3) - k)
            * f(h(J1, -M1) - k)
            * f(h(J2, M2) - k)
        )
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return RationalRoot(0, 0)

    phase = -1 if h(J1, -J2, -M3) % 2 else 1
    sign = phase * (1 if total > 0 else -1)
    return RationalRoot.from_signed_square(sign, triangle * prod * total * total)


def angular_momentum_matrices(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx, Jy, Jz) in units of hbar, basis ordered by ascending m."""
    ms = m_values(j)
    jv = float(HalfInt.of(j))
    dim = len(ms)
    jp = np.zeros((dim, dim))
    for col, m in enumerate(ms[:-1]):
        mv = float(m)
        jp[col + 1, col] = math.sqrt(jv * (jv + 1) - mv * (mv + 1))
    jm = jp.T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag([float(m) for m in ms])
    return jx, jy, jz


def wigner_small_d(j, theta: float) -> np.ndarray:
    """Rotation matrix exp(+i theta J_y) over the (2j+1) sublevels of ``j``.

    Rows and columns run over ascending m; column m holds the rotated
    |j, m>. In this convention the rotated |1/2, -1/2> is
    cos(theta/2)|-1/2> + sin(theta/2)|+1/2>. The standard Wigner small-d
    matrix d^j_{m'm}(theta) is the transpose.
    """
    _, jy, _ = angular_momentum_matrices(j)
    if theta == 0:
        return np.eye(jy.shape[0])
    # exp(i theta Jy) via the spectral decomposition of the Hermitian Jy
    evals, evecs = np.linalg.eigh(jy)
    rot = (evecs * np.exp(1j * theta * evals)) @ evecs.conj().T
    return rot.real.copy()


def dipole_matrix_element(lower_J, m, upper_J, m_prime, q: int, reduced_me=1.0) -> complex:
    """Spherical dipole component <J' m'| r_q |J m> via Wigner-Eckart.

    ``lower_J, m`` label the ket and ``upper_J, m_prime`` the bra. The
    phase is (-1)^(J'-m') (J' 1 J; -m' q m) <J'||r||J>, which gives
    <1/2,-1/2|r_0|1/2,-1/2> = -R/sqrt(6) and <1/2,+1/2|r_0|1/2,+1/2> =
    +R/sqrt(6). Returns exactly zero unless q == m' - m.

    For the reverse direction pass the reduced element
    <J||r||J'> = (-1)^(J-J') <J'||r||J>*; with that choice the elements obey
    <J'm'|r_q|Jm> = (-1)^q <Jm|r_-q|J'm'>*.
    """
    if q not in (-1, 0, 1):
        raise DomainError(f"q must be -1, 0 or +1, got {q!r}")
    J, M, Jp, Mp = (HalfInt.of(x) for x in (lower_J, m, upper_J, m_prime))
    if abs(Jp.twice_value - J.twice_value) > 2:
        raise DomainError(f"|J' - J| > 1 for J={J}, J'={Jp}")
    if not np.isfinite(reduced_me):
        raise DomainError("reduced matrix element must be finite")
    factor = dipole_factor(J, M, Jp, Mp, q)
    if not factor:
        return 0j
    return complex(float(factor) * reduced_me)


def dipole_factor(lower_J, m, upper_J, m_prime, q: int) -> RationalRoot:
    """Exact angular factor of :func:`dipole_matrix_element` (unit reduced element)."""
    J, M, Jp, Mp = (HalfInt.of(x) for x in (lower_J, m, upper_J, m_prime))
    _check_jm(J, M, "lower")
    _check_jm(Jp, Mp, "upper")
    if Mp.twice_value - M.twice_value != 2 * q:
        return RationalRoot(0, 0)
    three_j = wigner3j(Jp, 1, J, -Mp, q, M)
    exponent = (Jp.twice_value - Mp.twice_value) // 2
    return -three_j if exponent % 2 else three_j
