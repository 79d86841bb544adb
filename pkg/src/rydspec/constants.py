"""Physical constants (CODATA 2018) and unit helpers.

Values are kept here rather than pulled from ``scipy.constants`` so that
numbers stay fixed regardless of which CODATA release the installed scipy
ships.
"""
import math

HBAR = 1.054571817e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
BOHR_RADIUS = 5.29177210903e-11  # m
BOLTZMANN = 1.380649e-23  # J / K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

#: atomic unit of electric dipole moment, e * a0
EA0 = ELEMENTARY_CHARGE * BOHR_RADIUS

RB87_MASS = 86.909180531 * ATOMIC_MASS_UNIT

TWO_PI = 2.0 * math.pi


def hz_to_angular(f):
    """Convert an ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f


def angular_to_hz(omega):
    return omega / TWO_PI
