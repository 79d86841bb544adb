"""Four-rung ladder EIT with Zeeman-resolved Rydberg manifolds.

Level scheme: ground ``g`` --probe--> intermediate ``e`` --coupling-->
Rydberg manifold (lower J or upper J') --microwave--> the other Rydberg
manifold. The basis is ``[g, e, lower m..., upper m'...]`` with m ascending.

Two routes are provided: :func:`dressed_peaks` diagonalizes the microwave
coupling alone to get Autler-Townes peak positions and weights, while
:func:`spectrum_scan` solves the Lindblad steady state at every coupling
detuning (optionally Doppler averaged).
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .angular import HalfInt, m_values
from .constants import BOLTZMANN, RB87_MASS, TWO_PI
from .coupling import (
    check_transition,
    default_tolerance,
    linear_hamiltonian,
)
from .exceptions import (
    DegenerateSteadyStateError,
    DomainError,
    NumericalError,
    UnsupportedInFastPathError,
)

MHZ = TWO_PI * 1e6


@dataclass(frozen=True)
class LadderConfig:
    """Parameters of the ladder; all rates and detunings in rad/s.

    ``coupling_target`` selects which Rydberg manifold the coupling laser
    addresses. ``coupling_weights`` gives the amplitude on each Zeeman
    sublevel of that manifold. With ``coupling_mode="coherent"`` they form a
    single superposition; with ``"incoherent"`` the squared magnitudes are
    probabilities of independent runs.
    """

    probe_rabi: float = 6.0 * MHZ
    coupling_rabi: float = 0.67 * MHZ
    mw_rabi: float = 0.0
    probe_detuning: float = 0.0
    mw_detuning: float = 0.0
    rydberg_lower: HalfInt = HalfInt(1)
    rydberg_upper: HalfInt = HalfInt(1)
    mw_theta: float = 0.0
    decay_e: float = 6.0666 * MHZ
    decay_rS: float = 0.01 * MHZ
    decay_rP: float = 0.01 * MHZ
    extra_dephasing: float = 0.0
    probe_wavelength: float = 780.241e-9
    coupling_wavelength: float = 480.0e-9
    temperature: float = 300.0
    atomic_mass: float = RB87_MASS
    coupling_weights: tuple = ((HalfInt(1), 1.0 + 0j),)
    coupling_target: str = "lower"
    coupling_mode: str = "coherent"
    coupling_detuning: float = 0.0

    def __post_init__(self):
        lower, upper = check_transition(self.rydberg_lower, self.rydberg_upper)
        object.__setattr__(self, "rydberg_lower", lower)
        object.__setattr__(self, "rydberg_upper", upper)
        for name in ("decay_e", "decay_rS", "decay_rP", "extra_dephasing", "temperature"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("probe_rabi", "coupling_rabi", "mw_rabi"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("probe_wavelength", "coupling_wavelength", "atomic_mass"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        for name in ("probe_detuning", "mw_detuning", "mw_theta", "coupling_detuning"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.coupling_target not in ("lower", "upper"):
            raise DomainError("coupling_target must be 'lower' or 'upper'")
        if self.coupling_mode not in ("coherent", "incoherent"):
            raise DomainError("coupling_mode must be 'coherent' or 'incoherent'")
        target_J = lower if self.coupling_target == "lower" else upper
        allowed = set(m_values(target_J))
        weights = []
        seen = set()
        for m, amp in self.coupling_weights:
            m = HalfInt.of(m)
            if m not in allowed:
                raise DomainError(f"coupling weight on m = {m} outside manifold J = {target_J}")
            if m in seen:
                raise DomainError(f"duplicate coupling weight for m = {m}")
            seen.add(m)
            weights.append((m, complex(amp)))
        norm = sum(abs(a) ** 2 for _, a in weights)
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"coupling weights not normalized: sum |w|^2 = {norm!r}")
        object.__setattr__(self, "coupling_weights", tuple(weights))

    @property
    def dimension(self) -> int:
        return 2 + self.rydberg_lower.twice_value + 1 + self.rydberg_upper.twice_value + 1

    def replace(self, **changes) -> "LadderConfig":
        return replace(self, **changes)

    @property
    def thermal_velocity(self) -> float:
        """One-dimensional rms velocity sqrt(kT/m)."""
        return math.sqrt(BOLTZMANN * self.temperature / self.atomic_mass)


def _uniform_weights(J):
    ms = m_values(J)
    amp = 1.0 / math.sqrt(len(ms))
    return tuple((m, amp) for m in ms)


_HALF = HalfInt(1)

PRESETS = {
    "rb87-36s-36p12": dict(
        description="87Rb 36S1/2 <-> 36P1/2 at 86.355 GHz",
        mw_frequency_hz=86.355e9,
        config=dict(rydberg_lower=_HALF, rydberg_upper=_HALF, mw_rabi=49.0 * MHZ),
    ),
    "rb87-36s-36p32": dict(
        description="87Rb 36S1/2 <-> 36P3/2 at 88.697 GHz",
        mw_frequency_hz=88.697e9,
        config=dict(rydberg_lower=_HALF, rydberg_upper=HalfInt(3), mw_rabi=70.0 * MHZ),
    ),
}


def preset(name: str, **overrides) -> LadderConfig:
    """Named ladder configuration with optional field overrides."""
    try:
        base = dict(PRESETS[name]["config"])
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update(overrides)
    if "coupling_weights" not in overrides and base.get("coupling_target", "lower") == "upper":
        # probing the upper manifold: incoherent mix over all of its sublevels
        base["coupling_weights"] = _uniform_weights(base["rydberg_upper"])
        base.setdefault("coupling_mode", "incoherent")
    return LadderConfig(**base)


@dataclass(frozen=True)
class SpectrumTrace:
    coupling_detunings: np.ndarray = field(repr=False)
    transmission: np.ndarray = field(repr=False)
    metadata: LadderConfig

    def __post_init__(self):
        det = np.asarray(self.coupling_detunings, dtype=float)
        trans = np.asarray(self.transmission, dtype=float)
        if det.shape != trans.shape or det.ndim != 1:
            raise DomainError("detunings and transmission must be 1-D arrays of equal length")
        if det.size > 1 and np.any(np.diff(det) <= 0):
            raise DomainError("detunings must be strictly increasing")
        object.__setattr__(self, "coupling_detunings", det)
        object.__setattr__(self, "transmission", trans)


@dataclass(frozen=True)
class AngleScanMap:
    thetas: np.ndarray = field(repr=False)
    traces: tuple = field(repr=False)

    def as_array(self) -> np.ndarray:
        """Transmission map with shape (n_theta, n_detuning)."""
        return np.vstack([t.transmission for t in self.traces])


@dataclass(frozen=True)
class Doppler:
    """Gaussian velocity average over a symmetric grid.

    The grid spans +-``sigma_span`` thermal widths with ``n_points`` nodes.
    """

    n_points: int = 61
    sigma_span: float = 3.0

    def __post_init__(self):
        if self.n_points < 1:
            raise DomainError("n_points must be >= 1")
        if not self.sigma_span > 0:
            raise DomainError("sigma_span must be positive")

    def grid(self, config: LadderConfig) -> tuple[np.ndarray, np.ndarray]:
        sigma = config.thermal_velocity
        if self.n_points == 1 or sigma == 0:
            return np.zeros(1), np.ones(1)
        v = np.linspace(-self.sigma_span * sigma, self.sigma_span * sigma, self.n_points)
        w = np.exp(-0.5 * (v / sigma) ** 2)
        return v, w / w.sum()


# ----------------------------------------------------------------------------
# index helpers


def _lower_slice(config):
    n = config.rydberg_lower.twice_value + 1
    return slice(2, 2 + n)


def _upper_slice(config):
    start = 3 + config.rydberg_lower.twice_value
    return slice(start, start + config.rydberg_upper.twice_value + 1)


def _target_slice(config):
    return _lower_slice(config) if config.coupling_target == "lower" else _upper_slice(config)


def _target_J(config):
    return config.rydberg_lower if config.coupling_target == "lower" else config.rydberg_upper


def coupling_states(config: LadderConfig) -> list[tuple[float, np.ndarray]]:
    """(probability, amplitude vector over the target manifold) runs."""
    ms = m_values(_target_J(config))
    if config.coupling_mode == "coherent":
        vec = np.zeros(len(ms), dtype=complex)
        for m, amp in config.coupling_weights:
            vec[ms.index(m)] = amp
        return [(1.0, vec)]
    runs = []
    for m, amp in config.coupling_weights:
        p = abs(amp) ** 2
        if p == 0:
            continue
        vec = np.zeros(len(ms), dtype=complex)
        vec[ms.index(m)] = 1.0
        runs.append((p, vec))
    return runs


# ----------------------------------------------------------------------------
# dressed-state fast path


def dressed_peaks(config: LadderConfig, tolerance=None) -> list[tuple[float, float]]:
    """Autler-Townes peak positions (rad/s of coupling detuning) and weights.

    Positions are the eigenvalues of the microwave coupling shifted by the
    probe detuning; each weight is the population the coupling laser puts
    into that (possibly degenerate) dressed eigenspace. Zero-weight
    eigenvalues, such as spectators in the unprobed manifold, are dropped.
    """
    if config.mw_detuning != 0:
        raise UnsupportedInFastPathError("dressed_peaks requires resonant microwaves")
    h = linear_hamiltonian(
        config.rydberg_lower, config.rydberg_upper, config.mw_rabi, config.mw_theta
    ).matrix
    evals, evecs = np.linalg.eigh(h)
    tol = default_tolerance(evals, config.mw_rabi) if tolerance is None else tolerance
    n_lower = config.rydberg_lower.twice_value + 1
    target = slice(0, n_lower) if config.coupling_target == "lower" else slice(n_lower, None)
    groups = []
    order = np.argsort(evals)
    for idx in order:
        if groups and evals[idx] - evals[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    peaks = []
    for grp in groups:
        basis = evecs[target][:, grp]
        weight = 0.0
        for p, vec in coupling_states(config):
            weight += p * float(np.sum(np.abs(basis.conj().T @ vec) ** 2))
        if weight > 1e-12:
            position = float(np.mean(evals[grp])) - config.probe_detuning
            peaks.append((position, weight))
    return peaks


# ----------------------------------------------------------------------------
# Lindblad model


def ladder_hamiltonian(config: LadderConfig, velocity=0.0, coupling_vector=None) -> np.ndarray:
    """Rotating-frame Hamiltonian (rad/s) at the configured coupling detuning."""
    if coupling_vector is None:
        coupling_vector = coupling_states(config)[0][1]
    k_p = TWO_PI / config.probe_wavelength
    k_c = TWO_PI / config.coupling_wavelength
    # counter-propagating beams along z; microwave along y is unshifted
    dp = config.probe_detuning - k_p * velocity
    dc = config.coupling_detuning + k_c * velocity
    n = config.dimension
    h = np.zeros((n, n), dtype=complex)
    lower, upper = _lower_slice(config), _upper_slice(config)
    target = _target_slice(config)
    other = upper if config.coupling_target == "lower" else lower
    mw_sign = 1.0 if config.coupling_target == "lower" else -1.0

    h[1, 1] = -dp
    idx_t = np.arange(n)[target]
    idx_o = np.arange(n)[other]
    h[idx_t, idx_t] = -(dp + dc)
    h[idx_o, idx_o] = -(dp + dc + mw_sign * config.mw_detuning)

    h[0, 1] = h[1, 0] = config.probe_rabi / 2
    h[idx_t, 1] = config.coupling_rabi / 2 * coupling_vector
    h[1, idx_t] = np.conj(h[idx_t, 1])

    mw = linear_hamiltonian(
        config.rydberg_lower, config.rydberg_upper, config.mw_rabi, config.mw_theta
    ).matrix
    ryd = np.arange(2, n)
    h[np.ix_(ryd, ryd)] += mw
    return h


def collapse_operators(config: LadderConfig) -> list[np.ndarray]:
    """Jump operators: e -> g, every Rydberg sublevel -> g, Rydberg dephasing."""
    n = config.dimension
    ops = []

    def jump(rate, target, source):
        op = np.zeros((n, n), dtype=complex)
        op[target, source] = math.sqrt(rate)
        return op

    if config.decay_e > 0:
        ops.append(jump(config.decay_e, 0, 1))
    for sl, rate in ((_lower_slice(config), config.decay_rS), (_upper_slice(config), config.decay_rP)):
        if rate > 0:
            for i in range(sl.start, sl.stop):
                ops.append(jump(rate, 0, i))
    if config.extra_dephasing > 0:
        # coherences between any Rydberg level and g or e decay at this extra rate
        proj = np.zeros((n, n), dtype=complex)
        proj[2:, 2:] = np.eye(n - 2)
        ops.append(math.sqrt(2 * config.extra_dephasing) * proj)
    return ops


def _commutator_super(h):
    """Superoperator of -i[h, .] for row-major vectorization."""
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _dissipator_super(ops, n):
    eye = np.eye(n)
    out = np.zeros((n * n, n * n), dtype=complex)
    for c in ops:
        cdc = c.conj().T @ c
        out += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    return out


def liouvillian(config: LadderConfig, velocity=0.0, coupling_vector=None) -> np.ndarray:
    """Lindblad generator acting on row-major vectorized density matrices.

    ``vec(rho)[i * n + j] = rho[i, j]``. In incoherent mode the first run's
    coupling vector is used unless ``coupling_vector`` is given.
    """
    h = ladder_hamiltonian(config, velocity, coupling_vector)
    return _commutator_super(h) + _dissipator_super(collapse_operators(config), config.dimension)


def _detuning_generator(config: LadderConfig) -> np.ndarray:
    """d L / d(coupling detuning)."""
    n = config.dimension
    dh = np.zeros((n, n))
    dh[np.arange(2, n), np.arange(2, n)] = -1.0
    return _commutator_super(dh)


def steady_state(L: np.ndarray) -> np.ndarray:
    """Unit-trace density matrix spanning the kernel of ``L``.

    The (0, 0) population equation is replaced by the trace condition; a
    singular or ill-conditioned augmented system means the kernel is not
    one-dimensional.
    """
    L = np.asarray(L)
    n2 = L.shape[0]
    n = int(round(math.sqrt(n2)))
    if n * n != n2 or L.shape != (n2, n2):
        raise DomainError("L must be square with a perfect-square dimension")
    a = L.copy()
    a[0, :] = 0.0
    a[0, np.arange(n) * (n + 1)] = 1.0
    b = np.zeros(n2, dtype=complex)
    b[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            x = scipy.linalg.solve(a, b, check_finite=False)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise DegenerateSteadyStateError(f"steady state is not unique: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError("steady-state solve produced non-finite values")
    residual = np.max(np.abs(L @ x))
    scale = max(np.max(np.abs(L)), 1e-300)
    if residual > 1e-8 * scale:
        raise DegenerateSteadyStateError(f"steady-state residual {residual:.3e} too large")
    return x.reshape(n, n)


def probe_response(rho: np.ndarray, config: LadderConfig) -> float:
    """Dimensionless probe absorption, -Im(rho_eg) * Gamma_e / Omega_p.

    Normalized so a weak probe on a resonant bare two-level atom gives 1.
    """
    if config.probe_rabi == 0:
        return 0.0
    scale = config.decay_e if config.decay_e > 0 else 1.0
    return float(-np.imag(rho[1, 0]) * scale / config.probe_rabi)


def _resolve_jobs(n_jobs):
    if n_jobs is not None:
        return max(1, int(n_jobs))
    env = os.environ.get("RYDSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"RYDSPEC_THREADS must be an integer, got {env!r}") from None
    return 1


def _absorption_curve(config, detunings, velocities, vweights, n_jobs):
    """Velocity- and run-averaged absorption on a detuning grid."""
    runs = coupling_states(config)
    dgen = _detuning_generator(config)
    base_cfg = config.replace(coupling_detuning=0.0)

    def one_velocity(v):
        out = np.zeros(len(detunings))
        for p, vec in runs:
            L0 = liouvillian(base_cfg, v, vec)
            for i, dc in enumerate(detunings):
                try:
                    rho = steady_state(L0 + dc * dgen)
                except NumericalError as exc:
                    raise type(exc)(f"{exc} (coupling detuning {dc:.6g} rad/s, velocity {v:.6g} m/s)") from exc
                out[i] += p * probe_response(rho, config)
        return out

    if n_jobs > 1 and len(velocities) > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            curves = list(pool.map(one_velocity, velocities))
    elif n_jobs > 1:
        chunks = np.array_split(np.asarray(detunings), n_jobs)

        def chunk_fn(ch):
            return _absorption_curve(config, ch, velocities, vweights, 1)

        with ThreadPoolExecutor(n_jobs) as pool:
            return np.concatenate(list(pool.map(chunk_fn, chunks)))
    else:
        curves = [one_velocity(v) for v in velocities]
    total = np.zeros(len(detunings))
    for w, c in zip(vweights, curves):
        total += w * c
    return total


def _bare_absorption(config, velocities, vweights):
    bare = config.replace(coupling_rabi=0.0, mw_rabi=0.0)
    total = 0.0
    for v, w in zip(velocities, vweights):
        total += w * probe_response(steady_state(liouvillian(bare, v)), bare)
    return total


def _check_grid(detuning_grid):
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("detuning grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(grid)):
        raise DomainError("detuning grid must be finite")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("detuning grid must be strictly increasing")
    return grid


def _velocity_grid(config, doppler):
    if doppler is None:
        return np.zeros(1), np.ones(1)
    return doppler.grid(config)


def _raw_transmission(config, grid, doppler, n_jobs):
    v, w = _velocity_grid(config, doppler)
    bare = _bare_absorption(config, v, w)
    if bare <= 0:
        raise DomainError("bare probe absorption vanishes; need probe_rabi > 0 and decay_e > 0")
    absorption = _absorption_curve(config, grid, v, w, n_jobs)
    return 1.0 - absorption / bare


def spectrum_scan(config: LadderConfig, detuning_grid, doppler=None, n_jobs=None, _reference=None) -> SpectrumTrace:
    """Probe transmission versus coupling detuning.

    Transmission is ``1 - A / A_bare`` (``A_bare``: absorption without the
    coupling laser), divided by the peak of the matching microwave-off
    trace on the same grid.
    """
    grid = _check_grid(detuning_grid)
    jobs = _resolve_jobs(n_jobs)
    raw = _raw_transmission(config, grid, doppler, jobs)
    if _reference is None:
        if config.mw_rabi == 0:
            _reference = raw
        else:
            _reference = _raw_transmission(config.replace(mw_rabi=0.0), grid, doppler, jobs)
    peak = float(np.max(_reference))
    if peak <= 0:
        raise NumericalError("microwave-off reference trace has no transparency peak")
    return SpectrumTrace(grid, raw / peak, config)


def angle_scan(config: LadderConfig, theta_grid, detuning_grid, doppler=None, n_jobs=None) -> AngleScanMap:
    """One :func:`spectrum_scan` per microwave polarization angle."""
    thetas = np.asarray(list(theta_grid), dtype=float)
    if thetas.size == 0:
        raise DomainError("theta grid is empty")
    grid = _check_grid(detuning_grid)
    jobs = _resolve_jobs(n_jobs)
    reference = None
    if config.mw_rabi != 0:
        # the microwave-off companion does not depend on theta
        reference = _raw_transmission(config.replace(mw_rabi=0.0), grid, doppler, jobs)
    traces = []
    for theta in thetas:
        cfg = config.replace(mw_theta=float(theta))
        traces.append(spectrum_scan(cfg, grid, doppler, jobs, _reference=reference))
    return AngleScanMap(thetas, tuple(traces))


def transmission_peaks(trace: SpectrumTrace, rel_prominence=0.05) -> np.ndarray:
    """Detunings of local transmission maxima above a relative prominence."""
    from scipy.signal import find_peaks

    y = trace.transmission
    span = float(np.max(y) - np.min(y))
    if span == 0:
        return np.array([])
    idx, _ = find_peaks(y, prominence=rel_prominence * span)
    return trace.coupling_detunings[idx]
