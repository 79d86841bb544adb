"""Autler-Townes splitting extraction and field retrieval.

A resonant microwave field of amplitude E splits the EIT peak by
``delta_f = mu * E / (2 pi hbar)``. :class:`TwoGaussianFit` locates the two
peaks of a spectrum; :func:`splitting_to_field` turns their separation into
a field amplitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks, peak_widths
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_trace_arrays
from .constants import HBAR, TWO_PI
from .exceptions import DomainError, FitError, SinglePeakError

_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class PeakFit:
    """Result of a two-Gaussian fit; centers and widths in rad/s."""

    centers: tuple
    widths: tuple
    amplitudes: tuple
    offset: float
    splitting: float
    residual_rms: float

    def __post_init__(self):
        if any(w <= 0 for w in self.widths):
            raise DomainError("widths must be positive")
        if self.residual_rms < 0:
            raise DomainError("residual_rms must be non-negative")

    @property
    def splitting_hz(self) -> float:
        return self.splitting / TWO_PI

    def to_record(self) -> dict:
        return {
            "centers_hz": [c / TWO_PI for c in self.centers],
            "widths_hz": [w / TWO_PI for w in self.widths],
            "amplitudes": list(self.amplitudes),
            "offset": self.offset,
            "splitting_hz": self.splitting_hz,
            "residual_rms": self.residual_rms,
        }


@dataclass(frozen=True)
class FieldEstimate:
    rabi: float
    field_amplitude: float
    dipole_moment: float
    frequency_splitting: float

    @classmethod
    def from_field(cls, field_amplitude, dipole_moment) -> "FieldEstimate":
        if not dipole_moment > 0:
            raise DomainError("dipole moment must be positive")
        rabi = dipole_moment * field_amplitude / HBAR
        return cls(rabi, float(field_amplitude), float(dipole_moment), rabi / TWO_PI)

    def to_record(self) -> dict:
        return {
            "frequency_splitting_hz": self.frequency_splitting,
            "rabi_rad_per_s": self.rabi,
            "field_amplitude_v_per_m": self.field_amplitude,
            "dipole_moment_c_m": self.dipole_moment,
        }


def noise_floor(y) -> float:
    """Robust noise scale: MAD of first differences * 1.4826 / sqrt(2)."""
    d = np.diff(np.asarray(y, dtype=float))
    if d.size == 0:
        return 0.0
    mad = np.median(np.abs(d - np.median(d)))
    return float(1.4826 * mad / math.sqrt(2.0))


def _model(p, x):
    off, a1, c1, s1, a2, c2, s2 = p
    g1 = np.exp(-0.5 * ((x - c1) / s1) ** 2)
    g2 = np.exp(-0.5 * ((x - c2) / s2) ** 2)
    return off + a1 * g1 + a2 * g2


def _jacobian(p, x):
    _, a1, c1, s1, a2, c2, s2 = p
    jac = np.empty((x.size, 7))
    jac[:, 0] = 1.0
    for col, (a, c, s) in ((1, (a1, c1, s1)), (4, (a2, c2, s2))):
        u = (x - c) / s
        g = np.exp(-0.5 * u * u)
        jac[:, col] = g
        jac[:, col + 1] = a * g * u / s
        jac[:, col + 2] = a * g * u * u / s
    return jac


def _levenberg_marquardt(p0, x, y, tol, max_iter):
    """Damped Gauss-Newton iteration.

    Converged once an accepted step changes every parameter by less than
    ``tol * (1 + |p|)`` (data are pre-scaled to order one), or once no
    damping can reduce the cost any further.
    """
    p = np.array(p0, dtype=float)
    r = _model(p, x) - y
    cost = float(r @ r)
    lam = 1e-3
    for it in range(1, max_iter + 1):
        jac = _jacobian(p, x)
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        while True:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                trial = p + step
                r_trial = _model(trial, x) - y
                cost_trial = float(r_trial @ r_trial)
                if np.isfinite(cost_trial) and cost_trial <= cost:
                    break
            lam *= 10.0
            if lam > 1e12:
                # no descent direction left at machine precision
                return p, it
        p, r, cost = trial, r_trial, cost_trial
        lam = max(lam / 10.0, 1e-12)
        if np.all(np.abs(step) < tol * (1.0 + np.abs(p))):
            return p, it
    raise FitError(f"no convergence after {max_iter} iterations", math.sqrt(cost / x.size))


class TwoGaussianFit(RegressorMixin, BaseEstimator):
    """Least-squares fit of an offset plus two Gaussians.

    ``fit(X, y)`` takes detunings ``X`` (1-D, or a single-column 2-D array)
    and transmission ``y``. The initial guess comes from the two most
    prominent local maxima that rise above ``noise_factor`` times the robust
    noise floor.

    Attributes
    ----------
    centers_, widths_, amplitudes_ : ndarray of shape (2,)
        Peak parameters, centers in ascending order. Widths are Gaussian
        standard deviations.
    offset_ : float
    splitting_ : float
        ``centers_[1] - centers_[0]``.
    residual_rms_ : float
    n_iter_ : int
    """

    def __init__(self, *, max_iter=200, tol=1e-10, noise_factor=3.0, min_points=16):
        self.max_iter = max_iter
        self.tol = tol
        self.noise_factor = noise_factor
        self.min_points = min_points

    def _initial_guess(self, x, y):
        floor = noise_floor(y)
        threshold = max(self.noise_factor * floor, 1e-12 * max(np.ptp(y), 1e-300))
        idx, props = find_peaks(y, prominence=threshold)
        if idx.size < 2:
            raise SinglePeakError(
                f"found {idx.size} peak(s) above {self.noise_factor:g}x the noise floor; need two"
            )
        top = np.argsort(props["prominences"])[::-1][:2]
        chosen = np.sort(idx[top])
        widths = peak_widths(y, chosen, rel_height=0.5)[0]
        dx = np.median(np.diff(x))
        prom = props["prominences"][np.isin(idx, chosen)]
        offset = float(np.min(y))
        guess = [offset]
        for i, k in enumerate(chosen):
            sigma = max(widths[i] * dx / _FWHM_PER_SIGMA, dx)
            guess += [max(y[k] - offset, prom[i]), x[k], sigma]
        return np.array(guess)

    def fit(self, X, y):
        x, y = check_trace_arrays(X, y, min_points=self.min_points)
        x_mid = 0.5 * (x[0] + x[-1])
        x_scale = 0.5 * (x[-1] - x[0])
        y_scale = float(np.ptp(y))
        if y_scale == 0:
            raise SinglePeakError("trace is flat")
        xs = (x - x_mid) / x_scale
        ys = y / y_scale

        p0 = self._initial_guess(xs, ys)
        p, n_iter = _levenberg_marquardt(p0, xs, ys, self.tol, self.max_iter)

        off, a1, c1, s1, a2, c2, s2 = p
        peaks = sorted([(c1, abs(s1), a1), (c2, abs(s2), a2)])
        self.centers_ = np.array([c for c, _, _ in peaks]) * x_scale + x_mid
        self.widths_ = np.array([s for _, s, _ in peaks]) * x_scale
        self.amplitudes_ = np.array([a for _, _, a in peaks]) * y_scale
        self.offset_ = float(off * y_scale)
        self.splitting_ = float(abs(self.centers_[1] - self.centers_[0]))
        resid = _model(p, xs) - ys
        self.residual_rms_ = float(np.sqrt(np.mean(resid**2)) * y_scale)
        self.n_iter_ = n_iter
        if np.any(self.widths_ <= 0) or np.any(self.amplitudes_ <= 0):
            raise FitError("fit converged to a non-peak (non-positive width or amplitude)", self.residual_rms_)
        return self

    def predict(self, X):
        check_is_fitted(self, "centers_")
        x = np.asarray(X, dtype=float).reshape(-1)
        out = np.full_like(x, self.offset_)
        for a, c, s in zip(self.amplitudes_, self.centers_, self.widths_):
            out += a * np.exp(-0.5 * ((x - c) / s) ** 2)
        return out

    def to_peak_fit(self) -> PeakFit:
        check_is_fitted(self, "centers_")
        return PeakFit(
            centers=tuple(float(c) for c in self.centers_),
            widths=tuple(float(w) for w in self.widths_),
            amplitudes=tuple(float(a) for a in self.amplitudes_),
            offset=self.offset_,
            splitting=self.splitting_,
            residual_rms=self.residual_rms_,
        )


def fit_two_gaussians(trace, **params) -> PeakFit:
    """Fit a :class:`~rydspec.eit.SpectrumTrace` (or ``(x, y)`` pair)."""
    if isinstance(trace, tuple):
        x, y = trace
    else:
        x, y = trace.coupling_detunings, trace.transmission
    return TwoGaussianFit(**params).fit(x, y).to_peak_fit()


def splitting_to_field(splitting_hz, dipole_moment) -> FieldEstimate:
    """Field amplitude (V/m) behind a resonant AT splitting (Hz)."""
    if not (dipole_moment > 0 and math.isfinite(dipole_moment)):
        raise DomainError(f"dipole moment must be positive, got {dipole_moment!r}")
    if not (splitting_hz >= 0 and math.isfinite(splitting_hz)):
        raise DomainError(f"splitting must be finite and >= 0, got {splitting_hz!r}")
    rabi = TWO_PI * splitting_hz
    return FieldEstimate(rabi, HBAR * rabi / dipole_moment, float(dipole_moment), float(splitting_hz))


def field_to_splitting(estimate: FieldEstimate) -> float:
    """Inverse of :func:`splitting_to_field`: splitting in Hz."""
    return estimate.dipole_moment * estimate.field_amplitude / (TWO_PI * HBAR)


def compare_transitions(fit_a: PeakFit, fit_b: PeakFit, mu_a, mu_b) -> tuple[float, float]:
    """Field and power ratio (b relative to a) from two AT splittings."""
    if fit_a.splitting <= 0 or fit_b.splitting <= 0:
        raise DomainError("both splittings must be positive")
    if not (mu_a > 0 and mu_b > 0):
        raise DomainError("dipole moments must be positive")
    field_ratio = (fit_b.splitting / fit_a.splitting) * (mu_a / mu_b)
    return field_ratio, field_ratio**2


class SplittingToField(TransformerMixin, BaseEstimator):
    """Map AT splittings (Hz) to field amplitudes (V/m) for a fixed dipole.

    Stateless: ``fit`` only validates the parameter.
    """

    def __init__(self, dipole_moment=1.0):
        self.dipole_moment = dipole_moment

    def fit(self, X=None, y=None):
        if not self.dipole_moment > 0:
            raise DomainError("dipole_moment must be positive")
        self.dipole_moment_ = float(self.dipole_moment)
        return self

    def transform(self, X):
        check_is_fitted(self, "dipole_moment_")
        x = np.asarray(X, dtype=float)
        if np.any(x < 0):
            raise DomainError("splittings must be non-negative")
        return HBAR * TWO_PI * x / self.dipole_moment_

    def inverse_transform(self, X):
        check_is_fitted(self, "dipole_moment_")
        return np.asarray(X, dtype=float) * self.dipole_moment_ / (TWO_PI * HBAR)
