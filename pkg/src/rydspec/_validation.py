"""Input validation shared by the estimators and the CLI."""
import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length

from .exceptions import DomainError


def check_trace_arrays(X, y, min_points=1):
    """Return float 1-D ``(x, y)``; x strictly increasing, both finite."""
    x = np.asarray(X, dtype=float)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise DomainError(f"X must have a single feature column, got shape {x.shape}")
        x = x[:, 0]
    try:
        x = check_array(x.reshape(-1, 1), ensure_min_samples=1).ravel()
        y = check_array(np.asarray(y, dtype=float).reshape(-1, 1), ensure_min_samples=1).ravel()
        check_consistent_length(x, y)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    if x.size < min_points:
        raise DomainError(f"need at least {min_points} points, got {x.size}")
    if x.size > 1 and np.any(np.diff(x) <= 0):
        raise DomainError("detunings must be strictly increasing")
    return x, y
