"""Input checks for the estimator front end."""
import numpy as np
from sklearn.utils import check_array

from .panel import ReturnPanel, as_return_panel
from .rankcorr import DistanceMatrix


def check_returns(X, tickers=None, min_samples=3) -> ReturnPanel:
    """Accept a ReturnPanel, DataFrame or ``(n_samples, n_series)`` array."""
    if isinstance(X, ReturnPanel):
        panel = X
    else:
        labels = tickers
        if labels is None and hasattr(X, "columns"):
            labels = [str(c) for c in X.columns]
        arr = check_array(X, dtype=np.float64, ensure_min_samples=min_samples, ensure_min_features=2)
        panel = as_return_panel(arr, tickers=labels)
    if panel.n_rows < min_samples:
        raise ValueError(f"need at least {min_samples} rows, got {panel.n_rows}")
    return panel


def check_distances(D):
    """Square, symmetric, finite, nonnegative distance array."""
    if isinstance(D, DistanceMatrix):
        return np.array(D.d)
    D = check_array(D, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)
    if D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got {D.shape}")
    if np.any(D < 0) or not np.allclose(D, D.T, rtol=0, atol=1e-12):
        raise ValueError("distance matrix must be symmetric and nonnegative")
    return D
