"""Three-dimensional layouts that preserve a distance matrix as well as possible.

Classical MDS supplies the starting configuration: the double-centred Gram
matrix is diagonalised for its top three axes by power iteration with
deflation (negative eigenvalues truncated to zero). Stress majorization
(SMACOF with unit weights) then refines the layout; every Guttman step
is guaranteed not to increase stress.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from ._rng import make_rng
from .exceptions import DomainError, SchemaError
from .panel import _check_labels, _frozen, _text_stream
from .rankcorr import DistanceMatrix

N_DIMS = 3


@dataclass(frozen=True, eq=False)
class Embedding3D:
    tickers: tuple
    coords: np.ndarray
    stress: float
    stress_history: tuple = ()

    def __post_init__(self):
        tickers = _check_labels(self.tickers)
        coords = _frozen(self.coords)
        if coords.shape != (len(tickers), N_DIMS):
            raise SchemaError(f"coords shape {coords.shape} does not match {len(tickers)} x 3")
        if not self.stress >= 0:
            raise SchemaError("stress must be nonnegative")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "stress_history", tuple(float(s) for s in self.stress_history))

    def pairwise(self):
        return pairwise_distances(self.coords)


def pairwise_distances(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def stress1(target, X):
    """``sqrt(sum (delta - d)^2 / sum delta^2)`` over unordered pairs."""
    iu = np.triu_indices(len(target), 1)
    delta = target[iu]
    denom = float((delta * delta).sum())
    if denom == 0.0:
        return 0.0
    resid = delta - pairwise_distances(X)[iu]
    return math.sqrt(float((resid * resid).sum()) / denom)


def _top_eigenpairs(B, k, rng, tol=1e-13, max_iters=20_000):
    """Top-``k`` eigenpairs (by signed value) of symmetric ``B``.

    Deflated power iteration finds eigenpairs in order of magnitude until
    ``k`` positive ones are in hand (negative ones are deflated too); a
    Rayleigh-Ritz step on the found subspace then cleans up nearly equal
    magnitudes. No spectral shift is applied: a shift large enough to order
    by signed value slows convergence to a crawl when the third eigenvalue is
    small, as for nearly planar point sets.
    """
    n = len(B)
    found = np.zeros((n, 0))
    positive = 0
    scale = max(float(np.abs(B).sum(axis=1).max()), np.finfo(float).tiny)
    # below this the deflated matrix is numerically zero: stop searching
    floor = 1e-12 * scale
    exhausted = False
    while positive < k and found.shape[1] < n and not exhausted:
        v = rng.standard_normal(n)
        v -= found @ (found.T @ v)
        rho = math.inf
        for _ in range(max_iters):
            norm = np.linalg.norm(v)
            if norm == 0.0:
                break
            v /= norm
            w = B @ v
            w -= found @ (found.T @ w)
            wn = np.linalg.norm(w)
            if wn <= floor:
                exhausted = True
                break
            rho_new = float(v @ B @ v)
            w /= wn
            # a negative eigenvalue flips the iterate's sign every step; with
            # nearly equal magnitudes the vector crawls but the Rayleigh
            # quotient settles, and the final Ritz step separates the pair
            converged = (min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol
                         or abs(rho_new - rho) <= tol * scale)
            rho = rho_new
            v = w
            if converged:
                break
        norm = np.linalg.norm(v)
        if exhausted or norm == 0.0:
            break
        v = v / norm
        positive += float(v @ B @ v) > 0
        found = np.column_stack([found, v])
    if not found.shape[1]:
        return np.zeros(0), found
    q, _ = np.linalg.qr(found)
    evals, rot = np.linalg.eigh(q.T @ B @ q)
    order = np.argsort(evals)[::-1][:k]
    return evals[order], q @ rot[:, order]


def classical_mds(target, rng):
    n = len(target)
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (target * target) @ J
    B = 0.5 * (B + B.T)
    evals, vecs = _top_eigenpairs(B, N_DIMS, rng)
    X = np.zeros((n, N_DIMS))
    cols = np.flatnonzero(evals > 0)
    X[:, cols] = vecs[:, cols] * np.sqrt(evals[cols])
    return X


def guttman_step(target, X):
    """One SMACOF update ``X <- B(X) X / n`` for unit weights."""
    n = len(target)
    d = pairwise_distances(X)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, target / d, 0.0)
    Bx = -ratio
    np.fill_diagonal(Bx, 0.0)
    Bx[np.arange(n), np.arange(n)] = -Bx.sum(axis=1)
    return Bx @ X / n


def embed_3d(d, iters: int = 300, seed: int = 0, tickers=None, eps: float = 1e-12) -> Embedding3D:
    """Embed a distance matrix in 3-D.

    ``d`` is a :class:`DistanceMatrix` or a square array of nonnegative
    distances. SMACOF runs at most ``iters`` steps and stops early once the
    relative stress decrease falls below ``eps``.
    """
    if isinstance(d, DistanceMatrix):
        tickers = d.tickers if tickers is None else tickers
        target = np.array(d.d, dtype=float)
    else:
        target = np.array(d, dtype=float)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise DomainError(f"distance matrix must be square, got shape {target.shape}")
    n = target.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 points to embed, got {n}")
    if not np.all(np.isfinite(target)) or np.any(target < 0):
        raise DomainError("distances must be finite and nonnegative")
    if iters < 0:
        raise DomainError(f"iters must be >= 0, got {iters}")
    target = 0.5 * (target + target.T)
    np.fill_diagonal(target, 0.0)
    if tickers is None:
        tickers = tuple(f"P{k:03d}" for k in range(1, n + 1))

    X = classical_mds(target, make_rng(seed))
    history = [stress1(target, X)]
    for _ in range(iters):
        if history[-1] == 0.0:
            break
        X_new = guttman_step(target, X)
        s = stress1(target, X_new)
        if s > history[-1]:
            # only rounding can raise stress here; keep the better layout
            break
        X = X_new
        history.append(s)
        if history[-2] - s <= eps * history[-2]:
            break
    X = X - X.mean(axis=0)
    return Embedding3D(tuple(tickers), X, history[-1], tuple(history))


def write_embedding(e: Embedding3D, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["ticker", "x", "y", "z"])
    for t, row in zip(e.tickers, e.coords):
        w.writerow([t, *(format(float(v), ".17g") for v in row)])


def embedding_sidecar(e: Embedding3D) -> str:
    return json.dumps(
        {"stress": e.stress, "iterations": len(e.stress_history) - 1,
         "stress_history": list(e.stress_history)},
        indent=2, sort_keys=True,
    ) + "\n"


def load_embedding(source, sidecar: str) -> Embedding3D:
    rows = [r for r in csv.reader(_text_stream(source)) if r]
    if not rows or rows[0] != ["ticker", "x", "y", "z"]:
        raise SchemaError("embedding CSV header must be 'ticker,x,y,z'")
    meta = json.loads(sidecar)
    return Embedding3D(
        tuple(r[0] for r in rows[1:]),
        np.array([[float(v) for v in r[1:]] for r in rows[1:]]).reshape(-1, N_DIMS),
        meta["stress"],
        tuple(meta.get("stress_history", ())),
    )
