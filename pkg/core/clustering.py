"""
Hard K-Means and Fuzzy C-Means clustering.

Both algorithms work on an n x d grid of reals. K-Means is also used in
one dimension to discretize expression levels; both are used to cluster
samples on the reduced gene set.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from core.errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-6
DEFAULT_FUZZINESS = 2.0
FUZZINESS_RANGE = (1.05, 10.0)


@dataclass
class KMeansModel:
    """Result of a K-Means fit."""
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int
    seed: int
    inertia_history: List[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algorithm": "kmeans",
            "k": self.k,
            "seed": self.seed,
            "iterations": self.iterations,
            "inertia": self.inertia,
            "centroids": self.centroids.tolist(),
            "assignments": self.assignments.tolist(),
            "inertia_history": self.inertia_history,
        }


@dataclass
class FcmModel:
    """Result of a Fuzzy C-Means fit."""
    centroids: np.ndarray
    membership: np.ndarray
    m: float
    iterations: int
    seed: int
    squared_distances: bool = False
    objective_history: List[float] = field(default_factory=list)
    membership_history: List[np.ndarray] = field(default_factory=list)

    @property
    def c(self) -> int:
        return self.centroids.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algorithm": "fcm",
            "c": self.c,
            "m": self.m,
            "seed": self.seed,
            "iterations": self.iterations,
            "squared_distances": self.squared_distances,
            "centroids": self.centroids.tolist(),
            "membership": self.membership.tolist(),
            "assignments": _argmax_lowest(self.membership).tolist(),
            "objective_history": self.objective_history,
        }


def _as_grid(data) -> np.ndarray:
    grid = np.asarray(data, dtype=float)
    if grid.ndim == 1:
        grid = grid.reshape(-1, 1)
    if grid.ndim != 2 or grid.shape[1] < 1:
        raise DataError("clustering data must be an n x d grid with d >= 1")
    return grid


def _squared_distances(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """n x k matrix of squared Euclidean distances."""
    diff = data[:, np.newaxis, :] - centroids[np.newaxis, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _argmax_lowest(rows: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return np.argmax(rows, axis=1)


def _initial_centroids(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k distinct data points; falls back to distinct indices when rows repeat."""
    unique_rows = np.unique(data, axis=0)
    if unique_rows.shape[0] >= k:
        chosen = rng.choice(unique_rows.shape[0], size=k, replace=False)
        return unique_rows[np.sort(chosen)].copy()
    chosen = rng.choice(data.shape[0], size=k, replace=False)
    return data[np.sort(chosen)].copy()


def _lloyd(data: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float):
    sq = _squared_distances(data, centroids)
    assignments = np.argmin(sq, axis=1)
    history = [float(sq[np.arange(len(data)), assignments].sum())]
    iterations = 0

    for iterations in range(1, max_iter + 1):
        new_centroids = centroids.copy()
        for j in range(centroids.shape[0]):
            members = assignments == j
            if members.any():
                new_centroids[j] = data[members].mean(axis=0)

        for j in range(centroids.shape[0]):
            if (assignments == j).any():
                continue
            # empty cluster: move it onto the point farthest from its own centroid
            own = _squared_distances(data, new_centroids)[np.arange(len(data)), assignments]
            farthest = int(np.argmax(own))
            if own[farthest] == 0.0:
                break
            logger.debug("Reseeding empty cluster %d at sample %d", j, farthest)
            new_centroids[j] = data[farthest]
            assignments = assignments.copy()
            assignments[farthest] = j

        shift = float(np.max(np.abs(new_centroids - centroids)))
        sq = _squared_distances(data, new_centroids)
        new_assignments = np.argmin(sq, axis=1)
        history.append(float(sq[np.arange(len(data)), new_assignments].sum()))
        centroids = new_centroids

        unchanged = np.array_equal(new_assignments, assignments)
        assignments = new_assignments
        if unchanged or shift < tol:
            break

    return centroids, assignments, history, iterations


def kmeans(data, k: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
           tol: float = DEFAULT_TOL, init: Optional[np.ndarray] = None,
           n_init: int = 1) -> KMeansModel:
    """
    Lloyd's K-Means.

    Alternates nearest-centroid assignment (ties to the lower cluster index)
    and centroid averaging until assignments stop changing, the largest
    centroid move drops below ``tol``, or ``max_iter`` is reached.

    Args:
        data: n x d grid (a 1-D array is treated as one column)
        k: Cluster count, 1 <= k <= n
        seed: RNG seed for picking the initial centroids
        max_iter: Iteration cap
        tol: Centroid-movement tolerance
        init: Optional k x d initial centroids (skips random init)
        n_init: Number of seeded restarts; the lowest-inertia run is kept

    Returns:
        KMeansModel
    """
    grid = _as_grid(data)
    n = grid.shape[0]
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds the number of samples ({n})")

    rng = np.random.default_rng(seed)
    best = None
    runs = 1 if init is not None else max(1, n_init)
    for run in range(runs):
        if init is not None:
            start = np.asarray(init, dtype=float).reshape(k, grid.shape[1]).copy()
        else:
            start = _initial_centroids(grid, k, rng)
        centroids, assignments, history, iterations = _lloyd(grid, start, max_iter, tol)
        if best is None or history[-1] < best[2][-1]:
            best = (centroids, assignments, history, iterations)

    centroids, assignments, history, iterations = best
    logger.debug("K-Means k=%d converged in %d iterations, inertia=%.6g", k, iterations, history[-1])
    return KMeansModel(
        centroids=centroids,
        assignments=assignments,
        inertia=history[-1],
        iterations=iterations,
        seed=seed,
        inertia_history=history,
    )


def fcm_memberships(data: np.ndarray, centroids: np.ndarray, m: float,
                    squared_distances: bool = False) -> np.ndarray:
    """
    Membership update from centroid distances.

    u_ji = (1/d_ji)^(1/(m-1)) / sum_k (1/d_ki)^(1/(m-1)), with d the plain
    Euclidean distance (or its square when ``squared_distances`` is set).
    A point sitting exactly on one or more centroids gets crisp membership,
    split equally among the coincident centroids.
    """
    sq = _squared_distances(data, centroids)
    dist = sq if squared_distances else np.sqrt(sq)
    exponent = 1.0 / (m - 1.0)
    membership = np.empty_like(dist)

    zero = dist == 0.0
    crisp_rows = zero.any(axis=1)
    if crisp_rows.any():
        hits = zero[crisp_rows].astype(float)
        membership[crisp_rows] = hits / hits.sum(axis=1, keepdims=True)

    soft = ~crisp_rows
    if soft.any():
        d = dist[soft]
        # scale by the row minimum so every ratio is <= 1 and the power cannot overflow
        ratio = d.min(axis=1, keepdims=True) / d
        weights = ratio ** exponent
        membership[soft] = weights / weights.sum(axis=1, keepdims=True)
    return membership


def _fcm_centroids(data: np.ndarray, membership: np.ndarray, m: float,
                   fallback: Optional[np.ndarray] = None) -> np.ndarray:
    """Membership-weighted means; a cluster with zero total weight keeps its ``fallback`` row."""
    weights = membership ** m
    totals = weights.sum(axis=0)
    empty = totals <= 0.0
    centroids = (weights.T @ data) / np.where(empty, 1.0, totals)[:, np.newaxis]
    if empty.any():
        keep = fallback if fallback is not None else np.broadcast_to(data.mean(axis=0), centroids.shape)
        centroids[empty] = keep[empty]
    return centroids


def fcm(data, c: int, m: float = DEFAULT_FUZZINESS, seed: int = 0,
        max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
        squared_distances: bool = False, record_memberships: bool = False) -> FcmModel:
    """
    Fuzzy C-Means.

    Starts from a random row-normalized membership matrix, then repeats
    weighted-centroid and membership updates until the largest centroid
    move is below ``tol`` or ``max_iter`` is reached.

    Args:
        data: n x d grid
        c: Cluster count, 1 <= c <= n
        m: Fuzzification exponent, m > 1
        seed: RNG seed for the initial memberships
        max_iter: Iteration cap
        tol: Centroid-movement tolerance
        squared_distances: Use d^2 in the membership ratio instead of d
        record_memberships: Keep a copy of the membership matrix after every update

    Returns:
        FcmModel
    """
    grid = _as_grid(data)
    n = grid.shape[0]
    if m <= 1.0:
        raise DataError(f"fuzzification m must be > 1, got {m}")
    if c < 1 or c > n:
        raise DataError(f"cluster count c={c} must be in 1..{n}")

    rng = np.random.default_rng(seed)
    membership = rng.random((n, c))
    membership /= membership.sum(axis=1, keepdims=True)

    history: List[np.ndarray] = [membership.copy()] if record_memberships else []
    objective: List[float] = []
    previous = None
    centroids = _fcm_centroids(grid, membership, m)
    iterations = 0

    for iterations in range(1, max_iter + 1):
        centroids = _fcm_centroids(grid, membership, m, fallback=centroids)
        membership = fcm_memberships(grid, centroids, m, squared_distances)
        objective.append(float(((membership ** m) * _squared_distances(grid, centroids)).sum()))
        if record_memberships:
            history.append(membership.copy())
        if previous is not None and float(np.max(np.abs(centroids - previous))) < tol:
            break
        previous = centroids

    logger.debug("FCM c=%d m=%.3g stopped after %d iterations", c, m, iterations)
    return FcmModel(
        centroids=centroids,
        membership=membership,
        m=m,
        iterations=iterations,
        seed=seed,
        squared_distances=squared_distances,
        objective_history=objective,
        membership_history=history,
    )


def predict_hard(model: Union[KMeansModel, FcmModel], data) -> np.ndarray:
    """
    Hard cluster index per sample.

    K-Means uses the nearest centroid, FCM the largest membership; ties go
    to the lower cluster index in both cases.
    """
    grid = _as_grid(data)
    if grid.shape[1] != model.centroids.shape[1]:
        raise DataError(
            f"data has {grid.shape[1]} dimensions, model expects {model.centroids.shape[1]}"
        )
    if isinstance(model, FcmModel):
        return _argmax_lowest(fcm_memberships(grid, model.centroids, model.m, model.squared_distances))
    return np.argmin(_squared_distances(grid, model.centroids), axis=1)
