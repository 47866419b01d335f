"""Representative days by k-means over daily profiles."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .instance import RepresentativeDay


@dataclass(frozen=True)
class Clustering:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float


def _fill_empty(X: np.ndarray, labels: np.ndarray, k: int) -> None:
    """Give every empty cluster the farthest member of the largest cluster."""
    for c in range(k):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels, minlength=k)
        big = int(np.argmax(counts))
        idx = np.flatnonzero(labels == big)
        dist = np.sum((X[idx] - X[idx].mean(axis=0)) ** 2, axis=1)
        # last index among the farthest keeps first members in place
        far = idx[len(dist) - 1 - int(np.argmax(dist[::-1]))]
        labels[far] = c


def cluster_profiles(X: np.ndarray, k: int, seed: int = 0) -> Clustering:
    """Lloyd's algorithm with k-means++ seeding on the rows of ``X``.

    Each feature block is expected to be comparably scaled; centroids are
    plain member means.  With fewer distinct rows than ``k`` some clusters
    come back empty; each one then takes a single member from the largest
    cluster so that every cluster keeps a positive weight.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    km = KMeans(n_clusters=k, init="k-means++", n_init=1, random_state=seed, algorithm="lloyd")
    with np.errstate(all="ignore"), warnings.catch_warnings():
        # duplicate rows make the library report fewer distinct clusters
        warnings.simplefilter("ignore", ConvergenceWarning)
        labels = km.fit_predict(X).copy()
    _fill_empty(X, labels, k)
    # recompute means in the caller's units so rounding in the library does not leak in
    cents = np.vstack([X[labels == c].mean(axis=0) for c in range(k)])
    inertia = float(sum(np.sum((X[labels == c] - cents[c]) ** 2) for c in range(k)))
    return Clustering(cents, labels, inertia)


def cluster_days(demand: Mapping[str, np.ndarray], k: int, seed: int = 0,
                 pv: np.ndarray | None = None) -> list[RepresentativeDay]:
    """Collapse daily profiles into ``k`` weighted representative days.

    ``demand`` maps bus id to an (n_days, periods) kW array; ``pv`` is an
    optional (n_days, periods) availability array.  Each block is divided by
    its standard deviation before clustering so that PV fractions and kW
    demands carry similar weight.
    """
    buses = sorted(demand)
    blocks = [np.asarray(demand[b], dtype=float) for b in buses]
    if pv is not None:
        blocks.append(np.asarray(pv, dtype=float))
    n = blocks[0].shape[0]
    if any(b.shape[0] != n for b in blocks):
        raise ValueError("all profile blocks need the same number of days")
    scales = [b.std() if b.std() > 0 else 1.0 for b in blocks]
    X = np.hstack([b / s for b, s in zip(blocks, scales)])
    res = cluster_profiles(X, k, seed)
    days = []
    width = blocks[0].shape[1]
    # order clusters by first member index so output does not depend on label numbering
    order = sorted(range(k), key=lambda c: int(np.flatnonzero(res.labels == c)[0]))
    for rank, c in enumerate(order):
        members = res.labels == c
        dem = {b: tuple(float(v) for v in blk[members].mean(axis=0)) for b, blk in zip(buses, blocks)}
        if pv is not None:
            pv_c = tuple(float(min(1.0, max(0.0, v))) for v in blocks[-1][members].mean(axis=0))
        else:
            pv_c = (0.0,) * width
        days.append(RepresentativeDay(float(members.sum()), dem, pv_c, f"cluster{rank}"))
    return days
