"""Spatially balanced two-fold split of source series."""

from __future__ import annotations

import numpy as np

EMBEDDINGS = ("pca3", "tsne3", "external")


def standardize(F) -> np.ndarray:
    """Median-impute, drop constant columns and z-score."""
    F = np.array(F, dtype=float, copy=True)
    for j in range(F.shape[1]):
        col = F[:, j]
        bad = ~np.isfinite(col)
        if bad.any():
            good = col[~bad]
            col[bad] = np.median(good) if good.size else 0.0
    sd = F.std(axis=0)
    keep = sd > 1e-12 * np.maximum(1.0, np.abs(F.mean(axis=0)))
    F = F[:, keep]
    return (F - F.mean(axis=0)) / sd[keep]


def pca_embedding(F, dims: int = 3) -> np.ndarray:
    Z = standardize(F)
    if Z.shape[1] == 0:
        return np.zeros((Z.shape[0], dims))
    U, S, Vt = np.linalg.svd(Z, full_matrices=False)
    k = min(dims, S.size)
    # sign convention: largest-magnitude loading of each component is positive
    signs = np.sign(Vt[np.arange(k), np.argmax(np.abs(Vt[:k]), axis=1)])
    signs[signs == 0] = 1.0
    emb = U[:, :k] * S[:k] * signs
    if k < dims:
        emb = np.hstack([emb, np.zeros((emb.shape[0], dims - k))])
    return emb


def tsne_embedding(F, seed: int, dims: int = 3, perplexity: float = 30.0) -> np.ndarray:
    from sklearn.manifold import TSNE

    Z = standardize(F)
    perplexity = min(perplexity, max(1.0, (Z.shape[0] - 1) / 3.0))
    return TSNE(
        n_components=dims, perplexity=perplexity, random_state=seed, init="pca",
        method="barnes_hut" if dims < 4 else "exact",
    ).fit_transform(Z)


def local_pivotal_pairs(points, seed: int) -> np.ndarray:
    """Pair each randomly chosen unit with its nearest unassigned neighbour.

    The chosen unit goes to fold 1 or 2 at random and its neighbour to the
    other fold; an odd unit left at the end goes to fold 1.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xF01D]))
    fold = np.zeros(n, dtype=np.int64)
    free = np.ones(n, dtype=bool)
    order = rng.permutation(n)
    pos = 0
    while free.sum() >= 2:
        while not free[order[pos]]:
            pos += 1
        i = order[pos]
        free[i] = False
        cand = np.flatnonzero(free)
        d = np.sum((P[cand] - P[i]) ** 2, axis=1)
        j = cand[int(np.argmin(d))]
        free[j] = False
        a = 1 + int(rng.integers(2))
        fold[i], fold[j] = a, 3 - a
    fold[free] = 1
    return fold


def stratified_two_fold(
    features, seed: int, embedding: str = "pca3", external=None,
) -> np.ndarray:
    """Fold label (1 or 2) per feature row; sizes are ceil(n/2) and floor(n/2)."""
    F = np.asarray(features if embedding != "external" else external, dtype=float)
    if F.ndim != 2 or F.shape[0] < 2:
        raise ValueError("two-fold split needs at least 2 series")
    if embedding == "pca3":
        emb = pca_embedding(F)
    elif embedding == "tsne3":
        emb = tsne_embedding(F, seed)
    elif embedding == "external":
        emb = F
    else:
        raise ValueError(f"unknown embedding {embedding!r}; expected one of {EMBEDDINGS}")
    return local_pivotal_pairs(emb, seed)
