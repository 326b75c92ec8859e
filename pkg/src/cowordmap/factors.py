"""Principal components with varimax rotation over the word/document matrix."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .matrix import WordDocumentMatrix

logger = logging.getLogger(__name__)


class FactorError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""


@dataclass(frozen=True)
class CorrelationMatrix:
    words: tuple[str, ...]
    R: np.ndarray


@dataclass(frozen=True)
class FactorModel:
    words: tuple[str, ...]
    loadings: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_fraction: float
    rotation: str
    all_eigenvalues: np.ndarray
    rotation_matrix: np.ndarray
    R: np.ndarray

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def communalities(self) -> np.ndarray:
        return (self.loadings ** 2).sum(axis=1)

    def top_loadings(self, n: int = 4) -> list[list[tuple[str, float]]]:
        """Per factor, the ``n`` words with the largest absolute loading."""
        out = []
        for j in range(self.k):
            col = self.loadings[:, j]
            order = sorted(range(len(col)), key=lambda i: (-abs(col[i]), self.words[i]))[:n]
            out.append([(self.words[i], float(col[i])) for i in order])
        return out


def correlation_matrix(m: WordDocumentMatrix) -> CorrelationMatrix:
    """Pearson correlations between word columns, documents as cases."""
    x = m.counts.astype(np.float64)
    if x.shape[0] < 2:
        raise FactorError("correlation needs at least two documents")
    centered = x - x.mean(axis=0)
    ss = np.sqrt((centered ** 2).sum(axis=0))
    flat = [w for w, s in zip(m.words, ss) if s == 0]
    if flat:
        raise FactorError(f"zero-variance column(s): {', '.join(flat)}")
    z = centered / ss
    r = z.T @ z
    r = (r + r.T) / 2
    np.fill_diagonal(r, 1.0)
    np.clip(r, -1.0, 1.0, out=r)
    return CorrelationMatrix(m.words, r)


def _off_norm(a: np.ndarray) -> float:
    return math.sqrt(2.0 * float((np.triu(a, 1) ** 2).sum()))


def jacobi_eigh(s: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order and the matching eigenvectors as
    columns. Raises ConvergenceError if the off-diagonal norm is still above
    ``tol * max(1, ||S||_F)`` after ``max_sweeps`` sweeps.
    """
    a = np.array(s, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise FactorError("matrix must be square")
    v = np.eye(n)
    limit = tol * max(1.0, float(np.linalg.norm(a)))

    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= limit:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = float(a[q, q] - a[p, p])
                if abs(apq) < 1e-100 * abs(diff):
                    t = float(apq) / diff  # small-angle limit, avoids overflow in theta**2
                else:
                    theta = diff / (2.0 * float(apq))
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                cols = a[:, [p, q]]
                a[:, p] = c * cols[:, 0] - sn * cols[:, 1]
                a[:, q] = sn * cols[:, 0] + c * cols[:, 1]
                rows = a[[p, q], :]
                a[p, :] = c * rows[0] - sn * rows[1]
                a[q, :] = sn * rows[0] + c * rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]]
                v[:, p] = c * vc[:, 0] - sn * vc[:, 1]
                v[:, q] = sn * vc[:, 0] + c * vc[:, 1]
    else:
        off = _off_norm(a)
        if off > limit:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")

    vals = np.diag(a).copy()
    order = sorted(range(n), key=lambda i: -vals[i])
    return vals[order], v[:, order]


def varimax_criterion(loadings: np.ndarray) -> float:
    """Raw varimax criterion: sum over factors of the variance of squared loadings."""
    sq = loadings ** 2
    p = loadings.shape[0]
    return float(((sq ** 2).sum(axis=0) / p - (sq.sum(axis=0) / p) ** 2).sum())


def varimax(
    loadings: np.ndarray,
    normalize: bool = False,
    tol: float = 1e-12,
    max_sweeps: int = 500,
) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal varimax rotation by Kaiser's pairwise planar rotations.

    With ``normalize`` rows are scaled to unit communality before rotating
    (Kaiser normalization) and scaled back afterwards. Returns the rotated
    loadings and the rotation matrix ``T`` with ``rotated = loadings @ T``.
    """
    lam = np.array(loadings, dtype=np.float64)
    p, k = lam.shape
    t_mat = np.eye(k)
    if k < 2:
        return lam, t_mat
    h = np.sqrt((lam ** 2).sum(axis=1))
    if normalize:
        scale = np.where(h > 0, h, 1.0)
        lam = lam / scale[:, None]

    for _ in range(max_sweeps):
        largest = 0.0
        for j in range(k - 1):
            for l in range(j + 1, k):
                x, y = lam[:, j], lam[:, l]
                u = x * x - y * y
                v = 2.0 * x * y
                a_, b_ = u.sum(), v.sum()
                c_ = (u * u - v * v).sum()
                d_ = 2.0 * (u * v).sum()
                num = d_ - 2.0 * a_ * b_ / p
                den = c_ - (a_ * a_ - b_ * b_) / p
                phi = math.atan2(num, den) / 4.0
                if abs(phi) < tol:
                    continue
                cs, sn = math.cos(phi), math.sin(phi)
                lam[:, j], lam[:, l] = cs * x + sn * y, -sn * x + cs * y
                tj, tl = t_mat[:, j].copy(), t_mat[:, l].copy()
                t_mat[:, j], t_mat[:, l] = cs * tj + sn * tl, -sn * tj + cs * tl
                largest = max(largest, abs(phi))
        if largest < tol:
            break
    else:
        raise ConvergenceError(f"varimax did not converge in {max_sweeps} sweeps")

    if normalize:
        lam = lam * scale[:, None]
    return lam, t_mat


def _orient(loadings: np.ndarray, t_mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flip each column so that its largest-magnitude entry is positive."""
    lam = loadings.copy()
    t_mat = t_mat.copy()
    for j in range(lam.shape[1]):
        i = int(np.argmax(np.abs(lam[:, j])))
        if lam[i, j] < 0:
            lam[:, j] *= -1
            t_mat[:, j] *= -1
    return lam, t_mat


def pca_varimax(
    corr: CorrelationMatrix,
    k: int,
    rotation: str = "varimax",
    kaiser: bool = False,
) -> FactorModel:
    """Extract ``k`` principal components and optionally rotate them by varimax."""
    if rotation not in ("varimax", "none"):
        raise FactorError(f"unknown rotation {rotation!r}")
    r = np.asarray(corr.R, dtype=np.float64)
    p = r.shape[0]
    vals, vecs = jacobi_eigh(r)
    rank = int((vals > 1e-10 * max(1.0, vals[0])).sum())
    if not 1 <= k <= rank:
        raise FactorError(f"factor count {k} must lie in [1, {rank}] (rank of R)")

    unrotated = vecs[:, :k] * np.sqrt(vals[:k])
    # orient before rotating so that the rotation starts from a fixed sign pattern
    unrotated, _ = _orient(unrotated, np.eye(k))
    if rotation == "varimax":
        lam, t_mat = varimax(unrotated, normalize=kaiser)
    else:
        lam, t_mat = unrotated, np.eye(k)
    lam, t_mat = _orient(lam, t_mat)
    return FactorModel(
        words=tuple(corr.words),
        loadings=lam,
        eigenvalues=vals[:k].copy(),
        explained_variance_fraction=float(vals[:k].sum() / p),
        rotation=rotation + ("-kaiser" if rotation == "varimax" and kaiser else ""),
        all_eigenvalues=vals,
        rotation_matrix=t_mat,
        R=r,
    )


def standardize(m: WordDocumentMatrix) -> np.ndarray:
    x = m.counts.astype(np.float64)
    sd = x.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise FactorError("cannot standardize a zero-variance column")
    return (x - x.mean(axis=0)) / sd


def factor_scores(m: WordDocumentMatrix, model: FactorModel) -> np.ndarray:
    """Regression-method factor scores F = Z R^+ L (documents x factors).

    The pseudo-inverse handles the singular R that arises when there are more
    words than documents.
    """
    if tuple(m.words) != tuple(model.words):
        raise FactorError("matrix words do not match the fitted model")
    z = standardize(m)
    r_pinv = np.linalg.pinv(model.R, rcond=1e-10, hermitian=True)
    return z @ r_pinv @ model.loadings


def dominant_factor(scores: np.ndarray) -> list[int]:
    """Per document, the 0-based factor with the largest absolute score (lowest index on ties)."""
    scores = np.asarray(scores)
    if scores.size == 0:
        raise FactorError("empty score table")
    return [int(i) for i in np.argmax(np.abs(scores), axis=1)]
