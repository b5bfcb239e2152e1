"""Dense vector/matrix helpers shared by every other module.

Vectors and matrices are plain ``float64`` numpy arrays. The helpers here
only add the boundary checks (shape, finiteness, positive definiteness)
that the rest of the package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FRAME_TOL = 1e-12


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NonFiniteError(FloatingPointError):
    """A NaN or Inf escaped a computation."""


class NotSPDError(np.linalg.LinAlgError):
    """Matrix failed a symmetric positive definite factorization."""


class FrameError(ValueError):
    """An orthonormal frame cannot be built or extended."""


def as_vec(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} has non-finite entries")
    return v


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} has non-finite entries")
    return A


def check_finite(x: np.ndarray, what: str = "iterate") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"non-finite {what}")
    return x


def dot(a, b) -> float:
    a = as_vec(a, "a")
    b = as_vec(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"dot of dims {a.size} and {b.size}")
    return float(a @ b)


def sq_norm(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(a @ a)


def solve_spd(M, rhs) -> np.ndarray:
    """Solve ``M x = rhs`` for symmetric positive definite ``M`` by Cholesky."""
    M = as_matrix(M, "M")
    rhs = as_vec(rhs, "rhs")
    if M.shape[0] != M.shape[1] or M.shape[0] != rhs.size:
        raise DimensionError(f"system {M.shape} with rhs of dim {rhs.size}")
    if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise NotSPDError("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError("matrix is not positive definite") from exc
    # two triangular solves; numpy has no triangular solver so use the
    # generic one on each factor (still exact for these sizes)
    y = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, y)


@dataclass(frozen=True)
class OrthonormalFrame:
    """Columns of ``columns`` (shape ``ambient_dim x count``) are orthonormal."""

    columns: np.ndarray

    def __post_init__(self):
        C = as_matrix(self.columns, "frame columns")
        if C.shape[1] > C.shape[0]:
            raise FrameError(f"{C.shape[1]} columns cannot be orthonormal in R^{C.shape[0]}")
        err = gram_error(C)
        if err > FRAME_TOL:
            raise FrameError(f"columns are not orthonormal (max Gram error {err:.2e})")
        C = C.copy()
        C.setflags(write=False)
        object.__setattr__(self, "columns", C)

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def count(self) -> int:
        return self.columns.shape[1]

    def __getitem__(self, i) -> np.ndarray:
        return self.columns[:, i]

    def coords(self, x) -> np.ndarray:
        return self.columns.T @ x

    def embed(self, c) -> np.ndarray:
        return self.columns @ c

    @classmethod
    def standard(cls, dim: int, count: int | None = None) -> "OrthonormalFrame":
        count = dim if count is None else count
        return cls(np.eye(dim)[:, :count])

    @classmethod
    def random(cls, dim: int, count: int, rng: np.random.Generator) -> "OrthonormalFrame":
        empty = np.zeros((dim, 0))
        vecs = _gram_schmidt(empty, rng.standard_normal((dim, count)))
        if vecs.shape[1] < count:
            raise FrameError("random draw was rank deficient")
        return cls(vecs)


def gram_error(C: np.ndarray) -> float:
    if C.shape[1] == 0:
        return 0.0
    G = C.T @ C
    return float(np.abs(G - np.eye(C.shape[1])).max())


def _gram_schmidt(basis: np.ndarray, candidates: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormalize ``candidates`` against ``basis`` and each other.

    Classical Gram-Schmidt with one re-orthogonalization pass. Candidates that
    collapse below ``tol`` after projection are skipped.
    """
    cols = [basis[:, j] for j in range(basis.shape[1])]
    new = []
    for j in range(candidates.shape[1]):
        v = candidates[:, j].astype(float)
        scale = np.linalg.norm(v)
        if scale == 0.0:
            continue
        for _ in range(2):
            for q in cols:
                v = v - (q @ v) * q
        nv = np.linalg.norm(v)
        if nv <= tol * scale:
            continue
        v = v / nv
        cols.append(v)
        new.append(v)
    if not new:
        return np.zeros((basis.shape[0], 0))
    return np.column_stack(new)


def orthonormal_complement_basis(frame: OrthonormalFrame, count: int) -> list[np.ndarray]:
    """Return ``count`` unit vectors orthogonal to ``frame`` and to each other.

    Standard basis vectors are used as candidates, in order, so the result is
    deterministic.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    room = frame.ambient_dim - frame.count
    if count > room:
        raise FrameError(f"asked for {count} complement vectors, only {room} available")
    if count == 0:
        return []
    vecs = _gram_schmidt(frame.columns, np.eye(frame.ambient_dim))
    if vecs.shape[1] < count:
        raise FrameError("could not complete the frame")
    out = [vecs[:, j].copy() for j in range(count)]
    check = np.column_stack([frame.columns] + [o[:, None] for o in out])
    if gram_error(check) > FRAME_TOL:
        raise FrameError("extended frame lost orthonormality")
    return out


def power_iteration(M: np.ndarray, max_iter: int = 200, rtol: float = 1e-10) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    M = as_matrix(M, "M")
    v = np.ones(M.shape[0]) / np.sqrt(M.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ (M @ v))
        if lam > 0 and abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return lam
