"""Dense complex operator algebra for small multipartite quantum systems.

Everything here works on explicit complex matrices: tensor products,
embedding of single-site operators into a labeled product space, partial
traces, and Hermitian eigendecompositions.  Dimensions in this package stay
tiny (at most a few hundred), so dense storage is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

# Tolerances for validating operators and density matrices.  The density
# matrix bounds are loose enough to absorb integrator round-off.
OP_HERMITICITY_TOL = 1e-12
DM_HERMITICITY_TOL = 1e-10
DM_TRACE_TOL = 1e-8
DM_POSITIVITY_TOL = 1e-8

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, ComplexOperator):
        return obj.mat
    return np.asarray(obj, dtype=complex)


@dataclass(frozen=True)
class ComplexOperator:
    """A dense complex square matrix with its dimension.

    Thin wrapper used for Hamiltonians, jump operators and density
    matrices.  Arithmetic is forwarded to numpy; `mat` is the raw array.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "ComplexOperator":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zeros(cls, dim: int) -> "ComplexOperator":
        return cls(np.zeros((dim, dim), dtype=complex))

    def dag(self) -> "ComplexOperator":
        return ComplexOperator(self.mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.mat))) if self.dim else 0.0

    def is_hermitian(self, tol: float = OP_HERMITICITY_TOL) -> bool:
        return float(np.max(np.abs(self.mat - self.mat.conj().T))) <= tol

    def __add__(self, other):
        return ComplexOperator(self.mat + _as_matrix(other))

    def __sub__(self, other):
        return ComplexOperator(self.mat - _as_matrix(other))

    def __neg__(self):
        return ComplexOperator(-self.mat)

    def __mul__(self, scalar):
        return ComplexOperator(self.mat * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return ComplexOperator(self.mat @ _as_matrix(other))


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor factors, each a (label, local dimension) pair."""

    factors: tuple

    def __post_init__(self):
        factors = tuple((str(lbl), int(d)) for lbl, d in self.factors)
        labels = [lbl for lbl, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in {labels}")
        if any(d < 1 for _, d in factors):
            raise ValueError("factor dimensions must be positive")
        object.__setattr__(self, "factors", factors)

    @property
    def labels(self) -> tuple:
        return tuple(lbl for lbl, _ in self.factors)

    @property
    def dims(self) -> tuple:
        return tuple(d for _, d in self.factors)

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def index(self, label: str) -> int:
        for k, (lbl, _) in enumerate(self.factors):
            if lbl == label:
                return k
        raise KeyError(f"unknown factor label {label!r}; have {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.index(label)][1]

    def subset(self, keep: Sequence[str]) -> "SubsystemLayout":
        keep = set(keep)
        return SubsystemLayout(tuple(f for f in self.factors if f[0] in keep))


def single_factor_layout(label: str, dim: int) -> SubsystemLayout:
    return SubsystemLayout(((label, dim),))


@dataclass(frozen=True)
class DensityMatrix:
    """A positive unit-trace operator together with its factor layout."""

    op: ComplexOperator
    layout: SubsystemLayout
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.op.dim != self.layout.total_dim:
            raise ValueError(
                f"state dim {self.op.dim} != layout total {self.layout.total_dim}")
        if self.validate:
            errs = self.check()
            if errs:
                raise ValueError("invalid density matrix: " + "; ".join(errs))

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @property
    def dim(self) -> int:
        return self.op.dim

    def check(self,
              herm_tol: float = DM_HERMITICITY_TOL,
              trace_tol: float = DM_TRACE_TOL,
              pos_tol: float = DM_POSITIVITY_TOL) -> list:
        """Return a list of human-readable invariant violations (empty if ok)."""
        m = self.mat
        errs = []
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > herm_tol:
            errs.append(f"hermiticity defect {herm:.3e} > {herm_tol:.1e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > trace_tol:
            errs.append(f"trace {tr:.12g} deviates from 1 by {abs(tr - 1):.3e}")
        wmin = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
        if wmin < -pos_tol:
            errs.append(f"minimum eigenvalue {wmin:.3e} < -{pos_tol:.1e}")
        return errs

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))

    @classmethod
    def from_ket(cls, ket: np.ndarray, layout: SubsystemLayout,
                 normalize: bool = True) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex).reshape(-1)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(ComplexOperator(np.outer(v, v.conj())), layout)


def tensor(factors: Iterable) -> ComplexOperator:
    """Kronecker product of operators, in the given order."""
    mats = [_as_matrix(f) for f in factors]
    if not mats:
        raise ValueError("tensor() needs at least one factor")
    return ComplexOperator(reduce(np.kron, mats))


def embed(local, layout: SubsystemLayout, site: str) -> ComplexOperator:
    """Lift a single-site operator to the full space, identity elsewhere."""
    loc = _as_matrix(local)
    pos = layout.index(site)
    want = layout.dims[pos]
    if loc.shape[0] != want:
        raise ValueError(
            f"operator dim {loc.shape[0]} does not match factor {site!r} (dim {want})")
    mats = [loc if k == pos else np.eye(d, dtype=complex)
            for k, (_, d) in enumerate(layout.factors)]
    return tensor(mats)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every factor not named in `keep`, preserving factor order."""
    keep = {keep} if isinstance(keep, str) else set(keep)
    labels = rho.layout.labels
    unknown = keep - set(labels)
    if unknown:
        raise KeyError(f"unknown labels {sorted(unknown)}; have {labels}")
    if not keep:
        raise ValueError("must keep at least one factor")

    dims = list(rho.layout.dims)
    t = rho.mat.reshape(dims + dims)
    n = len(dims)
    # Trace factors one at a time, rightmost first so axis numbers stay valid.
    for pos in reversed(range(n)):
        if labels[pos] in keep:
            continue
        t = np.trace(t, axis1=pos, axis2=pos + n)
        n -= 1
    kept = rho.layout.subset(keep)
    d = kept.total_dim
    return DensityMatrix(ComplexOperator(t.reshape(d, d)), kept,
                         validate=rho.validate)


def herm_eigen(op, rtol: float = 1e-9):
    """Eigendecomposition of a Hermitian operator.

    Returns eigenvalues in ascending order and the matrix of orthonormal
    eigenvectors as columns.  Raises if the input is not Hermitian within
    `rtol` times its magnitude.
    """
    m = _as_matrix(op)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if defect > rtol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max|M - M^dag| = {defect:.3e} "
            f"(allowed {rtol * scale:.3e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    return w, v


def ket(layout_or_dim, index) -> np.ndarray:
    """Computational basis ket, by flat index or per-factor indices."""
    if isinstance(layout_or_dim, SubsystemLayout):
        dims = layout_or_dim.dims
        if isinstance(index, (tuple, list)):
            flat = 0
            for d, i in zip(dims, index):
                if not 0 <= i < d:
                    raise ValueError(f"basis index {i} out of range for dim {d}")
                flat = flat * d + i
        else:
            flat = int(index)
        dim = layout_or_dim.total_dim
    else:
        dim = int(layout_or_dim)
        flat = int(index)
    v = np.zeros(dim, dtype=complex)
    v[flat] = 1.0
    return v


def destroy(n_levels: int) -> ComplexOperator:
    """Bosonic annihilation operator truncated to `n_levels` Fock states."""
    a = np.zeros((n_levels, n_levels), dtype=complex)
    for n in range(1, n_levels):
        a[n - 1, n] = np.sqrt(n)
    return ComplexOperator(a)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of the difference of two states."""
    d = _as_matrix(rho) - _as_matrix(sigma)
    w = np.linalg.eigvalsh((d + d.conj().T) / 2.0)
    return 0.5 * float(np.sum(np.abs(w)))
