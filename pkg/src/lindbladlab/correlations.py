"""Correlation and distance measures for two-qubit states.

Discord and classical correlation use the closed-form expressions valid for
X states (density matrices whose only nonzero entries sit on the diagonal
and anti-diagonal of the computational basis), with the measurement on
qubit B.  All entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models
from .qlinalg import (
    ComplexOperator,
    DensityMatrix,
    SIGMA_Y,
    herm_eigen,
    partial_trace,
)

X_STATE_TOL = 1e-9
EIG_CLIP = 1e-10


def _xlog2x(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def binary_entropy(x: float) -> float:
    """h[x] = -x log2 x - (1-x) log2 (1-x), with 0 log 0 = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    return float(-_xlog2x(np.array([x])) - _xlog2x(np.array([1.0 - x])))


def _clipped_spectrum(mat: np.ndarray) -> np.ndarray:
    w, _ = herm_eigen(mat)
    return np.where((w < 0) & (w > -EIG_CLIP), 0.0, w)


def von_neumann_entropy(rho) -> float:
    """-sum_k lambda_k log2 lambda_k over the eigenvalues of rho."""
    mat = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    w = _clipped_spectrum(mat)
    if np.any(w < 0):
        raise ValueError(f"state has eigenvalue {w.min():.3e} < 0")
    return float(-np.sum(_xlog2x(w)))


def super_fidelity(rho, sigma) -> float:
    """G(rho, sigma) = Tr[rho sigma] + sqrt((1 - Tr rho^2)(1 - Tr sigma^2))."""
    a = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    b = sigma.mat if hasattr(sigma, "mat") else np.asarray(sigma, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    overlap = float(np.real(np.trace(a @ b)))
    pa = max(0.0, 1.0 - float(np.real(np.trace(a @ a))))
    pb = max(0.0, 1.0 - float(np.real(np.trace(b @ b))))
    return overlap + float(np.sqrt(pa * pb))


def mutual_information(rho: DensityMatrix) -> float:
    """S(rho_A) + S(rho_B) - S(rho_AB) for a bipartite state."""
    labels = rho.layout.labels
    if len(labels) != 2:
        raise ValueError(f"need a two-factor layout, got {labels}")
    sa = von_neumann_entropy(partial_trace(rho, {labels[0]}))
    sb = von_neumann_entropy(partial_trace(rho, {labels[1]}))
    sab = von_neumann_entropy(rho)
    return sa + sb - sab


def population(rho, projector_state: np.ndarray) -> float:
    """<psi| rho |psi> for a normalized pure state."""
    m = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    v = np.asarray(projector_state, dtype=complex).reshape(-1)
    if v.size != m.shape[0]:
        raise ValueError(f"state dim {v.size} != operator dim {m.shape[0]}")
    return float(np.real(np.vdot(v, m @ v)))


def concurrence(rho) -> float:
    """Wootters two-qubit concurrence.

    C = max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of
    the eigenvalues of rho (sy kron sy) rho* (sy kron sy).
    """
    m = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 state, got {m.shape}")
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    r = m @ yy @ m.conj() @ yy
    w = np.sort(np.abs(np.real(np.linalg.eigvals(r))))[::-1]
    lam = np.sqrt(w)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True)
class CorrelationReport:
    """Every measure evaluated on one two-qubit X state."""

    qd: float
    cc: float
    concurrence: float
    mutual_information: float
    super_fidelity_to_target: float
    q1: float
    q2: float
    cc1: float
    cc2: float
    d1: float
    d2: float
    tau: float
    eigenvalues: tuple

    def __post_init__(self):
        slack = 1e-9
        for name in ("qd", "cc", "concurrence", "super_fidelity_to_target"):
            v = getattr(self, name)
            if not -slack <= v <= 1.0 + slack:
                raise ValueError(f"{name} = {v} outside [0, 1]")
        if abs(self.qd - min(self.q1, self.q2)) > slack:
            raise ValueError("qd must equal min(q1, q2)")
        if abs(self.cc - max(self.cc1, self.cc2)) > slack:
            raise ValueError("cc must equal max(cc1, cc2)")


def assert_x_state(mat: np.ndarray, tol: float = X_STATE_TOL):
    """Raise with the offending element if `mat` is not an X state."""
    allowed = {(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (3, 0), (1, 2), (2, 1)}
    for i in range(4):
        for j in range(4):
            if (i, j) in allowed:
                continue
            v = abs(mat[i, j])
            if v > tol:
                raise ValueError(
                    f"not an X state: |rho[{i},{j}]| = {v:.3e} > {tol:.1e}")


def xstate_discord_cc(rho) -> CorrelationReport:
    """Closed-form discord and classical correlation of an X state.

    With rho_kk the diagonal in the |00>,|01>,|10>,|11> order and lambda_k
    the eigenvalues of rho:

        tau  = (1 + sqrt([1 - 2(rho33 + rho44)]^2
                         + 4 (|rho14| + |rho23|)^2)) / 2
        D1   = h[tau]
        D2   = -sum_k rho_kk log2 rho_kk - h[rho11 + rho33]
        Q_j  = h[rho11 + rho33] + sum_k lambda_k log2 lambda_k + D_j
        CC_j = h[rho11 + rho22] - D_j
        QD   = min(Q1, Q2),  CC = max(CC1, CC2).
    """
    if isinstance(rho, DensityMatrix):
        dm, m = rho, rho.mat
    else:
        m = np.asarray(rho, dtype=complex)
        dm = DensityMatrix(ComplexOperator(m), models.QUBIT_PAIR_LAYOUT,
                           validate=False)
    if m.shape != (4, 4):
        raise ValueError(f"need a two-qubit state, got shape {m.shape}")
    assert_x_state(m)

    p = np.clip(np.real(np.diag(m)), 0.0, 1.0)
    lam = np.clip(_clipped_spectrum(m), 0.0, None)
    sum_lam_log = float(np.sum(_xlog2x(lam)))

    h_b = binary_entropy(min(1.0, p[0] + p[2]))      # S(rho_B)
    h_a = binary_entropy(min(1.0, p[0] + p[1]))      # S(rho_A)
    off = abs(m[0, 3]) + abs(m[1, 2])
    tau = 0.5 * (1.0 + np.sqrt((1.0 - 2.0 * (p[2] + p[3]))**2 + 4.0 * off**2))
    d1 = binary_entropy(min(1.0, tau))
    d2 = float(-np.sum(_xlog2x(p))) - h_b

    q1 = h_b + sum_lam_log + d1
    q2 = h_b + sum_lam_log + d2
    cc1 = h_a - d1
    cc2 = h_a - d2

    qd = min(q1, q2)
    ccv = max(cc1, cc2)
    return CorrelationReport(
        qd=max(qd, 0.0) if qd > -1e-9 else qd,
        cc=max(ccv, 0.0) if ccv > -1e-9 else ccv,
        concurrence=concurrence(m),
        mutual_information=mutual_information(dm),
        super_fidelity_to_target=super_fidelity(m, models.target_state().mat),
        q1=q1, q2=q2, cc1=cc1, cc2=cc2, d1=d1, d2=d2, tau=float(tau),
        eigenvalues=tuple(float(v) for v in lam),
    )
