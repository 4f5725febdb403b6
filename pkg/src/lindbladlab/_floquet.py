"""One-period propagator construction for periodically driven Lindblad models.

The bichromatically driven coupled-cavity model cannot be made autonomous by
any rotating frame, but its generator is exactly periodic with the drive
period tau = 2 pi / omega.  Long horizons (1e5+ periods) are reached by
building the one-period superoperator once and raising it to the required
power by repeated squaring.

Two structural facts keep this affordable:

* Every Hamiltonian term preserves, and every jump operator flips, a Z2
  grading of the Hilbert basis (photon number + atomic excitation parity).
  Density matrices starting in the equal-grade sector stay there, which
  halves the superoperator dimension.

* The jump weight per period (rate * tau * |c|^2) is tiny, so the period map
  is assembled from the exact no-jump propagator plus a Gauss-quadrature
  Dyson expansion in the jump insertions, truncated after the double-jump
  term.  The truncation error per period is far below the integration
  tolerances, and a rank-one correction restores exact trace preservation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .models import LindbladModel

PATTERN_TOL = 1e-14


def _edge_list(mat: np.ndarray):
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    if scale == 0.0:
        return []
    rows, cols = np.nonzero(np.abs(mat) > PATTERN_TOL * scale)
    return [(int(i), int(j)) for i, j in zip(rows, cols) if i != j]


def jump_parity_classes(model: LindbladModel):
    """Two-color the Hilbert basis so that Hamiltonian terms connect equal
    colors and jump operators connect opposite colors.  Returns an int array
    of colors, or None when no consistent coloring exists."""
    d = model.dim
    edges = []
    hams = [model.h_static.mat] + [op.mat for op, _, _ in model.h_oscillating]
    for h in hams:
        edges += [(i, j, 0) for i, j in _edge_list(h)]
    for _, op in model.channels:
        edges += [(i, j, 1) for i, j in _edge_list(op.mat)]

    adj = [[] for _ in range(d)]
    for i, j, flip in edges:
        adj[i].append((j, flip))
        adj[j].append((i, flip))

    color = np.full(d, -1, dtype=int)
    for start in range(d):
        if color[start] >= 0:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v, flip in adj[u]:
                want = color[u] ^ flip
                if color[v] < 0:
                    color[v] = want
                    stack.append(v)
                elif color[v] != want:
                    return None
    return color


@dataclass
class SectorPlan:
    """Equal-grade sector of the vectorized state space."""

    tau: float
    color: np.ndarray
    classes: list                # [indices with color 0, indices with color 1]
    sector_full_idx: np.ndarray  # flat vec indices (i + d*j), sector order
    block_sizes: list            # [m0^2, m1^2]

    @property
    def size(self) -> int:
        return int(self.sector_full_idx.size)


def drive_period(model: LindbladModel):
    """2 pi / omega when all oscillating terms share one |omega|, else None."""
    if model.is_autonomous:
        return None
    freqs = {abs(om) for _, _, om in model.h_oscillating}
    base = freqs.pop()
    if base == 0 or any(abs(f - base) > 1e-9 * base for f in freqs):
        return None
    return 2.0 * np.pi / base


def plan_sector(model: LindbladModel):
    """Return the SectorPlan, or None when the model has no usable period
    or no consistent grading."""
    tau = drive_period(model)
    if tau is None:
        return None
    color = jump_parity_classes(model)
    if color is None:
        return None
    d = model.dim
    classes = [np.where(color == c)[0] for c in (0, 1)]
    blocks = []
    for cls in classes:
        ii = np.repeat(cls, cls.size)          # pair index (i, j), i-major
        jj = np.tile(cls, cls.size)
        blocks.append(ii + d * jj)
    sector = np.concatenate(blocks)
    return SectorPlan(tau=tau, color=color, classes=classes,
                      sector_full_idx=sector,
                      block_sizes=[c.size**2 for c in classes])


def state_in_sector(vec_rho: np.ndarray, plan: SectorPlan,
                    tol: float = 1e-12) -> bool:
    total_sq = float(np.real(np.vdot(vec_rho, vec_rho)))
    inside = vec_rho[plan.sector_full_idx]
    inside_sq = float(np.real(np.vdot(inside, inside)))
    off = np.sqrt(max(total_sq - inside_sq, 0.0))
    return off <= tol * max(np.sqrt(total_sq), 1.0)


def _nonhermitian_parts(model: LindbladModel):
    base = model.h_static.mat.astype(complex).copy()
    for rate, op in model.channels:
        c = op.mat
        base = base - 0.5j * rate * (c.conj().T @ c)
    osc = [(op.mat, amp, om) for op, amp, om in model.h_oscillating]

    def h_nh(t: float) -> np.ndarray:
        h = base.copy()
        for mat, amp, om in osc:
            term = amp * np.exp(1j * om * t) * mat
            h += term + term.conj().T
        return h

    return h_nh


def _integrate_no_jump(model: LindbladModel, tau: float, checkpoints,
                       n_steps: int):
    """Propagators U(t, 0) of dU/dt = -i H_nh(t) U at the checkpoint times,
    via fixed-step classical RK4 with about n_steps substeps per period."""
    d = model.dim
    h_nh = _nonhermitian_parts(model)
    dt_target = tau / n_steps
    u = np.eye(d, dtype=complex)
    t = 0.0
    out = {}
    for tc in checkpoints:
        span = tc - t
        if span < -1e-15:
            raise ValueError("checkpoints must be ascending")
        nsub = max(1, int(np.ceil(span / dt_target - 1e-12))) if span > 0 else 0
        h = span / nsub if nsub else 0.0
        for _ in range(nsub):
            k1 = -1j * (h_nh(t) @ u)
            k2 = -1j * (h_nh(t + 0.5 * h) @ (u + 0.5 * h * k1))
            k3 = -1j * (h_nh(t + 0.5 * h) @ (u + 0.5 * h * k2))
            k4 = -1j * (h_nh(t + h) @ (u + h * k3))
            u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[tc] = u.copy()
    return out


def _gauss_nodes(tau: float, n: int):
    x, w = leggauss(n)
    return 0.5 * tau * (x + 1.0), 0.5 * tau * w


def build_period_map(model: LindbladModel, plan: SectorPlan,
                     n_u_steps: int = 8192, nodes_single: int = 32,
                     nodes_double: int = 10) -> np.ndarray:
    """Dense one-period superoperator on the equal-grade sector."""
    d = model.dim
    tau = plan.tau
    s1, w1 = _gauss_nodes(tau, nodes_single)
    s2, w2 = _gauss_nodes(tau, nodes_double)
    checkpoints = sorted(set(np.concatenate([s1, s2, [tau]]).tolist()))
    u_at = _integrate_no_jump(model, tau, checkpoints, n_u_steps)
    u_tau = u_at[tau]

    def sandwich(c: np.ndarray, s: float) -> np.ndarray:
        us = u_at[s]
        return np.linalg.solve(us, c @ us)

    # Kraus operators: the no-jump term, then one and two jump insertions.
    preserving = [u_tau]
    flipping = []
    for rate, op in model.channels:
        c = op.mat
        for s, w in zip(s1, w1):
            flipping.append(np.sqrt(rate * w) * (u_tau @ sandwich(c, s)))
    r2 = {}
    for ci, (rate, op) in enumerate(model.channels):
        for qi, s in enumerate(s2):
            r2[ci, qi] = np.sqrt(rate) * sandwich(op.mat, s)
    n_chan = len(model.channels)
    for qa in range(nodes_double):
        for qb in range(qa, nodes_double):
            scale = w2[qa] * w2[qb] * (0.5 if qa == qb else 1.0)
            for ca in range(n_chan):
                for cb in range(n_chan):
                    k = u_tau @ r2[cb, qb] @ r2[ca, qa]
                    preserving.append(np.sqrt(scale) * k)

    # Sector assembly: for Kraus K the superoperator is conj(K) (x) K in the
    # column-stacking convention; on pair bases ((i,j), i-major) each class
    # block is sum_K kron(K_rc, conj(K_rc)), evaluated as one batched GEMM.
    cls = plan.classes
    m_sec = plan.size
    p = np.zeros((m_sec, m_sec), dtype=complex)
    offs = np.concatenate([[0], np.cumsum(plan.block_sizes)]).astype(int)

    def accumulate(kraus_list, row_cls, col_cls):
        if not kraus_list:
            return
        r, c = cls[row_cls], cls[col_cls]
        stack = np.stack([k[np.ix_(r, c)].ravel() for k in kraus_list])
        gram = stack.T @ stack.conj()           # [(pi,pk), (pj,pl)]
        mr, mc = r.size, c.size
        blk = gram.reshape(mr, mc, mr, mc).transpose(0, 2, 1, 3) \
                  .reshape(mr * mr, mc * mc)
        p[offs[row_cls]:offs[row_cls + 1], offs[col_cls]:offs[col_cls + 1]] += blk

    for a in (0, 1):
        accumulate(preserving, a, a)
        accumulate(flipping, 1 - a, a)

    # Rank-one correction: make every column exactly trace preserving.
    i_arr = plan.sector_full_idx % d
    j_arr = plan.sector_full_idx // d
    trace_row = (i_arr == j_arr).astype(complex)
    defect = trace_row - trace_row @ p
    unit = trace_row / float(np.sum(trace_row.real))   # vec(I/d) on sector
    p += np.outer(unit, defect)
    return p


def matrix_power_pow2(p: np.ndarray, exponent_log2: int) -> np.ndarray:
    out = p
    for _ in range(exponent_log2):
        out = out @ out
    return out
