"""Hamiltonians, dissipators and target states for the two preparation schemes.

Scheme A: two four-level atoms in one strongly lossy cavity, with the two
drive phases switched between an "S_x setting" and an "S_y setting".
Scheme B: one four-level atom in each of two hopping-coupled lossy cavities,
which realizes both collective decay channels simultaneously.

All frequencies and rates are in units of the atom-cavity coupling g; time is
in units of 1/g.  Atom-local basis order is |0>, |1>, |e>, |r>; full-model
factor order is atom1 (x) atom2 (x) cavity(ies).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .qlinalg import (
    ComplexOperator,
    DensityMatrix,
    SubsystemLayout,
    destroy,
    embed,
    single_factor_layout,
    tensor,
)

ATOM_DIM = 4
LEVEL = {"0": 0, "1": 1, "e": 2, "r": 3}

# Two-qubit computational basis |00>, |01>, |10>, |11>.
QUBIT_PAIR_LAYOUT = SubsystemLayout((("q1", 2), ("q2", 2)))

KET_00 = np.array([1, 0, 0, 0], dtype=complex)
KET_01 = np.array([0, 1, 0, 0], dtype=complex)
KET_10 = np.array([0, 0, 1, 0], dtype=complex)
KET_11 = np.array([0, 0, 0, 1], dtype=complex)
PHI_PLUS = (KET_00 + KET_11) / np.sqrt(2)
PHI_MINUS = (KET_00 - KET_11) / np.sqrt(2)
PSI_PLUS = (KET_01 + KET_10) / np.sqrt(2)
PSI_MINUS = (KET_01 - KET_10) / np.sqrt(2)

# Symmetric (triplet) subspace basis |00>, (|01>+|10>)/sqrt(2), |11>,
# stacked as columns of an isometry from C^3 into the two-qubit space.
TRIPLET_BASIS = np.stack([KET_00, PSI_PLUS, KET_11], axis=1)


def _atom_op(bra_level: str, ket_level: str) -> np.ndarray:
    """|a><b| on one atom, e.g. _atom_op('e', '0') = |e><0|."""
    m = np.zeros((ATOM_DIM, ATOM_DIM), dtype=complex)
    m[LEVEL[bra_level], LEVEL[ket_level]] = 1.0
    return m


def collective_sx() -> ComplexOperator:
    """sigma_x^(1) + sigma_x^(2) on the qubit pair."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return embed(sx, QUBIT_PAIR_LAYOUT, "q1") + embed(sx, QUBIT_PAIR_LAYOUT, "q2")


def collective_sy() -> ComplexOperator:
    """sigma_y^(1) + sigma_y^(2) on the qubit pair."""
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    return embed(sy, QUBIT_PAIR_LAYOUT, "q1") + embed(sy, QUBIT_PAIR_LAYOUT, "q2")


class PhaseMode(enum.Enum):
    """Drive-phase setting of scheme A.

    SY realizes the collective sigma_y decay (phi1 = +pi/2, phi2 = -pi/2);
    SX realizes the collective sigma_x decay (phi1 = phi2 = 0).
    """

    SY = "SY"
    SX = "SX"


_MODE_PHASES = {PhaseMode.SY: (np.pi / 2, -np.pi / 2),
                PhaseMode.SX: (0.0, 0.0)}


@dataclass(frozen=True)
class BranchingRatios:
    """Fractions of each excited state's decay going to |0> vs |1>."""

    e_to_0: float = 0.5
    e_to_1: float = 0.5
    r_to_0: float = 0.5
    r_to_1: float = 0.5

    def __post_init__(self):
        for a, b, name in ((self.e_to_0, self.e_to_1, "e"),
                           (self.r_to_0, self.r_to_1, "r")):
            if a < 0 or b < 0 or abs(a + b - 1.0) > 1e-12:
                raise ValueError(
                    f"branching fractions for |{name}> must be >= 0 and sum to 1")


@dataclass(frozen=True)
class PhaseMismatch:
    """Deviations of the drive phases from their nominal values, in radians."""

    dphi1: float = 0.0
    dphi2: float = 0.0
    dphi3: float = 0.0
    dphi4: float = 0.0

    def __post_init__(self):
        for name in ("dphi1", "dphi2", "dphi3", "dphi4"):
            v = getattr(self, name)
            if not -np.pi <= v <= np.pi:
                raise ValueError(f"{name} = {v} outside [-pi, pi]")

    @property
    def delta(self) -> float:
        return self.dphi1 - self.dphi2


@dataclass(frozen=True)
class SchemeConfig:
    """Physical parameters of either scheme, in units of g."""

    g: float = 1.0
    omega1: float = 0.5
    omega2: float = 0.5
    omega1p: float = 0.0      # primed drives, scheme B only
    omega2p: float = 0.0
    phi1: float = 0.0         # extra drive phases on top of the mode setting
    phi2: float = 0.0
    delta1: float = 100.0
    delta2: float = 100.0
    kappa: float = 0.1
    gamma: float = 0.0
    hop: float = 0.0          # cavity-cavity photon hopping, scheme B
    n_max: int = 2            # Fock cutoff: levels 0..n_max per cavity
    branch: BranchingRatios = field(default_factory=BranchingRatios)

    def __post_init__(self):
        nonneg = ("g", "omega1", "omega2", "omega1p", "omega2p",
                  "kappa", "gamma")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    def with_overrides(self, **kw) -> "SchemeConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class LindbladModel:
    """A master-equation generator.

    drho/dt = -i[H(t), rho] + sum_j rate_j D[c_j] rho with
    D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c)/2 and
    H(t) = h_static + sum_k (amp_k e^{i w_k t} op_k + h.c.).
    """

    layout: SubsystemLayout
    h_static: ComplexOperator
    channels: tuple                 # ((rate, ComplexOperator), ...)
    h_oscillating: tuple = ()       # ((ComplexOperator, amp, omega), ...)

    def __post_init__(self):
        dim = self.layout.total_dim
        if self.h_static.dim != dim:
            raise ValueError("h_static dimension does not match layout")
        if not self.h_static.is_hermitian(tol=1e-10 * max(1.0, self.h_static.max_abs())):
            raise ValueError("h_static must be Hermitian")
        chans = []
        for rate, op in self.channels:
            if rate < 0:
                raise ValueError(f"channel rate {rate} must be >= 0")
            if op.dim != dim:
                raise ValueError("jump operator dimension does not match layout")
            chans.append((float(rate), op))
        object.__setattr__(self, "channels", tuple(chans))
        oscs = []
        for op, amp, omega in self.h_oscillating:
            if op.dim != dim:
                raise ValueError("oscillating term dimension does not match layout")
            oscs.append((op, complex(amp), float(omega)))
        object.__setattr__(self, "h_oscillating", tuple(oscs))

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    @property
    def is_autonomous(self) -> bool:
        return len(self.h_oscillating) == 0

    def hamiltonian_at(self, t: float) -> np.ndarray:
        h = self.h_static.mat.copy()
        for op, amp, omega in self.h_oscillating:
            term = amp * np.exp(1j * omega * t) * op.mat
            h += term + term.conj().T
        return h


def _atomic_decay_channels(cfg: SchemeConfig, layout: SubsystemLayout,
                           atom_sites: Sequence[str]):
    """Spontaneous-emission channels |e>,|r> -> |0>,|1> for each atom."""
    if cfg.gamma == 0:
        return []
    br = cfg.branch
    paths = (("0", "e", br.e_to_0), ("1", "e", br.e_to_1),
             ("0", "r", br.r_to_0), ("1", "r", br.r_to_1))
    out = []
    for site in atom_sites:
        for lo, hi, frac in paths:
            if frac == 0:
                continue
            out.append((cfg.gamma * frac, embed(_atom_op(lo, hi), layout, site)))
    return out


def build_scheme_a_full(cfg: SchemeConfig,
                        phase_mode: PhaseMode,
                        pm: Optional[PhaseMismatch] = None,
                        time_dependent: bool = False) -> LindbladModel:
    """Two driven four-level atoms coupled to one lossy cavity mode.

    By default the model is expressed in the rotating frame in which the
    drive and cavity couplings are static and the excited levels carry
    constant detunings delta1 (|e>) and delta2 (|r>).  With
    `time_dependent=True` the bare interaction-picture form is returned
    instead, with explicitly oscillating coupling terms; populations in the
    product basis agree between the two forms at all times.
    """
    layout = SubsystemLayout((("atom1", ATOM_DIM), ("atom2", ATOM_DIM),
                              ("cavity", cfg.n_max + 1)))
    a = embed(destroy(cfg.n_max + 1), layout, "cavity")

    phi1_0, phi2_0 = _MODE_PHASES[phase_mode]
    d1 = 0.0 if pm is None else pm.dphi1
    d2 = 0.0 if pm is None else pm.dphi2
    amp1 = cfg.omega1 * np.exp(1j * (phi1_0 + cfg.phi1 + d1))
    amp2 = cfg.omega2 * np.exp(1j * (phi2_0 + cfg.phi2 + d2))

    sites = ("atom1", "atom2")
    e0 = sum((embed(_atom_op("e", "0"), layout, s) for s in sites),
             ComplexOperator.zeros(layout.total_dim))
    r1 = sum((embed(_atom_op("r", "1"), layout, s) for s in sites),
             ComplexOperator.zeros(layout.total_dim))
    e1 = sum((embed(_atom_op("e", "1"), layout, s) for s in sites),
             ComplexOperator.zeros(layout.total_dim))
    r0 = sum((embed(_atom_op("r", "0"), layout, s) for s in sites),
             ComplexOperator.zeros(layout.total_dim))
    proj_e = sum((embed(_atom_op("e", "e"), layout, s) for s in sites),
                 ComplexOperator.zeros(layout.total_dim))
    proj_r = sum((embed(_atom_op("r", "r"), layout, s) for s in sites),
                 ComplexOperator.zeros(layout.total_dim))

    channels = [(cfg.kappa, a)] if cfg.kappa > 0 else []
    channels += _atomic_decay_channels(cfg, layout, sites)

    if time_dependent:
        h0 = ComplexOperator.zeros(layout.total_dim)
        osc = (
            (e0 @ a, cfg.g, cfg.delta1),
            (e1, amp1, cfg.delta1),
            (r1 @ a, cfg.g, cfg.delta2),
            (r0, amp2, cfg.delta2),
        )
        return LindbladModel(layout, h0, tuple(channels), osc)

    coupling = (cfg.g * (e0 @ a) + amp1 * e1 + cfg.g * (r1 @ a) + amp2 * r0)
    h = (cfg.delta1 * proj_e + cfg.delta2 * proj_r
         + coupling + coupling.dag())
    return LindbladModel(layout, h, tuple(channels))


def build_scheme_a_effective(phase_mode: PhaseMode,
                             g_rate: float, kappa: float) -> LindbladModel:
    """Single collective decay channel left after eliminating |e>,|r> and
    the lossy cavity: rate 4 G^2 / kappa on S_y (or S_x)."""
    if g_rate <= 0 or kappa <= 0:
        raise ValueError("g_rate and kappa must be positive")
    rate = 4.0 * g_rate**2 / kappa
    op = collective_sy() if phase_mode is PhaseMode.SY else collective_sx()
    return LindbladModel(QUBIT_PAIR_LAYOUT,
                         ComplexOperator.zeros(4), ((rate, op),))


def build_combined_effective(g_rate: float, kappa: float) -> LindbladModel:
    """Trotter limit of the phase switching: both collective channels at
    half the single-channel rate."""
    if g_rate <= 0 or kappa <= 0:
        raise ValueError("g_rate and kappa must be positive")
    rate = 0.5 * 4.0 * g_rate**2 / kappa
    return LindbladModel(QUBIT_PAIR_LAYOUT, ComplexOperator.zeros(4),
                         ((rate, collective_sx()), (rate, collective_sy())))


def delocalized_modes(a1: ComplexOperator, a2: ComplexOperator):
    """Antisymmetric and symmetric combinations (a1 -+ a2)/sqrt(2)."""
    if a1.dim != a2.dim:
        raise ValueError("mode operators must share a dimension")
    inv_sqrt2 = 1.0 / np.sqrt(2)
    return inv_sqrt2 * (a1 - a2), inv_sqrt2 * (a1 + a2)


def build_scheme_b_full(cfg: SchemeConfig,
                        pm: Optional[PhaseMismatch] = None) -> LindbladModel:
    """Two atoms in hopping-coupled lossy cavities.

    Each |1>-|e> and |0>-|r> transition is driven by two laser tones
    detuned by +delta and -delta, so no rotating frame removes all time
    dependence: the model keeps the resonant atom-cavity couplings and the
    photon hopping static and carries four oscillating drive terms.  The
    hopping is set equal to the detuning by the caller for the two-photon
    resonant configuration.
    """
    nc = cfg.n_max + 1
    layout = SubsystemLayout((("atom1", ATOM_DIM), ("atom2", ATOM_DIM),
                              ("cav1", nc), ("cav2", nc)))
    a1 = embed(destroy(nc), layout, "cav1")
    a2 = embed(destroy(nc), layout, "cav2")

    def atom(site, bra, ket):
        return embed(_atom_op(bra, ket), layout, site)

    # Resonant couplings and hopping are static.
    g_term = cfg.g * ((atom("atom1", "e", "0") + atom("atom1", "r", "1")) @ a1
                      + (atom("atom2", "e", "0") + atom("atom2", "r", "1")) @ a2)
    hop = cfg.hop * (a1.dag() @ a2 + a2.dag() @ a1)
    h_static = g_term + g_term.dag() + hop

    # Drive tones; the unprimed pair carries the alternating signs and the
    # per-atom phase deviations of the mismatch analysis.
    d1 = d2 = d3 = d4 = 0.0
    if pm is not None:
        d1, d2, d3, d4 = pm.dphi1, pm.dphi2, pm.dphi3, pm.dphi4
    osc = (
        (atom("atom1", "e", "1"), 1j * cfg.omega1 * np.exp(1j * d2), cfg.delta1),
        (atom("atom2", "e", "1"), -1j * cfg.omega1 * np.exp(1j * d4), cfg.delta1),
        (atom("atom1", "r", "0"), -1j * cfg.omega2 * np.exp(1j * d1), cfg.delta2),
        (atom("atom2", "r", "0"), 1j * cfg.omega2 * np.exp(1j * d3), cfg.delta2),
        (atom("atom1", "e", "1") + atom("atom2", "e", "1"),
         cfg.omega1p, -cfg.delta1),
        (atom("atom1", "r", "0") + atom("atom2", "r", "0"),
         cfg.omega2p, -cfg.delta2),
    )
    osc = tuple((op, amp, om) for op, amp, om in osc if amp != 0)

    channels = []
    if cfg.kappa > 0:
        channels += [(cfg.kappa, a1), (cfg.kappa, a2)]
    channels += _atomic_decay_channels(cfg, layout, ("atom1", "atom2"))
    return LindbladModel(layout, h_static, tuple(channels), osc)


def build_scheme_b_effective(g_rate: float, kappa: float) -> LindbladModel:
    """Both collective channels at the full rate 4 G^2 / kappa, as obtained
    after eliminating the delocalized cavity modes."""
    if g_rate <= 0 or kappa <= 0:
        raise ValueError("g_rate and kappa must be positive")
    rate = 4.0 * g_rate**2 / kappa
    return LindbladModel(QUBIT_PAIR_LAYOUT, ComplexOperator.zeros(4),
                         ((rate, collective_sx()), (rate, collective_sy())))


def scheme_b_effective_coupling(cfg: SchemeConfig) -> float:
    """Effective Raman coupling G = g * Omega / (sqrt(2) * Delta)."""
    return cfg.g * cfg.omega1 / (np.sqrt(2.0) * cfg.delta1)


def build_mismatch_a(g_rate: float, kappa: float,
                     pm: PhaseMismatch) -> LindbladModel:
    """Scheme-A effective pair with phase errors on the sigma_y channel only."""
    if g_rate <= 0 or kappa <= 0:
        raise ValueError("g_rate and kappa must be positive")
    rate = 0.5 * 4.0 * g_rate**2 / kappa
    lower = np.array([[0, 1], [0, 0]], dtype=complex)   # |0><1|
    raise_ = lower.conj().T
    local = -1j * np.exp(1j * pm.dphi1) * lower + 1j * np.exp(1j * pm.dphi2) * raise_
    deformed = (embed(local, QUBIT_PAIR_LAYOUT, "q1")
                + embed(local, QUBIT_PAIR_LAYOUT, "q2"))
    return LindbladModel(QUBIT_PAIR_LAYOUT, ComplexOperator.zeros(4),
                         ((rate, deformed), (rate, collective_sx())))


def build_chi_model(rate: float) -> LindbladModel:
    """Two collective channels S_x and chi = ([[0,-i],[1,0]] (x) I + I (x) [[0,-i],[1,0]]).

    A drive-phase setting reachable from the mismatch family (dphi1 = 0,
    dphi2 = -pi/2) that still leaves the discordant target state as the
    unique fixed point on the triplet subspace.
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    local = np.array([[0.0, -1.0j], [1.0, 0.0]], dtype=complex)
    chi = (embed(local, QUBIT_PAIR_LAYOUT, "q1")
           + embed(local, QUBIT_PAIR_LAYOUT, "q2"))
    return LindbladModel(QUBIT_PAIR_LAYOUT, ComplexOperator.zeros(4),
                         ((rate, collective_sx()), (rate, chi)))


def build_mismatch_b(g_rate: float, kappa: float,
                     pm: PhaseMismatch) -> LindbladModel:
    """Scheme-B effective pair with four independent phase errors on the
    fields composing the sigma_y channel."""
    if g_rate <= 0 or kappa <= 0:
        raise ValueError("g_rate and kappa must be positive")
    rate = 4.0 * g_rate**2 / kappa
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    raise_ = lower.conj().T
    op1 = 1j * np.exp(1j * pm.dphi1) * raise_ - 1j * np.exp(1j * pm.dphi2) * lower
    op2 = 1j * np.exp(1j * pm.dphi3) * raise_ - 1j * np.exp(1j * pm.dphi4) * lower
    deformed = (embed(op1, QUBIT_PAIR_LAYOUT, "q1")
                + embed(op2, QUBIT_PAIR_LAYOUT, "q2"))
    return LindbladModel(QUBIT_PAIR_LAYOUT, ComplexOperator.zeros(4),
                         ((rate, deformed), (rate, collective_sx())))


def build_subspace_model(rate: float,
                         pm: Optional[PhaseMismatch] = None) -> LindbladModel:
    """Mismatched effective pair projected onto span{|00>, |Psi+>, |11>}.

    Basis |1> = |00>, |2> = (|01>+|10>)/sqrt(2), |3> = |11>.  Both channels
    inherit a 1/sqrt(2) ladder structure from the projection; the deformed
    channel carries the phase deviations dphi1 (lowering) and dphi2
    (raising).
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    pm = pm or PhaseMismatch()
    layout = single_factor_layout("sym", 3)
    s = 1.0 / np.sqrt(2.0)
    down = np.zeros((3, 3), dtype=complex)   # |1><2| + |2><3|
    down[0, 1] = down[1, 2] = 1.0
    up = down.conj().T
    deformed = s * (-1j * np.exp(1j * pm.dphi1) * down
                    + 1j * np.exp(1j * pm.dphi2) * up)
    plain = s * (down + up)
    return LindbladModel(layout, ComplexOperator.zeros(3),
                         ((0.5 * rate, ComplexOperator(deformed)),
                          (0.5 * rate, ComplexOperator(plain))))


def mdms_family(eps: float, x: float) -> DensityMatrix:
    """Rank-<=3 family eps |Phi+><Phi+| + (1-eps)[x |01><01| + (1-x) |10><10|]."""
    if not 0.0 <= eps <= 1.0 or not 0.0 <= x <= 1.0:
        raise ValueError("eps and x must lie in [0, 1]")
    m = (eps * np.outer(PHI_PLUS, PHI_PLUS.conj())
         + (1.0 - eps) * (x * np.outer(KET_01, KET_01.conj())
                          + (1.0 - x) * np.outer(KET_10, KET_10.conj())))
    return DensityMatrix(ComplexOperator(m), QUBIT_PAIR_LAYOUT)


def target_state() -> DensityMatrix:
    """Equal mixture of |Phi+>, |Phi->, |Psi+>: the maximally discordant
    separable two-qubit state (purity 1/3, concurrence 0, discord 1/3)."""
    m = (np.outer(PHI_PLUS, PHI_PLUS.conj())
         + np.outer(PHI_MINUS, PHI_MINUS.conj())
         + np.outer(PSI_PLUS, PSI_PLUS.conj())) / 3.0
    return DensityMatrix(ComplexOperator(m), QUBIT_PAIR_LAYOUT)


def restrict_model(model: LindbladModel, basis: np.ndarray,
                   label: str = "sub",
                   check_invariance: bool = True,
                   tol: float = 1e-12) -> LindbladModel:
    """Compress a model onto the column span of an isometry `basis`.

    Valid only when the span is invariant under the Hamiltonian and every
    jump operator (checked by default).
    """
    v = np.asarray(basis, dtype=complex)
    if v.ndim != 2 or v.shape[0] != model.dim:
        raise ValueError("basis must be dim x k")
    if not model.is_autonomous:
        raise ValueError("cannot restrict a time-dependent model")
    proj_out = np.eye(model.dim) - v @ v.conj().T

    def compress(op: ComplexOperator) -> ComplexOperator:
        if check_invariance:
            leak = float(np.max(np.abs(proj_out @ op.mat @ v)))
            if leak > tol * max(1.0, op.max_abs()):
                raise ValueError(
                    f"subspace is not invariant (leakage {leak:.3e})")
        return ComplexOperator(v.conj().T @ op.mat @ v)

    layout = single_factor_layout(label, v.shape[1])
    return LindbladModel(
        layout, compress(model.h_static),
        tuple((rate, compress(op)) for rate, op in model.channels))
