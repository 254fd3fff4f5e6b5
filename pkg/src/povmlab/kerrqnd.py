"""Nondemolition path monitoring of an interferometer with a cross-Kerr
probe: three-mode evolution, probe phase readout, the induced single-mode
observable, and the joint unsharp path/interference POVM with its marginals
and the visibility/confidence tradeoff.

Mode layout is (a, b, c): the two interferometer arms and the probe. The
cross-Kerr element advances the probe phase by lambda per photon in arm b
and commutes with both photon numbers, so it reads the path without
disturbing the count statistics. Splitter and composition conventions are
shared with :mod:`povmlab.mzi`; all closed forms below are locked to the
full three-mode unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Operator, identity, partial_trace, tensor
from .mzi import FockSpace, MZIParams, beam_splitter, number_observable, phase_shifter
from .povm import (
    DiscreteObservable,
    Effect,
    MeasurementScheme,
    State,
    product_observable,
    vector_state,
)
from .spin import phase_kernel

__all__ = [
    "ProbeConfig",
    "KerrCircuit",
    "kerr_unitary",
    "kerr_phase",
    "coherent_dim",
    "coherent_state",
    "number_probe",
    "truncated_phase_povm",
    "three_mode_unitary",
    "three_mode_output",
    "detection_statistics",
    "induced_a_mode_observable",
    "joint_path_interference_povm",
    "joint_povm_compressed",
    "interference_visibility",
    "path_confidence",
    "tradeoff_scan",
]

COHERENT_LEAKAGE_BOUND = 1e-8


@dataclass(frozen=True, eq=False)
class ProbeConfig:
    """Probe mode configuration: initial state, Kerr coupling strength
    (radians per photon pair) and readout observable on the probe."""

    probe_state: State
    lam: float
    readout: DiscreteObservable

    def __post_init__(self):
        if self.readout.dim != self.probe_state.dim:
            raise ValueError("readout and probe state dimensions differ")


@dataclass(frozen=True, eq=False)
class KerrCircuit:
    """Interferometer parameters plus probe configuration.

    The closed forms require the canonical setting (both splitters
    semitransparent with theta = pi/2); the full-unitary path works for any
    parameters.
    """

    mzi: MZIParams
    probe: ProbeConfig
    arm_space: FockSpace = field(default_factory=lambda: FockSpace(1))

    @property
    def dims(self) -> tuple[int, int, int]:
        d = self.arm_space.dim
        return (d, d, self.probe.probe_state.dim)

    def is_canonical(self, atol: float = 1e-12) -> bool:
        p = self.mzi
        return (
            abs(p.bs1.eps - 0.5) <= atol
            and abs(p.bs2.eps - 0.5) <= atol
            and abs(p.bs1.theta - math.pi / 2) <= atol
            and abs(p.bs2.theta - math.pi / 2) <= atol
        )


def kerr_phase(dim: int, lam: float) -> np.ndarray:
    """Entrywise probe phases exp(-i lam (m - n)); multiplying a probe
    matrix by this implements conjugation by e^{-i lam N} exactly on the
    diagonal (number states pick up no spurious roundoff)."""
    n = np.arange(dim)
    return np.exp(-1j * lam * (n[:, None] - n[None, :]))


def kerr_unitary(lam: float, dims: tuple[int, int, int]) -> Operator:
    """Cross-Kerr unitary: diagonal phase e^{-i lam n_b n_c}, identity on
    the first mode; commutes with every mode's photon number."""
    da, db, dc = dims
    nb = np.arange(db)
    nc = np.arange(dc)
    phases = np.exp(-1j * lam * np.outer(nb, nc)).reshape(-1)
    diag = np.kron(np.ones(da), phases)
    return Operator(np.diag(diag), dims)


def coherent_dim(amp: float) -> int:
    """Truncation level meeting the coherent leakage bound for |z| <= 6."""
    return max(16, math.ceil(abs(amp) ** 2 + 9 * abs(amp) + 6))


def coherent_state(z: complex, dim: int | None = None) -> State:
    """Truncated coherent state; raises when the truncation keeps less than
    1 - 1e-8 of the amplitude mass."""
    if dim is None:
        dim = coherent_dim(abs(z))
    r = abs(z)
    if r == 0.0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return vector_state(amps)
    n = np.arange(dim)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1.0, dim)))))
    moduli = np.exp(-r**2 / 2 + n * math.log(r) - log_fact / 2)
    amps = moduli * np.exp(1j * np.angle(z) * n)
    kept = float(np.sum(moduli**2))
    if 1.0 - kept > COHERENT_LEAKAGE_BOUND:
        raise ValueError(
            f"coherent truncation leakage {1 - kept:.2e} exceeds "
            f"{COHERENT_LEAKAGE_BOUND:.0e}; increase dim (got {dim})"
        )
    return vector_state(amps / math.sqrt(kept))


def number_probe(k: int, dim: int) -> State:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return vector_state(v)


def truncated_phase_povm(dim: int, bins) -> DiscreteObservable:
    """Covariant phase observable on Fock levels 0..dim-1, coarse-grained
    over a partition of [0, 2pi].

    ``bins`` is either a bin count (uniform partition) or an explicit list
    of (u, v) intervals covering [0, 2pi]. Shift covariance under e^{i a N}
    holds only approximately near the truncation edge; the residual is
    reported by the tests, not asserted.
    """
    if isinstance(bins, int):
        edges = np.linspace(0.0, 2 * np.pi, bins + 1)
        intervals = [(edges[i], edges[i + 1]) for i in range(bins)]
    else:
        intervals = [(float(u), float(v)) for u, v in bins]
    levels = np.arange(dim)
    effects = [Effect(Operator(phase_kernel(levels, u, v))) for u, v in intervals]
    return DiscreteObservable(list(range(len(intervals))), effects)


def three_mode_unitary(circuit: KerrCircuit) -> Operator:
    """Full circuit unitary on (a, b, c): splitter, phase shift, Kerr
    element, reversed recombiner."""
    d = circuit.arm_space.dim
    dc = circuit.probe.probe_state.dim
    dims = (d, d, dc)
    ic = identity(dc)
    u1 = tensor(beam_splitter(circuit.mzi.bs1, circuit.arm_space), ic)
    u2 = tensor(beam_splitter(circuit.mzi.bs2, circuit.arm_space), ic)
    v = tensor(phase_shifter(circuit.mzi.delta, circuit.arm_space), ic)
    uk = kerr_unitary(circuit.probe.lam, dims)
    return Operator(
        u2.mat.conj().T @ uk.mat @ v.mat @ u1.mat, dims
    )


def three_mode_output(t: State, circuit: KerrCircuit) -> State:
    """Output state for input t on mode a, vacuum on b, configured probe."""
    d = circuit.arm_space.dim
    if t.dim != d:
        raise ValueError("input state does not match the arm dimension")
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    joint = tensor(t.op, vector_state(vac).op, circuit.probe.probe_state.op)
    m = three_mode_unitary(circuit)
    out = m.mat @ joint.mat @ m.mat.conj().T
    return State(Operator((out + out.conj().T) / 2, circuit.dims))


def detection_statistics(w: State, readout: DiscreteObservable) -> dict:
    """Joint distribution of the a-mode count and the probe readout bin:
    tr[W |n><n| x I x E(bin)]."""
    if w.op.dims is None or len(w.op.dims) != 3:
        raise ValueError("expected a three-mode state with dims metadata")
    da, db, dc = w.op.dims
    out = {}
    for n in range(da):
        block = w.op.mat.reshape(da, db * dc, da, db * dc)[n, :, n, :]
        reduced = Operator(block, (db, dc))
        probe_block = partial_trace(reduced, keep=[1])
        for x, e in readout:
            p = float(np.trace(probe_block.mat @ e.op.mat).real)
            out[(n, x)] = 0.0 if -1e-10 <= p < 0.0 else p
    return out


def _a_mode_effects_unitary(circuit: KerrCircuit) -> dict:
    """Effects of the (n, bin) statistics on the a-mode from the full
    unitary: Tr_bc[(I x |0><0| x T') M+ (P_n x I x E) M]."""
    da, db, dc = circuit.dims
    m = three_mode_unitary(circuit).mat
    vac = np.zeros((db, db), dtype=complex)
    vac[0, 0] = 1.0
    rho_bc = np.kron(vac, circuit.probe.probe_state.op.mat)
    effects = {}
    for n in range(da):
        pn = np.zeros((da, da), dtype=complex)
        pn[n, n] = 1.0
        for x, e in circuit.probe.readout:
            proj = np.kron(pn, np.kron(np.eye(db), e.op.mat))
            heis = m.conj().T @ proj @ m
            m4 = heis.reshape(da, db * dc, da, db * dc)
            f = np.einsum("km,imjk->ij", rho_bc, m4)
            effects[(n, x)] = (f + f.conj().T) / 2
    return effects


def induced_a_mode_observable(circuit: KerrCircuit,
                              method: str = "closed_form") -> DiscreteObservable:
    """Observable of the a-mode input carrying both the count label n and
    the probe readout bin.

    ``method="closed_form"`` evaluates the diagonal operator form (valid in
    the canonical semitransparent setting only): the weight of |N><N| in the
    (n, bin) effect is C(N, n) tr[T' D+ E(bin) D] with
    D = e^{-i N lam N_c / 2} cos^n(Theta) sin^(N-n)(Theta) and
    Theta = (delta I + lam N_c)/2. ``method="unitary"`` computes the same
    effects from the full three-mode unitary and works for any parameters.
    """
    da = circuit.dims[0]
    if method == "unitary":
        eff = _a_mode_effects_unitary(circuit)
        outcomes = sorted(eff)
        return DiscreteObservable(outcomes, [Effect(Operator(eff[x])) for x in outcomes])
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")
    if not circuit.is_canonical():
        raise ValueError(
            "closed form is only asserted in the canonical semitransparent "
            "setting; use method='unitary'"
        )
    lam = circuit.probe.lam
    delta = circuit.mzi.delta
    dc = circuit.probe.probe_state.dim
    tprime = circuit.probe.probe_state.op.mat
    k = np.arange(dc)
    theta = (delta + lam * k) / 2.0
    outcomes = []
    effects = []
    for n in range(da):
        for x, e in circuit.probe.readout:
            mat = np.zeros((da, da), dtype=complex)
            for total in range(n, da):
                d_diag = (
                    np.exp(-1j * total * lam * k / 2)
                    * np.cos(theta) ** n
                    * np.sin(theta) ** (total - n)
                )
                inner = (d_diag.conj()[:, None] * e.op.mat) * d_diag[None, :]
                weight = math.comb(total, n) * np.trace(tprime @ inner).real
                mat[total, total] = weight
            outcomes.append((n, x))
            effects.append(Effect(Operator(mat)))
    return DiscreteObservable(outcomes, effects)


def joint_path_interference_povm(eps2: float, theta2: float,
                                 probe: ProbeConfig) -> DiscreteObservable:
    """Joint unsharp path/interference POVM on the single-photon two-path
    subspace, basis {|10>, |01>}, outcome labels (n, bin) with n the count
    at the monitored detector.

    Closed form per effect (t = sqrt(eps2 (1-eps2))):

        F(n, X) = [ c_n t0        +/- t e^{i theta2} t0m ]
                  [ +/- t e^{-i theta2} tp0    c'_n t1   ]

    with c_1 = eps2, c'_1 = 1-eps2 (swapped for n = 0), the sign +1 for
    n = 1 and -1 for n = 0, and probe traces t0 = tr[T'E(X)],
    t1 = tr[T' e^{i lam N} E(X) e^{-i lam N}], t0m = tr[T' E(X) e^{-i lam N}],
    tp0 = tr[T' e^{i lam N} E(X)]. Marginalizing the bins yields the smeared
    interference observable; marginalizing n yields the smeared path
    observable, diagonal in the path basis.
    """
    if not 0.0 <= eps2 <= 1.0:
        raise ValueError("transparency outside [0, 1]")
    lam = probe.lam
    dc = probe.probe_state.dim
    tp = probe.probe_state.op.mat
    conj_phase = kerr_phase(dc, lam)  # entry (m, n): e^{-i lam (m - n)}
    minus = np.exp(-1j * lam * np.arange(dc))  # e^{-i lam N} diagonal
    cross = math.sqrt(eps2 * (1 - eps2))
    outcomes = []
    effects = []
    for x, e in probe.readout:
        emat = e.op.mat
        t0 = np.trace(tp @ emat).real
        t1 = np.trace(tp @ (conj_phase.conj() * emat)).real
        t0m = np.trace(tp @ (emat * minus[None, :]))
        tp0 = np.trace(tp @ (minus.conj()[:, None] * emat))
        for n, diag in ((1, (eps2, 1 - eps2)), (0, (1 - eps2, eps2))):
            sign = 1.0 if n == 1 else -1.0
            mat = np.array(
                [
                    [diag[0] * t0, sign * cross * np.exp(1j * theta2) * t0m],
                    [sign * cross * np.exp(-1j * theta2) * tp0, diag[1] * t1],
                ]
            )
            outcomes.append((n, x))
            effects.append(Effect(Operator(mat)))
    return DiscreteObservable(outcomes, effects)


def joint_povm_compressed(eps2: float, theta2: float,
                          probe: ProbeConfig) -> DiscreteObservable:
    """The same joint POVM computed from the full three-mode measurement
    part (Kerr element then reversed recombiner), compressed to the
    single-photon subspace. Serves as the oracle for the closed form."""
    dc = probe.probe_state.dim
    dims = (2, 2, dc)
    space = FockSpace(1)
    from .mzi import BSParams

    ic = identity(dc)
    u2 = tensor(beam_splitter(BSParams(eps2, theta2), space), ic)
    uk = kerr_unitary(probe.lam, dims)
    m = u2.mat.conj().T @ uk.mat
    tp = probe.probe_state.op.mat
    # flattened (a, b, c) indices of |10>|k> and |01>|k>
    i10 = (1 * 2 + 0) * dc
    i01 = (0 * 2 + 1) * dc
    idx = [i10, i01]
    outcomes = []
    effects = []
    for n in range(2):
        pn = np.zeros((2, 2), dtype=complex)
        pn[n, n] = 1.0
        for x, e in probe.readout:
            proj = np.kron(pn, np.kron(np.eye(2), e.op.mat))
            heis = m.conj().T @ proj @ m
            g = np.empty((2, 2), dtype=complex)
            for i in range(2):
                for j in range(2):
                    block = heis[idx[i]:idx[i] + dc, idx[j]:idx[j] + dc]
                    g[i, j] = np.trace(tp @ block)
            g = (g + g.conj().T) / 2
            outcomes.append((n, x))
            effects.append(Effect(Operator(g)))
    return DiscreteObservable(outcomes, effects)


def interference_visibility(povm: DiscreteObservable) -> float:
    """Peak-to-trough modulation of the monitored-detector probability over
    the preparation phase: twice the off-diagonal magnitude of the n = 1
    marginal effect."""
    m1 = marginal_over_bins(povm).effect_for(1).op.mat
    return 2.0 * float(abs(m1[0, 1]))


def marginal_over_bins(povm: DiscreteObservable) -> DiscreteObservable:
    from .povm import marginal

    return marginal(povm, keep=0)


def marginal_over_counts(povm: DiscreteObservable) -> DiscreteObservable:
    from .povm import marginal

    return marginal(povm, keep=1)


def path_confidence(povm: DiscreteObservable) -> float:
    """Equal-prior maximum-a-posteriori success probability of identifying
    the traversed arm from the probe readout, 1/2 + 1/4 sum_bins |p_a - p_b|
    over the two conditional bin distributions of the path marginal.

    The total-variation form keeps the no-information cases exact: equal
    conditional distributions give exactly 0.5."""
    path = marginal_over_counts(povm)
    tv = 0.0
    for _, e in path:
        m = e.op.mat
        tv += abs(m[0, 0].real - m[1, 1].real)
    return 0.5 + 0.25 * tv


def tradeoff_scan(amplitudes, lam: float, eps2_values, theta2: float = math.pi / 2,
                  bins: int = 8, probe_kind: str = "coherent") -> list[dict]:
    """Visibility/confidence table over coherent amplitudes and recombiner
    transparencies. ``probe_kind="number"`` replaces each coherent probe by
    the number state nearest its mean photon number."""
    rows = []
    for amp in amplitudes:
        dim = coherent_dim(amp)
        if probe_kind == "coherent":
            probe_state = coherent_state(amp, dim)
        elif probe_kind == "number":
            probe_state = number_probe(round(abs(amp) ** 2), dim)
        else:
            raise ValueError(f"unknown probe kind {probe_kind!r}")
        readout = truncated_phase_povm(dim, bins)
        probe = ProbeConfig(probe_state, lam, readout)
        for eps2 in eps2_values:
            povm = joint_path_interference_povm(eps2, theta2, probe)
            rows.append(
                {
                    "amp": float(amp),
                    "lam": float(lam),
                    "eps2": float(eps2),
                    "visibility": interference_visibility(povm),
                    "path_confidence": path_confidence(povm),
                }
            )
    return rows


def kerr_measurement_scheme(circuit: KerrCircuit) -> MeasurementScheme:
    """The Kerr circuit as a coupling scheme: the apparatus is (b, c) plus a
    count register fed by the a-mode number, and the pointer reads (register,
    readout bin). Its induced observable reproduces the (n, bin) effects."""
    da, db, dc = circuit.dims
    m = three_mode_unitary(circuit)
    dr = da
    u = tensor(m, identity(dr))
    d_all = da * db * dc * dr
    copy = np.zeros((d_all, d_all), dtype=complex)
    for n in range(da):
        for rest in range(db * dc):
            for k in range(dr):
                src = (n * db * dc + rest) * dr + k
                dst = (n * db * dc + rest) * dr + (k + n) % dr
                copy[dst, src] = 1.0
    coupling = Operator(copy @ u.mat, (da, db, dc, dr))
    vac = np.zeros(db, dtype=complex)
    vac[0] = 1.0
    reg0 = np.zeros(dr, dtype=complex)
    reg0[0] = 1.0
    probe_state = State(
        tensor(vector_state(vac).op, circuit.probe.probe_state.op, vector_state(reg0).op)
    )
    trivial_b = DiscreteObservable([0], [Effect(identity(db))])
    pointer = product_observable(
        product_observable(trivial_b, circuit.probe.readout), number_observable(dr)
    )
    pointer_function = {
        (0, x, k): (k, x) for x in circuit.probe.readout.outcomes for k in range(dr)
    }
    return MeasurementScheme(coupling, probe_state, pointer, pointer_function)
