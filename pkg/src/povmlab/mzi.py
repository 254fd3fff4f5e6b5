"""Two-mode interferometry on truncated Fock space: beam splitters, phase
shifters, Mach-Zehnder detection statistics, the induced single-mode
observables, single-photon path/interference observables, and the expanded
four-detector interferometer.

Conventions
-----------
A beam splitter with transparency eps and phase theta is the unitary
exp(conj(alpha) a x b+ - alpha a+ x b) with alpha = arccos(sqrt(eps))
e^{i theta}; on the single-photon sector it maps |10> to
sqrt(eps)|10> + e^{-i theta} sqrt(1-eps)|01>, which pins the reflected-
amplitude phase. In the composed interferometer the recombining splitter is
traversed in the reverse orientation (its adjoint); with that orientation
the single-photon detection probability obeys the interference law

    eps = e1 e2 + (1-e1)(1-e2) + 2 sqrt(e1(1-e1)e2(1-e2)) cos(t2 - t1 - delta),

which the full-unitary simulation reproduces to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Operator, Vector, expm, identity, tensor
from .povm import (
    DiscreteObservable,
    Effect,
    MeasurementScheme,
    State,
    product_observable,
    vector_state,
)

__all__ = [
    "FockSpace",
    "BSParams",
    "MZIParams",
    "annihilation",
    "number",
    "number_observable",
    "beam_splitter",
    "phase_shifter",
    "mzi_unitary",
    "mzi_output_state",
    "detection_probabilities",
    "effective_transparency",
    "induced_mzi_observable",
    "mzi_measurement_scheme",
    "prepared_single_photon",
    "single_photon_observable",
    "fit_single_splitter",
    "expanded_mzi_observable",
    "default_expanded_circuit",
    "hermitian_span_rank",
]


@dataclass(frozen=True)
class FockSpace:
    """Per-mode truncated Fock space; total-photon sectors with N <= nmax
    evolve without truncation error under number-conserving couplings."""

    nmax: int
    modes: int = 2

    def __post_init__(self):
        if self.nmax < 1 or self.modes < 1:
            raise ValueError("need nmax >= 1 and modes >= 1")

    @property
    def dim(self) -> int:
        return self.nmax + 1


@dataclass(frozen=True)
class BSParams:
    """Beam-splitter transparency eps in [0, 1] and phase theta."""

    eps: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"transparency {self.eps} outside [0, 1]")
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def alpha(self) -> complex:
        """Generator parameter |alpha| e^{i theta}, |alpha| = arccos(sqrt(eps))."""
        return math.acos(math.sqrt(self.eps)) * np.exp(1j * self.theta)


@dataclass(frozen=True)
class MZIParams:
    bs1: BSParams
    bs2: BSParams
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "delta", float(self.delta) % (2 * math.pi))


def annihilation(dim: int) -> Operator:
    """Truncated ladder matrix a|n> = sqrt(n)|n-1>."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    mat = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        mat[n - 1, n] = math.sqrt(n)
    return Operator(mat)


def number(dim: int) -> Operator:
    return Operator(np.diag(np.arange(dim, dtype=complex)))


def number_observable(dim: int) -> DiscreteObservable:
    """Spectral measure of the number operator."""
    effects = []
    for n in range(dim):
        mat = np.zeros((dim, dim), dtype=complex)
        mat[n, n] = 1.0
        effects.append(Effect(Operator(mat)))
    return DiscreteObservable(list(range(dim)), effects)


def beam_splitter(params: BSParams, space: FockSpace) -> Operator:
    """Two-mode beam-splitter unitary; block diagonal over total photon
    number."""
    a = annihilation(space.dim)
    adag = a.dag()
    alpha = params.alpha
    gen = np.conj(alpha) * tensor(a, adag).mat - alpha * tensor(adag, a).mat
    return expm(Operator(gen, (space.dim, space.dim)))


def phase_shifter(delta: float, space: FockSpace) -> Operator:
    """e^{i delta N} on the first mode, identity on the second."""
    phases = np.exp(1j * delta * np.arange(space.dim))
    return Operator(
        np.kron(np.diag(phases), np.eye(space.dim)), (space.dim, space.dim)
    )


def mzi_unitary(params: MZIParams, space: FockSpace) -> Operator:
    """Composed interferometer unitary: splitter, phase shift, reversed
    recombiner (see the module conventions)."""
    u1 = beam_splitter(params.bs1, space)
    u2 = beam_splitter(params.bs2, space)
    v = phase_shifter(params.delta, space)
    return u2.dag() @ v @ u1


def mzi_output_state(t: State, t_idle: State, params: MZIParams,
                     space: FockSpace) -> State:
    """Two-mode state emerging from the interferometer for input t x t_idle."""
    if t.dim != space.dim or t_idle.dim != space.dim:
        raise ValueError("input states do not match the mode dimension")
    u = mzi_unitary(params, space)
    joint = tensor(t.op, t_idle.op)
    out = u.mat @ joint.mat @ u.mat.conj().T
    return State(Operator((out + out.conj().T) / 2, (space.dim, space.dim)))


def detection_probabilities(w: State) -> dict:
    """Photon-count distribution <n1, n2| W |n1, n2> over both detectors."""
    if w.op.dims is None or len(w.op.dims) != 2:
        raise ValueError("expected a two-mode state with dims metadata")
    d1, d2 = w.op.dims
    diag = np.real(np.diag(w.op.mat)).reshape(d1, d2)
    out = {}
    for n1 in range(d1):
        for n2 in range(d2):
            p = float(diag[n1, n2])
            out[(n1, n2)] = 0.0 if -1e-10 <= p < 0.0 else p
    return out


def effective_transparency(params: MZIParams) -> float:
    """Single-splitter transparency equivalent to the whole interferometer."""
    e1, t1 = params.bs1.eps, params.bs1.theta
    e2, t2 = params.bs2.eps, params.bs2.theta
    eps = (
        e1 * e2
        + (1 - e1) * (1 - e2)
        + 2 * math.sqrt(e1 * (1 - e1) * e2 * (1 - e2))
        * math.cos(t2 - t1 - params.delta)
    )
    return min(1.0, max(0.0, eps))


def induced_mzi_observable(params: MZIParams, space: FockSpace) -> DiscreteObservable:
    """Closed-form observable of the single input mode with the idle mode in
    vacuum: the effect of a count pair (n1, n2) is the binomial weight
    C(n1+n2, n1) eps^n1 (1-eps)^n2 on the number state |n1+n2>."""
    eps = effective_transparency(params)
    dim = space.dim
    outcomes = []
    effects = []
    for n1 in range(dim):
        for n2 in range(dim):
            mat = np.zeros((dim, dim), dtype=complex)
            total = n1 + n2
            if total < dim:
                mat[total, total] = math.comb(total, n1) * eps**n1 * (1 - eps) ** n2
            outcomes.append((n1, n2))
            effects.append(Effect(Operator(mat)))
    return DiscreteObservable(outcomes, effects)


def _count_register_add(dim_sys: int, dim_other: int, dim_reg: int) -> Operator:
    """Controlled cyclic add of the first mode's photon number into a
    register appended as the last factor."""
    d = dim_sys * dim_other * dim_reg
    mat = np.zeros((d, d), dtype=complex)
    for n in range(dim_sys):
        for m in range(dim_other):
            for k in range(dim_reg):
                src = (n * dim_other + m) * dim_reg + k
                dst = (n * dim_other + m) * dim_reg + (k + n) % dim_reg
                mat[dst, src] = 1.0
    return Operator(mat, (dim_sys, dim_other, dim_reg))


def mzi_measurement_scheme(params: MZIParams, space: FockSpace) -> MeasurementScheme:
    """The interferometer as a coupling scheme whose induced observable is
    the two-index count observable.

    The apparatus is the idle mode plus a count register; the coupling runs
    the interferometer and then copies the first mode's photon number into
    the register, so a probe-side pointer (idle-mode number x register
    position) reads both counts.
    """
    d = space.dim
    u = tensor(mzi_unitary(params, space), identity(d))
    copy = _count_register_add(d, d, d)
    coupling = Operator(copy.mat @ u.mat, (d, d, d))
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    probe = State(tensor(vector_state(vac).op, vector_state(vac).op))
    pointer = product_observable(number_observable(d), number_observable(d))
    pointer_function = {(n2, k): (k, n2) for n2 in range(d) for k in range(d)}
    return MeasurementScheme(coupling, probe, pointer, pointer_function)


def prepared_single_photon(eps1: float, theta1: float, delta: float) -> Vector:
    """The prepared single-photon two-path state in the {|10>, |01>} basis."""
    return Vector(
        [
            math.sqrt(eps1),
            np.exp(-1j * (theta1 + delta)) * math.sqrt(1 - eps1),
        ]
    )


def single_photon_observable(eps2: float, theta2: float = 0.0) -> DiscreteObservable:
    """Sharp observable on the single-photon two-path subspace, basis
    {|10>, |01>}: the (1,0) effect projects onto
    sqrt(eps2)|10> + e^{-i theta2} sqrt(1-eps2)|01>, the (0,1) effect is its
    orthocomplement; all other count pairs carry the zero effect."""
    if not 0.0 <= eps2 <= 1.0:
        raise ValueError("transparency outside [0, 1]")
    w = np.array([math.sqrt(eps2), np.exp(-1j * theta2) * math.sqrt(1 - eps2)])
    f10 = np.outer(w, w.conj())
    return DiscreteObservable(
        [(1, 0), (0, 1)], [Effect(Operator(f10)), Effect(Operator(np.eye(2) - f10))]
    )


def fit_single_splitter(params: MZIParams, space: FockSpace) -> tuple[BSParams, Operator]:
    """Recover the single beam splitter equivalent to the interferometer.

    The composed unitary equals a diagonal number phase times one beam
    splitter; the splitter parameters are read off the single-photon block
    and the returned Operator is that splitter's full unitary.
    """
    m = mzi_unitary(params, space).mat
    idx10 = 1 * space.dim + 0
    idx01 = 0 * space.dim + 1
    m00 = m[idx10, idx10]
    m10 = m[idx01, idx10]
    m11 = m[idx01, idx01]
    eps = min(1.0, max(0.0, abs(m00) ** 2))
    theta = float(np.angle(m11) - np.angle(m10)) if abs(m10) > 1e-14 else 0.0
    fitted = BSParams(eps, theta)
    return fitted, beam_splitter(fitted, space)


# --- expanded four-detector interferometer ---------------------------------

# Circuit elements: ("bs", BSParams, (i, j)) for a splitter in the standard
# orientation, ("bsr", BSParams, (i, j)) for the reverse traversal, and
# ("ps", angle, i) for a phase shifter. The observable lives on the
# single-photon sector, so elements compose as n_modes x n_modes matrices.


def _single_photon_block(params: BSParams) -> np.ndarray:
    eps, theta = params.eps, params.theta
    t = math.sqrt(eps)
    r = math.sqrt(1 - eps)
    return np.array(
        [[t, -r * np.exp(1j * theta)], [r * np.exp(-1j * theta), t]], dtype=complex
    )


def _embed(block: np.ndarray, pair: tuple[int, int], n_modes: int) -> np.ndarray:
    i, j = pair
    u = np.eye(n_modes, dtype=complex)
    u[i, i], u[i, j] = block[0, 0], block[0, 1]
    u[j, i], u[j, j] = block[1, 0], block[1, 1]
    return u


def default_expanded_circuit(eps2=0.5, theta2=0.0, eps3=0.7, eps4=0.4,
                             gamma=math.pi / 2, tap_recombiner_eps=0.5):
    """Default wiring of the four-detector interferometer on 4 modes.

    Modes 0 and 1 are the interferometer arms (the prepared single-photon
    subspace); modes 2 and 3 are vacuum tap ports. BS(eps4) splits arm 0
    into mode 2 and BS(eps3) splits arm 1 into mode 3; BS(eps2) recombines
    the arms (reverse traversal, as in the plain interferometer) feeding
    detectors 0 and 1, while the tapped beams pick up the relative phase
    gamma and recombine at a second splitter feeding detectors 2 and 3.

    Two recombiners are what makes four detectors informative about two
    different interference quadratures; with ``tap_recombiner_eps=1.0`` the
    tapped beams instead run straight to their detectors and the statistics
    reduce to populations plus a single quadrature.
    """
    return [
        ("bs", BSParams(eps4, 0.0), (0, 2)),
        ("bs", BSParams(eps3, 0.0), (1, 3)),
        ("ps", gamma, 3),
        ("bsr", BSParams(eps2, theta2), (0, 1)),
        ("bsr", BSParams(tap_recombiner_eps, 0.0), (2, 3)),
    ]


def expanded_mzi_observable(circuit=None, n_modes: int = 4,
                            detectors=(0, 1, 2, 3)) -> DiscreteObservable:
    """Four-outcome observable of the expanded interferometer, compressed to
    the prepared single-photon subspace span{mode 0, mode 1}.

    ``circuit`` is a list of elements as produced by
    :func:`default_expanded_circuit`; detector k's effect is the compression
    of the composed unitary's mode-k detection projection.
    """
    if circuit is None:
        circuit = default_expanded_circuit()
    u = np.eye(n_modes, dtype=complex)
    for element in circuit:
        kind = element[0]
        if kind == "bs":
            u = _embed(_single_photon_block(element[1]), element[2], n_modes) @ u
        elif kind == "bsr":
            u = _embed(_single_photon_block(element[1]).conj().T, element[2], n_modes) @ u
        elif kind == "ps":
            d = np.ones(n_modes, dtype=complex)
            d[element[2]] = np.exp(1j * element[1])
            u = np.diag(d) @ u
        else:
            raise ValueError(f"unknown circuit element kind {kind!r}")
    outcomes = []
    effects = []
    for det in detectors:
        row = u[det, :2]
        outcomes.append(det)
        effects.append(Effect(Operator(np.outer(row.conj(), row))))
    return DiscreteObservable(outcomes, effects)


def hermitian_span_rank(effects, tol: float = 1e-10) -> tuple[int, float]:
    """Rank and smallest singular value of a family of 2x2 effects viewed as
    real vectors in the 4-dimensional space of Hermitian matrices."""
    rows = []
    for e in effects:
        m = e.op.mat if isinstance(e, Effect) else np.asarray(e)
        rows.append(
            [
                m[0, 0].real,
                m[1, 1].real,
                math.sqrt(2) * m[0, 1].real,
                math.sqrt(2) * m[0, 1].imag,
            ]
        )
    svals = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(svals > tol)), float(svals.min())
