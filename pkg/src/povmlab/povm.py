"""Effects, states, discrete observables, state transformers and the
coexistence / complementarity decision procedures.

An observable is a finite outcome-labeled family of effects summing to the
identity. Complementarity is decided on projection-valued observables by
intersecting ranges of effects over all outcome-set pairs; probabilistic
complementarity replaces ranges by eigenvalue-1 eigenspaces and so applies
to unsharp observables as well. Joint measurability of two-valued qubit
observables is decided exactly through the Bloch-ball criterion where it
applies and by a constrained search otherwise.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    ATOL_COMPLETENESS,
    ATOL_HERMITIAN,
    ATOL_POSITIVE,
    ATOL_UNITARY,
    Operator,
    Vector,
    eigh,
    haar_vector,
    identity,
    partial_trace,
    psd_sqrt,
    tensor,
    zero,
)

__all__ = [
    "Effect",
    "State",
    "DiscreteObservable",
    "StateTransformer",
    "MeasurementScheme",
    "effect",
    "state",
    "vector_state",
    "maximally_mixed",
    "probability",
    "product_observable",
    "trivial_observable",
    "induced_observable",
    "marginal",
    "apply_transformer",
    "scheme_transformer",
    "luders_transformer",
    "is_repeatable",
    "is_first_kind",
    "state_sample",
    "eigenspace_one",
    "meet_projections",
    "are_complementary",
    "are_prob_complementary",
    "joint_observable_feasible",
    "effect_bloch",
]


@dataclass(frozen=True, eq=False)
class Effect:
    """A POVM element: Hermitian with spectrum inside [0, 1] (within the
    library tolerances)."""

    op: Operator

    def __post_init__(self):
        if not self.op.is_hermitian():
            raise ValueError("effect must be Hermitian within 1e-10")
        w = np.linalg.eigvalsh(self.op.mat)
        if w.min() < -ATOL_POSITIVE or w.max() > 1.0 + ATOL_POSITIVE:
            raise ValueError(
                f"effect spectrum [{w.min():.3e}, {w.max():.6f}] outside [0, 1]"
            )

    @property
    def dim(self) -> int:
        return self.op.dim

    def complement(self) -> "Effect":
        return Effect(identity(self.dim, self.op.dims) - self.op)


@dataclass(frozen=True, eq=False)
class State:
    """A density operator: Hermitian, positive, trace one."""

    op: Operator

    def __post_init__(self):
        if not self.op.is_hermitian():
            raise ValueError("state must be Hermitian within 1e-10")
        w = np.linalg.eigvalsh(self.op.mat)
        if w.min() < -ATOL_POSITIVE:
            raise ValueError(f"state not positive (min eig {w.min():.3e})")
        tr = self.op.trace().real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"state trace {tr} != 1")

    @property
    def dim(self) -> int:
        return self.op.dim


def effect(mat, dims=None) -> Effect:
    return Effect(Operator(mat, dims))


def state(mat, dims=None) -> State:
    return State(Operator(mat, dims))


def vector_state(vec, dims=None) -> State:
    """Rank-one state from a (not necessarily normalized) vector."""
    v = vec if isinstance(vec, Vector) else Vector(vec, dims)
    return State(v.projector())


def maximally_mixed(dim: int) -> State:
    return State(Operator(np.eye(dim, dtype=complex) / dim))


class DiscreteObservable:
    """A finite outcome-labeled family of effects summing to the identity.

    Outcome labels may be integers, strings or tuples (tuples mark product
    outcome spaces and enable :func:`marginal`).
    """

    def __init__(self, outcomes, effects, atol: float = ATOL_COMPLETENESS):
        outcomes = tuple(outcomes)
        effects = tuple(
            e if isinstance(e, Effect) else Effect(e if isinstance(e, Operator) else Operator(e))
            for e in effects
        )
        if len(outcomes) != len(effects):
            raise ValueError("outcomes and effects must have equal length")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcome labels must be unique")
        dim = effects[0].dim
        total = sum((e.op.mat for e in effects), start=np.zeros((dim, dim), complex))
        if np.max(np.abs(total - np.eye(dim))) > atol:
            raise ValueError("effects do not sum to the identity within tolerance")
        self.outcomes = outcomes
        self.effects = effects
        self._by_label = dict(zip(outcomes, effects))

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def __len__(self) -> int:
        return len(self.outcomes)

    def __iter__(self):
        return iter(zip(self.outcomes, self.effects))

    def effect_for(self, outcome) -> Effect:
        return self._by_label[outcome]

    def union_effect(self, outcomes) -> Operator:
        """Effect of a set of outcomes (additivity of the measure)."""
        total = zero(self.dim)
        for x in outcomes:
            total = total + self._by_label[x].op
        return total

    def probabilities(self, st: State) -> dict:
        return {x: probability(st, e) for x, e in self}

    def is_projection_valued(self, atol: float = 1e-8) -> bool:
        return all(e.op.is_projection(atol) for e in self.effects)


@dataclass(frozen=True, eq=False)
class StateTransformer:
    """Outcome-indexed family of completely positive maps, each given by a
    list of operation (Kraus) elements. The total map is trace nonincreasing;
    observable-complete transformers have sum M†M equal to the identity."""

    outcomes: tuple
    kraus_sets: tuple  # tuple of tuples of Operator, parallel to outcomes

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(
            self, "kraus_sets", tuple(tuple(ms) for ms in self.kraus_sets)
        )
        if len(self.outcomes) != len(self.kraus_sets):
            raise ValueError("outcomes and kraus_sets must have equal length")
        dim = self.dim
        total = np.zeros((dim, dim), complex)
        for ms in self.kraus_sets:
            for m in ms:
                total += m.mat.conj().T @ m.mat
        w = np.linalg.eigvalsh((total + total.conj().T) / 2)
        if w.max() > 1.0 + ATOL_COMPLETENESS:
            raise ValueError("transformer is not trace nonincreasing")

    @property
    def dim(self) -> int:
        for ms in self.kraus_sets:
            for m in ms:
                return m.dim
        raise ValueError("transformer has no operation elements")

    def outcome_effect(self, outcome) -> Operator:
        """The effect sum M†M implemented by one outcome."""
        i = self.outcomes.index(outcome)
        total = zero(self.dim)
        for m in self.kraus_sets[i]:
            total = total + m.dag() @ m
        return total


@dataclass(frozen=True, eq=False)
class MeasurementScheme:
    """A measurement coupling: unitary on system (x) probe, an initial probe
    state, a pointer observable on the probe, and a pointer function mapping
    pointer outcomes to observable outcomes.

    The coupling must carry dims metadata whose first factor is the system;
    the remaining factors form the probe.
    """

    coupling: Operator
    probe_state: State
    pointer: DiscreteObservable
    pointer_function: dict | None = None  # None means identity

    def __post_init__(self):
        if self.coupling.dims is None or len(self.coupling.dims) < 2:
            raise ValueError("coupling needs dims metadata (system, probe...)")
        if not self.coupling.is_unitary(ATOL_UNITARY):
            raise ValueError("coupling is not unitary within 1e-10")
        dp = math.prod(self.coupling.dims[1:])
        if self.probe_state.dim != dp or self.pointer.dim != dp:
            raise ValueError("probe state / pointer dims inconsistent with coupling")

    @property
    def system_dim(self) -> int:
        return self.coupling.dims[0]

    @property
    def probe_dim(self) -> int:
        return math.prod(self.coupling.dims[1:])

    def map_outcome(self, pointer_outcome):
        if self.pointer_function is None:
            return pointer_outcome
        return self.pointer_function[pointer_outcome]


def probability(st: State, e: Effect) -> float:
    """Outcome probability tr[T E], clamped to [0, 1] when within tolerance
    of the boundary."""
    if st.dim != e.dim:
        raise ValueError(f"dimension mismatch: state {st.dim}, effect {e.dim}")
    p = float(np.trace(st.op.mat @ e.op.mat).real)
    if -ATOL_POSITIVE <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + ATOL_POSITIVE:
        return 1.0
    return p


def product_observable(a: DiscreteObservable, b: DiscreteObservable) -> DiscreteObservable:
    """Observable on the tensor product with tuple outcome labels.

    Components that already carry tuple labels are flattened, so products of
    products keep a flat label arity.
    """
    outcomes = []
    effects = []
    for xa, ea in a:
        for xb, eb in b:
            la = xa if isinstance(xa, tuple) else (xa,)
            lb = xb if isinstance(xb, tuple) else (xb,)
            outcomes.append(la + lb)
            effects.append(Effect(tensor(ea.op, eb.op)))
    return DiscreteObservable(outcomes, effects)


def trivial_observable(dim: int, weights: dict) -> DiscreteObservable:
    """Observable with effects proportional to the identity."""
    return DiscreteObservable(
        list(weights), [Effect(identity(dim) * w) for w in weights.values()]
    )


def _probe_weighted_trace(m4: np.ndarray, probe: np.ndarray) -> np.ndarray:
    # tr[(T x rho) M] = tr_sys[T K] with K_ij = sum_km rho_km M[i,m,j,k]
    return np.einsum("km,imjk->ij", probe, m4)


def induced_observable(scheme: MeasurementScheme) -> DiscreteObservable:
    """The observable actually measured by a coupling scheme.

    The effect of an outcome set X satisfies
    tr[T F(X)] = tr[U (T x T') U† (I x Z(f^-1(X)))] for every system state T;
    effects are grouped over pointer-function preimages.
    """
    ds, dp = scheme.system_dim, scheme.probe_dim
    u = scheme.coupling.mat
    rho = scheme.probe_state.op.mat
    grouped: dict = {}
    for zx, ze in scheme.pointer:
        heis = u.conj().T @ np.kron(np.eye(ds), ze.op.mat) @ u
        m4 = heis.reshape(ds, dp, ds, dp)
        f = _probe_weighted_trace(m4, rho)
        label = scheme.map_outcome(zx)
        grouped[label] = grouped.get(label, 0) + f
    outcomes = sorted(grouped)
    effects = []
    for x in outcomes:
        mat = grouped[x]
        effects.append(Effect(Operator((mat + mat.conj().T) / 2)))
    return DiscreteObservable(outcomes, effects)


def marginal(obs: DiscreteObservable, keep: int) -> DiscreteObservable:
    """Marginal observable over one component of tuple-labeled outcomes.

    ``keep`` is the 0-based index of the label component to retain; effects
    are summed over the discarded components.
    """
    if not all(isinstance(x, tuple) for x in obs.outcomes):
        raise ValueError("marginal requires tuple outcome labels")
    grouped: dict = {}
    for x, e in obs:
        grouped[x[keep]] = grouped.get(x[keep], 0) + e.op.mat
    outcomes = sorted(grouped)
    return DiscreteObservable(outcomes, [Effect(Operator(grouped[x])) for x in outcomes])


def apply_transformer(tf: StateTransformer, outcomes, st: State) -> Operator:
    """Non-normalized post-measurement state for an outcome set.

    The trace of the result is the probability of the outcome set under the
    transformer's compatible observable.
    """
    # a tuple that is itself an outcome label counts as a single outcome
    if outcomes in tf.outcomes:
        outcomes = (outcomes,)
    elif not isinstance(outcomes, (list, tuple, set, frozenset)):
        outcomes = (outcomes,)
    for x in outcomes:
        if x not in tf.outcomes:
            raise KeyError(f"unknown outcome label {x!r}")
    total = np.zeros((tf.dim, tf.dim), complex)
    for x in outcomes:
        for m in tf.kraus_sets[tf.outcomes.index(x)]:
            total += m.mat @ st.op.mat @ m.mat.conj().T
    return Operator(total)


def scheme_transformer(scheme: MeasurementScheme) -> StateTransformer:
    """The state transformer implemented by a measurement scheme.

    Operation elements are M = sqrt(q_l) (I x <zeta|) U (I x |chi_l>) over
    the probe-state spectral decomposition chi_l and rank-one pointer
    components zeta, grouped by the pointer function.
    """
    ds, dp = scheme.system_dim, scheme.probe_dim
    u4 = scheme.coupling.mat.reshape(ds, dp, ds, dp)
    qs, chis = np.linalg.eigh(scheme.probe_state.op.mat)
    grouped: dict = {}
    for zx, ze in scheme.pointer:
        wz, vz = np.linalg.eigh(ze.op.mat)
        label = scheme.map_outcome(zx)
        ms = grouped.setdefault(label, [])
        for zval, zeta in zip(wz, vz.T):
            if zval < 1e-12:
                continue
            for q, chi in zip(qs, chis.T):
                if q < 1e-14:
                    continue
                # <zeta| U |chi> as a system operator, scaled by the weights
                m = np.sqrt(q * zval) * np.einsum(
                    "b,ibjc,c->ij", zeta.conj(), u4, chi
                )
                ms.append(Operator(m))
    outcomes = sorted(grouped)
    return StateTransformer(outcomes, [grouped[x] for x in outcomes])


def luders_transformer(obs: DiscreteObservable) -> StateTransformer:
    """Square-root (generalized projective) transformer of an observable."""
    return StateTransformer(
        obs.outcomes, [(psd_sqrt(e.op),) for e in obs.effects]
    )


def state_sample(dim: int, n_random: int = 32, seed: int = 20240917) -> list[State]:
    """Deterministic state sample: computational basis plus seeded
    Haar-random pure states."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(dim):
        v = np.zeros(dim, complex)
        v[i] = 1.0
        out.append(vector_state(v))
    for _ in range(n_random):
        out.append(State(haar_vector(dim, rng).projector()))
    return out


def is_repeatable(tf: StateTransformer, states=None, atol: float = 1e-8) -> bool:
    """Whether repeated application reproduces the outcome statistics,
    checked per outcome over a state sample."""
    if states is None:
        states = state_sample(tf.dim)
    for st in states:
        for x in tf.outcomes:
            once = apply_transformer(tf, x, st)
            p1 = once.trace().real
            if p1 < 1e-14:
                continue  # zero map on this state: trivially repeatable
            renorm = State(Operator((once.mat + once.mat.conj().T) / 2 / p1))
            p2 = apply_transformer(tf, x, renorm).trace().real
            if abs(p2 - 1.0) > atol:
                return False
    return True


def is_first_kind(tf: StateTransformer, obs: DiscreteObservable, states=None,
                  atol: float = 1e-9) -> bool:
    """Whether the measurement leaves its own outcome statistics unchanged:
    tr[T E(X)] = tr[I(Omega)(T) E(X)] on a state sample."""
    if states is None:
        states = state_sample(tf.dim)
    for st in states:
        after = apply_transformer(tf, tf.outcomes, st)
        for _, e in obs:
            before = probability(st, e)
            post = float(np.trace(after.mat @ e.op.mat).real)
            if abs(before - post) > atol:
                return False
    return True


def eigenspace_one(e: Effect, atol: float = 1e-8) -> Operator:
    """Orthogonal projection onto the eigenvalue-1 eigenspace (zero operator
    when there is none). The 1e-8 threshold separates genuine unit
    eigenvalues from unsharp maxima."""
    w, v = eigh(e.op)
    cols = v[:, np.abs(w - 1.0) <= atol]
    if cols.shape[1] == 0:
        return zero(e.dim)
    return Operator(cols @ cols.conj().T)


def meet_projections(p: Operator, q: Operator, atol: float = 1e-8) -> Operator:
    """Projection onto range(P) ∩ range(Q), via the null space of
    (I-P) + (I-Q)."""
    for name, r in (("first", p), ("second", q)):
        if not r.is_projection(atol):
            raise ValueError(f"meet_projections: {name} operand is not a projection")
    dim = p.dim
    gap = (np.eye(dim) - p.mat) + (np.eye(dim) - q.mat)
    w, v = np.linalg.eigh((gap + gap.conj().T) / 2)
    cols = v[:, w < atol]
    if cols.shape[1] == 0:
        return zero(dim)
    return Operator(cols @ cols.conj().T)


def _nontrivial_outcome_subsets(obs: DiscreteObservable, atol: float = 1e-8):
    """All unions of outcomes whose effect is neither O nor I, as
    (subset, effect) pairs. Exact enumeration over the 2^k subsets."""
    k = len(obs.outcomes)
    found = []
    for r in range(1, k):  # full set gives I, empty gives O
        for subset in itertools.combinations(obs.outcomes, r):
            e = obs.union_effect(subset)
            if np.max(np.abs(e.mat)) <= atol:
                continue
            if np.max(np.abs(e.mat - np.eye(obs.dim))) <= atol:
                continue
            found.append((subset, e))
    return found


def are_complementary(e1: DiscreteObservable, e2: DiscreteObservable) -> bool:
    """Complementarity of two projection-valued observables: every pair of
    nontrivial outcome-set effects has trivially intersecting ranges, and
    likewise against the complement sets. Returns False when every pair is
    trivial (complementarity is a nontrivial relation).

    Raises for observables that are not projection valued; use
    :func:`are_prob_complementary` for general effects.
    """
    for obs in (e1, e2):
        if not obs.is_projection_valued():
            raise ValueError(
                "are_complementary is defined for projection-valued observables"
            )
    if e1.dim != e2.dim:
        raise ValueError("observables act on different spaces")
    dim = e1.dim
    pairs = 0
    eye = np.eye(dim)
    for _, p in _nontrivial_outcome_subsets(e1):
        for _, q in _nontrivial_outcome_subsets(e2):
            pairs += 1
            qc = Operator(eye - q.mat)
            pc = Operator(eye - p.mat)
            for a, b in ((p, q), (p, qc), (pc, q)):
                if np.max(np.abs(meet_projections(a, b).mat)) > 1e-8:
                    return False
    return pairs > 0


def are_prob_complementary(e1: DiscreteObservable, e2: DiscreteObservable) -> bool:
    """Probabilistic complementarity: certainty of a nontrivial outcome set
    of one observable excludes certainty or impossibility of any nontrivial
    outcome set of the other. Decided through eigenvalue-1 eigenspaces."""
    if e1.dim != e2.dim:
        raise ValueError("observables act on different spaces")
    dim = e1.dim
    eye = np.eye(dim)
    pairs = 0
    subs1 = _nontrivial_outcome_subsets(e1)
    subs2 = _nontrivial_outcome_subsets(e2)
    for _, a in subs1:
        ea1 = eigenspace_one(Effect(a))
        ea0 = eigenspace_one(Effect(Operator(eye - a.mat)))
        for _, b in subs2:
            pairs += 1
            eb1 = eigenspace_one(Effect(b))
            eb0 = eigenspace_one(Effect(Operator(eye - b.mat)))
            # certainty of a vs certainty/impossibility of b, and symmetrically
            for x, y in ((ea1, eb1), (ea1, eb0), (ea0, eb1)):
                if np.max(np.abs(meet_projections(x, y).mat)) > 1e-8:
                    return False
    return pairs > 0


def effect_bloch(e: Effect) -> tuple[float, np.ndarray]:
    """Decompose a qubit effect as (t, b) with E = (t I + b·sigma) / 2."""
    if e.dim != 2:
        raise ValueError("effect_bloch requires a qubit effect")
    m = e.op.mat
    t = float(np.trace(m).real)
    bx = float((m[0, 1] + m[1, 0]).real)
    by = float((1j * (m[0, 1] - m[1, 0])).real)
    bz = float((m[0, 0] - m[1, 1]).real)
    return t, np.array([bx, by, bz])


def _four_ball_feasible(e0: float, evec, f0: float, fvec, n_gamma: int = 101,
                        iters: int = 200, tol: float = 1e-9) -> bool:
    """Feasibility of the joint-effect completion for general two-valued
    qubit observables E = (e0 I + e·sigma)/2, F = (f0 I + f·sigma)/2.

    The candidate G11 = (g0 I + g·sigma)/2 must satisfy four positivity
    constraints, each a Euclidean ball constraint on g for fixed g0. A
    deterministic g0 grid is swept; per g0, alternating projections onto the
    four balls decide whether the intersection is (numerically) nonempty.
    """
    lo = max(0.0, e0 + f0 - 2.0)
    hi = min(e0, f0)
    if hi < lo - 1e-12:
        return False
    for g0 in np.linspace(lo, hi, n_gamma):
        centers = [np.zeros(3), np.asarray(evec), np.asarray(fvec),
                   np.asarray(evec) + np.asarray(fvec)]
        radii = [g0, e0 - g0, f0 - g0, 2.0 - e0 - f0 + g0]
        if min(radii) < -1e-12:
            continue
        c = sum(centers) / 4.0
        for _ in range(iters):
            moved = 0.0
            for ctr, r in zip(centers, radii):
                d = c - ctr
                dist = np.linalg.norm(d)
                if dist > r:
                    c = ctr + d * (max(r, 0.0) / dist)
                    moved = max(moved, dist - r)
            if moved == 0.0:
                break
        violation = max(
            np.linalg.norm(c - ctr) - r for ctr, r in zip(centers, radii)
        )
        if violation <= tol:
            return True
    return False


def joint_observable_feasible(e1: DiscreteObservable, e2: DiscreteObservable) -> bool:
    """Whether two two-valued qubit observables admit a joint observable.

    Four effects G(i,k) >= 0 with row/column sums equal to the given
    observables and total I must exist. When both observables have
    unit-trace effects (the unsharp spin form) the exact Bloch criterion
    decides; otherwise the feasibility search over the linear completion
    runs. Only qubit observables are supported.
    """
    if e1.dim != 2 or e2.dim != 2:
        raise ValueError("joint_observable_feasible supports qubit observables only")
    if len(e1) != 2 or len(e2) != 2:
        raise ValueError("joint_observable_feasible supports two-valued observables")
    t1, b1 = effect_bloch(e1.effects[0])
    t2, b2 = effect_bloch(e2.effects[0])
    if abs(t1 - 1.0) <= 1e-12 and abs(t2 - 1.0) <= 1e-12:
        # unsharp spin form: exact criterion
        from .spin import coexist_criterion

        return coexist_criterion(b1, b2)
    return _four_ball_feasible(t1, b1, t2, b2)
