"""Unsharp spin-1/2 effects, the geometric coexistence criterion with its
ball-intersection oracle, the explicit joint observable for coexistent
pairs, and the covariant spin-phase POVM for arbitrary spin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Operator
from .povm import DiscreteObservable, Effect

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "spin_effect",
    "spin_observable",
    "coexist_criterion",
    "criterion_value",
    "coexist_oracle",
    "joint_spin_observable",
    "SpinPhaseSpace",
    "s3_operator",
    "phase_kernel",
    "spin_phase_effect",
    "spin_phase_observable",
    "spin_phase_covariance_residual",
    "spin_phase_first_moment",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI = (PAULI_X, PAULI_Y, PAULI_Z)

# Positivity of the joint observable degenerates exactly on the boundary of
# the coexistence region, so the <= 2 comparison gets a strict 1e-12 slack.
BOUNDARY_TOL = 1e-12


def _bloch(a) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(3)
    if np.linalg.norm(a) > 1.0 + BOUNDARY_TOL:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(a)} exceeds 1")
    return a


def spin_effect(a) -> Effect:
    """The unsharp spin property (I + a·sigma)/2; a projection iff |a| = 1."""
    a = _bloch(a)
    mat = (np.eye(2, dtype=complex) + sum(c * s for c, s in zip(a, _PAULI))) / 2
    return Effect(Operator(mat))


def spin_observable(a) -> DiscreteObservable:
    """Two-valued observable {+1: F(a), -1: F(-a)}."""
    a = _bloch(a)
    return DiscreteObservable([+1, -1], [spin_effect(a), spin_effect(-a)])


def criterion_value(a1, a2) -> float:
    a1, a2 = _bloch(a1), _bloch(a2)
    return float(np.linalg.norm(a1 + a2) + np.linalg.norm(a1 - a2))


def coexist_criterion(a1, a2) -> bool:
    """Exact coexistence criterion: |a1+a2| + |a1-a2| <= 2."""
    return criterion_value(a1, a2) <= 2.0 + BOUNDARY_TOL


def _ball_memberships(c: np.ndarray, gamma: float, a1, a2) -> float:
    """Max violation of the four ball constraints at the point c."""
    return max(
        np.linalg.norm(c - a1) - (1.0 - gamma),
        np.linalg.norm(c - a2) - (1.0 - gamma),
        np.linalg.norm(c - (a1 + a2)) - gamma,
        np.linalg.norm(c) - gamma,
    )


def coexist_oracle(a1, a2, grid_fallback: str = "auto") -> bool:
    """Ball-intersection coexistence oracle, independent of the algebraic
    criterion: a point gamma*c must lie in
    S(a1, 1-gamma) ∩ S(a2, 1-gamma) ∩ S(a1+a2, gamma) ∩ S(0, gamma)
    for some gamma in [0, 1].

    The midpoint (a1+a2)/2 at gamma = |(a1+a2)/2| is tested first; the
    intersection is symmetric under reflection through that midpoint, so by
    convexity the test is decisive. A (gamma, c) grid search confirms the
    verdict when the midpoint sits within 1e-6 of a ball boundary
    (``grid_fallback="auto"``), always (``"always"``) or never (``"never"``).
    """
    a1, a2 = _bloch(a1), _bloch(a2)
    c0 = (a1 + a2) / 2.0
    gamma0 = float(np.linalg.norm(c0))
    witness = _ball_memberships(c0, gamma0, a1, a2)
    decision = witness <= BOUNDARY_TOL
    if grid_fallback == "never":
        return decision
    if grid_fallback == "auto" and abs(witness) > 1e-6:
        return decision
    if _grid_search(a1, a2):
        return True
    return decision


def _grid_search(a1, a2, n_gamma: int = 101, n_c: int = 21) -> bool:
    """Deterministic (gamma, c) grid sweep over [0,1] x [-1,1]^3."""
    axis = np.linspace(-1.0, 1.0, n_c)
    cx, cy, cz = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([cx.ravel(), cy.ravel(), cz.ravel()], axis=1)
    d1 = np.linalg.norm(pts - a1, axis=1)
    d2 = np.linalg.norm(pts - a2, axis=1)
    d3 = np.linalg.norm(pts - (a1 + a2), axis=1)
    d0 = np.linalg.norm(pts, axis=1)
    for gamma in np.linspace(0.0, 1.0, n_gamma):
        ok = (d1 <= 1 - gamma + 1e-12) & (d2 <= 1 - gamma + 1e-12)
        ok &= (d3 <= gamma + 1e-12) & (d0 <= gamma + 1e-12)
        if ok.any():
            return True
    return False


def joint_spin_observable(a1, a2) -> DiscreteObservable:
    """Joint observable for a coexistent pair of unsharp spin properties.

    The four effects are G(i,k) = alpha_ik F((a_i + a_k) / (2 alpha_ik))
    with alpha_ik = (1 + a_i·a_k)/2 over a_i in {a1, -a1}, a_k in {a2, -a2};
    marginals reproduce the two spin observables exactly, and the zero
    operator stands in when alpha_ik vanishes (antipodal sharp vectors).
    """
    a1, a2 = _bloch(a1), _bloch(a2)
    if not coexist_criterion(a1, a2):
        raise ValueError("pair fails the coexistence criterion; no joint observable")
    outcomes = []
    effects = []
    for s1, ai in ((+1, a1), (-1, -a1)):
        for s2, ak in ((+1, a2), (-1, -a2)):
            alpha = (1.0 + float(ai @ ak)) / 2.0
            c = (ai + ak) / 2.0
            mat = (alpha * np.eye(2, dtype=complex)
                   + sum(x * s for x, s in zip(c, _PAULI))) / 2
            outcomes.append((s1, s2))
            effects.append(Effect(Operator(mat)))
    return DiscreteObservable(outcomes, effects)


@dataclass(frozen=True)
class SpinPhaseSpace:
    """Spin-s Hilbert space C^(2s+1), basis ordered by m ascending (-s first)."""

    s: float

    def __post_init__(self):
        two_s = round(2 * self.s)
        if abs(2 * self.s - two_s) > 1e-12 or two_s < 1:
            raise ValueError(f"spin must be a positive half-integer, got {self.s}")

    @property
    def dim(self) -> int:
        return round(2 * self.s) + 1

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.s


def s3_operator(space: SpinPhaseSpace) -> Operator:
    return Operator(np.diag(space.m_values.astype(complex)))


def phase_kernel(levels: np.ndarray, u: float, v: float) -> np.ndarray:
    """Closed-form matrix of the covariant phase effect on the given ladder
    levels: entry (m, n) is the integral of e^{i(n-m)alpha}/2pi over [u, v].
    """
    levels = np.asarray(levels, dtype=float)
    if v - u >= 2 * np.pi * (1 - 1e-15):
        return np.eye(levels.size, dtype=complex)  # full circle: exact identity
    k = levels[None, :] - levels[:, None]  # n - m
    out = np.empty(k.shape, dtype=complex)
    diag = np.abs(k) < 1e-12
    out[diag] = (v - u) / (2 * np.pi)
    kk = k[~diag]
    out[~diag] = (np.exp(1j * kk * v) - np.exp(1j * kk * u)) / (2j * np.pi * kk)
    return out


def _check_interval(u: float, v: float):
    if not (0.0 <= u <= v <= 2 * np.pi + 1e-12):
        raise ValueError(f"malformed interval [{u}, {v}]; need 0 <= u <= v <= 2pi")


def spin_phase_effect(space: SpinPhaseSpace, interval) -> Effect:
    """Covariant spin-phase effect of an interval [u, v] in [0, 2pi]."""
    u, v = float(interval[0]), float(interval[1])
    _check_interval(u, v)
    return Effect(Operator(phase_kernel(space.m_values, u, v)))


def spin_phase_observable(space: SpinPhaseSpace, bins: int = 8) -> DiscreteObservable:
    """Spin phase coarse-grained over a uniform partition of [0, 2pi]."""
    edges = np.linspace(0.0, 2 * np.pi, bins + 1)
    effects = [spin_phase_effect(space, (edges[i], edges[i + 1])) for i in range(bins)]
    return DiscreteObservable(list(range(bins)), effects)


def _shifted_intervals(u: float, v: float, alpha: float):
    """Translate [u, v] by alpha modulo 2pi, splitting at the wraparound."""
    two_pi = 2 * np.pi
    a = (u + alpha) % two_pi
    b = a + (v - u)
    if b <= two_pi + 1e-15:
        return [(a, min(b, two_pi))]
    return [(a, two_pi), (0.0, b - two_pi)]


def spin_phase_covariance_residual(space: SpinPhaseSpace, interval, alpha: float) -> float:
    """Max-entry residual of e^{-i a s3} S(X) e^{i a s3} - S(X + a mod 2pi)."""
    u, v = float(interval[0]), float(interval[1])
    _check_interval(u, v)
    phases = np.exp(-1j * alpha * space.m_values)
    rotated = phases[:, None] * phase_kernel(space.m_values, u, v) * phases.conj()[None, :]
    shifted = sum(
        phase_kernel(space.m_values, a, b) for a, b in _shifted_intervals(u, v, alpha)
    )
    return float(np.max(np.abs(rotated - shifted)))


def spin_phase_first_moment(space: SpinPhaseSpace) -> Operator:
    """The first phase moment: the ladder partial isometry sum |m+1><m|."""
    d = space.dim
    mat = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        mat[i + 1, i] = 1.0
    return Operator(mat)
