"""Finite-grid measurement models: the discrete-readout toy scheme, unsharp
position as a convolution, its state transformer, and the covariant discrete
phase-space observable whose marginals are smeared position and momentum.

The apparatus lives on a cyclic grid (periodic boundary), so the discrete
Fourier pair is exactly unitary and shift covariance is exact; wraparound
artifacts are accepted because no continuum claim is made here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Operator, eigh
from .povm import (
    DiscreteObservable,
    Effect,
    MeasurementScheme,
    State,
    StateTransformer,
    vector_state,
)

__all__ = [
    "CyclicGrid",
    "ConfidenceFunction",
    "position_observable",
    "toy_discrete_measurement",
    "unsharp_position_observable",
    "position_measurement_scheme",
    "unsharp_position_transformer",
    "weyl_operator",
    "parity_operator",
    "phase_space_observable",
]


@dataclass(frozen=True)
class CyclicGrid:
    """d sites with periodic shifts; the momentum basis is the discrete
    Fourier transform of the position basis."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("grid needs at least 2 sites")

    @property
    def omega(self) -> complex:
        return np.exp(2j * np.pi / self.d)

    def shift(self, steps: int = 1) -> Operator:
        """Cyclic shift |q> -> |q + steps>."""
        mat = np.zeros((self.d, self.d), dtype=complex)
        for q in range(self.d):
            mat[(q + steps) % self.d, q] = 1.0
        return Operator(mat)

    def boost(self, steps: int = 1) -> Operator:
        """Diagonal phase |q> -> omega^{q steps} |q>."""
        phases = self.omega ** (steps * np.arange(self.d))
        return Operator(np.diag(phases))

    def dft(self) -> Operator:
        """Unitary DFT; its columns are the momentum basis."""
        q = np.arange(self.d)
        return Operator(self.omega ** np.outer(q, q) / np.sqrt(self.d))


@dataclass(frozen=True, eq=False)
class ConfidenceFunction:
    """Nonnegative response weights over grid sites, summing to one: the
    probability of reading site offset y away from the true position."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-15):
            raise ValueError("confidence weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"confidence weights sum to {w.sum()}, expected 1")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.weights.size


def position_observable(grid: CyclicGrid) -> DiscreteObservable:
    effects = []
    for q in range(grid.d):
        m = np.zeros((grid.d, grid.d), dtype=complex)
        m[q, q] = 1.0
        effects.append(Effect(Operator(m)))
    return DiscreteObservable(list(range(grid.d)), effects)


def _integer_eigenspaces(a: Operator, atol: float = 1e-8):
    """Distinct integer eigenvalues of a Hermitian operator with their
    eigenprojections."""
    w, v = eigh(a)
    rounded = np.round(w).astype(int)
    if np.max(np.abs(w - rounded)) > atol:
        raise ValueError("operator eigenvalues are not integers within tolerance")
    spaces = {}
    for val in sorted(set(rounded.tolist())):
        cols = v[:, rounded == val]
        spaces[val] = Operator(cols @ cols.conj().T)
    return spaces


def toy_discrete_measurement(a: Operator, grid: CyclicGrid,
                             pointer_width: int = 1) -> MeasurementScheme:
    """Readout scheme for an operator with integer eigenvalues: the coupling
    shifts the grid pointer by the eigenvalue, the pointer position is read,
    and sites map back to eigenvalues.

    Requires the shifted pointer supports to be disjoint modulo the grid
    size; the induced observable is then exactly the spectral measure.
    """
    spaces = _integer_eigenspaces(a)
    d = grid.d
    offsets = [j - (pointer_width - 1) // 2 for j in range(pointer_width)]
    supports = {}
    for val in spaces:
        supp = {(val + off) % d for off in offsets}
        supports[val] = supp
    all_sites = [s for supp in supports.values() for s in supp]
    if len(set(all_sites)) != len(all_sites):
        raise ValueError(
            "pointer supports overlap on the grid; eigenvalue spacing is too "
            "tight for this pointer width"
        )
    ds = a.dim
    coupling = np.zeros((ds * d, ds * d), dtype=complex)
    for val, proj in spaces.items():
        coupling += np.kron(proj.mat, grid.shift(val).mat)
    phi = np.zeros(d, dtype=complex)
    for off in offsets:
        phi[off % d] = 1.0 / np.sqrt(pointer_width)
    pointer_function = {}
    for x in range(d):
        owner = [val for val, supp in supports.items() if x in supp]
        if owner:
            pointer_function[x] = owner[0]
        else:
            # unreachable sites carry exactly zero probability; route them to
            # the nearest eigenvalue to keep the pointer function total
            dist = {
                val: min((x - s) % d, (s - x) % d)
                for val, supp in supports.items()
                for s in supp
            }
            pointer_function[x] = min(dist, key=dist.get)
    return MeasurementScheme(
        Operator(coupling, (ds, d)),
        vector_state(phi),
        position_observable(grid),
        pointer_function,
    )


def unsharp_position_observable(f: ConfidenceFunction,
                                grid: CyclicGrid) -> DiscreteObservable:
    """Smeared position: the effect of reading site x is diagonal with
    weight f((x - q) mod d) at position q."""
    if f.d != grid.d:
        raise ValueError("confidence function does not match the grid")
    d = grid.d
    effects = []
    for x in range(d):
        diag = np.array([f.weights[(x - q) % d] for q in range(d)], dtype=complex)
        effects.append(Effect(Operator(np.diag(diag))))
    return DiscreteObservable(list(range(d)), effects)


def position_measurement_scheme(phi, grid: CyclicGrid) -> MeasurementScheme:
    """Position monitoring through a shift coupling: site q shifts the
    pointer by q, the pointer position is read directly.

    The induced observable equals :func:`unsharp_position_observable` with
    f = |phi|^2 exactly (the convolution convention used there absorbs the
    reflection ambiguity).
    """
    phi = np.asarray(phi, dtype=complex)
    d = grid.d
    if phi.size != d:
        raise ValueError("pointer amplitudes do not match the grid")
    if abs(np.sum(np.abs(phi) ** 2) - 1.0) > 1e-12:
        raise ValueError("pointer amplitudes must be normalized")
    coupling = np.zeros((d * d, d * d), dtype=complex)
    for q in range(d):
        proj = np.zeros((d, d), dtype=complex)
        proj[q, q] = 1.0
        coupling += np.kron(proj, grid.shift(q).mat)
    return MeasurementScheme(
        Operator(coupling, (d, d)),
        vector_state(phi),
        position_observable(grid),
        None,
    )


def unsharp_position_transformer(phi, grid: CyclicGrid) -> StateTransformer:
    """State transformer of the shift-coupling position monitoring: one
    operation element per readout site, A_x = diag_q phi((x - q) mod d).

    Compatible with the unsharp position observable built from f = |phi|^2;
    a delta profile reduces to the projective position transformer.
    """
    phi = np.asarray(phi, dtype=complex)
    d = grid.d
    if abs(np.sum(np.abs(phi) ** 2) - 1.0) > 1e-12:
        raise ValueError("pointer amplitudes must be normalized")
    kraus_sets = []
    for x in range(d):
        diag = np.array([phi[(x - q) % d] for q in range(d)])
        kraus_sets.append((Operator(np.diag(diag)),))
    return StateTransformer(tuple(range(d)), kraus_sets)


def weyl_operator(grid: CyclicGrid, q: int, p: int) -> Operator:
    """Discrete shift-and-boost operator X^q Z^p."""
    return grid.shift(q) @ grid.boost(p)


def parity_operator(grid: CyclicGrid) -> Operator:
    """Site reflection |m> -> |-m mod d>."""
    d = grid.d
    mat = np.zeros((d, d), dtype=complex)
    for m in range(d):
        mat[(-m) % d, m] = 1.0
    return Operator(mat)


def phase_space_observable(t0: State, grid: CyclicGrid) -> DiscreteObservable:
    """Covariant phase-space observable G(q, p) = W(q,p) Pi T0 Pi W(q,p)† / d.

    The parity conjugation fixes the marginal convention: the position
    marginal is the smeared position with confidence f(y) = <y|T0|y>, the
    momentum marginal the smeared momentum with the DFT-diagonal weights
    g(y) = <y~|T0|y~>, both centered on the true value.
    """
    d = grid.d
    if t0.dim != d:
        raise ValueError("seed state does not match the grid")
    pi = parity_operator(grid).mat
    seed = pi @ t0.op.mat @ pi.conj().T
    outcomes = []
    effects = []
    for q in range(d):
        for p in range(d):
            w = weyl_operator(grid, q, p).mat
            outcomes.append((q, p))
            effects.append(Effect(Operator(w @ seed @ w.conj().T / d)))
    return DiscreteObservable(outcomes, effects)
