"""Weighted-shift data structures and the ShiftSystem representation:
an ambient dimension, a composable rotation log for the real orthogonal
frame, and a set of chains carrying diagonal values and shift weights.

Frames are stored as Givens-rotation logs, never dense matrices; an entry
``(p, p, angle)`` records a sign flip of column p (a half-turn confined to
that column's line). Materialization is lazy.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import TOL, materialization_cap
from .linalg import DomainError


@dataclass(frozen=True, eq=False)
class WeightedShift:
    """Shift with weights c_1..c_{n-1} on a chain of length n; a bilateral
    shift carries the closing weight c_n as its last entry."""

    weights: np.ndarray
    bilateral: bool = False

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=complex))
        if self.weights.ndim != 1 or len(self.weights) == 0:
            raise DomainError("need at least one weight")

    @property
    def n(self) -> int:
        return len(self.weights) + (0 if self.bilateral else 1)

    @property
    def all_nonnegative(self) -> bool:
        return bool(np.all(self.weights.imag == 0) and np.all(self.weights.real >= 0))

    def norm(self) -> float:
        return float(np.abs(self.weights).max())

    def matrix(self) -> np.ndarray:
        n = self.n
        m = np.zeros((n, n), dtype=complex)
        for k, c in enumerate(self.weights):
            m[(k + 1) % n, k] = c
        return m


def self_commutator_norm(ws: WeightedShift) -> float:
    """||[S*, S]|| from the weights alone."""
    sq = np.abs(ws.weights) ** 2
    if ws.bilateral:
        return float(np.abs(np.roll(sq, -1) - sq).max())
    if len(sq) == 1:
        return float(sq[0])
    inner = np.abs(np.diff(sq)).max()
    return float(max(sq[0], sq[-1], inner))


def phase_normalize(ws: WeightedShift, residual_bond: int | None = None):
    """Absorb weight phases into the basis.

    Returns ``(normalized, phases)`` where the normalized weights are the
    moduli |c_k| except, for a bilateral shift, the single residual bond
    which keeps the leftover phase; conjugating the normalized matrix by
    ``diag(phases)`` reproduces the input matrix. Real inputs give +-1
    phases.
    """
    w = ws.weights
    n = ws.n
    nb = len(w)
    phases = np.ones(n, dtype=complex)
    if not ws.bilateral:
        if residual_bond is not None:
            raise DomainError("residual bond applies to bilateral shifts only")
        for k in range(nb):
            c = w[k]
            phases[k + 1] = phases[k] * (c / abs(c)) if c != 0 else 1.0
        new = np.abs(w).astype(complex)
        return WeightedShift(new, bilateral=False), phases
    if residual_bond is None:
        residual_bond = nb - 1
    if not (0 <= residual_bond < nb):
        raise DomainError("residual bond out of range")
    # walk the cycle starting just after the residual bond
    start = (residual_bond + 1) % n
    for step in range(n - 1):
        j = (start + step) % n  # bond j goes vertex j -> j+1 (mod n)
        c = w[j]
        nxt = (j + 1) % n
        phases[nxt] = phases[j] * (c / abs(c)) if c != 0 else 1.0
    new = np.abs(w).astype(complex)
    j = residual_bond
    new[j] = (phases[j] / phases[(j + 1) % n]) * w[j]
    return WeightedShift(new, bilateral=True), phases


@dataclass(frozen=True, eq=False)
class Chain:
    """One orbit: ambient column indices in shift order, the diagonal value
    and outgoing weight per position. ``start`` anchors the chain on the
    shared position axis used to align parallel chains."""

    indices: np.ndarray
    diag: np.ndarray
    weights: np.ndarray
    start: int = 0
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=int))
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        n = len(self.indices)
        if len(self.diag) != n:
            raise DomainError("diag length must match chain length")
        want = n if self.closed else max(n - 1, 0)
        if len(self.weights) != want:
            raise DomainError("weight count does not match chain length")

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def end(self) -> int:
        return self.start + len(self.indices) - 1

    def local(self, position: int) -> int:
        k = position - self.start
        if not (0 <= k < len(self.indices)):
            raise DomainError(f"position {position} outside chain [{self.start}, {self.end}]")
        return k

    def covers(self, lo: int, hi: int) -> bool:
        return self.start <= lo and hi <= self.end


Rotation = tuple[int, int, float]


@dataclass(frozen=True, eq=False)
class ShiftSystem:
    dim: int
    rotations: tuple = ()
    chains: tuple = ()

    def validate(self):
        used = np.zeros(self.dim, dtype=bool)
        for c in self.chains:
            if used[c.indices].any():
                raise DomainError("chains share an ambient index")
            used[c.indices] = True
        if not used.all():
            raise DomainError("some ambient indices belong to no chain")
        return self

    def norm(self) -> float:
        vals = [np.abs(c.weights).max(initial=0.0) for c in self.chains]
        return float(max(vals, default=0.0))

    def with_chains(self, chains) -> "ShiftSystem":
        return replace(self, chains=tuple(chains))


def apply_rotations(frame: np.ndarray, rotations) -> np.ndarray:
    """Apply log entries in order to the columns of ``frame`` (in place)."""
    for p, q, theta in rotations:
        if p == q:
            frame[:, p] *= -1.0
            continue
        c, s = math.cos(theta), math.sin(theta)
        fp = frame[:, p].copy()
        fq = frame[:, q]
        frame[:, p] = c * fp + s * fq
        frame[:, q] = -s * fp + c * fq
    return frame


def inverse_rotations(rotations):
    """Log that undoes ``rotations`` when applied after it."""
    return tuple((p, q, -theta if p != q else theta) for p, q, theta in reversed(rotations))


def frame_matrix(system: ShiftSystem) -> np.ndarray:
    q = np.eye(system.dim)
    return apply_rotations(q, system.rotations)


def materialize(system: ShiftSystem, cap: int | None = None):
    """Dense (A, S) for the system: A = Q diag Q^T and S acting as
    weight * (next chain vector) on each chain vector."""
    system.validate()
    if cap is None:
        cap = materialization_cap(TOL.materialization_cap)
    if system.dim > cap:
        raise DomainError(f"dimension {system.dim} exceeds materialization cap {cap}")
    q = frame_matrix(system)
    d = np.zeros(system.dim)
    b = np.zeros((system.dim, system.dim))
    for chain in system.chains:
        d[chain.indices] = chain.diag
        idx = chain.indices
        nb = len(chain.weights)
        for k in range(nb):
            b[idx[(k + 1) % len(idx)], idx[k]] = chain.weights[k]
    a = (q * d) @ q.T
    s = q @ b @ q.T
    return a.astype(complex), s.astype(complex)


def single_chain_system(diag, weights, closed: bool = False, start: int = 0) -> ShiftSystem:
    diag = np.asarray(diag, dtype=float)
    n = len(diag)
    chain = Chain(indices=np.arange(n), diag=diag, weights=np.asarray(weights, dtype=float),
                  start=start, closed=closed)
    return ShiftSystem(dim=n, chains=(chain,)).validate()


def from_blocks(blocks) -> ShiftSystem:
    """System whose chains are the given (start, diag, weights) open blocks,
    laid out consecutively in the ambient space."""
    chains = []
    offset = 0
    for start, diag, weights in blocks:
        n = len(diag)
        chains.append(Chain(indices=np.arange(offset, offset + n),
                            diag=np.asarray(diag, dtype=float),
                            weights=np.asarray(weights, dtype=float),
                            start=start))
        offset += n
    return ShiftSystem(dim=offset, chains=tuple(chains)).validate()


def export_weight_diagram(system: ShiftSystem, path) -> None:
    """CSV with one row per chain position: chain_id, position, diagonal, weight."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chain_id", "position_index", "diagonal_value", "weight"])
        for cid, chain in enumerate(system.chains):
            for k in range(len(chain)):
                has_bond = k < len(chain.weights)
                writer.writerow([cid, chain.start + k, repr(chain.diag[k]),
                                 repr(chain.weights[k]) if has_bond else ""])


def normalize_chain_signs(system: ShiftSystem, chain_index: int) -> ShiftSystem:
    """Push the signs of one open chain's weights into the rotation log
    (half-turn entries on single columns) so its stored weights become
    nonnegative. The materialized operator is unchanged."""
    chain = system.chains[chain_index]
    if chain.closed:
        raise DomainError("sign normalization applies to open chains")
    w = chain.weights.copy()
    flips = []
    sign = 1.0
    for k in range(len(w)):
        bond = sign * w[k]
        sign = -1.0 if bond < 0 else 1.0
        w[k] = abs(bond)
        if sign < 0:
            flips.append(int(chain.indices[k + 1]))
    rotations = system.rotations + tuple((p, p, math.pi) for p in flips)
    chains = list(system.chains)
    chains[chain_index] = replace(chain, weights=w)
    return replace(system, rotations=rotations, chains=tuple(chains))
