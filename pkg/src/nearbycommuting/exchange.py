"""Gradual exchange of two parallel chains: rotate the chains into each
other across a window so their tails interchange, with certified bounds on
the perturbation and on the growth of the self-commutator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import DomainError
from .shifts import Chain, ShiftSystem

_DIAG_AGREEMENT = 1e-9


@dataclass(frozen=True)
class ExchangeWindow:
    """Positions [i0, i1] on the shared axis; the rotation is spread over
    n0 of the i1 - i0 gaps."""

    i0: int
    i1: int
    n0: int

    def __post_init__(self):
        if self.n0 < 2:
            raise DomainError("window step count n0 must be at least 2")
        if self.i1 - self.i0 < self.n0:
            raise DomainError(
                f"window [{self.i0}, {self.i1}] holds fewer than n0+1={self.n0 + 1} positions")


def exchange_bounds(weights_a, weights_b, n0: int):
    """Closed-form (perturbation bound, self-commutator increment) for an
    exchange with the given window weights."""
    a = np.abs(np.asarray(weights_a, dtype=float))
    b = np.abs(np.asarray(weights_b, dtype=float))
    if a.shape != b.shape:
        raise DomainError("weight sequences must have equal length")
    if n0 < 1:
        raise DomainError("n0 must be positive")
    norm_bound = float((np.abs(a - b) + (math.pi / (2 * n0)) * np.maximum(a, b)).max(initial=0.0))
    increment = float(np.abs(b**2 - a**2).max(initial=0.0)) / n0
    return norm_bound, increment


def gradual_exchange(system: ShiftSystem, chain_a: int, chain_b: int,
                     window: ExchangeWindow) -> ShiftSystem:
    """Exchange the tails of two chains across the window.

    The first-listed chain continues into the second's tail; the second
    continues into the first's tail and inherits the junction minus sign.
    Inside the window the new weights are the square-mean blend of the two
    originals, so real nonnegative inputs stay nonnegative there.
    """
    if chain_a == chain_b:
        raise DomainError("cannot exchange a chain with itself")
    a = system.chains[chain_a]
    b = system.chains[chain_b]
    if a.closed or b.closed:
        raise DomainError("gradual exchange applies to open chains")
    i0, i1, n0 = window.i0, window.i1, window.n0
    if not (a.covers(i0, i1) and b.covers(i0, i1)):
        raise DomainError("both chains must cover the exchange window")
    la0, la1 = a.local(i0), a.local(i1)
    lb0, lb1 = b.local(i0), b.local(i1)
    if np.abs(a.diag[la0:la1 + 1] - b.diag[lb0:lb1 + 1]).max(initial=0.0) > _DIAG_AGREEMENT:
        raise DomainError("chains disagree on diagonal values inside the window")
    wa = a.weights[la0:la1]
    wb = b.weights[lb0:lb1]
    if (wa < 0).any() or (wb < 0).any():
        raise DomainError("window weights must be nonnegative")

    # one absolute-angle entry per window position; the quarter turn is
    # reached after n0 gaps and held through the rest of the window
    rotations = list(system.rotations)
    for k in range(1, i1 - i0 + 1):
        theta = min(k, n0) * math.pi / (2 * n0)
        rotations.append((int(a.indices[la0 + k]), int(b.indices[lb0 + k]), theta))

    t = np.arange(i1 - i0, dtype=float) / (i1 - i0)
    blend_a = np.sqrt((1 - t) * wa**2 + t * wb**2)
    blend_b = np.sqrt(t * wa**2 + (1 - t) * wb**2)

    tail_a_idx = a.indices[la1 + 1:]
    tail_b_idx = b.indices[lb1 + 1:]
    tail_a_w = a.weights[la1:]           # junction bond of a plus its tail bonds
    tail_b_w = b.weights[lb1:]
    new_a = Chain(
        indices=np.concatenate([a.indices[:la1 + 1], tail_b_idx]),
        diag=np.concatenate([a.diag[:la1 + 1], b.diag[lb1 + 1:]]),
        weights=np.concatenate([a.weights[:la0], blend_a, tail_b_w]),
        start=a.start)
    signed_tail_a = tail_a_w.copy()
    if len(signed_tail_a):
        signed_tail_a[0] = -signed_tail_a[0]
    new_b = Chain(
        indices=np.concatenate([b.indices[:lb1 + 1], tail_a_idx]),
        diag=np.concatenate([b.diag[:lb1 + 1], a.diag[la1 + 1:]]),
        weights=np.concatenate([b.weights[:lb0], blend_b, signed_tail_a]),
        start=b.start)

    chains = list(system.chains)
    chains[chain_a] = new_a
    chains[chain_b] = new_b
    return replace(system, rotations=tuple(rotations), chains=tuple(chains))
