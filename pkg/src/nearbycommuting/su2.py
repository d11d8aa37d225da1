"""Irreducible spin representations, their shift weights, the weight
inequalities used by the certified bounds, and exact multiplicity
combinatorics of N-fold tensor powers of the defining representation.

Spins are stored as ``2*lambda`` integers and spectral indices as ``2*m``
integers so integers and half-integers share one exact representation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DomainError


@dataclass(frozen=True, order=True)
class Spin:
    two_lambda: int

    def __post_init__(self):
        if self.two_lambda < 0 or int(self.two_lambda) != self.two_lambda:
            raise DomainError("spin must be a nonnegative integer or half-integer")

    @property
    def dim(self) -> int:
        return self.two_lambda + 1

    @property
    def value(self) -> float:
        return self.two_lambda / 2

    def __repr__(self):
        if self.two_lambda % 2 == 0:
            return f"Spin({self.two_lambda // 2})"
        return f"Spin({self.two_lambda}/2)"


def shift_weight(spin: Spin, two_m: int) -> float:
    """Weight sqrt((lam - m)(lam + m + 1)) of the raising shift at index m."""
    tl = spin.two_lambda
    if not (-tl <= two_m < tl):
        raise DomainError(f"index 2m={two_m} outside [-2lam, 2lam) for 2lam={tl}")
    if (two_m - tl) % 2 != 0:
        raise DomainError(f"index 2m={two_m} has wrong parity for 2lam={tl}")
    # (lam - m)(lam + m + 1) = (tl - two_m)(tl + two_m + 2)/4, an exact integer /4
    return math.sqrt((tl - two_m) * (tl + two_m + 2)) / 2


@dataclass(frozen=True)
class IrrepPair:
    """Diagonal part (eigenvalues of sigma3) and raising-shift weights."""

    sigma3: np.ndarray
    sigma_plus_weights: np.ndarray


def irrep(spin: Spin) -> IrrepPair:
    tl = spin.two_lambda
    sigma3 = np.array([(-tl + 2 * k) / 2 for k in range(tl + 1)])
    weights = np.array([shift_weight(spin, -tl + 2 * k) for k in range(tl)])
    return IrrepPair(sigma3=sigma3, sigma_plus_weights=weights)


def sigma3_matrix(spin: Spin) -> np.ndarray:
    return np.diag(irrep(spin).sigma3).astype(complex)


def sigma_plus_matrix(spin: Spin) -> np.ndarray:
    n = spin.dim
    m = np.zeros((n, n), dtype=complex)
    w = irrep(spin).sigma_plus_weights
    for k in range(n - 1):
        m[k + 1, k] = w[k]
    return m


def representation_matrix(spin: Spin, which) -> np.ndarray:
    """S^lam applied to sigma_1/2/3 or the raising/lowering combinations."""
    if which == 3:
        return sigma3_matrix(spin)
    sp = sigma_plus_matrix(spin)
    if which == "+":
        return sp
    if which == "-":
        return sp.conj().T
    if which == 1:
        return (sp + sp.conj().T) / 2
    if which == 2:
        return (sp - sp.conj().T) / 2j
    raise DomainError(f"unknown generator {which!r}")


def tensor_multiplicity(n_sites: int, spin: Spin) -> int:
    """Exact multiplicity of the spin irrep inside the N-fold tensor power
    of the two-dimensional representation."""
    if n_sites < 1:
        raise DomainError("n_sites must be positive")
    tl = spin.two_lambda
    if (tl - n_sites) % 2 != 0 or tl > n_sites:
        return 0
    k = (tl + n_sites) // 2
    return math.comb(n_sites, k) - math.comb(n_sites, k + 1)


@dataclass(frozen=True)
class MultiplicityTable:
    n_sites: int
    entries: dict  # two_lambda -> exact multiplicity

    @classmethod
    def build(cls, n_sites: int) -> "MultiplicityTable":
        if n_sites < 1:
            raise DomainError("n_sites must be positive")
        n = n_sites
        # one binomial row via the multiplicative recurrence, never floats
        half = n // 2
        row = [0] * (n + 2)
        c = math.comb(n, half)
        for k in range(half, n + 1):
            row[k] = c
            c = c * (n - k) // (k + 1)
        entries = {}
        start = n % 2  # smallest two_lambda with the right parity
        for tl in range(start, n + 1, 2):
            k = (tl + n) // 2
            entries[tl] = row[k] - row[k + 1]
        return cls(n_sites=n, entries=entries)

    def multiplicity(self, spin: Spin) -> int:
        return self.entries.get(spin.two_lambda, 0)

    def total_dimension(self) -> int:
        return sum(n * (tl + 1) for tl, n in self.entries.items())

    def spins(self) -> list[Spin]:
        return [Spin(tl) for tl in sorted(self.entries)]


def turning_point(n_sites: int) -> float:
    """The spin value where tensor multiplicities switch from increasing to
    decreasing: sqrt(N+2)/2 - 1."""
    if n_sites < 1:
        raise DomainError("n_sites must be positive")
    return math.sqrt(n_sites + 2) / 2 - 1


_KINDS = ("max", "edge", "diff", "diff_or_edge", "sq_diff", "self_comm")


def weight_bound(kind: str, lam: float, mu: float | None = None,
                 L: float | None = None, M: float | None = None,
                 l: float | None = None, c: float = 0.0) -> float:
    """Closed-form right-hand sides of the shift-weight inequalities.

    kind="max":          d_{lam,i} <= lam + 1/2
    kind="edge":         d_{lam,i} <= sqrt(2 lam (M+1))       when lam - |i| <= M
    kind="diff":         d_{lam,i} - d_{mu,i} <= sqrt(2 lam L) when lam - mu <= L
    kind="diff_or_edge": d_{lam,i} - d_{mu,i} + c max(d_{lam,i}, d_{mu,i})
                         <= max(2 L sqrt(lam/l) + c (lam + 1/2),
                                sqrt(2 lam L) + c sqrt(2 lam (l+1)))
    kind="sq_diff":      d_{lam,i}^2 - d_{mu,i}^2 <= 2 lam L   when lam - mu <= L
    kind="self_comm":    the self-commutator norm of the raising shift, 2 lam

    Hypothesis violations raise; nothing is clamped.
    """
    if kind not in _KINDS:
        raise DomainError(f"unknown bound kind {kind!r}")
    if lam < 0:
        raise DomainError("lam must be nonnegative")
    if kind == "max":
        return lam + 0.5
    if kind == "self_comm":
        return 2.0 * lam
    if kind == "edge":
        if M is None or M < 0:
            raise DomainError("edge bound requires M >= 0")
        return math.sqrt(2 * lam * (M + 1))
    # remaining kinds compare two spins
    if mu is None or L is None:
        raise DomainError(f"{kind} bound requires mu and L")
    if not (0 <= mu <= lam):
        raise DomainError("need 0 <= mu <= lam")
    if lam - mu > L:
        raise DomainError("hypothesis lam - mu <= L violated")
    if kind == "diff":
        return math.sqrt(2 * lam * L)
    if kind == "sq_diff":
        return 2.0 * lam * L
    # diff_or_edge
    if l is None or l <= 0:
        raise DomainError("diff_or_edge bound requires l > 0")
    if c < 0:
        raise DomainError("coefficient c must be nonnegative")
    first = 2.0 * L * math.sqrt(lam / l) + c * (lam + 0.5)
    second = math.sqrt(2 * lam * L) + c * math.sqrt(2 * lam * (l + 1))
    return max(first, second)
