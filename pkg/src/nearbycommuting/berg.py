"""Nearest-normal construction for almost normal bilateral weighted shift
matrices: round the weights onto a uniform grid per interval, then close
the level sets of the rounded weights into constant-magnitude cyclic
orbits with quarter-turn exchanges. Includes the scale-free wrapper with
the optimized constants.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import TOL
from .linalg import DomainError, op_norm
from .shifts import (Chain, ShiftSystem, WeightedShift, materialize,
                     phase_normalize, self_commutator_norm)

CUBIC_CONSTANT = 5.3308
CUBIC_R = 0.162
CUBIC_M0 = 15.937
SIGMA_CONSTANT = 4.8573
SIGMA_R = 0.2897
SIGMA_M0 = 10.762


def helper_bound(norm: float, m: int) -> float:
    """Distance bound of the grid construction: (||S|| pi M/(M-2) + 2)/M."""
    return (norm * math.pi * m / (m - 2) + 2.0) / m


def f_constant(s: float, m0: float) -> float:
    """max(s (M0+2), (s pi M0/(M0-2) + 2)(M0+2)/M0), the scale function the
    wrapper constants come from."""
    return max(s * (m0 + 2), (s * math.pi * m0 / (m0 - 2) + 2) * (m0 + 2) / m0)


def cubic_constant(r: float, m0: float) -> float:
    return f_constant(r, m0) / r ** (1 / 3)


def sigma_constant(r: float, m0: float) -> float:
    return f_constant(r, m0) / math.sqrt(2 * r)


@dataclass(frozen=True)
class BergCertificate:
    mode: str                      # "grid", "cubic" or "sigma"
    bound: float
    measured: float | None
    defect_in: float
    defect_out: float
    m: int | None = None           # grid refinement actually used
    m0: float | None = None
    r: float | None = None
    sigma: float | None = None
    orbit_magnitudes: tuple = ()

    def holds(self) -> bool:
        return self.measured is None or self.measured <= self.bound * TOL.bound_slack

    def to_json(self) -> str:
        payload = {
            "mode": self.mode,
            "M": self.m,
            "bound": self.bound,
            "measured": self.measured,
            "defect_in": self.defect_in,
            "defect_out": self.defect_out,
            "orbit_magnitudes": list(self.orbit_magnitudes),
        }
        if self.m0 is not None:
            payload["M0"] = self.m0
        if self.r is not None:
            payload["r"] = self.r
        if self.sigma is not None:
            payload["sigma"] = self.sigma
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class NormalShiftSystem:
    """Direct sum of closed constant-magnitude orbits in a rotated frame;
    at most one bond (on a lowest-magnitude orbit) carries a leftover
    complex phase when the input weights were not real."""

    system: ShiftSystem
    grid_m: int
    magnitudes: tuple
    residual: tuple | None = None    # (chain index, bond index, unit phase)
    phase_bond: int | None = None    # original cyclic index of the phase carrier

    def matrix(self) -> np.ndarray:
        _, s = materialize(self.system)
        if self.residual is not None:
            ci, bi, phase = self.residual
            chain = self.system.chains[ci]
            src = chain.indices[bi]
            dst = chain.indices[(bi + 1) % len(chain)]
            s[dst, src] *= phase
        return s

    def is_real(self) -> bool:
        return self.residual is None or abs(self.residual[2].imag) == 0.0


# ---------------------------------------------------------------------------
# core grid construction on nonnegative cyclic weights


def _grid_intervals(c_abs: np.ndarray, m: int):
    """Partition the cyclic index set into runs of m positions (one longer
    run holding the remainder, ending m-1 past a maximal weight) and round
    each run's smallest weight up onto the 1/m grid below the norm."""
    n = len(c_abs)
    s = float(c_abs.max())
    k_tilde = int(np.argmax(c_abs))
    d = n % m
    q = n // m
    p0 = (k_tilde - d) % n
    sizes = [m + d] + [m] * (q - 1)
    intervals = []
    start = p0
    r_cap = math.ceil(m * s)
    for size in sizes:
        idx = (start + np.arange(size)) % n
        cmin = float(c_abs[idx].min())
        r = min(int(math.floor((s - cmin) * m)), r_cap)
        intervals.append([start, size, r])
        start = (start + size) % n
    return intervals, s


def _merge_equal(intervals, n: int):
    merged = []
    for start, size, r in intervals:
        if merged and merged[-1][2] == r:
            merged[-1][1] += size
        else:
            merged.append([start, size, r])
    if len(merged) > 1 and merged[0][2] == merged[-1][2]:
        last = merged.pop()
        merged[0][0] = last[0]
        merged[0][1] += last[1]
    return merged


def _berg_orbits(c_abs: np.ndarray, m: int, residual_bond_hint: int | None = None):
    """Run the construction on nonnegative cyclic weights.

    Returns (rotations, orbits, magnitudes, residual_bond, residual_mark)
    where each orbit is (columns, bond weights) with one closing bond per
    column, all magnitudes constant per orbit, and residual_mark locates
    the bond (orbit, position) reserved for the leftover phase.
    """
    n = len(c_abs)
    s = float(c_abs.max())
    if m % 2 != 0 or m < 4:
        raise DomainError("grid refinement M must be an even integer >= 4")

    if n <= 2 * m or s == 0.0:
        mid = (float(c_abs.max()) + float(c_abs.min())) / 2
        cols = list(range(n))
        weights = [mid] * n
        kbar = residual_bond_hint if residual_bond_hint is not None else 0
        return [], [(cols, weights)], [mid], kbar, (0, kbar)

    intervals, s = _grid_intervals(c_abs, m)
    merged = _merge_equal(intervals, n)
    r_bottom = max(iv[2] for iv in merged)

    if len(merged) == 1:
        mag = s - merged[0][2] / m
        cols = list(range(n))
        weights = [mag] * n
        kbar = merged[0][0]
        return [], [(cols, weights)], [mag], kbar, (0, kbar)

    for i, iv in enumerate(merged):
        if abs(iv[2] - merged[(i + 1) % len(merged)][2]) != 1:
            raise DomainError("rounded interval weights are not grid-adjacent; "
                              "the self-commutator precondition does not hold")

    # relabel the cycle so a lowest-level run sits first: no higher level
    # set can then wrap around the origin
    first_bottom = next(i for i, iv in enumerate(merged) if iv[2] == r_bottom)
    merged = merged[first_bottom:] + merged[:first_bottom]
    kbar = merged[0][0]  # first position of a lowest run carries the phase

    k0 = (m - 2) // 2
    # local coordinates: displacement along the cycle from merged[0].start
    origin = merged[0][0]
    local = []
    pos = 0
    for start, size, r in merged:
        local.append((pos, size, r))
        pos += size
    if pos != n:
        raise DomainError("internal: interval partition does not tile the cycle")

    def gcol(p_local: int) -> int:
        return (origin + p_local) % n

    # components per level: maximal runs of intervals with r_j <= level
    comps = {}
    for level in range(r_bottom):
        runs = []
        i = 0
        while i < len(local):
            if local[i][2] <= level:
                j = i
                while j + 1 < len(local) and local[j + 1][2] <= level:
                    j += 1
                lo = local[i][0]
                hi = local[j][0] + local[j][1] - 1
                if local[i][2] != level or local[j][2] != level:
                    raise DomainError("internal: level run does not open and close at its own level")
                runs.append((lo, hi))
                i = j + 1
            else:
                i += 1
        comps[level] = runs

    rotations = []
    for level in range(r_bottom):
        for lo, hi in comps[level]:
            for k in range(1, k0 + 1):
                theta = k * math.pi / (2 * k0)
                rotations.append((gcol(lo + k), gcol(hi - k0 + k), theta))

    def subcomponents(level: int, lo: int, hi: int):
        if level == 0:
            return []
        return [run for run in comps[level - 1] if lo <= run[0] and run[1] <= hi]

    orbits = []
    magnitudes = []
    residual_mark = None

    def arc_columns(lo: int) -> list:
        return [gcol(lo + k) for k in range(k0 + 1)]

    # one closed orbit per component, at the component's own magnitude
    for level in range(r_bottom):
        b = s - level / m
        for lo, hi in comps[level]:
            subs = subcomponents(level, lo, hi)
            cycle = []
            p = lo + k0 + 1
            sub_iter = iter(subs)
            nxt = next(sub_iter, None)
            while p <= hi - k0 - 1:
                if nxt is not None and p == nxt[0]:
                    cycle.extend(arc_columns(nxt[0]))
                    p = nxt[1] + 1
                    nxt = next(sub_iter, None)
                else:
                    cycle.append(gcol(p))
                    p += 1
            cycle.extend(gcol(q) for q in range(hi - k0, hi + 1))
            weights = [b] * len(cycle)
            weights[-1] = -b
            orbits.append((cycle, weights))
            magnitudes.append(b)

    # the bottom orbit walks the whole cycle, teleporting over every higher
    # run through that run's passed-down arc
    b = s - r_bottom / m
    cycle = []
    i = 0
    while i < len(local):
        lo, size, r = local[i]
        if r == r_bottom:
            cycle.extend(gcol(lo + k) for k in range(size))
            i += 1
        else:
            j = i
            while j + 1 < len(local) and local[j + 1][2] < r_bottom:
                j += 1
            cycle.extend(arc_columns(lo))
            i = j + 1
    weights = [b] * len(cycle)
    for idx, col in enumerate(cycle):
        if col == kbar:
            residual_mark = (len(orbits), idx)
            break
    orbits.append((cycle, weights))
    magnitudes.append(b)
    if residual_mark is None:
        raise DomainError("internal: lost track of the phase-carrying bond")
    return rotations, orbits, magnitudes, kbar, residual_mark


def _assemble(ws: WeightedShift, m: int, prescale: float = 1.0) -> NormalShiftSystem:
    n = len(ws.weights)
    c_abs = np.abs(ws.weights) * prescale
    rotations, orbits, mags, kbar, mark = _berg_orbits(c_abs, m)
    normalized, _ = phase_normalize(ws, residual_bond=kbar)
    res_weight = complex(normalized.weights[kbar])
    omega = res_weight / abs(res_weight) if res_weight != 0 else 1.0

    chains = []
    residual = None
    for ci, (cols, wts) in enumerate(orbits):
        wts = np.asarray(wts, dtype=float) / prescale
        if ci == mark[0]:
            if abs(omega.imag) == 0.0:
                wts[mark[1]] *= omega.real
            else:
                residual = (ci, mark[1], omega)
        chains.append(Chain(indices=np.asarray(cols, dtype=int),
                            diag=np.zeros(len(cols)), weights=wts, closed=True))
    system = ShiftSystem(dim=n, rotations=tuple(rotations), chains=tuple(chains)).validate()
    return NormalShiftSystem(system=system, grid_m=m,
                             magnitudes=tuple(float(v) / prescale for v in mags),
                             residual=residual, phase_bond=kbar)


def _weight_defect(nss: NormalShiftSystem) -> float:
    worst = 0.0
    for chain in nss.system.chains:
        sq = np.abs(chain.weights) ** 2
        if len(sq):
            worst = max(worst, float(np.abs(np.roll(sq, -1) - sq).max()))
    return worst


def level_set_normalize(ws: WeightedShift, m: int, sigma: float | None = None,
                        measure: bool = True):
    """Grid construction: returns a nearby normal system of closed
    constant-magnitude orbits together with its certificate."""
    if not ws.bilateral:
        raise DomainError("level_set_normalize expects a bilateral weighted shift")
    if m % 2 != 0 or m < 4:
        raise DomainError(f"M={m} must be an even integer >= 4")
    s = ws.norm()
    defect = self_commutator_norm(ws)
    if sigma is None:
        if not defect < 1.0 / m**3:
            raise DomainError(
                f"self-commutator norm {defect:.6e} is not below 1/M^3 = {1.0 / m**3:.6e}")
    else:
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        low = float(np.abs(ws.weights).min())
        if low < sigma:
            raise DomainError(f"smallest weight modulus {low:.6e} is below sigma = {sigma:.6e}")
        if not defect < 2 * sigma / m**2:
            raise DomainError(
                f"self-commutator norm {defect:.6e} is not below 2 sigma/M^2 = "
                f"{2 * sigma / m**2:.6e}")
    nss = _assemble(ws, m)
    bound = 1.0 / (2 * m) if len(ws.weights) <= 2 * m else helper_bound(s, m)
    measured = measured_distance(nss, ws) if measure else None
    cert = BergCertificate(mode="grid", m=m, bound=bound, measured=measured,
                           defect_in=defect, defect_out=_weight_defect(nss),
                           sigma=sigma, orbit_magnitudes=nss.magnitudes)
    return nss, cert


def measured_distance(nss: NormalShiftSystem, ws: WeightedShift) -> float:
    """||N - S|| with S expressed in the same phase-normalized basis the
    construction works in (a unitarily invariant quantity)."""
    if not ws.bilateral:
        ws = WeightedShift(np.append(ws.weights, 0.0), bilateral=True)
    kbar = nss.phase_bond if nss.phase_bond is not None else 0
    normalized, _ = phase_normalize(ws, residual_bond=kbar)
    return op_norm(nss.matrix() - normalized.matrix())


def _zero_normal(n: int) -> NormalShiftSystem:
    chain = Chain(indices=np.arange(n), diag=np.zeros(n), weights=np.zeros(n), closed=True)
    system = ShiftSystem(dim=n, chains=(chain,)).validate()
    return NormalShiftSystem(system=system, grid_m=0, magnitudes=(0.0,))


def nearest_normal(ws: WeightedShift, mode: str = "cubic", sigma: float | None = None,
                   measure: bool = True):
    """Scale-free nearest-normal wrapper.

    cubic mode: ||N - S|| <= 5.3308 ||S||^(1/3) ||[S*,S]||^(1/3).
    sigma mode (all weight moduli >= sigma > 0):
                ||N - S|| <= 4.8573 sqrt(||S||/sigma) ||[S*,S]||^(1/2).
    """
    if not ws.bilateral:
        ws = WeightedShift(np.append(ws.weights, 0.0), bilateral=True)
    s = ws.norm()
    defect = self_commutator_norm(ws)
    n = len(ws.weights)

    if mode == "cubic":
        r, m0 = CUBIC_R, CUBIC_M0
        bound = CUBIC_CONSTANT * s ** (1 / 3) * defect ** (1 / 3)
        x = (r / s) ** 2 * defect if s > 0 else 0.0
        threshold = (m0 + 2) ** -3
        exponent = 1 / 3
    elif mode == "sigma":
        if sigma is None or sigma <= 0:
            raise DomainError("sigma mode needs a positive sigma")
        low = float(np.abs(ws.weights).min())
        if low < sigma:
            raise DomainError(f"smallest weight modulus {low:.6e} is below sigma = {sigma:.6e}")
        r, m0 = SIGMA_R, SIGMA_M0
        bound = SIGMA_CONSTANT * math.sqrt(s / sigma) * math.sqrt(defect)
        x = r * defect / (2 * sigma * s) if s > 0 else 0.0
        threshold = (m0 + 2) ** -2
        exponent = 1 / 2
    else:
        raise DomainError(f"unknown mode {mode!r}")

    if s == 0.0 or defect == 0.0:
        nss = _assemble(ws, 4) if s > 0 else _zero_normal(n)
        measured = measured_distance(nss, ws) if measure else None
        cert = BergCertificate(mode=mode, m=None, bound=bound, measured=measured,
                               defect_in=defect, defect_out=_weight_defect(nss),
                               m0=m0, r=r, sigma=sigma, orbit_magnitudes=nss.magnitudes)
        return nss, cert

    if x > threshold:
        nss = _zero_normal(n)
        measured = s if measure else None
    else:
        m = 2 * (math.ceil(x ** -exponent / 2) - 1)
        nss = _assemble(ws, m, prescale=r / s)
        measured = measured_distance(nss, ws) if measure else None
    cert = BergCertificate(mode=mode, m=nss.grid_m or None, bound=bound, measured=measured,
                           defect_in=defect, defect_out=_weight_defect(nss),
                           m0=m0, r=r, sigma=sigma, orbit_magnitudes=nss.magnitudes)
    return nss, cert
