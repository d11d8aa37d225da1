"""Central numeric policy: every default tolerance and cap lives here.

Absolute tolerances are meant to be used as ``tol * scale`` where
``scale = 1 + max operator norm of the inputs involved``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # operator norm / eigensolver accuracy targets
    op_norm_rel: float = 1e-10
    power_residual: float = 1e-12
    power_max_iter: int = 10_000
    # below this dimension op_norm always uses a full eigendecomposition
    dense_norm_dim: int = 512
    # frame / reconstruction checks
    frame_orthogonality: float = 1e-10
    reconstruction: float = 1e-10
    hermitian_check: float = 1e-12
    # generic commutation / normality thresholds for constructed outputs
    commutation: float = 1e-10
    real_output: float = 1e-14
    # upward slack applied to certified bounds before comparing with a
    # measured value, so float noise cannot fail a true certificate
    bound_slack: float = 1 + 1e-12
    # dense materialization cap (matrix dimension)
    materialization_cap: int = 5000


def materialization_cap(default: int = 5000) -> int:
    """Materialization cap, overridable through the NEARBY_CAP variable."""
    value = os.environ.get("NEARBY_CAP")
    if value is None:
        return default
    cap = int(value)
    if cap < 2:
        raise ValueError("materialization cap must be at least 2")
    return cap


TOL = Tolerances()
