"""Model parameters and the exact scalar quantities of the coupled tandem queue.

Two stations in series share one unit of service capacity: while both are
busy station 1 gets a fraction ``p`` and station 2 the rest; a lone busy
station gets everything.  The whole network breaks down at rate ``gamma``
and is repaired at rate ``tau``; arrivals continue during repair at rate
``lambda1`` instead of ``lambda0``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Mapping


class UnstableError(ValueError):
    """Raised when a quantity only defined for a stable network is requested."""


@dataclass(frozen=True)
class ModelParams:
    lambda0: float
    lambda1: float
    nu1: float
    nu2: float
    gamma: float
    tau: float
    p: float

    def __post_init__(self):
        for name in ("lambda0", "nu1", "nu2", "gamma", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)!r}")
        if not self.lambda1 >= 0:
            raise ValueError(f"lambda1 must be non-negative, got {self.lambda1!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")

    @property
    def phi1(self) -> float:
        return self.p

    @property
    def phi2(self) -> float:
        return 1.0 - self.p

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelParams":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        missing = names - set(data)
        if missing:
            raise ValueError(f"missing parameter keys: {sorted(missing)}")
        values = {}
        for k in names:
            v = data[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"parameter {k!r} must be a number, got {v!r}")
            values[k] = float(v)
        return cls(**values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


#: Reference rates used by the tests and demos (p varies).
REFERENCE_PARAMS = ModelParams(lambda0=1.0, lambda1=0.5, nu1=4.0, nu2=5.0, gamma=2.0, tau=4.0, p=0.5)


@dataclass(frozen=True)
class LoadProfile:
    rho01: float
    rho02: float
    rho11: float
    rho12: float
    rho0: float
    rho1: float
    margin: float


def load_profile(params: ModelParams) -> LoadProfile:
    """Partial loads ``rho_kj = lambda_k / nu_j`` and the stability slack."""
    rho01 = params.lambda0 / params.nu1
    rho02 = params.lambda0 / params.nu2
    rho11 = params.lambda1 / params.nu1
    rho12 = params.lambda1 / params.nu2
    rho0 = rho01 + rho02
    rho1 = rho11 + rho12
    margin = params.tau - (rho0 * params.tau + rho1 * params.gamma)
    return LoadProfile(rho01, rho02, rho11, rho12, rho0, rho1, margin)


def stability_check(params: ModelParams) -> tuple[bool, float]:
    """Return ``(stable, margin / tau)``; a zero margin counts as unstable."""
    margin = load_profile(params).margin
    return margin > 0.0, margin / params.tau


def is_stable(params: ModelParams) -> bool:
    return stability_check(params)[0]


def mode_probabilities(params: ModelParams) -> tuple[float, float]:
    """Long-run fractions of time in the operating and setup modes."""
    total = params.tau + params.gamma
    return params.tau / total, params.gamma / total


def empty_probability(params: ModelParams) -> float:
    """Probability that both stations are empty while the network operates."""
    stable, slack = stability_check(params)
    if not stable:
        raise UnstableError(f"network is unstable (margin/tau = {slack:.6g})")
    return mode_probabilities(params)[0] * slack


def require_stable(params: ModelParams) -> None:
    stable, slack = stability_check(params)
    if not stable:
        raise UnstableError(f"network is unstable (margin/tau = {slack:.6g})")
