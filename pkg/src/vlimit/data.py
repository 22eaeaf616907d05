"""Analytic Euler-type initial data used by the experiments and tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Domain


@dataclass(frozen=True)
class ShearVortexData:
    """u0 = (U(y), 0) + perp-grad psi with

    U(y)   = shear * y^2 exp(-y^2 / (2 w^2))
    psi    = amp * sin(x) * y^p * exp(-y^2 / (2 w^2)),  p odd

    U is even in y and psi odd, so both mirror-extend smoothly.  For p = 1 the
    wall trace is u00(x) = amp * sin(x): a single Fourier pair, incompatible
    with no-slip.  For p = 3 the data vanish at the wall (compatible case).
    """

    amp: float = 0.5
    shear: float = 0.5
    width: float = 1.0
    power: int = 1

    def __post_init__(self):
        if self.power < 1 or self.power % 2 == 0:
            raise ValueError("power must be a positive odd integer")

    def velocity(self, x, y):
        X, Yv = np.meshgrid(x, y, indexing="ij")
        g = np.exp(-Yv ** 2 / (2 * self.width ** 2))
        U = self.shear * Yv ** 2 * g
        p = self.power
        u = U + self.amp * np.sin(X) * (p * Yv ** (p - 1) - Yv ** (p + 1) / self.width ** 2) * g
        v = -self.amp * np.cos(X) * Yv ** p * g
        return np.stack([u, v], axis=2)

    def samples(self, domain: Domain) -> np.ndarray:
        return self.velocity(domain.x, domain.y)

    def wall_trace(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.sin(x) if self.power == 1 else np.zeros_like(x)


def zero_data(domain: Domain) -> np.ndarray:
    return np.zeros((domain.Nx, domain.y.size, 2))
