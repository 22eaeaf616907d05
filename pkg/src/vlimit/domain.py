"""Grids, x-Fourier transforms and the outer/layer change of variables.

The x direction is periodic on [-Lx, Lx).  Mode arrays always carry the
wavenumbers in the order k = -Nx/2, ..., Nx/2 - 1 along axis 0, so that
``domain.xi[k_index]`` is the wavenumber of row ``k_index``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidConfig, SizeMismatch

CONFIG_KEYS = ("Lx", "Nx", "y_max", "Ny", "Y_max", "NY", "nu", "T", "Nt")


@dataclass(frozen=True)
class DomainConfig:
    Lx: float = float(np.pi)
    Nx: int = 64
    y_max: float = 16.0
    Ny: int = 257
    Y_max: float = 20.0
    NY: int = 256
    nu: float = 1e-3
    T: float = 0.25
    Nt: int = 100

    @property
    def eps(self) -> float:
        return float(np.sqrt(self.nu))

    def with_nu(self, nu: float) -> "DomainConfig":
        return replace(self, nu=float(nu))

    def validate(self) -> None:
        if self.Nx < 8 or self.Nx & (self.Nx - 1):
            raise InvalidConfig(f"Nx={self.Nx} must be a power of two and >= 8")
        if self.Ny < 8 or self.NY < 8:
            raise InvalidConfig("Ny and NY must be >= 8")
        if self.nu < 0:
            raise InvalidConfig(f"nu={self.nu} must be nonnegative")
        if self.Y_max < 10:
            raise InvalidConfig(f"Y_max={self.Y_max} must be >= 10")
        if self.Lx <= 0 or self.y_max <= 0 or self.T < 0 or self.Nt < 1:
            raise InvalidConfig("Lx, y_max must be positive, T >= 0 and Nt >= 1")


def load_config(path) -> DomainConfig:
    """Read a ``key = value`` config file; every key must be one of CONFIG_KEYS."""
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"malformed config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise InvalidConfig(f"unknown config key {key!r}")
        values[key] = val
    missing = set(CONFIG_KEYS) - set(values)
    if missing:
        raise InvalidConfig(f"missing config keys: {sorted(missing)}")
    ints = {"Nx", "Ny", "NY", "Nt"}
    kw = {k: (int(v) if k in ints else float(v)) for k, v in values.items()}
    cfg = DomainConfig(**kw)
    cfg.validate()
    return cfg


def save_config(cfg: DomainConfig, path) -> None:
    lines = [f"{k} = {getattr(cfg, k)!r}" for k in CONFIG_KEYS]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class Domain:
    config: DomainConfig
    x: np.ndarray
    xi: np.ndarray
    y: np.ndarray
    Y: np.ndarray
    t: np.ndarray

    @property
    def Nx(self) -> int:
        return self.config.Nx

    @property
    def eps(self) -> float:
        return self.config.eps

    @property
    def dx(self) -> float:
        return 2 * self.config.Lx / self.config.Nx

    def dealias_mask(self) -> np.ndarray:
        k = np.arange(-self.Nx // 2, self.Nx // 2)
        return np.abs(k) < self.Nx / 3.0


def make_domain(config: DomainConfig | None = None, **overrides) -> Domain:
    """Build grids and wavenumbers.

    The outer grid is uniform on [0, y_max] including both ends; it is the
    half of a mirror-periodic grid used by the Euler solvers.  The layer grid
    is uniform on [0, Y_max].
    """
    cfg = replace(config or DomainConfig(), **overrides)
    cfg.validate()
    n = cfg.Nx
    x = -cfg.Lx + 2 * cfg.Lx * np.arange(n) / n
    xi = np.pi * np.arange(-n // 2, n // 2) / cfg.Lx
    y = np.linspace(0.0, cfg.y_max, cfg.Ny)
    Y = np.linspace(0.0, cfg.Y_max, cfg.NY)
    t = np.linspace(0.0, cfg.T, cfg.Nt + 1)
    return Domain(cfg, x, xi, y, Y, t)


# ---------------------------------------------------------------- transforms

def _phase(n: int) -> np.ndarray:
    k = np.arange(-n // 2, n // 2)
    return np.where(k % 2 == 0, 1.0, -1.0)


def to_modes(samples: np.ndarray) -> np.ndarray:
    """Physical x samples (axis 0) to mode coefficients, f(x) = sum_k c_k e^{i xi_k x}."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    c = np.fft.fftshift(np.fft.fft(samples, axis=0), axes=0) / n
    return c * _phase(n).reshape((n,) + (1,) * (samples.ndim - 1))


def from_modes(modes: np.ndarray, real: bool = True) -> np.ndarray:
    modes = np.asarray(modes)
    n = modes.shape[0]
    c = modes * _phase(n).reshape((n,) + (1,) * (modes.ndim - 1))
    f = np.fft.ifft(np.fft.ifftshift(c, axes=0), axis=0) * n
    return f.real if real else f


def conj_symmetric(modes: np.ndarray) -> np.ndarray:
    """Project onto modes of real data: c(-k) = conj(c(k)); the Nyquist row is made real."""
    flipped = np.conj(modes[::-1])
    # row i holds k = i - n/2; its partner -k sits at row n - i (mod n)
    partner = np.roll(flipped, 1, axis=0)
    return 0.5 * (modes + partner)


@dataclass
class SpectralField:
    """Outer field: modes [Nx, Ny, ncomp] on the outer y grid."""

    modes: np.ndarray
    xi: np.ndarray
    y_grid: np.ndarray
    decay_tag: str = "exponential"

    @property
    def ncomp(self) -> int:
        return self.modes.shape[2]

    def samples(self) -> np.ndarray:
        return from_modes(self.modes)


@dataclass
class LayerField:
    """Boundary-layer field: modes [Nx, NY, ncomp] on a layer grid in Y."""

    modes: np.ndarray
    xi: np.ndarray
    Y_grid: np.ndarray
    decay_tag: str = "exponential"
    decay_rate: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def ncomp(self) -> int:
        return self.modes.shape[2]

    def tail_ratio(self) -> float:
        """max |f| over the last 10% of the Y grid divided by max |f|."""
        a = np.abs(self.modes)
        top = a.max()
        if top == 0:
            return 0.0
        cut = self.Y_grid >= self.Y_grid[0] + 0.9 * (self.Y_grid[-1] - self.Y_grid[0])
        return float(a[:, cut].max() / top)

    def validate_decay(self, tol: float = 1e-6) -> bool:
        if self.decay_tag == "none":
            return True
        return self.tail_ratio() <= tol


@dataclass
class BoundaryTrace:
    """Wall trace: modes [Nx, Nt+1] sampled at ``times``."""

    modes: np.ndarray
    times: np.ndarray
    xi: np.ndarray


def to_spectral(samples: np.ndarray, domain: Domain) -> SpectralField:
    """Samples [Nx, Ny] or [Nx, Ny, ncomp] on the outer grid to a SpectralField."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 2:
        samples = samples[:, :, None]
    if samples.shape[:2] != (domain.Nx, domain.y.size):
        raise SizeMismatch(f"expected ({domain.Nx}, {domain.y.size}, ncomp), got {samples.shape}")
    return SpectralField(to_modes(samples), domain.xi, domain.y)


def from_spectral(f: SpectralField) -> np.ndarray:
    return f.samples()


def parseval_norm(modes: np.ndarray, Lx: float) -> float:
    """L2 norm over one period in x from modes (sum over all remaining axes)."""
    return float(np.sqrt(np.sum(np.abs(modes) ** 2) * 2 * Lx))


# ------------------------------------------------------ outer <-> layer maps

def _interp_along(values: np.ndarray, src: np.ndarray, dst: np.ndarray, tail: str) -> np.ndarray:
    """Cubic interpolation along axis 1; outside [src0, src_end] use the tail rule."""
    spline = CubicSpline(src, values, axis=1)
    inside = dst <= src[-1]
    out = np.zeros(values.shape[:1] + dst.shape + values.shape[2:], dtype=values.dtype)
    out[:, inside] = spline(dst[inside])
    if tail == "none" and (~inside).any():
        out[:, ~inside] = values[:, -1:]
    return out


def restrict_outer_to_layer(f: SpectralField, eps: float, Y_grid: np.ndarray) -> LayerField:
    """Sample an outer field at y = eps * Y."""
    if eps <= 0:
        raise InvalidConfig("restrict_outer_to_layer needs eps > 0")
    modes = _interp_along(f.modes, f.y_grid, eps * np.asarray(Y_grid), f.decay_tag)
    return LayerField(modes, f.xi, np.asarray(Y_grid), decay_tag="none")


def lift_layer_to_outer(g: LayerField, eps: float, y_grid: np.ndarray) -> SpectralField:
    """Sample a layer field at Y = y / eps; beyond the layer grid decaying fields are 0."""
    y_grid = np.asarray(y_grid)
    if eps == 0:
        modes = np.zeros((g.modes.shape[0], y_grid.size, g.ncomp), dtype=complex)
        if g.decay_tag == "none":
            modes[:] = g.modes[:, -1:]
        return SpectralField(modes, g.xi, y_grid)
    modes = _interp_along(g.modes, g.Y_grid, y_grid / eps, g.decay_tag)
    return SpectralField(modes, g.xi, y_grid, decay_tag=g.decay_tag)


# --------------------------------------------------------------- field files

def write_field(path, modes: np.ndarray) -> None:
    """Write modes [Nx, Ngrid, ncomp] as header + little-endian (re, im) float64 pairs."""
    modes = np.asarray(modes, dtype=complex)
    if modes.ndim == 2:
        modes = modes[:, :, None]
    nx, ng, nc = modes.shape
    pairs = np.empty(modes.shape + (2,), dtype="<f8")
    pairs[..., 0] = modes.real
    pairs[..., 1] = modes.imag
    with open(path, "wb") as fh:
        fh.write(f"VLIMIT-FIELD v1 {nx} {ng} {nc}\n".encode())
        fh.write(pairs.tobytes(order="C"))


def read_field(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode().split()
        if header[:2] != ["VLIMIT-FIELD", "v1"] or len(header) != 5:
            raise InvalidConfig(f"{path}: not a VLIMIT-FIELD v1 file")
        nx, ng, nc = (int(v) for v in header[2:])
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != nx * ng * nc * 2:
        raise SizeMismatch(f"{path}: payload size {raw.size} != {nx * ng * nc * 2}")
    raw = raw.reshape(nx, ng, nc, 2)
    return raw[..., 0] + 1j * raw[..., 1]
