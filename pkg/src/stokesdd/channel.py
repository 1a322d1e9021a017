"""Unitary polarization rotation with amplifier noise, and the induced 4x4
transfer matrix on the intensity/beat observables.

The two-polarization field passes through a random unit-determinant rotation
[[a, b], [-b*, a*]] and picks up circularly symmetric complex Gaussian noise of
variance 2*sigma2 per polarization (sigma2 per real quadrature).  The four
per-slot observables (|F_x|^2, |F_y|^2, 2Re F_xF_y*, 2Im F_xF_y*) are a fixed
linear function of the same observables of the transmit field; that 4x4 matrix
is exposed for detection and diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import DualPolSymbol

UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class JonesChannel:
    """Rotation parameters (a, b) with |a|^2 + |b|^2 = 1, plus the noise level."""

    a: complex
    b: complex
    sigma2: float = 0.0

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > UNITARITY_TOL:
            raise ValueError("(a, b) must satisfy |a|^2 + |b|^2 = 1")
        if not self.sigma2 >= 0.0:
            raise ValueError("sigma2 must be nonnegative")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.a, self.b], [-np.conj(self.b), np.conj(self.a)]], dtype=complex
        )


@dataclass(frozen=True, eq=False)
class StokesMatrix:
    """4x4 real transfer matrix between transmit and received observables."""

    m: np.ndarray


def channel_from_pair(z1: complex, z2: complex, sigma2: float = 0.0) -> JonesChannel:
    """Normalize a complex pair onto the unit sphere |a|^2 + |b|^2 = 1."""
    norm = math.sqrt(abs(z1) ** 2 + abs(z2) ** 2)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero pair")
    return JonesChannel(z1 / norm, z2 / norm, sigma2)


def haar_random_channel(rng: np.random.Generator, sigma2: float = 0.0) -> JonesChannel:
    """Uniform draw over the unit-determinant rotations: two independent
    standard complex Gaussians, normalized to unit joint norm."""
    g = rng.standard_normal(4)
    return channel_from_pair(complex(g[0], g[1]), complex(g[2], g[3]), sigma2)


def apply_jones(channel: JonesChannel, ex, ey):
    """Noiseless rotation of field arrays (or scalars)."""
    a, b = channel.a, channel.b
    return a * ex + b * ey, -np.conj(b) * ex + np.conj(a) * ey


def add_unit_noise(kx, ky, sigma2: float, unit: np.ndarray):
    """Add scaled pre-drawn standard-normal quadratures (n, 4) to the fields.

    Keeping the unit draws fixed while sweeping sigma2 gives common-random-number
    curves across an OSNR grid.
    """
    s = math.sqrt(sigma2)
    fx = kx + s * (unit[..., 0] + 1j * unit[..., 1])
    fy = ky + s * (unit[..., 2] + 1j * unit[..., 3])
    return fx, fy


def propagate_block(channel: JonesChannel, ex, ey, rng: np.random.Generator):
    """Rotate and add noise to field arrays; returns (fx, fy, kx, ky)."""
    kx, ky = apply_jones(channel, ex, ey)
    unit = rng.standard_normal((np.shape(kx)[0], 4))
    fx, fy = add_unit_noise(kx, ky, channel.sigma2, unit)
    return fx, fy, kx, ky


def propagate(channel: JonesChannel, symbol: DualPolSymbol, rng: np.random.Generator):
    """Pass one symbol through the channel; returns (noisy, noiseless) fields."""
    kx, ky = apply_jones(channel, symbol.ex, symbol.ey)
    s = math.sqrt(channel.sigma2)
    g = rng.standard_normal(4)
    noisy = DualPolSymbol(kx + s * complex(g[0], g[1]), ky + s * complex(g[2], g[3]))
    return noisy, DualPolSymbol(complex(kx), complex(ky))


def stokes_vector(ex, ey) -> np.ndarray:
    """Observable 4-vector (|E_x|^2, |E_y|^2, 2Re E_xE_y*, 2Im E_xE_y*);
    broadcasts over arrays, stacking on the last axis."""
    ex = np.asarray(ex)
    ey = np.asarray(ey)
    p = ex * np.conj(ey)
    return np.stack(
        [np.abs(ex) ** 2, np.abs(ey) ** 2, 2.0 * p.real, 2.0 * p.imag], axis=-1
    )


def stokes_matrix(channel: JonesChannel) -> StokesMatrix:
    """4x4 matrix mapping the transmit observable vector to the received one."""
    a, b = channel.a, channel.b
    ab_conj = a * np.conj(b)
    ab = a * b
    a2 = a * a
    b2 = b * b
    m = np.array(
        [
            [abs(a) ** 2, abs(b) ** 2, ab_conj.real, -ab_conj.imag],
            [abs(b) ** 2, abs(a) ** 2, -ab_conj.real, ab_conj.imag],
            [-2.0 * ab.real, 2.0 * ab.real, a2.real - b2.real, -(a2.imag + b2.imag)],
            [-2.0 * ab.imag, 2.0 * ab.imag, a2.imag - b2.imag, a2.real + b2.real],
        ]
    )
    return StokesMatrix(m)


# the observable basis weights intensities and beats differently, so the
# rotation is orthogonal only after rescaling: m @ G @ m.T == G, equivalently
# D^-1 m D is orthogonal with D = sqrt(G)
STOKES_METRIC = np.diag([0.5, 0.5, 1.0, 1.0])


def osnr_to_sigma2(osnr_db: float) -> float:
    """Per-quadrature noise variance at a given OSNR for unit average signal
    energy; total noise energy per slot is 4*sigma2 over both polarizations."""
    return 10.0 ** (-osnr_db / 10.0) / 4.0
