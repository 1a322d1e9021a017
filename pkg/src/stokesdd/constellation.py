"""Ring-PSK alphabet on two polarizations and its recursive phase encoder.

Each slot carries four quantities: the field magnitude on each polarization
(a ring index per polarization), the intra-slot phase difference between the
two polarizations, and the phase difference between the current X field and
the previous Y field.  The last quantity is differential, so a sequence is
generated recursively from an initial phase reference; the first slot has no
predecessor and its inter-slot index is ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

# near-exact distance ties resolve toward the lower index; the tolerance only
# absorbs rounding of analytically-equal distances
_TIE_TOL = 64.0 * np.finfo(float).eps


@dataclass(frozen=True)
class DualPolSymbol:
    """Complex field pair on the X and Y polarizations of one slot."""

    ex: complex
    ey: complex


@dataclass(frozen=True)
class SymbolIndices:
    """Index tuple selecting one point in the four information dimensions."""

    rx: int  # ring of |E_x|
    ry: int  # ring of |E_y|
    t: int   # grid index of arg(E_x E_y*), intra-slot
    e: int   # grid index of arg(E_x[n] E_y*[n-1]), inter-slot


@dataclass(frozen=True)
class RingPskConstellation:
    """Amplitude rings with equally spaced squared radii and a common phase grid.

    Radii are scaled so the uniform average of |E_x|^2 + |E_y|^2 over all index
    tuples equals one, which pins the OSNR reference.
    """

    n_rings: int
    n_phases: int
    radii: tuple
    phase_step: float

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.n_rings**2 * self.n_phases**2)

    @property
    def size(self) -> int:
        return self.n_rings**2 * self.n_phases**2


def build_constellation(n_rings: int, n_phases: int) -> RingPskConstellation:
    """Build an amplitude-ring/PSK alphabet with unit average total energy.

    Squared radii are proportional to 1..n_rings; the mean of k/(n_rings+1)
    over k is 1/2 per polarization, so the two-polarization average energy is
    exactly one.
    """
    if n_rings < 1:
        raise ValueError("n_rings must be a positive integer")
    if n_phases < 1:
        raise ValueError("n_phases must be a positive integer")
    scale = 1.0 / (n_rings + 1)
    radii = tuple(math.sqrt(scale * k) for k in range(1, n_rings + 1))
    return RingPskConstellation(n_rings, n_phases, radii, TWO_PI / n_phases)


def wrap_angle(phi):
    """Wrap angles to [-pi, pi)."""
    return (np.asarray(phi) + math.pi) % TWO_PI - math.pi


def encode_indices(constellation: RingPskConstellation, idx, initial_ey_phase: float = 0.0):
    """Map an (n, 4) integer index array to transmit field arrays (ex, ey).

    Recursion: arg(E_x[n]) = e[n]*step + arg(E_y[n-1]) and
    arg(E_y[n]) = arg(E_x[n]) - t[n]*step.  Slot 0 anchors arg(E_y[0]) to
    ``initial_ey_phase`` and ignores its inter-slot index.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 2 or idx.shape[1] != 4 or idx.shape[0] == 0:
        raise ValueError("expected a nonempty (n, 4) index array")
    if (idx < 0).any() or (idx[:, :2] >= constellation.n_rings).any() or (
        idx[:, 2:] >= constellation.n_phases
    ).any():
        raise ValueError("symbol index out of range")
    step = constellation.phase_step
    radii = np.asarray(constellation.radii)
    phase_y = np.empty(len(idx))
    phase_y[0] = initial_ey_phase
    if len(idx) > 1:
        # arg(E_y) advances by (e - t)*step per slot
        phase_y[1:] = initial_ey_phase + np.cumsum((idx[1:, 3] - idx[1:, 2]) * step)
    phase_x = phase_y + idx[:, 2] * step
    ex = radii[idx[:, 0]] * np.exp(1j * phase_x)
    ey = radii[idx[:, 1]] * np.exp(1j * phase_y)
    return ex, ey


def encode_sequence(
    constellation: RingPskConstellation,
    indices: Sequence[SymbolIndices],
    initial_ey_phase: float = 0.0,
) -> list[DualPolSymbol]:
    """Encode a sequence of index tuples into dual-polarization fields."""
    idx = np.array([(s.rx, s.ry, s.t, s.e) for s in indices], dtype=np.int64)
    ex, ey = encode_indices(constellation, idx, initial_ey_phase)
    return [DualPolSymbol(complex(x), complex(y)) for x, y in zip(ex, ey)]


def dimension_values(symbol: DualPolSymbol, prev: DualPolSymbol | None = None):
    """Extract (|E_x|, |E_y|, theta, eta) from fields; eta is None without a
    previous slot."""
    theta = math.atan2((symbol.ex * symbol.ey.conjugate()).imag, (symbol.ex * symbol.ey.conjugate()).real)
    eta = None
    if prev is not None:
        beat = symbol.ex * prev.ey.conjugate()
        eta = math.atan2(beat.imag, beat.real)
    return abs(symbol.ex), abs(symbol.ey), theta, eta


def _first_within(dist: np.ndarray, tol: float) -> np.ndarray:
    dmin = dist.min(axis=-1, keepdims=True)
    return np.asarray(dist <= dmin + tol).argmax(axis=-1)


def nearest_indices_block(constellation: RingPskConstellation, ex_mag, ey_mag, theta, eta):
    """Vectorized hard decision; returns an (n, 4) index array."""
    ex_mag = np.atleast_1d(np.asarray(ex_mag, dtype=float))
    ey_mag = np.atleast_1d(np.asarray(ey_mag, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    radii = np.asarray(constellation.radii)
    step = constellation.phase_step
    grid = step * np.arange(constellation.n_phases)

    mag_tol = _TIE_TOL * max(1.0, radii[-1])
    ang_tol = _TIE_TOL * TWO_PI
    out = np.empty((len(ex_mag), 4), dtype=np.int64)
    out[:, 0] = _first_within(np.abs(ex_mag[:, None] - radii[None, :]), mag_tol)
    out[:, 1] = _first_within(np.abs(ey_mag[:, None] - radii[None, :]), mag_tol)
    out[:, 2] = _first_within(np.abs(wrap_angle(theta[:, None] - grid[None, :])), ang_tol)
    out[:, 3] = _first_within(np.abs(wrap_angle(eta[:, None] - grid[None, :])), ang_tol)
    return out


def nearest_indices(
    constellation: RingPskConstellation,
    ex_mag: float,
    ey_mag: float,
    theta: float,
    eta: float,
) -> SymbolIndices:
    """Hard decision: nearest ring per magnitude, circularly nearest phase per
    angle, near-exact ties toward the lower index."""
    if ex_mag < 0 or ey_mag < 0:
        raise ValueError("magnitudes must be nonnegative")
    row = nearest_indices_block(constellation, ex_mag, ey_mag, theta, eta)[0]
    return SymbolIndices(int(row[0]), int(row[1]), int(row[2]), int(row[3]))
