"""Channel estimation, Gaussian-approximated ML detection of the per-slot
dimensions, and successive detection of the inter-slot phase dimension.

The photocurrents are quadratic in the received fields, so their conditional
law under additive complex Gaussian noise is not Gaussian.  The detectors use
a Gaussian surrogate with the exact conditional mean and covariance, which are
available in closed form given the noiseless received fields (K_x, K_y):

    E[w1] = 2s + |K_x|^2,   E[w2] = 2s + |K_y|^2,
    E[w3 + i w4] = 2 K_x K_y*,
    Var(w1) = 4s^2 + 4s|K_x|^2,  Var(w3) = Var(w4) = 8s^2 + 4s(|K_x|^2+|K_y|^2),
    Cov(w1, w3) = Cov(w2, w3) = 4s|K_x||K_y|cos(delta), etc.   (s = sigma2)

The delayed beat pair (w5, w6) obeys the same structure with K_y replaced by
the previous slot's K_y, its covariance reducing to a scalar times I_2.

Per-slot detection enumerates all magnitude/intra-phase hypotheses; the
inter-slot phase is then detected successively, conditioned on those decisions
and on the previous slot (its decided values, or the true ones in genie mode).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import JonesChannel, apply_jones, propagate_block
from .constellation import DualPolSymbol, RingPskConstellation, SymbolIndices
from .frontend import FrontendOutputs, frontend_full_block

# below this beat-mean amplitude the inter-slot phase hypotheses coincide and
# the slot is flagged as an erasure
ERASURE_TOL = 1e-12


@dataclass
class GaussianStats:
    """Mean vector and covariance of an observation block conditioned on the
    noiseless received fields."""

    mean: np.ndarray
    cov: np.ndarray


def _stats123(kx, ky, sigma2):
    ax2 = np.abs(kx) ** 2
    ay2 = np.abs(ky) ** 2
    cross = kx * np.conj(ky)  # |K_x||K_y| e^{i delta}
    mean = np.stack(
        [2.0 * sigma2 + ax2, 2.0 * sigma2 + ay2, 2.0 * cross.real, 2.0 * cross.imag],
        axis=-1,
    )
    s4 = 4.0 * sigma2 * sigma2
    c = 4.0 * sigma2
    cov = np.zeros(np.shape(ax2) + (4, 4))
    cov[..., 0, 0] = s4 + c * ax2
    cov[..., 1, 1] = s4 + c * ay2
    cov[..., 2, 2] = 2.0 * s4 + c * (ax2 + ay2)
    cov[..., 3, 3] = cov[..., 2, 2]
    re = c * cross.real
    im = c * cross.imag
    for i in (0, 1):
        cov[..., i, 2] = re
        cov[..., 2, i] = re
        cov[..., i, 3] = im
        cov[..., 3, i] = im
    return mean, cov


def gaussian_stats_dims123(kx: complex, ky: complex, sigma2: float) -> GaussianStats:
    """Exact mean and covariance of (w1, w2, w3, w4) given the noiseless
    received fields of the slot."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    mean, cov = _stats123(np.asarray(kx), np.asarray(ky), sigma2)
    return GaussianStats(mean, cov)


def gaussian_stats_dim4(kx_now: complex, ky_prev: complex, sigma2: float) -> GaussianStats:
    """Exact mean and (isotropic) covariance of (w5, w6) given the current
    X field and the previous slot's Y field."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    cross = np.asarray(kx_now) * np.conj(np.asarray(ky_prev))
    mean = np.stack([2.0 * cross.real, 2.0 * cross.imag], axis=-1)
    var = 8.0 * sigma2 * sigma2 + 4.0 * sigma2 * (
        np.abs(kx_now) ** 2 + np.abs(ky_prev) ** 2
    )
    return GaussianStats(mean, float(var) * np.eye(2))


@dataclass
class Decision:
    """Per-slot decision; the inter-slot index of ``indices`` and the field
    attributes are finalized by the successive pass."""

    indices: SymbolIndices
    e_now: Optional[DualPolSymbol] = None  # reconstructed transmit fields
    k_now: Optional[DualPolSymbol] = None  # fields after the (estimated) rotation
    log_likelihoods: Optional[np.ndarray] = None


@dataclass
class _HypothesisBank:
    """Per-(channel, constellation) tables for the per-slot detector."""

    triples: np.ndarray  # (H, 3) in canonical rx-major order
    ex: np.ndarray
    ey: np.ndarray
    means: np.ndarray  # (H, 4)
    icovs: Optional[np.ndarray]
    logdets: Optional[np.ndarray]


def _build_bank(channel: JonesChannel, constellation: RingPskConstellation) -> _HypothesisBank:
    nr, nph = constellation.n_rings, constellation.n_phases
    triples = np.array(
        [(rx, ry, t) for rx in range(nr) for ry in range(nr) for t in range(nph)],
        dtype=np.int64,
    )
    radii = np.asarray(constellation.radii)
    # any absolute phase consistent with theta works: the statistics depend on
    # the hypothesis only through (|K_x|, |K_y|, delta)
    ex = radii[triples[:, 0]].astype(complex)
    ey = radii[triples[:, 1]] * np.exp(-1j * constellation.phase_step * triples[:, 2])
    kx, ky = apply_jones(channel, ex, ey)
    means, covs = _stats123(kx, ky, channel.sigma2)
    if channel.sigma2 > 0.0:
        icovs = np.linalg.inv(covs)
        logdets = np.linalg.slogdet(covs)[1]
    else:
        icovs = None
        logdets = None
    return _HypothesisBank(triples, ex, ey, means, icovs, logdets)


def _bank_scores(bank: _HypothesisBank, obs: np.ndarray) -> np.ndarray:
    diffs = obs[:, None, :] - bank.means[None, :, :]
    if bank.icovs is None:
        # degenerate covariance at sigma2 = 0: nearest-mean decision
        return -np.einsum("nhi,nhi->nh", diffs, diffs)
    quad = np.einsum("nhi,hij,nhj->nh", diffs, bank.icovs, diffs)
    return -0.5 * (quad + bank.logdets[None, :])


def detect_dims123_block(obs: np.ndarray, channel: JonesChannel, constellation: RingPskConstellation):
    """Vectorized per-slot detection of (ring_x, ring_y, intra-phase).

    ``obs`` is (n, 4) rows of (w1, w2, w3, w4).  Returns the decided (n, 3)
    index array and the (n, H) log-likelihood table.
    """
    obs = np.asarray(obs, dtype=float)
    bank = _build_bank(channel, constellation)
    scores = _bank_scores(bank, obs)
    best = scores.argmax(axis=1)  # ties resolve to the lowest hypothesis index
    return bank.triples[best], scores


def detect_dims123(obs, channel: JonesChannel, constellation: RingPskConstellation) -> Decision:
    """Gaussian-surrogate ML decision of the three per-slot dimensions for one
    observation (a FrontendOutputs or a length-4 array of w1..w4)."""
    if isinstance(obs, FrontendOutputs):
        vec = np.array([obs.w1, obs.w2, obs.w3, obs.w4])
    else:
        vec = np.asarray(obs, dtype=float)[:4]
    bank = _build_bank(channel, constellation)
    scores = _bank_scores(bank, vec[None, :])[0]
    h = int(scores.argmax())
    rx, ry, t = (int(v) for v in bank.triples[h])
    ex, ey = complex(bank.ex[h]), complex(bank.ey[h])
    kx, ky = apply_jones(channel, ex, ey)
    return Decision(
        SymbolIndices(rx, ry, t, 0),
        e_now=DualPolSymbol(ex, ey),
        k_now=DualPolSymbol(complex(kx), complex(ky)),
        log_likelihoods=scores,
    )


def ell_vector(channel: JonesChannel) -> np.ndarray:
    """Coefficients of the four transmit beat terms in F_x[n]F_y*[n-1]:
    (a^2, -b^2, -ab, ab) applied to
    (E_xE_y'*, E_yE_x'*, E_xE_x'*, E_yE_y'*), primes denoting slot n-1."""
    a, b = channel.a, channel.b
    return np.array([a * a, -b * b, -a * b, a * b])


def context_vectors(constellation: RingPskConstellation, rx, ry, t) -> np.ndarray:
    """Known-context beat vectors for consecutive decided slots.

    Given decided index arrays of length n, returns the (n-1, 4) matrix whose
    row k collects the transmit beat terms of slots k+1 and k with the
    inter-slot phase factored out; ell_vector(channel) @ row is the complex
    gain multiplying exp(i*eta) in the noiseless delayed beat.
    """
    radii = np.asarray(constellation.radii)
    step = constellation.phase_step
    rx = np.asarray(rx, dtype=np.int64)
    ry = np.asarray(ry, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    rxn = radii[rx[1:]]
    ryn = radii[ry[1:]]
    rxp = radii[rx[:-1]]
    ryp = radii[ry[:-1]]
    thn = step * t[1:]
    thp = step * t[:-1]
    v = np.empty((len(rxn), 4), dtype=complex)
    v[:, 0] = rxn * ryp
    v[:, 1] = ryn * rxp * np.exp(-1j * (thn + thp))
    v[:, 2] = rxn * rxp * np.exp(-1j * thp)
    v[:, 3] = ryn * ryp * np.exp(-1j * thn)
    return v


def detect_dim4_block(w56: np.ndarray, gain: np.ndarray, constellation: RingPskConstellation):
    """Vectorized inter-slot phase decision.

    ``w56`` holds w5 + i*w6 per slot (slot 0 excluded), ``gain`` the matching
    ell^T v values.  The candidate means 2*gain*exp(i*c*step) share one
    covariance, so the ML rule reduces to the nearest mean; erased slots
    (vanishing gain) are marked -1.
    """
    phases = np.exp(1j * constellation.phase_step * np.arange(constellation.n_phases))
    dist = np.abs(w56[:, None] - 2.0 * gain[:, None] * phases[None, :]) ** 2
    decided = dist.argmin(axis=1).astype(np.int64)
    erased = 2.0 * np.abs(gain) < ERASURE_TOL
    decided[erased] = -1
    return decided, erased


def detect_dim4(
    w5: float,
    w6: float,
    decided_now: Decision,
    decided_prev: Decision,
    channel: JonesChannel,
    constellation: RingPskConstellation,
) -> Optional[int]:
    """Successive decision of the inter-slot phase index for one slot.

    Builds candidate transmit fields from the decided per-slot dimensions and
    the previous slot's reconstructed fields, maps them through the rotation,
    and scores (w5, w6) under the Gaussian surrogate.  Returns None when the
    beat mean vanishes (the hypotheses coincide: an erasure).
    """
    prev = decided_prev.e_now
    if prev is None:
        raise ValueError("decided_prev must carry reconstructed transmit fields")
    radii = constellation.radii
    step = constellation.phase_step
    idx = decided_now.indices
    mag_x = radii[idx.rx]
    mag_y = radii[idx.ry]
    base = cmath.phase(prev.ey)
    ky_prev = -channel.b.conjugate() * prev.ex + channel.a.conjugate() * prev.ey
    obs = np.array([w5, w6])
    best = None
    best_score = -math.inf
    for cand in range(constellation.n_phases):
        phase_x = base + cand * step
        ex = mag_x * cmath.exp(1j * phase_x)
        ey = mag_y * cmath.exp(1j * (phase_x - idx.t * step))
        kx = channel.a * ex + channel.b * ey
        if cand == 0 and 2.0 * abs(kx) * abs(ky_prev) < ERASURE_TOL:
            return None
        stats = gaussian_stats_dim4(kx, ky_prev, channel.sigma2)
        var = stats.cov[0, 0]
        dist2 = float(((obs - stats.mean) ** 2).sum())
        score = -dist2 if var == 0.0 else -0.5 * dist2 / var - math.log(var)
        if score > best_score:
            best_score = score
            best = cand
    return best


# --- training-based channel estimation -------------------------------------

TRAINING_PILOTS = (
    DualPolSymbol(1.0 + 0.0j, 0.0 + 0.0j),
    DualPolSymbol(1.0 + 0.0j, 1.0 + 0.0j),
    DualPolSymbol(1.0j, 1.0 + 0.0j),
)


@dataclass(frozen=True)
class ChannelEstimate:
    """Rotation estimate with the overall sign fixed canonically; ``residual``
    is the L2 misfit of the averaged training observables."""

    a_hat: complex
    b_hat: complex
    residual: float

    def as_channel(self, sigma2: float) -> JonesChannel:
        norm = math.sqrt(abs(self.a_hat) ** 2 + abs(self.b_hat) ** 2)
        return JonesChannel(self.a_hat / norm, self.b_hat / norm, sigma2)


def run_training(channel: JonesChannel, repeats: int, rng: np.random.Generator) -> list[FrontendOutputs]:
    """Transmit each training pilot ``repeats`` times and average the
    photocurrents; returns one averaged FrontendOutputs per pilot."""
    if repeats < 1:
        raise ValueError("repeats must be positive")
    averaged = []
    for i, pilot in enumerate(TRAINING_PILOTS):
        ex = np.full(repeats, pilot.ex, dtype=complex)
        ey = np.full(repeats, pilot.ey, dtype=complex)
        fx, fy, _, _ = propagate_block(channel, ex, ey, rng)
        w = frontend_full_block(fx, fy).mean(axis=0)
        averaged.append(FrontendOutputs(*w, n=i))
    return averaged


def _canonical_sign(a: complex, b: complex):
    # the overall sign of (a, b) is unobservable; pin the first significant
    # component of (Re a, Im a, Re b, Im b) to be positive
    for val in (a.real, a.imag, b.real, b.imag):
        if abs(val) > 1e-9:
            return (a, b) if val > 0 else (-a, -b)
    return a, b


def estimate_channel(training_obs: Sequence[FrontendOutputs]) -> ChannelEstimate:
    """Solve for the rotation from the averaged pilot observables.

    The beat samples are unbiased: pilot 1 gives -ab, pilots 2 and 3 give
    a^2 - b^2 and i(a^2 + b^2), fixing both squared parameters and their
    relative phase.  The pair is anchored on the larger of a^2, b^2, then
    normalized; intensities enter only through the reported residual.
    """
    if len(training_obs) != 3:
        raise ValueError("expected averaged observables for the three pilots")
    o1, o2, o3 = training_obs
    beats = [complex(o.w3, o.w4) / 2.0 for o in (o1, o2, o3)]
    ab = -beats[0]
    a2 = (beats[1] + beats[2] / 1j) / 2.0
    b2 = (beats[2] / 1j - beats[1]) / 2.0
    if abs(a2) >= abs(b2):
        a = cmath.sqrt(a2)
        b = ab / a if abs(a) > 1e-12 else cmath.sqrt(b2)
    else:
        b = cmath.sqrt(b2)
        a = ab / b
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if norm == 0.0:
        raise ValueError("training observables are degenerate")
    a, b = _canonical_sign(a / norm, b / norm)

    model = JonesChannel(a, b, 0.0)
    sq_err = 0.0
    for obs, pilot in zip(training_obs, TRAINING_PILOTS):
        kx, ky = apply_jones(model, pilot.ex, pilot.ey)
        cross = kx * np.conj(ky)
        predicted = np.array(
            [abs(kx) ** 2, abs(ky) ** 2, 2.0 * cross.real, 2.0 * cross.imag]
        )
        observed = np.array([obs.w1, obs.w2, obs.w3, obs.w4])
        sq_err += float(((observed - predicted) ** 2).sum())
    return ChannelEstimate(a, b, math.sqrt(sq_err))


def gauge_aligned_error(estimate: ChannelEstimate, channel: JonesChannel) -> float:
    """Worst-component estimation error after resolving the unobservable
    overall sign."""
    errs = []
    for s in (1.0, -1.0):
        errs.append(
            max(abs(s * estimate.a_hat - channel.a), abs(s * estimate.b_hat - channel.b))
        )
    return min(errs)


# --- successive receiver ----------------------------------------------------


@dataclass
class ReceiverResult:
    """Decided index array (n, 4) with per-slot erasure flags.

    Slot 0 is the pilot: its per-slot dimensions are detected blind like any
    other slot, its inter-slot entry is a placeholder, and the inter-slot
    conditioning chain starts from the known pilot values.
    """

    indices: np.ndarray
    erasures: np.ndarray
    mode: str


def frames_to_array(frames) -> np.ndarray:
    if isinstance(frames, np.ndarray):
        return frames
    return np.array([f.as_array() for f in frames])


def run_successive_receiver(
    frames,
    channel: JonesChannel,
    constellation: RingPskConstellation,
    pilot: SymbolIndices,
    *,
    genie_indices: Optional[np.ndarray] = None,
) -> ReceiverResult:
    """Two-stage detection of a frame: per-slot dimensions first, then the
    inter-slot phase conditioned on the decided (or, in genie mode, true)
    values of the current and previous slot.

    ``frames`` is (n, 6) samples or a list of FrontendOutputs; slot 0 must be
    the known pilot.  Passing ``genie_indices`` (the true (n, 4) indices)
    replaces the decision-directed conditioning to isolate the last stage from
    error propagation.
    """
    arr = frames_to_array(frames)
    if arr.ndim != 2 or arr.shape[1] != 6 or arr.shape[0] < 2:
        raise ValueError("expected at least two slots of six samples")
    obs123 = arr[:, :4]
    w56 = arr[:, 4] + 1j * arr[:, 5]
    decided, _ = detect_dims123_block(obs123, channel, constellation)

    if genie_indices is not None:
        cond = np.asarray(genie_indices, dtype=np.int64)[:, :3]
        mode = "genie"
    else:
        cond = decided.copy()
        cond[0] = (pilot.rx, pilot.ry, pilot.t)
        mode = "decision-directed"

    v = context_vectors(constellation, cond[:, 0], cond[:, 1], cond[:, 2])
    gain = v @ ell_vector(channel)
    eta, erased = detect_dim4_block(w56[1:], gain, constellation)

    out = np.empty((len(arr), 4), dtype=np.int64)
    out[:, :3] = decided
    out[0, 3] = 0
    out[1:, 3] = eta
    erasures = np.zeros(len(arr), dtype=bool)
    erasures[1:] = erased
    return ReceiverResult(out, erasures, mode)
