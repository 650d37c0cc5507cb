"""Resource and noise analyses: event rates, SNR, circuit-size optimisation, loss."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .circuits import haar_random_unitary, transfer_matrix
from .distributions import Domain, gbs_probabilities, lossy_probabilities
from .gaussian import squeezed_state

ONE_PER_WEEK = 1.0 / (7 * 24 * 3600)


@dataclass(frozen=True)
class RateParams:
    r0: float = 5e8
    eta_det: float = 0.8
    eta_ch: float = 0.64
    eta_u: float = 0.9995
    xi: float = 0.17
    k: int = 100
    m: int = 100

    def __post_init__(self):
        for name in ("eta_det", "eta_ch", "eta_u"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.r0 <= 0:
            raise ValueError("repetition rate must be positive")
        if self.xi < 0 or self.k < 1 or self.m < 1:
            raise ValueError("need xi >= 0 and at least one source and mode")

    def sized(self, k: int) -> "RateParams":
        """Same technology with k sources feeding a k-mode circuit."""
        return replace(self, k=k, m=k)


PRESETS = {
    "spiral": RateParams(xi=0.17, eta_ch=0.64),
    "spiral-integrated": RateParams(xi=0.17, eta_ch=1.0),
    "ring": RateParams(xi=0.31, eta_ch=0.64),
    "ring-integrated": RateParams(xi=0.31, eta_ch=1.0),
}


def log_binom(n: float, r: float) -> float:
    """log C(n, r), valid for non-integer n."""
    return float(gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1))


def _log_or_ninf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def log_event_rate(protocol: str, n: int, p: RateParams) -> float:
    if n < 0 or n > p.k:
        raise ValueError(f"need 0 <= n <= k, got n={n}, k={p.k}")
    lt = _log_or_ninf(math.tanh(p.xi))
    lsech = -math.log(math.cosh(p.xi))
    lu = _log_or_ninf(p.eta_u) * p.m * n
    if protocol == "sbs":
        gen = log_binom(p.k, n) + 2 * n * lt + 2 * p.k * lsech
        return math.log(p.r0) + gen + lu + 2 * n * (_log_or_ninf(p.eta_ch) + _log_or_ninf(p.eta_det))
    if protocol == "gbs":
        if n % 2:
            raise ValueError("GBS events carry an even photon number")
        gen = log_binom(p.k / 2 + n / 2 - 1, n / 2) + n * lt + p.k * lsech
        return math.log(p.r0) + gen + lu + n * (_log_or_ninf(p.eta_ch) + _log_or_ninf(p.eta_det))
    raise ValueError(f"unknown protocol {protocol!r}")


def event_rate(protocol: str, n: int, params: RateParams) -> float:
    """Rate (Hz) of n-signal-photon events from k uniform sources in an m-mode circuit.

    SBS counts the heralding idlers too, so channel and detector losses
    enter with exponent 2n.
    """
    return math.exp(log_event_rate(protocol, n, params))


def standard_bs_rate(n: int, params: RateParams) -> float:
    """n sources each emitting exactly one heralded pair, no combinatorial gain."""
    p = params
    eps = math.tanh(p.xi) ** 2 / math.cosh(p.xi) ** 2
    return p.r0 * eps**n * p.eta_u ** (p.m * n) * (p.eta_ch * p.eta_det) ** (2 * n)


# -- spurious two-mode squeezing noise --------------------------------------


def log_p_sms(k: int, xi: float, pairs: int) -> float:
    """log probability of `pairs` photon pairs from k single-mode squeezers."""
    return log_binom(k / 2 + pairs - 1, pairs) - k * math.log(math.cosh(xi)) + 2 * pairs * math.log(math.tanh(xi))


def log_p_tms(k: int, xi: float, photons: int) -> float:
    """log probability of `photons` signal photons from k two-mode squeezers."""
    return log_binom(k, photons) - 2 * k * math.log(math.cosh(xi)) + 2 * photons * math.log(math.tanh(xi))


def snr_gbs(n_pairs: int, k: int, xi: float) -> float:
    """Ratio of pure single-mode-squeezer events to events with spurious pairs."""
    if xi <= 0:
        raise ValueError("SNR is undefined without squeezing")
    if n_pairs < 1 or k < 1:
        raise ValueError("need at least one pair and one source")
    t2 = math.tanh(xi) ** 2
    num = log_binom(k / 2 + n_pairs - 1, n_pairs) + 4 * k * math.log(math.cosh(xi))
    den = logsumexp(
        [log_binom(k / 2 + n_pairs - m - 1, n_pairs - m) + log_binom(2 * k, 2 * m) + m * math.log(t2) for m in range(1, n_pairs + 1)]
    )
    return math.exp(num - den)


def snr_gbs_composed(n_pairs: int, k: int, xi: float) -> float:
    """Same ratio assembled from the source photon-number laws."""
    if xi <= 0:
        raise ValueError("SNR is undefined without squeezing")
    signal = log_p_sms(k, xi, n_pairs)
    noise = logsumexp([log_p_sms(k, xi, n_pairs - m) + log_p_tms(2 * k, xi, 2 * m) for m in range(1, n_pairs + 1)])
    return math.exp(signal - noise)


# -- quantum-dot comparison --------------------------------------------------


def demux_transmission(n: int, eta_switch: float) -> float:
    """Transmission of a log-depth switching tree delivering n photons."""
    if n < 1:
        raise ValueError("need at least one photon")
    return eta_switch ** (n * math.ceil(math.log2(n))) if n > 1 else 1.0


def qd_demux_rate(
    n: int,
    p_qd: float = 0.65,
    r0_qd: float = 76e6,
    eta_switch: float = 0.995,
    m: int = 100,
    eta_u: float = 0.9995,
    eta_det: float = 0.8,
    eta_ch: float = 1.0,
) -> float:
    """Standard boson sampling fed by a time-demultiplexed quantum-dot source."""
    return r0_qd * p_qd**n * demux_transmission(n, eta_switch) * eta_u ** (m * n) * (eta_ch * eta_det) ** n


# -- circuit size ------------------------------------------------------------


def optimal_circuit_size(
    protocol: str,
    n: int,
    params: RateParams,
    k_range: tuple[int, int] | None = None,
) -> tuple[int, float]:
    """Best k = m over an inclusive integer sweep; ties go to the smaller circuit."""
    lo, hi = k_range if k_range is not None else (n, 1000)
    lo = max(lo, n, 1)
    if hi < lo:
        raise ValueError(f"empty sweep [{lo}, {hi}]")
    ks = np.arange(lo, hi + 1)
    logs = np.array([log_event_rate(protocol, n, params.sized(int(k))) for k in ks])
    i = int(np.argmax(logs))
    return int(ks[i]), float(math.exp(logs[i]))


def max_practical_photons(
    protocol: str,
    params: RateParams,
    threshold: float = ONE_PER_WEEK,
    n_max: int = 200,
    k_max: int = 1000,
) -> int:
    """Largest n whose optimised rate still reaches `threshold` events per second."""
    step = 2 if protocol == "gbs" else 1
    best = 0
    for n in range(step, n_max + 1, step):
        _, rate = optimal_circuit_size(protocol, n, params, (n, k_max))
        if rate >= threshold:
            best = n
    return best


def optimal_rate_table(protocol: str, params: RateParams, ns: Sequence[int], k_max: int = 1000) -> list[tuple[int, int, float]]:
    return [(n, *optimal_circuit_size(protocol, n, params, (n, k_max))) for n in ns]


# -- loss study --------------------------------------------------------------


def statistical_fidelity(p, q) -> float:
    return float(np.sum(np.sqrt(np.asarray(p) * np.asarray(q))))


def central_inputs(m: int, k: int) -> tuple[int, ...]:
    start = (m - k) // 2
    return tuple(range(start, start + k))


def loss_fidelity_study(
    n: int = 4,
    m: int = 12,
    k: int | None = None,
    xi_grid: Sequence[float] = (0.1, 0.3, 0.5),
    eta_grid: Sequence[float] = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5),
    seeds: Sequence[int] = (1, 2, 3),
    extra_photons: int = 4,
) -> list[tuple[float, float, float]]:
    """Mean fidelity between lossy and lossless n-photon collision-free statistics.

    Loss sits in front of the interferometer, k sources drive the central
    inputs of seeded Haar circuits, and both distributions are renormalised
    on the n-photon collision-free sector. Lossy probabilities are truncated
    at n + extra_photons emitted photons. Rows are (xi, eta, mean fidelity).
    """
    k = n if k is None else k
    if k > m:
        raise ValueError("more sources than modes")
    targets = np.array(Domain("collision-free", m, n).patterns(), dtype=np.int64)
    etas = np.asarray(eta_grid, dtype=float)
    fid = np.zeros((len(xi_grid), etas.size))
    for seed in seeds:
        t = transfer_matrix(haar_random_unitary(m, seed, central_inputs(m, k)))
        for a, xi in enumerate(xi_grid):
            pure = squeezed_state(t, [xi] * k)
            ideal = gbs_probabilities(pure, targets)
            ideal = ideal / ideal.sum()
            lossy = lossy_probabilities(pure, targets, n + extra_photons, etas=etas)
            for b in range(etas.size):
                q = lossy[b] / lossy[b].sum()
                fid[a, b] += statistical_fidelity(ideal, q)
    fid /= len(seeds)
    return [(float(xi), float(eta), float(fid[a, b])) for a, xi in enumerate(xi_grid) for b, eta in enumerate(etas)]
