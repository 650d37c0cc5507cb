"""Photon statistics of squeezed vacuum after uniform loss, by Fock truncation.

Uniform transmission commutes with any passive network, so loss in front of
the interferometer is the same as binomial thinning of every output mode.
The lossy law is therefore a finite mixture of lossless Hafnian
probabilities,

    p_eta(k) = sum_{j >= k} p(j) prod_i C(j_i, k_i) eta^k_i (1 - eta)^(j_i - k_i),

truncated at a total photon number `cutoff`. The neglected weight is bounded
by the probability that the lossless state holds more than `cutoff` photons,
which depends only on the squeezing parameters.
"""

from __future__ import annotations

import numba
import numpy as np
from scipy.special import gammaln

from ..matkernels import HAFNIAN_CAP, CapExceededError, hafnian_abs2_batch
from .patterns import pattern_array

DEFAULT_CUTOFF = 10


def total_photon_distribution(xi, cutoff: int) -> np.ndarray:
    """P(N) for N = 0..cutoff total photons emitted by independent squeezers."""
    out = np.zeros(cutoff + 1)
    out[0] = 1.0
    for x in np.asarray(xi, dtype=float):
        single = np.zeros(cutoff + 1)
        pairs = np.arange(cutoff // 2 + 1)
        logp = (
            gammaln(2 * pairs + 1) - 2 * gammaln(pairs + 1) - pairs * np.log(4.0)
            - np.log(np.cosh(x))
        )
        t2 = np.tanh(x) ** 2
        single[2 * pairs] = np.exp(logp) * t2**pairs if t2 > 0 else (pairs == 0).astype(float)
        out = np.convolve(out, single)[: cutoff + 1]
    return out


def truncation_error_bound(xi, cutoff: int) -> float:
    """Probability mass above `cutoff` photons; bounds the total truncation error."""
    return float(max(0.0, 1.0 - total_photon_distribution(xi, cutoff).sum()))


def _check_cutoff(cutoff: int) -> None:
    if cutoff > HAFNIAN_CAP:
        raise CapExceededError(f"photon cutoff {cutoff} exceeds the Hafnian cap {HAFNIAN_CAP}")


def _pure_probs(parent, pats: np.ndarray) -> np.ndarray:
    logfact = gammaln(pats + 1.0).sum(axis=1)
    return hafnian_abs2_batch(parent.kernel_b, pats) * np.exp(-logfact) * parent.vacuum_probability


def _log_binom_weight(j: np.ndarray, k: np.ndarray) -> np.ndarray:
    return (gammaln(j + 1.0) - gammaln(k + 1.0) - gammaln(j - k + 1.0)).sum(axis=-1)


def lossy_probability(state, pattern, cutoff: int = DEFAULT_CUTOFF) -> float:
    """Single-pattern probability of a loss-degraded squeezed state."""
    _check_cutoff(cutoff)
    k = np.asarray(pattern, dtype=np.int64)
    n = int(k.sum())
    if n > cutoff:
        raise ValueError(f"pattern has {n} photons, above the truncation cutoff {cutoff}")
    eta = state.eta
    if eta == 0.0:
        return float(n == 0)
    total = 0.0
    for s in range(n % 2, cutoff - n + 1, 2):
        extras = pattern_array(k.size, s, "fixed-n")
        j = extras + k
        w = np.exp(_log_binom_weight(j, k)) * _pure_probs(state.parent, j)
        total += eta**n * (1 - eta) ** s * w.sum()
    return float(total)


@numba.njit(cache=True)
def _push_forward(pure_pats, pure_probs, codes, base, max_drop, out):
    # accumulate p(j) * prod C(j_i, k_i) into out[target(k), |j| - |k|]
    m = pure_pats.shape[1]
    k = np.zeros(m, dtype=np.int64)
    for r in range(pure_pats.shape[0]):
        j = pure_pats[r]
        p = pure_probs[r]
        if p == 0.0:
            continue
        jt = 0
        for i in range(m):
            k[i] = 0
            jt += j[i]
        while True:
            code = 0
            kt = 0
            mult = 1.0
            for i in range(m - 1, -1, -1):
                code = code * base + k[i]
                kt += k[i]
            if jt - kt <= max_drop:
                pos = np.searchsorted(codes, code)
                if pos < codes.shape[0] and codes[pos] == code:
                    for i in range(m):
                        # binomial coefficient C(j_i, k_i)
                        c = 1.0
                        for t in range(k[i]):
                            c = c * (j[i] - t) / (t + 1)
                        mult *= c
                    out[pos, jt - kt] += p * mult
            # odometer over 0 <= k <= j
            i = 0
            while i < m:
                if k[i] < j[i]:
                    k[i] += 1
                    break
                k[i] = 0
                i += 1
            if i == m:
                break


def thinning_coefficients(parent, targets, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Matrix M with p_eta(k_t) = eta^|k_t| * sum_s (1 - eta)^s * M[t, s].

    One pass over all lossless patterns up to `cutoff` photons serves every
    transmission value, which is what parameter sweeps need.
    """
    _check_cutoff(cutoff)
    targets = np.asarray(targets, dtype=np.int64)
    m = parent.m
    base = cutoff + 1
    if m * np.log(base) >= 62 * np.log(2):
        raise ValueError(f"too many modes ({m}) for batch truncation at cutoff {cutoff}")
    weights = base ** np.arange(m, dtype=np.int64)
    codes = targets @ weights
    order = np.argsort(codes)
    sorted_codes = np.ascontiguousarray(codes[order])
    n_min = int(targets.sum(axis=1).min()) if len(targets) else 0
    out_sorted = np.zeros((len(targets), cutoff + 1))
    for total in range(n_min + (n_min % 2), cutoff + 1, 2):
        pats = pattern_array(m, total, "fixed-n")
        probs = _pure_probs(parent, pats)
        _push_forward(pats, probs, sorted_codes, base, cutoff, out_sorted)
    out = np.empty_like(out_sorted)
    out[order] = out_sorted
    return out


def lossy_probabilities(state, targets, cutoff: int = DEFAULT_CUTOFF, etas=None) -> np.ndarray:
    """Probabilities of many patterns; with `etas`, one row per transmission.

    `state` may be lossy or the lossless parent itself when `etas` is given.
    """
    targets = np.asarray(targets, dtype=np.int64)
    if len(targets) and targets.sum(axis=1).max() > cutoff:
        raise ValueError("target pattern exceeds the truncation cutoff")
    parent = state.parent if state.parent is not None else state
    coeff = thinning_coefficients(parent, targets, cutoff)
    n = targets.sum(axis=1)
    single = etas is None
    etas = np.atleast_1d(state.eta if single else np.asarray(etas, dtype=float))
    s = np.arange(cutoff + 1)
    rows = []
    for eta in etas:
        if eta == 0.0:
            rows.append((n == 0).astype(float))
            continue
        rows.append(eta**n * (coeff @ (1 - eta) ** s))
    res = np.array(rows)
    return res[0] if single else res
