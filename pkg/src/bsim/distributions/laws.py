"""Exact output laws for every input model.

Transfer matrices follow the [input, output] orientation of the circuits
module: row j of T is the output amplitude vector of input j.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from ..circuits import Interferometer, doubled_gbs_circuit, transfer_matrix
from ..gaussian import GaussianState, SqueezerBank, squeezed_state
from ..matkernels import (
    as_complex_matrix,
    as_pattern,
    expand_indices,
    hafnian,
    permanent,
    repeat_submatrix,
)
from .lossy import DEFAULT_CUTOFF, lossy_probability
from .patterns import Domain, enumerate_patterns

LOG_FACTORIAL_THRESHOLD = 15


def factorial_product(pattern: Sequence[int]) -> float:
    """prod k_i!, through log-gamma once any occupation exceeds 15."""
    if max(pattern, default=0) > LOG_FACTORIAL_THRESHOLD:
        return float(np.exp(gammaln(np.asarray(pattern, dtype=float) + 1).sum()))
    return float(math.prod(math.factorial(k) for k in pattern))


def _check_width(pattern, m: int, what: str = "output") -> tuple[int, ...]:
    p = as_pattern(pattern)
    if len(p) != m:
        raise ValueError(f"{what} pattern has {len(p)} modes, expected {m}")
    return p


def _inputs_and_matrix(source) -> np.ndarray:
    if isinstance(source, Interferometer):
        return transfer_matrix(source)
    return as_complex_matrix(source)


# -- Fock inputs -------------------------------------------------------------


def prob_boson_sampling(t, input_pattern, output_pattern) -> float:
    """|Perm T_{j,k}|^2 / (prod j_i! prod k_i!) for Fock input j."""
    t = _inputs_and_matrix(t)
    j = _check_width(input_pattern, t.shape[0], "input")
    k = _check_width(output_pattern, t.shape[1])
    if sum(j) != sum(k):
        raise ValueError(f"photon number mismatch: {sum(j)} in, {sum(k)} out")
    amp = permanent(repeat_submatrix(t, j, k))
    return abs(amp) ** 2 / (factorial_product(j) * factorial_product(k))


def prob_distinguishable(t, input_pattern, output_pattern) -> float:
    """Perm(|T_{j,k}|^2) / (prod j_i! prod k_i!): fully distinguishable photons."""
    t = _inputs_and_matrix(t)
    j = _check_width(input_pattern, t.shape[0], "input")
    k = _check_width(output_pattern, t.shape[1])
    if sum(j) != sum(k):
        raise ValueError(f"photon number mismatch: {sum(j)} in, {sum(k)} out")
    sub = np.abs(repeat_submatrix(t, j, k)) ** 2
    return permanent(sub).real / (factorial_product(j) * factorial_product(k))


def sbs_herald_weights(xi: Sequence[float], n: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Heralded input patterns with exactly n of the sources firing once.

    Weights are normalised over these patterns; each source contributes
    tanh^2 xi when it fires, the common sech^2 factors cancel.
    """
    xi = np.asarray(xi, dtype=float)
    heralds = enumerate_patterns(xi.size, n, "collision-free")
    t2 = np.tanh(xi) ** 2
    w = np.array([np.prod(t2[np.asarray(h, dtype=bool)]) for h in heralds])
    if w.sum() == 0:
        raise ValueError("no source can fire: all squeezing parameters are zero")
    return heralds, w / w.sum()


def heralding_probability(xi: Sequence[float], n: int, max_pairs: int | None = None) -> float:
    """Probability that exactly n sources emit a single pair and the rest nothing.

    Evaluated by summing the joint two-mode-squeezed pair-number law of the
    sources over all outcomes with at most `max_pairs` pairs per source.
    """
    xi = np.asarray(xi, dtype=float)
    if max_pairs is None:
        max_pairs = max(n, 1) + 1
    t2, c2 = np.tanh(xi) ** 2, np.cosh(xi) ** -2
    total = 0.0
    for counts in itertools.product(range(max_pairs + 1), repeat=xi.size):
        c = np.asarray(counts)
        if np.count_nonzero(c == 1) == n and np.all((c == 1) | (c == 0)):
            total += float(np.prod(c2 * t2**c))
    return total


def sbs_enhancement(k: int, n: int, xi: float) -> float:
    """Heralding-rate gain of k sources over an n-source single-shot scheme."""
    return heralding_probability([xi] * k, n) / heralding_probability([xi] * n, n)


# -- Gaussian inputs ---------------------------------------------------------


def prob_gbs(state: GaussianState, output_pattern, cutoff: int = DEFAULT_CUTOFF) -> float:
    """Photon-counting probability of a squeezed-vacuum state.

    Pure states use |Haf B_k|^2 / (prod k_i! sqrt(det sigma_Q)); odd totals
    are exactly zero. Loss-degraded states go through the Fock-truncation
    evaluator with total photon cutoff `cutoff`.
    """
    k = _check_width(output_pattern, state.m)
    if not state.is_pure:
        if state.parent is None:
            raise ValueError("mixed state carries no lossless parent to evaluate from")
        return lossy_probability(state, k, cutoff)
    if sum(k) % 2:
        return 0.0
    idx = expand_indices(k)
    h = hafnian(state.kernel_b[np.ix_(idx, idx)])
    return abs(h) ** 2 / factorial_product(k) * state.vacuum_probability


@dataclass(frozen=True)
class ClassicalModelSpec:
    """Coherent amplitudes or thermal mean photon numbers per driven input."""

    kind: str
    alpha: tuple[complex, ...] = field(default=())
    mean_photons: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("coherent", "thermal"):
            raise ValueError(f"unknown classical model {self.kind!r}")
        alpha = tuple(complex(a) for a in self.alpha)
        nbar = tuple(float(x) for x in self.mean_photons)
        if not all(np.isfinite(a) for a in alpha) or not all(np.isfinite(nbar)):
            raise ValueError("model parameters must be finite")
        if any(x < 0 for x in nbar):
            raise ValueError("mean photon numbers must be non-negative")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "mean_photons", nbar)


def _need(spec: ClassicalModelSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ValueError(f"expected a {kind} model, got {spec.kind}")


def _driven(interf, size: int) -> np.ndarray:
    t = _inputs_and_matrix(interf)
    if isinstance(interf, Interferometer) and size == interf.m:
        t = interf.unitary
    if t.shape[0] != size:
        raise ValueError(f"model has {size} inputs but the circuit drives {t.shape[0]}")
    return t


def prob_coherent(spec: ClassicalModelSpec, interf, output_pattern) -> float:
    """Product of Poisson laws with means |beta_i|^2, beta = T^T alpha."""
    _need(spec, "coherent")
    t = _driven(interf, len(spec.alpha))
    k = np.asarray(_check_width(output_pattern, t.shape[1]), dtype=float)
    mu = np.abs(t.T @ np.asarray(spec.alpha)) ** 2
    with np.errstate(divide="ignore"):
        logp = k * np.log(np.where(k > 0, mu, 1.0)) - mu - gammaln(k + 1)
    return float(np.exp(logp.sum()))


def thermal_ratio(mean_photons) -> np.ndarray:
    nbar = np.asarray(mean_photons, dtype=float)
    return nbar / (nbar + 1)


def prob_thermal(spec: ClassicalModelSpec, interf, output_pattern) -> float:
    """Perm(A_k) / (prod k_i! prod (1 + <n_i>)) with A = T^T diag(tau) T*."""
    _need(spec, "thermal")
    t = _driven(interf, len(spec.mean_photons))
    k = _check_width(output_pattern, t.shape[1])
    a = t.T @ np.diag(thermal_ratio(spec.mean_photons)) @ t.conj()
    idx = expand_indices(k)
    val = permanent(a[np.ix_(idx, idx)]).real
    return val / (factorial_product(k) * float(np.prod(1 + np.asarray(spec.mean_photons))))


def _source_kernels(t: np.ndarray, xi: np.ndarray) -> list[np.ndarray]:
    # kernel of source i alone: tanh(xi_i) u_i u_i^T with u_i its output row
    return [np.tanh(x) * np.outer(row, row) for row, x in zip(t, xi)]


def _haf_sub(c: np.ndarray, pattern) -> complex:
    idx = expand_indices(pattern)
    return hafnian(c[np.ix_(idx, idx)])


def prob_distinguishable_sms(xi: Sequence[float], interf, output_pattern) -> float:
    """Four-photon law of mutually distinguishable single-mode squeezers.

    Sums every way to split the detected photons into a two-photon event from
    each of two sources, plus four-photon events from a single source. At most
    two photons per mode are supported.
    """
    xi = np.asarray(xi, dtype=float)
    t = _driven(interf, xi.size)
    k = _check_width(output_pattern, t.shape[1])
    if sum(k) != 4:
        raise ValueError(f"this law covers four detected photons, got {sum(k)}")
    if max(k) > 2:
        raise ValueError("occupations above two photons per mode are not supported")
    c = _source_kernels(t, xi)
    vac = 1.0 / float(np.prod(np.cosh(xi)))
    kk = np.asarray(k)
    splits = [np.asarray(a) for a in itertools.product(*(range(q + 1) for q in k)) if sum(a) == 2]
    total = 0.0
    for i, j in itertools.combinations(range(xi.size), 2):
        for a in splits:
            b = kk - a
            total += (
                abs(_haf_sub(c[i], a)) ** 2 * abs(_haf_sub(c[j], b)) ** 2
                / (factorial_product(a) * factorial_product(b))
            )
    for ci in c:
        total += abs(_haf_sub(ci, k)) ** 2 / factorial_product(k)
    return total * vac


def prob_distinguishable_sms_convolution(xi: Sequence[float], interf, output_pattern) -> float:
    """Any-n distinguishable squeezer law, as a convolution of per-source laws.

    Each source alone is a rank-one squeezed state; the detected pattern is
    the sum of independent per-source patterns. Exponential in the number of
    splittings, so intended for small cases.
    """
    xi = np.asarray(xi, dtype=float)
    t = _driven(interf, xi.size)
    k = _check_width(output_pattern, t.shape[1])
    if sum(k) % 2:
        return 0.0
    c = _source_kernels(t, xi)
    vac = 1.0 / float(np.prod(np.cosh(xi)))

    def rec(src: int, rest: tuple[int, ...]) -> float:
        if src == len(c) - 1:
            return abs(_haf_sub(c[src], rest)) ** 2 / factorial_product(rest)
        acc = 0.0
        for a in itertools.product(*(range(q + 1) for q in rest)):
            if sum(a) % 2:
                continue
            w = abs(_haf_sub(c[src], a)) ** 2 / factorial_product(a)
            if w:
                acc += w * rec(src + 1, tuple(r - x for r, x in zip(rest, a)))
        return acc

    return rec(0, k) * vac


def tms_state(xi: Sequence[float], t) -> GaussianState:
    """Two-mode squeezers feeding two copies of `t`, built from single-mode ones."""
    t = as_complex_matrix(t)
    xi = np.asarray(xi, dtype=float)
    if xi.size != t.shape[0]:
        raise ValueError(f"need {t.shape[0]} squeezing parameters, got {xi.size}")
    return squeezed_state(doubled_gbs_circuit(t), np.concatenate([xi, xi]))


def prob_tms(bank, t, output_pattern, state: GaussianState | None = None) -> float:
    """Law of two-mode squeezed inputs whose two arms cross copies of the circuit.

    Sums the doubled-circuit GBS probability over all splittings x = h + k
    with equal photon numbers in the two copies.
    """
    t = _inputs_and_matrix(t)
    xi = bank.xi if isinstance(bank, SqueezerBank) else tuple(bank)
    x = _check_width(output_pattern, t.shape[1])
    n = sum(x)
    if n % 2:
        return 0.0
    st = state if state is not None else tms_state(xi, t)
    total = 0.0
    for h in itertools.product(*(range(q + 1) for q in x)):
        if 2 * sum(h) != n:
            continue
        rest = tuple(q - a for q, a in zip(x, h))
        total += prob_gbs(st, h + rest)
    return total


def prob_uniform(m: int, n: int, domain: str | Domain = "collision-free") -> float:
    d = domain if isinstance(domain, Domain) else Domain(domain, m, n)
    size = d.size()
    if size == 0:
        raise ValueError(f"empty domain {d.tag} on {d.m} modes")
    return 1.0 / size
