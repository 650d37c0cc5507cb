"""Enumerated distributions: assembly, sampling, detector models and export."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from ..gaussian import GaussianState
from ..matkernels import hafnian_abs2_batch
from .lossy import DEFAULT_CUTOFF, lossy_probabilities
from .patterns import Domain, pattern_label, parse_pattern
from . import laws

NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probabilities over an ordered list of patterns.

    `norm` is the mass the model assigned to the domain before any
    renormalisation, so conditioning can be undone or reported.
    """

    patterns: tuple[tuple[int, ...], ...]
    probs: np.ndarray
    domain: str
    norm: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        pats = tuple(tuple(int(k) for k in q) for q in self.patterns)
        if p.shape != (len(pats),):
            raise ValueError("probabilities and patterns differ in length")
        if np.any(~np.isfinite(p)) or np.any(p < -1e-15):
            raise ValueError("probabilities must be finite and non-negative")
        p = np.clip(p, 0.0, None)
        if p.sum() > 1 + NORM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()} > 1")
        if len(set(pats)) != len(pats):
            raise ValueError("patterns are not unique")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "patterns", pats)

    def __len__(self) -> int:
        return len(self.patterns)

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def normalized(self) -> "Distribution":
        s = self.total
        if s <= 0:
            raise ValueError("cannot normalise a distribution with zero total mass")
        return Distribution(self.patterns, self.probs / s, self.domain, self.norm * s)

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.patterns, self.probs.tolist()))

    def prob(self, pattern) -> float:
        return self.as_dict().get(tuple(int(k) for k in pattern), 0.0)

    def to_csv(self) -> str:
        lines = ["pattern,probability"]
        lines += [f'"{pattern_label(q)}",{p:.17g}' for q, p in zip(self.patterns, self.probs)]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "normalization_domain": self.domain,
                "normalization_constant": self.norm,
                "patterns": [list(p) for p in self.patterns],
                "probabilities": self.probs.tolist(),
            }
        )

    @classmethod
    def from_csv(cls, text: str, domain: str) -> "Distribution":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        return cls(tuple(parse_pattern(r[0]) for r in rows), np.array([float(r[1]) for r in rows]), domain)


Law = Callable[[tuple[int, ...]], float]


def model_law(model: str, params: Mapping) -> Law:
    """Probability function for a named model.

    models and their parameters:
      boson-sampling / distinguishable: transfer, input
      gbs: state (GaussianState), optional cutoff
      coherent / thermal: spec (ClassicalModelSpec), interferometer
      dss: xi, interferometer        (four photons)
      dss-any: xi, interferometer    (convolution path, any n)
      tms: xi, transfer
      uniform: domain
    """
    p = dict(params)
    if model == "boson-sampling":
        return lambda k: laws.prob_boson_sampling(p["transfer"], p["input"], k)
    if model == "distinguishable":
        return lambda k: laws.prob_distinguishable(p["transfer"], p["input"], k)
    if model == "gbs":
        return lambda k: laws.prob_gbs(p["state"], k, p.get("cutoff", DEFAULT_CUTOFF))
    if model == "coherent":
        return lambda k: laws.prob_coherent(p["spec"], p["interferometer"], k)
    if model == "thermal":
        return lambda k: laws.prob_thermal(p["spec"], p["interferometer"], k)
    if model == "dss":
        return lambda k: laws.prob_distinguishable_sms(p["xi"], p["interferometer"], k)
    if model == "dss-any":
        return lambda k: laws.prob_distinguishable_sms_convolution(p["xi"], p["interferometer"], k)
    if model == "tms":
        state = laws.tms_state(p["xi"], p["transfer"])
        return lambda k: laws.prob_tms(p["xi"], p["transfer"], k, state=state)
    if model == "uniform":
        d = p["domain"]
        return lambda k: laws.prob_uniform(d.m, d.n, d)
    raise ValueError(f"unknown model {model!r}")


def gbs_probabilities(state: GaussianState, pats, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """Vectorised prob_gbs over the rows of a pattern array."""
    pats = np.asarray(pats, dtype=np.int64).reshape(-1, state.m)
    if not state.is_pure:
        return lossy_probabilities(state, pats, cutoff)
    logfact = gammaln(pats + 1.0).sum(axis=1)
    return hafnian_abs2_batch(state.kernel_b, pats) * np.exp(-logfact) * state.vacuum_probability


def build_distribution(
    model: str | Law,
    params: Mapping | None,
    domain: Domain,
    normalize: bool = True,
) -> Distribution:
    """Evaluate a model on every pattern of `domain`.

    With `normalize`, the result is conditioned on the domain and `norm`
    carries the model's original mass there.
    """
    pats = domain.patterns()
    if model == "gbs":
        p = dict(params or {})
        arr = np.array(pats, dtype=np.int64).reshape(len(pats), domain.m)
        probs = gbs_probabilities(p["state"], arr, p.get("cutoff", DEFAULT_CUTOFF))
    else:
        law = model if callable(model) else model_law(model, params or {})
        probs = np.array([law(k) for k in pats], dtype=float)
    dist = Distribution(tuple(pats), probs, domain.tag, 1.0)
    if normalize:
        if dist.total <= 0:
            raise ValueError(f"model assigns zero probability to the whole {domain.tag} domain")
        dist = dist.normalized()
    return dist


def sample_indices(probs: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    if cdf[-1] <= 0:
        raise ValueError("cannot sample from a zero distribution")
    u = rng.random(count) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(probs) - 1)


def sample(dist: Distribution, seed, count: int) -> list[tuple[int, ...]]:
    """Inverse-CDF draws; the same seed gives the same sequence."""
    rng = np.random.default_rng(seed)
    return [dist.patterns[i] for i in sample_indices(dist.probs, count, rng)]


def pseudo_pnr_channel(dist: Distribution) -> Distribution:
    """Detection through a balanced splitter and two click detectors per mode.

    Each doubly occupied mode reads 2 with probability 1/2 and 1 otherwise.
    """
    out: dict[tuple[int, ...], float] = {}
    for pat, p in zip(dist.patterns, dist.probs):
        if max(pat, default=0) > 2:
            raise ValueError(f"pattern {pat} has more than two photons in a mode")
        doubles = [i for i, k in enumerate(pat) if k == 2]
        w = p * 0.5 ** len(doubles)
        for reading in itertools.product((2, 1), repeat=len(doubles)):
            obs = list(pat)
            for i, r in zip(doubles, reading):
                obs[i] = r
            key = tuple(obs)
            out[key] = out.get(key, 0.0) + w
    return Distribution(tuple(out), np.array(list(out.values())), f"pseudo-pnr:{dist.domain}", dist.norm)


def pseudo_pnr_probability(law: Law, observed: Sequence[int]) -> float:
    """Probability of a pseudo-resolved reading given the true-count law."""
    c = tuple(int(k) for k in observed)
    if max(c, default=0) > 2:
        raise ValueError("pseudo-resolved readings never exceed two per mode")
    ones = [i for i, k in enumerate(c) if k == 1]
    n_double = sum(1 for k in c if k == 2)
    total = 0.0
    for r in range(len(ones) + 1):
        for sub in itertools.combinations(ones, r):
            true = list(c)
            for i in sub:
                true[i] = 2
            total += law(tuple(true)) * 0.5 ** (n_double + r)
    return total
