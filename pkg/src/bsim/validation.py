"""Statistical validation of recorded samples against competing models."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import expit, logsumexp

from .distributions import Distribution, Domain, build_distribution, sample_indices
from .distributions.laws import prob_boson_sampling, prob_distinguishable, sbs_herald_weights
from .matkernels import as_complex_matrix, as_pattern, permanent, repeat_submatrix

PROB_FLOOR = 1e-300
DECISION_ALPHA = 1e-3
PROTOCOLS = ("standard", "sbs", "gbs")


class ZeroLikelihoodError(ValueError):
    """An observed sample is impossible under the ideal model."""


@dataclass(frozen=True)
class SampleRecord:
    protocol: str
    output: tuple[int, ...]
    herald: tuple[int, ...] = ()
    index: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        out, her = as_pattern(self.output), as_pattern(self.herald)
        if self.protocol == "sbs" and sum(her) != sum(out):
            raise ValueError("SBS record: heralded and detected photon numbers differ")
        object.__setattr__(self, "output", out)
        object.__setattr__(self, "herald", her)

    def to_json(self) -> str:
        return json.dumps(
            {"protocol": self.protocol, "herald": list(self.herald), "output": list(self.output), "index": self.index}
        )

    @classmethod
    def from_json(cls, line: str) -> "SampleRecord":
        d = json.loads(line)
        return cls(d["protocol"], tuple(d["output"]), tuple(d.get("herald", ())), int(d.get("index", 0)))


def save_samples(records: Iterable[SampleRecord], path) -> None:
    Path(path).write_text("".join(r.to_json() + "\n" for r in records))


def load_samples(path) -> list[SampleRecord]:
    with open(path) as fh:
        return [SampleRecord.from_json(line) for line in fh if line.strip()]


@dataclass(frozen=True, eq=False)
class ValidationVerdict:
    """Per-sample traces plus the final call: ideal, alternative or inconclusive."""

    final_decision: str
    confidence_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    counter_trace: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    lower_bound: np.ndarray | None = None
    upper_bound: np.ndarray | None = None

    @property
    def final_confidence(self) -> float:
        return float(self.confidence_trace[-1]) if len(self.confidence_trace) else 0.5

    @property
    def final_counter(self) -> int:
        return int(self.counter_trace[-1]) if len(self.counter_trace) else 0

    def to_csv(self) -> str:
        if len(self.confidence_trace):
            rows = [f"{i + 1},{c:.17g}" for i, c in enumerate(self.confidence_trace)]
            return "index,confidence\n" + "\n".join(rows) + "\n"
        rows = [f"{i + 1},{c}" for i, c in enumerate(self.counter_trace)]
        return "index,counter\n" + "\n".join(rows) + "\n"


Model = Callable[[SampleRecord], float]


def _log_likelihoods(samples: Sequence[SampleRecord], model: Model, ideal: bool) -> np.ndarray:
    p = np.array([model(s) for s in samples], dtype=float)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("model returned an invalid probability")
    if ideal and np.any(p == 0):
        bad = samples[int(np.argmin(p))]
        raise ZeroLikelihoodError(f"sample {bad.output} has zero probability under the ideal model")
    return np.log(np.maximum(p, PROB_FLOOR))


def _decide(conf: float, alpha: float) -> str:
    if conf > 1 - alpha:
        return "ideal"
    if conf < alpha:
        return "alternative"
    return "inconclusive"


def bayesian_compare(
    samples: Sequence[SampleRecord],
    ideal_model: Model,
    alt_model: Model,
    alpha: float = DECISION_ALPHA,
) -> ValidationVerdict:
    """Posterior probability of the ideal model after each sample, uniform prior."""
    li = np.cumsum(_log_likelihoods(samples, ideal_model, True))
    la = np.cumsum(_log_likelihoods(samples, alt_model, False))
    conf = expit(li - la)
    return ValidationVerdict(_decide(conf[-1] if len(conf) else 0.5, alpha), conf)


def bayesian_compare_multi(
    samples: Sequence[SampleRecord],
    ideal_model: Model,
    alt_models: Sequence[Model],
    alpha: float = DECISION_ALPHA,
) -> ValidationVerdict:
    """Joint posterior of the ideal model against several alternatives.

    Also reports the bracket 1/(1 + m r_max) <= p <= 1/(1 + r_max), where
    r_max is the largest alternative-to-ideal likelihood ratio.
    """
    if not alt_models:
        raise ValueError("need at least one alternative model")
    li = np.cumsum(_log_likelihoods(samples, ideal_model, True))
    la = np.array([np.cumsum(_log_likelihoods(samples, m, False)) for m in alt_models])
    log_r = la - li
    conf = np.exp(-logsumexp(np.vstack([np.zeros_like(li), log_r]), axis=0))
    r_max = log_r.max(axis=0)
    upper = expit(-r_max)
    lower = expit(-(r_max + math.log(len(alt_models))))
    return ValidationVerdict(_decide(conf[-1] if len(conf) else 0.5, alpha), conf, lower_bound=lower, upper_bound=upper)


def _counter_decision(counter: np.ndarray, dead_zone: float) -> str:
    c = int(counter[-1]) if len(counter) else 0
    if abs(c) <= dead_zone * math.sqrt(len(counter)):
        return "inconclusive"
    return "ideal" if c > 0 else "alternative"


def _herald_rows(rec: SampleRecord, t: np.ndarray) -> tuple[int, ...]:
    if rec.herald:
        if len(rec.herald) != t.shape[0]:
            raise ValueError(f"herald has {len(rec.herald)} entries, transfer matrix has {t.shape[0]} rows")
        return rec.herald
    n = sum(rec.output)
    if t.shape[0] != n:
        raise ValueError("records without a herald need one transfer-matrix row per photon")
    return (1,) * n


def rownorm_estimator(t, herald, output) -> float:
    """Product over detected photons of the summed |T|^2 from the occupied inputs."""
    t = as_complex_matrix(t)
    w = np.abs(t) ** 2
    rows = np.repeat(np.arange(t.shape[0]), herald)
    col_mass = w[rows].sum(axis=0)
    out = np.asarray(output)
    return float(np.prod(col_mass ** out))


def rownorm_test(
    samples: Sequence[SampleRecord],
    t,
    m: int,
    n: int,
    threshold: float | None = None,
    dead_zone: float = 1.0,
) -> ValidationVerdict:
    """Row-norm test against a uniform sampler.

    The counter steps +1 when the estimator exceeds the threshold (default
    (n/m)^n, the estimator's typical value under uniform sampling) and -1
    otherwise, ties included.
    """
    t = as_complex_matrix(t)
    thr = (n / m) ** n if threshold is None else threshold
    steps = [1 if rownorm_estimator(t, _herald_rows(s, t), s.output) > thr else -1 for s in samples]
    counter = np.cumsum(steps, dtype=int)
    return ValidationVerdict(_counter_decision(counter, dead_zone), counter_trace=counter)


def likelihood_ratio(t, herald, output) -> float:
    """|Perm T_{j,k}|^2 / Perm(|T_{j,k}|^2)."""
    sub = repeat_submatrix(t, herald, output)
    p_dist = permanent(np.abs(sub) ** 2).real
    if p_dist <= 0:
        raise ZeroLikelihoodError(f"distinguishable probability vanishes for output {tuple(output)}")
    return abs(permanent(sub)) ** 2 / p_dist


def lrt_step(ratio: float, a1: float, a2: float) -> int:
    if ratio >= a2:
        return 2
    if ratio >= 1 / a1:
        return 1
    if ratio > a1:
        return 0
    if ratio > 1 / a2:
        return -1
    return -2


def likelihood_ratio_test(
    samples: Sequence[SampleRecord],
    t,
    a1: float = 0.75,
    a2: float = 2.0,
    dead_zone: float = 1.0,
) -> ValidationVerdict:
    """Counter test of indistinguishable against distinguishable photons."""
    t = as_complex_matrix(t)
    steps = [lrt_step(likelihood_ratio(t, _herald_rows(s, t), s.output), a1, a2) for s in samples]
    counter = np.cumsum(steps, dtype=int)
    return ValidationVerdict(_counter_decision(counter, dead_zone), counter_trace=counter)


# -- model adapters ----------------------------------------------------------


def distribution_model(dist: Distribution) -> Model:
    table = dist.as_dict()
    return lambda rec: table.get(rec.output, 0.0)


class SbsModel:
    """Output law of heralded Fock inputs, conditioned on a detection domain.

    kind is "indistinguishable" or "distinguishable". Conditioning is done
    separately for each herald, since the two laws put different mass on the
    domain.
    """

    def __init__(self, t, kind: str = "indistinguishable", domain_kind: str = "collision-free"):
        if kind not in ("indistinguishable", "distinguishable"):
            raise ValueError(f"unknown SBS law {kind!r}")
        self.t = as_complex_matrix(t)
        self.kind = kind
        self.domain_kind = domain_kind
        self._cache: dict[tuple[int, ...], Distribution] = {}

    def distribution(self, herald: Sequence[int]) -> Distribution:
        herald = tuple(herald)
        if herald not in self._cache:
            law = prob_boson_sampling if self.kind == "indistinguishable" else prob_distinguishable
            dom = Domain(self.domain_kind, self.t.shape[1], sum(herald))
            self._cache[herald] = build_distribution(lambda k: law(self.t, herald, k), None, dom)
        return self._cache[herald]

    def __call__(self, rec: SampleRecord) -> float:
        return self.distribution(rec.herald).prob(rec.output)


# -- simulated data ----------------------------------------------------------


def records_from_distribution(dist: Distribution, count: int, seed, protocol: str = "gbs") -> list[SampleRecord]:
    rng = np.random.default_rng(seed)
    idx = sample_indices(dist.probs, count, rng)
    return [SampleRecord(protocol, dist.patterns[i], (), r) for r, i in enumerate(idx)]


def simulate_sbs(
    t,
    xi: Sequence[float],
    n: int,
    count: int,
    seed,
    kind: str = "indistinguishable",
    model: SbsModel | None = None,
) -> list[SampleRecord]:
    """Heralded samples: pick which n sources fired, then a collision-free output."""
    model = model or SbsModel(t, kind)
    heralds, w = sbs_herald_weights(xi, n)
    rng = np.random.default_rng(seed)
    which = sample_indices(w, count, rng)
    recs = []
    for r, h in enumerate(which):
        dist = model.distribution(heralds[h])
        out = dist.patterns[sample_indices(dist.probs, 1, rng)[0]]
        recs.append(SampleRecord("sbs", out, heralds[h], r))
    return recs


def simulate_uniform_sbs(herald_count: int, m: int, n: int, count: int, seed, xi=None) -> list[SampleRecord]:
    """Heralded records whose outputs are uniform over collision-free patterns."""
    xi = [0.1] * herald_count if xi is None else xi
    heralds, w = sbs_herald_weights(xi, n)
    dom = Domain("collision-free", m, n)
    pats = dom.patterns()
    rng = np.random.default_rng(seed)
    which = sample_indices(w, count, rng)
    outs = rng.integers(0, len(pats), size=count)
    return [SampleRecord("sbs", pats[o], heralds[h], r) for r, (h, o) in enumerate(zip(which, outs))]


def gbs_models(t, xi: Sequence[float], domain: Domain) -> dict[str, Distribution]:
    """The squeezed-vacuum law and its four classical or semi-classical rivals.

    Rivals share the circuit and are matched to the sources: thermal inputs
    with <n> = sinh^2 xi, coherent inputs of equal real amplitude
    sqrt(mean sinh^2 xi), distinguishable squeezers and two-mode squeezers with
    the same xi. Every law is conditioned on `domain`.
    """
    from .distributions import ClassicalModelSpec
    from .gaussian import squeezed_state

    t = as_complex_matrix(t)
    xi = np.asarray(xi, dtype=float)
    nbar = np.sinh(xi) ** 2
    alpha = np.full(xi.size, math.sqrt(nbar.mean()))
    four = domain.n == 4 and domain.kind != "full-truncated"
    params = {
        "ideal": ("gbs", {"state": squeezed_state(t, xi)}),
        "thermal": ("thermal", {"spec": ClassicalModelSpec("thermal", mean_photons=nbar), "interferometer": t}),
        "coherent": ("coherent", {"spec": ClassicalModelSpec("coherent", alpha=alpha), "interferometer": t}),
        "distinguishable-sms": ("dss" if four else "dss-any", {"xi": xi, "interferometer": t}),
        "tms": ("tms", {"xi": xi, "transfer": t}),
    }
    return {name: build_distribution(model, p, domain) for name, (model, p) in params.items()}
