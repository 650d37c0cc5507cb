"""Command-line front end.

Every subcommand reads either flags or a JSON config with "schema_version": 1:

    {
      "schema_version": 1,
      "protocol": "gbs",                    # gbs | sbs | standard
      "circuit": {"haar": {"m": 4, "seed": 3, "input_modes": [0, 1]}},
                 # or {"matrix_file": "u.json"}
                 # or {"waveguide": {"couplings": [...], "phases": [...],
                 #                   "length": 1.0, "input_modes": [...]}}
      "squeezers": [0.3, 0.3],              # gbs / sbs
      "input": [1, 1, 0, 0],                # standard boson sampling
      "domain": {"kind": "full-truncated", "n": 2},
      "cutoff": 10,                         # photon cutoff for lossy GBS
      "eta": 1.0,                           # uniform transmission (gbs)
      "samples": {"count": 100, "seed": 7},
      "validation": ["thermal", "coherent"],
      "out": "bsim-out"
    }

Artifacts of `run`: distribution.csv, samples.jsonl, verdict_<model>.csv and
manifest.json. A manifest is itself a valid --config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import Interferometer, coupled_waveguide_unitary, haar_random_unitary, transfer_matrix
from .distributions import Distribution, Domain, build_distribution
from .distributions.lossy import DEFAULT_CUTOFF
from .distributions.patterns import MAX_PATTERNS, parse_pattern
from .gaussian import lossy_squeezed_state, squeezed_state
from .matkernels import HAFNIAN_CAP, PERMANENT_CAP, CapExceededError
from .validation import (
    SampleRecord,
    SbsModel,
    bayesian_compare,
    distribution_model,
    gbs_models,
    load_samples,
    records_from_distribution,
    save_samples,
    simulate_sbs,
)

SCHEMA_VERSION = 1
GBS_RIVALS = ("thermal", "coherent", "distinguishable-sms", "tms")


class ConfigError(ValueError):
    pass


# -- config ------------------------------------------------------------------


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: not valid JSON ({exc})") from None
    if "manifest" in doc and "config" in doc:
        doc = doc["config"]
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{p}: schema_version must be {SCHEMA_VERSION}")
    base = p.parent
    circuit = doc.get("circuit", {})
    if "matrix_file" in circuit:
        mf = Path(circuit["matrix_file"])
        if not mf.is_absolute():
            mf = base / mf
        if not mf.is_file():
            raise ConfigError(f"matrix file not found: {mf}")
        # embed the matrix so the config and its hash are self-contained
        doc = {**doc, "circuit": {"matrix": json.loads(mf.read_text())}}
    return doc


def build_circuit(cfg: dict) -> Interferometer:
    c = cfg.get("circuit")
    if not c:
        raise ConfigError("config has no circuit")
    if "haar" in c:
        h = c["haar"]
        if "seed" not in h:
            raise ConfigError("a Haar circuit needs an explicit seed")
        return haar_random_unitary(int(h["m"]), int(h["seed"]), tuple(h.get("input_modes", ())))
    if "matrix" in c:
        return Interferometer.from_dict(c["matrix"])
    if "waveguide" in c:
        w = c["waveguide"]
        return coupled_waveguide_unitary(w["couplings"], w["phases"], float(w["length"]), tuple(w.get("input_modes", ())))
    raise ConfigError("circuit must be one of haar, matrix_file, waveguide")


def build_domain(cfg: dict, m: int) -> Domain:
    d = cfg.get("domain")
    if not d:
        raise ConfigError("config has no domain")
    dom = Domain(d.get("kind", "collision-free"), m, int(d["n"]))
    size = dom.size()
    if size > MAX_PATTERNS:
        raise ConfigError(f"domain {dom.tag} on {m} modes has {size} patterns, above {MAX_PATTERNS:.0e}; lower n or m")
    return dom


def _check_caps(protocol: str, dom: Domain, cutoff: int) -> None:
    if protocol == "gbs":
        top = max(dom.n, cutoff) if cutoff else dom.n
        if dom.n > HAFNIAN_CAP or top > HAFNIAN_CAP:
            raise ConfigError(f"photon number {top} exceeds the Hafnian cap {HAFNIAN_CAP}; lower n or cutoff")
    elif dom.n > PERMANENT_CAP:
        raise ConfigError(f"photon number {dom.n} exceeds the permanent cap {PERMANENT_CAP}")


class Experiment:
    """Everything derived from one config: circuit, ideal law and rivals."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.protocol = cfg.get("protocol", "gbs")
        if self.protocol not in ("gbs", "sbs", "standard"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        self.interf = build_circuit(cfg)
        self.t = transfer_matrix(self.interf)
        self.domain = build_domain(cfg, self.interf.m)
        self.cutoff = int(cfg.get("cutoff", DEFAULT_CUTOFF))
        self.eta = float(cfg.get("eta", 1.0))
        _check_caps(self.protocol, self.domain, self.cutoff if self.eta < 1 else 0)
        self.xi = np.asarray(cfg.get("squeezers", []), dtype=float)
        if self.protocol in ("gbs", "sbs") and self.xi.size != self.t.shape[0]:
            raise ConfigError(f"{self.xi.size} squeezers for {self.t.shape[0]} driven inputs")
        if self.protocol == "standard":
            self.input = tuple(int(k) for k in cfg.get("input", []))
            if len(self.input) != self.t.shape[0]:
                raise ConfigError("standard boson sampling needs one input occupation per driven mode")
        self._sbs = None

    def distribution(self) -> Distribution | None:
        if self.protocol == "gbs":
            state = squeezed_state(self.t, self.xi) if self.eta == 1 else lossy_squeezed_state(self.t, self.xi, self.eta)
            return build_distribution("gbs", {"state": state, "cutoff": self.cutoff}, self.domain)
        if self.protocol == "standard":
            return build_distribution("boson-sampling", {"transfer": self.t, "input": self.input}, self.domain)
        return None

    def sbs_model(self, kind: str = "indistinguishable") -> SbsModel:
        if kind == "indistinguishable":
            self._sbs = self._sbs or SbsModel(self.t, kind, self.domain.kind)
            return self._sbs
        return SbsModel(self.t, kind, self.domain.kind)

    def simulate(self, count: int, seed: int, dist: Distribution | None) -> list[SampleRecord]:
        if self.protocol == "sbs":
            return simulate_sbs(self.t, self.xi, self.domain.n, count, seed, model=self.sbs_model())
        return records_from_distribution(dist, count, seed, self.protocol)

    def rivals(self, names, dist: Distribution | None) -> dict:
        """Map each requested rival to (ideal model, rival model)."""
        out = {}
        if self.protocol == "gbs":
            unknown = set(names) - set(GBS_RIVALS)
            if unknown:
                raise ConfigError(f"unknown GBS rival(s) {sorted(unknown)}; choose from {GBS_RIVALS}")
            if self.eta != 1:
                raise ConfigError("GBS validation rivals assume a lossless device")
            laws = gbs_models(self.t, self.xi, self.domain)
            for name in names:
                out[name] = (distribution_model(laws["ideal"]), distribution_model(laws[name]))
            return out
        for name in names:
            if name != "distinguishable":
                raise ConfigError(f"unknown rival {name!r} for {self.protocol}; only distinguishable is supported")
            if self.protocol == "sbs":
                out[name] = (self.sbs_model(), self.sbs_model("distinguishable"))
            else:
                alt = build_distribution("distinguishable", {"transfer": self.t, "input": self.input}, self.domain)
                out[name] = (distribution_model(dist), distribution_model(alt))
        return out


# -- artifacts ---------------------------------------------------------------


def _versions() -> dict:
    import numba
    import scipy

    return {
        "bsim": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _seed(cfg: dict, override) -> int:
    seed = override if override is not None else cfg.get("samples", {}).get("seed")
    if seed is None:
        raise ConfigError("sampling needs a seed (samples.seed in the config or --seed)")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


def run_pipeline(cfg: dict, out: Path, seed_override=None, stages=("distribution", "samples", "validation")) -> dict:
    """Execute the configured pipeline and write its artifacts into `out`."""
    start = time.perf_counter()
    exp = Experiment(cfg)
    written = []
    dist = exp.distribution()
    if dist is not None and "distribution" in stages:
        written.append(_write(out / "distribution.csv", dist.to_csv()))
    seeds = {}
    records = None
    count = int(cfg.get("samples", {}).get("count", 0))
    if "samples" in stages and count > 0:
        seeds["samples"] = _seed(cfg, seed_override)
        records = exp.simulate(count, seeds["samples"], dist)
        save_samples(records, out / "samples.jsonl")
        written.append(out / "samples.jsonl")
    names = list(cfg.get("validation", []))
    if "validation" in stages and names:
        if records is None:
            raise ConfigError("validation needs samples (samples.count > 0)")
        for name, (ideal, alt) in exp.rivals(names, dist).items():
            verdict = bayesian_compare(records, ideal, alt)
            written.append(_write(out / f"verdict_{name}.csv", verdict.to_csv()))
    used = {**cfg, "samples": {**cfg.get("samples", {}), **({"seed": seeds["samples"]} if seeds else {})}}
    manifest = {
        "manifest": 1,
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash(used),
        "versions": _versions(),
        "seeds": seeds,
        "artifacts": sorted(p.name for p in written),
        "wall_time": time.perf_counter() - start,
        "config": used,
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# -- subcommands -------------------------------------------------------------


def _out_dir(args, cfg: dict | None = None) -> Path:
    return Path(args.out or (cfg or {}).get("out") or "bsim-out")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    m = run_pipeline(cfg, out, args.seed)
    print(f"wrote {', '.join(m['artifacts'] + ['manifest.json'])} to {out}")
    return 0


def cmd_prob(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg)
    dist = exp.distribution()
    if dist is None:
        raise ConfigError("prob needs a gbs or standard protocol; SBS laws depend on the herald")
    if args.pattern:
        pat = parse_pattern(args.pattern)
        if not exp.domain.contains(pat):
            raise ConfigError(f"pattern {pat} lies outside the {exp.domain.tag} domain")
        print(f"{dist.prob(pat):.17g}")
        return 0
    path = _write(_out_dir(args, cfg) / "distribution.csv", dist.to_csv())
    print(f"wrote {len(dist)} probabilities (domain mass {dist.norm:.6g}) to {path}")
    return 0


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    if args.count is not None:
        cfg = {**cfg, "samples": {**cfg.get("samples", {}), "count": args.count}}
    out = _out_dir(args, cfg)
    m = run_pipeline(cfg, out, args.seed, stages=("distribution", "samples"))
    print(f"wrote {', '.join(m['artifacts'])} to {out}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg)
    sp = Path(args.samples)
    if not sp.is_file():
        raise ConfigError(f"samples file not found: {sp}")
    records = load_samples(sp)
    names = args.models.split(",") if args.models else list(cfg.get("validation", []))
    if not names:
        raise ConfigError("no rival models given (--models or validation in the config)")
    out = _out_dir(args, cfg)
    for name, (ideal, alt) in exp.rivals(names, exp.distribution()).items():
        verdict = bayesian_compare(records, ideal, alt)
        _write(out / f"verdict_{name}.csv", verdict.to_csv())
        print(f"{name}: {verdict.final_decision} (confidence {verdict.final_confidence:.6f})")
    return 0


def cmd_vibronic(args) -> int:
    from .vibronic import MoleculeSpec, doktorov_decompose, fc_profile

    mol = MoleculeSpec.load(args.molecule)
    prof = fc_profile(doktorov_decompose(mol), mol.omega_prime, args.truncation, args.binning)
    rows = [(w, p) for w, p in zip(prof.frequencies, prof.masses) if args.all_bins or p > 0]
    text = "omega,mass\n" + "".join(f"{w:.17g},{p:.17g}\n" for w, p in rows)
    if args.out:
        print(f"wrote {len(rows)} bins to {_write(Path(args.out) / 'fc_profile.csv', text)}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_rates(args) -> int:
    from .scaling import PRESETS, event_rate, optimal_circuit_size

    params = PRESETS[args.preset]
    if args.optimize:
        k, rate = optimal_circuit_size(args.protocol, args.n, params, (args.n, args.k_max))
        print(f"{rate:.6g} Hz at k = m = {k}")
        return 0
    if args.k is not None:
        params = params.sized(args.k)
    print(f"{event_rate(args.protocol, args.n, params):.6g} Hz")
    return 0


def cmd_snr(args) -> int:
    from .scaling import snr_gbs

    print(f"{snr_gbs(args.pairs, args.sources, args.xi):.6g}")
    return 0


def cmd_losses(args) -> int:
    from .scaling import loss_fidelity_study

    rows = loss_fidelity_study(
        n=args.n,
        m=args.m,
        k=args.k,
        xi_grid=_floats(args.xi),
        eta_grid=_floats(args.eta),
        seeds=[int(s) for s in args.seeds.split(",")],
        extra_photons=args.extra,
    )
    text = "xi,eta,fidelity\n" + "".join(f"{x:.17g},{e:.17g},{f:.17g}\n" for x, e, f in rows)
    if args.out:
        print(f"wrote {len(rows)} rows to {_write(Path(args.out) / 'loss_fidelity.csv', text)}")
    else:
        sys.stdout.write(text)
    return 0


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsim", description="Boson sampling simulation and validation.")
    p.add_argument("--version", action="version", version=f"bsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="JSON config or manifest")
        sp.add_argument("--seed", type=int, help="overrides samples.seed")
        sp.add_argument("--out", help="output directory")

    s = sub.add_parser("run", help="distribution, samples and verdicts from one config")
    common(s)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("prob", help="ideal output distribution on the configured domain")
    common(s)
    s.add_argument("--pattern", help='single pattern, e.g. "1,0,1,0"')
    s.set_defaults(func=cmd_prob)

    s = sub.add_parser("sample", help="seeded samples from the ideal law")
    common(s)
    s.add_argument("--count", type=int)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("validate", help="Bayesian comparison of stored samples against rivals")
    common(s)
    s.add_argument("--samples", required=True, help="JSON-lines sample file")
    s.add_argument("--models", help="comma-separated rivals; defaults to the config's list")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("vibronic", help="Franck-Condon profile of a molecule file")
    common(s, config=False)
    s.add_argument("--molecule", required=True)
    s.add_argument("--truncation", type=int, default=4)
    s.add_argument("--binning", choices=("gcd", "exact"), default="gcd")
    s.add_argument("--all-bins", action="store_true", help="also list empty bins")
    s.set_defaults(func=cmd_vibronic)

    s = sub.add_parser("rates", help="event rate of an n-photon experiment")
    common(s, config=False)
    s.add_argument("--protocol", choices=("gbs", "sbs"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--preset", choices=("spiral", "spiral-integrated", "ring", "ring-integrated"), default="spiral")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, help="sources and modes (default 100)")
    g.add_argument("--optimize", action="store_true", help="search the best k = m")
    s.add_argument("--k-max", type=int, default=1000)
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("snr", help="signal-to-noise ratio against spurious pairs")
    common(s, config=False)
    s.add_argument("--pairs", type=int, required=True)
    s.add_argument("--sources", type=int, required=True)
    s.add_argument("--xi", type=float, required=True)
    s.set_defaults(func=cmd_snr)

    s = sub.add_parser("losses", help="fidelity of lossy GBS statistics")
    common(s, config=False)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--m", type=int, default=12)
    s.add_argument("--k", type=int)
    s.add_argument("--xi", default="0.1,0.3,0.5")
    s.add_argument("--eta", default="1,0.9,0.8,0.7,0.6,0.5")
    s.add_argument("--seeds", default="1,2,3")
    s.add_argument("--extra", type=int, default=4, help="photons kept above n in the truncation")
    s.set_defaults(func=cmd_losses)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapExceededError, FileNotFoundError, KeyError, ValueError) as exc:
        msg = f"missing config key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"bsim {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
