"""Franck-Condon profiles of molecular vibronic transitions via GBS statistics.

A molecule with initial and final normal-mode frequencies omega, omega' and a
Duschinsky rotation U_D maps onto a squeezed-vacuum experiment: the SVD of
J = Omega' U_D Omega^-1 supplies the interferometer U_L and the squeezing
xi_i = ln sigma_i. Photon pattern k then corresponds to the vibrational
final state with k_i quanta, at transition frequency sum_i omega'_i k_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import Domain, gbs_probabilities, prob_gbs
from .distributions.lossy import DEFAULT_CUTOFF
from .gaussian import GaussianState, lossy_squeezed_state, squeezed_state
from .matkernels import svd

ORTHO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MoleculeSpec:
    omega: np.ndarray
    omega_prime: np.ndarray
    duschinsky: np.ndarray
    displacement: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        wp = np.asarray(self.omega_prime, dtype=float)
        u = np.asarray(self.duschinsky, dtype=float)
        d = np.zeros(w.size) if self.displacement is None else np.asarray(self.displacement, dtype=float)
        m = w.size
        if wp.shape != (m,) or u.shape != (m, m) or d.shape != (m,):
            raise ValueError("molecule arrays have inconsistent sizes")
        if np.any(w <= 0) or np.any(wp <= 0):
            raise ValueError("frequencies must be strictly positive")
        if np.max(np.abs(u @ u.T - np.eye(m))) > ORTHO_TOL:
            raise ValueError("Duschinsky matrix is not orthogonal within 1e-10")
        for name, val in (("omega", w), ("omega_prime", wp), ("duschinsky", u), ("displacement", d)):
            object.__setattr__(self, name, val)

    @property
    def m(self) -> int:
        return self.omega.size

    @classmethod
    def from_dict(cls, doc: dict) -> "MoleculeSpec":
        return cls(doc["omega"], doc["omega_prime"], doc["duschinsky"], doc.get("displacement"))

    @classmethod
    def load(cls, path) -> "MoleculeSpec":
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"molecule file not found: {p}")
        return cls.from_dict(json.loads(p.read_text()))

    def to_dict(self) -> dict:
        return {
            "omega": self.omega.tolist(),
            "omega_prime": self.omega_prime.tolist(),
            "duschinsky": self.duschinsky.tolist(),
            "displacement": self.displacement.tolist(),
        }


def random_molecule(m: int, seed=None, low: float = 500.0, high: float = 2000.0) -> MoleculeSpec:
    """Synthetic displacement-free molecule with a random Duschinsky rotation."""
    rng = np.random.default_rng(seed)
    omega = rng.uniform(low, high, m)
    omega_prime = rng.uniform(low, high, m)
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.sign(np.diag(r))
    return MoleculeSpec(omega, omega_prime, q)


@dataclass(frozen=True, eq=False)
class DoktorovDecomposition:
    u_left: np.ndarray
    u_right: np.ndarray
    xi: np.ndarray
    alpha: np.ndarray
    j_matrix: np.ndarray

    @property
    def displaced(self) -> bool:
        return bool(np.any(self.alpha != 0))


def doktorov_decompose(mol: MoleculeSpec) -> DoktorovDecomposition:
    # elementwise sqrt(omega'_i / omega_j) keeps equal frequencies exact
    j = mol.duschinsky * np.sqrt(mol.omega_prime[:, None] / mol.omega[None, :])
    u_left, sigma, u_right = svd(j)
    if np.any(sigma <= 0):
        raise ValueError("J is singular")
    delta = np.sqrt(mol.omega_prime) * mol.displacement
    alpha = np.zeros(mol.m) if not np.any(delta) else np.linalg.solve(j, delta) / np.sqrt(2)
    return DoktorovDecomposition(u_left, u_right, np.log(sigma), alpha, j)


def fc_state(dok: DoktorovDecomposition, eta: float = 1.0, gamma: float = 1.0) -> GaussianState:
    """Squeezed vacuum whose photon statistics are the FC factors.

    `gamma` rescales every tanh xi_i, `eta` adds uniform loss; both default
    to the ideal device.
    """
    xi = np.arctanh(gamma * np.tanh(dok.xi))
    # the circuit acts on inputs through rows, so U_L enters transposed
    t = dok.u_left.T
    return squeezed_state(t, xi) if eta == 1.0 else lossy_squeezed_state(t, xi, eta)


def fc_factor(dok: DoktorovDecomposition, pattern: Sequence[int]) -> float:
    if dok.displaced:
        raise ValueError("FC factors are implemented for displacement-free transitions only")
    return prob_gbs(fc_state(dok), pattern)


@dataclass(frozen=True, eq=False)
class FcProfile:
    frequencies: np.ndarray
    masses: np.ndarray
    truncation_n: int

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def to_csv(self) -> str:
        rows = [f"{w:.17g},{p:.17g}" for w, p in zip(self.frequencies, self.masses)]
        return "omega,mass\n" + "\n".join(rows) + "\n"


def pattern_energies(patterns: np.ndarray, omega_prime, binning: str = "gcd") -> np.ndarray:
    """Transition frequency of each pattern, snapped to the binning grid.

    "gcd" rounds the single-quantum energies to integers, so every pattern
    lands on a multiple of their greatest common divisor; "exact" keeps the
    raw sums and only merges values equal to 12 significant digits.
    """
    wp = np.asarray(omega_prime, dtype=float)
    if binning == "gcd":
        rounded = np.rint(wp).astype(np.int64)
        if reduce(math.gcd, rounded.tolist(), 0) > 0:
            return (patterns @ rounded).astype(float)
        binning = "exact"
    if binning == "exact":
        e = patterns @ wp
        return np.array([float(f"{x:.12g}") for x in e])
    raise ValueError(f"unknown binning {binning!r}")


def bin_profile(patterns: np.ndarray, probs: np.ndarray, omega_prime, truncation_n: int, binning: str = "gcd") -> FcProfile:
    energies = pattern_energies(patterns, omega_prime, binning)
    grid, inv = np.unique(energies, return_inverse=True)
    masses = np.zeros(grid.size)
    np.add.at(masses, inv, probs)
    return FcProfile(grid, masses, truncation_n)


def fc_patterns(m: int, truncation_n: int) -> np.ndarray:
    pats = Domain("full-truncated", m, truncation_n).patterns()
    return np.array(pats, dtype=np.int64).reshape(len(pats), m)


def fc_profile(
    dok: DoktorovDecomposition,
    omega_prime,
    truncation_n: int,
    binning: str = "gcd",
) -> FcProfile:
    """FC weight per transition frequency over all patterns with <= truncation_n quanta."""
    if dok.displaced:
        raise ValueError("FC profiles are implemented for displacement-free transitions only")
    pats = fc_patterns(dok.xi.size, truncation_n)
    probs = gbs_probabilities(fc_state(dok), pats, DEFAULT_CUTOFF)
    return bin_profile(pats, probs, omega_prime, truncation_n, binning)


def _photon_weights(patterns, eta: float, gamma: float) -> np.ndarray:
    n = np.asarray([sum(p) for p in patterns], dtype=float)
    # |Haf(gamma B)|^2 = gamma^n |Haf B|^2 for n photons
    return eta**n * gamma**n


def fc9_forward(raw: Sequence[tuple[Sequence[int], float]], eta: float, gamma: float):
    """Ideal FC factors to what a lossy, rescaled device records (normalised)."""
    pats = [tuple(p) for p, _ in raw]
    w = np.array([p for _, p in raw], dtype=float) * _photon_weights(pats, eta, gamma)
    if w.sum() <= 0:
        raise ValueError("cannot normalise an all-zero list")
    return list(zip(pats, (w / w.sum()).tolist()))


def postprocess_rescale(raw: Sequence[tuple[Sequence[int], float]], eta: float, gamma: float):
    """Undo uniform transmission eta and squeezing rescale gamma, then renormalise."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    pats = [tuple(p) for p, _ in raw]
    w = np.array([p for _, p in raw], dtype=float) / _photon_weights(pats, eta, gamma)
    if w.sum() <= 0:
        raise ValueError("cannot normalise an all-zero list")
    return list(zip(pats, (w / w.sum()).tolist()))


def profile_fidelity(p: FcProfile, q: FcProfile) -> float:
    """Bhattacharyya overlap sum sqrt(p_w q_w) of two profiles on one grid."""
    if p.frequencies.shape != q.frequencies.shape or np.any(p.frequencies != q.frequencies):
        raise ValueError("profiles are defined on different frequency grids")
    return float(np.sum(np.sqrt(p.masses * q.masses)))


def vacuum_profile(like: FcProfile) -> FcProfile:
    """Best classical guess: every quantum in the ground state, mass at omega = 0."""
    masses = np.where(like.frequencies == 0, 1.0, 0.0)
    if masses.sum() != 1:
        raise ValueError("grid has no omega = 0 bin")
    return FcProfile(like.frequencies, masses, like.truncation_n)


def quantum_enhancement(fq: float, fc_classical: float) -> float:
    return fq - fc_classical


def enhancement_curve(
    u_left,
    device_xi: Sequence[float],
    omega_prime,
    amplifications: Sequence[float],
    truncation_n: int,
    eta: float = 1.0,
    reference_n: int | None = None,
    binning: str = "gcd",
) -> list[tuple[float, float, float, float]]:
    """Enhancement obtained by reconstructing more strongly squeezed molecules.

    A device with fixed squeezing `device_xi` and transmission `eta` records
    patterns up to `truncation_n` photons. Target molecules share U_L and have
    tanh xi = a tanh(device xi) for each amplification a, i.e. the device
    runs at gamma = 1/a. Returns (a, F_Q, F_C, C) rows, where F_Q compares the
    post-processed reconstruction with the target profile truncated at
    `reference_n` (default truncation_n + 6) quanta.
    """
    u_left = np.asarray(u_left, dtype=float)
    dev = np.asarray(device_xi, dtype=float)
    m = dev.size
    ref_n = truncation_n + 6 if reference_n is None else reference_n
    pats = fc_patterns(m, truncation_n)
    ref_pats = fc_patterns(m, ref_n)
    dev_state = squeezed_state(u_left.T, dev) if eta == 1.0 else lossy_squeezed_state(u_left.T, dev, eta)
    recorded = gbs_probabilities(dev_state, pats, max(DEFAULT_CUTOFF, truncation_n + 4))
    rows = []
    for a in amplifications:
        t = a * np.tanh(dev)
        if np.any(np.abs(t) >= 1):
            raise ValueError(f"amplification {a} exceeds the physical squeezing range")
        target = squeezed_state(u_left.T, np.arctanh(t))
        ideal = bin_profile(ref_pats, gbs_probabilities(target, ref_pats, DEFAULT_CUTOFF), omega_prime, ref_n, binning)
        rec = postprocess_rescale(list(zip(map(tuple, pats), recorded)), eta, 1.0 / a)
        rec_profile = bin_profile(pats, np.array([p for _, p in rec]), omega_prime, truncation_n, binning)
        rec_on_ref = _regrid(rec_profile, ideal)
        fq = profile_fidelity(rec_on_ref, ideal)
        fc = profile_fidelity(vacuum_profile(ideal), ideal)
        rows.append((float(a), fq, fc, quantum_enhancement(fq, fc)))
    return rows


def _regrid(p: FcProfile, grid: FcProfile) -> FcProfile:
    """Place p's masses on a finer grid that contains all of p's bins."""
    pos = np.searchsorted(grid.frequencies, p.frequencies)
    if np.any(pos >= grid.frequencies.size) or np.any(grid.frequencies[np.minimum(pos, grid.frequencies.size - 1)] != p.frequencies):
        raise ValueError("target grid does not contain every bin")
    masses = np.zeros(grid.frequencies.size)
    masses[pos] = p.masses
    return FcProfile(grid.frequencies, masses, p.truncation_n)
