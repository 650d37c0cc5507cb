"""Gaussian input states: squeezer banks, Q-covariances, GBS kernels, loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import Interferometer, transfer_matrix
from .matkernels import as_complex_matrix

XI_MAX = 4.0
HERMITIAN_TOL = 1e-10
PD_TOL = 1e-9


class PhysicalityError(ValueError):
    """Covariance matrix does not describe a physical state."""


@dataclass(frozen=True)
class SqueezerBank:
    """Per-mode squeezing parameters, zero on vacuum inputs."""

    xi: tuple[float, ...]

    def __post_init__(self):
        xi = tuple(float(x) for x in np.atleast_1d(np.asarray(self.xi, dtype=float)))
        if not all(np.isfinite(xi)):
            raise ValueError("squeezing parameters must be finite")
        if any(x < 0 or x >= XI_MAX for x in xi):
            raise ValueError(f"squeezing parameters must lie in [0, {XI_MAX}), got {xi}")
        object.__setattr__(self, "xi", xi)

    def __len__(self) -> int:
        return len(self.xi)

    @classmethod
    def uniform(cls, xi: float, k: int) -> "SqueezerBank":
        return cls((xi,) * k)


@dataclass(frozen=True)
class LossChannel:
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"transmission must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Q-covariance of an m-mode zero-mean Gaussian state.

    A pure squeezed vacuum carries its kernel B; a state degraded by uniform
    loss carries `eta` and the lossless `parent` instead, which is what the
    mixed-state probability evaluator works from.
    """

    sigma_q: np.ndarray
    kernel_b: np.ndarray | None = None
    xi: tuple[float, ...] = ()
    transfer: np.ndarray | None = None
    eta: float = 1.0
    parent: "GaussianState | None" = None

    def __post_init__(self):
        s = as_complex_matrix(self.sigma_q)
        n = s.shape[0]
        if s.shape != (n, n) or n % 2:
            raise ValueError(f"sigma_q must be 2m x 2m, got {s.shape}")
        if np.max(np.abs(s - s.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise PhysicalityError("sigma_q is not Hermitian")
        try:
            np.linalg.cholesky(s - PD_TOL * np.eye(n))
        except np.linalg.LinAlgError as exc:
            raise PhysicalityError("sigma_q is not positive definite") from exc
        if self.det_sigma_q < 1 - PD_TOL:
            raise PhysicalityError(f"det sigma_q = {self.det_sigma_q} < 1")
        s.setflags(write=False)
        object.__setattr__(self, "sigma_q", s)

    @property
    def m(self) -> int:
        return self.sigma_q.shape[0] // 2

    @property
    def det_sigma_q(self) -> float:
        sign, logdet = np.linalg.slogdet(self.sigma_q)
        return float(np.exp(logdet))

    @property
    def vacuum_probability(self) -> float:
        return 1.0 / np.sqrt(self.det_sigma_q)

    @property
    def is_pure(self) -> bool:
        return self.kernel_b is not None

    def to_dict(self) -> dict:
        doc = {
            "m": self.m,
            "sigma_q_re": self.sigma_q.real.tolist(),
            "sigma_q_im": self.sigma_q.imag.tolist(),
            "eta": self.eta,
        }
        if self.kernel_b is not None:
            doc["kernel_b_re"] = self.kernel_b.real.tolist()
            doc["kernel_b_im"] = self.kernel_b.imag.tolist()
        return doc


def _pair_block(xi: np.ndarray) -> np.ndarray:
    """S S^dagger for independent single-mode squeezers, in (a, a*) ordering."""
    c, s = np.diag(np.cosh(2 * xi)), np.diag(np.sinh(2 * xi))
    return np.block([[c, s], [s, c]]).astype(complex)


def _doubled(w: np.ndarray) -> np.ndarray:
    r, c = w.shape
    out = np.zeros((2 * r, 2 * c), dtype=complex)
    out[:r, :c] = w
    out[r:, c:] = w.conj()
    return out


def _propagate(sigma_in: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Send a k-mode covariance through the k x m transfer matrix t.

    Undriven outputs stay in vacuum, so only the excess over the identity is
    transformed.
    """
    k, m = t.shape
    w = _doubled(t.T)
    out = np.eye(2 * m, dtype=complex) + w @ (sigma_in - np.eye(2 * k)) @ w.conj().T
    return (out + out.conj().T) / 2


def squeezed_state(t, xi: Sequence[float]) -> GaussianState:
    """Pure squeezed vacuum of k sources sent through the k x m matrix `t`.

    Negative squeezing is accepted here (it flips the squeezing axis); the
    user-facing SqueezerBank keeps xi non-negative.
    """
    t = as_complex_matrix(t)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (t.shape[0],):
        raise ValueError(f"need {t.shape[0]} squeezing parameters, got {xi.shape}")
    if np.any(np.abs(xi) >= XI_MAX):
        raise ValueError(f"|xi| must be below {XI_MAX}")
    k = t.shape[0]
    sigma_in = np.eye(2 * k) + 0.5 * (_pair_block(xi) - np.eye(2 * k))
    kernel = t.T @ np.diag(np.tanh(xi)) @ t
    kernel = (kernel + kernel.T) / 2
    return GaussianState(_propagate(sigma_in, t), kernel, tuple(xi), t)


def _bank_transfer(interf: Interferometer, bank: SqueezerBank) -> np.ndarray:
    if len(bank) == interf.m:
        return interf.unitary
    if len(bank) == len(interf.input_modes):
        return transfer_matrix(interf)
    raise ValueError(
        f"squeezer bank has {len(bank)} entries; expected m={interf.m} "
        f"or {len(interf.input_modes)} driven inputs"
    )


def build_sigma_q(interf: Interferometer, bank: SqueezerBank) -> GaussianState:
    """Lossless squeezed-vacuum state at the interferometer output.

    The bank covers either every mode or just the driven inputs.
    """
    return squeezed_state(_bank_transfer(interf, bank), bank.xi)


def loss_beamsplitter(eta: float) -> np.ndarray:
    a, b = np.sqrt(eta), np.sqrt(1 - eta)
    return np.array([[a, b], [-b, a]])


def lossy_input_covariance(xi: Sequence[float], eta: float) -> np.ndarray:
    """k-mode Q-covariance of squeezers each mixed with a vacuum ancilla.

    Signals sit on even indices and ancillas on odd ones of a 2k-mode
    register; after the beam splitters the ancillas are traced out.
    """
    xi = np.asarray(xi, dtype=float)
    k = xi.size
    xi2 = np.zeros(2 * k)
    xi2[0::2] = xi
    u = np.kron(np.eye(k), loss_beamsplitter(eta))
    ut = _doubled(u)
    # Q-covariance = Wigner covariance + I/2 = (U S S^dagger U^dagger)/2 + I/2
    full = 0.5 * ut @ _pair_block(xi2) @ ut.conj().T + 0.5 * np.eye(4 * k)
    keep = np.concatenate([np.arange(0, 2 * k, 2), 2 * k + np.arange(0, 2 * k, 2)])
    return full[np.ix_(keep, keep)]


def lossy_squeezed_state(t, xi: Sequence[float], eta: float) -> GaussianState:
    LossChannel(eta)
    parent = squeezed_state(t, xi)
    if eta == 1.0:
        return parent
    sigma = _propagate(lossy_input_covariance(xi, eta), parent.transfer)
    return GaussianState(sigma, None, parent.xi, parent.transfer, float(eta), parent)


def apply_uniform_loss(bank: SqueezerBank, interf: Interferometer, loss: LossChannel) -> GaussianState:
    """Squeezed vacuum attenuated by `loss` before entering the interferometer."""
    return lossy_squeezed_state(_bank_transfer(interf, bank), bank.xi, loss.eta)


def source_efficiency(xi: float, kind: str = "nondegenerate") -> float:
    """Two-photon emission probability of an SFWM source."""
    if xi < 0:
        raise ValueError("squeezing must be non-negative")
    t2 = np.tanh(xi) ** 2
    if kind == "nondegenerate":
        return float(t2 / np.cosh(xi) ** 2)
    if kind == "degenerate":
        return float(t2 / (2 * np.cosh(xi)))
    raise ValueError(f"unknown source kind {kind!r}")


def purity_from_g2(g2_zero: float) -> float:
    """Heralded-photon purity from the unheralded g2(0)."""
    if not 1.0 <= g2_zero <= 2.0:
        raise ValueError(f"g2(0) must lie in [1, 2], got {g2_zero}")
    return g2_zero - 1.0
