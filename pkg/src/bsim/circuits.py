"""Linear-optical networks.

Matrices are stored in [input, output] orientation: entry U[j, k] is the
amplitude for a photon entering mode j to leave in mode k. The transfer
matrix of a device fed on a subset of its inputs is therefore a selection
of rows of U.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .matkernels import as_complex_matrix, matrix_exp

UNITARY_TOL = 1e-10

# twelve-mode device fed on its four central waveguides
DEVICE_MODES = 12
DEVICE_INPUTS = (4, 5, 6, 7)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) < tol)


@dataclass(frozen=True)
class Interferometer:
    """An m-mode unitary plus the input rows that carry light."""

    unitary: np.ndarray
    input_modes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        u = as_complex_matrix(self.unitary)
        if not is_unitary(u):
            raise ValueError("interferometer matrix is not unitary within 1e-10")
        modes = tuple(int(i) for i in self.input_modes) or tuple(range(u.shape[0]))
        if any(b <= a for a, b in zip(modes, modes[1:])):
            raise ValueError(f"input_modes must be strictly increasing, got {modes}")
        if modes[0] < 0 or modes[-1] >= u.shape[0]:
            raise ValueError(f"input_modes {modes} out of range for m={u.shape[0]}")
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "input_modes", modes)

    @property
    def m(self) -> int:
        return self.unitary.shape[0]

    def with_inputs(self, input_modes: Sequence[int]) -> "Interferometer":
        return Interferometer(self.unitary, tuple(input_modes))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "unitary_re": self.unitary.real.tolist(),
            "unitary_im": self.unitary.imag.tolist(),
            "input_modes": list(self.input_modes),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Interferometer":
        u = np.asarray(doc["unitary_re"], dtype=float) + 1j * np.asarray(
            doc.get("unitary_im", 0.0), dtype=float
        )
        if "m" in doc and u.shape != (doc["m"], doc["m"]):
            raise ValueError(f"unitary shape {u.shape} does not match m={doc['m']}")
        return cls(u, tuple(doc.get("input_modes", ())))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Interferometer":
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"interferometer file not found: {p}")
        return cls.from_dict(json.loads(p.read_text()))


def haar_random_unitary(m: int, seed=None, input_modes: Sequence[int] = ()) -> Interferometer:
    """Haar-distributed unitary from the QR factorisation of a Ginibre matrix.

    `seed` may be an int or a numpy Generator.
    """
    if m < 1:
        raise ValueError("mode count must be at least 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return Interferometer(q, tuple(input_modes))


def device_interferometer(seed=None) -> Interferometer:
    """Twelve-mode Haar circuit driven on the four central inputs."""
    return haar_random_unitary(DEVICE_MODES, seed, DEVICE_INPUTS)


def coupled_waveguide_unitary(
    couplings: Sequence[float],
    propagation_phases: Sequence[float],
    length: float,
    input_modes: Sequence[int] = (),
) -> Interferometer:
    """Continuous-time quantum walk on a line of evanescently coupled waveguides.

    U = exp(i * length * H), H tridiagonal with the propagation constants on the
    diagonal and nearest-neighbour couplings beside it.
    """
    beta = np.asarray(propagation_phases, dtype=float)
    c = np.asarray(couplings, dtype=float)
    m = beta.size
    if m < 1:
        raise ValueError("need at least one waveguide")
    if c.size != m - 1:
        raise ValueError(f"expected {m - 1} couplings for {m} waveguides, got {c.size}")
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(c)) and np.isfinite(length)):
        raise ValueError("waveguide parameters must be finite")
    h = np.diag(beta) + np.diag(c, 1) + np.diag(c, -1)
    return Interferometer(matrix_exp(h, length), tuple(input_modes))


def transfer_matrix(interf: Interferometer) -> np.ndarray:
    """Rows of U belonging to the driven inputs (k_in x m)."""
    return interf.unitary[list(interf.input_modes), :]


U_PS = np.diag([1.0, 1.0j])
U_BS = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2)


def doubled_gbs_circuit(t) -> np.ndarray:
    """2k x 2m circuit that turns pairs of single-mode squeezers into two-mode ones.

    Inputs j and k + j pass through a phase shifter and a balanced beam
    splitter before entering two copies of `t` (modes 0..m-1 and m..2m-1).
    Feeding every input with equal single-mode squeezing produces two-mode
    squeezed vacuum across the copies.
    """
    t = as_complex_matrix(t)
    k, m = t.shape
    mix = U_PS @ U_BS.T
    pre = np.zeros((2 * k, 2 * k), dtype=complex)
    idx = np.arange(k)
    pre[idx, idx] = mix[0, 0]
    pre[idx, idx + k] = mix[0, 1]
    pre[idx + k, idx] = mix[1, 0]
    pre[idx + k, idx + k] = mix[1, 1]
    both = np.zeros((2 * k, 2 * m), dtype=complex)
    both[:k, :m] = t
    both[k:, m:] = t
    return pre @ both
