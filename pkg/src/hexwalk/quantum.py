"""Coherent walk evolution through the graph Hamiltonian's spectrum.

The Hamiltonian couples neighbouring sites with a uniform strength C (units
1/mm, so the evolution parameter z is a propagation length in mm) and puts
a common detuning on the diagonal.  Since only the product C*z enters the
dynamics, everything defaults to C = 1 and physical couplings are applied
by rescaling; see :func:`hexwalk.hitting.calibrated_coupling`.

Evolution uses the cached eigendecomposition H = V diag(w) V^T of the real
symmetric Hamiltonian, so a single factorisation serves every length on a
scan grid:

    psi(z) = V exp(-i w z) V^T psi(0)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hexwalk.graphs import Graph


@dataclass(frozen=True)
class CouplingModel:
    """Uniform per-edge coupling (1/mm) and on-site diagonal energy."""

    coupling: float = 1.0
    diagonal: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.coupling) or self.coupling <= 0.0:
            raise ValueError(f"coupling must be finite and > 0, got {self.coupling}")
        if not np.isfinite(self.diagonal):
            raise ValueError(f"diagonal energy must be finite, got {self.diagonal}")


class Hamiltonian:
    """Real symmetric walk generator for a graph under a coupling model.

    The matrix has ``coupling`` at every adjacent pair and ``diagonal`` on
    the diagonal.  The eigendecomposition is computed once on first use and
    reused for every evolution length.
    """

    def __init__(self, graph: Graph, model: CouplingModel | None = None):
        self.graph = graph
        self.model = model if model is not None else CouplingModel()
        h = self.model.coupling * graph.adjacency
        if self.model.diagonal != 0.0:
            h = h + self.model.diagonal * np.eye(graph.n_nodes)
        h.flags.writeable = False
        self._matrix = h
        self._spectrum: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self.graph.n_nodes

    @property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and orthonormal eigenvectors of the matrix."""
        if self._spectrum is None:
            w, v = np.linalg.eigh(self._matrix)
            w.flags.writeable = False
            v.flags.writeable = False
            self._spectrum = (w, v)
        return self._spectrum


def build_hamiltonian(graph: Graph, model: CouplingModel | None = None) -> Hamiltonian:
    return Hamiltonian(graph, model)


def entry_state(graph: Graph) -> np.ndarray:
    """Unit amplitude on the graph's entry node."""
    psi = np.zeros(graph.n_nodes, dtype=complex)
    psi[graph.entry] = 1.0
    return psi


def _check_length(z: float) -> float:
    z = float(z)
    if not np.isfinite(z):
        raise ValueError(f"evolution length must be finite, got {z}")
    if z < 0.0:
        raise ValueError(f"evolution length must be >= 0, got {z}")
    return z


def evolve_quantum(hamiltonian: Hamiltonian, psi0: np.ndarray, z: float) -> np.ndarray:
    """Propagate an amplitude vector over length z.

    Parameters
    ----------
    hamiltonian : Hamiltonian
        Generator whose cached spectrum drives the evolution.
    psi0 : complex array, shape (N,)
        Initial amplitudes over the graph's nodes.
    z : float
        Evolution length in mm, >= 0.

    Returns
    -------
    complex array, shape (N,)
        The evolved amplitudes.  The Euclidean norm of the input is
        preserved to rounding because the propagator is unitary.
    """
    z = _check_length(z)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (hamiltonian.dim,):
        raise ValueError(
            f"state has shape {psi0.shape}, expected ({hamiltonian.dim},)"
        )
    w, v = hamiltonian.spectrum
    return v @ (np.exp(-1j * w * z) * (v.T @ psi0))


def amplitude_grid(hamiltonian: Hamiltonian, psi0: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Evolved amplitudes at every length of a grid, shape (len(zs), N).

    One matrix product per grid instead of one factorisation per point;
    scan loops should prefer this over repeated :func:`evolve_quantum`.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (hamiltonian.dim,):
        raise ValueError(f"state has shape {psi0.shape}, expected ({hamiltonian.dim},)")
    zs = np.asarray(zs, dtype=float)
    if zs.ndim != 1:
        raise ValueError("length grid must be one-dimensional")
    if zs.size and (not np.all(np.isfinite(zs)) or zs.min() < 0.0):
        raise ValueError("length grid must be finite and >= 0")
    w, v = hamiltonian.spectrum
    modes = v.T @ psi0
    return (np.exp(-1j * np.outer(zs, w)) * modes) @ v.T


def site_probability_curve(
    hamiltonian: Hamiltonian, psi0: np.ndarray, zs: np.ndarray, site: int
) -> np.ndarray:
    """Probability at one site across a length grid, without forming full states."""
    if not (0 <= site < hamiltonian.dim):
        raise ValueError(f"site {site} outside 0..{hamiltonian.dim - 1}")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (hamiltonian.dim,):
        raise ValueError(f"state has shape {psi0.shape}, expected ({hamiltonian.dim},)")
    zs = np.asarray(zs, dtype=float)
    if zs.size and (not np.all(np.isfinite(zs)) or zs.min() < 0.0):
        raise ValueError("length grid must be finite and >= 0")
    w, v = hamiltonian.spectrum
    weights = v[site, :] * (v.T @ psi0)
    amps = np.exp(-1j * np.outer(zs, w)) @ weights
    return np.abs(amps) ** 2


def site_probabilities(psi: np.ndarray) -> np.ndarray:
    """Born-rule site distribution |psi_i|^2 of an amplitude vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.abs(psi) ** 2
