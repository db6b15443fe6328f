"""Dense linear algebra on the molecule (x) cavity product space.

The molecule has three levels ``|1>, |2>, |3>`` (zero-based indices 0, 1, 2)
and the cavity is a Fock space truncated at ``N`` photons.  Product-space
operators are ``kron(molecule_op, cavity_op)``: the molecule index varies
slowest, so basis state ``|i>_e |m>_c`` sits at row ``i * (N + 1) + m``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammainc

N_LEVELS = 3

CArray = NDArray[np.complex128]


class TruncationError(ValueError):
    """Fock truncation too small for the requested state."""

    def __init__(self, message: str, required_N: int | None = None, tail: float | None = None):
        super().__init__(message)
        self.required_N = required_N
        self.tail = tail


class DimensionError(ValueError):
    pass


def kron(a: ArrayLike, b: ArrayLike) -> CArray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def annihilation(N: int) -> CArray:
    """``(N+1) x (N+1)`` lowering operator with ``<n-1|a|n> = sqrt(n)``."""
    if N < 1:
        raise ValueError(f"Fock truncation N must be >= 1, got {N}")
    return np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), k=1).astype(complex)


def creation(N: int) -> CArray:
    return annihilation(N).conj().T


def number_operator(N: int) -> CArray:
    return np.diag(np.arange(N + 1, dtype=float)).astype(complex)


def transition(i: int, j: int) -> CArray:
    """Molecular ``|i><j|`` with zero-based level indices."""
    op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    op[i, j] = 1.0
    return op


def embed(mol_op: ArrayLike | None, cav_op: ArrayLike | None, N: int) -> CArray:
    """Lift a molecule and/or cavity factor onto the product space.

    Either factor may be ``None`` to mean the identity.  Every operator on the
    product space goes through here so the ordering convention lives in one place.
    """
    mol = np.eye(N_LEVELS) if mol_op is None else np.asarray(mol_op)
    cav = np.eye(N + 1) if cav_op is None else np.asarray(cav_op)
    if mol.shape != (N_LEVELS, N_LEVELS):
        raise DimensionError(f"molecule factor must be 3x3, got {mol.shape}")
    if cav.shape != (N + 1, N + 1):
        raise DimensionError(f"cavity factor must be {(N + 1, N + 1)}, got {cav.shape}")
    return kron(mol, cav)


def product_dim(N: int) -> int:
    return N_LEVELS * (N + 1)


def truncation_of(dim: int) -> int:
    if dim % N_LEVELS:
        raise DimensionError(f"dimension {dim} is not divisible by {N_LEVELS}")
    return dim // N_LEVELS - 1


def coherent_tail(alpha: complex, N: int) -> float:
    """Probability mass of a coherent state above ``N`` photons."""
    # Poisson(|alpha|^2) survival beyond N equals the regularized lower gamma P(N+1, |alpha|^2)
    return float(gammainc(N + 1, abs(alpha) ** 2))


def required_truncation(alpha: complex, tol: float = 1e-10) -> int:
    N = 1
    while coherent_tail(alpha, N) >= tol:
        N += 1
    return N


def coherent_state(alpha: complex, N: int, tol: float = 1e-10) -> CArray:
    """Truncated coherent state ``|alpha>`` renormalized to unit norm.

    Raises ``TruncationError`` when more than ``tol`` of the probability lies
    above ``N`` photons.
    """
    if N < 1:
        raise ValueError(f"Fock truncation N must be >= 1, got {N}")
    tail = coherent_tail(alpha, N)
    if tail >= tol:
        need = required_truncation(alpha, tol)
        raise TruncationError(
            f"coherent state alpha={alpha} leaks {tail:.3e} above N={N}; need N >= {need}",
            required_N=need,
            tail=tail,
        )
    n = np.arange(N + 1)
    # log-space amplitudes avoid overflow of alpha**n / sqrt(n!) at large n
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        c = np.zeros(N + 1, dtype=complex)
        c[0] = 1.0
        return c
    r, theta = abs(alpha), np.angle(alpha)
    mag = np.exp(-0.5 * r * r + n * math.log(r) - 0.5 * log_fact)
    c = mag * np.exp(1j * n * theta)
    return c / np.linalg.norm(c)


def ket(level: int, N: int, photons: int = 0) -> CArray:
    """Product basis ket ``|level>_e |photons>_c`` (zero-based level)."""
    psi = np.zeros(product_dim(N), dtype=complex)
    psi[level * (N + 1) + photons] = 1.0
    return psi


def product_state(mol: ArrayLike, cav: ArrayLike) -> CArray:
    return np.kron(np.asarray(mol, dtype=complex), np.asarray(cav, dtype=complex))


def projector(psi: ArrayLike) -> CArray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def expectation(op: ArrayLike, rho: ArrayLike, hermitian: bool | None = None) -> complex:
    """``Tr[op rho]``.

    For a Hermitian ``op`` the imaginary part must vanish (< 1e-8); that is
    checked and the real value returned as a complex with zero imaginary part.
    """
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape != rho.shape or op.ndim != 2:
        raise DimensionError(f"operator {op.shape} and state {rho.shape} do not match")
    val = complex(np.einsum("ij,ji->", op, rho))
    if hermitian is None:
        hermitian = np.allclose(op, op.conj().T, atol=1e-12)
    if hermitian:
        if abs(val.imag) >= 1e-8:
            raise ValueError(f"expectation of Hermitian operator has imaginary part {val.imag:.3e}")
        val = complex(val.real, 0.0)
    return val


def partial_trace_molecule(rho: ArrayLike) -> CArray:
    """Reduced cavity state ``Tr_e[rho]``."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    N = truncation_of(d)
    n = N + 1
    return np.einsum("iaib->ab", rho.reshape(N_LEVELS, n, N_LEVELS, n))


def partial_trace_cavity(rho: ArrayLike) -> CArray:
    rho = np.asarray(rho)
    n = truncation_of(rho.shape[0]) + 1
    return np.einsum("iaja->ij", rho.reshape(N_LEVELS, n, N_LEVELS, n))


def check_density(rho: ArrayLike, tol: float = 1e-9, eig_tol: float = 1e-7) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and positive."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix trace {tr.real:.12f} != 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < -eig_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam:.3e}")
