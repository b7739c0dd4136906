"""
Dense operator algebra for small open quantum systems.

Operators and density matrices are plain complex ``numpy`` arrays of shape
``(dim, dim)``. Superoperators act on column-stacked (Fortran order)
vectorisations, so column ``j`` of ``rho`` occupies entries
``j*dim .. j*dim + dim - 1`` of ``vectorize(rho)``.

With that convention ``vec(A X B) = (B^T kron A) vec(X)`` and the Lindblad
generator reads

    L = -i (I kron H - H^T kron I)
        + sum_c [ conj(c) kron c - 1/2 (I kron c^dag c + (c^dag c)^T kron I) ]
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError

HERMITIAN_RTOL = 1e-12

# DensityMatrix invariant thresholds
RHO_HERMITIAN_TOL = 1e-10
RHO_TRACE_TOL = 1e-9
RHO_MIN_EIG_TOL = -1e-8


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def outer(p: int, q: int, dim: int) -> np.ndarray:
    """Return the transition operator ``|p><q|``."""
    m = np.zeros((dim, dim), dtype=complex)
    m[p, q] = 1.0
    return m


def _square(a, name="operator") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")


def hermitian_deviation(a: np.ndarray) -> float:
    """Largest absolute entry of ``a - a^dag``."""
    return float(np.max(np.abs(a - dag(a)))) if a.size else 0.0


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return hermitian_deviation(a) <= rtol * scale


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def commutator(a, b) -> np.ndarray:
    a, b = _square(a), _square(b)
    _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = _square(a), _square(b)
    _same_dim(a, b)
    return a @ b + b @ a


def dissipator(c, rho) -> np.ndarray:
    """Standard Lindblad dissipator ``c rho c^dag - 1/2 {c^dag c, rho}``.

    A term written as ``(gamma/2) (2 o rho o^dag - o^dag o rho - rho o^dag o)``
    is reproduced with ``c = sqrt(gamma) * o``.
    """
    c, rho = _square(c), _square(rho, "rho")
    _same_dim(c, rho)
    cdc = dag(c) @ c
    return c @ rho @ dag(c) - 0.5 * (cdc @ rho + rho @ cdc)


def lindblad_rhs(h, collapse: Iterable, rho) -> np.ndarray:
    """Evaluate ``-i[H, rho] + sum_c D[c] rho`` directly in matrix form."""
    out = -1j * commutator(h, rho)
    for c in collapse:
        out = out + dissipator(c, rho)
    return out


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def devectorize(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise InvalidArgumentError(f"vector of length {v.size} is not a vectorised {dim}x{dim} matrix")
    return v.reshape((dim, dim), order="F")


def build_liouvillian(h, collapse: Sequence = ()) -> np.ndarray:
    """Return the ``dim^2 x dim^2`` generator of the Lindblad master equation."""
    h = _square(h, "H")
    if not is_hermitian(h):
        raise InvalidArgumentError(
            f"Hamiltonian is not Hermitian (max |H - H^dag| = {hermitian_deviation(h):.3e})"
        )
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c in collapse:
        c = _square(c, "collapse operator")
        _same_dim(c, h)
        cdc = dag(c) @ c
        lv += np.kron(c.conj(), c) - 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return lv


def trace_functional(dim: int) -> np.ndarray:
    """Row vector ``t`` with ``t @ vectorize(rho) == trace(rho)``."""
    return vectorize(np.eye(dim, dtype=complex))


def min_eigenvalue(rho) -> float:
    rho = _square(rho, "rho")
    return float(np.linalg.eigvalsh(hermitize(rho))[0])


def purity(rho) -> float:
    return float(np.real(np.trace(rho @ rho)))


def trace_distance(a, b) -> float:
    """``1/2 ||a - b||_1`` for Hermitian ``a`` and ``b``."""
    diff = hermitize(np.asarray(a) - np.asarray(b))
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def density_violations(rho) -> dict:
    """Measure how far ``rho`` is from being a valid density matrix."""
    rho = np.asarray(rho)
    norm = np.linalg.norm(rho)
    herm = np.linalg.norm(rho - dag(rho)) / norm if norm else 0.0
    return {
        "hermiticity": float(herm),
        "trace": float(abs(np.trace(rho) - 1.0)),
        "min_eigenvalue": min_eigenvalue(rho),
    }


def check_density_matrix(
    rho,
    herm_tol: float = RHO_HERMITIAN_TOL,
    trace_tol: float = RHO_TRACE_TOL,
    min_eig: float = RHO_MIN_EIG_TOL,
) -> np.ndarray:
    """Validate ``rho`` and return it as a complex array; raise on violation."""
    rho = _square(rho, "rho")
    v = density_violations(rho)
    if v["hermiticity"] > herm_tol:
        raise InvalidArgumentError(f"density matrix not Hermitian (relative deviation {v['hermiticity']:.3e})")
    if v["trace"] > trace_tol:
        raise InvalidArgumentError(f"density matrix trace deviates from 1 by {v['trace']:.3e}")
    if v["min_eigenvalue"] < min_eig:
        raise InvalidArgumentError(f"density matrix has negative eigenvalue {v['min_eigenvalue']:.3e}")
    return rho
