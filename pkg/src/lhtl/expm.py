"""Dense matrix exponential by scaling and squaring with diagonal Pade kernels.

Follows Higham (2005): pick the cheapest Pade degree whose backward-error
bound covers the 1-norm, otherwise scale by 2^-s, apply the degree-13
approximant and square s times.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ExpmError", "matrix_exponential", "MAX_SQUARINGS"]

MAX_SQUARINGS = 60

_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
        16380.0, 182.0, 1.0,
    ),
}


_FLUSH = 1e-150


def _flush(X: np.ndarray) -> np.ndarray:
    # Exponentials of banded generators have entries decaying to underflow; their
    # products go subnormal inside BLAS and stall it. Entries 150 decades below
    # the largest one cannot affect the result at double precision.
    mag = np.abs(X)
    X[mag < _FLUSH * mag.max()] = 0.0
    return X


class ExpmError(ArithmeticError):
    """Input not finite, or the scaling ladder would exceed its depth limit."""


def _pade_low(A: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    powers = [ident, A2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ A2)
    odd = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    even = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return A @ odd, even


def _pade13(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = _PADE[13]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = _flush(A @ A)
    A4 = _flush(A2 @ A2)
    A6 = _flush(A2 @ A4)
    inner_u = _flush(b[13] * A6 + b[11] * A4 + b[9] * A2)
    U = A @ _flush(A6 @ inner_u + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    inner_v = _flush(b[12] * A6 + b[10] * A4 + b[8] * A2)
    V = A6 @ inner_v + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    return U, V


def matrix_exponential(M, max_squarings: int = MAX_SQUARINGS) -> np.ndarray:
    """exp(M) for a square real or complex matrix.

    Raises :class:`ExpmError` for non-finite input or when more than
    ``max_squarings`` squarings would be needed.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.issubdtype(A.dtype, np.inexact):
        A = A.astype(float)
    if not np.all(np.isfinite(A)):
        raise ExpmError("matrix has non-finite entries")
    n = A.shape[0]
    if n == 0:
        return A.copy()

    norm1 = float(np.abs(A).sum(axis=0).max())
    if norm1 == 0.0:
        return np.eye(n, dtype=A.dtype)

    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_low(A, m)
            return np.linalg.solve(V - U, V + U)

    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    if s > max_squarings:
        raise ExpmError(f"scaling ladder needs {s} squarings (limit {max_squarings})")
    U, V = _pade13(A / 2.0**s)
    X = _flush(np.linalg.solve(_flush(V - U), _flush(V + U)))
    for _ in range(s):
        X = _flush(X @ X)
    return X
