"""Dense matrix-equation and matrix-function kernels.

Sylvester and Lyapunov solvers (Bartels-Stewart on a complex Schur form),
the principal matrix logarithm and its Frechet derivative (inverse scaling
and squaring on the triangular factor), and the band-limiting matrices that
turn standard Lyapunov right-hand sides into frequency-limited ones.

All routines work on dense numpy arrays and are pure functions of their
inputs; nothing here keeps state between calls.
"""

import numpy as np
from scipy.linalg import schur, solve_triangular
from scipy.special import roots_legendre

from .exceptions import (
    BranchCut,
    DimensionMismatch,
    NotHurwitz,
    SingularResolvent,
    SpectrumClash,
)

__all__ = [
    "hurwitz_status",
    "solve_sylvester",
    "solve_lyapunov",
    "matrix_log",
    "frechet_log",
    "s_omega",
    "s_band",
]

# Inverse scaling and squaring: take triangular square roots until the
# 1-norm distance from the identity is below _SQRT_TARGET, then apply the
# diagonal Pade approximant of this degree (evaluated in partial-fraction
# form through Gauss-Legendre nodes on [0, 1]).
_PADE_DEGREE = 12
_SQRT_TARGET = 0.15
_MAX_SQRTS = 60

_GL_NODES, _GL_WEIGHTS = roots_legendre(_PADE_DEGREE)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0

# Relative margin below zero that the spectrum must clear to count as
# Hurwitz; guards the logarithm branch cut at -A - i*omega*I.
_HURWITZ_RTOL = 1e-12


def _square(M, name):
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def hurwitz_status(A):
    """Return ``(is_hurwitz, max_real_eig)`` for a square matrix.

    A matrix counts as Hurwitz when the largest real part of its spectrum
    is below ``-1e-12 * (1 + spectral_radius)``; the relative margin keeps
    marginally stable matrices away from the branch cut of the logarithms
    evaluated on ``-A - i*omega*I``.
    """
    A = _square(A, "A")
    if A.shape[0] == 0:
        return True, -np.inf
    eigs = np.linalg.eigvals(A)
    max_re = float(eigs.real.max())
    rho = float(np.abs(eigs).max())
    return max_re < -_HURWITZ_RTOL * (1.0 + rho), max_re


def _require_hurwitz(A, what="A"):
    ok, max_re = hurwitz_status(A)
    if not ok:
        raise NotHurwitz(f"{what} is not Hurwitz (max real eigenvalue {max_re:.3e})")


def _tri_sylvester(TA, TB, C):
    """Solve TA @ Y + Y @ TB + C = 0 for upper-triangular TA and TB."""
    n, m = C.shape
    Y = np.zeros((n, m), dtype=complex)
    eye = np.eye(n)
    for k in range(m):
        rhs = -C[:, k]
        if k:
            rhs = rhs - Y[:, :k] @ TB[:k, k]
        Y[:, k] = solve_triangular(TA + TB[k, k] * eye, rhs, lower=False)
    return Y


def _tri_lyapunov(T, W):
    """Solve T @ P + P @ T.T + W = 0 for upper-triangular T."""
    n = T.shape[0]
    P = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for k in range(n - 1, -1, -1):
        rhs = -W[:, k] - P[:, k + 1:] @ T[k, k + 1:]
        P[:, k] = solve_triangular(T + T[k, k] * eye, rhs, lower=False)
    return P


def solve_sylvester(A, B, C):
    """Solve the Sylvester equation ``A X + X B + C = 0``.

    Parameters
    ----------
    A : (n, n) array_like
    B : (m, m) array_like
    C : (n, m) array_like

    Returns
    -------
    X : (n, m) ndarray
        Real whenever all inputs are real.

    Raises
    ------
    SpectrumClash
        If an eigenvalue of ``A`` coincides with an eigenvalue of ``-B``
        within solver tolerance, so the equation is (near) singular.

    Notes
    -----
    Both operands are reduced to complex Schur form and the triangular
    system is solved column by column by back substitution.
    """
    A = _square(A, "A")
    B = _square(B, "B")
    C = np.atleast_2d(np.asarray(C))
    n, m = A.shape[0], B.shape[0]
    if C.shape != (n, m):
        raise DimensionMismatch(f"C must have shape {(n, m)}, got {C.shape}")
    if n == 0 or m == 0:
        return np.zeros((n, m))

    real_data = not any(np.iscomplexobj(M) for M in (A, B, C))
    TA, UA = schur(A.astype(complex), output="complex")
    TB, UB = schur(B.astype(complex), output="complex")

    la = np.diag(TA)
    mu = np.diag(TB)
    sep = np.abs(la[:, None] + mu[None, :])
    scale = 1.0 + np.abs(la)[:, None] + np.abs(mu)[None, :]
    if np.any(sep <= 1e-13 * scale):
        i, j = np.unravel_index(np.argmin(sep / scale), sep.shape)
        raise SpectrumClash(
            f"eigenvalue {la[i]:.6g} of A clashes with eigenvalue "
            f"{-mu[j]:.6g} of -B"
        )

    Y = _tri_sylvester(TA, TB, UA.conj().T @ C @ UB)
    X = UA @ Y @ UB.conj().T
    return X.real if real_data else X


def solve_lyapunov(A, W):
    """Solve the continuous Lyapunov equation ``A P + P A.T + W = 0``.

    ``A`` must be Hurwitz.  For symmetric ``W`` the result is symmetric up
    to roundoff.  Only one Schur decomposition is taken; the transposed
    side reuses it.
    """
    A = _square(A, "A")
    W = _square(W, "W")
    n = A.shape[0]
    if W.shape[0] != n:
        raise DimensionMismatch(f"W must have shape {(n, n)}, got {W.shape}")
    if n == 0:
        return np.zeros((0, 0))
    _require_hurwitz(A)

    real_data = not (np.iscomplexobj(A) or np.iscomplexobj(W))
    T, U = schur(A.astype(complex), output="complex")
    Pt = _tri_lyapunov(T, U.conj().T @ W @ U.conj())
    P = U @ Pt @ U.T
    return P.real if real_data else P


def _log_core(M, E=None):
    """Principal log of ``M`` and, if ``E`` is given, the Frechet
    derivative of the log at ``M`` in direction ``E``."""
    M = _square(M, "M").astype(complex)
    n = M.shape[0]
    if E is not None:
        E = _square(E, "E").astype(complex)
        if E.shape[0] != n:
            raise DimensionMismatch(f"E must have shape {(n, n)}, got {E.shape}")
    if n == 0:
        z = np.zeros((0, 0), dtype=complex)
        return z, (z if E is not None else None)

    T, U = schur(M, output="complex")
    lam = np.diag(T)
    tol = 1e-13 * np.maximum(np.abs(lam), 1.0)
    on_cut = (np.abs(lam) <= tol) | ((lam.real <= 0) & (np.abs(lam.imag) <= tol))
    if np.any(on_cut):
        raise BranchCut(
            f"eigenvalue {lam[np.argmax(on_cut)]:.6g} lies on the closed "
            "negative real axis; the principal logarithm is undefined"
        )

    F = U.conj().T @ E @ U if E is not None else None
    eye = np.eye(n)
    k = 0
    while np.linalg.norm(T - eye, 1) > _SQRT_TARGET:
        if k >= _MAX_SQRTS:
            raise np.linalg.LinAlgError(
                "matrix logarithm: square-root scaling did not converge"
            )
        R = _tri_sqrt(T)
        if F is not None:
            # d sqrt: R F' + F' R = F
            F = _tri_sylvester(R, R, -F)
        T = R
        k += 1

    X = T - eye
    L = np.zeros((n, n), dtype=complex)
    G = np.zeros((n, n), dtype=complex) if F is not None else None
    for t, w in zip(_GL_NODES, _GL_WEIGHTS):
        Mt = eye + t * X
        try:
            L += w * solve_triangular(Mt, X, lower=False)
            if F is not None:
                half = solve_triangular(Mt, F, lower=False)
                G += w * solve_triangular(Mt, half.T, lower=False,
                                          trans="T").T
        except np.linalg.LinAlgError as exc:  # pragma: no cover - scaled out
            raise SingularResolvent(str(exc)) from exc

    scale = 2.0 ** k
    logM = scale * (U @ L @ U.conj().T)
    if F is None:
        return logM, None
    return logM, scale * (U @ G @ U.conj().T)


def _tri_sqrt(T):
    """Principal square root of an upper-triangular matrix by the
    superdiagonal recurrence."""
    n = T.shape[0]
    R = np.zeros_like(T)
    np.fill_diagonal(R, np.sqrt(np.diag(T)))
    for d in range(1, n):
        for i in range(n - d):
            j = i + d
            s = R[i, i + 1:j] @ R[i + 1:j, j]
            R[i, j] = (T[i, j] - s) / (R[i, i] + R[j, j])
    return R


def matrix_log(M):
    """Principal matrix logarithm of a complex square matrix.

    The spectrum must avoid the closed negative real axis (including 0);
    eigenvalues of the result have imaginary parts in (-pi, pi].

    Raises
    ------
    BranchCut
        If an eigenvalue lies on the closed negative real axis within
        tolerance.
    """
    return _log_core(M)[0]


def frechet_log(M, E):
    """Frechet derivative of the matrix logarithm at ``M`` in direction ``E``.

    Equals the integral of ``(t(M-I)+I)^-1 E (t(M-I)+I)^-1`` over t in
    [0, 1] and is linear in ``E``.  Computed by differentiating the same
    scaling-and-squaring recurrence used by :func:`matrix_log`, which keeps
    the cost at a few triangular solves per square root.
    """
    return _log_core(M, E)[1]


def s_omega(A, omega):
    """Band-limiting matrix of a Hurwitz ``A`` for the band [-omega, omega].

    This is the frequency integral ``(1/2pi) * int_{-omega}^{omega}
    (i nu I - A)^-1 d nu``, evaluated in closed form as
    ``Re[(i/pi) log(-A - i omega I)]``.  It vanishes at ``omega = 0`` and
    tends to ``I/2`` as ``omega -> inf``, where the frequency-limited
    Lyapunov right-hand side collapses to the standard one.
    """
    A = np.asarray(A, dtype=float)
    _require_hurwitz(A)
    if not np.isfinite(omega) or omega < 0:
        raise ValueError(f"omega must be finite and nonnegative, got {omega}")
    return _s_omega_checked(A, omega)


def _s_omega_checked(A, omega):
    n = A.shape[0]
    if omega == 0.0:
        return np.zeros((n, n))
    L = matrix_log(-A - 1j * omega * np.eye(n))
    return np.ascontiguousarray((1j / np.pi * L).real)


def s_band(A, band):
    """Band-limiting matrix for a union of frequency intervals.

    ``band`` is iterated as ``(lo, hi)`` pairs in rad/s; each interval
    contributes the difference of its endpoint matrices, an endpoint at 0
    contributes the zero matrix and an endpoint at infinity contributes
    ``I/2``.
    """
    A = np.asarray(A, dtype=float)
    _require_hurwitz(A)
    n = A.shape[0]
    S = np.zeros((n, n))
    for lo, hi in band:
        S += _s_endpoint(A, hi) - _s_endpoint(A, lo)
    return S


def _s_endpoint(A, omega):
    if np.isinf(omega):
        return 0.5 * np.eye(A.shape[0])
    return _s_omega_checked(A, float(omega))
