"""Floating-point cross-checks for the exact pipeline.

Nothing here feeds back into symbolic results; the functions only produce
numbers that the tests compare against exact values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "OracleError",
    "FitResult",
    "gaussian_moment_numeric",
    "circle_spectral_heat_trace",
    "theta_sum",
    "fit_asymptotics",
    "circle_heat_fit",
]


class OracleError(RuntimeError):
    """Quadrature or fit failed to reach the requested accuracy."""


@dataclass(frozen=True)
class FitResult:
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]
    residual: float
    condition: float

    def coefficient(self, exponent) -> float:
        for e, c in zip(self.exponents, self.coefficients):
            if abs(e - float(exponent)) < 1e-12:
                return c
        raise KeyError(exponent)


def gaussian_moment_numeric(beta: Sequence[int], n: int | None = None, tol: float = 1e-10) -> float:
    """``(2 pi)^{-n} int xi^beta exp(-|xi|^2) d xi`` by adaptive quadrature.

    The integrand factorizes, so the integral is a product of 1-D
    quadratures; each is carried to ``tol`` relative to the final value.

    Parameters
    ----------
    beta : sequence of int
        Exponent of each coordinate.
    n : int, optional
        Dimension; defaults to ``len(beta)``.
    """
    beta = tuple(int(b) for b in beta)
    n = len(beta) if n is None else n
    if len(beta) != n:
        raise ValueError(f"beta has {len(beta)} entries, expected {n}")
    if n > 3 or sum(beta) > 8 or min(beta, default=0) < 0:
        raise ValueError("supported range is n <= 3, |beta| <= 8")
    value = 1.0
    for b in beta:
        if b % 2:
            return 0.0
        f = lambda s, b=b: s**b * math.exp(-s * s)
        # integrand is even; integrate the half line with an absolute target
        v, err = integrate.quad(f, 0.0, np.inf, epsabs=tol / 10, epsrel=1e-13, limit=200)
        if err > tol / 10:
            raise OracleError(f"quadrature for exponent {b} reached only {err:.2e}")
        value *= 2.0 * v / (2.0 * math.pi)
    return value


def theta_sum(t: float, cutoff: int = 10_000) -> float:
    """``sum_{k in Z} exp(-t k^2)`` by direct summation."""
    k = np.arange(1, cutoff + 1, dtype=float)
    return 1.0 + 2.0 * float(np.sum(np.exp(-t * k * k)))


def circle_spectral_heat_trace(
    V, t_grid: Sequence[float], basis_size: int = 257
) -> np.ndarray:
    """``sum_j exp(-t lambda_j)`` for ``-d^2/dx^2 + V`` on the circle of length ``2 pi``.

    ``V`` is a constant or a map ``{k: v_k}`` of Fourier coefficients,
    ``V(x) = sum_k v_k exp(i k x)``; it must be real (``v_{-k} = conj(v_k)``).
    The operator is assembled on the modes ``|k| <= basis_size // 2``.
    """
    if basis_size < 64:
        raise ValueError("basis_size must be at least 64")
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(t <= 0) or np.any(t > 1):
        raise ValueError("t_grid must lie in (0, 1]")
    coeffs: Mapping[int, complex] = {0: V} if np.isscalar(V) else dict(V)
    N = basis_size // 2
    modes = np.arange(-N, N + 1)
    H = np.diag(modes.astype(float) ** 2).astype(complex)
    for k, v in coeffs.items():
        H += complex(v) * np.eye(len(modes), k=-int(k))
    if not np.allclose(H, H.conj().T, atol=1e-14):
        raise OracleError("assembled operator is not Hermitian; V must be real")
    vmax = sum(abs(complex(v)) for v in coeffs.values())
    tmin = float(t.min())
    # tail of the discarded modes, shifted by at most exp(t |V|)
    tail = 2.0 * math.exp(-tmin * (N + 1) ** 2 + tmin * vmax) / (1.0 - math.exp(-tmin * (2 * N + 3)))
    if tail > 1e-8:
        raise OracleError(f"basis too small: estimated truncation error {tail:.1e} at t={tmin}")
    lam = np.linalg.eigvalsh(H)
    return np.exp(-np.outer(t, lam)).sum(axis=1)


def fit_asymptotics(samples, exponents: Sequence[float], max_condition: float = 1e12) -> FitResult:
    """Least-squares fit of ``sum_e c_e t^e`` to ``(t, value)`` samples.

    Columns are normalized before the condition number is checked.
    """
    exps = [float(e) for e in exponents]
    if not exps:
        raise ValueError("at least one exponent is required")
    if len(set(exps)) != len(exps):
        raise ValueError("exponents must be distinct")
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("samples must be (t, value) pairs")
    if len(data) < 2 * len(exps):
        raise ValueError(f"need at least {2 * len(exps)} samples for {len(exps)} exponents")
    t, y = data[:, 0], data[:, 1]
    A = t[:, None] ** np.asarray(exps)[None, :]
    scale = np.linalg.norm(A, axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > max_condition:
        raise OracleError(f"ill-conditioned design matrix (condition {cond:.2e})")
    sol, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = sol / scale
    residual = float(np.linalg.norm(A @ coef - y))
    return FitResult(tuple(exps), tuple(float(c) for c in coef), residual, cond)


def circle_heat_fit(
    V: float, terms: int = 7, t_range=(0.005, 0.1), samples: int = 40, basis_size: int = 257
) -> FitResult:
    """Fit ``t^{1/2} trace(t) / (2 pi)`` by a polynomial in ``t`` with ``terms`` coefficients.

    The coefficient of ``t^l`` estimates ``b_l`` of ``-d^2/dx^2 + V``.
    """
    t = np.linspace(t_range[0], t_range[1], samples)
    tr = circle_spectral_heat_trace(V, t, basis_size)
    y = np.sqrt(t) * tr / (2.0 * math.pi)
    return fit_asymptotics(np.column_stack([t, y]), list(range(terms)))
