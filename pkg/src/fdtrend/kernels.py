"""Compactly supported smoothing kernels with closed-form CDFs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidBandwidthError, ValidationError


@dataclass(frozen=True)
class Kernel:
    """Symmetric probability density supported on [-1, 1].

    Attributes
    ----------
    name : str
        Registry key ("epanechnikov", "triangular" or "biweight").
    poly_degree : int
        Maximum polynomial degree of the density on each piece.
    breakpoints : tuple of float
        Interior points of (-1, 1) where the polynomial piece changes.
    """

    name: str
    poly_degree: int
    breakpoints: tuple[float, ...]
    _pdf: Callable[[np.ndarray], np.ndarray]
    _cdf: Callable[[np.ndarray], np.ndarray]
    support_radius: float = 1.0

    def __call__(self, u):
        return eval_kernel(self, u)

    def cdf(self, u):
        return kernel_cdf(self, u)

    def scaled(self, x, h):
        """K_h(x) = K(x / h) / h."""
        return eval_kernel(self, np.asarray(x, dtype=float) / h) / h

    @property
    def quadrature_order(self) -> int:
        # Gauss-Legendre points needed to integrate (degree d piece) x (linear) exactly.
        return -(-(self.poly_degree + 2) // 2)


def _epan_pdf(u):
    return 0.75 * (1.0 - u * u)


def _epan_cdf(u):
    return 0.5 + 0.75 * (u - u**3 / 3.0)


def _tri_pdf(u):
    return 1.0 - np.abs(u)


def _tri_cdf(u):
    return np.where(u <= 0.0, 0.5 * (1.0 + u) ** 2, 1.0 - 0.5 * (1.0 - u) ** 2)


def _biweight_pdf(u):
    return (15.0 / 16.0) * (1.0 - u * u) ** 2


def _biweight_cdf(u):
    return 0.5 + (15.0 / 16.0) * (u - 2.0 * u**3 / 3.0 + u**5 / 5.0)


EPANECHNIKOV = Kernel("epanechnikov", 2, (), _epan_pdf, _epan_cdf)
TRIANGULAR = Kernel("triangular", 1, (0.0,), _tri_pdf, _tri_cdf)
BIWEIGHT = Kernel("biweight", 4, (), _biweight_pdf, _biweight_cdf)

KERNELS = {k.name: k for k in (EPANECHNIKOV, TRIANGULAR, BIWEIGHT)}


def get_kernel(name) -> Kernel:
    """Look up a kernel by name; a :class:`Kernel` instance passes through."""
    if isinstance(name, Kernel):
        return name
    try:
        return KERNELS[str(name).lower()]
    except KeyError:
        raise ValidationError(
            f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}"
        ) from None


def eval_kernel(kernel: Kernel, u):
    """Density K(u), zero outside [-1, 1]. Scalar in, scalar out."""
    arr = np.asarray(u, dtype=float)
    inside = np.abs(arr) <= 1.0
    out = np.where(inside, kernel._pdf(np.where(inside, arr, 0.0)), 0.0)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def kernel_cdf(kernel: Kernel, u):
    """F(u) = integral of K over [-1, u], clamped to [0, 1]."""
    arr = np.asarray(u, dtype=float)
    clipped = np.clip(arr, -1.0, 1.0)
    out = np.clip(kernel._cdf(clipped), 0.0, 1.0)
    out = np.where(arr <= -1.0, 0.0, np.where(arr >= 1.0, 1.0, out))
    return float(out) if out.ndim == 0 else out


def boundary_norm(kernel: Kernel, t, h: float, T: float):
    """Kernel mass inside the observation window, int_0^T K_h(t - u) du.

    Equals ``F(t/h) - F((t - T)/h)``; it is exactly 1 whenever the scaled
    kernel support around ``t`` lies inside [0, T].
    """
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h}")
    t = np.asarray(t, dtype=float)
    out = kernel_cdf(kernel, t / h) - kernel_cdf(kernel, (t - T) / h)
    return float(out) if np.ndim(out) == 0 else out
