"""Matrix-free linear operators on periodic grid functions.

Operators compose spectral derivative passes and pointwise
multiplications; the algebra (+, -, scalar *, @ for composition) builds
the larger expressions.  Dense materialization is allowed up to 4096
grid dimensions (eigen-decompositions stay on the circle).
"""

from __future__ import annotations

import numpy as np

DENSE_LIMIT = 4096


class LinOp:
    """Linear transformation of complex grid functions."""

    def __init__(self, apply_fn, shape, label=""):
        self._apply = apply_fn
        self.shape = tuple(shape)
        self.label = label

    def __call__(self, psi):
        return self._apply(np.asarray(psi, dtype=complex))

    def __add__(self, other):
        other = _coerce(other, self.shape)
        return LinOp(lambda p: self(p) + other(p), self.shape,
                     f"({self.label}+{other.label})")

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other, self.shape)
        return LinOp(lambda p: self(p) - other(p), self.shape,
                     f"({self.label}-{other.label})")

    def __neg__(self):
        return LinOp(lambda p: -self(p), self.shape, f"(-{self.label})")

    def __mul__(self, scalar):
        return LinOp(lambda p: scalar * self(p), self.shape,
                     f"({scalar}*{self.label})")

    __rmul__ = __mul__

    def __matmul__(self, other):
        return LinOp(lambda p: self(other(p)), self.shape,
                     f"({self.label}@{other.label})")

    @property
    def dense_materializable(self):
        return int(np.prod(self.shape)) <= DENSE_LIMIT

    def dense(self):
        """Materialize by applying to the coordinate basis."""
        dim = int(np.prod(self.shape))
        if dim > DENSE_LIMIT:
            raise ValueError(f"grid dimension {dim} exceeds dense limit {DENSE_LIMIT}")
        cols = np.empty((dim, dim), dtype=complex)
        basis = np.zeros(dim, dtype=complex)
        for j in range(dim):
            basis[j] = 1.0
            cols[:, j] = self(basis.reshape(self.shape)).ravel()
            basis[j] = 0.0
        return cols


def _coerce(value, shape):
    if isinstance(value, LinOp):
        return value
    if np.isscalar(value):
        return LinOp(lambda p: value * p, shape, f"{value}")
    raise TypeError(f"cannot combine LinOp with {type(value)!r}")


def identity(shape):
    return LinOp(lambda p: p.copy(), shape, "I")


def zero(shape):
    return LinOp(lambda p: np.zeros_like(p), shape, "0")


def multiplication(coef, label="m"):
    coef = np.asarray(coef)
    return LinOp(lambda p: coef * p, coef.shape, label)


def _wavenumbers(n):
    return np.fft.fftfreq(n, d=1.0 / n) * 1j  # i*k for period 2*pi


def spectral_derivative(shape, axis, label=None):
    """Exact Fourier differentiation along one periodic axis."""
    ik = _wavenumbers(shape[axis])
    expand = [None] * len(shape)
    expand[axis] = slice(None)
    ik = ik[tuple(expand)]

    def apply_fn(psi):
        return np.fft.ifft(ik * np.fft.fft(psi, axis=axis), axis=axis)

    return LinOp(apply_fn, shape, label or f"d_{axis}")


def inner(weights, phi, psi):
    """Weighted inner product <phi, psi> = sum w conj(phi) psi."""
    return complex(np.sum(weights * np.conj(phi) * psi))


def norm_w(weights, psi):
    return float(np.sqrt(np.real(inner(weights, psi, psi))))
