"""Commutative hypercomplex algebra realized by circulant matrices.

A hypercomplex number of order n is a direct sum of n copies of the complex
plane.  In the eigenbasis the algebra is componentwise, so a number is stored
as its n complex components.  The equivalent matrix picture is an n x n
circulant: the number with components ``lam`` maps to the circulant whose
spectrum is ``lam``, and multiplication of numbers is multiplication of the
matrices.  The spectrum convention is prefactor-free,

    lam_j = sum_r c_r * exp(2*pi*i*j*r/n),

where ``c`` is the first row of the circulant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "CirculantMatrix",
    "HyperNumber",
    "ProjectorBasis",
    "shift_power",
    "eigenvalues",
    "projector",
    "hyper_mul",
]


class DimensionError(ValueError):
    """Raised for empty or mismatched algebra dimensions."""


def _as_components(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex).ravel()
    if arr.size == 0:
        raise DimensionError(f"{name} must have at least one component")
    return arr


@dataclass(frozen=True)
class CirculantMatrix:
    """Circulant matrix stored by its first row."""

    first_row: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "first_row", _as_components(self.first_row, "first_row"))

    @property
    def n(self) -> int:
        return self.first_row.size

    def dense(self) -> np.ndarray:
        """Full matrix; row j is the first row cyclically shifted j places right."""
        n = self.n
        out = np.empty((n, n), dtype=complex)
        cols = np.arange(n)
        for j in range(n):
            out[j] = self.first_row[(cols - j) % n]
        return out

    def eigenvalues(self) -> np.ndarray:
        return eigenvalues(self)

    def __matmul__(self, other: "CirculantMatrix") -> "CirculantMatrix":
        if not isinstance(other, CirculantMatrix):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")
        # product of circulants is the cyclic convolution of their first rows
        lam = eigenvalues(self) * eigenvalues(other)
        return CirculantMatrix(np.fft.fft(lam) / self.n)

    def __add__(self, other: "CirculantMatrix") -> "CirculantMatrix":
        if not isinstance(other, CirculantMatrix):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")
        return CirculantMatrix(self.first_row + other.first_row)


def shift_power(n: int, p: int) -> CirculantMatrix:
    """p-th power of the elementary cyclic shift (ones on the p-th superdiagonal, wrapped)."""
    if n <= 0:
        raise DimensionError(f"invalid dimension n={n}")
    row = np.zeros(n, dtype=complex)
    row[p % n] = 1.0
    return CirculantMatrix(row)


def eigenvalues(c) -> np.ndarray:
    """Spectrum lam_j = sum_r c_r exp(2*pi*i*j*r/n) of a circulant given by its first row."""
    row = c.first_row if isinstance(c, CirculantMatrix) else _as_components(c, "first_row")
    return row.size * np.fft.ifft(row)


@dataclass(frozen=True)
class HyperNumber:
    """Hypercomplex number stored by its eigenbasis components."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "components", _as_components(self.components, "components"))

    @property
    def n(self) -> int:
        return self.components.size

    @classmethod
    def from_eigenvalues(cls, values) -> "HyperNumber":
        return cls(np.asarray(values, dtype=complex))

    def to_eigenvalues(self) -> np.ndarray:
        return self.components.copy()

    def to_circulant(self) -> CirculantMatrix:
        """Circulant whose spectrum equals the components (inverse of ``from_eigenvalues``)."""
        return CirculantMatrix(np.fft.fft(self.components) / self.n)

    def __mul__(self, other: "HyperNumber") -> "HyperNumber":
        if not isinstance(other, HyperNumber):
            return NotImplemented
        return hyper_mul(self, other)

    def __add__(self, other: "HyperNumber") -> "HyperNumber":
        if not isinstance(other, HyperNumber):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")
        return HyperNumber(self.components + other.components)


def hyper_mul(a: HyperNumber, b: HyperNumber) -> HyperNumber:
    """Componentwise product; the algebra is commutative and associative."""
    if a.n != b.n:
        raise DimensionError(f"dimension mismatch: {a.n} vs {b.n}")
    return HyperNumber(a.components * b.components)


def projector(n: int, alpha: int) -> HyperNumber:
    """alpha-th primitive idempotent: unit component alpha, zero elsewhere."""
    if n <= 0:
        raise DimensionError(f"invalid dimension n={n}")
    if not 0 <= alpha < n:
        raise DimensionError(f"projector index {alpha} outside 0..{n - 1}")
    comp = np.zeros(n, dtype=complex)
    comp[alpha] = 1.0
    return HyperNumber(comp)


@dataclass(frozen=True)
class ProjectorBasis:
    """The complete set of primitive idempotents of order n."""

    n: int

    def __post_init__(self):
        if self.n <= 0:
            raise DimensionError(f"invalid dimension n={self.n}")

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, alpha: int) -> HyperNumber:
        return projector(self.n, alpha)

    def __iter__(self):
        return (projector(self.n, alpha) for alpha in range(self.n))

    def identity(self) -> HyperNumber:
        """Sum of all projectors: the multiplicative unit."""
        return HyperNumber(np.ones(self.n, dtype=complex))
