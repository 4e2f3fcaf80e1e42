"""Arithmetic on the Siegel upper half-space.

Points are stored as ``(zprime, zn)`` with ``zprime`` of shape ``(..., n-1)``
and ``zn`` of shape ``(...)``, so a single :class:`SiegelPoint` can also hold a
batch of points.  All functions broadcast over the leading batch axes.

The Hermitian product on C^{n-1} is linear in the first slot::

    <z', w'> = sum_j z'_j * conj(w'_j)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

RADICAND_TOL = 1e-12


class DomainError(ValueError):
    """A point outside U, or a power base outside the right half-plane."""


class NumericConsistencyError(ArithmeticError):
    """A quantity that is bounded analytically came out of range numerically."""


@dataclass(frozen=True)
class SiegelPoint:
    zprime: np.ndarray
    zn: np.ndarray

    def __post_init__(self):
        zp = np.asarray(self.zprime, dtype=complex)
        zn = np.asarray(self.zn, dtype=complex)
        if zp.ndim == 0:
            raise ValueError("zprime needs a trailing coordinate axis (use shape (0,) for n=1)")
        if zp.shape[:-1] != zn.shape:
            zp, zn = _broadcast_point(zp, zn)
        object.__setattr__(self, "zprime", zp)
        object.__setattr__(self, "zn", zn)

    @classmethod
    def of(cls, zprime: Sequence[complex], zn: complex) -> SiegelPoint:
        return cls(np.asarray(list(zprime), dtype=complex).reshape(-1), np.asarray(zn, dtype=complex))

    @classmethod
    def at_height(cls, height: float, n: int) -> SiegelPoint:
        """The point (0', height*i); its height rho is ``height``."""
        return cls(np.zeros(n - 1, dtype=complex), np.asarray(1j * height))

    @property
    def n(self) -> int:
        return self.zprime.shape[-1] + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.zn.shape

    def __len__(self) -> int:
        return len(self.zn)

    def __getitem__(self, idx) -> SiegelPoint:
        return SiegelPoint(self.zprime[idx], self.zn[idx])

    def to_list(self) -> list[complex]:
        """Coordinates ``[z_1, ..., z_{n-1}, z_n]`` of a single point."""
        if self.zn.ndim:
            raise ValueError("to_list() is only defined for a single point")
        return [complex(c) for c in self.zprime] + [complex(self.zn)]


def _broadcast_point(zp, zn):
    batch = np.broadcast_shapes(zp.shape[:-1], zn.shape)
    return np.broadcast_to(zp, batch + zp.shape[-1:]), np.broadcast_to(zn, batch)


def _sqnorm(zp: np.ndarray) -> np.ndarray:
    # written as z*conj(z) so that pairing(z, z) reproduces rho(z) bit for bit
    return np.sum(zp * np.conj(zp), axis=-1).real


def rho(z: SiegelPoint) -> np.ndarray | float:
    """Height Im z_n - |z'|^2; positive exactly on U."""
    out = z.zn.imag - _sqnorm(z.zprime)
    return float(out) if np.ndim(out) == 0 else out


def hermitian(zp: np.ndarray, wp: np.ndarray) -> np.ndarray:
    return np.sum(zp * np.conj(wp), axis=-1)


def pairing(z: SiegelPoint, w: SiegelPoint) -> np.ndarray | complex:
    """rho(z, w) = (i/2)(conj(w_n) - z_n) - <z', w'>."""
    out = 0.5j * (np.conj(w.zn) - z.zn) - hermitian(z.zprime, w.zprime)
    return complex(out) if np.ndim(out) == 0 else out


def in_domain(z: SiegelPoint) -> np.ndarray | bool:
    return np.asarray(rho(z)) > 0


def require_domain(*points: SiegelPoint) -> None:
    for z in points:
        if not np.all(in_domain(z)):
            raise DomainError("point(s) outside the Siegel upper half-space (rho <= 0)")


def cpow(base, exponent: float):
    """Principal branch ``exp(exponent * Log(base))`` on the right half-plane."""
    b = np.asarray(base, dtype=complex)
    if np.any(b.real <= 0):
        raise DomainError("cpow base must have positive real part")
    out = np.exp(exponent * np.log(b))
    return complex(out) if out.ndim == 0 else out


def _distance_parts(z: SiegelPoint, w: SiegelPoint):
    rz = np.asarray(rho(z))
    rw = np.asarray(rho(w))
    d = _sqnorm(z.zprime - w.zprime)
    # Im rho(z,w) in real arithmetic, so that it vanishes exactly when z = w
    zp, wp = z.zprime, w.zprime
    cross = np.sum(zp.imag * wp.real - zp.real * wp.imag, axis=-1)
    im = np.asarray(0.5 * (w.zn.real - z.zn.real) - cross)
    # |rho(z,w)|^2 - rho(z)rho(w), expanded into nonnegative terms:
    # Re rho(z,w) = (rho(z) + rho(w) + |z'-w'|^2) / 2
    excess = ((rz - rw) ** 2 + 2.0 * d * (rz + rw) + d * d) / 4.0 + im * im
    sq = excess + rz * rw
    return rz, rw, excess, sq


def bergman_ratio(z: SiegelPoint, w: SiegelPoint):
    """|rho(z,w)|^2 / (rho(z) rho(w)), which is >= 1 on U x U."""
    require_domain(z, w)
    rz, rw, _, sq = _distance_parts(z, w)
    out = sq / (rz * rw)
    return float(out) if out.ndim == 0 else out


def distance_radicand(z: SiegelPoint, w: SiegelPoint):
    require_domain(z, w)
    _, _, excess, sq = _distance_parts(z, w)
    rad = excess / sq
    if np.any(rad < -RADICAND_TOL) or np.any(rad > 1 + RADICAND_TOL):
        raise NumericConsistencyError("Bergman radicand outside [0, 1] beyond tolerance")
    rad = np.clip(rad, 0.0, 1.0)
    return float(rad) if rad.ndim == 0 else rad


def bergman_distance(z: SiegelPoint, w: SiegelPoint):
    """artanh sqrt(1 - rho(z)rho(w)/|rho(z,w)|^2).

    Evaluated as log(1 + sqrt(rad)) + log(R)/2 with R the ratio from
    :func:`bergman_ratio`, which avoids artanh's cancellation near 1.
    """
    rad = np.asarray(distance_radicand(z, w))
    ratio = np.asarray(bergman_ratio(z, w))
    out = np.log1p(np.sqrt(rad)) + 0.5 * np.log(ratio)
    out = np.where(rad == 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def distance_from_ratio(ratio):
    """Bergman distance as a function of R = |rho(z,w)|^2/(rho(z)rho(w)) alone."""
    r = np.asarray(ratio, dtype=float)
    rad = np.clip(1.0 - 1.0 / r, 0.0, 1.0)
    return np.log1p(np.sqrt(rad)) + 0.5 * np.log(r)


def random_points(n: int, size: int, rng: np.random.Generator, log_height: float = 3.0) -> SiegelPoint:
    """Points of U with heights log-uniform on [e^-log_height, e^log_height] and Gaussian z', Re z_n."""
    h = np.exp(rng.uniform(-log_height, log_height, size))
    zp = (rng.standard_normal((size, n - 1)) + 1j * rng.standard_normal((size, n - 1))) / np.sqrt(2)
    x = rng.standard_normal(size) * 2.0
    return SiegelPoint(zp, x + 1j * (h + _sqnorm(zp)))
