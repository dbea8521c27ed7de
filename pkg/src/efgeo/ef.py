"""Exact-factorization geometry of a two-component wavefunction on a grid.

decompose() splits psi into the real non-negative marginal amplitude |chi|
(gauge fixed to lambda = 0) and the unit conditional spinor Phi, then
evaluates the Berry connection, the quantum metric and the rank-3 tensors
from gauge-covariant derivatives of Phi.  All quantities are reported on the
support mask where the marginal density exceeds the floor; values outside
the mask are numerically meaningless and excluded from every integral.

The conditional spinor is generally not periodic across the domain wrap, so
its derivatives default to high-order central stencils (local, so only the
wrap-adjacent off-mask points are polluted).  Spectral differentiation
remains available for genuinely periodic states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateState, InvalidField
from .grid import Grid1D

DEFAULT_FLOOR_RATIO = 1e-13
# Phi is frozen (constant continuation) only well below the mask floor, so
# derivative stencils near the mask edge still see smooth data.
EXTENSION_RATIO = 1e-4


@dataclass(frozen=True)
class TwoComponentWavefunction:
    """Normalized complex 2-spinor field over a Grid1D."""

    grid: Grid1D
    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self):
        for comp in (self.psi1, self.psi2):
            if np.asarray(comp).shape != (self.grid.n,):
                raise InvalidField("spinor component length does not match grid")
            if not np.all(np.isfinite(comp)):
                raise InvalidField("spinor component has non-finite entries")
        norm = self.norm()
        if abs(norm - 1.0) > 1e-10:
            raise InvalidField(f"state norm {norm!r} deviates from 1 by more than 1e-10")

    def density(self) -> np.ndarray:
        return np.abs(self.psi1) ** 2 + np.abs(self.psi2) ** 2

    def norm(self) -> float:
        return float(self.grid.integrate(self.density()))


@dataclass(frozen=True)
class EFDecomposition:
    """Marginal density, conditional spinor and geometric fields of a state."""

    grid: Grid1D
    psi1: np.ndarray
    psi2: np.ndarray
    chi2: np.ndarray          # marginal density |chi|^2
    phi1: np.ndarray          # conditional spinor, unit pointwise norm on mask
    phi2: np.ndarray
    dphi1: np.ndarray         # d(phi)/dx
    dphi2: np.ndarray
    connection: np.ndarray    # A = Im <Phi| dPhi/dx>
    metric: np.ndarray        # g = <(P-A)Phi|(P-A)Phi>, non-negative
    c_tensor: np.ndarray      # Re <(P-A)Phi|(P-A)(P-A)Phi>
    d_tensor: np.ndarray      # Im of the same bracket; equals -g'/2
    mask: np.ndarray          # density above floor: tensors valid here
    extended: np.ndarray      # points where Phi is a frozen continuation
    floor: float
    method: str
    inertia: float = None
    current: np.ndarray = None        # J = inertia * chi2 * A
    energy_density_geo: np.ndarray = None  # E_geo = inertia * g / 2

    @property
    def chi_abs(self) -> np.ndarray:
        return np.sqrt(self.chi2)


class KineticPartition(NamedTuple):
    marginal: float
    geometric: float
    total: float


def _nearest_fill(values: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Replace unsupported entries by the value at the nearest supported index."""
    if support.all():
        return values
    idx = np.arange(values.size)
    good = idx[support]
    pos = np.searchsorted(good, idx)
    pos = np.clip(pos, 0, good.size - 1)
    left = good[np.maximum(pos - 1, 0)]
    right = good[pos]
    nearest = np.where(np.abs(idx - left) <= np.abs(right - idx), left, right)
    out = values.copy()
    out[~support] = values[nearest[~support]]
    return out


def decompose(
    psi: TwoComponentWavefunction,
    floor: float = None,
    inertia: float = None,
    method: str = "fd12",
) -> EFDecomposition:
    """Exact factorization of psi with gauge lambda = 0 (chi real >= 0).

    floor is an absolute density threshold; by default 1e-13 of the density
    maximum.  inertia, when given, also fills the current and the geometric
    energy density.
    """
    grid = psi.grid
    chi2 = psi.density()
    peak = chi2.max()
    if peak == 0.0:
        raise DegenerateState("state has vanishing density everywhere")
    if floor is None:
        floor = DEFAULT_FLOOR_RATIO * peak
    if floor <= 0.0:
        raise ConfigError("density floor must be positive")
    mask = chi2 > floor
    if not mask.any():
        raise DegenerateState("density never exceeds the floor")

    support = chi2 > floor * EXTENSION_RATIO
    chi_safe = np.where(support, np.sqrt(chi2), 1.0)
    phi1 = _nearest_fill(np.where(support, psi.psi1 / chi_safe, 0.0), support)
    phi2 = _nearest_fill(np.where(support, psi.psi2 / chi_safe, 0.0), support)

    d1 = grid.derivative(phi1, 1, method)
    d2 = grid.derivative(phi2, 1, method)
    A = np.imag(np.conj(phi1) * d1 + np.conj(phi2) * d2)

    # covariant derivative field (P - A)Phi and one more application of it
    g1 = -1j * d1 - A * phi1
    g2 = -1j * d2 - A * phi2
    metric = np.abs(g1) ** 2 + np.abs(g2) ** 2
    h1 = -1j * grid.derivative(g1, 1, method) - A * g1
    h2 = -1j * grid.derivative(g2, 1, method) - A * g2
    bracket = np.conj(g1) * h1 + np.conj(g2) * h2

    current = energy_density = None
    if inertia is not None:
        current = inertia * chi2 * A
        energy_density = 0.5 * inertia * metric

    return EFDecomposition(
        grid=grid,
        psi1=psi.psi1,
        psi2=psi.psi2,
        chi2=chi2,
        phi1=phi1,
        phi2=phi2,
        dphi1=d1,
        dphi2=d2,
        connection=A,
        metric=metric,
        c_tensor=bracket.real,
        d_tensor=bracket.imag,
        mask=mask,
        extended=~support,
        floor=float(floor),
        method=method,
        inertia=inertia,
        current=current,
        energy_density_geo=energy_density,
    )


def connection(dec: EFDecomposition) -> np.ndarray:
    return dec.connection


def metric(dec: EFDecomposition) -> np.ndarray:
    return dec.metric


def tensor_c(dec: EFDecomposition) -> np.ndarray:
    return dec.c_tensor


def tensor_d(dec: EFDecomposition) -> np.ndarray:
    return dec.d_tensor


def current(dec: EFDecomposition, inertia: float = None) -> np.ndarray:
    """Nuclear current density J = inertia * |chi|^2 * A."""
    inertia = _resolve_inertia(dec, inertia)
    return inertia * dec.chi2 * dec.connection


def energies(dec: EFDecomposition, inertia: float = None) -> KineticPartition:
    """Kinetic partition (marginal, geometric, total).

    The total is computed independently of the factorization, from the
    spectral second derivative of psi, so that the partition identity
    total = marginal + geometric is a genuine cross-check.
    """
    inertia = _resolve_inertia(dec, inertia)
    grid = dec.grid
    weight = np.where(dec.mask, dec.chi2, 0.0)
    geometric = 0.5 * inertia * grid.integrate(weight * dec.metric)

    dchi = grid.derivative(dec.chi_abs, 1, dec.method)
    marginal = 0.5 * inertia * (
        grid.integrate(dchi ** 2) + grid.integrate(weight * dec.connection ** 2)
    )

    lap1 = grid.derivative(dec.psi1, 2, "spectral")
    lap2 = grid.derivative(dec.psi2, 2, "spectral")
    total = -0.5 * inertia * grid.integrate(
        np.real(np.conj(dec.psi1) * lap1 + np.conj(dec.psi2) * lap2)
    )
    return KineticPartition(marginal=float(marginal), geometric=float(geometric), total=float(total))


def _resolve_inertia(dec, inertia):
    if inertia is None:
        inertia = dec.inertia
    if inertia is None:
        raise ConfigError("inertia required: pass it or decompose with inertia set")
    return inertia
