"""Closed-form fields of the exactly solvable two-level wavepacket model.

A gaussian nuclear density with prescribed damped-oscillation mean and width
is combined with sigmoid Bloch-angle fields; the 2x2 Hamiltonian entries are
reverse engineered so that the assembled two-component state solves the
Schroedinger equation exactly.  Everything here is a pure function of the
model parameters, the time and the grid.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .ef import TwoComponentWavefunction
from .errors import ConfigError, ResolutionWarning, SingularGauge
from .grid import Grid1D

_CLIP = 700.0  # exp argument guard


@dataclass(frozen=True)
class ModelParams:
    """Model constants: damping eta, nuclear mass, front steepness gamma and
    the inverse-mass inertia (defaults to 1/mass)."""

    eta: float = 0.1
    mass: float = 10.0
    gamma: float = 40.0
    inertia: float = None

    def __post_init__(self):
        if not 0.0 < self.eta < 0.5:
            raise ConfigError(f"eta = {self.eta} outside (0, 1/2)")
        if self.mass <= 0.0:
            raise ConfigError("mass must be positive")
        if self.gamma <= 0.0:
            raise ConfigError("gamma must be positive")
        if self.inertia is None:
            object.__setattr__(self, "inertia", 1.0 / self.mass)
        elif self.inertia <= 0.0:
            raise ConfigError("inertia must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        known = {k: data[k] for k in ("eta", "mass", "gamma", "inertia") if k in data}
        unknown = set(data) - {"eta", "mass", "gamma", "inertia"}
        if unknown:
            raise ConfigError(f"unknown model parameter keys: {sorted(unknown)}")
        return cls(**known)

    @classmethod
    def from_file(cls, path) -> "ModelParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class BlochState:
    """Pointwise Bloch description of the model state at one time."""

    w: np.ndarray        # cos(theta), population difference
    phi: np.ndarray      # azimuthal angle
    alpha: np.ndarray    # overall gauge phase, zero at x_min
    chi_abs: np.ndarray  # |chi|, positive on the retained domain


@dataclass(frozen=True)
class HamiltonianFields:
    """Entries of the 2x2 potential matrix (h0 + h3, h1; h1, h0 - h3)."""

    h0: np.ndarray
    h1: np.ndarray
    h3: np.ndarray


def mean_position(t, params: ModelParams):
    """Packet center xbar(t) = 1 - cos(t)/(1 + eta*t)."""
    t = np.asarray(t, dtype=float)
    return 1.0 - np.cos(t) / (1.0 + params.eta * t)


def mean_position_rate(t, params: ModelParams):
    t = np.asarray(t, dtype=float)
    eta = params.eta
    d = 1.0 + eta * t
    return np.sin(t) / d + eta * np.cos(t) / d ** 2


def _mean_position_accel(t, params):
    t = np.asarray(t, dtype=float)
    eta = params.eta
    d = 1.0 + eta * t
    return np.cos(t) / d - 2.0 * eta * np.sin(t) / d ** 2 - 2.0 * eta ** 2 * np.cos(t) / d ** 3


def width(t, params: ModelParams):
    """Packet width sigma(t) = (1 + (1 + eta*t) cos^2 t) / (3 sqrt(M))."""
    t = np.asarray(t, dtype=float)
    return (1.0 + (1.0 + params.eta * t) * np.cos(t) ** 2) / (3.0 * np.sqrt(params.mass))


def width_rate(t, params: ModelParams):
    t = np.asarray(t, dtype=float)
    eta = params.eta
    return (eta * np.cos(t) ** 2 - (1.0 + eta * t) * np.sin(2.0 * t)) / (3.0 * np.sqrt(params.mass))


def _width_accel(t, params):
    t = np.asarray(t, dtype=float)
    eta = params.eta
    return (-2.0 * eta * np.sin(2.0 * t) - 2.0 * (1.0 + eta * t) * np.cos(2.0 * t)) / (
        3.0 * np.sqrt(params.mass)
    )


def nuclear_density(x, t, params: ModelParams):
    """Gaussian marginal density |chi|^2, normalized on the real line."""
    sig = width(t, params)
    u = (np.asarray(x, dtype=float) - mean_position(t, params)) / sig
    return np.exp(-u ** 2) / (np.sqrt(np.pi) * sig)


def nuclear_density_rate(x, t, params: ModelParams):
    """Time derivative of the gaussian density, in closed form."""
    sig = width(t, params)
    u = (np.asarray(x, dtype=float) - mean_position(t, params)) / sig
    drift = mean_position_rate(t, params) + u * width_rate(t, params)
    return nuclear_density(x, t, params) * (2.0 * u * drift - width_rate(t, params)) / sig


def vector_potential(x, t, params: ModelParams):
    """Berry connection fixed by continuity of the gaussian density.

    Integrating the density rate from the left tail gives the closed form
    A = (xbar' + u sigma') / inertia with u = (x - xbar)/sigma.
    """
    sig = width(t, params)
    u = (np.asarray(x, dtype=float) - mean_position(t, params)) / sig
    return _potential_from_rates(u, mean_position_rate(t, params), width_rate(t, params), params.inertia)


def _potential_from_rates(u, xbar_rate, sigma_rate, inertia):
    return (xbar_rate + u * sigma_rate) / inertia


class _Fields:
    """All analytic fields of the model state at one time on one grid.

    Spatial derivatives are exact expressions; the gauge phase alpha and its
    time derivative integrate the exponentially localized front term with the
    spectral antiderivative (the smooth drift term is integrated in closed
    form).
    """

    def __init__(self, t: float, grid: Grid1D, params: ModelParams):
        eta, gamma, inertia = params.eta, params.gamma, params.inertia
        x = grid.x
        self.t = float(t)
        self.grid = grid
        self.params = params

        self.sigma = float(width(t, params))
        self.sigma_rate = float(width_rate(t, params))
        self.xbar = float(mean_position(t, params))
        self.xbar_rate = float(mean_position_rate(t, params))
        self.u = (x - self.xbar) / self.sigma
        self.chi2 = np.exp(-self.u ** 2) / (np.sqrt(np.pi) * self.sigma)
        self.chi_abs = np.sqrt(self.chi2)
        self.lnchi_x = -self.u / self.sigma
        self.lnchi_xx = np.full(grid.n, -1.0 / self.sigma ** 2)

        gp = gamma * (1.0 + eta * t)  # instantaneous front steepness
        if 1.0 / (gp * grid.dx) < 10.0:
            # static message so repeated warnings deduplicate per call site
            warnings.warn(
                "front width resolved by fewer than 10 grid points",
                ResolutionWarning,
                stacklevel=2,
            )
        xi = np.clip(gp * (x - 1.0), -_CLIP, _CLIP)
        E = np.exp(xi)
        p, q = 1.0 + t, 1.0 + 3.0 * t
        r = p / (p + E)
        s = q / (q + E)
        amp = 1.0 - 2.0 * eta

        self.w = eta + amp * r
        self.w_x = -amp * gp * r * (1.0 - r)
        self.w_xx = amp * gp ** 2 * r * (1.0 - r) * (1.0 - 2.0 * r)
        self.phi = -eta - amp * s
        self.phi_x = amp * gp * s * (1.0 - s)
        self.phi_xx = -amp * gp ** 2 * s * (1.0 - s) * (1.0 - 2.0 * s)

        xi_t = gamma * eta * (x - 1.0)
        r_t = r * (1.0 - r) * (1.0 / p - xi_t)
        s_t = s * (1.0 - s) * (3.0 / q - xi_t)
        self.w_t = amp * r_t
        self.phi_t = -amp * s_t
        self.phi_xt = amp * (gamma * eta * s * (1.0 - s) + gp * (1.0 - 2.0 * s) * s_t)

        self.vector_potential = _potential_from_rates(
            self.u, self.xbar_rate, self.sigma_rate, inertia
        )
        self.vector_potential_x = self.sigma_rate / (self.sigma * inertia)

        # alpha = int_{x_min}^{x} (2A + w phi_x); drift part in closed form,
        # localized front part by spectral antiderivative.
        self.alpha = self._drift_phase(x) + grid.cumulative_integral(
            self.w * self.phi_x, grid.x_min, method="spectral"
        )
        self.alpha_x = 2.0 * self.vector_potential + self.w * self.phi_x
        self.alpha_xx = 2.0 * self.vector_potential_x + self.w_x * self.phi_x + self.w * self.phi_xx
        self.alpha_t = self._drift_phase_rate(x) + grid.cumulative_integral(
            self.w_t * self.phi_x + self.w * self.phi_xt, grid.x_min, method="spectral"
        )

    def _drift_phase(self, x):
        par = self.params
        G = (x - self.xbar) ** 2 - (self.grid.x_min - self.xbar) ** 2
        return (2.0 / par.inertia) * (
            self.xbar_rate * (x - self.grid.x_min) + self.sigma_rate / (2.0 * self.sigma) * G
        )

    def _drift_phase_rate(self, x):
        par = self.params
        sig, sigd = self.sigma, self.sigma_rate
        sigdd = float(_width_accel(self.t, par))
        xbdd = float(_mean_position_accel(self.t, par))
        G = (x - self.xbar) ** 2 - (self.grid.x_min - self.xbar) ** 2
        return (2.0 / par.inertia) * (
            xbdd * (x - self.grid.x_min)
            + (sigdd * sig - sigd ** 2) / (2.0 * sig ** 2) * G
            - (sigd / sig) * self.xbar_rate * (x - self.grid.x_min)
        )


def bloch_fields(t, grid: Grid1D, params: ModelParams) -> BlochState:
    """Evaluate w, phi, alpha and |chi| on the grid at time t."""
    f = _Fields(t, grid, params)
    return BlochState(w=f.w, phi=f.phi, alpha=f.alpha, chi_abs=f.chi_abs)


def hamiltonian_entries(
    t,
    grid: Grid1D,
    params: ModelParams,
    time_derivatives: str = "analytic",
    delta_t: float = 1e-5,
) -> HamiltonianFields:
    """Reverse-engineered potential entries h0, h1, h3 at time t.

    time_derivatives "analytic" uses closed-form rates; "fd" differentiates
    the Bloch fields with a 4th-order central stencil of step delta_t (the
    two must agree, which the tests enforce).
    """
    f = _Fields(t, grid, params)
    sin_th = np.sqrt(1.0 - f.w ** 2)
    sin_phi = np.sin(f.phi)
    if np.min(np.abs(sin_phi)) < 1e-6 or np.min(sin_th) < 1e-6:
        raise SingularGauge("sin(phi) or sin(theta) below 1e-6")

    if time_derivatives == "analytic":
        w_t, phi_t, alpha_t = f.w_t, f.phi_t, f.alpha_t
    elif time_derivatives == "fd":
        w_t, phi_t, alpha_t = _bloch_time_fd(t, grid, params, delta_t)
    else:
        raise ConfigError(f"unknown time_derivatives mode {time_derivatives!r}")
    theta_t = -w_t / sin_th

    theta_x = -f.w_x / sin_th
    theta_xx = -f.w_xx / sin_th - f.w * f.w_x ** 2 / (1.0 - f.w ** 2) ** 1.5
    cos_phi = np.cos(f.phi)
    I = params.inertia

    h1 = (
        -0.5 * theta_t
        - 0.5 * I * sin_th * f.lnchi_x * f.phi_x
        - 0.25 * I * sin_th * f.phi_xx
        - 0.25 * I * theta_x * (f.alpha_x + f.w * f.phi_x)
    ) / sin_phi
    h3 = (
        h1 * f.w * cos_phi
        + 0.5 * sin_th * phi_t
        - 0.5 * I * f.lnchi_x * theta_x
        + 0.25 * I * sin_th * f.alpha_x * f.phi_x
        - 0.25 * I * theta_xx
    ) / sin_th
    h0 = (
        -h1 * sin_th * cos_phi
        - h3 * f.w
        - 0.5 * alpha_t
        + 0.5 * f.w * phi_t
        + 0.5 * I * f.lnchi_xx
        + 0.5 * I * f.lnchi_x ** 2
        - 0.125 * I * (f.alpha_x ** 2 + f.phi_x ** 2 - 2.0 * f.w * f.alpha_x * f.phi_x)
        - 0.125 * I * theta_x ** 2
    )
    return HamiltonianFields(h0=h0, h1=h1, h3=h3)


def _bloch_time_fd(t, grid, params, delta_t):
    # 4th-order central difference of the Bloch fields; t may dip slightly
    # negative, where every closed form continues smoothly.
    states = [bloch_fields(t + j * delta_t, grid, params) for j in (-2, -1, 1, 2)]

    def rate(attr):
        f = [getattr(s, attr) for s in states]
        return (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * delta_t)

    return rate("w"), rate("phi"), rate("alpha")


def assemble_psi(t, grid: Grid1D, params: ModelParams) -> TwoComponentWavefunction:
    """Build the normalized two-component state at time t."""
    f = _Fields(t, grid, params)
    half_cos = np.sqrt(0.5 * (1.0 + f.w))
    half_sin = np.sqrt(0.5 * (1.0 - f.w))
    psi1 = f.chi_abs * np.exp(0.5j * (f.alpha - f.phi)) * half_cos
    psi2 = f.chi_abs * np.exp(0.5j * (f.alpha + f.phi)) * half_sin
    return TwoComponentWavefunction(grid=grid, psi1=psi1, psi2=psi2)
