"""Synthetic multi-dimensional check bench for the rank-3 tensor identities.

A two-level conditional state parametrized over a periodic d-dimensional
grid provides every geometric object of interest: Berry connection and
curvature, quantum metric, the rank-3 tensors and the Christoffel symbol of
the metric.  The identities relating them are exact in the continuum, so
their discrete residuals are pure stencil truncation and must shrink at the
stencil order under refinement.  Derivatives are 4th-order central stencils
with periodic wrap; recipes must therefore produce periodic spinors.

Index convention for the Christoffel symbol of the first kind, chosen so
that the imaginary rank-3 tensor is exactly its negative:
Gamma[m,n,t] = (d_t g[m,n] + d_n g[m,t] - d_m g[n,t]) / 2.  Classical
references permute these indices differently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, RecipeError

_W_BOUND = 1.0 - 1e-3


@dataclass(frozen=True)
class ParamGrid:
    """Periodic uniform grid over a d-dimensional parameter manifold.

    d = 2 and d = 3 are the verification targets; d = 1 is allowed as the
    embedding used to cross-check the 1D module on identical fields.
    """

    shape: tuple
    lengths: tuple = None

    def __post_init__(self):
        shape = tuple(int(m) for m in self.shape)
        object.__setattr__(self, "shape", shape)
        if not 1 <= len(shape) <= 3:
            raise ConfigError(f"dimension {len(shape)} not in 1..3")
        if any(m < 32 for m in shape):
            raise ConfigError(f"need >= 32 points per axis, got {shape}")
        lengths = self.lengths or (2.0 * np.pi,) * len(shape)
        lengths = tuple(float(L) for L in lengths)
        if len(lengths) != len(shape) or any(L <= 0 for L in lengths):
            raise ConfigError("lengths must be positive, one per axis")
        object.__setattr__(self, "lengths", lengths)

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def spacings(self) -> tuple:
        return tuple(L / m for L, m in zip(self.lengths, self.shape))

    def meshes(self):
        axes = [h * np.arange(m) for h, m in zip(self.spacings, self.shape)]
        return np.meshgrid(*axes, indexing="ij")

    def diff(self, values: np.ndarray, axis: int, richardson: bool = False) -> np.ndarray:
        """4th-order central derivative along one axis, periodic wrap.

        richardson combines the stencil with its double-spacing variant for
        a 6th-order result.
        """
        d4 = self._stencil(values, axis, 1)
        if not richardson:
            return d4
        d4_coarse = self._stencil(values, axis, 2)
        return (16.0 * d4 - d4_coarse) / 15.0

    def _stencil(self, f, axis, step):
        h = self.spacings[axis] * step
        return (
            8.0 * (np.roll(f, -step, axis) - np.roll(f, step, axis))
            - (np.roll(f, -2 * step, axis) - np.roll(f, 2 * step, axis))
        ) / (12.0 * h)


@dataclass(frozen=True)
class FamilyRecipe:
    """Callables producing w, phi and the gauge phase on mesh coordinates."""

    w: Callable
    phi: Callable
    a: Callable
    name: str = "custom"


def smooth_recipe(
    w0: float = 0.25,
    w_amp: float = 0.15,
    phi_amp: float = 0.18,
    a_amp: float = 0.09,
) -> FamilyRecipe:
    """Generic band-limited family exercising every tensor component."""

    def w(*Q):
        out = w0 + w_amp * np.sin(Q[0] + 0.4) * (np.cos(Q[1]) if len(Q) > 1 else 1.0)
        if len(Q) > 2:
            out = out + 0.1 * w_amp * np.sin(Q[2])
        return out

    def phi(*Q):
        out = phi_amp * np.cos(Q[0]) + 0.2
        if len(Q) > 1:
            out = out + 0.8 * phi_amp * np.sin(Q[1] + 0.3)
        if len(Q) > 2:
            out = out + 0.5 * phi_amp * np.cos(Q[2] + 0.1)
        return out

    def a(*Q):
        out = a_amp * np.sin(Q[0] + 0.2)
        if len(Q) > 1:
            out = out + 0.7 * a_amp * np.cos(Q[1])
        return np.broadcast_to(out, np.broadcast_shapes(*[q.shape for q in Q])).copy()

    return FamilyRecipe(w=w, phi=phi, a=a, name="smooth")


def pure_gauge_recipe(mode: int = 1, w0: float = 0.3, phi0: float = 0.4) -> FamilyRecipe:
    """Constant Bloch angles with a linear (grid-eigenmode) gauge phase.

    For a linear phase every discrete tensor vanishes identically, so the
    identity residuals are exactly zero.
    """
    if mode != int(mode):
        raise ConfigError("pure gauge mode must be an integer to stay periodic")

    def const(value):
        def f(*Q):
            return np.full(np.broadcast_shapes(*[q.shape for q in Q]), value)

        return f

    def a(*Q):
        return float(mode) * Q[0]

    return FamilyRecipe(w=const(w0), phi=const(phi0), a=a, name="pure-gauge")


def constant_recipe(w0: float = 0.2, phi0: float = 0.5, a0: float = 0.0) -> FamilyRecipe:
    """Constant spinor everywhere: every tensor vanishes."""

    def const(value):
        def f(*Q):
            return np.full(np.broadcast_shapes(*[q.shape for q in Q]), value)

        return f

    return FamilyRecipe(w=const(w0), phi=const(phi0), a=const(a0), name="constant")


NAMED_RECIPES = {
    "smooth": smooth_recipe,
    "pure-gauge": pure_gauge_recipe,
    "constant": constant_recipe,
}


@dataclass(frozen=True)
class TwoLevelFamily:
    """Two-level conditional state over a ParamGrid."""

    grid: ParamGrid
    w: np.ndarray
    phi: np.ndarray
    a: np.ndarray

    def spinor(self) -> np.ndarray:
        """Complex array of shape (2,) + grid.shape; smooth and periodic.

        The gauge field enters as a full overall phase, so a pure gauge
        change a -> a + theta shifts the connection by exactly the gradient
        of theta.
        """
        half = np.arccos(self.w) / 2.0
        up = np.exp(1j * (self.a - 0.5 * self.phi)) * np.cos(half)
        dn = np.exp(1j * (self.a + 0.5 * self.phi)) * np.sin(half)
        return np.stack([up, dn])


def build_family(recipe: FamilyRecipe, grid: ParamGrid) -> TwoLevelFamily:
    Q = grid.meshes()
    w = np.asarray(recipe.w(*Q), dtype=float)
    phi = np.asarray(recipe.phi(*Q), dtype=float)
    a = np.asarray(recipe.a(*Q), dtype=float)
    for name, arr in (("w", w), ("phi", phi), ("a", a)):
        if arr.shape != grid.shape:
            raise RecipeError(f"recipe field {name} has shape {arr.shape}, expected {grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise RecipeError(f"recipe field {name} is not finite")
    if np.max(np.abs(w)) > _W_BOUND:
        raise RecipeError(f"|w| reaches {np.max(np.abs(w)):.4f} > {_W_BOUND}")
    return TwoLevelFamily(grid=grid, w=w, phi=phi, a=a)


@dataclass(frozen=True)
class TensorFieldSet:
    """All tensors of a family: connection a[mu], curvature b[mu,nu], metric
    g[mu,nu], rank-3 c/d[mu,nu,tau] and the Christoffel symbol gamma."""

    grid: ParamGrid
    a: np.ndarray
    b: np.ndarray
    g: np.ndarray
    c: np.ndarray
    d: np.ndarray
    gamma: np.ndarray
    richardson: bool = False
    # spinor and its first covariant derivative, kept for identity checks
    phi: np.ndarray = field(default=None, repr=False)
    dphi: np.ndarray = field(default=None, repr=False)


def tensors(family: TwoLevelFamily, richardson: bool = False) -> TensorFieldSet:
    """Evaluate connection, curvature, metric and the rank-3 tensors."""
    grid = family.grid
    d = grid.d
    phi = family.spinor()
    D = lambda arr, mu: grid.diff(arr, mu, richardson)

    dphi = np.stack([np.stack([D(phi[s], mu) for s in range(2)]) for mu in range(d)])
    A = np.stack(
        [np.imag(np.conj(phi[0]) * dphi[mu][0] + np.conj(phi[1]) * dphi[mu][1]) for mu in range(d)]
    )
    G = np.stack([-1j * dphi[mu] - A[mu] * phi for mu in range(d)])

    shape = grid.shape
    g = np.zeros((d, d) + shape)
    for mu in range(d):
        for nu in range(mu, d):
            val = np.real(np.conj(G[mu][0]) * G[nu][0] + np.conj(G[mu][1]) * G[nu][1])
            g[mu, nu] = val
            g[nu, mu] = val

    b = np.zeros((d, d) + shape)
    for mu in range(d):
        for nu in range(mu + 1, d):
            val = D(A[nu], mu) - D(A[mu], nu)
            b[mu, nu] = val
            b[nu, mu] = -val

    c = np.zeros((d, d, d) + shape)
    dten = np.zeros((d, d, d) + shape)
    for nu in range(d):
        for tau in range(d):
            H = -1j * np.stack([D(G[tau][s], nu) for s in range(2)]) - A[nu] * G[tau]
            for mu in range(d):
                bracket = np.conj(G[mu][0]) * H[0] + np.conj(G[mu][1]) * H[1]
                c[mu, nu, tau] = bracket.real
                dten[mu, nu, tau] = bracket.imag

    gamma = np.zeros((d, d, d) + shape)
    for mu in range(d):
        for nu in range(d):
            for tau in range(d):
                gamma[mu, nu, tau] = 0.5 * (
                    D(g[mu, nu], tau) + D(g[mu, tau], nu) - D(g[nu, tau], mu)
                )

    return TensorFieldSet(
        grid=grid, a=A, b=b, g=g, c=c, d=dten, gamma=gamma,
        richardson=richardson, phi=phi, dphi=dphi,
    )


@dataclass(frozen=True)
class ResidualReport:
    name: str
    max_abs: float
    l2: float

    def to_dict(self):
        return {"name": self.name, "max_abs": self.max_abs, "l2": self.l2}


def _report(name, residual):
    res = np.asarray(residual)
    return ResidualReport(
        name=name,
        max_abs=float(np.max(np.abs(res))),
        l2=float(np.sqrt(np.mean(res ** 2))),
    )


def check_cb_identity(ts: TensorFieldSet) -> ResidualReport:
    """Residual of c[tau,sigma,mu] - c[mu,sigma,tau] - d_sigma b[tau,mu] / 2."""
    grid = ts.grid
    d = grid.d
    pieces = []
    for tau in range(d):
        for sig in range(d):
            for mu in range(d):
                r = ts.c[tau, sig, mu] - ts.c[mu, sig, tau] - 0.5 * grid.diff(
                    ts.b[tau, mu], sig, ts.richardson
                )
                pieces.append(r)
    return _report("c_b_exchange", np.stack(pieces))


def check_d_christoffel(ts: TensorFieldSet) -> ResidualReport:
    return _report("d_plus_christoffel", ts.d + ts.gamma)


def check_symmetries(ts: TensorFieldSet) -> dict:
    d = ts.grid.d
    c_sym = np.stack(
        [ts.c[m, n, t] - ts.c[m, t, n] for m in range(d) for n in range(d) for t in range(d)]
    )
    d_sym = np.stack(
        [ts.d[m, n, t] - ts.d[m, t, n] for m in range(d) for n in range(d) for t in range(d)]
    )
    return {
        "c_last_two_symmetric": _report("c_last_two_symmetric", c_sym),
        "d_last_two_symmetric": _report("d_last_two_symmetric", d_sym),
    }


def check_decompositions(family: TwoLevelFamily, ts: TensorFieldSet) -> dict:
    """Residuals of the raw-derivative expansions of the rank-3 tensors and
    of the real-part identity that closes them."""
    grid = ts.grid
    d = grid.d
    D = lambda arr, mu: grid.diff(arr, mu, ts.richardson)
    phi, dphi, A, g, b = ts.phi, ts.dphi, ts.a, ts.g, ts.b

    ddphi = np.empty((d, d), dtype=object)
    for nu in range(d):
        for tau in range(d):
            ddphi[nu, tau] = np.stack([D(dphi[tau][s], nu) for s in range(2)])

    dA = np.stack([np.stack([D(A[tau], nu) for tau in range(d)]) for nu in range(d)])

    d_raw, c_raw, real_part = [], [], []
    for mu in range(d):
        for nu in range(d):
            for tau in range(d):
                raw = (
                    np.conj(dphi[mu][0]) * ddphi[nu, tau][0]
                    + np.conj(dphi[mu][1]) * ddphi[nu, tau][1]
                )
                d_expected = (
                    -raw.real
                    - 0.5 * b[mu, nu] * A[tau]
                    - 0.5 * b[mu, tau] * A[nu]
                    + 0.5 * A[mu] * dA[nu, tau]
                    + 0.5 * A[mu] * dA[tau, nu]
                )
                d_raw.append(ts.d[mu, nu, tau] - d_expected)
                c_expected = (
                    raw.imag
                    - A[mu] * g[nu, tau]
                    - A[nu] * g[mu, tau]
                    - A[tau] * g[mu, nu]
                    - A[mu] * A[nu] * A[tau]
                )
                c_raw.append(ts.c[mu, nu, tau] - c_expected)
                rp = (
                    D(g[mu, nu] + A[mu] * A[nu], tau)
                    + D(g[mu, tau] + A[mu] * A[tau], nu)
                    - D(g[nu, tau] + A[nu] * A[tau], mu)
                )
                real_part.append(2.0 * raw.real - rp)
    return {
        "d_raw_expansion": _report("d_raw_expansion", np.stack(d_raw)),
        "c_raw_expansion": _report("c_raw_expansion", np.stack(c_raw)),
        "real_part_identity": _report("real_part_identity", np.stack(real_part)),
    }


IDENTITY_NAMES = (
    "d_raw_expansion",
    "c_raw_expansion",
    "real_part_identity",
    "d_plus_christoffel",
    "c_b_exchange",
)


def identity_residuals(recipe: FamilyRecipe, grid: ParamGrid, richardson: bool = False) -> dict:
    """All five identity residuals plus the symmetry checks for one grid."""
    family = build_family(recipe, grid)
    ts = tensors(family, richardson)
    out = dict(check_decompositions(family, ts))
    out["d_plus_christoffel"] = check_d_christoffel(ts)
    out["c_b_exchange"] = check_cb_identity(ts)
    out.update(check_symmetries(ts))
    return out


def convergence_study(
    recipe: FamilyRecipe,
    sizes=(64, 128, 256),
    d: int = 2,
    richardson: bool = False,
) -> dict:
    """Identity residuals across grid refinements with fitted orders.

    Returns {identity: {"sizes": [...], "max_abs": [...], "order": slope}}.
    The order is the least-squares slope of log(residual) against log(1/n)
    and is reported as nan when the residuals sit at the roundoff floor.
    """
    results = {name: [] for name in IDENTITY_NAMES}
    for m in sizes:
        res = identity_residuals(recipe, ParamGrid(shape=(m,) * d), richardson)
        for name in IDENTITY_NAMES:
            results[name].append(res[name].max_abs)
    out = {}
    for name, vals in results.items():
        vals_arr = np.asarray(vals)
        if np.all(vals_arr > 1e-14):
            slope = float(np.polyfit(np.log(1.0 / np.asarray(sizes, dtype=float)), np.log(vals_arr), 1)[0])
        else:
            slope = float("nan")
        out[name] = {"sizes": list(sizes), "max_abs": vals, "order": slope}
    return out
