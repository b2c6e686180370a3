"""Charge-conservation residuals and physical density extraction.

Covariant residuals are weak: d of the current is paired against a standard
family of test 4-chains (an axis-aligned box plus seeded smooth distortions)
and the maximum absolute pairing is reported.  Adapted-coordinate laws are
checked by exact symbolic differentiation on a grid.

Adapted-chart variable conventions used by the density types:

* surface densities sigma, i1, i2 are expressions in (t, y1, y2) = vars 0,1,2
  of the chart (t, y1, y2, phi);
* string densities sigma, j are expressions in (t, y) = vars 0,1 of the chart
  (t, phi, psi, y);
* the point worldline r0(t) is three expressions in t = var 0.

Sign conventions follow the source dictionary sigma = -L^{03}, i1 = L^{13},
i2 = L^{23} (and K = j dt - sigma dy), under which the adapted surface law
reads  di1/dy1 + di2/dy2 = dsigma/dt  and the string law dsigma/dt = dj/dy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import (
    Chain,
    QuadratureSpec,
    boundary_faces,
    collapse_integrate,
    integrate_regular,
)
from .errors import DegreeError, NotReducedError, OrientationError, ParityError
from .expr import Const, ScalarField, _coerce, sin as expr_sin, var
from .exterior import RegularForm, dualize2, exterior_derivative, form_from_terms
from .kernel import run_tape
from .singular import SingularForm, _expr_is_zero, d_singular
from .tape import compile_tape

__all__ = [
    "DensityBundle",
    "PointDensities",
    "current_residual",
    "mixed_residual",
    "extract_surface_densities",
    "assemble_surface_densities",
    "assemble_bulk_current",
    "assemble_string_form",
    "extract_string_densities",
    "surface_law_residual",
    "string_law_residual",
    "point_densities",
    "stokes_check",
    "standard_test_chains",
]


def _check_independent(f: ScalarField, forbidden: Sequence[int], what: str):
    for i in forbidden:
        if not _expr_is_zero(f.diff(i)):
            raise DegreeError(
                f"{what} must not depend on transverse coordinate x{i}: {f!r}"
            )


@dataclass(frozen=True)
class DensityBundle:
    """Physical densities in adapted charts; unused groups stay None."""

    surface: tuple[ScalarField, ScalarField, ScalarField] | None = None
    string: tuple[ScalarField, ScalarField] | None = None
    point: tuple[ScalarField, tuple[ScalarField, ScalarField, ScalarField]] | None = None

    def __post_init__(self):
        if self.surface is not None:
            surf = tuple(_coerce(f) for f in self.surface)
            for f in surf:
                _check_independent(f, [3], "surface density")
            object.__setattr__(self, "surface", surf)
        if self.string is not None:
            st = tuple(_coerce(f) for f in self.string)
            for f in st:
                _check_independent(f, [2, 3], "string density")
            object.__setattr__(self, "string", st)
        if self.point is not None:
            q, r0 = self.point
            q = _coerce(q)
            r0 = tuple(_coerce(f) for f in r0)
            for f in (q, *r0):
                _check_independent(f, [1, 2, 3], "worldline data")
            object.__setattr__(self, "point", (q, r0))


# -- covariant (weak) residuals -----------------------------------------------


def current_residual(
    j: SingularForm,
    test4: Sequence[Chain],
    spec: QuadratureSpec | None = None,
) -> float:
    """max |<d j, C>| over the supplied test 4-chains."""
    for c in test4:
        if c.dim != 4:
            raise DegreeError("current_residual needs 4-dimensional test chains")
    dj = d_singular(j)
    return max(abs(collapse_integrate(dj, c, spec).value) for c in test4)


def mixed_residual(
    singular: SingularForm,
    bulk: RegularForm,
    test4: Sequence[Chain],
    spec: QuadratureSpec | None = None,
) -> float:
    """max |<d singular + d bulk, C>| for a surface/point current plus a bulk current."""
    if bulk.degree != 3:
        raise DegreeError(f"bulk current must be a 3-form, got degree {bulk.degree}")
    if not bulk.twisted:
        raise ParityError("bulk current must be twisted")
    dj = d_singular(singular)
    dbulk = exterior_derivative(bulk)
    worst = 0.0
    for c in test4:
        if c.dim != 4:
            raise DegreeError("mixed_residual needs 4-dimensional test chains")
        v = collapse_integrate(dj, c, spec).value + integrate_regular(dbulk, c, spec)
        worst = max(worst, abs(v))
    return worst


# -- adapted-chart densities ----------------------------------------------------


def extract_surface_densities(l2: RegularForm):
    """(sigma, i1, i2) from a gauge-reduced 2-form in the adapted chart.

    Chart is (t, y1, y2, phi) with phi the last coordinate; the dictionary is
    sigma = -L^{03}, i1 = L^{13}, i2 = L^{23} through the dual components
    L^{ij} = (1/2) eps^{ijkl} L_{kl}.
    """
    if l2.degree != 2 or l2.n != 4:
        raise DegreeError("surface density extraction needs a 2-form on spacetime")
    bad = [idx for idx in l2.coeffs if 3 in idx and not _expr_is_zero(l2.coeffs[idx])]
    if bad:
        raise NotReducedError(
            f"form still contains d(phi) factors at indices {bad}; gauge-reduce first"
        )
    dual = dualize2(l2)
    sigma = -dual[(0, 3)]
    return sigma, dual[(1, 3)], dual[(2, 3)]


def assemble_surface_densities(sigma, i1, i2) -> RegularForm:
    """Inverse of extract_surface_densities (twisted 2-form, adapted chart)."""
    sigma, i1, i2 = _coerce(sigma), _coerce(i1), _coerce(i2)
    return form_from_terms(
        2,
        {(0, 1): i2, (0, 2): -i1, (1, 2): -sigma},
        twisted=True,
    )


def assemble_bulk_current(rho, j1, j2, j3) -> RegularForm:
    """Twisted bulk 3-form from its dual vector (charge density, 3-current).

    Inverse of dualize3: J = rho dx^dy^dz - j1 dt^dy^dz + j2 dt^dx^dz
    - j3 dt^dx^dy.
    """
    rho, j1, j2, j3 = (_coerce(f) for f in (rho, j1, j2, j3))
    return form_from_terms(
        3,
        {(1, 2, 3): rho, (0, 2, 3): -j1, (0, 1, 3): j2, (0, 1, 2): -j3},
        twisted=True,
    )


def assemble_string_form(sigma, j) -> RegularForm:
    """Twisted 1-form K with K_3 = -sigma in the adapted chart (t, phi, psi, y).

    The time component is chosen as K_0 = -j so that the covariant law
    d K ^ D(phi) ^ D(psi) = 0 is exactly equivalent to the adapted law
    dsigma/dt = dj/dy.  (Expressions use vars 0,1 for t,y; the chart places
    y at index 3.)
    """
    sigma, j = _coerce(sigma), _coerce(j)
    return form_from_terms(
        1,
        {(0,): -_subs_ty(j), (3,): -_subs_ty(sigma)},
        twisted=True,
    )


def _subs_ty(f: ScalarField) -> ScalarField:
    """Move a (t, y)-variable expression (vars 0,1) onto chart vars (0,3)."""
    return f.subs([var(0), var(3), Const(0.0), Const(0.0)])


def extract_string_densities(k1: RegularForm):
    """(sigma, j) back from a twisted 1-form in the adapted string chart."""
    if k1.degree != 1:
        raise DegreeError("string density extraction needs a 1-form")
    bad = [idx for idx in k1.coeffs if idx[0] in (1, 2) and not _expr_is_zero(k1.coeffs[idx])]
    if bad:
        raise NotReducedError(f"form contains d(phi)/d(psi) components at {bad}")
    back = [var(0), Const(0.0), Const(0.0), var(1)]
    sigma = -k1.coeffs.get((3,), Const(0.0)).subs(back)
    j = -k1.coeffs.get((0,), Const(0.0)).subs(back)
    return sigma, j


@dataclass(frozen=True)
class PointDensities:
    """Charge, worldline, velocity and 3-current of a point charge."""

    charge: ScalarField
    worldline: tuple[ScalarField, ScalarField, ScalarField]
    velocity: tuple[ScalarField, ScalarField, ScalarField]
    current: tuple[ScalarField, ScalarField, ScalarField]


def point_densities(q, worldline) -> PointDensities:
    """Symbolic (rho, j) descriptors of a point charge on r0(t).

    rho is the charge q concentrated at r0(t); the 3-current is q r0'(t)
    concentrated there as well.
    """
    q = _coerce(q)
    r0 = tuple(_coerce(f) for f in worldline)
    if len(r0) != 3:
        raise DegreeError("worldline needs 3 components (x0(t), y0(t), z0(t))")
    v = tuple(f.diff(0) for f in r0)
    cur = tuple(q * vi for vi in v)
    return PointDensities(q, r0, v, cur)


# -- adapted-chart conservation laws -------------------------------------------


def _max_on_grid(e: ScalarField, pts: np.ndarray) -> float:
    if isinstance(e, Const):
        return abs(e.value)
    vals = run_tape(compile_tape([e]), pts)[0]
    return float(np.max(np.abs(vals)))


def _default_grid(nvars: int) -> np.ndarray:
    axes = [np.linspace(-1.0, 1.0, 7)] * nvars
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, nvars)


def surface_law_residual(sigma, i1, i2, grid: np.ndarray | None = None) -> float:
    """max |di1/dy1 + di2/dy2 - dsigma/dt| over the grid (t, y1, y2)."""
    sigma, i1, i2 = _coerce(sigma), _coerce(i1), _coerce(i2)
    law = i1.diff(1) + i2.diff(2) - sigma.diff(0)
    pts = np.asarray(grid, dtype=float) if grid is not None else _default_grid(3)
    return _max_on_grid(law, pts)


def string_law_residual(sigma, j, grid: np.ndarray | None = None) -> float:
    """max |dsigma/dt - dj/dy| over the grid (t, y)."""
    sigma, j = _coerce(sigma), _coerce(j)
    law = sigma.diff(0) - j.diff(1)
    pts = np.asarray(grid, dtype=float) if grid is not None else _default_grid(2)
    return _max_on_grid(law, pts)


# -- Stokes -------------------------------------------------------------------


def stokes_check(
    j,
    m4: Chain,
    spec: QuadratureSpec | None = None,
    faces: Sequence[Chain] | None = None,
) -> tuple[float, float, float]:
    """(lhs, rhs, gap) for the integral form of conservation.

    lhs integrates d j over the 4-chain, rhs integrates j over the oriented
    boundary faces.  Before the main computation a smooth 3-form with a known
    exterior derivative is pushed through the same decomposition; failure of
    that smoke test raises OrientationError.
    """
    if m4.dim != 4:
        raise DegreeError("stokes_check needs a 4-chain")
    faces = list(faces) if faces is not None else boundary_faces(m4)

    # every face of a box sees nonzero flux from this form, so any single
    # mis-oriented face breaks the balance
    two = Const(2.0)
    smoke = form_from_terms(
        3,
        {
            (1, 2, 3): two + var(0) + var(1),
            (0, 2, 3): two + var(2) + var(0),
            (0, 1, 3): two + var(3) + var(1),
            (0, 1, 2): two + var(0) + var(2),
        },
        twisted=False,
    )
    lhs_s = integrate_regular(exterior_derivative(smoke), m4, spec)
    rhs_s = sum(integrate_regular(smoke, f, spec) for f in faces)
    scale = max(1.0, abs(lhs_s))
    if abs(lhs_s - rhs_s) > 1e-8 * scale:
        raise OrientationError(
            f"boundary decomposition failed smooth Stokes smoke test "
            f"({lhs_s:.6e} vs {rhs_s:.6e})"
        )

    if isinstance(j, RegularForm):
        lhs = integrate_regular(exterior_derivative(j), m4, spec)
        rhs = sum(integrate_regular(j, f, spec) for f in faces)
    else:
        lhs = collapse_integrate(d_singular(j), m4, spec).value
        rhs = sum(collapse_integrate(j, f, spec).value for f in faces)
    return lhs, rhs, abs(lhs - rhs)


# -- standard test family -------------------------------------------------------


def standard_test_chains(box: Chain, seed: int, count: int = 5) -> list[Chain]:
    """The box plus ``count`` seeded smooth distortions of it.

    Distortions add small products of parabolic bumps and sines of the other
    parameters to each coordinate map, so they stay near the box, keep full
    rank, and vanish on no face in particular.
    """
    rng = np.random.default_rng(seed)
    out = [box]
    k = box.dim
    for _ in range(count):
        comps = []
        for i in range(4):
            c = box.components[i]
            a = int(rng.integers(0, k))
            d = int(rng.integers(0, k))
            amp = float(rng.uniform(0.03, 0.1)) * (1 if rng.uniform() < 0.5 else -1)
            phase = float(rng.uniform(0.0, 2.0))
            freq = float(rng.uniform(0.6, 1.8))
            bump = var(a) * (Const(1.0) - var(a))
            c = c + Const(amp) * bump * expr_sin(Const(phase) + Const(freq) * var(d))
            comps.append(c)
        out.append(Chain(k, tuple(comps), box.orientation))
    return out
