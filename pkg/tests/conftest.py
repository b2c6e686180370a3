"""Shared random-case generators for the test suite.

Random cases are drawn with seeded generators so every run sees the same
inputs.  Level sets are affine plus a mild nonlinear term, with crossings
kept well inside the integration boxes (boundary-grazing intersections are
out of scope for the engine and are avoided by construction).
"""

from __future__ import annotations

from deltaforms.chains import Chain, box_chain
from deltaforms.expr import Const, ScalarField, cos, sin, var
from deltaforms.exterior import RegularForm, form_from_terms, multi_indices


def rand_coeff(rng, simple=False) -> ScalarField:
    """A small random smooth coefficient expression in t,x,y,z."""
    kind = rng.integers(0, 3 if simple else 5)
    a, b = rng.uniform(-1.2, 1.2, 2).round(3)
    i, j = rng.integers(0, 4, 2)
    if kind == 0:
        return Const(float(a))
    if kind == 1:
        return Const(float(a)) + Const(float(b)) * var(int(i))
    if kind == 2:
        return Const(float(a)) * var(int(i)) * var(int(j))
    if kind == 3:
        return Const(float(a)) + Const(float(b)) * sin(var(int(i)))
    return Const(float(a)) * cos(Const(0.7) * var(int(i))) + Const(float(b))


def rand_form(rng, degree: int, twisted=False, n=4, simple=False) -> RegularForm:
    terms = {}
    for idx in multi_indices(n, degree):
        if rng.uniform() < 0.75:
            terms[idx] = rand_coeff(rng, simple=simple)
    if not terms:
        terms[multi_indices(n, degree)[0]] = rand_coeff(rng, simple=simple)
    return form_from_terms(degree, terms, twisted=twisted, n=n)


def rand_poly_coeff(rng, max_vars=4) -> ScalarField:
    """Polynomial coefficient with small-integer structure (exact float ops)."""
    i, j = rng.integers(0, max_vars, 2)
    c = float(rng.integers(-3, 4))
    kind = rng.integers(0, 3)
    if kind == 0:
        return Const(c)
    if kind == 1:
        return Const(c) * var(int(i))
    return Const(c) * var(int(i)) * var(int(j))


def rand_affine_levelset(rng, axis: int | None = None, mild=True) -> ScalarField:
    """Affine level set crossing the working box near its middle.

    A dominant axis keeps the zero set transversal to that coordinate; a mild
    sine ripple exercises the nonlinear paths without moving the crossing to
    a boundary.
    """
    axis = int(rng.integers(1, 4)) if axis is None else axis
    offset = round(float(rng.uniform(-0.25, 0.25)), 3)
    phi = var(axis) - Const(offset)
    for i in range(4):
        if i != axis:
            phi = phi + Const(round(float(rng.uniform(-0.15, 0.15)), 3)) * var(i)
    if mild and rng.uniform() < 0.6:
        other = int(rng.integers(0, 4))
        amp = round(float(rng.uniform(0.02, 0.08)), 3)
        phi = phi + Const(amp) * sin(var(other))
    return phi


def crossing_segment(rng, phi_axis: int = 3) -> Chain:
    """Random 1-chain sweeping the phi axis through the zero region."""
    fixed = rng.uniform(-0.4, 0.4, 3).round(3)
    lo = round(float(rng.uniform(-1.1, -0.7)), 3)
    hi = round(float(rng.uniform(0.7, 1.1)), 3)
    coords = []
    k = 0
    for i in range(4):
        if i == phi_axis:
            coords.append(Const(lo) + Const(hi - lo) * var(0))
        else:
            coords.append(Const(float(fixed[k])))
            k += 1
    return Chain(1, tuple(coords))


def rand_space_box(rng, t_value=None) -> Chain:
    """Spatial 3-box at a fixed time, roughly centered on the origin."""
    t_value = round(float(rng.uniform(0.1, 0.9)), 3) if t_value is None else t_value
    spans = rng.uniform(0.85, 1.15, 3).round(3)
    return box_chain(
        t=t_value,
        x=(-float(spans[0]), float(spans[0])),
        y=(-float(spans[1]), float(spans[1])),
        z=(-float(spans[2]), float(spans[2])),
    )


def rand_box4(rng) -> Chain:
    spans = rng.uniform(0.85, 1.15, 3).round(3)
    return box_chain(
        t=(0.0, 1.0),
        x=(-float(spans[0]), float(spans[0])),
        y=(-float(spans[1]), float(spans[1])),
        z=(-float(spans[2]), float(spans[2])),
    )


def rand_2chain(rng) -> Chain:
    """2-chain crossing the z=const level sets (spans z and one other axis)."""
    other = int(rng.integers(0, 3))
    fixed = rng.uniform(-0.4, 0.4, 2).round(3)
    comps = []
    k = 0
    for i in range(4):
        if i == 3:
            comps.append(Const(-1.0) + Const(2.0) * var(1))
        elif i == other:
            comps.append(Const(-0.8) + Const(1.6) * var(0))
        else:
            comps.append(Const(float(fixed[k])))
            k += 1
    return Chain(2, tuple(comps))


def near_identity_map_components(rng):
    """Components of a mild orientation-preserving polynomial diffeomorphism."""
    comps = []
    for i in range(4):
        c = var(i)
        j = int(rng.integers(0, 4))
        amp = round(float(rng.uniform(0.02, 0.07)), 3)
        c = c + Const(amp) * var(j) * var(int(rng.integers(0, 4)))
        comps.append(c)
    return tuple(comps)
