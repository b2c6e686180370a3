"""Chains and the two integration routes (collapse and mollified oracle)."""

import math

import numpy as np
import pytest

from deltaforms.chains import (
    Chain,
    QuadratureSpec,
    boundary_faces,
    box_chain,
    collapse_integrate,
    gauss_legendre,
    integrate_regular,
    mapped_chain,
    mollified_integrate,
    total_charge,
    transversality_check,
)
from deltaforms.errors import (
    CollapseSingularError,
    DegreeError,
    OracleDivergenceError,
)
from deltaforms.expr import Const, coords, cos, sin, var
from deltaforms.exterior import (
    SmoothMap,
    dx,
    form_from_terms,
    scalar_form,
    wedge,
)
from deltaforms.singular import DeltaFactor, SingularForm, delta, surface_current

from conftest import (
    near_identity_map_components,
    rand_affine_levelset,
    rand_form,
    rand_space_box,
)

T, X, Y, Z = coords()


def test_gauss_legendre_weights():
    for order, panels in ((4, 1), (16, 1), (8, 5)):
        x, w = gauss_legendre(order, panels)
        assert np.all((x > 0) & (x < 1))
        assert np.sum(w) == pytest.approx(1.0, abs=1e-14)
        # integrates a cubic exactly
        assert np.dot(w, x**3) == pytest.approx(0.25, abs=1e-14)


def test_unit_square_area():
    c = box_chain(t=0, x=(0, 1), y=(0, 1), z=0)
    assert integrate_regular(wedge(dx(1), dx(2)), c) == pytest.approx(1.0, abs=1e-13)


def test_parameter_swap_flips_sign():
    swapped = Chain(2, (Const(0.0), var(1), var(0), Const(0.0)))
    assert integrate_regular(wedge(dx(1), dx(2)), swapped) == pytest.approx(-1.0, abs=1e-13)


def test_circle_line_integral_pi():
    two_pi = Const(2 * math.pi)
    c = Chain(1, (Const(0.0), cos(two_pi * var(0)), sin(two_pi * var(0)), Const(0.0)))
    v16 = integrate_regular(wedge(scalar_form(X), dx(2)), c, QuadratureSpec(order=16))
    v48 = integrate_regular(wedge(scalar_form(X), dx(2)), c, QuadratureSpec(order=48))
    assert v48 == pytest.approx(math.pi, abs=1e-12)
    assert abs(v16 - v48) < 1e-8  # quadrature has converged long before order 48


def test_orientation_reversal_exact():
    c = box_chain(t=0.3, x=(0, 1), y=(0, 1), z=(-1, 1))
    j = surface_current(form_from_terms(2, {(1, 2): T + Const(2.0)}, twisted=True), Z)
    v = collapse_integrate(j, c).value
    assert collapse_integrate(j, c.reversed()).value == -v


def test_collapse_plane():
    j = SingularForm(wedge(dx(1), dx(2)), (DeltaFactor(Z),))
    c = box_chain(t=0, x=(0, 1), y=(0, 1), z=(-0.5, 0.5))
    r = collapse_integrate(j, c)
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert r.condition > 0
    assert np.all(r.roots_found == 1)
    assert mollified_integrate(j, c) == pytest.approx(r.value, abs=1e-6)


def test_collapse_empty_intersection():
    j = SingularForm(wedge(dx(1), dx(2)), (DeltaFactor(Z),))
    c = box_chain(t=0, x=(0, 1), y=(0, 1), z=(1, 2))
    assert collapse_integrate(j, c).value == 0.0
    assert abs(mollified_integrate(j, c)) < 1e-8


def test_collapse_tilted_plane():
    # interior crossing (z = x/2 stays inside z in (-1,1) for x in (0,1))
    j = SingularForm(wedge(dx(1), dx(2)), (DeltaFactor(Z - X * Const(0.5)),))
    c = box_chain(t=0, x=(0, 1), y=(0, 1), z=(-1, 1))
    r = collapse_integrate(j, c)
    assert r.value == pytest.approx(1.0, abs=1e-10)
    assert mollified_integrate(j, c) == pytest.approx(1.0, abs=1e-6)


def test_collapse_handles_steep_delta_arguments():
    # delta(c * phi) for huge c is still the same distribution
    seg = box_chain(t=0, x=0, y=0, z=(-1, 1))
    assert collapse_integrate(delta(Const(1e7) * Z), seg).value == pytest.approx(
        1.0, rel=1e-10
    )
    j = SingularForm(
        scalar_form(Const(1.0)),
        (DeltaFactor(Const(1e7) * X), DeltaFactor(Const(1e7) * Z)),
    )
    c = box_chain(t=0, x=(-1, 1), y=0.5, z=(-1, 1))
    assert collapse_integrate(j, c).value == pytest.approx(1.0, rel=1e-8)


def test_delta_segment_examples():
    seg = box_chain(t=0, x=0, y=0, z=(-1, 1))
    assert collapse_integrate(delta(Z), seg).value == pytest.approx(1.0, abs=1e-13)
    no_cross = box_chain(t=0, x=0, y=0, z=(1, 2))
    assert collapse_integrate(delta(Z), no_cross).value == 0.0
    assert collapse_integrate(delta(Const(2.0) * Z), seg).value == pytest.approx(
        1.0, abs=1e-13
    )


def test_mollified_segment_accuracy():
    seg = box_chain(t=0, x=0, y=0, z=(-1, 1))
    assert mollified_integrate(delta(Z), seg) == pytest.approx(1.0, abs=1e-8)


def test_mollified_tail_clipping():
    # crossing sits 10 epsilon from the chain boundary: tail loss is negligible
    spec = QuadratureSpec(epsilon=0.01)
    seg = box_chain(t=0, x=0, y=0, z=(-0.1, 1.0))
    assert mollified_integrate(delta(Z), seg, spec) == pytest.approx(1.0, abs=1e-6)


def test_mollified_divergence_detected():
    # 2-point panels cannot resolve the finest rung: growing ladder differences
    seg = box_chain(t=0, x=0, y=0, z=(-1, 1))
    with pytest.raises(OracleDivergenceError):
        mollified_integrate(delta(Z), seg, QuadratureSpec(order=2, epsilon=0.004))


def test_multiple_roots_signed_crossings():
    # phi = z^2 - 0.25 crosses twice on z in (-1, 1), in opposite directions.
    # D(phi) = d(step(phi)), so the bare delta-form integrates to the SIGNED
    # crossing count (zero here), not the unsigned density sum.
    phi = Z * Z - Const(0.25)
    seg = box_chain(t=0, x=0, y=0, z=(-1, 1))
    r = collapse_integrate(delta(phi), seg)
    assert r.value == pytest.approx(0.0, abs=1e-12)
    assert np.all(r.roots_found == 2)
    assert mollified_integrate(delta(phi), seg) == pytest.approx(0.0, abs=1e-8)
    # step-function fundamental theorem: value = step(phi(end)) - step(phi(start))
    half = box_chain(t=0, x=0, y=0, z=(0, 1))  # phi: -0.25 -> 0.75, one crossing
    assert collapse_integrate(delta(phi), half).value == pytest.approx(1.0, abs=1e-12)
    # weighting by z makes both roots contribute +1/2
    jz = SingularForm(scalar_form(Z), (DeltaFactor(phi),))
    rz = collapse_integrate(jz, seg)
    assert rz.value == pytest.approx(1.0, abs=1e-10)
    assert mollified_integrate(jz, seg) == pytest.approx(1.0, abs=1e-6)


def test_oracle_equivalence_sample_surface():
    rng = np.random.default_rng(51)
    for _ in range(6):
        l2 = rand_form(rng, 2, twisted=True, simple=True)
        phi = rand_affine_levelset(rng, axis=3)
        j = surface_current(l2, phi)
        c = rand_space_box(rng)
        rc = collapse_integrate(j, c).value
        rm = mollified_integrate(j, c)
        assert rc == pytest.approx(rm, abs=1e-4)


def test_degree_mismatch_errors():
    j = SingularForm(wedge(dx(1), dx(2)), (DeltaFactor(Z),))
    c2 = box_chain(t=0, x=(0, 1), y=(0, 1), z=0)
    with pytest.raises(DegreeError):
        collapse_integrate(j, c2)
    with pytest.raises(DegreeError):
        mollified_integrate(j, c2)
    with pytest.raises(DegreeError):
        integrate_regular(wedge(dx(1), dx(2)), box_chain(t=0, x=(0, 1), y=0, z=0))
    with pytest.raises(DegreeError):
        total_charge(j, box_chain(t=(0, 1), x=(0, 1), y=(0, 1), z=(0, 1)))


def test_collapse_singular_cases():
    # delta argument constant and zero on the chain: level set contains it
    j = SingularForm(wedge(dx(1), dx(2)), (DeltaFactor(T - Const(0.5)),))
    c = box_chain(t=0.5, x=(0, 1), y=(0, 1), z=(-1, 1))
    with pytest.raises(CollapseSingularError):
        collapse_integrate(j, c)
    # nearly parallel delta arguments: no well-conditioned axis pair
    phi = X
    psi = X + Const(1e-11) * Y + Const(0.5)
    j2 = SingularForm(dx(2), (DeltaFactor(phi), DeltaFactor(psi)))
    c3 = box_chain(t=0, x=(-1, 1), y=(0, 1), z=(0, 1))
    with pytest.raises(CollapseSingularError):
        collapse_integrate(j2, c3)


def test_chain_rank_validation():
    with pytest.raises(DegreeError):
        Chain(2, (Const(0.0), var(0), var(0), Const(0.0)))  # rank 1 image
    with pytest.raises(DegreeError):
        Chain(1, (Const(0.0), var(1), Const(0.0), Const(0.0)))  # uses param 2 of a 1-chain


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(order=1)
    with pytest.raises(ValueError):
        QuadratureSpec(epsilon=-0.5)


def test_boundary_faces_smooth_stokes():
    rng = np.random.default_rng(52)
    box = box_chain(t=(0, 1), x=(-1, 1), y=(0, 1), z=(-1, 1))
    from deltaforms.exterior import exterior_derivative

    for _ in range(5):
        omega = rand_form(rng, 3)
        lhs = integrate_regular(exterior_derivative(omega), box)
        rhs = sum(integrate_regular(omega, f) for f in boundary_faces(box))
        assert lhs == pytest.approx(rhs, abs=1e-8, rel=1e-8)


def test_diffeomorphism_invariance_smoke():
    rng = np.random.default_rng(53)
    l2 = form_from_terms(2, {(1, 2): Const(1.0) + Const(0.2) * T}, twisted=True)
    j = surface_current(l2, Z)
    c = box_chain(t=0.4, x=(-1, 1), y=(-1, 1), z=(-1, 1))
    from deltaforms.singular import pullback_singular

    m = SmoothMap(near_identity_map_components(rng))
    pre = total_charge(pullback_singular(j, m), c)
    post = total_charge(j, mapped_chain(m, c))
    assert pre == pytest.approx(post, abs=1e-5)


def test_transversality_check_examples():
    cube = box_chain(t=0, x=(-1, 1), y=(-1, 1), z=(-1, 1))
    rep = transversality_check([X, Z], cube)
    assert rep.passed and rep.min_minor == pytest.approx(1.0, abs=1e-9)

    rep2 = transversality_check([X, X + Const(1e-15) * Y], cube)
    assert rep2.n_samples > 0 and not rep2.passed

    region4 = box_chain(t=(-1, 1), x=(-1, 1), y=(-1, 1), z=(-1, 1))
    rep3 = transversality_check([T], region4, check_time_axis=True)
    assert rep3.time_axis_ok is False


def test_mollified_epsilon_ladder_convergence():
    # the single-rung error follows the O(eps^2) law when the integrand has
    # curvature along the surface normal; halving eps quarters the error
    phi = Z - Const(0.2)
    l2 = form_from_terms(2, {(1, 2): Const(1.0) + Z + Z * Z}, twisted=True)
    j = surface_current(l2, phi)
    c = box_chain(t=0, x=(0, 1), y=(0, 1), z=(-1, 1))
    exact = collapse_integrate(j, c).value
    assert exact == pytest.approx(1.24, abs=1e-12)
    errs = []
    for eps in (0.08, 0.04):
        from deltaforms.chains import _mollified_form

        val = integrate_regular(
            _mollified_form(j, eps), c,
            _axis_nodes=[gauss_legendre(16, 1)] * 2 + [gauss_legendre(16, 40)],
        )
        errs.append(abs(val - exact))
    assert errs[1] == pytest.approx(errs[0] / 4, rel=0.05)
    # and the full Richardson ladder beats both raw rungs by a wide margin
    assert abs(mollified_integrate(j, c) - exact) < 1e-8
