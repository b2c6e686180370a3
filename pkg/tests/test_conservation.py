"""Conservation residuals, density extraction, Stokes checks."""

import numpy as np
import pytest

from deltaforms.chains import box_chain, collapse_integrate, total_charge
from deltaforms.conservation import (
    DensityBundle,
    assemble_bulk_current,
    assemble_string_form,
    assemble_surface_densities,
    current_residual,
    extract_string_densities,
    extract_surface_densities,
    mixed_residual,
    point_densities,
    standard_test_chains,
    stokes_check,
    string_law_residual,
    surface_law_residual,
)
from deltaforms.errors import DegreeError, NotReducedError, OrientationError
from deltaforms.expr import Const, coords, cos, parse, sin, var
from deltaforms.exterior import form_from_terms, zero_form
from deltaforms.singular import point_current, surface_current, weak_equal

from conftest import rand_coeff, rand_form

T, X, Y, Z = coords()
Y1, Y2 = var(1), var(2)


def _box4():
    return box_chain(t=(0, 1), x=(-1, 1), y=(-1, 1), z=(-1, 1))


def _family(seed=99):
    return standard_test_chains(_box4(), seed)


# -- covariant residuals -----------------------------------------------------------


def test_conserved_surface_residual_small():
    # sigma = t with i = (y1/2, y2/2) satisfies the adapted law identically
    l2 = assemble_surface_densities(T, Y1 * Const(0.5), Y2 * Const(0.5))
    j = surface_current(l2, Z)
    assert current_residual(j, _family()) < 1e-6


def test_conserved_surface_residual_nontrivial_cancellation():
    # built from a potential: the law holds as an unfolded symbolic identity
    g = sin(Y1) * cos(Const(0.7) * Y2)
    i1 = T * g
    sigma_t_integral = T * T * Const(0.5) * g.diff(1)
    l2 = assemble_surface_densities(sigma_t_integral, i1, Const(0.0))
    j = surface_current(l2, Z)
    assert current_residual(j, _family()) < 1e-6


def test_violated_surface_residual_large():
    l2 = assemble_surface_densities(T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    assert current_residual(j, [_box4()]) > 0.1


def test_point_constant_charge_residual():
    j = point_current(Const(1.5), X - Const(0.3) * T, Y, Z)
    assert current_residual(j, _family()) < 1e-8


def test_current_residual_needs_4chains():
    j = point_current(Const(1.0), X, Y, Z)
    with pytest.raises(DegreeError):
        current_residual(j, [box_chain(t=0, x=(0, 1), y=(0, 1), z=(0, 1))])


# -- mixed residuals ----------------------------------------------------------------


def test_mixed_residual_reduces_to_current_residual_for_zero_bulk():
    l2 = assemble_surface_densities(T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    bulk0 = zero_form(3, twisted=True)
    fam = _family()
    assert mixed_residual(j, bulk0, fam) == pytest.approx(
        current_residual(j, fam), abs=1e-12
    )


def test_mixed_residual_balanced_construction():
    # surface gaining charge at rate matched by a bulk density losing it:
    # -4 sigma' + 8 rho' = 0 on the standard box
    l2 = assemble_surface_densities(Const(1.0) + Const(0.25) * T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    bulk = assemble_bulk_current(Const(0.5) + Const(0.125) * T, 0, 0, 0)
    assert mixed_residual(j, bulk, [_box4()]) < 1e-5


def test_mixed_residual_mismatched_pair():
    l2 = assemble_surface_densities(Const(1.0) + Const(0.25) * T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    bulk = assemble_bulk_current(Const(0.5) - Const(0.125) * T, 0, 0, 0)
    assert mixed_residual(j, bulk, [_box4()]) > 0.1


# -- density extraction --------------------------------------------------------------


def test_extract_surface_densities_example():
    c = Const(2.0) + T
    l2 = form_from_terms(2, {(1, 2): c}, twisted=True)
    sigma, i1, i2 = extract_surface_densities(l2)
    p = [0.5, 0.3, -0.2, 0.0]
    assert sigma(p) == pytest.approx(-c(p))
    assert i1(p) == 0.0 and i2(p) == 0.0


def test_extract_zero_form():
    sigma, i1, i2 = extract_surface_densities(zero_form(2, twisted=True))
    p = [0, 0, 0, 0]
    assert sigma(p) == 0.0 and i1(p) == 0.0 and i2(p) == 0.0


def test_extract_rejects_unreduced():
    l2 = form_from_terms(2, {(1, 3): Const(1.0)}, twisted=True)
    with pytest.raises(NotReducedError):
        extract_surface_densities(l2)


def test_extract_assemble_roundtrip_20():
    rng = np.random.default_rng(81)
    for _ in range(20):
        terms = {}
        for idx in ((0, 1), (0, 2), (1, 2)):
            f = rand_coeff(rng, simple=True)
            # adapted-chart coefficients must not depend on phi = x3
            terms[idx] = f.subs([T, X, Y, Const(0.0)])
        l2 = form_from_terms(2, terms, twisted=True)
        densities = extract_surface_densities(l2)
        back = assemble_surface_densities(*densities)
        p = rng.uniform(-1, 1, 4)
        for idx in ((0, 1), (0, 2), (1, 2)):
            a = l2.coeffs.get(idx, Const(0.0))(p)
            b = back.coeffs.get(idx, Const(0.0))(p)
            assert a == pytest.approx(b, abs=1e-12)


def test_assemble_extract_weak_current_roundtrip():
    rng = np.random.default_rng(82)
    sigma = T + Const(0.5) * Y1
    i1, i2 = sin(Y2), T * Y1
    l2 = assemble_surface_densities(sigma, i1, i2)
    j1 = surface_current(l2, Z)
    j2 = surface_current(assemble_surface_densities(*extract_surface_densities(l2)), Z)
    chains = [box_chain(t=float(t), x=(-1, 1), y=(-1, 1), z=(-1, 1)) for t in (0.2, 0.7)]
    assert weak_equal(j1, j2, chains, 1e-8)


def test_string_form_roundtrip():
    sigma = Const(1.0) + Const(0.5) * T
    jcur = Const(0.5) * var(1)
    k1 = assemble_string_form(sigma, jcur)
    s2, j2 = extract_string_densities(k1)
    p = [0.4, 0.6, 0, 0]
    assert s2(p) == pytest.approx(sigma(p))
    assert j2(p) == pytest.approx(jcur(p))


# -- adapted-chart laws ---------------------------------------------------------------


def test_surface_law_examples():
    assert surface_law_residual(T, Y1 * Const(0.5), Y2 * Const(0.5)) == 0.0
    assert surface_law_residual(T * T, Const(0.0), Const(0.0)) == pytest.approx(2.0)
    # random conserving pair built by symbolic antidifferentiation
    rng = np.random.default_rng(83)
    for _ in range(10):
        g = rand_coeff(rng, simple=True).subs([Const(0.0), Y1, Y2, Const(0.0)])
        i1 = T * g
        sigma = T * T * Const(0.5) * g.diff(1)
        assert surface_law_residual(sigma, i1, Const(0.0)) < 1e-12


def test_string_law_examples():
    yl = var(1)
    assert string_law_residual(yl, T) == 0.0
    assert string_law_residual(T, yl) == 0.0
    assert string_law_residual(T, Const(0.0)) == pytest.approx(1.0)


# -- point densities ------------------------------------------------------------------


def test_point_densities_symbolic():
    v = 0.8
    pd = point_densities(Const(2.0), (Const(v) * T, Const(0.0), Const(0.0)))
    p = [0.5, 0, 0, 0]
    assert pd.velocity[0](p) == pytest.approx(v)
    assert pd.current[0](p) == pytest.approx(2.0 * v)
    assert pd.current[1](p) == 0.0 and pd.current[2](p) == 0.0
    static = point_densities(Const(2.0), (Const(0.1), Const(0.0), Const(0.0)))
    assert all(c(p) == 0.0 for c in static.current)


def test_point_flux_pairing_recovers_charge():
    # moving charge x0(t) = t - 0.5 crosses the x = 0 plane once (v = 1)
    q0 = 1.5
    j = point_current(Const(q0), X - (T - Const(0.5)), Y, Z)
    flux = box_chain(t=(0, 1), x=0.0, y=(-1, 1), z=(-1, 1))
    val = collapse_integrate(j, flux).value
    assert abs(val) == pytest.approx(q0, abs=1e-10)


def test_point_flux_reparametrization_invariance():
    q0 = 1.5
    phi, psi, tau = X - (T - Const(0.5)), Y, Z
    j = point_current(Const(q0), phi, psi, tau)
    # strictly increasing reparametrizations of all three level sets
    j2 = point_current(
        Const(q0),
        Const(2.0) * phi,
        psi + psi * psi * psi,
        from_exp(tau),
    )
    flux = box_chain(t=(0, 1), x=0.0, y=(-1, 1), z=(-1, 1))
    v1 = collapse_integrate(j, flux).value
    v2 = collapse_integrate(j2, flux).value
    assert v1 == pytest.approx(v2, abs=1e-8)
    box = box_chain(t=0.5, x=(-1, 1), y=(-1, 1), z=(-1, 1))
    assert collapse_integrate(j, box).value == pytest.approx(
        collapse_integrate(j2, box).value, abs=1e-8
    )


def from_exp(f):
    from deltaforms.expr import exp

    return exp(f) - Const(1.0)


# -- Stokes ---------------------------------------------------------------------------


def test_stokes_smooth_form():
    rng = np.random.default_rng(84)
    for _ in range(3):
        omega = rand_form(rng, 3)
        lhs, rhs, gap = stokes_check(omega, _box4())
        assert gap < 1e-8


def test_stokes_conserved_surface():
    l2 = assemble_surface_densities(T, Y1 * Const(0.5), Y2 * Const(0.5))
    j = surface_current(l2, Z)
    lhs, rhs, gap = stokes_check(j, _box4())
    assert abs(lhs) < 1e-6 and abs(rhs) < 1e-6 and gap < 1e-6


def test_stokes_violated_surface_both_sides_agree():
    l2 = assemble_surface_densities(T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    lhs, rhs, gap = stokes_check(j, _box4())
    assert abs(lhs) > 0.1
    assert gap < 1e-5


def test_stokes_rejects_bad_boundary_orientation():
    from deltaforms.chains import boundary_faces

    box = _box4()
    faces = boundary_faces(box)
    faces[0] = faces[0].reversed()
    l2 = assemble_surface_densities(T, Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    with pytest.raises(OrientationError):
        stokes_check(j, box, faces=faces)


# -- consistency between the covariant and coordinate forms ----------------------------


@pytest.mark.parametrize(
    "sigma,i1,i2,conserving",
    [
        ("t", "y1/2", "y2/2", True),
        ("2", "0", "0", True),
        ("t", "0", "0", False),
        ("t*t", "t*y1", "0", False),
    ],
)
def test_covariant_iff_coordinate(sigma, i1, i2, conserving):
    names = {"t": 0, "y1": 1, "y2": 2}
    s, a, b = (parse(e, names) for e in (sigma, i1, i2))
    law = surface_law_residual(s, a, b)
    j = surface_current(assemble_surface_densities(s, a, b), Z)
    cov = current_residual(j, [_box4()])
    if conserving:
        assert law < 1e-10 and cov < 1e-6
    else:
        assert law > 0.1 and cov > 0.01


def test_charge_agrees_across_time_slices():
    # static surface: no side flux, so the two slices hold the same charge
    l2 = assemble_surface_densities(Const(1.5), Const(0.0), Const(0.0))
    j = surface_current(l2, Z)
    q0 = total_charge(j, box_chain(t=0.0, x=(-1, 1), y=(-1, 1), z=(-1, 1)))
    q1 = total_charge(j, box_chain(t=1.0, x=(-1, 1), y=(-1, 1), z=(-1, 1)))
    assert q0 == pytest.approx(q1, abs=1e-5)


def test_density_bundle_transverse_independence():
    with pytest.raises(DegreeError):
        DensityBundle(surface=(Z, Const(0.0), Const(0.0)))  # depends on phi
    b = DensityBundle(surface=(T, Y1, Y2))
    assert b.surface is not None
    # string densities are expressions in (t, y) = vars 0,1; var 2 is transverse
    with pytest.raises(DegreeError):
        DensityBundle(string=(T + var(2), Const(0.0)))
    assert DensityBundle(string=(T + var(1), Const(0.0))).string is not None
    with pytest.raises(DegreeError):
        DensityBundle(point=(Const(1.0), (T, Y, Const(0.0))))


def test_standard_test_chain_family_is_deterministic():
    f1 = standard_test_chains(_box4(), 42)
    f2 = standard_test_chains(_box4(), 42)
    assert len(f1) == 6
    rng = np.random.default_rng(0)
    u = rng.uniform(0, 1, (5, 4))
    for c1, c2 in zip(f1, f2):
        assert np.array_equal(c1.map_points(u), c2.map_points(u))
