"""Delta-factors and the singular currents built from them.

A delta factor D(phi) is stored by reference to its level-set function phi
and means delta(phi) d(phi) as one indivisible object; there is no standalone
delta(phi) value anywhere in the API, because only the 1-form combination is
reparametrization invariant.  A singular form is a regular form wedged with
an ordered list of delta factors (delta factors rightmost).

Equality of singular forms is weak: two forms are equal when their integral
pairings against a family of test chains agree.  Level-set degeneracy and
coincidence checks are probabilistic (Newton-projected probe points) and
documented as best-effort.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import Chain, QuadratureSpec, box_chain, collapse_integrate, transversality_check
from .errors import (
    DegenerateSurfaceError,
    DegreeError,
    IllDefinedProductError,
    ParityError,
    TransversalityError,
    UnsupportedChartError,
)
from .expr import Const, ScalarField, _coerce, var
from .exterior import (
    RegularForm,
    SmoothMap,
    exterior_derivative,
    pullback,
    scalar_form,
)
from .kernel import run_tape
from .tape import compile_tape

__all__ = [
    "DeltaFactor",
    "SingularForm",
    "delta",
    "wedge_singular",
    "d_singular",
    "surface_current",
    "string_current",
    "point_current",
    "gauge_reduce",
    "pullback_singular",
    "weak_equal",
    "WORKING_REGION",
]

# default probe box for zero-set sampling; scenarios live inside it
WORKING_REGION = box_chain(t=(-1.25, 1.25), x=(-1.25, 1.25), y=(-1.25, 1.25), z=(-1.25, 1.25))


def _project_to_zero_set(phi: ScalarField, n_axis: int = 5) -> np.ndarray:
    """Newton-project a probe lattice onto phi = 0; returns converged points."""
    grads = [phi.diff(i) for i in range(4)]
    tape = compile_tape([phi] + grads)
    axes = [np.linspace(0.06, 0.94, n_axis)] * 4
    ugrid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    x = WORKING_REGION.map_points(ugrid)
    for _ in range(60):
        out = run_tape(tape, x)
        f, g = out[0], out[1:].T
        gn2 = np.sum(g * g, axis=1)
        live = (np.abs(f) > 1e-13) & (gn2 > 1e-30)
        if not live.any():
            break
        step = np.zeros_like(x)
        step[live] = (f[live] / gn2[live])[:, None] * g[live]
        np.clip(step, -0.4, 0.4, out=step)
        x = x - step
    out = run_tape(tape, x)
    return x[np.abs(out[0]) < 1e-11]


def _expr_is_zero(e: ScalarField, rng_seed: int = 7) -> bool:
    if isinstance(e, Const):
        return e.value == 0.0
    rng = np.random.default_rng(rng_seed)
    pts = rng.uniform(-1.1, 1.1, size=(16, max(4, e.nvars())))
    vals = run_tape(compile_tape([e]), pts)[0]
    return bool(np.all(np.abs(vals) < 1e-10))


@dataclass(frozen=True)
class DeltaFactor:
    """Dirac delta-form D(phi) = delta(phi) d(phi), stored by its level set."""

    phi: ScalarField

    def __post_init__(self):
        object.__setattr__(self, "phi", _coerce(self.phi))
        pts = _project_to_zero_set(self.phi)
        object.__setattr__(self, "_zero_samples", pts)
        if pts.shape[0]:
            grads = [self.phi.diff(i) for i in range(4)]
            g = run_tape(compile_tape(grads), pts)
            gnorm = np.linalg.norm(g, axis=0)
            if np.any(gnorm < 1e-8):
                raise DegenerateSurfaceError(
                    f"gradient of {self.phi!r} vanishes on its zero set "
                    f"(min |grad| = {gnorm.min():.2e})"
                )

    @property
    def gradient(self) -> tuple[ScalarField, ...]:
        return tuple(self.phi.diff(i) for i in range(4))

    def coincides_with(self, other: "DeltaFactor") -> bool:
        """Probabilistic zero-set coincidence test (best effort)."""
        if self.phi is other.phi:
            return True
        for a, b in ((self, other), (other, self)):
            pts = a._zero_samples
            if pts.shape[0] >= 5:
                vals = run_tape(compile_tape([b.phi]), pts)[0]
                if np.all(np.abs(vals) < 1e-9):
                    return True
        return False


@dataclass(frozen=True)
class SingularForm:
    """regular ^ D(phi_1) ^ ... ^ D(phi_m), delta factors rightmost."""

    regular: RegularForm
    deltas: tuple[DeltaFactor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(self.deltas))
        if self.regular.n != 4:
            raise DegreeError("singular forms live on spacetime (n = 4)")
        if self.degree > 4:
            raise DegreeError(
                f"total degree {self.degree} exceeds 4 "
                f"(regular {self.regular.degree} + {len(self.deltas)} deltas)"
            )
        for i in range(len(self.deltas)):
            for jj in range(i + 1, len(self.deltas)):
                if self.deltas[i].coincides_with(self.deltas[jj]):
                    raise IllDefinedProductError(
                        "two delta factors share a zero set; delta(phi)^2 is undefined"
                    )

    @property
    def degree(self) -> int:
        return self.regular.degree + len(self.deltas)

    @property
    def twisted(self) -> bool:
        return self.regular.twisted

    def wedge(self, other) -> "SingularForm":
        return wedge_singular(self, other)

    def __mul__(self, s) -> "SingularForm":
        return SingularForm(self.regular * s, self.deltas)

    __rmul__ = __mul__

    def __neg__(self) -> "SingularForm":
        return SingularForm(-self.regular, self.deltas)

    def __repr__(self):
        ds = " ^ ".join(f"D({d.phi!r})" for d in self.deltas)
        return f"SingularForm({self.regular!r}{' ^ ' + ds if ds else ''})"


def _as_singular(a) -> SingularForm:
    if isinstance(a, SingularForm):
        return a
    if isinstance(a, RegularForm):
        return SingularForm(a, ())
    raise DegreeError(f"expected a form, got {type(a).__name__}")


def delta(phi) -> SingularForm:
    """The Dirac delta-form D(phi), a degree-1 untwisted singular form."""
    return SingularForm(scalar_form(1.0), (DeltaFactor(_coerce(phi)),))


def wedge_singular(a, b) -> SingularForm:
    """Exterior product of singular forms.

    The regular parts are wedged with the Koszul sign for commuting a's delta
    1-forms past b's regular part; the delta lists concatenate.
    """
    a, b = _as_singular(a), _as_singular(b)
    if a.degree + b.degree > 4:
        raise DegreeError(f"wedge degree {a.degree}+{b.degree} exceeds 4")
    reg = a.regular.wedge(b.regular)
    if (len(a.deltas) * b.regular.degree) % 2 == 1:
        reg = -reg
    return SingularForm(reg, a.deltas + b.deltas)


def d_singular(a: SingularForm) -> SingularForm:
    """Exterior derivative; delta factors are closed so only dR survives."""
    a = _as_singular(a)
    if a.degree > 3:
        raise DegreeError(f"d of a total-degree-{a.degree} singular form")
    return SingularForm(exterior_derivative(a.regular), a.deltas)


def surface_current(l2: RegularForm, phi) -> SingularForm:
    """Surface current L ^ D(phi) for a twisted regular 2-form L."""
    if l2.degree != 2:
        raise DegreeError(f"surface current needs a 2-form, got degree {l2.degree}")
    if not l2.twisted:
        raise ParityError("surface current requires a twisted 2-form")
    return SingularForm(l2, (DeltaFactor(_coerce(phi)),))


def string_current(k1: RegularForm, phi, psi) -> SingularForm:
    """String current K ^ D(phi) ^ D(psi) for a twisted regular 1-form K."""
    if k1.degree != 1:
        raise DegreeError(f"string current needs a 1-form, got degree {k1.degree}")
    if not k1.twisted:
        raise ParityError("string current requires a twisted 1-form")
    phi, psi = _coerce(phi), _coerce(psi)
    report = transversality_check([phi, psi], WORKING_REGION)
    if report.n_samples and not report.passed:
        raise TransversalityError(
            f"d(phi)^d(psi) = 0 on the string (largest minor {report.min_minor:.2e})"
        )
    return SingularForm(k1, (DeltaFactor(phi), DeltaFactor(psi)))


def point_current(q, phi, psi, tau) -> SingularForm:
    """Point current q D(phi) ^ D(psi) ^ D(tau); q is a twisted 0-form."""
    q = _coerce(q)
    fields = [_coerce(phi), _coerce(psi), _coerce(tau)]
    report = transversality_check(fields, WORKING_REGION)
    if report.n_samples and not report.passed:
        raise TransversalityError(
            f"level sets are not pairwise transversal along the worldline "
            f"(largest 3x3 minor {report.min_minor:.2e})"
        )
    return SingularForm(
        scalar_form(q, twisted=True), tuple(DeltaFactor(f) for f in fields)
    )


def _affine_gradient(phi: ScalarField) -> list[float] | None:
    grads = [phi.diff(i) for i in range(4)]
    if all(isinstance(g, Const) for g in grads):
        return [g.value for g in grads]
    return None


def gauge_reduce(l2: RegularForm, phi) -> RegularForm:
    """Remove the d(phi) part of L in a chart adapted to phi.

    Supported for phi affine in the coordinates (the adapted chart is then an
    explicit invertible affine map); other level-set functions raise
    UnsupportedChartError.  The reduced form has the same surface current as
    L in the weak sense.
    """
    if l2.degree != 2:
        raise DegreeError(f"gauge reduction applies to 2-forms, got degree {l2.degree}")
    phi = _coerce(phi)
    c = _affine_gradient(phi)
    if c is None:
        raise UnsupportedChartError(
            f"no adapted chart construction for non-affine level set {phi!r}"
        )
    spatial = [abs(v) for v in c[1:]]
    if max(spatial) < 1e-12:
        raise UnsupportedChartError(
            "level set is not transversal to the time axis; no adapted chart"
        )
    p = 1 + int(np.argmax(spatial))
    keep = [0] + [i for i in (1, 2, 3) if i != p]
    c0 = phi([0.0, 0.0, 0.0, 0.0])

    forward = [None] * 4
    for slot, i in enumerate(keep):
        forward[slot] = var(i)
    forward[3] = phi
    fwd_map = SmoothMap(tuple(forward))

    # inverse: x_keep[i] = y_i, x_p solved from phi = y_3
    inverse: list[ScalarField] = [None] * 4
    for slot, i in enumerate(keep):
        inverse[i] = var(slot)
    acc: ScalarField = var(3) - Const(c0)
    for slot, i in enumerate(keep):
        if c[i] != 0.0:
            acc = acc - Const(c[i]) * var(slot)
    inverse[p] = acc / Const(c[p])
    inv_map = SmoothMap(tuple(inverse))

    l_chart = pullback(l2, inv_map)
    dphi_terms = {idx: cf for idx, cf in l_chart.coeffs.items() if 3 in idx}
    if all(_expr_is_zero(cf) for cf in dphi_terms.values()):
        return l2
    reduced_chart = RegularForm(
        2,
        {idx: cf for idx, cf in l_chart.coeffs.items() if 3 not in idx},
        l_chart.twisted,
    )
    return pullback(reduced_chart, fwd_map)


def pullback_singular(j: SingularForm, m: SmoothMap) -> SingularForm:
    """Pullback of a singular form: D(phi) pulls back to D(phi o m)."""
    j = _as_singular(j)
    return SingularForm(
        pullback(j.regular, m),
        tuple(DeltaFactor(d.phi.subs(list(m.components))) for d in j.deltas),
    )


def weak_equal(
    a,
    b,
    test_chains: Sequence[Chain],
    tol: float,
    spec: QuadratureSpec | None = None,
) -> bool:
    """Distributional equality: pairings against every test chain agree."""
    a, b = _as_singular(a), _as_singular(b)
    if a.degree != b.degree:
        raise DegreeError(f"weak equality of degrees {a.degree} and {b.degree}")
    for c in test_chains:
        if c.dim != a.degree:
            raise DegreeError(f"test chain dimension {c.dim} != form degree {a.degree}")
        va = collapse_integrate(a, c, spec).value
        vb = collapse_integrate(b, c, spec).value
        if abs(va - vb) >= tol:
            return False
    return True
