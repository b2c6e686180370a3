"""Exterior algebra of smooth differential forms with expression coefficients.

Forms live on R^4 by default (coordinates x0..x3); forms on a chain's
parameter cube use the same machinery with ``n`` set to the parameter count.
Coefficients are stored only for strictly increasing multi-indices, and every
form carries a twist parity flag.  There is deliberately no metric, Hodge
star, or interior product anywhere in this module.

Twisted forms transform with an extra sign(det Jacobian) under pullback.
That transformation rule is a convention of this package (documented in the
README); maps are required to have a single sign of the Jacobian determinant
over the sampled working region, so the sign is a well-defined constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateMapError, DegreeError, ParityError
from .expr import Const, ScalarField, ZERO, _coerce, add, mul, neg

__all__ = [
    "RegularForm",
    "SmoothMap",
    "wedge",
    "exterior_derivative",
    "dualize3",
    "dualize2",
    "pullback",
    "evaluate",
    "levi_civita",
    "perm_sign",
    "multi_indices",
    "dx",
    "scalar_form",
    "form_from_terms",
    "zero_form",
]


def multi_indices(n: int, k: int) -> list[tuple[int, ...]]:
    """Canonical (lexicographic, strictly increasing) multi-indices."""
    return list(itertools.combinations(range(n), k))


def _sort_index(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sort an index tuple, returning (permutation sign, sorted tuple).

    Sign is 0 when an index repeats.
    """
    lst = list(idx)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(lst)):
        if lst[i - 1] == lst[i]:
            return 0, tuple(lst)
    return sign, tuple(lst)


def perm_sign(perm: Sequence[int]) -> int:
    """Sign of a permutation given as a sequence; 0 if entries repeat."""
    return _sort_index(perm)[0]


@lru_cache(maxsize=1)
def levi_civita() -> np.ndarray:
    """The 4D permutation symbol as a (4,4,4,4) int array, eps[0,1,2,3] = 1."""
    eps = np.zeros((4, 4, 4, 4), dtype=np.int64)
    for perm in itertools.permutations(range(4)):
        eps[perm] = perm_sign(perm)
    eps.setflags(write=False)
    return eps


@dataclass(frozen=True)
class RegularForm:
    """Degree-k form: map from increasing multi-indices to scalar fields."""

    degree: int
    coeffs: Mapping[tuple[int, ...], ScalarField]
    twisted: bool = False
    n: int = 4

    def __post_init__(self):
        if not (0 <= self.degree <= self.n):
            raise DegreeError(f"degree {self.degree} invalid on {self.n}-dim space")
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(idx)
            if len(idx) != self.degree or any(
                not (0 <= i < self.n) for i in idx
            ) or list(idx) != sorted(set(idx)):
                raise DegreeError(f"multi-index {idx} invalid for degree {self.degree}")
            if not (isinstance(c, Const) and c.value == 0.0):
                clean[idx] = c
        object.__setattr__(self, "coeffs", MappingProxyType(clean))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, idx: Sequence[int]) -> ScalarField:
        """Coefficient for any index order (antisymmetric reconstruction)."""
        sign, key = _sort_index(idx)
        if sign == 0:
            return ZERO
        c = self.coeffs.get(key, ZERO)
        return c if sign > 0 else neg(c)

    def wedge(self, other: "RegularForm") -> "RegularForm":
        return wedge(self, other)

    def d(self) -> "RegularForm":
        return exterior_derivative(self)

    def __add__(self, other: "RegularForm") -> "RegularForm":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for idx, c in other.coeffs.items():
            out[idx] = add(out.get(idx, ZERO), c)
        return RegularForm(self.degree, out, self.twisted, self.n)

    def __sub__(self, other: "RegularForm") -> "RegularForm":
        return self + (-other)

    def __neg__(self) -> "RegularForm":
        return RegularForm(
            self.degree, {i: neg(c) for i, c in self.coeffs.items()}, self.twisted, self.n
        )

    def __mul__(self, s) -> "RegularForm":
        s = _coerce(s)
        return RegularForm(
            self.degree, {i: mul(s, c) for i, c in self.coeffs.items()}, self.twisted, self.n
        )

    __rmul__ = __mul__

    def _check_compatible(self, other: "RegularForm"):
        if self.degree != other.degree or self.n != other.n:
            raise DegreeError(
                f"cannot combine degree {self.degree} (n={self.n}) "
                f"with degree {other.degree} (n={other.n})"
            )
        if self.twisted != other.twisted:
            raise ParityError("cannot add twisted and untwisted forms")

    def __repr__(self):
        parity = "twisted" if self.twisted else "untwisted"
        if self.is_zero:
            return f"RegularForm(0, degree={self.degree}, {parity})"
        terms = " + ".join(
            f"[{c}] d{''.join(f'x{i}' for i in idx)}" if idx else f"[{c}]"
            for idx, c in sorted(self.coeffs.items())
        )
        return f"RegularForm({terms}, {parity})"


def zero_form(degree: int, twisted: bool = False, n: int = 4) -> RegularForm:
    return RegularForm(degree, {}, twisted, n)


def scalar_form(f, twisted: bool = False, n: int = 4) -> RegularForm:
    """Wrap a scalar field (or number) as a 0-form."""
    return RegularForm(0, {(): _coerce(f)}, twisted, n)


def dx(i: int, n: int = 4) -> RegularForm:
    """The coordinate 1-form dx^i (untwisted)."""
    return RegularForm(1, {(i,): Const(1.0)}, False, n)


def form_from_terms(
    degree: int,
    terms: Mapping[Sequence[int], ScalarField | float],
    twisted: bool = False,
    n: int = 4,
) -> RegularForm:
    """Build a form from terms with arbitrary index order (signs normalized)."""
    out: dict[tuple[int, ...], ScalarField] = {}
    for idx, c in terms.items():
        sign, key = _sort_index(tuple(idx))
        if sign == 0:
            continue
        c = _coerce(c)
        out[key] = add(out.get(key, ZERO), c if sign > 0 else neg(c))
    return RegularForm(degree, out, twisted, n)


def wedge(a: RegularForm, b: RegularForm) -> RegularForm:
    """Exterior product; parity flag combines by XOR."""
    if a.n != b.n:
        raise DegreeError(f"wedge across spaces n={a.n} and n={b.n}")
    k = a.degree + b.degree
    if k > a.n:
        raise DegreeError(f"wedge degree {a.degree}+{b.degree} exceeds {a.n}")
    out: dict[tuple[int, ...], ScalarField] = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            sign, key = _sort_index(ia + ib)
            if sign == 0:
                continue
            term = mul(ca, cb)
            out[key] = add(out.get(key, ZERO), term if sign > 0 else neg(term))
    return RegularForm(k, out, a.twisted != b.twisted, a.n)


def exterior_derivative(a: RegularForm) -> RegularForm:
    """The exterior derivative; raises on top-degree input."""
    if a.degree >= a.n:
        raise DegreeError(f"d of a degree-{a.degree} form on {a.n}-dim space")
    out: dict[tuple[int, ...], ScalarField] = {}
    for idx, c in a.coeffs.items():
        for j in range(a.n):
            dc = c.diff(j)
            if isinstance(dc, Const) and dc.value == 0.0:
                continue
            sign, key = _sort_index((j,) + idx)
            if sign == 0:
                continue
            out[key] = add(out.get(key, ZERO), dc if sign > 0 else neg(dc))
    return RegularForm(a.degree + 1, out, a.twisted, a.n)


def dualize3(j3: RegularForm) -> list[ScalarField]:
    """Vector components J^i = eps^{ijkl} J_{jkl} of a 3-form on R^4.

    Normalized so that J = rho dx1^dx2^dx3 gives J^0 = rho (charge density);
    J^1..J^3 are the 3-current components.
    """
    if j3.n != 4 or j3.degree != 3:
        raise DegreeError(f"dualize3 needs a 3-form on R^4, got degree {j3.degree}, n={j3.n}")
    out = []
    for i in range(4):
        comp = tuple(j for j in range(4) if j != i)
        sign = perm_sign((i,) + comp)
        c = j3.coeffs.get(comp, ZERO)
        out.append(c if sign > 0 else neg(c))
    return out


def dualize2(l2: RegularForm) -> dict[tuple[int, int], ScalarField]:
    """Upper components L^{ij} = (1/2) eps^{ijkl} L_{kl} for increasing (i,j)."""
    if l2.n != 4 or l2.degree != 2:
        raise DegreeError(f"dualize2 needs a 2-form on R^4, got degree {l2.degree}")
    out = {}
    for i, j in multi_indices(4, 2):
        k, l = (m for m in range(4) if m not in (i, j))
        sign = perm_sign((i, j, k, l))
        c = l2.coeffs.get((k, l), ZERO)
        out[(i, j)] = c if sign > 0 else neg(c)
    return out


# -- maps and pullback --------------------------------------------------------

_PROBE_AXIS = np.array([-1.3, -0.45, 0.4, 1.25])


@dataclass(frozen=True)
class SmoothMap:
    """A smooth map of R^4 given by 4 target-coordinate expressions.

    The Jacobian determinant is sampled over the working region at
    construction; it must be nonzero and of a single sign, which becomes the
    twist sign used in pullback.
    """

    components: tuple[ScalarField, ScalarField, ScalarField, ScalarField]
    region: tuple[tuple[float, float], ...] = (((-1.5, 1.5),) * 4)
    orientation_sign: int = field(init=False, default=1)

    def __post_init__(self):
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != 4:
            raise DegreeError(f"SmoothMap needs 4 components, got {len(comps)}")
        object.__setattr__(self, "components", comps)
        dets = self._sample_dets()
        if np.any(np.abs(dets) < 1e-12):
            raise DegenerateMapError("Jacobian determinant vanishes on the working region")
        if np.any(dets > 0) and np.any(dets < 0):
            raise DegenerateMapError("Jacobian determinant changes sign on the working region")
        object.__setattr__(self, "orientation_sign", 1 if dets[0] > 0 else -1)

    def jacobian(self) -> list[list[ScalarField]]:
        """Symbolic Jacobian matrix d(target_i)/d(source_j)."""
        return [[c.diff(j) for j in range(4)] for c in self.components]

    def _sample_dets(self) -> np.ndarray:
        axes = [lo + (_PROBE_AXIS - _PROBE_AXIS.min()) / np.ptp(_PROBE_AXIS) * (hi - lo)
                for lo, hi in self.region]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
        jac = self.jacobian()
        vals = np.empty((grid.shape[0], 4, 4))
        from .tape import compile_tape
        from .kernel import run_tape

        tape = compile_tape([jac[i][j] for i in range(4) for j in range(4)])
        flat = run_tape(tape, grid)
        vals = flat.T.reshape(-1, 4, 4)
        return np.linalg.det(vals)


def pullback_through(form: RegularForm, components: Sequence[ScalarField], n_src: int) -> RegularForm:
    """Pull a form back through coordinate component expressions.

    This is the shared engine for SmoothMap pullback (n_src = 4) and for
    chain parametrizations (n_src = chain dimension).  Twist bookkeeping is
    the caller's job.
    """
    comps = [_coerce(c) for c in components]
    if form.n != len(comps):
        raise DegreeError(f"form on n={form.n} pulled through {len(comps)} components")
    if form.degree > n_src:
        raise DegreeError(
            f"degree-{form.degree} form cannot be pulled to a {n_src}-parameter space"
        )
    dcomp = [
        RegularForm(1, {(j,): comps[i].diff(j) for j in range(n_src)}, False, n_src)
        for i in range(form.n)
    ]
    out = zero_form(form.degree, form.twisted, n_src)
    for idx, c in form.coeffs.items():
        term = scalar_form(c.subs(comps), form.twisted, n_src)
        for i in idx:
            term = wedge(term, dcomp[i])
        out = out + term
    return out


def pullback(a: RegularForm, m: SmoothMap) -> RegularForm:
    """Pullback along a smooth map; twisted forms pick up sign(det Jacobian)."""
    result = pullback_through(a, m.components, 4)
    if a.twisted and m.orientation_sign < 0:
        result = -result
    return result


def evaluate(a: RegularForm, point: Sequence[float]) -> np.ndarray:
    """Numeric coefficients at a point, in canonical multi-index order."""
    return np.array([a.coeff(idx)(point) for idx in multi_indices(a.n, a.degree)])
