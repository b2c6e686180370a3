"""Integration domains and the two integration routes for singular forms.

A Chain is a smooth parametrized map [0,1]^k -> R^4 with an orientation sign.
Singular forms are integrated two independent ways:

* ``collapse_integrate`` solves the pulled-back delta arguments for a subset
  of parameter axes (Newton / bisection) and collapses each delta exactly,
  dividing the pulled-back wedge coefficient by |det dPhi/dw| at every root.
* ``mollified_integrate`` replaces each delta factor by a Gaussian of width
  eps, integrates the resulting regular form on a composite Gauss-Legendre
  grid, and Richardson-extrapolates the ladder (eps, eps/2, eps/4).

The signed information lives entirely in the wedge coefficient and the chain
orientation; the collapse divides by the absolute determinant so that both
routes agree (the mollified route is the arbiter for this convention).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    CollapseSingularError,
    DegreeError,
    DomainError,
    OracleDivergenceError,
    RootFailureError,
)
from .expr import Const, ScalarField, _coerce, exp as expr_exp, pow_int, var
from .exterior import RegularForm, pullback_through, wedge
from .kernel import run_tape
from .tape import compile_tape

__all__ = [
    "Chain",
    "QuadratureSpec",
    "CollapseResult",
    "TransversalityReport",
    "integrate_regular",
    "collapse_integrate",
    "mollified_integrate",
    "total_charge",
    "transversality_check",
    "box_chain",
    "mapped_chain",
    "boundary_faces",
    "gauss_legendre",
]

_CONDITION_FLOOR = 1e-10


@lru_cache(maxsize=64)
def gauss_legendre(order: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0,1]."""
    if order < 2:
        raise ValueError("quadrature order must be >= 2")
    x, w = np.polynomial.legendre.leggauss(order)
    x = (x + 1.0) / 2.0
    w = w / 2.0
    if panels <= 1:
        return x, w
    nodes = ((np.arange(panels)[:, None] + x[None, :]) / panels).ravel()
    wts = np.tile(w, panels) / panels
    return nodes, wts


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature and root-finding controls.

    ``order`` is the Gauss-Legendre order per axis.  ``epsilon`` is the base
    mollifier width; left as None it is chosen from the chain dimension
    (1e-2 for 1- and 2-chains, wider in 3 and 4 dimensions where the
    composite grid must stay affordable).  ``panels`` forces a composite
    subdivision per axis for regular integration; the mollified route picks
    its own per-axis panel counts from the rung width.
    """

    order: int = 16
    epsilon: float | None = None
    panels: int | None = None
    newton_max_iter: int = 50
    newton_tol: float = 1e-12

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def base_epsilon(self, dim: int, n_deltas: int = 1) -> float:
        if self.epsilon is not None:
            return self.epsilon
        if dim <= 2:
            return 1e-2
        if dim == 3:
            return {1: 5e-2, 2: 8e-2, 3: 1e-1}.get(n_deltas, 1e-1)
        return 1e-1


@dataclass(frozen=True)
class CollapseResult:
    """Outcome of a delta collapse: value, per-node root counts, conditioning."""

    value: float
    roots_found: np.ndarray
    condition: float


@dataclass(frozen=True)
class Chain:
    """Oriented parametrized map [0,1]^k -> R^4 with symbolic Jacobian."""

    dim: int
    components: tuple[ScalarField, ScalarField, ScalarField, ScalarField]
    orientation: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2, 3, 4):
            raise DegreeError(f"chain dimension must be 1..4, got {self.dim}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        comps = tuple(_coerce(c) for c in self.components)
        if len(comps) != 4:
            raise DegreeError("chain needs 4 coordinate components")
        for c in comps:
            if c.nvars() > self.dim:
                raise DegreeError(
                    f"component {c!r} uses more parameters than chain dimension {self.dim}"
                )
        object.__setattr__(self, "components", comps)
        self._rank_check()

    def jacobian(self) -> list[list[ScalarField]]:
        """Symbolic dx^i/du_a, shape 4 x dim."""
        return [[c.diff(a) for a in range(self.dim)] for c in self.components]

    def _rank_check(self):
        jac = self.jacobian()
        tape = compile_tape([jac[i][a] for i in range(4) for a in range(self.dim)])
        axes = [np.array([0.2, 0.55, 0.85])] * self.dim
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        vals = run_tape(tape, grid).T.reshape(-1, 4, self.dim)
        sv = np.linalg.svd(vals, compute_uv=False)
        if np.any(sv[:, -1] < 1e-8):
            raise DegreeError(
                f"chain parametrization is rank-deficient at a sample point "
                f"(min singular value {sv[:, -1].min():.2e})"
            )

    def reversed(self) -> "Chain":
        return Chain(self.dim, self.components, -self.orientation)

    def map_points(self, u: np.ndarray) -> np.ndarray:
        """Map parameter points (N, dim) to spacetime points (N, 4)."""
        tape = compile_tape(list(self.components))
        return run_tape(tape, np.asarray(u, dtype=np.float64)).T


def box_chain(t=None, x=None, y=None, z=None, orientation: int = 1) -> Chain:
    """Axis-aligned box: each coordinate is a number (held fixed) or an
    (lo, hi) interval (swept by the next free parameter, in t,x,y,z order)."""
    specs = [t, x, y, z]
    comps: list[ScalarField] = []
    a = 0
    for s in specs:
        if s is None:
            raise ValueError("all four coordinates need a value or an interval")
        if isinstance(s, (int, float)):
            comps.append(Const(float(s)))
        else:
            lo, hi = float(s[0]), float(s[1])
            comps.append(Const(lo) + (Const(hi - lo) * var(a)))
            a += 1
    if a == 0:
        raise DegreeError("a box chain needs at least one swept interval")
    return Chain(a, tuple(comps), orientation)


def mapped_chain(m, chain: Chain) -> Chain:
    """The image chain m o C of a chain under a smooth map of spacetime."""
    comps = tuple(mi.subs(list(chain.components)) for mi in m.components)
    return Chain(chain.dim, comps, chain.orientation)


def boundary_faces(chain: Chain) -> list[Chain]:
    """The 2k oriented boundary faces of a k-chain (induced orientation).

    Face u_a = 1 keeps the remaining parameters in order with the sign
    (-1)^a relative to the parent, u_a = 0 with the opposite sign.
    """
    if chain.dim < 2:
        raise DegreeError("boundary decomposition needs chain dimension >= 2")
    faces = []
    for a in range(chain.dim):
        for side, s_sign in ((1.0, 1), (0.0, -1)):
            repl: list[ScalarField] = []
            shift = 0
            for j in range(chain.dim):
                if j == a:
                    repl.append(Const(side))
                    shift = 1
                else:
                    repl.append(var(j - shift))
            comps = tuple(c.subs(repl) for c in chain.components)
            sign = chain.orientation * s_sign * (1 if a % 2 == 0 else -1)
            faces.append(Chain(chain.dim - 1, comps, sign))
    return faces


# -- regular integration ------------------------------------------------------


def _tensor_grid(axis_nodes: list[tuple[np.ndarray, np.ndarray]]):
    xs = [xn for xn, _ in axis_nodes]
    ws = [wn for _, wn in axis_nodes]
    grid = np.stack(np.meshgrid(*xs, indexing="ij"), axis=-1).reshape(-1, len(xs))
    wts = ws[0]
    for w in ws[1:]:
        wts = np.multiply.outer(wts, w)
    return grid, wts.ravel()


def _axis_nodes_default(spec: QuadratureSpec, dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    panels = spec.panels or 1
    return [gauss_legendre(spec.order, panels)] * dim


def integrate_regular(
    a: RegularForm,
    chain: Chain,
    spec: QuadratureSpec | None = None,
    _axis_nodes: list[tuple[np.ndarray, np.ndarray]] | None = None,
) -> float:
    """Integrate a regular k-form over a k-chain by tensor Gauss-Legendre."""
    spec = spec or QuadratureSpec()
    k = chain.dim
    if a.degree != k:
        raise DegreeError(f"degree {a.degree} form over a {k}-chain")
    pulled = pullback_through(a, chain.components, k)
    g = pulled.coeff(tuple(range(k)))
    if isinstance(g, Const):
        # quadrature weights sum to 1 per axis on [0,1]
        return float(chain.orientation * g.value)
    grid, wts = _tensor_grid(_axis_nodes or _axis_nodes_default(spec, k))
    vals = run_tape(compile_tape([g]), grid)[0]
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand is non-finite at a quadrature node")
    return float(chain.orientation * np.dot(wts, vals))


# -- delta collapse -----------------------------------------------------------


def _is_singular(j) -> bool:
    return hasattr(j, "deltas") and hasattr(j, "regular")


def _delta_arguments(j, chain: Chain) -> list[ScalarField]:
    return [d.phi.subs(list(chain.components)) for d in j.deltas]


def _wedge_coefficient(j, chain: Chain) -> ScalarField:
    """Coefficient of du^1..du^k for (pullback R) ^ dPhi_1 ^ ... ^ dPhi_m."""
    k = chain.dim
    pulled = pullback_through(j.regular, chain.components, k)
    w = pulled
    for phi_u in _delta_arguments(j, chain):
        dphi = RegularForm(1, {(a,): phi_u.diff(a) for a in range(k)}, False, k)
        w = wedge(w, dphi)
    return w.coeff(tuple(range(k)))


def _constant_argument_shortcut(phis: list[ScalarField], k: int) -> CollapseResult | None:
    """Zero result when a delta argument is constant and nonzero on the cube.

    Happens routinely on boundary faces that a level set never meets.  A
    constant argument that IS zero means the delta is supported on the whole
    chain, which is the non-transversal pathology and an error.
    """
    axes = [np.linspace(0.0, 1.0, 4)] * k
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    grads = [p.diff(a) for p in phis for a in range(k)]
    vals = run_tape(compile_tape(list(phis) + grads), grid)
    for a in range(len(phis)):
        gmax = np.max(np.abs(vals[len(phis) + a * k : len(phis) + (a + 1) * k]))
        if gmax < 1e-10:
            if np.min(np.abs(vals[a])) > 1e-9:
                return CollapseResult(0.0, np.zeros(0, dtype=np.int64), math.inf)
            raise CollapseSingularError(
                "a delta argument vanishes identically on the chain "
                "(level set contains the integration domain)"
            )
    return None


def _select_axes(phis: list[ScalarField], k: int) -> tuple[list[int], list[int]]:
    """Pick the m parameter axes with the best-conditioned dPhi/dw.

    Gradients are sampled on a small lattice (not just the cube center, which
    can be a symmetry point where an even delta argument has zero slope); the
    subset maximizing the normalized determinant at its best sample wins.
    """
    m = len(phis)
    axes_pts = [np.array([0.21, 0.5, 0.83])] * k
    grid = np.stack(np.meshgrid(*axes_pts, indexing="ij"), axis=-1).reshape(-1, k)
    tape = compile_tape([phis[a].diff(j) for a in range(m) for j in range(k)])
    mats = run_tape(tape, grid).T.reshape(-1, m, k)
    norms = np.linalg.norm(mats, axis=2)
    if np.any(np.max(norms, axis=0) < 1e-14):
        raise CollapseSingularError("a pulled-back delta argument has vanishing gradient")
    nmats = mats / np.maximum(norms, 1e-300)[:, :, None]
    best, best_axes = -1.0, None
    for axes in itertools.combinations(range(k), m):
        d = np.max(np.abs(np.linalg.det(nmats[:, :, axes])))
        if d > best:
            best, best_axes = float(d), axes
    if best < _CONDITION_FLOOR:
        raise CollapseSingularError(
            f"no transversal axis selection (best normalized det {best:.2e})"
        )
    w_axes = list(best_axes)
    v_axes = [j for j in range(k) if j not in best_axes]
    return v_axes, w_axes


def _assemble_points(vgrid: np.ndarray, w: np.ndarray, v_axes, w_axes, k: int) -> np.ndarray:
    pts = np.empty((w.shape[0], k))
    for col, j in enumerate(v_axes):
        pts[:, j] = vgrid[:, col]
    for col, j in enumerate(w_axes):
        pts[:, j] = w[:, col]
    return pts


def _bisection_roots_1d(
    phi_tape, vgrid: np.ndarray, v_axes, w_axes, k: int, spec: QuadratureSpec
):
    """All transversal roots of Phi(v, w) = 0 in w on [0,1], per v-node."""
    ngrid = 17
    wg = np.linspace(0.0, 1.0, ngrid)
    nv = vgrid.shape[0]
    vv = np.repeat(vgrid, ngrid, axis=0)
    ww = np.tile(wg, nv)[:, None]
    vals = run_tape(phi_tape, _assemble_points(vv, ww, v_axes, w_axes, k))[0]
    vals = vals.reshape(nv, ngrid)
    sign = np.sign(vals)
    # treat exact zeros at grid nodes as crossings of the right-hand interval
    sign[sign == 0] = 1.0
    bracket = sign[:, :-1] * sign[:, 1:] < 0
    node_idx, seg_idx = np.nonzero(bracket)
    if node_idx.size == 0:
        return node_idx, np.empty((0, 1)), np.zeros(nv, dtype=np.int64)
    lo = wg[seg_idx].copy()
    hi = wg[seg_idx + 1].copy()
    flo = vals[node_idx, seg_idx]
    vsel = vgrid[node_idx]
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        fmid = run_tape(phi_tape, _assemble_points(vsel, mid[:, None], v_axes, w_axes, k))[0]
        left = flo * fmid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fmid)
    roots = (0.5 * (lo + hi))[:, None]
    # Newton polish: bisection alone can leave |Phi| noticeable when the
    # argument has a very steep gradient (e.g. a large constant rescaling)
    for _ in range(2):
        out = run_tape(phi_tape, _assemble_points(vsel, roots, v_axes, w_axes, k))
        f = out[0]
        df = out[1]
        safe = np.abs(df) > 1e-300
        step = np.where(safe, f / np.where(safe, df, 1.0), 0.0)
        roots = np.clip(roots - step[:, None], 0.0, 1.0)
    counts = np.bincount(node_idx, minlength=nv)
    return node_idx, roots, counts


def _newton_roots_nd(
    phi_tape, m: int, vgrid: np.ndarray, v_axes, w_axes, k: int, spec: QuadratureSpec
):
    """Damped-Newton roots of the m delta arguments, all seeds, deduplicated."""
    seeds_axis = np.linspace(0.05, 0.95, 6)
    seed_grid = np.stack(
        np.meshgrid(*([seeds_axis] * m), indexing="ij"), axis=-1
    ).reshape(-1, m)
    ns = seed_grid.shape[0]
    nv = vgrid.shape[0]
    node_idx = np.repeat(np.arange(nv), ns)
    w = np.tile(seed_grid, (nv, 1))
    vv = vgrid[node_idx]

    def eval_phi(wcur):
        out = run_tape(phi_tape, _assemble_points(vv, wcur, v_axes, w_axes, k))
        f = out[:m].T
        jac = out[m:].T.reshape(-1, m, m)
        return f, jac

    f, jac = eval_phi(w)
    fnorm = np.max(np.abs(f), axis=1)
    alive = np.ones(w.shape[0], dtype=bool)
    for _ in range(spec.newton_max_iter):
        jscale = np.maximum(1.0, np.max(np.abs(jac.reshape(len(w), -1)), axis=1))
        conv = fnorm < spec.newton_tol * jscale
        alive &= ~conv
        if not alive.any():
            break
        try:
            step = np.linalg.solve(jac[alive], f[alive][..., None])[..., 0]
        except np.linalg.LinAlgError:
            # singular Jacobian at some seed: nudge and continue
            jj = jac[alive] + 1e-12 * np.eye(m)[None]
            step = np.linalg.solve(jj, f[alive][..., None])[..., 0]
        np.clip(step, -0.5, 0.5, out=step)
        # backtracking: accept the largest damping that does not grow |Phi|
        wa, fa = w[alive], fnorm[alive]
        va = vv[alive]
        best_w = wa - step
        out = run_tape(phi_tape, _assemble_points(va, best_w, v_axes, w_axes, k))
        best_f = out[:m].T
        best_norm = np.max(np.abs(best_f), axis=1)
        for damp in (0.5, 0.25):
            worse = best_norm > fa
            if not worse.any():
                break
            trial = wa - damp * step
            out = run_tape(
                phi_tape, _assemble_points(va[worse], trial[worse], v_axes, w_axes, k)
            )
            tf = out[:m].T
            tn = np.max(np.abs(tf), axis=1)
            improve = tn < best_norm[worse]
            idx = np.nonzero(worse)[0][improve]
            best_w[idx] = trial[worse][improve]
            best_f[idx] = tf[improve]
            best_norm[idx] = tn[improve]
        w[alive] = best_w
        f2, jac2 = eval_phi(w)
        f, jac, fnorm = f2, jac2, np.max(np.abs(f2), axis=1)
        # seeds that left a generous bounding box are abandoned
        escaped = np.any((w < -1.0) | (w > 2.0), axis=1)
        alive &= ~escaped

    jscale = np.maximum(1.0, np.max(np.abs(jac.reshape(len(w), -1)), axis=1))
    keep = (fnorm < 1e-9 * jscale) & np.all((w > -1e-12) & (w < 1 + 1e-12), axis=1)
    node_idx, w = node_idx[keep], np.clip(w[keep], 0.0, 1.0)
    # deduplicate per node
    order = np.lexsort(tuple(w[:, c] for c in reversed(range(m))) + (node_idx,))
    node_idx, w = node_idx[order], w[order]
    uniq = np.ones(w.shape[0], dtype=bool)
    if w.shape[0] > 1:
        same_node = node_idx[1:] == node_idx[:-1]
        close = np.max(np.abs(w[1:] - w[:-1]), axis=1) < 1e-7
        uniq[1:] = ~(same_node & close)
    node_idx, w = node_idx[uniq], w[uniq]
    counts = np.bincount(node_idx, minlength=nv)
    return node_idx, w, counts


def collapse_integrate(j, chain: Chain, spec: QuadratureSpec | None = None) -> CollapseResult:
    """Integrate a singular k-form over a k-chain by exact delta collapse."""
    spec = spec or QuadratureSpec()
    k = chain.dim
    if isinstance(j, RegularForm):
        val = integrate_regular(j, chain, spec)
        return CollapseResult(val, np.zeros(0, dtype=np.int64), math.inf)
    if not _is_singular(j):
        raise DegreeError(f"cannot integrate object of type {type(j).__name__}")
    if j.degree != k:
        raise DegreeError(f"degree {j.degree} singular form over a {k}-chain")
    m = len(j.deltas)
    if m == 0:
        val = integrate_regular(j.regular, chain, spec)
        return CollapseResult(val, np.zeros(0, dtype=np.int64), math.inf)
    if j.regular.is_zero:
        return CollapseResult(0.0, np.zeros(0, dtype=np.int64), math.inf)

    phis = _delta_arguments(j, chain)
    trivial = _constant_argument_shortcut(phis, k)
    if trivial is not None:
        return trivial
    g = _wedge_coefficient(j, chain)
    v_axes, w_axes = _select_axes(phis, k)

    if v_axes:
        axis_nodes = [gauss_legendre(spec.order, spec.panels or 1)] * len(v_axes)
        vgrid, vwts = _tensor_grid(axis_nodes)
    else:
        vgrid, vwts = np.zeros((1, 0)), np.ones(1)

    det_exprs = [phis[a].diff(w_axes[b]) for a in range(m) for b in range(m)]
    if m == 1:
        phi_tape = compile_tape([phis[0], phis[0].diff(w_axes[0])])
        node_idx, roots, counts = _bisection_roots_1d(phi_tape, vgrid, v_axes, w_axes, k, spec)
    else:
        phi_tape = compile_tape(phis + det_exprs)
        node_idx, roots, counts = _newton_roots_nd(phi_tape, m, vgrid, v_axes, w_axes, k, spec)

    if node_idx.size == 0:
        return CollapseResult(0.0, counts, math.inf)

    pts = _assemble_points(vgrid[node_idx], roots, v_axes, w_axes, k)
    out = run_tape(compile_tape([g] + det_exprs + phis), pts)
    gvals = out[0]
    jac_entries = out[1 : 1 + m * m]
    dets = np.linalg.det(jac_entries.T.reshape(-1, m, m))
    residual = np.max(np.abs(out[1 + m * m :]), axis=0)
    # residual measured against the local gradient scale: a steep delta
    # argument legitimately leaves larger absolute |Phi| at the same root
    scale = np.maximum(1.0, np.max(np.abs(jac_entries), axis=0))
    bad = residual > 1e-8 * scale
    if np.any(bad):
        raise RootFailureError(
            f"root residual {residual.max():.2e} at node(s) {node_idx[bad][:5].tolist()}"
        )
    if not np.all(np.isfinite(gvals)):
        raise DomainError("collapsed integrand is non-finite at a root")
    absdet = np.abs(dets)
    if np.any(absdet < _CONDITION_FLOOR):
        raise CollapseSingularError(
            f"delta arguments tangent to the chain at a root (|det|={absdet.min():.2e})"
        )
    contrib = gvals / absdet
    per_node = np.zeros(vgrid.shape[0])
    np.add.at(per_node, node_idx, contrib)
    value = float(chain.orientation * np.dot(vwts, per_node))
    return CollapseResult(value, counts, float(absdet.min()))


def total_charge(j, m3: Chain, spec: QuadratureSpec | None = None) -> float:
    """Total charge of a degree-3 current in a 3-dimensional chain."""
    deg = j.degree
    if deg != 3 or m3.dim != 3:
        raise DegreeError(f"total_charge needs degree 3 over dim 3, got {deg}/{m3.dim}")
    return collapse_integrate(j, m3, spec).value


# -- mollified oracle ---------------------------------------------------------


def _gaussian_delta(phi: ScalarField, eps: float) -> ScalarField:
    norm = Const(1.0 / (eps * math.sqrt(2.0 * math.pi)))
    return norm * expr_exp(Const(-0.5 / (eps * eps)) * pow_int(phi, 2))


def _mollified_form(j, eps: float) -> RegularForm:
    """Replace every delta factor by a width-eps Gaussian times d(phi)."""
    out = j.regular
    for d in j.deltas:
        one_form = RegularForm(1, {(i,): d.phi.diff(i) for i in range(4)}, False, 4)
        out = wedge(out, one_form * _gaussian_delta(d.phi, eps))
    return out


def _refined_axes(j, chain: Chain) -> dict[int, float]:
    """One well-aligned parameter axis per delta factor (greedy, unique).

    Returns {axis: gradient scale}; the scale is the sampled max of
    |dPhi/du_axis|, which converts the mollifier width to parameter units.
    """
    k = chain.dim
    phis = _delta_arguments(j, chain)
    grads = [[p.diff(a) for a in range(k)] for p in phis]
    tape = compile_tape([g for row in grads for g in row])
    axes_pts = [np.linspace(0.1, 0.9, 4)] * k
    grid = np.stack(np.meshgrid(*axes_pts, indexing="ij"), axis=-1).reshape(-1, k)
    vals = np.abs(run_tape(tape, grid)).reshape(len(phis), k, -1)
    mean_g, max_g = vals.mean(axis=2), vals.max(axis=2)
    refined: dict[int, float] = {}
    for a in range(len(phis)):
        row = mean_g[a].copy()
        row[list(refined)] = -1.0
        axis = int(np.argmax(row))
        refined[axis] = max(refined.get(axis, 0.0), float(max_g[a, axis]))
    return refined


def mollified_integrate(j, chain: Chain, spec: QuadratureSpec | None = None) -> float:
    """Richardson-extrapolated Gaussian-mollifier integral (the oracle route)."""
    spec = spec or QuadratureSpec()
    k = chain.dim
    if isinstance(j, RegularForm):
        return integrate_regular(j, chain, spec)
    if j.degree != k:
        raise DegreeError(f"degree {j.degree} singular form over a {k}-chain")
    if not j.deltas:
        return integrate_regular(j.regular, chain, spec)

    eps0 = spec.base_epsilon(k, len(j.deltas))
    refined = _refined_axes(j, chain)
    values = []
    for rung in range(3):
        eps = eps0 / (2.0**rung)
        axis_nodes = []
        for a in range(k):
            if a in refined:
                # width in parameter units is eps / |dPhi/du_a|
                panels = min(400, max(1, math.ceil(refined[a] / (8.0 * eps))))
                axis_nodes.append(gauss_legendre(spec.order, panels))
            else:
                axis_nodes.append(gauss_legendre(max(spec.order, 12), spec.panels or 1))
        values.append(
            integrate_regular(_mollified_form(j, eps), chain, spec, _axis_nodes=axis_nodes)
        )
    v0, v1, v2 = values
    d0, d1 = abs(v1 - v0), abs(v2 - v1)
    scale = max(1.0, abs(v2))
    if d1 > 0.9 * d0 and d1 > 1e-9 * scale and d0 > 1e-12 * scale:
        raise OracleDivergenceError(
            f"mollifier ladder not converging: |dv| = {d0:.3e}, {d1:.3e}"
        )
    a1 = (4.0 * v1 - v0) / 3.0
    a2 = (4.0 * v2 - v1) / 3.0
    return float((16.0 * a2 - a1) / 15.0)


# -- transversality -----------------------------------------------------------


@dataclass(frozen=True)
class TransversalityReport:
    n_samples: int
    min_minor: float
    threshold: float
    passed: bool
    time_axis_min: float | None = None
    time_axis_ok: bool | None = None


def transversality_check(
    fields: Sequence[ScalarField],
    region: Chain,
    check_time_axis: bool = False,
    threshold: float = _CONDITION_FLOOR,
) -> TransversalityReport:
    """Sample the joint zero locus and report the worst gradient minor.

    Projects region samples onto the joint zero set by Gauss-Newton and
    evaluates the largest p x p minor of the gradient matrix there.  With
    ``check_time_axis`` it also reports min over samples of max_alpha
    |phi_{,alpha}| over the spatial indices (the d(phi)^dt != 0 condition).
    """
    fields = [_coerce(f) for f in fields]
    p = len(fields)
    if not (1 <= p <= 3):
        raise DegreeError("transversality check takes 1 to 3 fields")
    grads = [[f.diff(i) for i in range(4)] for f in fields]
    tape = compile_tape(fields + [g for row in grads for g in row])

    axes = [np.linspace(0.08, 0.92, 5)] * region.dim
    ugrid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, region.dim)
    x = region.map_points(ugrid)
    ridge = 1e-13 * np.eye(p)
    for _ in range(40):
        out = run_tape(tape, x)
        f = out[:p].T
        if np.max(np.abs(f)) < 1e-11:
            break
        jac = out[p:].T.reshape(-1, p, 4)
        # minimum-norm Gauss-Newton step: J^T (J J^T)^-1 f
        gram = jac @ jac.transpose(0, 2, 1) + ridge
        y = np.linalg.solve(gram, f[..., None])
        step = (jac.transpose(0, 2, 1) @ y)[..., 0]
        np.clip(step, -0.5, 0.5, out=step)
        x = x - step

    out = run_tape(tape, x)
    f = out[:p].T
    on_locus = np.max(np.abs(f), axis=1) < 1e-8
    n = int(on_locus.sum())
    if n == 0:
        return TransversalityReport(0, math.inf, threshold, True, None, None)
    jac = out[p:].T.reshape(-1, p, 4)[on_locus]
    minors = np.zeros(jac.shape[0])
    for cols in itertools.combinations(range(4), p):
        minors = np.maximum(minors, np.abs(np.linalg.det(jac[:, :, cols])))
    min_minor = float(minors.min())
    time_min = time_ok = None
    if check_time_axis:
        spatial = np.max(np.abs(jac[:, :, 1:]), axis=2)
        time_min = float(spatial.min())
        time_ok = bool(time_min > threshold)
    return TransversalityReport(
        n, min_minor, threshold, bool(min_minor > threshold), time_min, time_ok
    )
