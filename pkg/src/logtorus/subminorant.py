"""Maximal subminorants of an obstacle, the lambda set-characteristic,
and existence / minimality criteria.

The maximal L_rho-subminorant of an obstacle m solves the discrete
complementarity problem

    v <= m,    L_h v >= 0,    L_h v = 0 wherever v < m,

posed on the whole torus.  The solver is a primal active-set (policy)
iteration: given a contact set, solve L_h v = 0 on its complement with
v = m on the contact cells, then move cells whose multiplier is
negative out of contact and cells that violate v <= m into it.  Each
step is one sparse factorization, and at a fixed point the
complementarity residual is at solver precision.  Projected
under-relaxed Gauss-Seidel sweeps are available as a fallback smoother
for active-set cycling; unbounded iterates are reported as 'diverged'
rather than masked (they signal an obstacle with no subminorant at this
rho, cross-checked by the existence test).

lambda(D) = 1/rho(D) per component, zero for components that are not
connected on spirals; outer/inner values come from one-cell dilation
and erosion of the set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import ConfigError, EmptyInterior, IterationLimit, SolverFailure
from .operators import LinearSystem, assemble
from .pencil import rho_min
from .torus import (DomainMask, Grid, GridField, Strip, build_domain,
                    components, mask_from_inside)

__all__ = [
    "SubminorantResult", "maximal_subminorant", "LambdaValue", "lambda_value",
    "existence_test", "integral_condition", "minimality_test",
]


@dataclass
class SubminorantResult:
    obstacle: GridField
    rho: float
    minorant: GridField
    contact: np.ndarray
    complementarity_residual: float
    status: str                    # 'nonzero' | 'identically_zero' | 'diverged'
    iterations: int
    meta: dict = field(default_factory=dict)


def _pgs_halfsweeps(A, diag, v, m, color_masks, omega=0.8, sweeps=4):
    """Projected under-relaxed Gauss-Seidel on L_h v = 0, v <= m,
    updating one checkerboard color at a time."""
    for _ in range(sweeps):
        for cm in color_masks:
            r = A @ v
            cand = v - r / diag
            v_new = np.minimum(m, (1.0 - omega) * v + omega * cand)
            v[cm] = v_new[cm]
    return v


def maximal_subminorant(m: GridField, rho: float, tol: float = 1e-9,
                        max_iter: int = 120, seed: int = 0) -> SubminorantResult:
    """Maximal subminorant of the obstacle m on the whole torus.

    Returns status 'identically_zero' when the zero field is maximal,
    'diverged' when iterates blow up (no subminorant exists for this
    rho on some component of the positivity set).
    """
    if rho <= 0:
        raise ConfigError("maximal_subminorant needs rho > 0")
    grid = m.grid
    A_full = assemble(grid, "l_rho", rho=rho).matrix.tocsr()
    diag = A_full.diagonal()
    mv = np.asarray(m.values, dtype=float)
    n = grid.ncells
    bound = 1e6 * (1.0 + np.max(np.abs(mv)))
    opscale = 4.0 / grid.hx ** 2 + 4.0 / grid.hy ** 2 + rho * rho
    lam_tol = tol * opscale * (1.0 + np.max(np.abs(mv)))
    feas_tol = tol * (1.0 + np.max(np.abs(mv)))

    J, I = np.meshgrid(np.arange(grid.ny), np.arange(grid.nx), indexing="ij")
    colors = [((J + I) % 2 == c).ravel() for c in (0, 1)]

    active = np.ones(grid.shape, dtype=bool)
    seen = {}
    v = mv.copy()
    status = None
    pgs_used = 0
    for it in range(1, max_iter + 1):
        if active.all():
            v = mv.copy()
        else:
            try:
                op = assemble(grid, "l_rho", rho=rho, clamp=active)
                rhs = op.boundary_rhs(None, clamp_data=np.where(active, mv, 0.0))
                u = LinearSystem(op).solve(rhs, rel_tol=1e-8)
                v = op.embed(u)
                v[active] = mv[active]
            except (SolverFailure, EmptyInterior) as exc:
                raise IterationLimit(
                    f"active-set solve failed at iteration {it}: {exc}") from exc
        if np.max(np.abs(v)) > bound:
            status = "diverged"
            break
        lam = (A_full @ v.ravel()).reshape(grid.shape)
        drop = active & (lam < -lam_tol)
        add = ~active & (v > mv + feas_tol)
        new_active = (active & ~drop) | add
        if not drop.any() and not add.any():
            status = "converged"
            break
        key = new_active.tobytes()
        if key in seen:
            # active-set cycle: smooth with PGS and rebuild the set
            pgs_used += 1
            vv = v.ravel().copy()
            vv = _pgs_halfsweeps(A_full, diag, vv, mv.ravel(), colors,
                                 omega=0.8, sweeps=10)
            v = vv.reshape(grid.shape)
            lam = (A_full @ v.ravel()).reshape(grid.shape)
            new_active = np.abs(v - mv) <= feas_tol
            if pgs_used > 10:
                raise IterationLimit("active-set iteration cycles persistently")
        seen[key] = it
        active = new_active
    else:
        raise IterationLimit(f"no convergence in {max_iter} active-set steps")

    lam = (A_full @ v.ravel()).reshape(grid.shape)
    contact = np.abs(v - mv) <= feas_tol
    comp = np.minimum(mv - v, lam / opscale)
    residual = float(max(np.max(np.maximum(v - mv, 0.0)),
                         np.max(np.maximum(-comp, 0.0))))
    if status != "diverged":
        scale = 1.0 + np.max(np.abs(mv))
        status = "identically_zero" if np.max(np.abs(v)) <= 10 * feas_tol * scale \
            else "nonzero"
    out = GridField(grid, v, {"kind": "maximal_subminorant", "rho": rho})
    return SubminorantResult(m, rho, out, contact, residual, status, it,
                             {"pgs_rescues": pgs_used, "lam_tol": lam_tol})


# ----------------------------------------------------------------------
# lambda and the existence / minimality criteria
# ----------------------------------------------------------------------

@dataclass
class LambdaValue:
    value: float
    inner: Optional[float]
    outer: Optional[float]
    per_component: list
    meta: dict = field(default_factory=dict)


def _dilate(inside, steps=1):
    out = inside.copy()
    for _ in range(steps):
        out = (out | np.roll(out, 1, 0) | np.roll(out, -1, 0)
               | np.roll(out, 1, 1) | np.roll(out, -1, 1))
    return out


def _erode(inside, steps=1):
    out = inside.copy()
    for _ in range(steps):
        out = (out & np.roll(out, 1, 0) & np.roll(out, -1, 0)
               & np.roll(out, 1, 1) & np.roll(out, -1, 1))
    return out


def _lambda_of_mask(mask: DomainMask, seed: int = 0) -> tuple:
    """(max over components of 1/rho, per-component list)."""
    per = []
    for c, part in enumerate(components(mask)):
        if mask.spiral:
            sc = mask.spiral_of(c)
        else:
            from .torus import classify_spiral
            sc = classify_spiral(part)[0]
        if not sc.connected:
            per.append({"component": c, "lambda": 0.0, "rho": None,
                        "spiral": sc.kind})
            continue
        r = rho_min(part, seed=seed)
        lam = 1.0 / r if r else 0.0
        per.append({"component": c, "lambda": lam, "rho": r,
                    "spiral": sc.kind})
    value = max((p["lambda"] for p in per), default=0.0)
    return value, per


def lambda_value(set_or_mask, grid: Optional[Grid] = None,
                 bounds: bool = True, seed: int = 0) -> LambdaValue:
    """lambda of a rasterized set: per-component 1/rho, maximized over
    components; components not connected on spirals contribute 0.

    With bounds=True the outer value uses a one-cell dilation (open
    cover surrogate) and the inner value a one-cell erosion (compact
    subset surrogate); always inner <= value <= outer up to the grid.
    A set whose dilation fills the torus gets outer = inf.
    """
    if isinstance(set_or_mask, DomainMask):
        mask = set_or_mask
        inside = mask.inside
        grid = mask.grid
    else:
        inside = np.asarray(set_or_mask, dtype=bool)
        if grid is None:
            raise ConfigError("boolean sets need an explicit grid")
        if not inside.any():
            return LambdaValue(0.0, 0.0, 0.0, [], {"empty": True})
        if inside.all():
            return LambdaValue(np.inf, np.inf, np.inf, [], {"full": True})
        mask = mask_from_inside(grid, inside)
    value, per = _lambda_of_mask(mask, seed=seed)
    inner = outer = None
    if bounds:
        ero = _erode(inside)
        inner = 0.0
        if ero.any():
            inner = _lambda_of_mask(mask_from_inside(grid, ero), seed=seed)[0]
        dil = _dilate(inside)
        outer = np.inf if dil.all() else \
            _lambda_of_mask(mask_from_inside(grid, dil), seed=seed)[0]
    return LambdaValue(value, inner, outer, per, {})


@dataclass
class ExistenceReport:
    verdict: str          # 'guaranteed' | 'excluded' | 'borderline' | 'inconclusive'
    rho: float
    lam: Optional[LambdaValue]
    nonnegative: bool
    details: dict = field(default_factory=dict)


def existence_test(m: GridField, rho: float, rel_margin: float = 0.02,
                   seed: int = 0) -> ExistenceReport:
    """Classify existence of a nonzero subminorant for the obstacle m.

    guaranteed: m >= 0 everywhere and the positivity set has a component
    with rho(D) < rho (strict, beyond the margin).  excluded: even the
    one-cell dilation of the positivity set has lambda < 1/rho.
    borderline: lambda * rho sits inside the margin band (the critical
    case, sensitive to the boundary behavior of m).  Everything else is
    inconclusive (e.g. sign-changing obstacles, where only the necessary
    conditions apply)."""
    grid = m.grid
    pos = m.values > 0.0
    nonneg = bool(np.min(m.values) >= -1e-14 * (1.0 + np.max(np.abs(m.values))))
    if not pos.any():
        return ExistenceReport("excluded", rho, None, nonneg,
                               {"reason": "positivity set empty"})
    if pos.all():
        return ExistenceReport("guaranteed", rho, None, nonneg,
                               {"reason": "m strictly positive; constants work"})
    lam = lambda_value(pos, grid=grid, bounds=True, seed=seed)
    t = lam.value * rho
    t_outer = (lam.outer if lam.outer is not None else lam.value) * rho
    if t_outer < 1.0 - rel_margin:
        verdict = "excluded"
    elif nonneg and t > 1.0 + rel_margin:
        verdict = "guaranteed"
    elif abs(t - 1.0) <= rel_margin:
        verdict = "borderline"
    else:
        verdict = "inconclusive"
    return ExistenceReport(verdict, rho, lam, nonneg,
                           {"lambda_times_rho": t, "outer_times_rho": t_outer})


@dataclass
class SliceIntegralReport:
    integrals: np.ndarray
    min_integral: float
    refuted: bool


def integral_condition(m: GridField, tol: float = 1e-9) -> SliceIntegralReport:
    """Necessary condition per x-slice: the y-integral of the obstacle
    must be nonnegative on every slice, else no subminorant exists."""
    grid = m.grid
    integrals = m.values.sum(axis=0) * grid.hy
    mn = float(integrals.min())
    scale = 1.0 + float(np.max(np.abs(m.values)))
    return SliceIntegralReport(integrals, mn, bool(mn < -tol * scale))


@dataclass
class MinimalityReport:
    verdict: str          # 'minimal' | 'nonminimal' | 'undetermined'
    rho: float
    certified: bool
    details: dict = field(default_factory=dict)


def _default_witnesses(grid: Grid):
    return [Strip(-np.pi / 8, np.pi / 8), Strip(-np.pi / 4, np.pi / 4),
            Strip(-np.pi / 2 * 0.9, np.pi / 2 * 0.9)]


def minimality_test(v: GridField, rho: float,
                    witnesses: Optional[Sequence] = None,
                    tol: float = 1e-6, seed: int = 0) -> MinimalityReport:
    """Minimality classification of a certified subfunction.

    nonminimal when v >= c > 0 everywhere or L_h v >= c > 0 everywhere
    (a constant slides underneath).  minimal when the harmonicity set
    (cells where the residual vanishes at certificate tolerance)
    contains a domain M with rho(M) < rho; when the harmonicity set is
    the whole torus the witness subdomains stand in for M, which is
    legitimate since enlarging a domain only lowers rho.  Otherwise
    undetermined (no complete classification is available)."""
    from .subfunc import is_subfunction

    grid = v.grid
    cert = is_subfunction(v, rho, tol=tol)
    details: dict = {"certificate_verdict": cert.verdict,
                     "min_mass": cert.min_mass}
    if cert.verdict == "not":
        return MinimalityReport("undetermined", rho, False, details)

    scale = 1.0 + float(np.max(np.abs(v.values)))
    vmin = float(v.values.min())
    dens = cert.residual.masses / grid.cell_area
    dens_min = float(dens.min())
    if vmin > tol * scale:
        details["reason"] = f"v >= {vmin:.3g} > 0 everywhere"
        return MinimalityReport("nonminimal", rho, True, details)
    if dens_min > tol * scale:
        details["reason"] = f"L_rho v >= {dens_min:.3g} > 0 everywhere"
        return MinimalityReport("nonminimal", rho, True, details)

    harm = np.abs(cert.residual.masses) <= cert.threshold
    details["harmonicity_fraction"] = float(harm.mean())
    candidates = []
    if harm.all():
        shapes = witnesses if witnesses is not None else _default_witnesses(grid)
        for shape in shapes:
            wmask = build_domain(grid.spec, grid.nx, grid.ny, shape)
            r = rho_min(wmask, seed=seed)
            candidates.append({"witness": repr(shape), "rho": r})
            if r is not None and r < rho * (1.0 - 1e-3):
                details["witness"] = candidates[-1]
                details["candidates"] = candidates
                return MinimalityReport("minimal", rho, True, details)
    elif harm.any():
        try:
            hmask = mask_from_inside(grid, harm)
        except Exception:
            hmask = None
        if hmask is not None:
            for c, part in enumerate(components(hmask)):
                sc = hmask.spiral_of(c)
                if not sc.connected:
                    continue
                r = rho_min(part, seed=seed)
                candidates.append({"component": c, "rho": r})
                if r is not None and r < rho * (1.0 - 1e-3):
                    details["witness"] = candidates[-1]
                    details["candidates"] = candidates
                    return MinimalityReport("minimal", rho, True, details)
    details["candidates"] = candidates
    return MinimalityReport("undetermined", rho, True, details)
