"""Quadratic eigenvalue problem for the pencil K + 2*rho*B + rho^2*I.

K is the masked Dirichlet Laplacian, B the centered d/dx; eigenvalues
rho with a nontrivial kernel make up the discrete spectrum of the
homogeneous boundary problem  L_rho q = 0, q = 0 on the boundary.  The
pencil is linearized by the companion form

        A (q, rho*q) = rho (q, rho*q),    A = [[0, I], [-K, -2B]],

solved densely for small interiors and by multi-shift shift-invert
Arnoldi otherwise.  One application of (A - sigma)^(-1) costs a single
sparse solve with Q(sigma) = K + 2*sigma*B + sigma^2*I.

rho_min searches the positive real axis upward from the rigorous lower
bound sqrt(lambda_1(-K)) (for a real eigenfunction q the antisymmetry
of B forces rho^2 = -<q,Kq>/<q,q>), certifying the least real
eigenvalue whose eigenfunction has a single sign on its component.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs, eigsh, splu

from .errors import SolverFailure
from .operators import assemble
from .torus import TWO_PI, DomainMask, GridField, components, reflect_mask

__all__ = [
    "PencilSystem", "SpectrumResult", "spectrum", "rho_min",
    "check_spectrum_symmetries", "check_monotonicity",
    "check_shrinking_limit", "matsaev_probe",
]

DENSE_CUTOFF = 1200


def erode_periodic(inside: np.ndarray, steps: int = 1) -> np.ndarray:
    out = inside.copy()
    for _ in range(steps):
        out = (out
               & np.roll(out, 1, 0) & np.roll(out, -1, 0)
               & np.roll(out, 1, 1) & np.roll(out, -1, 1))
    return out


@dataclass
class SpectrumResult:
    """Certified pencil eigenvalues with eigenfunctions and residuals."""

    eigenvalues: np.ndarray
    eigenfunctions: list
    residuals: np.ndarray
    rho_min: Optional[float]
    domain: DomainMask
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


class PencilSystem:
    """Matrices and solvers for the pencil of one mask."""

    def __init__(self, mask: DomainMask, bc: str = "face", seed: int = 0):
        self.mask = mask
        self.bc = bc
        self.seed = seed
        self.opK = assemble(mask, "laplacian", bc=bc)
        self.opB = assemble(mask, "d_dx", bc=bc)
        self.K = self.opK.matrix.tocsc()
        self.B = self.opB.matrix.tocsc()
        self.n = self.K.shape[0]
        hx, hy = mask.grid.hx, mask.grid.hy
        self._kscale = 4.0 / hx ** 2 + 4.0 / hy ** 2
        self._bscale = 1.0 / hx

    # -- residual and certification -----------------------------------
    def residual(self, rho: complex, q: np.ndarray) -> float:
        r = self.K @ q + 2.0 * rho * (self.B @ q) + rho * rho * q
        scale = (self._kscale + 2.0 * abs(rho) * self._bscale + abs(rho) ** 2)
        return float(np.linalg.norm(r) / (np.linalg.norm(q) * scale))

    def normalize(self, q: np.ndarray) -> np.ndarray:
        peak = q[np.argmax(np.abs(q))]
        return q / peak

    def embed_field(self, q: np.ndarray, real: bool = False) -> GridField:
        if real:
            q = np.real(self.normalize(q))
        vals = self.opK.embed(q)
        return GridField(self.mask.grid, vals, {"bc": self.bc})

    def sign_definite(self, q: np.ndarray, tol_core: float = 1e-6,
                      tol_layer: float = 1e-3) -> bool:
        """Single sign after peak normalization; a 2-cell boundary layer
        may dip slightly below zero."""
        q = self.normalize(q)
        if np.max(np.abs(q.imag)) > 1e-5:
            return False
        v = self.opK.embed(q.real)
        comp = self.mask.inside
        core = erode_periodic(comp, 2)
        if core.any() and v[core].min() < -tol_core:
            return False
        layer = comp & ~core
        return not (layer.any() and v[layer].min() < -tol_layer)

    # -- eigenvalue engines --------------------------------------------
    def dense_eigs(self):
        Kd = self.K.toarray()
        Bd = self.B.toarray()
        n = self.n
        A = np.zeros((2 * n, 2 * n))
        A[:n, n:] = np.eye(n)
        A[n:, :n] = -Kd
        A[n:, n:] = -2.0 * Bd
        from scipy.linalg import eig
        vals, vecs = eig(A)
        return vals, vecs[:n, :]

    def eigs_near(self, sigma: complex, k: int = 12):
        """Eigenpairs of the companion nearest sigma via shift-invert."""
        n = self.n
        k = min(k, 2 * n - 2)
        Q = (self.K + 2.0 * sigma * self.B
             + sigma * sigma * sparse.identity(n, format="csc"))
        try:
            lu = splu(Q.astype(np.complex128))
        except RuntimeError:
            sigma = sigma + 1e-3 + 1e-3j
            Q = (self.K + 2.0 * sigma * self.B
                 + sigma * sigma * sparse.identity(n, format="csc"))
            lu = splu(Q.astype(np.complex128))

        B = self.B

        def opinv(w):
            f, g = w[:n], w[n:]
            u = -lu.solve(g + 2.0 * (B @ f) + sigma * f)
            return np.concatenate([u, f + sigma * u])

        def amat(w):
            f, g = w[:n], w[n:]
            return np.concatenate([g, -(self.K @ f) - 2.0 * (B @ g)])

        A_op = LinearOperator((2 * n, 2 * n), matvec=amat, dtype=np.complex128)
        OPinv = LinearOperator((2 * n, 2 * n), matvec=opinv, dtype=np.complex128)
        rng = np.random.default_rng(self.seed)
        v0 = rng.standard_normal(2 * n) + 0j
        try:
            vals, vecs = eigs(A_op, k=k, sigma=sigma, OPinv=OPinv, v0=v0,
                              maxiter=3000)
        except ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            if vals.size == 0:
                raise SolverFailure(f"ARPACK failed near sigma={sigma}") from exc
        return vals, vecs[:n, :]


def _collect(system: PencilSystem, raw_vals, raw_vecs, tol_res: float,
             accepted: dict):
    """Residual-certify and deduplicate eigenpairs into `accepted`."""
    for idx in range(len(raw_vals)):
        rho = complex(raw_vals[idx])
        q = raw_vecs[:, idx]
        res = system.residual(rho, q)
        if res > tol_res:
            continue
        key = None
        for existing in accepted:
            if abs(rho - existing) <= 1e-6 * (1.0 + abs(existing)):
                key = existing
                break
        if key is None:
            accepted[rho] = (res, q)
        elif res < accepted[key][0]:
            accepted[key] = (res, q)


def _default_shifts(box, P: float) -> list:
    re0, re1, im0, im1 = box
    nre = int(np.clip(np.ceil((re1 - re0) / 2.0), 2, 6))
    res = np.linspace(re0 + 0.1 * (re1 - re0), re1 - 0.1 * (re1 - re0), nre)
    ims = {0.0} if im0 <= 0.0 <= im1 else set()
    step = TWO_PI / P
    m = 1
    while -m * step >= im0 or m * step <= im1:
        for s in (-m * step, m * step):
            if im0 <= s <= im1:
                ims.add(s)
        m += 1
        if m > 8:
            break
    shifts = [complex(r, i) for r in res for i in sorted(ims)]
    return shifts


def spectrum(mask: DomainMask, search_box, max_count: int = 200,
             tol_res: float = 1e-8, bc: str = "face", k_per_shift: int = 16,
             shifts: Optional[Sequence[complex]] = None,
             dense_cutoff: int = DENSE_CUTOFF, seed: int = 0) -> SpectrumResult:
    """All certified pencil eigenvalues in a box (re0, re1, im0, im1).

    Every reported pair satisfies the relative residual bound tol_res;
    if more than max_count survive, the list is truncated by |rho| and
    flagged in meta['truncated'].
    """
    re0, re1, im0, im1 = search_box
    system = PencilSystem(mask, bc=bc, seed=seed)
    accepted: dict = {}
    if system.n <= dense_cutoff:
        vals, vecs = system.dense_eigs()
        keep = np.isfinite(vals)
        _collect(system, vals[keep], vecs[:, keep], tol_res, accepted)
        mode = "dense"
    else:
        if shifts is None:
            shifts = _default_shifts(search_box, mask.grid.spec.P)
        for sigma in shifts:
            try:
                vals, vecs = system.eigs_near(sigma, k=k_per_shift)
            except SolverFailure:
                continue
            _collect(system, vals, vecs, tol_res, accepted)
        mode = "shift-invert"

    inbox = [(r, v) for r, v in accepted.items()
             if re0 <= r.real <= re1 and im0 <= r.imag <= im1]
    inbox.sort(key=lambda t: abs(t[0]))
    truncated = len(inbox) > max_count
    inbox = inbox[:max_count]

    eigenvalues = np.array([r for r, _ in inbox])
    residuals = np.array([v[0] for _, v in inbox])
    fields = [system.embed_field(system.normalize(v[1])) for _, v in inbox]
    meta = {"mode": mode, "tol_res": tol_res, "box": tuple(search_box),
            "truncated": truncated, "bc": bc}
    result = SpectrumResult(eigenvalues, fields, residuals, None, mask, meta)
    result.rho_min = _rho_min_from_result(system, result)
    return result


def _tol_real(mask: DomainMask, tol_res: float) -> float:
    h = max(mask.grid.hx, mask.grid.hy)
    return 10.0 * tol_res + 5.0 * h * h


def _rho_min_from_result(system: PencilSystem, result: SpectrumResult):
    tol_re = _tol_real(result.domain, result.meta.get("tol_res", 1e-8))
    best = None
    for i, rho in enumerate(result.eigenvalues):
        if rho.real > tol_re and abs(rho.imag) <= tol_re:
            q = result.eigenfunctions[i].values[result.domain.inside]
            if system.sign_definite(q):
                if best is None or rho.real < best:
                    best = float(rho.real)
    return best


@dataclass
class RhoMinResult:
    value: Optional[float]
    eigenfunction: Optional[GridField]
    residual: Optional[float]
    meta: dict


def _component_rho_min(mask: DomainMask, bc: str, tol_res: float,
                       k: int, seed: int, max_rungs: int = 14) -> RhoMinResult:
    system = PencilSystem(mask, bc=bc, seed=seed)
    tol_re = _tol_real(mask, tol_res)
    meta: dict = {"bc": bc, "tol_real": tol_re}

    if system.n <= DENSE_CUTOFF:
        vals, vecs = system.dense_eigs()
        meta["mode"] = "dense"
        best = None
        for i in range(len(vals)):
            rho = complex(vals[i])
            if not (rho.real > tol_re and abs(rho.imag) <= tol_re):
                continue
            q = vecs[:, i]
            if system.residual(rho, q) > tol_res:
                continue
            if (best is None or rho.real < best[0].real) and system.sign_definite(q):
                best = (rho, q)
        if best is None:
            return RhoMinResult(None, None, None, meta)
        rho, q = best
        return RhoMinResult(float(rho.real),
                            system.embed_field(q, real=True),
                            system.residual(rho, q), meta)

    meta["mode"] = "shift-invert"
    # rigorous lower bound: rho(D)^2 >= lambda_1(-K) up to B boundary terms
    try:
        lam1 = float(eigsh(-system.K, k=1, sigma=0, which="LM",
                           return_eigenvectors=False)[0])
        sigma0 = max(np.sqrt(max(lam1, 0.0)) * 0.9, 1e-3)
    except Exception:
        sigma0 = 0.25
    meta["sigma0"] = sigma0

    candidates: dict = {}
    sigma = sigma0
    found = None
    for _ in range(max_rungs):
        try:
            vals, vecs = system.eigs_near(sigma + 0.0j, k=k)
        except SolverFailure:
            sigma *= 1.8
            continue
        _collect(system, vals, vecs, tol_res, candidates)
        reals = sorted(
            (r for r in candidates
             if r.real > tol_re and abs(r.imag) <= tol_re
             and system.sign_definite(candidates[r][1])),
            key=lambda r: r.real)
        if reals:
            found = reals[0]
            # cover the interval [sigma0, found] against smaller candidates
            gap_mid = 0.5 * (sigma0 + found.real)
            if abs(gap_mid - sigma) > 0.25 * (found.real - sigma0) and \
               found.real - sigma0 > 0.05 * found.real:
                try:
                    vals, vecs = system.eigs_near(gap_mid + 0.0j, k=k)
                    _collect(system, vals, vecs, tol_res, candidates)
                    reals = sorted(
                        (r for r in candidates
                         if r.real > tol_re and abs(r.imag) <= tol_re
                         and system.sign_definite(candidates[r][1])),
                        key=lambda r: r.real)
                    found = reals[0]
                except SolverFailure:
                    pass
            break
        sigma *= 1.8
    if found is None:
        return RhoMinResult(None, None, None, meta)
    res, q = candidates[found]
    return RhoMinResult(float(found.real),
                        system.embed_field(q, real=True), res, meta)


def rho_min(mask: DomainMask, bc: str = "face", tol_res: float = 1e-8,
            k: int = 12, seed: int = 0, full_result: bool = False):
    """Least positive real pencil eigenvalue with a sign-definite
    eigenfunction; None when no component is connected on spirals.

    For multi-component masks the minimum over components is returned
    (the widest component governs).
    """
    if mask.n_components == 1:
        parts = [mask]
    else:
        parts = components(mask)
    best: Optional[RhoMinResult] = None
    for part in parts:
        if part.spiral:
            sc = part.spiral_of(0)
        else:
            from .torus import classify_spiral
            sc = classify_spiral(part)[0]
        if not sc.connected:
            continue
        r = _component_rho_min(part, bc, tol_res, k, seed)
        if r.value is not None and (best is None or r.value < best.value):
            best = r
    if best is None:
        best = RhoMinResult(None, None, None, {"note": "no certified value"})
    h = max(mask.grid.hx, mask.grid.hy)
    if best.value is not None and best.value * h > 1.0:
        best.meta["grid_limited"] = True
    # a near-empty complement means the boundary barely has capacity at
    # this resolution; such values only compare across grids
    n_out = int((~mask.inside).sum())
    if n_out <= max(4, mask.grid.ncells // 500):
        best.meta["resolution_limited"] = True
    return best if full_result else best.value


# ----------------------------------------------------------------------
# verification-style checks
# ----------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool
    details: dict


def check_spectrum_symmetries(result: SpectrumResult, bc: str = "face",
                              shift_rtol: float = 0.03,
                              match_rtol: float = 1e-6, seed: int = 0) -> CheckReport:
    """Verify the structural symmetries of the computed spectrum.

    (1) no eigenvalue on the imaginary axis, (2) closure under
    conjugation (to solver tolerance) and under the vertical shift
    2*pi*i/P (to shift_rtol; the shift is only an O(h^2) symmetry of the
    discretized pencil), (3) Spec(-D) = -Spec(D) by recomputation on the
    reflected mask, (4) invariance under whole-cell translation.
    """
    mask = result.domain
    P = mask.grid.spec.P
    vals = result.eigenvalues
    details: dict = {}
    tol_re = _tol_real(mask, result.meta.get("tol_res", 1e-8))
    details["imaginary_axis_violations"] = [
        complex(r) for r in vals if abs(r.real) <= tol_re]

    def match(target, pool, rtol):
        if len(pool) == 0:
            return np.inf
        return float(np.min(np.abs(pool - target)) / (1.0 + abs(target)))

    re0, re1, im0, im1 = result.meta["box"]

    def in_box(z, margin=0.0):
        return (re0 + margin <= z.real <= re1 - margin
                and im0 + margin <= z.imag <= im1 - margin)

    conj_miss = [complex(r) for r in vals
                 if in_box(np.conj(r)) and match(np.conj(r), vals, 1) > match_rtol]
    details["conjugation_misses"] = conj_miss

    shift = 2j * np.pi / P
    shift_miss = []
    margin = 0.05 * (im1 - im0)
    for r in vals:
        for s in (shift, -shift):
            t = r + s
            if in_box(t, margin) and match(t, vals, 1) > shift_rtol:
                shift_miss.append((complex(r), complex(t)))
    details["shift_misses"] = shift_miss

    neg_box = (-re1, -re0, -im1, -im0)
    reflected = spectrum(reflect_mask(mask), neg_box,
                         tol_res=result.meta.get("tol_res", 1e-8), bc=bc, seed=seed)
    refl_miss = []
    for r in vals:
        t = -r
        # -Spec(D) should appear in Spec(D_-); exact discrete symmetry
        if match(t, reflected.eigenvalues, 1) > match_rtol:
            refl_miss.append(complex(r))
    details["reflection_misses"] = refl_miss

    from .torus import translate_mask
    shifted_mask = translate_mask(mask, 3, 5)
    translated = spectrum(shifted_mask, result.meta["box"],
                          tol_res=result.meta.get("tol_res", 1e-8), bc=bc,
                          seed=seed)
    trans_miss = [complex(r) for r in vals
                  if match(r, translated.eigenvalues, 1) > match_rtol]
    details["translation_misses"] = trans_miss

    passed = (not details["imaginary_axis_violations"] and not conj_miss
              and not shift_miss and not refl_miss and not trans_miss)
    return CheckReport("spectrum_symmetries", passed, details)


def check_monotonicity(mask1: DomainMask, mask2: DomainMask,
                       bc: str = "face", seed: int = 0) -> CheckReport:
    """Strict monotonicity rho(D1) > rho(D2) for D1 strictly inside D2."""
    if not np.all(~mask1.inside | mask2.inside):
        raise ValueError("mask1 must be contained in mask2")
    diff = int((mask2.inside & ~mask1.inside).sum())
    if diff == 0:
        raise ValueError("containment must be strict")
    r1 = rho_min(mask1, bc=bc, seed=seed)
    r2 = rho_min(mask2, bc=bc, seed=seed)
    h = max(mask1.grid.hx, mask1.grid.hy)
    margin = 1e-8
    ok = (r1 is not None and r2 is not None and r1 > r2 + margin)
    return CheckReport("strict_monotonicity", bool(ok),
                       {"rho1": r1, "rho2": r2, "cells_removed": diff,
                        "margin": margin, "h": h})


def check_shrinking_limit(masks: Sequence[DomainMask], mask_limit: DomainMask,
                          compact: Optional[np.ndarray] = None,
                          bc: str = "face", rtol: float = 0.05,
                          seed: int = 0) -> CheckReport:
    """rho(D_n) decreases along an increasing exhaustion D_n up to D and
    approaches rho(D); normalized eigenfunctions converge on a fixed
    compact sub-mask."""
    values, fields = [], []
    for m in masks:
        r = rho_min(m, bc=bc, seed=seed, full_result=True)
        values.append(r.value)
        fields.append(r.eigenfunction)
    r_lim = rho_min(mask_limit, bc=bc, seed=seed)
    eps = 1e-10
    decreasing = all(values[i] + eps >= values[i + 1]
                     for i in range(len(values) - 1))
    approaches = (values[-1] is not None and r_lim is not None
                  and abs(values[-1] - r_lim) <= rtol * abs(r_lim))
    sup_diffs = []
    if compact is None:
        compact = erode_periodic(masks[0].inside, 2)
    for a, b in zip(fields[:-1], fields[1:]):
        if a is None or b is None:
            continue
        va = np.abs(a.values.real)
        vb = np.abs(b.values.real)
        va = va / va[compact].max()
        vb = vb / vb[compact].max()
        sup_diffs.append(float(np.max(np.abs(va - vb)[compact])))
    converging = all(d2 <= d1 + 0.02 for d1, d2 in zip(sup_diffs, sup_diffs[1:]))
    return CheckReport(
        "shrinking_limit",
        bool(decreasing and approaches and converging),
        {"rho_sequence": values, "rho_limit": r_lim, "sup_diffs": sup_diffs})


def matsaev_probe(mask: DomainMask, box=None, bc: str = "face",
                  tol_res: float = 1e-8, seed: int = 0) -> CheckReport:
    """Exploratory comparison of Spec(D) and Spec(-D) plus the identity
    'largest negative spectrum point = -rho(D)'.

    The set equality Spec(D) = Spec(-D) is an open question; the probe
    reports the Hausdorff distance without asserting it.
    """
    P = mask.grid.spec.P
    rmin = rho_min(mask, bc=bc, seed=seed)
    if box is None:
        hi = 3.0 * (rmin or 3.0)
        box = (-hi, hi, -1.2 * TWO_PI / P, 1.2 * TWO_PI / P)
    spec_d = spectrum(mask, box, tol_res=tol_res, bc=bc, seed=seed)
    spec_r = spectrum(reflect_mask(mask), box, tol_res=tol_res, bc=bc, seed=seed)

    a, b = spec_d.eigenvalues, spec_r.eigenvalues
    if len(a) and len(b):
        d_ab = max(np.min(np.abs(b[None, :] - a[:, None]), axis=1).max(),
                   np.min(np.abs(a[None, :] - b[:, None]), axis=1).max())
    else:
        d_ab = np.inf if len(a) != len(b) else 0.0

    # Prop-6.7-style identity via the exact reflection symmetry:
    # largest negative point of Spec(D) equals -rho_min(reflect(D))
    rmin_r = spec_r.rho_min if spec_r.rho_min is not None else \
        rho_min(reflect_mask(mask), bc=bc, seed=seed)
    neg = [r.real for r in spec_d.eigenvalues
           if r.real < 0 and abs(r.imag) <= _tol_real(mask, tol_res)]
    max_negative = max(neg) if neg else None
    identity_ok = None
    if max_negative is not None and rmin is not None:
        identity_ok = bool(abs(max_negative + rmin) <= 0.02 * rmin)
    return CheckReport("matsaev_probe", True, {
        "hausdorff": float(d_ab),
        "n_spec": len(a), "n_spec_reflected": len(b),
        "rho_min": rmin, "rho_min_reflected": rmin_r,
        "max_negative_real": max_negative,
        "neg_identity_within_2pct": identity_ok,
    })
