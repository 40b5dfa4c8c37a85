"""Fundamental solutions of L_rho on the whole torus, and torus potentials.

Normalization: every kernel here satisfies  L_rho E = (unit Dirac mass
at 0)  so that potentials invert the operator directly; with this
convention the Fourier synthesis reads

    E_rho(x, y) = (1/(2*pi*P)) * sum_{k,l} a_kl exp(i*kap_k*x + i*l*y),
    a_kl = [(rho + i*kap_k)^2 - l^2]^(-1),       kap_k = 2*pi*k/P,

(the raw coefficients a_kl, with a_00 = 1/rho^2, are exposed separately)
and the same function is reproduced, route-independently, by the lattice
sum of genus-p Weierstrass log-factors

    E_rho(z) = (1/(2*pi)) * sum_k H(e^{z+kP}, p) e^{-rho(x+kP)},
    H(u, p) = log|1-u| + Re(sum_{m<=p} u^m/m),     p = floor(rho).

The Fourier route performs the k-sum per mode l in closed form (it is a
periodized exponential) and truncates the l-sum by its exponential tail;
the Weierstrass route truncates the shift sum by its genus tails.  The
two evaluations share no code beyond the flagged singular-offset
placeholder, so their agreement off the singularity cross-checks the
symbol, the genus structure, and the normalization at once.

Kernels are sampled at lattice offsets (i*hx, j*hy); the singular offset
(0,0) carries a finite placeholder (regular part of the shift sum minus
log(c0*h), with the 5-point lattice constant c0 = 0.5615) so that grid
convolutions stay finite.  The placeholder cell is flagged in meta.

For integer rho = p the resonant modes (k,l) = (0,+-p) are zeroed (gauge
choice A = 0); the generalized kernel then satisfies

    L_p E'_p = delta_0 - cos(p*y)/(pi*P)      (p >= 1)
    L_0 E'_0 = delta_0 - 1/(2*pi*P)           (p == 0)

in this unit-Dirac normalization.  A third, grid-exact kernel inverts
the assembled five-point symbol itself; it pairs with residual measures
produced by assemble(), making the representation identity
v = potential(L_h v) hold to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, MassSymmetryViolated, NearIntegerRho
from .operators import assemble
from .torus import TWO_PI, Grid, GridField

__all__ = [
    "GridMeasure", "fourier_coefficient", "fundsol_fourier",
    "fundsol_weierstrass", "fundsol_generalized", "discrete_kernel",
    "potential", "representation_check", "RepresentationReport",
    "mass_symmetry_integrals",
]

LATTICE_C0 = 0.5615          # 5-point Green-function lattice constant
INTEGER_GUARD = 1e-3


@dataclass
class GridMeasure:
    """Signed measure on grid cells; masses already carry the cell area."""

    grid: Grid
    masses: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.shape != self.grid.shape:
            raise ConfigError("measure shape mismatch")

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.masses).sum())

    @classmethod
    def delta(cls, grid: Grid, j: int, i: int, mass: float = 1.0) -> "GridMeasure":
        m = np.zeros(grid.shape)
        m[j, i] = mass
        return cls(grid, m)


def _check_not_near_integer(rho: float):
    if abs(rho - round(rho)) < INTEGER_GUARD:
        raise NearIntegerRho(
            f"rho={rho} is within {INTEGER_GUARD} of an integer; "
            "use fundsol_generalized for integer rho")


def fourier_coefficient(rho: float, P: float, k, l):
    """Raw synthesis coefficient a_kl = [(rho+i*2*pi*k/P)^2 - l^2]^(-1)."""
    w = rho + 1j * TWO_PI * np.asarray(k, dtype=float) / P
    return 1.0 / (w * w - np.asarray(l, dtype=float) ** 2)


# ----------------------------------------------------------------------
# Fourier route: closed-form k-sums, truncated l-sum
# ----------------------------------------------------------------------

def _periodized_exp(c, xt, P):
    """sum_k e^{i*kap_k*x}/(c + i*kap_k) = P e^{-c*xt}/(1 - e^{-cP}),
    xt in (0, P), in overflow-safe form for either sign of c != 0."""
    c, xt = np.broadcast_arrays(np.asarray(c, float), np.asarray(xt, float))
    out = np.empty(c.shape)
    pos = c > 0
    out[pos] = P * np.exp(-c[pos] * xt[pos]) / (1.0 - np.exp(-c[pos] * P))
    b = -c[~pos]
    out[~pos] = -P * np.exp(-b * (P - xt[~pos])) / (1.0 - np.exp(-b * P))
    return out


def _periodized_exp_mid(c, P):
    """Midpoint value of the same series at xt = 0: (P/2) coth(c P/2).
    c == 0 entries return 0 (callers replace them by a gauge value)."""
    c = np.asarray(c, float)
    e = np.exp(-np.abs(c) * P)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sign(c) * (P / 2.0) * (1.0 + e) / (1.0 - e)
    return np.where(c == 0.0, 0.0, out)


def _r0_col(rho, xt, P):
    """sum_k e^{i*kap*x}/(rho + i*kap)^2; continuous across xt = 0."""
    if rho > 0:
        e = np.exp(-rho * P)
        return P * np.exp(-rho * xt) * (xt * (1.0 - e) + P * e) / (1.0 - e) ** 2
    # rho < 0: reuse with xt -> P - xt, rho -> -rho (series conjugation)
    e = np.exp(rho * P)
    xr = P - xt
    return P * np.exp(rho * xr) * (xr * (1.0 - e) + P * e) / (1.0 - e) ** 2


def _mode_sums(rho, xt: float, P, ls):
    """R_l(xt) = sum_k a_kl e^{i*kap*x} for positive modes l (vector)."""
    t1 = _periodized_exp(rho - ls, xt, P)
    t2 = _periodized_exp(rho + ls, xt, P)
    return (t1 - t2) / (2.0 * ls)


def _singular_column(rho, ys, P, p):
    """Column x = 0 (mod P): midpoint k-sums; the slow -P/(2l) tail of
    R_l(0) is resummed through sum cos(l y)/l = -log(2|sin(y/2)|)."""
    lmax = int(np.ceil(45.0 / P)) + abs(p) + 16
    ls = np.arange(1.0, lmax + 1.0)
    r_mid = (_periodized_exp_mid(rho - ls, P)
             - _periodized_exp_mid(rho + ls, P)) / (2.0 * ls)
    fast = r_mid + P / (2.0 * ls)
    total = (2.0 * np.cos(np.outer(ys, ls))) @ fast
    with np.errstate(divide="ignore"):
        total += P * np.log(2.0 * np.abs(np.sin(ys / 2.0)))
    total += _r0_col(rho, 0.0, P)
    return total / (TWO_PI * P)


def _flip_offsets(vals):
    """E_{-rho}(x, y) = E_rho(-x, -y) on the offset lattice."""
    out = np.empty_like(vals)
    out[:, :] = vals[::-1, ::-1]
    return np.roll(out, (1, 1), axis=(0, 1))


def fundsol_fourier(rho: float, grid: Grid, tol: float = 1e-9) -> GridField:
    """Fundamental solution by Fourier synthesis of the a_kl coefficients.

    Sampled at lattice offsets; the k-sum is closed-form per mode l and
    the l-sum stops once its exponential tail bound is below tol.
    """
    _check_not_near_integer(rho)
    if rho < 0:
        inner = fundsol_fourier(-rho, grid, tol)
        vals = _flip_offsets(inner.values)
        vals[0, 0] = inner.values[0, 0]
        meta = dict(inner.meta, rho=rho)
        return GridField(grid, vals, meta)
    P = grid.spec.P
    p = int(np.floor(rho))
    xs = np.arange(grid.nx) * grid.hx
    ys = np.arange(grid.ny) * grid.hy
    vals = np.zeros(grid.shape)
    logt = -np.log(tol) + 6.0
    for i in range(grid.nx):
        xt = xs[i]
        if i == 0:
            vals[:, 0] = _singular_column(rho, ys, P, p)
            continue
        rate = min(xt, P - xt)
        lmax = int(np.ceil(logt / rate)) + p + 8
        ls = np.arange(1.0, lmax + 1.0)
        r = _mode_sums(rho, xt, P, ls)
        col = _r0_col(rho, xt, P) + (2.0 * np.cos(np.outer(ys, ls))) @ r
        vals[:, i] = col / (TWO_PI * P)
    vals[0, 0] = _placeholder(rho, P, p, float(np.sqrt(grid.hx * grid.hy)))
    meta = {"kind": "fundsol_fourier", "rho": rho, "tol": tol,
            "singular_cell": (0, 0), "normalization": "unit_dirac",
            "sampling": "lattice_offsets"}
    return GridField(grid, vals, meta)


# ----------------------------------------------------------------------
# Weierstrass route: genus-p log factors over x-shifts
# ----------------------------------------------------------------------

def _weier_term(X, Y, p, rho, tail_terms: int = 60):
    """H(e^{X+iY}, p) e^{-rho X}, evaluated in three regimes.

    For X << 0 the log factor cancels the power-sum head to order
    |u|^{p+1}; there the term is computed from the tail series
    -sum_{m>p} e^{(m-rho)X} cos(mY)/m, which the e^{-rho X} weight
    cannot blow up.  Elsewhere the direct split form is stable.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    out = np.empty(np.broadcast(X, Y).shape)
    Xb, Yb = np.broadcast_arrays(X, Y)

    deep = Xb < -0.5
    if deep.any():
        xd, yd = Xb[deep], Yb[deep]
        acc = np.zeros_like(xd)
        for m in range(p + 1, p + 1 + tail_terms):
            acc -= np.exp((m - rho) * xd) * np.cos(m * yd) / m
        out[deep] = acc

    rest = ~deep
    if rest.any():
        xr, yr = Xb[rest], Yb[rest]
        pos = xr > 0.5
        ex = np.exp(np.where(pos, -xr, xr))
        logpart = 0.5 * np.log(
            np.maximum(1.0 - 2.0 * ex * np.cos(yr) + ex * ex, 1e-300))
        logpart = np.where(pos, xr + logpart, logpart)
        acc = logpart * np.exp(-rho * xr)
        for m in range(1, p + 1):
            acc += np.exp((m - rho) * xr) * np.cos(m * yr) / m
        out[rest] = acc
    return out


def _regular_part_at_origin(rho, P, p, kmax=400, tol=1e-15):
    """lim_{z->0} [2*pi*E_rho(z) - log|z|] via the shift sum."""
    reg = sum(1.0 / m for m in range(1, p + 1))
    for k in range(1, kmax + 1):
        t = 0.0
        for kk in (k, -k):
            t += float(_weier_term(kk * P, 0.0, p, rho))
        reg += t
        if abs(t) < tol:
            break
    return reg


def _placeholder(rho, P, p, h):
    return (_regular_part_at_origin(rho, P, p) + np.log(LATTICE_C0 * h)) / TWO_PI


def fundsol_weierstrass(rho: float, grid: Grid, tol: float = 1e-9,
                        kmax: int = 400) -> GridField:
    """Fundamental solution as the shift sum of genus-p log factors.

    Tails decay like e^{-(rho-p)kP} on the right and e^{-(p+1-rho)kP} on
    the left; shifts are added until both fall below tol/10.
    """
    _check_not_near_integer(rho)
    if rho < 0:
        inner = fundsol_weierstrass(-rho, grid, tol, kmax)
        vals = _flip_offsets(inner.values)
        vals[0, 0] = inner.values[0, 0]
        return GridField(grid, vals, dict(inner.meta, rho=rho))
    P = grid.spec.P
    p = int(np.floor(rho))
    xs = np.arange(grid.nx) * grid.hx
    ys = np.arange(grid.ny) * grid.hy
    X, Y = np.meshgrid(xs, ys)
    vals = _weier_term(X, Y, p, rho)
    vals[0, 0] = 0.0
    used = kmax
    for k in range(1, kmax + 1):
        tr = _weier_term(X + k * P, Y, p, rho)
        tl = _weier_term(X - k * P, Y, p, rho)
        vals += tr + tl
        if max(np.max(np.abs(tr)), np.max(np.abs(tl))) < tol / 10.0:
            used = k
            break
    else:
        raise ConfigError("weierstrass shift sum did not reach its tail bound")
    vals = vals / TWO_PI
    vals[0, 0] = _placeholder(rho, P, p, float(np.sqrt(grid.hx * grid.hy)))
    meta = {"kind": "fundsol_weierstrass", "rho": rho, "tol": tol,
            "shifts_used": used, "singular_cell": (0, 0),
            "normalization": "unit_dirac", "sampling": "lattice_offsets"}
    return GridField(grid, vals, meta)


# ----------------------------------------------------------------------
# integer rho: gauge-fixed generalized kernel
# ----------------------------------------------------------------------

def _bernoulli2(t):
    return t * t - t + 1.0 / 6.0


def fundsol_generalized(p: int, grid: Grid, tol: float = 1e-9) -> GridField:
    """Generalized kernel for integer rho = p >= 0, resonant modes zeroed."""
    p = int(p)
    if p < 0:
        raise ConfigError("generalized kernel takes p >= 0; reflect for p < 0")
    P = grid.spec.P
    rho = float(p)
    xs = np.arange(grid.nx) * grid.hx
    ys = np.arange(grid.ny) * grid.hy
    vals = np.zeros(grid.shape)
    logt = -np.log(tol) + 6.0

    def r0_of(xt):
        if p == 0:
            return -(P * P / 2.0) * _bernoulli2(xt / P)
        return _r0_col(rho, xt, P)

    def rp_gauge(xt, mid=False):
        # l = p mode with the singular k=0 term removed:
        # sum_{k!=0} e^{i kap x} / (i kap (2p + i kap))
        saw = 0.0 if mid else (P / 2.0 - xt)
        pe = (_periodized_exp_mid(2.0 * p, P) if mid
              else float(_periodized_exp(2.0 * p, xt, P)))
        return (saw - (pe - 1.0 / (2.0 * p))) / (2.0 * p)

    for i in range(grid.nx):
        xt = xs[i]
        if i == 0:
            lmax = int(np.ceil(45.0 / P)) + p + 16
            ls = np.arange(1.0, lmax + 1.0)
            r_mid = (_periodized_exp_mid(rho - ls, P)
                     - _periodized_exp_mid(rho + ls, P)) / (2.0 * ls)
            fast = r_mid + P / (2.0 * ls)
            if p >= 1:
                fast[p - 1] = rp_gauge(0.0, mid=True) + P / (2.0 * p)
            col = (2.0 * np.cos(np.outer(ys, ls))) @ fast
            with np.errstate(divide="ignore"):
                col += P * np.log(2.0 * np.abs(np.sin(ys / 2.0)))
            col += r0_of(0.0)
            vals[:, 0] = col / (TWO_PI * P)
            continue
        rate = min(xt, P - xt)
        lmax = max(int(np.ceil(logt / rate)) + p + 8, p + 8)
        ls = np.arange(1.0, lmax + 1.0)
        r = np.zeros(lmax)
        keep = ls != p
        if keep.any():
            r[keep] = _mode_sums(rho, xt, P, ls[keep])
        if p >= 1:
            r[p - 1] = rp_gauge(xt)
        col = r0_of(xt) + (2.0 * np.cos(np.outer(ys, ls))) @ r
        vals[:, i] = col / (TWO_PI * P)

    vals[0, 0] = (_regular_part_at_origin(rho, P, p)
                  + np.log(LATTICE_C0 * float(np.sqrt(grid.hx * grid.hy)))) / TWO_PI
    meta = {"kind": "fundsol_generalized", "p": p, "tol": tol,
            "singular_cell": (0, 0), "gauge": "resonant_modes_zeroed",
            "normalization": "unit_dirac", "sampling": "lattice_offsets"}
    return GridField(grid, vals, meta)


# ----------------------------------------------------------------------
# grid-exact kernel and potentials
# ----------------------------------------------------------------------

def discrete_kernel(rho: float, grid: Grid, generalized: bool = False) -> GridField:
    """Grid-exact kernel: inverse DFT of the reciprocal five-point symbol.

    assemble('l_rho') applied to it reproduces the discrete unit Dirac
    (density 1/cell_area at offset 0) exactly, minus the resonant plane
    waves when generalized=True.
    """
    hx, hy = grid.hx, grid.hy
    kx = TWO_PI * np.fft.fftfreq(grid.nx, d=hx)
    ly = TWO_PI * np.fft.fftfreq(grid.ny, d=hy)
    sym = ((2.0 * np.cos(kx * hx) - 2.0) / hx ** 2
           + 2j * rho * np.sin(kx * hx) / hx + rho * rho)[None, :] \
        + ((2.0 * np.cos(ly * hy) - 2.0) / hy ** 2)[:, None].astype(complex)
    live = np.ones(sym.shape, dtype=bool)
    if generalized:
        p = int(round(rho))
        if p == 0:
            live[0, 0] = False
        else:
            live[p % grid.ny, 0] = False
            live[(-p) % grid.ny, 0] = False
    if np.min(np.abs(sym[live])) < 1e-12:
        raise NearIntegerRho("discrete symbol vanishes; rho resonates with the grid")
    inv = np.zeros_like(sym)
    inv[live] = 1.0 / sym[live]
    vals = np.real(np.fft.ifft2(inv)) / (hx * hy)
    return GridField(grid, vals, {"kind": "discrete_kernel", "rho": rho,
                                  "generalized": generalized,
                                  "sampling": "lattice_offsets"})


def potential(measure: GridMeasure, kernel: GridField) -> GridField:
    """Torus potential: circular convolution of kernel samples against
    cell masses.  Linear; a unit delta reproduces a kernel translate."""
    if measure.grid.shape != kernel.grid.shape:
        raise ConfigError("measure and kernel grids differ")
    out = np.real(np.fft.ifft2(np.fft.fft2(kernel.values)
                               * np.fft.fft2(measure.masses)))
    return GridField(measure.grid, out, {"kind": "potential",
                                         "kernel": kernel.meta.get("kind")})


# ----------------------------------------------------------------------
# representation of subfunctions by potentials
# ----------------------------------------------------------------------

@dataclass
class RepresentationReport:
    rho: float
    integer_case: bool
    max_deviation: float
    mass_integrals: Optional[tuple]
    mass_tolerance: Optional[float]
    fitted_C: Optional[complex]
    passed: bool
    details: dict = field(default_factory=dict)


def mass_symmetry_integrals(measure: GridMeasure, p: int) -> tuple:
    """(integral e^{+ipy} dnu, integral e^{-ipy} dnu) by cell quadrature."""
    ys = measure.grid.y_centers()[:, None]
    plus = complex((np.exp(1j * p * ys) * measure.masses).sum())
    minus = complex((np.exp(-1j * p * ys) * measure.masses).sum())
    return plus, minus


def representation_check(v: GridField, rho: float,
                         measure: Optional[GridMeasure] = None,
                         tol: float = 1e-6) -> RepresentationReport:
    """Verify the whole-torus potential representation of a field.

    The residual measure nu = L_h v (cell masses) is recomputed with the
    assembled operator and the field rebuilt as the potential of nu
    against the grid-exact kernel; for integer rho the resonant plane
    wave is recovered by fitting C in Re(C e^{ipy}).  A measure passed
    explicitly for integer rho must carry no resonant Fourier mass, up
    to the O(h^2) symbol-defect quadrature tolerance, or
    MassSymmetryViolated is raised.
    """
    grid = v.grid
    p = int(round(rho))
    integer_case = abs(rho - p) < 1e-12
    area = grid.cell_area

    op = assemble(grid, "l_rho", rho=rho)
    nu = GridMeasure(grid,
                     (op.matrix @ v.values.ravel()).reshape(grid.shape) * area)

    details: dict = {}
    mass = None
    mass_tol = None
    if integer_case and p != 0:
        hy = grid.hy
        scale = float(np.max(np.abs(v.values))) + 1.0
        mass_tol = (p ** 4 * hy ** 2 / 6.0) * grid.spec.area * scale + 1e-9
        if measure is not None:
            mp, mm = mass_symmetry_integrals(measure, p)
            if max(abs(mp), abs(mm)) > mass_tol:
                raise MassSymmetryViolated(
                    f"resonant mass {max(abs(mp), abs(mm)):.3e} exceeds "
                    f"tolerance {mass_tol:.3e}")
        mass = mass_symmetry_integrals(nu, p)
        details["mass_integrals_of_residual"] = mass

    kern = discrete_kernel(float(p) if integer_case else rho, grid,
                           generalized=integer_case)
    recon = potential(nu, kern)

    C = None
    if integer_case:
        ys = grid.y_centers()[:, None] * np.ones((1, grid.nx))
        d = v.values - recon.values
        n = grid.ncells
        if p == 0:
            C = complex(d.mean())
            recon_full = recon.values + C.real
        else:
            a = 2.0 * float((d * np.cos(p * ys)).sum()) / n
            b = 2.0 * float((d * np.sin(p * ys)).sum()) / n
            # Re(C e^{ipy}) = Re(C) cos(py) - Im(C) sin(py)
            C = complex(a, -b)
            recon_full = recon.values + a * np.cos(p * ys) + b * np.sin(p * ys)
        dev = float(np.max(np.abs(v.values - recon_full)))
    else:
        dev = float(np.max(np.abs(v.values - recon.values)))

    return RepresentationReport(rho, integer_case, dev, mass, mass_tol, C,
                                bool(dev <= tol), details)
