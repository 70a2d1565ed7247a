"""Radial norms, the convergence-rate exponents of the main estimate, and rate fits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .ansatz import ScaledCoords, lambda_sum, piece_residual, piece_state, residual
from .errors import DegenerateFit, GridMismatch

KINDS = ("Lp", "Linf", "H1", "H1w")
REGIONS = ("all", "D0", "D1", "D2")


@dataclass(frozen=True)
class NormSpec:
    kind: str = "Lp"
    p: float = 2.0
    region: str = "all"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")
        if self.kind == "Lp" and not (2 <= self.p < math.inf):
            raise ValueError("p must lie in [2, inf) for Lp; use Linf for the sup norm")

    @property
    def label(self) -> str:
        if self.kind == "Lp":
            return "L2" if self.p == 2 else f"L{self.p:g}"
        return self.kind

    @property
    def exponent_p(self) -> float:
        return math.inf if self.kind == "Linf" else self.p


def _integrate(f, r, d, mask):
    area = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[d]
    w = area * r ** (d - 1)
    g = np.where(mask, f * w, 0.0)
    return float(np.trapezoid(g, r))


def norm(field, grid, d, spec: NormSpec = NormSpec(), coords=None):
    """Norm of a radial field with measure |S^(d-1)| r^(d-1) dr.

    ``coords`` (a ScaledCoords) is needed for region restrictions and for the
    weight max(1, min(|y1|, |y2|)) of H1w. Derivatives use central differences.
    """
    f = np.asarray(field, dtype=float)
    r = np.asarray(grid, dtype=float)
    if f.shape != r.shape:
        raise ValueError("field and grid differ in length")
    if spec.region == "all":
        mask = np.ones(r.shape, dtype=bool)
    else:
        if coords is None:
            raise ValueError("region-restricted norms need coordinates")
        mask = coords.region(r, spec.region)
    if spec.kind == "Linf":
        return float(np.max(np.abs(f[mask]))) if np.any(mask) else 0.0
    if spec.kind == "Lp":
        return _integrate(np.abs(f) ** spec.p, r, d, mask) ** (1.0 / spec.p)
    g = np.gradient(f, r, edge_order=2)
    if spec.kind == "H1":
        return math.sqrt(_integrate(f**2 + g**2, r, d, mask))
    if coords is None:
        raise ValueError("the weighted norm needs coordinates")
    wt = np.maximum(1.0, np.minimum(np.abs(coords.y1(r)), np.abs(coords.y2(r))))
    return math.sqrt(_integrate(g**2 + wt * f**2, r, d, mask))


def predicted_exponent(M0, N0, L0, beta, p, component, E="Lp", delta=0.05):
    """Convergence exponent gamma_j(E) of the main estimate.

    ``p`` may be math.inf (sup norm); it is ignored for E = 'H1'.
    Returns the minimum over the region contributions.
    """
    return min(exponent_terms(M0, N0, L0, beta, p, component, E, delta))


def exponent_terms(M0, N0, L0, beta, p, component, E="Lp", delta=0.05):
    """The arguments of the minimum: D0 term, D1 term and (component 2) D2 term."""
    if not 0 < beta < 2.0 / 3.0:
        raise ValueError("beta must lie in (0, 2/3)")
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    if min(M0, N0, L0) < 0:
        raise ValueError("orders must be nonnegative")
    b = beta
    if E in ("Lp", "Linf"):
        if E == "Linf":
            p = math.inf
        if not p >= 2:
            raise ValueError("p must lie in [2, inf]")
        ip = 0.0 if math.isinf(p) else 1.0 / p
        if component == 1:
            d0 = (2 - 3 * b) * M0 + 2 - 2.5 * b + b * ip
            if N0 == 0:
                d1 = 1 + 2 * ip / 3
            elif N0 == 1:
                d1 = 2 - delta if p == 2 else 5.0 / 3.0 + 2 * ip / 3
            else:
                d1 = b * N0 + 2 - 1.5 * b + b * ip
            return (d0, d1)
        d0 = (2 - 3 * b) * M0 + 2 - 2 * b + b * ip
        d1 = 4.0 / 3.0 + 2 * ip / 3 if N0 == 0 else b * N0 + 2 - b + b * ip
        d2 = 2 * L0 / 3 + 1 + 2 * ip / 3
        return (d0, d1, d2)
    if E == "H1":
        if component == 1:
            d0 = (2 - 3 * b) * (M0 + 1)
            if N0 == 0:
                d1 = 2.0 / 3.0
            elif N0 == 1:
                d1 = 4.0 / 3.0
            elif N0 == 2:
                d1 = 2 - delta
            else:
                d1 = b * (N0 - 2) + 2
            return (d0, d1)
        d0 = (2 - 3 * b) * (M0 + 1) + b / 2
        if N0 == 0:
            d1 = 1.0
        elif N0 == 1:
            d1 = 5.0 / 3.0
        else:
            d1 = b * (N0 - 1.5) + 2
        d2 = 2 * L0 / 3 + 2.0 / 3.0
        return (d0, d1, d2)
    raise ValueError(f"unknown space {E!r}")


def fit_rate(pairs):
    """Least-squares slope of log(error) against log(eps) and its R^2."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (eps, error) pairs")
    eps = np.array([a for a, _ in pairs], dtype=float)
    err = np.array([b for _, b in pairs], dtype=float)
    if np.any(err <= 0) or np.any(eps <= 0):
        raise DegenerateFit("errors and eps must be positive")
    if len(np.unique(eps)) != len(eps):
        raise DegenerateFit("eps values collide")
    x, y = np.log(eps), np.log(err)
    slope, icpt = np.polyfit(x, y, 1)
    ss = float(np.sum((y - y.mean()) ** 2))
    res = float(np.sum((y - (slope * x + icpt)) ** 2))
    r2 = 1.0 if ss == 0.0 else 1.0 - res / ss
    return float(slope), float(r2)


@dataclass(frozen=True)
class RateReport:
    norm: NormSpec
    component: int
    pairs: tuple
    slope: float
    r_squared: float
    predicted: float
    tol: float = 0.2
    min_r2: float = 0.99

    @property
    def verdict(self) -> str:
        """'pass' inside the tolerance band, 'flag' above it (faster than the bound), else 'fail'.

        With an infinite prediction the data must look superpolynomial to be flagged.
        """
        if math.isinf(self.predicted):
            return "flag" if is_superpolynomial(self.pairs) else "fail"
        if self.r_squared >= self.min_r2 and abs(self.slope - self.predicted) <= self.tol:
            return "pass"
        if self.r_squared >= self.min_r2 and self.slope > self.predicted + self.tol:
            return "flag"
        return "fail"

    def row(self):
        return (
            f"{self.norm.label}_eta{self.component}",
            self.norm.region,
            f"{self.slope:.6f}",
            f"{self.r_squared:.6f}",
            f"{self.predicted:.6f}",
            self.verdict,
        )


def rate_report(spec: NormSpec, component, pairs, predicted, tol=0.2, min_r2=0.99):
    slope, r2 = fit_rate(pairs)
    return RateReport(spec, component, tuple(pairs), slope, r2, predicted, tol, min_r2)


def write_reports(path, reports):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("norm", "region", "slope", "r2", "predicted", "verdict"))
        for rep in reports:
            w.writerow(rep.row())


# ---- pipelines shared by the CLI and the acceptance harness ----

COMPONENT_REGIONS = {1: ("D0", "D1"), 2: ("D0", "D1", "D2")}


def region_exponent(M0, N0, L0, beta, spec: NormSpec, component, delta=0.05):
    """Predicted exponent for a region-restricted norm; inf if no power bound applies.

    Component 1 is exponentially small on D2, so its D2 error has no finite
    exponent (it decays faster than any power).
    """
    E = "H1" if spec.kind in ("H1", "H1w") else spec.kind
    terms = exponent_terms(M0, N0, L0, beta, spec.exponent_p, component, E, delta)
    if spec.region == "all":
        return min(terms)
    names = COMPONENT_REGIONS[component]
    if spec.region not in names:
        return math.inf
    return terms[names.index(spec.region)]


def approximation_errors(p, eps, beta, direct, approx, specs):
    """Norms of eta_j - eta_japp for each NormSpec; returns {(spec, j): value}."""
    if len(direct.grid) != len(approx.grid) or np.any(direct.grid != approx.grid):
        raise GridMismatch("direct and approximate states live on different grids")
    c = ScaledCoords(p, eps, beta)
    out = {}
    for j, (a, b) in enumerate(((direct.eta1, approx.eta1), (direct.eta2, approx.eta2)), start=1):
        e = np.asarray(a) - np.asarray(b)
        for s in specs:
            out[(s, j)] = norm(e, direct.grid, p.d, s, c)
    return out


def local_slopes(pairs):
    eps = np.log([a for a, _ in pairs])
    err = np.log([b for _, b in pairs])
    return np.diff(err) / np.diff(eps)


def is_superpolynomial(pairs, margin=0.0):
    """Successive log-log slopes grow as eps decreases (faster than any fixed power)."""
    s = local_slopes(sorted(pairs, reverse=True))
    return bool(len(s) >= 2 and np.all(np.diff(s) > margin))


def residual_order_pairs(p, eps_list, beta, piece, order, hierarchy, region, component,
                         points_per_layer=200, r_max=None, exact=True):
    """(eps, max |res_j|) over a region for one truncated piece on its own.

    piece, order and hierarchy are as in ansatz.piece_state. With ``exact``
    the derivatives come from the tabulated jets; otherwise the three-point
    Laplacian of the sampled piece is used and the end nodes of the
    restricted grid are dropped, since the stencil there reaches outside the
    region.
    """
    r_max = 1.2 * p.R2 + 1.0 if r_max is None else r_max
    pairs = []
    for eps in eps_list:
        c = ScaledCoords(p, eps, beta)
        h = c.layer / points_per_layer
        r = np.arange(0.0, r_max, h)
        rr = r[c.region(r, region)]
        if exact:
            res = piece_residual(p, eps, piece, order, hierarchy, rr)[component - 1]
        else:
            st = piece_state(p, eps, piece, order, hierarchy, rr)
            res = residual(p, eps, st)[component - 1][1:-1]
        pairs.append((float(eps), float(np.max(np.abs(res)))))
    return pairs


def overlap_mismatch(p, hier, eps, beta, M, N, L, n_points=200001):
    """Sup-norm mismatch of adjacent expansions on the two overlap bands.

    Returns (|omega - eps^(1/3) nu| on D0 and D1, |lambda-sum^(1/2) - eps^(1/3) mu| on D1 and D2),
    the sums truncated at M, N and L. A nonpositive lambda sum contributes its
    positive part, as in the glued approximation.
    """
    c = ScaledCoords(p, eps, beta)
    r = np.linspace(0.0, 1.1 * p.R2, n_points)
    e13 = eps ** (1.0 / 3.0)
    m = c.region(r, "D01")
    z = c.z(r[m])
    a = np.abs(hier.outer.omega_sum(z, eps, M) - e13 * hier.inner.nu_sum(z / c.layer, eps, N))
    m = c.region(r, "D12")
    z = c.z(r[m])
    lam = lambda_sum(hier.inner, z / c.layer, eps, N)
    y2 = c.y2(r[m])
    mu = e13 * sum(c.layer**n * hier.mu[n].evaluate(y2) for n in range(L + 1))
    b = np.abs(np.sqrt(np.maximum(lam, 0.0)) - mu)
    return float(a.max()), float(b.max())


DEFAULT_SPECS = (NormSpec("Lp", 2.0), NormSpec("Linf"), NormSpec("H1"))


def rate_study(p, eps_list, beta, orders, directs, hier, specs=DEFAULT_SPECS, tol=0.2, delta=0.05):
    """RateReports comparing direct solves with the glued approximation.

    ``directs`` are ground states at the eps values, ``hier`` a Hierarchies
    object covering ``orders`` = (M0, N0, L0). Returns (reports, table) with
    table[k] the errors at eps_list[k] keyed by (spec, component).
    """
    M0, N0, L0 = orders
    table = []
    for eps, gs in zip(eps_list, directs):
        app = hier.assemble(p, eps, beta, M0, N0, L0, gs.grid)
        table.append(approximation_errors(p, eps, beta, gs, app, specs))
    reports = []
    for s in specs:
        for j in (1, 2):
            pairs = [(float(e), row[(s, j)]) for e, row in zip(eps_list, table)]
            pred = region_exponent(M0, N0, L0, beta, s, j, delta)
            reports.append(rate_report(s, j, pairs, pred, tol))
    return reports, table
