"""Desk-scale acceptance suite: one check per headline property.

Each criterion returns a record with the measured quantity, the target,
the tolerance it was held to, and a pass flag; `run_all` executes them in
order and is used both by the command line (`twophase all`) and by the
test suite.  Tolerances are pinned here; a global scale factor can relax
or tighten all of them together for exploratory runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import elliptic as ell
from . import geometry as geo
from . import helicoid as hel
from . import kernel1d as k1
from . import parabolic as par
from . import wkb
from .medium import TwoPhaseMedium


@dataclass
class CriterionRecord:
    name: str
    passed: bool
    expected: str
    measured: str
    tolerance: str
    runtime: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"{mark}  {self.name}: measured {self.measured}, "
                f"expected {self.expected} (tol {self.tolerance}, "
                f"{self.runtime:.1f}s)")


def _medium14() -> TwoPhaseMedium:
    return TwoPhaseMedium(1.0, 4.0)


# ---------------------------------------------------------------------------

def criterion_interface_constant(scale: float = 1.0) -> CriterionRecord:
    """1d exact: u(0, t) equals the interface constant for all t."""
    tol = 1e-10 * scale
    t_values = np.geomspace(1e-3, 1e3, 13)
    worst = 0.0
    for pair in [(1.0, 4.0), (4.0, 1.0), (1.0, 1.0), (2.0, 3.0)]:
        med = TwoPhaseMedium(*pair)
        for t in t_values:
            worst = max(worst, abs(k1.halfline_solution(0.0, t, med) - med.k))
    return CriterionRecord(
        name="interface-constant-1d", passed=worst < tol,
        expected="0", measured=f"{worst:.3e}", tolerance=f"{tol:.1e}",
        runtime=0.0, details={"pairs": 4, "n_times": len(t_values)})


def criterion_kernel_mass(scale: float = 1.0) -> CriterionRecord:
    """Unit kernel mass and quadrature/closed-form agreement."""
    tol = 1e-10 * scale
    med = _medium14()
    rng = np.random.default_rng(2024)
    worst_mass = 0.0
    for _ in range(6):
        x1 = rng.uniform(-2.0, 2.0)
        t = 10.0 ** rng.uniform(-2, 1)
        lo, hi = -50.0 * math.sqrt(t * med.M) - 5 * abs(x1), \
            50.0 * math.sqrt(t * med.M) + 5 * abs(x1)
        from .quadrature import integrate_adaptive
        mass = integrate_adaptive(lambda y: k1.eval_kernel(x1, y, t, med),
                                  lo, 0.0) + \
            integrate_adaptive(lambda y: k1.eval_kernel(x1, y, t, med), 0.0, hi)
        worst_mass = max(worst_mass, abs(mass - 1.0))
    worst_pair = 0.0
    for x1 in np.linspace(-2.0, 2.0, 10):
        for t in np.geomspace(1e-2, 10.0, 10):
            a = k1.halfline_closed_form(x1, t, med)
            b = k1.halfline_quadrature(x1, t, med)
            worst_pair = max(worst_pair, abs(a - b))
    worst = max(worst_mass, worst_pair)
    return CriterionRecord(
        name="kernel-mass-two-way", passed=worst < tol,
        expected="0", measured=f"mass {worst_mass:.2e}, two-way {worst_pair:.2e}",
        tolerance=f"{tol:.1e}", runtime=0.0)


_CATALOG = None


def _surface_catalog():
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = {
            "plane": geo.Hyperplane(N=3),
            "sphere": geo.Sphere(R=1.0, N=3),
            "cylinder": geo.Cylinder(R=2.0, N=3),
            "helicoid": geo.Helicoid(),
            "catenoid": geo.Catenoid(c=1.0),
        }
    return _CATALOG


def criterion_wkb_identities(scale: float = 1.0) -> CriterionRecord:
    """Ray-table boundary values and the derivative identities for j <= 3."""
    tol = 1e-4 * scale
    rng = np.random.default_rng(7)
    worst = 0.0
    boundary_exact = True
    for name, surf in _surface_catalog().items():
        eng = wkb.coefficient_engine(surf, -1)
        table = wkb.compute_coefficients(surf, 0.0, 3, side=-1,
                                         taus=np.linspace(0.0, eng.delta0, 17),
                                         engine=eng)
        surface_row = table.at_surface()
        if not (surface_row[0] == 1.0 and np.all(surface_row[1:] == 0.0)):
            boundary_exact = False
        if surf.is_radial:
            samples = [(0.0, t) for t in (0.05, 0.15, 0.3)]
        else:
            samples = [(rng.uniform(-0.5, 0.5), rng.uniform(0.05, 0.3))
                       for _ in range(6)]
        for q, tau in samples:
            tau = tau * eng.delta0 / 0.4  # keep the fraction of the collar
            p = eng.ray_points(q, np.array([tau]))[0]
            for j in range(4):
                worst = max(worst, wkb.gradient_identity_residual(
                    surf, j, p, side=-1, h=1e-3, engine=eng))
    return CriterionRecord(
        name="wkb-identities", passed=boundary_exact and worst < tol,
        expected="surface row (1,0,...,0); residuals 0",
        measured=f"exact row {boundary_exact}, max residual {worst:.2e}",
        tolerance=f"{tol:.1e} at h=1e-3", runtime=0.0)


def criterion_near_boundary_law(scale: float = 1.0) -> CriterionRecord:
    """Lap A_0 -> -H_2 with the right distance exponent on minimal patches."""
    coef_tol = 0.02 * scale
    exp_tol = 0.1 * scale
    worst_rel = 0.0
    worst_exp = 0.0
    for name in ("helicoid", "catenoid"):
        surf = _surface_catalog()[name]
        fit = wkb.near_boundary_law(surf, 0.0, 0, 2, side=-1)
        worst_rel = max(worst_rel, abs(fit.measured_coefficient
                                       - fit.predicted_coefficient)
                        / abs(fit.predicted_coefficient))
        worst_exp = max(worst_exp, abs(fit.fitted_exponent
                                       - fit.expected_exponent))
    passed = worst_rel < coef_tol and worst_exp < exp_tol
    return CriterionRecord(
        name="near-boundary-law", passed=passed,
        expected="coefficient -H2, exponent p-2-s",
        measured=f"rel err {worst_rel:.2e}, exponent err {worst_exp:.2e}",
        tolerance=f"{coef_tol:.0%} / {exp_tol}", runtime=0.0)


def criterion_mean_curvature(scale: float = 1.0) -> CriterionRecord:
    """Summed-curvature extraction on plane, sphere, cylinder."""
    med = _medium14()
    abs_tol = 1e-8 * scale
    rel_tol = 0.01 * scale
    fits = {
        "plane": (ell.extract_mean_curvature(ell.RadialGeometry("plane"), med), 0.0),
        "sphere": (ell.extract_mean_curvature(
            ell.RadialGeometry("sphere", R=1.0, N=3), med), 2.0),
        "cylinder": (ell.extract_mean_curvature(
            ell.RadialGeometry("cylinder", R=2.0, N=3), med), 0.5),
    }
    ok = abs(fits["plane"][0].sum_kappa_estimate) < abs_tol
    rels = {}
    for name in ("sphere", "cylinder"):
        fit, target = fits[name]
        rels[name] = abs(fit.sum_kappa_estimate - target) / target
        ok = ok and rels[name] < rel_tol
    return CriterionRecord(
        name="mean-curvature-extraction", passed=ok,
        expected="0, 2, 0.5",
        measured=(f"plane {fits['plane'][0].sum_kappa_estimate:.1e}, "
                  f"sphere rel {rels['sphere']:.2e}, "
                  f"cylinder rel {rels['cylinder']:.2e}"),
        tolerance=f"plane {abs_tol:.0e}; others {rel_tol:.0%}", runtime=0.0)


def criterion_barrier_sandwich(scale: float = 1.0) -> CriterionRecord:
    """Order-1 barriers enclose the exact radial solution pointwise."""
    med = _medium14()
    lams = [1e3, 1e4, 1e5]
    ok = True
    detail = {}
    for name, g in (("sphere", ell.RadialGeometry("sphere", R=1.0, N=3)),
                    ("cylinder", ell.RadialGeometry("cylinder", R=2.0, N=3))):
        surf = _surface_catalog()[name]
        rep = ell.radial_barrier_sandwich(surf, g, med, lams, n=1)
        k = med.k
        for i, lam in enumerate(rep["lams"]):
            up, lo = rep["upper_margin"][i], rep["lower_margin"][i]
            wp0, wex0, wm0 = rep["surface_values"][i]
            dnp, dnex, dnm = rep["derivative_ordering"][i]
            ok = ok and up > 0.0 and lo > 0.0
            ok = ok and abs(wp0 - k) < 1e-12 and abs(wm0 - k) < 1e-12
            ok = ok and dnp <= dnex <= dnm
        detail[name] = {"upper": rep["upper_margin"], "lower": rep["lower_margin"]}
    return CriterionRecord(
        name="barrier-sandwich", passed=ok,
        expected="strict enclosure off the surface; equality at it",
        measured="margins positive" if ok else "ordering violated",
        tolerance="strict", runtime=0.0, details=detail)


def criterion_higher_order(scale: float = 1.0) -> CriterionRecord:
    """lambda^(-1/2) coefficient and the phase imbalance on minimal patches."""
    med = _medium14()
    tol = 0.10 * scale
    ok = True
    msgs = []
    for name in ("catenoid", "helicoid"):
        surf = _surface_catalog()[name]
        fits = ell.higher_order_fit(surf, med, p=2)
        for side in (-1, +1):
            f = fits[side]
            rel = abs(f.coefficient - f.predicted) / abs(f.predicted)
            ok = ok and rel < tol
            msgs.append(f"{name} side {side:+d} rel {rel:.2e}")
        ratio_rel = abs(fits["ratio"] - fits["predicted_ratio"]) / abs(
            fits["predicted_ratio"])
        ok = ok and ratio_rel < tol
        msgs.append(f"{name} ratio rel {ratio_rel:.2e}")
    return CriterionRecord(
        name="higher-order-coefficient", passed=ok,
        expected="k p! 2^-p sigma^(p/2) H_p per side; ratio (ss/sm)^(p/2)",
        measured="; ".join(msgs), tolerance=f"{tol:.0%}", runtime=0.0)


def criterion_grid_convergence(scale: float = 1.0) -> CriterionRecord:
    """2d disk transmission solve converges to the radial oracle."""
    med = _medium14()
    rep = ell.disk_convergence_study(med, lam=100.0)
    target = 0.9 / scale
    return CriterionRecord(
        name="grid-solver-convergence", passed=rep["observed_order"] >= target,
        expected=">= 0.9", measured=f"order {rep['observed_order']:.3f}, "
        f"errors {np.array2string(rep['errors'], precision=2)}",
        tolerance="order >= 0.9", runtime=0.0,
        details={"errors": rep["errors"].tolist()})


def criterion_helicoid_half(scale: float = 1.0, n_mc: int = 10 ** 6,
                            seed: int = 1234) -> CriterionRecord:
    """Monte-Carlo half-value and half-density identities on the helicoid."""
    ok = True
    msgs = []
    x0 = np.zeros(3)
    for i, t in enumerate((0.1, 1.0, 10.0)):
        est = hel.u_gaussian_mc(x0, t, n_mc, rng_seed=seed + i)
        ok = ok and est.within(0.5, sigmas=3.0 * scale)
        msgs.append(f"u(t={t}) {est.mean:.4f}")
    for i, r in enumerate((0.5, 1.0, 2.0)):
        cap = hel.sphere_cap_density(x0, r, n_mc, rng_seed=seed + 10 + i)
        ball = hel.ball_density(x0, r, n_mc, rng_seed=seed + 20 + i)
        ok = ok and cap.within(0.5, 3.0 * scale) and ball.within(0.5, 3.0 * scale)
        msgs.append(f"cap/ball(r={r}) {cap.mean:.4f}/{ball.mean:.4f}")
    sym = hel.symmetry_identities_check(10 ** 4, rng_seed=seed)
    sym_ok = (sym["screw_violations"] == 0 and sym["flip_violations"] == 0
              and sym["surface_coincidence_max"] < 1e-12)
    ok = ok and sym_ok
    msgs.append(f"symmetry violations {sym['screw_violations']}+{sym['flip_violations']}")
    return CriterionRecord(
        name="helicoid-half-value", passed=ok,
        expected="all 0.5 within 3 stderr; zero violations",
        measured="; ".join(msgs), tolerance="3 stderr / exact", runtime=0.0)


def criterion_max_principle(scale: float = 1.0) -> CriterionRecord:
    """Inverse positivity for lambda > 0; the annulus failure at lambda = 0."""
    rep = ell.discrete_max_principle_check(lam=10.0, trials=100, rng_seed=99)
    ce = ell.annulus_counterexample()
    tol = 1e-10 * scale
    ok = rep["min_value"] >= -tol and ce["min_interior"] < -0.4
    return CriterionRecord(
        name="maximum-principle", passed=ok,
        expected=f"min >= -{tol:.0e}; counterexample interior < -0.4",
        measured=(f"min {rep['min_value']:.2e}; "
                  f"counterexample {ce['min_interior']:.3f}"),
        tolerance=f"{tol:.0e} / -0.4", runtime=0.0,
        details={"positivity": rep, "counterexample": ce})


def criterion_rigidity_probe(scale: float = 1.0) -> CriterionRecord:
    """Flat interfaces hold the constant; a sphere interface drifts."""
    med = _medium14()
    plane = par.interface_constancy_probe("plane", med,
                                          np.geomspace(1e-2, 1.0, 9))
    sphere = par.interface_constancy_probe("sphere", med,
                                           np.geomspace(1e-3, 1.0, 10))
    flat_tol = 1e-6 * scale
    drift_floor = 1e-2 / scale
    stable = sphere["richardson_gap"] < 0.1 * sphere["max_deviation"]
    ok = (plane["max_deviation"] < flat_tol
          and sphere["max_deviation"] > drift_floor and stable)
    return CriterionRecord(
        name="rigidity-probe", passed=ok,
        expected=f"plane < {flat_tol:.0e}; sphere > {drift_floor:.0e} (stable)",
        measured=(f"plane {plane['max_deviation']:.2e}; sphere "
                  f"{sphere['max_deviation']:.2e} "
                  f"(gap {sphere['richardson_gap']:.1e})"),
        tolerance="as stated", runtime=0.0)


CRITERIA = [
    ("interface-constant-1d", criterion_interface_constant),
    ("kernel-mass-two-way", criterion_kernel_mass),
    ("wkb-identities", criterion_wkb_identities),
    ("near-boundary-law", criterion_near_boundary_law),
    ("mean-curvature-extraction", criterion_mean_curvature),
    ("barrier-sandwich", criterion_barrier_sandwich),
    ("higher-order-coefficient", criterion_higher_order),
    ("grid-solver-convergence", criterion_grid_convergence),
    ("helicoid-half-value", criterion_helicoid_half),
    ("maximum-principle", criterion_max_principle),
    ("rigidity-probe", criterion_rigidity_probe),
]


def run_all(names=None, tolerance_scale: float = 1.0,
            verbose: bool = True) -> list[CriterionRecord]:
    records = []
    for name, fn in CRITERIA:
        if names is not None and name not in names:
            continue
        t0 = time.perf_counter()
        rec = fn(tolerance_scale)
        rec.runtime = time.perf_counter() - t0
        records.append(rec)
        if verbose:
            print(rec.line(), flush=True)
    return records
