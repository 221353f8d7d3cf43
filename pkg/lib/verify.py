"""Reproduces the worked examples as numerical checks.

Each check records its residual and threshold. Checks with asserted=False are reported
only and never fail the run.
"""

from dataclasses import asdict, dataclass
from time import monotonic

import numpy as np

import scan_config as sc
from lib import calculus as calc
from lib import differential as diff
from lib import gallery
from lib import io_
from lib import quaternions as qt
from lib import scanners as scan
from lib import slicefn as sf

console = io_.console


@dataclass
class Check:
    name: str
    residual: float
    threshold: float
    asserted: bool = True
    detail: str = ""

    @property
    def passed(self):
        return bool(self.residual < self.threshold)

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _max_norm(values):
    return float(np.max(qt.norm(values)))


def _samples(rng, n, domain):
    alpha, beta = domain.random_coords(rng, n)
    units = qt.random_units(rng, n)
    return alpha, beta, units, qt.from_slice_coords(alpha, beta, units)


def _slice_constant_checks(rng, n):
    g = gallery.slice_constant_example()
    alpha, beta, units, x = _samples(rng, n, g.domain)
    minus_i = np.broadcast_to(-qt.I, units.shape)
    grid = scan.GridSpec(16, 16)
    records = scan.scan_zeros(g, grid)
    off_minus_i = max((float(qt.norm(rec.unit + qt.I)) for rec in records if rec.unit is not None), default=1.0)
    wrong_kind = sum(rec.kind != "s_isolated" for rec in records)
    missing = grid.alpha_steps * grid.beta_steps - len(records)
    return [
        Check("slice-constant: f = 1 - Ii", _max_norm(g(x) - (qt.ONE - qt.quat_mul(units, qt.I))), 1e-12),
        Check("slice-constant: f = 0 on C_-i+", _max_norm(g.at(alpha, beta, minus_i)), 1e-12),
        Check("slice-constant: df/dx = 0", _max_norm(calc.slice_derivative(g, x)), 1e-9),
        Check("slice-constant: N(f) = 0", float(np.abs(sf.normal(g).stem.coeffs).max()), 1e-12),
        Check("slice-constant: V(f) = C_-i+ by scan_zeros", max(off_minus_i, float(wrong_kind + abs(missing))), 1e-9,
              detail=f"{len(records)} records"),
    ]


def _product_checks(h, rng, n):
    alpha, beta, units, x = _samples(rng, n, h.domain)
    minus_i = np.broadcast_to(-qt.I, units.shape)
    checks = [
        Check("h(-j) = 0", float(qt.norm(h(-qt.J))), 1e-12),
        Check("h = 2j on C_-i+", _max_norm(h.at(alpha, beta, minus_i) - 2.0 * qt.J), 1e-10),
        Check("h closed form", _max_norm(h(x) - gallery.product_closed_form(alpha, beta, units)), 1e-10),
        Check("dh/dx = 1 - Ii", _max_norm(calc.slice_derivative(h, x) - gallery.product_slice_derivative(units)), 1e-9),
        Check("d_s h = 1 - (alpha/beta)i + k/beta",
              _max_norm(calc.spherical_derivative(h, x) - gallery.product_spherical_derivative(alpha, beta)), 1e-9),
        Check("dh/dx^c = 0", _max_norm(calc.conj_slice_derivative(h, x)), 1e-9),
    ]

    grid = scan.GridSpec()
    records = [r for r in scan.scan_zeros(h, grid) if r.unit is not None]
    z = np.array([r.z for r in records]) if records else np.zeros(0, dtype=complex)
    units_found = np.array([r.unit for r in records]).reshape(-1, 4)
    deviation = _max_norm(units_found - gallery.product_zero_unit(z.real, z.imag)) if records else 1.0
    # one surface member per node sphere
    missing = grid.alpha_steps * grid.beta_steps - sum(r.kind == "s_isolated" and r.on_surface for r in records)
    checks.append(Check("S_h recovered by scan_zeros", max(deviation, float(abs(missing))), 1e-5,
                        detail=f"{len(records)} records"))
    at_i = [r for r in records if abs(r.z - 1j) < 1e-12]
    checks.append(Check("S_h(i) = -j", _max_norm(at_i[0].unit + qt.J) if at_i else 1.0, 1e-9))

    checks.append(_singular_set_check(h))

    surfaces = scan.constant_surface_extract(h, 2.0 * qt.J, scan.GridSpec(*sc.VERIFY_SINGULAR_GRID))
    flagged = min((float(qt.norm(u + qt.I)) for u in surfaces.semislices), default=1.0)
    checks.append(Check("h = 2j semislice flagged at -i", flagged, 1e-9,
                        detail=f"{len(surfaces.semislices)} semislice(s)"))
    checks.append(Check("degenerate set of h is empty", float(len(scan.degenerate_scan(h))), 0.5))
    return checks


def _singular_set_check(h):
    """Every singular hit lies on C_-i+ or S_h and every node sphere carries both."""
    grid = scan.GridSpec(*sc.VERIFY_SINGULAR_GRID)
    cloud = scan.singular_scan(h, grid)
    frame = cloud.frame.dropna(subset=["ux", "uy", "uz"])
    units = np.concatenate([np.zeros((len(frame), 1)), frame[["ux", "uy", "uz"]].to_numpy()], axis=1)
    sh = gallery.product_zero_unit(frame["alpha"].to_numpy(), frame["beta"].to_numpy())
    to_plane = qt.norm(units + qt.I)
    to_surface = qt.norm(units - sh)
    deviation = float(np.max(np.minimum(to_plane, to_surface), initial=0.0))
    frame = frame.assign(plane=to_plane < 1e-5, surface=to_surface < 1e-5)
    covered = frame.groupby(["alpha", "beta"])[["plane", "surface"]].any()
    nodes = grid.alpha_steps * grid.beta_steps
    missed = nodes - int((covered["plane"] & covered["surface"]).sum())
    return Check("singular set of h = C_-i+ and S_h", max(deviation, float(missed)), 1e-5,
                 detail=f"{len(cloud)} hits, {missed} node spheres missed")


def _identity_checks(h, rng, n):
    checks = []
    for f in (gallery.square(), gallery.cubic_plus_xk(), h, gallery.injective_example()):
        _, _, _, x = _samples(rng, n, f.domain)
        residual = float(np.max(calc.mixed_derivative_identity_residual(f, x)))
        checks.append(Check(f"df/dx = 2Im(x) d/dx d_s f + d_s f for {f.name}", residual, 1e-7))
    return checks


def _expansion_checks(rng):
    sq = gallery.square()
    e = calc.expansion_coefficients(sq, qt.I, 5)
    expected = np.zeros((6, 4))
    expected[0, 0], expected[2, 0] = -1.0, 1.0
    checks = [Check("expansion of x^2 at i = (-1, 0, 1)", _max_norm(e.coeffs - expected), 1e-12)]

    f = gallery.random_polynomial(rng, 3)
    y = qt.from_slice_coords(rng.uniform(-1, 1), rng.uniform(0.5, 1.5), qt.random_units(rng, 1)[0])
    rel = calc.coefficient_relations(f, y)
    checks.append(Check("s_0 = f(y), s_1 = d_s f(y), s_1 + 2Im(y)s_2 = df/dx(y)",
                        max(rel["value"], rel["spherical"], rel["slice"]), 1e-9))
    checks.append(Check("s_2 = (d/dx d_s f)(y)", rel["mixed"], 1e-7))
    display = calc.coefficient_relations(sq, qt.I)["display"]
    checks.append(Check("closed-form s_2 display on x^2 at i", display, 1e-9, asserted=False,
                        detail="display value differs from the division value; reported only"))
    return checks


def _injective_checks(rng, n):
    f = gallery.injective_example()
    on_minus_j = lambda x: qt.norm(qt.slice_split(x)[2] + qt.J) < 1e-6
    report = scan.injectivity_sample(f, f.domain, sc.VERIFY_INJECTIVITY_SAMPLES, int(rng.integers(2 ** 31)), exclude=on_minus_j)
    alpha, beta, units, x = _samples(rng, sc.VERIFY_INJECTIVITY_SAMPLES, f.domain)
    keep = ~on_minus_j(x)
    alpha, beta, units, x = alpha[keep], beta[keep], units[keep], x[keep]
    singular = int(np.sum(diff.singular_mask(f, x)))
    small = int(np.sum(qt.norm(calc.slice_derivative(f, x)) <= 1e-9))
    occupancy = scan.occupancy_statistics(f, scan.GridSpec(*sc.VERIFY_SINGULAR_GRID))
    return [
        Check("x(1-IJ): no image collisions off C_-J+", float(report.collisions), 0.5,
              detail=f"min image separation {report.min_image_separation:.3g}"),
        Check("x(1-IJ): nonsingular off C_-J+", float(singular), 0.5),
        Check("x(1-IJ): df/dx never vanishes", float(small), 0.5),
        Check("x(1-IJ): no grid cell with 8 singular corners", float(occupancy["full_cells"]), 0.5,
              detail=f"{occupancy['singular_points']} singular grid points"),
        Check("x(1-IJ): d_s f = (beta - alpha J)/beta",
              _max_norm(calc.spherical_derivative(f, x) - gallery.injective_spherical_derivative(alpha, beta)), 1e-10),
    ]


def _relative(value, expected):
    return _max_norm(value - expected) / max(1.0, _max_norm(expected))


def _base_gap(bases, others):
    """Largest distance from a sphere base in `bases` to the nearest base in `others`."""
    if len(bases) == 0:
        return 0.0
    if len(others) == 0:
        return 1.0
    return float(np.abs(np.subtract.outer(np.asarray(bases), np.asarray(others))).min(axis=1).max())


def _structure_checks(h, rng, n):
    f = gallery.factored_quadratic()
    g = gallery.random_polynomial(rng, 2)
    r = sf.polynomial([0.3 * qt.ONE, -0.5 * qt.ONE, qt.ONE], name="real r")
    fg = sf.slice_product(f, g)
    grid = scan.GridSpec(16, 16)

    zeros_f = scan.scan_zeros(f, grid)
    zeros_nf = scan.scan_zeros(sf.normal(f), grid)
    zeros_fg = scan.scan_zeros(fg, grid)
    bases_f = [rec.z for rec in zeros_f]
    bases_nf = [rec.z for rec in zeros_nf]
    not_spheres = sum(rec.kind not in ("spherical", "real") for rec in zeros_nf)
    normal_gap = max(_base_gap(bases_f, bases_nf), _base_gap(bases_nf, bases_f), float(not_spheres))
    at_zeros = max((float(qt.norm(fg(rec.point))) for rec in zeros_f), default=0.0)
    product_gap = max(_base_gap(bases_f, [rec.z for rec in zeros_fg]), at_zeros)

    alpha, beta, units, x = _samples(rng, n, f.domain)
    rebuilt_gap = 0.0
    for a, b in zip(np.array_split(alpha, 10), np.array_split(beta, 10)):
        I, J, K = qt.random_units(rng, 3)
        rebuilt = sf.representation_reconstruct(fg.at(a, b, J), fg.at(a, b, K), J, K, I)
        rebuilt_gap = max(rebuilt_gap, _relative(rebuilt, fg.at(a, b, I)))
    flipped_gap = max(_relative(fg.at(alpha, -beta, -units), fg(x)), _relative(h.at(alpha, -beta, -units), h(x)))

    x0 = x[0]
    a0, b0, J0 = qt.slice_split(x0)
    sphere = qt.random_units(rng, n)
    sphere = sphere[qt.norm(sphere + J0) > 1e-3]
    p = qt.stereographic_project(qt.from_slice_coords(a0, b0, sphere), x0)
    off_plane = np.maximum(np.abs(p[:, 0]), np.abs(qt.scalar_product(p, J0))) / (1.0 + qt.norm(p))

    detail = f"{n} points"
    return [
        Check("V(f) scanned with its spheres", float(abs(len(zeros_f) - 2)), 0.5, detail=f"{len(zeros_f)} records"),
        Check("V(N(f)) = union of the spheres over V(f)", normal_gap, 1e-6,
              detail=f"{len(bases_f)} vs {len(bases_nf)} spheres"),
        Check("V(f) contained in V(f*g)", product_gap, 1e-6, detail=f"{len(zeros_fg)} zero records of f*g"),
        Check("representation formula", rebuilt_gap, 1e-9, detail=detail),
        Check("f(alpha - I beta) well defined under (alpha, -beta, -I)", flipped_gap, 1e-12, detail=detail),
        Check("N(f*g) = N(f)N(g)", _relative(sf.normal(fg)(x), qt.quat_mul(sf.normal(f)(x), sf.normal(g)(x))), 1e-10,
              detail=detail),
        Check("(f*g)^c = g^c * f^c",
              _relative(sf.conjugate(fg)(x), sf.slice_product(sf.conjugate(g), sf.conjugate(f))(x)), 1e-10, detail=detail),
        Check("d_s d_s f = 0", _max_norm(calc.spherical_derivative(calc.spherical_derivative_function(fg), x)), 1e-9,
              detail=detail),
        Check("(r*g)(x) = r(x)g(x) for real r", _relative(sf.slice_product(r, g)(x), qt.quat_mul(r(x), g(x))), 1e-10,
              detail=detail),
        Check("stereographic image lies in C_J^perp", float(np.max(off_plane)), 1e-12,
              detail=f"{len(sphere)} sphere points"),
    ]


def _differential_checks(h, rng, n):
    checks = []
    for f in (h, gallery.injective_example(), gallery.cubic_plus_xk(), gallery.square()):
        _, _, _, x = _samples(rng, n, f.domain)
        sweep = diff.differential_sweep(f, x, qt.random_quaternions(rng, n))
        detail = f"{sweep.samples} points"
        checks.extend([
            Check(f"{f.name}: differential matches central differences", sweep.matrix_gap, 1e-5, detail=detail),
            Check(f"{f.name}: rank class agrees with the SVD rank", float(sweep.rank_disagreements), 0.5, detail=detail),
            Check(f"{f.name}: directional derivative formula", sweep.directional_gap, 1e-5, detail=detail),
        ])
    return checks


def _inverse_map_check(h, rng, count=100):
    worst, misses, done = 0.0, 0, 0
    while done < count:
        _, _, _, x = _samples(rng, 1, h.domain)
        x = x[0]
        q = h(x)
        if qt.norm(q) < 1e-3 or qt.norm(q - 2.0 * qt.J) < 1e-3 or q[0] ** 2 + q[1] ** 2 < 1e-6:
            continue
        done += 1
        back = scan.inverse_map_final_example(q)
        if back is None:
            misses += 1
        else:
            worst = max(worst, float(qt.norm(back - x)))
    return Check("inverse map round trip", max(worst, float(misses)), 1e-7, detail=f"{misses} misses")


def _multiplicity_checks():
    f = gallery.injective_example()
    tilted = -qt.J + 0.01 * qt.I
    unit = qt.imaginary_unit(tilted / qt.norm(tilted))
    x1 = qt.from_slice_coords(0.01, 1.0, unit)
    near = scan.multiplicity_near_sphere(sf.subtract_constant(f, f(x1)), -qt.J, 0.1)
    delta_i = gallery.characteristic(qt.I)
    return [
        Check("total multiplicity of Delta_i at i = 2", float(abs(scan.total_multiplicity(delta_i, qt.I) - 2)), 0.5),
        Check("f - f(x1) has multiplicity 1 near the sphere of -J", float(abs(near - 1)), 0.5),
        Check("x^2 singular at i by multiplicity", 0.0 if scan.singular_by_multiplicity(gallery.square(), qt.I) else 1.0, 0.5),
    ]


def verify_examples(h=None, seed=0, samples=sc.VERIFY_SAMPLES):
    """Run every worked-example check; `h` replaces the product example (sensitivity runs)."""
    h = gallery.product_example() if h is None else h
    rng = np.random.default_rng(seed)
    groups = [
        ("slice-constant example", lambda: _slice_constant_checks(rng, samples)),
        ("product example h", lambda: _product_checks(h, rng, samples)),
        ("derivative identity", lambda: _identity_checks(h, rng, samples)),
        ("real differential", lambda: _differential_checks(h, rng, samples)),
        ("structure identities", lambda: _structure_checks(h, rng, samples)),
        ("spherical expansion", lambda: _expansion_checks(rng)),
        ("injective example", lambda: _injective_checks(rng, samples)),
        ("inverse map", lambda: [_inverse_map_check(h, rng)]),
        ("multiplicity", _multiplicity_checks),
    ]
    checks = []
    for label, run in groups:
        start = monotonic()
        group = run()
        checks.extend(group)
        failed = sum(1 for c in group if c.asserted and not c.passed)
        status = "[green]ok[/green]" if failed == 0 else f"[red]{failed} failed[/red]"
        console.log(f"{label}: {status} ({round(monotonic() - start, 2)}s)")
    return checks


def all_passed(checks):
    return all(c.passed for c in checks if c.asserted)
