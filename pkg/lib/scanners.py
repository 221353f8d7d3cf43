"""Grid scans for zero sets, constant surfaces, degenerate spheres and the singular set,
plus total multiplicity and sampling-based injectivity checks.

Scans walk the (alpha, beta) nodes of the domain rectangle in chunks of alpha rows on a
thread pool; each chunk returns its records with its timings and the merge step sorts
the records canonically, so output never depends on scheduling.
"""

import concurrent.futures
import itertools
import math
from dataclasses import dataclass, field
from time import monotonic

import numpy as np
import pandas as pd

import config
import scan_config as sc
from lib import io_
from lib import quaternions as qt
from lib import slicefn as sf
from lib.calculus import root_clusters, spherical_derivative
from lib.differential import singular_mask
from lib.errors import DomainError, NotApplicable, SliceRegError, UndefinedMultiplicity

console = io_.console

CLOUD_COLUMNS = ["alpha", "beta", "ux", "uy", "uz", "kind"]

chunker = lambda input_list, batch_size: [input_list[i:i + batch_size] for i in range(0, len(input_list), batch_size)]


@dataclass(frozen=True)
class GridSpec:
    alpha_steps: int = sc.ALPHA_STEPS
    beta_steps: int = sc.BETA_STEPS
    theta_steps: int = sc.THETA_STEPS
    phi_steps: int = sc.PHI_STEPS
    tol: float = sc.GRID_TOL

    def __post_init__(self):
        for name in ("alpha_steps", "beta_steps", "theta_steps", "phi_steps"):
            if int(getattr(self, name)) < 2:
                raise SliceRegError(f"{name} must be at least 2, got {getattr(self, name)}")
        if not self.tol > 0:
            raise SliceRegError(f"grid tolerance must be positive, got {self.tol}")

    def nodes(self, domain):
        """Complex nodes alpha + i*beta of shape (alpha_steps, beta_steps)."""
        a = domain.alpha_nodes(self.alpha_steps)
        b = domain.beta_nodes(self.beta_steps)
        return a[:, None] + 1j * b[None, :]

    def angles(self):
        """(theta, phi) samples: theta_k = k*pi/n_theta, phi_l = 2*pi*l/n_phi, poles once."""
        theta = np.arange(self.theta_steps + 1) * np.pi / self.theta_steps
        phi = np.arange(self.phi_steps) * 2 * np.pi / self.phi_steps
        inner_t, inner_p = np.meshgrid(theta[1:-1], phi, indexing="ij")
        thetas = np.concatenate([[0.0], inner_t.ravel(), [np.pi]])
        phis = np.concatenate([[0.0], inner_p.ravel(), [0.0]])
        return thetas, phis

    def units(self):
        return qt.sphere_unit(*self.angles())

    def to_dict(self):
        return {
            "alpha_steps": self.alpha_steps,
            "beta_steps": self.beta_steps,
            "theta_steps": self.theta_steps,
            "phi_steps": self.phi_steps,
            "tol": self.tol,
        }


@dataclass
class ZeroRecord:
    """kind is one of real, spherical, s_isolated. on_surface marks s_isolated zeros found
    while N(f) vanishes identically, i.e. points of a zero surface."""
    point: np.ndarray
    kind: str
    z: complex
    unit: np.ndarray = None
    on_surface: bool = False

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "kind": self.kind,
            "z": [self.z.real, self.z.imag],
            "unit": None if self.unit is None else self.unit.tolist(),
            "on_surface": self.on_surface,
        }


class SurfaceCloud:
    """Points (alpha, beta, unit) of a zero surface, singular set or degenerate set.

    Rows with kind "sphere" or "spherical" stand for a whole sphere and carry NaN units;
    rows of kind "real" are points of the real axis.
    """

    def __init__(self, frame=None, provenance="", metadata=None, warnings=None):
        frame = pd.DataFrame(columns=CLOUD_COLUMNS) if frame is None else frame
        self.frame = canonical(frame)
        self.provenance = provenance
        self.metadata = metadata or {}
        self.warnings = warnings or []

    @classmethod
    def from_rows(cls, rows, provenance, metadata=None, warnings=None):
        frame = pd.DataFrame(rows, columns=CLOUD_COLUMNS) if rows else None
        return cls(frame, provenance, metadata, warnings)

    def __len__(self):
        return len(self.frame)

    def units(self):
        u = self.frame[["ux", "uy", "uz"]].to_numpy(dtype=float)
        return np.concatenate([np.zeros((len(u), 1)), u], axis=1)

    def z(self):
        return self.frame["alpha"].to_numpy(dtype=float) + 1j * self.frame["beta"].to_numpy(dtype=float)

    def points(self):
        """Quaternion points of rows with a definite unit."""
        rows = self.frame.dropna(subset=["ux", "uy", "uz"])
        units = np.concatenate([np.zeros((len(rows), 1)), rows[["ux", "uy", "uz"]].to_numpy(dtype=float)], axis=1)
        return qt.from_slice_coords(rows["alpha"].to_numpy(dtype=float), rows["beta"].to_numpy(dtype=float), units)

    def of_kind(self, *kinds):
        return self.frame[self.frame["kind"].isin(kinds)]

    def to_dict(self):
        return {
            "provenance": self.provenance,
            "metadata": self.metadata,
            "warnings": self.warnings,
            "columns": CLOUD_COLUMNS,
            "rows": self.frame.astype(object).where(self.frame.notna(), None).values.tolist(),
        }


def canonical(frame):
    """Sort by z then unit so merged chunks come out in one order."""
    frame = frame[CLOUD_COLUMNS].copy()
    for col in CLOUD_COLUMNS[:-1]:
        frame[col] = frame[col].astype(float)
    frame["kind"] = frame["kind"].astype(str)
    return frame.sort_values(CLOUD_COLUMNS, na_position="last", kind="mergesort").reset_index(drop=True)


def _row(z, unit, kind):
    if unit is None:
        return (z.real, z.imag, np.nan, np.nan, np.nan, kind)
    return (z.real, z.imag, unit[1], unit[2], unit[3], kind)


def _metadata(f, grid, **extra):
    meta = {"function": f.name, "domain": f.domain.to_dict(), "grid": grid.to_dict()}
    meta.update(extra)
    return meta


def _run_chunks(work, items, label):
    """Map `work` over chunks of `items` on the thread pool; returns the concatenated records."""
    start = monotonic()
    chunks = chunker(list(items), sc.CHUNK_SIZE)
    records, timings = [], []
    with concurrent.futures.ThreadPoolExecutor(max_workers=sc.max_workers()) as executor:
        for out, took in executor.map(work, chunks):
            records.extend(out)
            timings.append(took)
    console.log(f"{label}: {len(chunks)} chunks, mean {round(np.mean(timings) if timings else 0.0, 2)}s per chunk, "
                f"total {round(monotonic() - start, 2)}s")
    return records


def _timed(fn):
    def wrapper(chunk):
        start = monotonic()
        out = fn(chunk)
        return out, round(monotonic() - start, 2)
    return wrapper


## Zero sets

def _candidate_units(F1, F2, tol):
    """I = -F1 F2^-1 where it is an imaginary unit; NaN elsewhere."""
    big = qt.norm(F2) > tol
    safe = np.where(big[..., None], F2, qt.ONE)
    cand = -qt.quat_mul(F1, qt.quat_inverse(safe))
    ok = big & (np.abs(qt.norm(cand) - 1.0) <= tol) & (np.abs(cand[..., 0]) <= tol)
    unit = qt.im(cand) / np.where(ok, qt.norm(qt.im(cand)), 1.0)[..., None]
    return np.where(ok[..., None], unit, np.nan), ok


def _scale(F1, F2):
    return 1.0 + max(float(np.max(qt.norm(F1), initial=0.0)), float(np.max(qt.norm(F2), initial=0.0)))


def classify_sphere(f, z, grid=None):
    """("whole", None), ("single", unit) or ("empty", None) for the sphere over z."""
    grid = grid or GridSpec()
    z = complex(z)
    if z.imag <= 0:
        raise DomainError(f"sphere base {z} needs beta > 0")
    F1, F2 = f.stem.components(np.asarray(z))
    scale = _scale(F1, F2)
    tol = grid.tol * scale
    if qt.norm(F1) <= tol and qt.norm(F2) <= tol:
        return "whole", None
    unit, ok = _candidate_units(F1, F2, grid.tol * scale)
    if ok:
        return "single", unit
    return "empty", None


def normal_vanishes(f, grid):
    """Whether the complex stem n(z) of N(f) vanishes at every grid node."""
    if isinstance(f.stem, sf.PolynomialStem):
        c = sf.normal(f).stem.coeffs
        return bool(np.all(np.abs(c) <= config.DEFAULT_TOL * max(1.0, float(np.abs(f.stem.coeffs).max()) ** 2)))
    z = grid.nodes(f.domain)
    F1, F2 = f.stem.components(z)
    n = sf.normal_stem_values(f, z)
    return bool(np.all(np.abs(n) <= grid.tol * _scale(F1, F2) ** 2))


def _normal_roots(f, grid):
    """Roots of n(z) in the closed upper half plane with their multiplicities."""
    if isinstance(f.stem, sf.PolynomialStem):
        n = sf.normal(f).stem.complex_coefficients()
        if len(n) == 1:
            return []
        roots = root_clusters(n, sc.ROOT_CLUSTER_TOL)
    else:
        roots = _closure_roots(f, grid)
    out = []
    for z, size in roots:
        if z.imag < -sc.ROOT_CLUSTER_TOL:
            continue
        z = complex(z.real, abs(z.imag)) if abs(z.imag) > sc.ROOT_CLUSTER_TOL else complex(z.real, 0.0)
        if f.domain.contains_coords(z.real, z.imag):
            out.append((z, size))
    return out


def _closure_roots(f, grid):
    """Local minima of |n| on the node grid refined by Newton steps with a difference derivative."""
    z = grid.nodes(f.domain)
    n_abs = np.abs(sf.normal_stem_values(f, z))
    padded = np.pad(n_abs, 1, constant_values=np.inf)
    neighbours = np.min([padded[1 + da:1 + da + n_abs.shape[0], 1 + db:1 + db + n_abs.shape[1]]
                         for da in (-1, 0, 1) for db in (-1, 0, 1) if (da, db) != (0, 0)], axis=0)
    found = []
    for z0 in z[n_abs <= neighbours]:
        w = complex(z0)
        for _ in range(sc.NEWTON_STEPS):
            h = config.FD_STEP * max(1.0, abs(w))
            nw = sf.normal_stem_values(f, np.asarray(w))
            dn = (sf.normal_stem_values(f, np.asarray(w + h)) - sf.normal_stem_values(f, np.asarray(w - h))) / (2 * h)
            if dn == 0:
                break
            w = complex(w - nw / dn)
        if abs(sf.normal_stem_values(f, np.asarray(w))) <= grid.tol:
            if all(abs(w - other) > sc.ROOT_CLUSTER_TOL * max(1.0, abs(w)) for other, _ in found):
                found.append((w, 1))
    return found


def scan_zeros(f, grid=None):
    """Zero records of f: per-node candidate units when N(f) vanishes identically, else the
    spheres over the roots of the stem of N(f)."""
    grid = grid or GridSpec()
    start = monotonic()
    records = []
    if normal_vanishes(f, grid):
        z = grid.nodes(f.domain)
        F1, F2 = f.stem.components(z)
        tol = grid.tol * _scale(F1, F2)
        whole = (qt.norm(F1) <= tol) & (qt.norm(F2) <= tol)
        units, ok = _candidate_units(F1, F2, tol)
        for idx in zip(*np.nonzero(whole | ok)):
            zi = complex(z[idx])
            if whole[idx]:
                records.append(ZeroRecord(qt.from_slice_coords(zi.real, zi.imag, qt.I), "spherical", zi))
            else:
                u = units[idx]
                records.append(ZeroRecord(qt.from_slice_coords(zi.real, zi.imag, u), "s_isolated", zi, u, on_surface=True))
    else:
        for zi, _ in _normal_roots(f, grid):
            if zi.imag == 0.0:
                if qt.norm(f(zi.real)) <= grid.tol * (1.0 + abs(zi)):
                    records.append(ZeroRecord(zi.real * qt.ONE, "real", zi))
                continue
            kind, unit = classify_sphere(f, zi, grid)
            if kind == "whole":
                records.append(ZeroRecord(qt.from_slice_coords(zi.real, zi.imag, qt.I), "spherical", zi))
            elif kind == "single":
                records.append(ZeroRecord(qt.from_slice_coords(zi.real, zi.imag, unit), "s_isolated", zi, unit))
    records.sort(key=lambda r: (r.z.real, r.z.imag) + (tuple(r.unit) if r.unit is not None else ()))
    console.log(f"scan_zeros({f.name}): {len(records)} records in {round(monotonic() - start, 2)}s")
    return records


def zeros_to_cloud(f, records, grid, provenance="zero set"):
    rows = [_row(r.z, r.unit, r.kind) for r in records]
    meta = _metadata(f, grid, zero_surface=any(r.on_surface for r in records))
    return SurfaceCloud.from_rows(rows, provenance, meta)


@dataclass
class ConstantSurfaces:
    """Zero set of f - q with the semislices on which f is constantly q."""
    cloud: SurfaceCloud
    semislices: list = field(default_factory=list)
    surfzero_residual: float = 0.0


def constant_surface_extract(f, q, grid=None):
    grid = grid or GridSpec()
    q = qt.as_quaternion(q)
    g = sf.subtract_constant(f, q)
    records = scan_zeros(g, grid)
    cloud = zeros_to_cloud(g, records, grid, provenance=f"level set {q.tolist()}")

    z = grid.nodes(g.domain)
    F1, F2 = g.stem.components(z)
    tol = grid.tol * _scale(F1, F2)
    flags = []
    for chunk in chunker(list(grid.units()), 64):
        U = np.array(chunk)
        values = F1[None] + qt.quat_mul(U[:, None, None, :], F2[None])
        worst = qt.norm(values).reshape(len(U), -1).max(axis=1)
        flags.extend(U[worst <= tol])
    units, ok = _candidate_units(F1, F2, tol)
    if np.all(ok) and np.all(qt.norm(units - units[0, 0]) <= tol):
        flags.append(units[0, 0])
    semislices = []
    for u in flags:
        if all(qt.norm(u - v) > tol for v in semislices):
            semislices.append(u)

    residual = 0.0
    if records:
        zs = np.array([r.z for r in records])
        R1, R2 = g.stem.components(zs)
        residual = float(max(
            np.max(np.abs(np.sum(R1 * R1, axis=-1) - np.sum(R2 * R2, axis=-1))),
            np.max(np.abs(np.sum(R1 * R2, axis=-1))),
        ))
    cloud.metadata["semislices"] = [u.tolist() for u in semislices]
    cloud.metadata["surfzero_residual"] = residual
    return ConstantSurfaces(cloud, semislices, residual)


## Total multiplicity

def _normal_coefficients(f):
    if not isinstance(f.stem, sf.PolynomialStem):
        raise NotApplicable(f"{f.name} does not have a polynomial stem")
    n = sf.normal(f).stem.complex_coefficients()
    if np.all(np.abs(n) <= config.DEFAULT_TOL * max(1.0, float(np.abs(f.stem.coeffs).max()) ** 2)):
        raise UndefinedMultiplicity(f"N({f.name}) vanishes identically")
    return n


def total_multiplicity(f, x0):
    """Largest m with Delta_x0^m dividing N(f); 0 when f(x0) != 0."""
    n = _normal_coefficients(f)
    x0 = qt.as_quaternion(x0)
    if qt.norm(f(x0)) > sc.GRID_TOL * (1.0 + float(np.abs(n).max())):
        return 0
    if np.all(n.imag == 0.0):
        return _division_multiplicity(n.real, qt.characteristic_poly(x0))
    alpha, beta, _ = qt.slice_split(x0)
    return _root_order(n, complex(alpha, beta))


def _division_multiplicity(n, delta):
    count = 0
    scale = np.linalg.norm(n)
    while len(n) >= len(delta):
        quo, rem = np.polynomial.polynomial.polydiv(n, delta)
        if np.linalg.norm(rem) > sc.MULTIPLICITY_REL_TOL * scale:
            break
        count += 1
        n = quo
    return count


def _root_order(n, w):
    scale = np.linalg.norm(n)
    poly = np.polynomial.Polynomial(n)
    for k in range(len(n)):
        if abs(poly.deriv(k)(w)) / math.factorial(k) > sc.MULTIPLICITY_REL_TOL * scale:
            return k
    return len(n) - 1


def multiplicity_near_sphere(f, x0, radius):
    """Sum of total multiplicities of the zero spheres of f whose base lies within radius of x0's."""
    n = _normal_coefficients(f)
    alpha, beta, _ = qt.slice_split(qt.as_quaternion(x0))
    w = complex(alpha, beta)
    total = 0
    for z, size in root_clusters(n, sc.ROOT_CLUSTER_TOL):
        if z.imag < -sc.ROOT_CLUSTER_TOL or abs(z - w) > radius:
            continue
        total += size // 2 if abs(z.imag) <= sc.ROOT_CLUSTER_TOL else size
    return total


def singular_by_multiplicity(f, x0):
    """x0 is singular iff f - f(x0) has total multiplicity >= 2 on the sphere of x0."""
    x0 = qt.as_quaternion(x0)
    return total_multiplicity(sf.subtract_constant(f, f(x0)), x0) >= 2


## Singular and degenerate sets

@dataclass
class SingularUnits:
    """Singular units on one sphere: kind is none, points, circle or sphere."""
    kind: str
    units: np.ndarray


def singular_units_on_sphere(f, z, samples=sc.CIRCLE_SAMPLES, tol=config.RANK_TOL):
    """Units I with (df/dx)(d_s f)^-1 in C_I^perp on the sphere over z, in closed form.

    With A = D1 s^-1, B = D2 s^-1 the conditions read u.b_v = a0, u.a_v = -b0, |u| = 1.
    """
    z = complex(z)
    zarr = np.asarray(z)
    D1, D2 = f.stem.derivative_components(zarr)
    _, F2 = f.stem.components(zarr)
    s = F2 / z.imag
    if qt.norm(s) <= config.DEGENERATE_TOL:
        return SingularUnits("sphere", np.empty((0, 4)))
    s_inv = qt.quat_inverse(s)
    A, B = qt.quat_mul(D1, s_inv), qt.quat_mul(D2, s_inv)
    m1, m2 = B[1:], A[1:]
    c1, c2 = A[0], -B[0]
    scale = max(1.0, np.linalg.norm(m1), np.linalg.norm(m2))
    n = np.cross(m1, m2)
    nn = float(n @ n)
    if np.sqrt(nn) > tol * scale ** 2:
        up = (c1 * np.cross(m2, n) + c2 * np.cross(n, m1)) / nn
        t2 = (1.0 - up @ up) / nn
        if t2 < -tol:
            return SingularUnits("none", np.empty((0, 4)))
        if t2 <= tol:
            return SingularUnits("points", _as_units([up / np.linalg.norm(up)]))
        t = np.sqrt(t2)
        return SingularUnits("points", _as_units([up + t * n, up - t * n]))
    # one independent equation at most
    l1, l2 = np.linalg.norm(m1), np.linalg.norm(m2)
    if max(l1, l2) <= tol * scale:
        if abs(c1) <= tol * scale and abs(c2) <= tol * scale:
            return SingularUnits("sphere", np.empty((0, 4)))
        return SingularUnits("none", np.empty((0, 4)))
    (m, c), (mo, co) = ((m1, c1), (m2, c2)) if l1 >= l2 else ((m2, c2), (m1, c1))
    mu = (mo @ m) / (m @ m)
    if abs(co - mu * c) > tol * scale:
        return SingularUnits("none", np.empty((0, 4)))
    lm = np.linalg.norm(m)
    mhat, d = m / lm, c / lm
    if abs(d) > 1.0 + tol:
        return SingularUnits("none", np.empty((0, 4)))
    if abs(d) >= 1.0 - tol:
        return SingularUnits("points", _as_units([np.sign(d) * mhat]))
    e1 = np.cross(mhat, [1.0, 0.0, 0.0] if abs(mhat[0]) < 0.9 else [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mhat, e1)
    t = 2 * np.pi * np.arange(samples) / samples
    r = np.sqrt(1.0 - d * d)
    circle = d * mhat + r * (np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2)
    return SingularUnits("circle", _as_units(circle))


def _as_units(vectors):
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    v = v / np.linalg.norm(v, axis=1)[:, None]
    return np.concatenate([np.zeros((len(v), 1)), v], axis=1)


def _real_axis_rows(f, grid, test):
    if not f.domain.intersects_real:
        return []
    alpha = f.domain.alpha_nodes(grid.alpha_steps)
    hits = test(alpha)
    return [_row(complex(a, 0.0), None, "real") for a in alpha[hits]]


def singular_scan(f, grid=None):
    """Cloud of the singular set: closed-form units per node sphere plus sampled units with
    a singular differential."""
    grid = grid or GridSpec()
    units = grid.units()
    betas = f.domain.beta_nodes(grid.beta_steps)
    warnings = []

    def work(alphas):
        rows = []
        for a in alphas:
            for b in betas:
                z = complex(a, b)
                closed = singular_units_on_sphere(f, z)
                if closed.kind == "sphere":
                    rows.append(_row(z, None, "sphere"))
                    continue
                s_norm = float(qt.norm(f.stem.components(np.asarray(z))[1]) / b)
                if s_norm <= 1e3 * config.DEGENERATE_TOL:
                    warnings.append(f"near-degenerate spherical derivative {s_norm:.3g} at z={z}")
                rows.extend(_row(z, u, closed.kind if closed.kind == "circle" else "closed_form")
                            for u in closed.units)
                hits = singular_mask(f, qt.from_slice_coords(a, b, units))
                for u in units[hits]:
                    if all(qt.norm(u - v) > grid.tol for v in closed.units):
                        rows.append(_row(z, u, "grid"))
        return rows

    rows = _run_chunks(_timed(work), f.domain.alpha_nodes(grid.alpha_steps), f"singular_scan({f.name})")
    rows += _real_axis_rows(f, grid, lambda a: qt.norm(spherical_derivative(f, a[:, None] * qt.ONE)) <= config.DEGENERATE_TOL)
    for w in warnings:
        console.log(f"[yellow]warning[/yellow] {w}")
    return SurfaceCloud.from_rows(rows, "singular set", _metadata(f, grid), sorted(set(warnings)))


def degenerate_scan(f, grid=None):
    """Spheres (and real points) where d_s f vanishes."""
    grid = grid or GridSpec()
    z = grid.nodes(f.domain)
    _, F2 = f.stem.components(z)
    s = qt.norm(F2) / z.imag
    rows = [_row(complex(zi), None, "sphere") for zi in z[s <= grid.tol]]
    rows += _real_axis_rows(f, grid, lambda a: qt.norm(spherical_derivative(f, a[:, None] * qt.ONE)) <= grid.tol)
    return SurfaceCloud.from_rows(rows, "degenerate set", _metadata(f, grid))


def occupancy_statistics(f, grid=None, phi_index=None):
    """Count (alpha, beta, theta) grid cells whose 8 corners are all singular.

    Runs at one phi sample when phi_index is given, else over every phi sample.
    """
    grid = grid or GridSpec()
    a = f.domain.alpha_nodes(grid.alpha_steps)
    b = f.domain.beta_nodes(grid.beta_steps)
    theta = np.arange(grid.theta_steps + 1) * np.pi / grid.theta_steps
    phis = np.arange(grid.phi_steps) * 2 * np.pi / grid.phi_steps
    if phi_index is not None:
        phis = phis[[phi_index]]
    A, B, T = np.meshgrid(a, b, theta, indexing="ij")
    singular = cells = full = 0
    for phi in phis:
        x = qt.from_slice_coords(A, B, qt.sphere_unit(T, phi))
        mask = singular_mask(f, x)
        corners = np.ones(tuple(n - 1 for n in mask.shape), dtype=bool)
        for da in (0, 1):
            for db in (0, 1):
                for dt in (0, 1):
                    corners &= mask[da:da + mask.shape[0] - 1, db:db + mask.shape[1] - 1, dt:dt + mask.shape[2] - 1]
        singular += int(mask.sum())
        cells += corners.size
        full += int(corners.sum())
    points = len(phis) * A.size
    return {
        "points": points,
        "singular_points": singular,
        "singular_fraction": singular / points,
        "cells": cells,
        "full_cells": full,
        "full_fraction": full / cells if cells else 0.0,
    }


## Injectivity sampling

@dataclass
class InjectivityReport:
    n_samples: int
    collisions: int
    min_image_separation: float
    pairs: pd.DataFrame = None

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "collisions": self.collisions,
            "min_image_separation": self.min_image_separation,
        }


def _sample_region(region, n_samples, rng, exclude):
    if isinstance(region, SurfaceCloud):
        points = region.points()
        if len(points) > n_samples:
            points = points[np.sort(rng.choice(len(points), n_samples, replace=False))]
        return points
    points = np.empty((0, 4))
    while len(points) < n_samples:
        batch = region.random_points(rng, n_samples)
        if exclude is not None:
            batch = batch[~np.asarray(exclude(batch), dtype=bool)]
        points = np.concatenate([points, batch])
    return points[:n_samples]


def min_image_separation(points, images, block=64):
    """Smallest image distance over pairs whose preimages are more than COLLISION_PREIMAGE_TOL apart."""
    best = np.inf
    for start in range(0, len(points), block):
        p = points[start:start + block]
        d_pre = np.linalg.norm(p[:, None, :] - points[None, :, :], axis=-1)
        d_img = np.linalg.norm(images[start:start + block, None, :] - images[None, :, :], axis=-1)
        upper = np.arange(len(points))[None, :] > (start + np.arange(len(p)))[:, None]
        mask = upper & (d_pre > sc.COLLISION_PREIMAGE_TOL)
        if mask.any():
            best = min(best, float(d_img[mask].min()))
    return best


def collision_pairs(points, images):
    """Index pairs (i, j), i < j, whose images are within COLLISION_IMAGE_TOL while the
    preimages are more than COLLISION_PREIMAGE_TOL apart.

    Images are bucketed on a COLLISION_CELL lattice and every bucket is compared with itself
    and its neighbours (offsets -1, 0, 1 per component), so close images on either side of a
    cell boundary still meet.
    """
    keys = np.rint(images / sc.COLLISION_CELL).astype(np.int64)
    frame = pd.DataFrame(keys, columns=["k0", "k1", "k2", "k3"])
    buckets = {tuple(int(k) for k in key): np.asarray(members)
               for key, members in frame.groupby(["k0", "k1", "k2", "k3"]).groups.items()}
    offsets = list(itertools.product((-1, 0, 1), repeat=4))
    pairs = set()
    for key, members in buckets.items():
        near = [buckets[k] for k in (tuple(a + b for a, b in zip(key, off)) for off in offsets) if k in buckets]
        others = np.concatenate(near)
        d_img = np.linalg.norm(images[members][:, None, :] - images[others][None, :, :], axis=-1)
        d_pre = np.linalg.norm(points[members][:, None, :] - points[others][None, :, :], axis=-1)
        hit = (d_img < sc.COLLISION_IMAGE_TOL) & (d_pre > sc.COLLISION_PREIMAGE_TOL)
        for a, b in zip(*np.nonzero(hit)):
            i, j = int(members[a]), int(others[b])
            if i < j:
                pairs.add((i, j))
    return sorted(pairs)


def injectivity_sample(f, region, n_samples, seed, exclude=None):
    """Sample points and report every confirmed collision pair.

    `region` is a CircularDomain (optionally thinned by the `exclude` predicate) or a
    SurfaceCloud whose points are used directly.
    """
    start = monotonic()
    rng = np.random.default_rng(seed)
    points = _sample_region(region, n_samples, rng, exclude)
    images = f(points)
    pairs = collision_pairs(points, images)
    report = InjectivityReport(
        len(points), len(pairs), min_image_separation(points, images),
        pd.DataFrame(pairs, columns=["first", "second"]),
    )
    console.log(f"injectivity_sample({f.name}): {report.collisions} collisions over {report.n_samples} samples "
                f"in {round(monotonic() - start, 2)}s")
    return report


## Inverse of h(x) = (x + j)*(1 - Ii)

def inverse_map_final_example(q):
    """Preimage alpha + I*beta of q under h(alpha + I*beta) = alpha + beta*i + j + I(beta - alpha*i + k).

    None when q is 0 or 2j (the fibres over S_h and C_-i+ are not points), when
    q0 = q1 = 0, or when q is outside the image (beta <= 0).
    """
    q = qt.as_quaternion(q)
    if qt.norm(q) <= config.DEFAULT_TOL or qt.norm(q - 2.0 * qt.J) <= config.DEFAULT_TOL:
        return None
    q0, q1, q2, q3 = q
    d = q0 ** 2 + q1 ** 2
    if d <= config.DEFAULT_TOL:
        return None
    n2 = float(q @ q)
    A = (q0 ** 2 + q1 ** 2 - q2 ** 2 - q3 ** 2) / n2
    B = 2.0 * (q0 * q3 + q1 * q2) / n2
    C = 2.0 * (q1 * q3 - q0 * q2) / n2
    alpha = (q0 * n2 + 2.0 * (q1 * q3 - q0 * q2)) / (2.0 * d)
    beta = (q1 * n2 - 2.0 * (q0 * q3 + q1 * q2)) / (2.0 * d)
    if beta <= 0.0:
        return None
    return qt.from_slice_coords(alpha, beta, qt.quaternion(0.0, A, B, C))
