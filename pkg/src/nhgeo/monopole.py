"""Complex monopole fields and potentials, multipole series, grid export.

Three kinds share the form B = q Rvec / R**3, Phi = q / R and differ only in
the complex position vector:

* pointlike      Rvec = (x, y, z)
* complex Dirac  Rvec = (x, y, z - i eps), EP locus is the circle rho = eps, z = 0
* hyperbolic     Rvec = (x, y, i z),       EP locus is the cone rho = |z|

All square roots are principal (see :func:`nhgeo.spectral.csqrt`).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DivergentRegion, OnExceptionalLocus, WrongKind
from .spectral import TOL_EP, csqrt


class MonopoleKind(str, Enum):
    POINTLIKE = "pointlike"
    COMPLEX_DIRAC = "complex_dirac"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class MonopoleSpec:
    q: complex = 0.5
    epsilon: float = 0.0
    kind: MonopoleKind = MonopoleKind.POINTLIKE

    def __post_init__(self):
        object.__setattr__(self, "kind", MonopoleKind(self.kind))
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")


@dataclass(frozen=True)
class MultipoleMoments:
    charge: complex
    dipole: complex
    quadrupole: complex


@dataclass(frozen=True)
class FieldSample:
    position: tuple
    potential: Optional[complex]
    field: Optional[tuple]
    ep_distance: float


def position_vector(spec: MonopoleSpec, pos):
    """Complex Rvec for a real position; works on (..., 3) arrays."""
    pos = np.asarray(pos, dtype=float)
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    if spec.kind is MonopoleKind.COMPLEX_DIRAC:
        zc = z - 1j * spec.epsilon
    elif spec.kind is MonopoleKind.HYPERBOLIC:
        zc = 1j * z
    else:
        zc = z + 0j
    return np.stack([x + 0j, y + 0j, zc], axis=-1)


def position_jacobian(spec: MonopoleSpec) -> np.ndarray:
    """d Rvec_i / d x_i (diagonal) for the real embedding of each kind."""
    if spec.kind is MonopoleKind.HYPERBOLIC:
        return np.array([1, 1, 1j])
    return np.ones(3, dtype=complex)


def _radius_sq(spec, pos):
    pos = np.asarray(pos, dtype=float)
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    rho2 = x * x + y * y
    if spec.kind is MonopoleKind.COMPLEX_DIRAC:
        eps = spec.epsilon
        return (rho2 + z * z - eps * eps) - 2j * eps * z
    if spec.kind is MonopoleKind.HYPERBOLIC:
        return (rho2 - z * z) + 0j
    return (rho2 + z * z) + 0j


def effective_radius(spec: MonopoleSpec, pos):
    """Principal R with R**2 = Rvec . Rvec (no conjugation)."""
    return csqrt(_radius_sq(spec, pos))


def _scale(spec, pos):
    pos = np.asarray(pos, dtype=float)
    return np.sqrt(np.sum(pos * pos, axis=-1) + spec.epsilon**2)


def _on_locus(spec, pos, R, tol_ep):
    return np.abs(R) <= tol_ep * np.maximum(_scale(spec, pos), 1.0)


def potential(spec: MonopoleSpec, pos, tol_ep: float = TOL_EP) -> complex:
    """Phi = q / R."""
    R = effective_radius(spec, pos)
    if np.any(_on_locus(spec, pos, R, tol_ep)):
        raise OnExceptionalLocus(f"R = 0 at {pos}")
    return spec.q / R


def field(spec: MonopoleSpec, pos, tol_ep: float = TOL_EP) -> np.ndarray:
    """B = q Rvec / R**3, complex 3-vector (or (..., 3) array)."""
    R = effective_radius(spec, pos)
    if np.any(_on_locus(spec, pos, R, tol_ep)):
        raise OnExceptionalLocus(f"R = 0 at {pos}")
    Rvec = position_vector(spec, pos)
    return spec.q * Rvec / np.asarray(R * R * R)[..., None]


def numerical_field(spec: MonopoleSpec, pos, h: Optional[float] = None) -> np.ndarray:
    """-dPhi/dX_i by central differences in the real coordinates.

    The derivative is taken with respect to the complex parameter-space
    coordinate X_i = Rvec_i, so for the hyperbolic kind the z-derivative is
    divided by dRvec_z/dz = i.  The default step is ``1e-5 |R|``, which keeps
    the truncation error scale free near the EP locus.
    """
    pos = np.asarray(pos, dtype=float)
    if h is None:
        h = 1e-5 * max(abs(complex(effective_radius(spec, pos))), 1e-8)
    jac = position_jacobian(spec)
    out = np.empty(3, dtype=complex)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        d = (potential(spec, pos + e) - potential(spec, pos - e)) / (2 * h)
        out[i] = -d / jac[i]
    return out


def legendre_values(x, l_max: int) -> np.ndarray:
    """P_0..P_lmax at x by the Bonnet recurrence."""
    p = np.empty(l_max + 1, dtype=np.result_type(x, float))
    p[0] = 1.0
    if l_max >= 1:
        p[1] = x
    for l in range(1, l_max):
        p[l + 1] = ((2 * l + 1) * x * p[l] - l * p[l - 1]) / (l + 1)
    return p


def legendre_partial_sum(r: float, chi: float, epsilon: float, l_max: int) -> complex:
    """sum_{l<=lmax} (i eps)^l / r^(l+1) P_l(cos chi), the series for 1/R of the complex Dirac kind."""
    if r <= epsilon:
        raise DivergentRegion(f"series diverges for r={r} <= epsilon={epsilon}")
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    p = legendre_values(np.cos(chi), l_max)
    t = (1j * epsilon / r) ** np.arange(l_max + 1)
    return complex(np.sum(t * p) / r)


def multipole_moments(spec: MonopoleSpec) -> MultipoleMoments:
    if spec.kind is not MonopoleKind.COMPLEX_DIRAC:
        raise WrongKind(f"multipole moments are defined for complex_dirac, got {spec.kind.value}")
    q, eps = spec.q, spec.epsilon
    return MultipoleMoments(q, q * eps, q * eps * eps)


def multipole_potential(spec: MonopoleSpec, r: float, chi: float) -> complex:
    """Three-term expansion q/r + i p cos(chi)/r^2 - Q (3cos^2 chi - 1)/(2 r^3)."""
    m = multipole_moments(spec)
    c = np.cos(chi)
    return complex(m.charge / r + 1j * m.dipole * c / r**2 - m.quadrupole * (3 * c * c - 1) / (2 * r**3))


@dataclass(frozen=True)
class GridBox:
    lo: Sequence[float]
    hi: Sequence[float]
    counts: Sequence[int]

    def axes(self):
        if any(int(n) < 2 for n in self.counts):
            raise ValueError("grid needs at least 2 points per axis")
        return [np.linspace(a, b, int(n)) for a, b, n in zip(self.lo, self.hi, self.counts)]


def sample_grid(spec: MonopoleSpec, grid: GridBox, tol_ep: float = TOL_EP) -> list:
    """Row-major (x slowest, z fastest) samples of Phi and B on a box.

    Points on the EP locus carry ``None`` for potential and field and an
    ``ep_distance`` of exactly 0; elsewhere ``ep_distance = |R**2|``.
    """
    ax, ay, az = grid.axes()
    X, Y, Z = np.meshgrid(ax, ay, az, indexing="ij")
    pos = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)
    R = effective_radius(spec, pos)
    null = _on_locus(spec, pos, R, tol_ep)
    Rsafe = np.where(null, 1.0, R)
    phi = spec.q / Rsafe
    B = spec.q * position_vector(spec, pos) / (Rsafe**3)[:, None]
    dist = np.abs(R * R)
    out = []
    for k in range(len(pos)):
        p = tuple(float(v) for v in pos[k])
        if null[k]:
            out.append(FieldSample(p, None, None, 0.0))
        else:
            out.append(
                FieldSample(p, complex(phi[k]), tuple(complex(b) for b in B[k]), float(dist[k]))
            )
    return out


GRID_COLUMNS = (
    "x", "y", "z",
    "re_phi", "im_phi",
    "re_bx", "im_bx", "re_by", "im_by", "re_bz", "im_bz",
    "ep_distance",
)


def sample_record(s: FieldSample) -> dict:
    rec = dict(zip(("x", "y", "z"), s.position))
    if s.potential is None:
        for col in GRID_COLUMNS[3:11]:
            rec[col] = None
    else:
        rec["re_phi"], rec["im_phi"] = s.potential.real, s.potential.imag
        for axis, b in zip("xyz", s.field):
            rec[f"re_b{axis}"], rec[f"im_b{axis}"] = b.real, b.imag
    rec["ep_distance"] = s.ep_distance
    return rec


def grid_to_csv(samples) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GRID_COLUMNS)
    for s in samples:
        rec = sample_record(s)
        w.writerow(["" if rec[c] is None else repr(float(rec[c])) for c in GRID_COLUMNS])
    return buf.getvalue()


def grid_to_json(samples) -> str:
    return json.dumps([sample_record(s) for s in samples])
