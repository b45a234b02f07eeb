"""Bi-orthogonal eigensystems, complex spherical coordinates, degeneracy classes.

Left eigenvectors are stored as *covectors* (rows) and paired with right
eigenvectors through the plain bilinear product ``left @ right``; nothing is
complex-conjugated.  For a Hermitian matrix the left covector is the conjugate
transpose of the right vector and the bilinear product reduces to the usual
inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DegenerateRadius, NearDefective, NonDiagonalizable

TOL_EP = 1e-9
OVERLAP_FLOOR = 1e-12
COND_MAX = 1e12
TOL_BIORTH = 1e-10


def csqrt(z):
    """Principal square root with the branch cut approached from above.

    ``-a - 0j`` and ``-a + 0j`` would otherwise land on opposite sheets; the
    signed zero is normalized so that negative reals map to ``+i sqrt(a)``.
    """
    z = np.asarray(z, dtype=complex) + 0j
    out = np.sqrt(z)
    return complex(out) if out.ndim == 0 else out


def is_degenerate(radius_sq, scale_sq, tol=TOL_EP):
    """Degeneracy test on R**2 relative to |(X, Y, Z)|**2.

    Testing |R| itself is hopeless near an EP: round-off in R**2 of order
    eps * scale**2 already produces |R| ~ sqrt(eps) * scale.
    """
    radius_sq = np.abs(radius_sq)
    scale_sq = np.asarray(scale_sq, dtype=float)
    return (radius_sq <= tol * scale_sq) | (scale_sq <= tol**2)


def _nearest_sign(value, reference):
    """+1 or -1, whichever puts ``value`` closer to ``reference``."""
    return 1 if abs(value - reference) <= abs(value + reference) else -1


def _unwrap(value, reference, period):
    """Shift the real part of ``value`` by a multiple of ``period`` toward ``reference``."""
    k = np.round((reference.real - value.real) / period)
    return value + k * period


@dataclass(frozen=True)
class ComplexPoint3:
    x: complex
    y: complex
    z: complex

    def radius_sq(self) -> complex:
        return complex(self.x * self.x + self.y * self.y + self.z * self.z)

    def norm(self) -> float:
        return float(np.sqrt(abs(self.x) ** 2 + abs(self.y) ** 2 + abs(self.z) ** 2))

    def scaled(self, factor: complex) -> "ComplexPoint3":
        return ComplexPoint3(self.x * factor, self.y * factor, self.z * factor)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=complex)


@dataclass(frozen=True)
class ComplexSpherical:
    """Complex spherical coordinates (R, theta, phi).

    ``branch_tag`` counts how many times continuity tracking moved R across
    the principal cut; its parity tells which sheet R lives on.  ``axis`` is
    set when X**2 + Y**2 vanishes and phi had to be pinned to zero.
    """

    R: complex
    theta: complex
    phi: complex
    branch_tag: int = 0
    axis: bool = False

    @property
    def cos_half(self) -> complex:
        return complex(np.cos(self.theta / 2))

    @property
    def sin_half(self) -> complex:
        return complex(np.sin(self.theta / 2))

    def to_point(self) -> ComplexPoint3:
        st = np.sin(self.theta)
        return ComplexPoint3(
            complex(self.R * st * np.cos(self.phi)),
            complex(self.R * st * np.sin(self.phi)),
            complex(self.R * np.cos(self.theta)),
        )


@dataclass(frozen=True)
class TwoLevelHamiltonian:
    """H = lambda0 + X sigma_x + Y sigma_y + Z sigma_z with complex X, Y, Z."""

    lambda0: complex
    point: ComplexPoint3

    @classmethod
    def from_xyz(cls, x, y, z, lambda0=0.0):
        return cls(complex(lambda0), ComplexPoint3(complex(x), complex(y), complex(z)))

    def matrix(self) -> np.ndarray:
        X, Y, Z = self.point.x, self.point.y, self.point.z
        l0 = self.lambda0
        return np.array([[l0 + Z, X - 1j * Y], [X + 1j * Y, l0 - Z]], dtype=complex)


@dataclass(frozen=True)
class BiorthogonalEigensystem:
    """Right eigenvectors (columns of ``right``) paired with left covectors (rows of ``left``).

    ``overlaps[k] = left[k] @ right[:, k]`` before any bi-orthogonal
    normalization.  Both sides are scaled to unit Euclidean norm, so
    ``|overlaps[k]|`` is a scale-free measure of how close mode k is to
    self-orthogonality.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    overlaps: np.ndarray
    condition_estimate: float
    defective: bool = False

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def normalized(self, overlap_floor=OVERLAP_FLOOR):
        """Return (chi, chitilde) with ``chitilde[k] @ chi[:, k] == 1``."""
        if np.any(np.abs(self.overlaps) <= overlap_floor):
            raise NearDefective("cannot normalize a self-orthogonal mode")
        root = csqrt(self.overlaps)
        return self.right / root[None, :], self.left / root[:, None]

    def biorthogonality_residual(self) -> float:
        chi, chit = self.normalized()
        return float(np.max(np.abs(chit @ chi - np.eye(self.n))))


class Degeneracy(str, Enum):
    REGULAR = "Regular"
    DIABOLIC = "DiabolicPoint"
    EXCEPTIONAL = "ExceptionalPoint"


@dataclass(frozen=True)
class DegeneracyClass:
    kind: Degeneracy
    witness: float


@dataclass(frozen=True)
class ProjectionCoefficients:
    alphas: np.ndarray
    betas: Optional[np.ndarray] = None


def _half_angles(R, Z):
    c = csqrt((R + Z) / (2 * R))
    s = csqrt((R - Z) / (2 * R))
    return c, s


def complex_spherical_coords(
    p: ComplexPoint3, prev: Optional[ComplexSpherical] = None, tol_ep: float = TOL_EP
) -> ComplexSpherical:
    """Complex spherical coordinates of a point of C^3.

    Principal branches are used unless ``prev`` is given, in which case every
    square root and logarithm is continued from the previous point.  The sheet
    of sqrt(R**2 - Z**2) is fixed as R sin(theta) = 2 R cos(theta/2) sin(theta/2),
    which is what makes the eigenvectors built from these angles exact.

    Raises
    ------
    DegenerateRadius
        If R**2 vanishes to tolerance.
    """
    X, Y, Z = p.x, p.y, p.z
    R2 = p.radius_sq()
    scale2 = p.norm() ** 2
    if is_degenerate(R2, scale2, tol_ep):
        raise DegenerateRadius(f"|R^2| = {abs(R2):.3e} at {p}")

    R = csqrt(R2)
    tag = 0
    if prev is not None:
        R *= _nearest_sign(R, prev.R)
        tag = prev.branch_tag
        prev_sheet = prev.branch_tag % 2
        sheet = 0 if abs(R - csqrt(R2)) <= abs(R + csqrt(R2)) else 1
        if sheet != prev_sheet:
            tag += 1

    c, s = _half_angles(R, Z)
    if prev is not None:
        c *= _nearest_sign(c, prev.cos_half)
        s *= _nearest_sign(s, prev.sin_half)
    half = -1j * np.log(c + 1j * s)
    if prev is not None:
        half = _unwrap(half, prev.theta / 2, 2 * np.pi)
    theta = complex(2 * half)

    if is_degenerate(X * X + Y * Y, scale2, tol_ep):
        return ComplexSpherical(R, theta, 0j, tag, axis=True)
    eiphi = (X + 1j * Y) / (2 * R * c * s)
    phi = complex(-1j * np.log(eiphi))
    if prev is not None:
        phi = complex(_unwrap(phi, prev.phi, 2 * np.pi))
    return ComplexSpherical(R, theta, phi, tag, axis=False)


# rational forms of the two-level eigenvectors; "north" forms are regular
# where cos(theta/2) != 0, "south" forms where sin(theta/2) != 0
def _plus_south(X, Y, R, c, s):
    return (X - 1j * Y) / (2 * R * s), s, (X + 1j * Y) / (2 * R * s), s


def _plus_north(X, Y, R, c, s):
    return c, (X + 1j * Y) / (2 * R * c), c, (X - 1j * Y) / (2 * R * c)


def _minus_north(X, Y, R, c, s):
    return -(X - 1j * Y) / (2 * R * c), c, -(X + 1j * Y) / (2 * R * c), c


def _minus_south(X, Y, R, c, s):
    return -s, (X + 1j * Y) / (2 * R * s), -s, (X - 1j * Y) / (2 * R * s)


FRAME_FORMS = {
    ("+", "south"): _plus_south,
    ("+", "north"): _plus_north,
    ("-", "north"): _minus_north,
    ("-", "south"): _minus_south,
}


def _merged_eigenvector(X, Y, Z):
    """Null right vector and left covector of the nilpotent traceless part at an EP."""
    cands = [np.array([X - 1j * Y, -Z]), np.array([Z, X + 1j * Y])]
    v = max(cands, key=lambda a: np.linalg.norm(a))
    cands = [np.array([X + 1j * Y, -Z]), np.array([Z, X - 1j * Y])]
    w = max(cands, key=lambda a: np.linalg.norm(a))
    return v / np.linalg.norm(v), w / np.linalg.norm(w)


def solve_two_level(h: TwoLevelHamiltonian, tol_ep: float = TOL_EP) -> BiorthogonalEigensystem:
    """Exact eigensystem of the generic two-level Hamiltonian.

    Index 0 is the ``+`` band (lambda0 + R), index 1 the ``-`` band.  Away
    from degeneracies the vectors are the standard complex-angle ones,

        u+ = (e^{-i phi} cos(theta/2), sin(theta/2)),
        u- = (-e^{-i phi} sin(theta/2), cos(theta/2)),

    already bi-orthonormal.  At a diabolic point the standard basis is
    returned; at an exceptional point both columns hold the single merged
    eigenvector and the overlaps are reported as exactly zero.
    """
    X, Y, Z = h.point.x, h.point.y, h.point.z
    l0 = h.lambda0
    R2 = h.point.radius_sq()
    scale2 = h.point.norm() ** 2

    if is_degenerate(R2, scale2, tol_ep):
        ev = np.array([l0, l0], dtype=complex)
        if scale2 <= tol_ep**2:
            eye = np.eye(2, dtype=complex)
            return BiorthogonalEigensystem(ev, eye, eye.copy(), np.ones(2, complex), 1.0)
        v, w = _merged_eigenvector(X, Y, Z)
        right = np.column_stack([v, v])
        left = np.vstack([w, w])
        return BiorthogonalEigensystem(
            ev, right, left, np.zeros(2, complex), np.inf, defective=True
        )

    R = csqrt(R2)
    c, s = _half_angles(R, Z)
    plus = _plus_south if abs(s) > 1e-8 else _plus_north
    minus = _minus_north if abs(c) > 1e-8 else _minus_south
    up0, up1, lp0, lp1 = plus(X, Y, R, c, s)
    um0, um1, lm0, lm1 = minus(X, Y, R, c, s)
    right = np.array([[up0, um0], [up1, um1]], dtype=complex)
    left = np.array([[lp0, lp1], [lm0, lm1]], dtype=complex)
    overlaps = np.einsum("ki,ik->k", left, right)
    cond = float(np.linalg.cond(right / np.linalg.norm(right, axis=0)))
    return BiorthogonalEigensystem(np.array([l0 + R, l0 - R]), right, left, overlaps, cond)


def classify_degeneracy(h, tol_ep: float = TOL_EP, cond_max: float = COND_MAX) -> DegeneracyClass:
    """Regular / diabolic / exceptional classification.

    ``h`` is a :class:`TwoLevelHamiltonian` or a square matrix.  For the
    two-level case the witness is |R| and the DP/EP split uses the norm of
    the traceless part.  For N x N input the witness is the smallest
    eigenvalue gap and a coalescence is called exceptional when the
    eigenvector matrix is numerically singular.
    """
    if isinstance(h, TwoLevelHamiltonian):
        R2 = h.point.radius_sq()
        scale2 = h.point.norm() ** 2
        witness = float(np.sqrt(abs(R2)))
        if scale2 <= tol_ep**2:
            return DegeneracyClass(Degeneracy.DIABOLIC, witness)
        if is_degenerate(R2, scale2, tol_ep):
            return DegeneracyClass(Degeneracy.EXCEPTIONAL, witness)
        return DegeneracyClass(Degeneracy.REGULAR, witness)

    m = np.asarray(h, dtype=complex)
    w, v = np.linalg.eig(m)
    gaps = np.abs(w[:, None] - w[None, :]) + np.diag(np.full(len(w), np.inf))
    gap = float(gaps.min())
    scale = max(float(np.linalg.norm(m - np.trace(m) / len(m) * np.eye(len(m)))), 1e-300)
    if gap > np.sqrt(tol_ep) * scale:
        return DegeneracyClass(Degeneracy.REGULAR, gap)
    cond = np.linalg.cond(v / np.linalg.norm(v, axis=0))
    if not np.isfinite(cond) or cond > cond_max:
        return DegeneracyClass(Degeneracy.EXCEPTIONAL, gap)
    return DegeneracyClass(Degeneracy.DIABOLIC, gap)


def _greedy_pairing(a, b):
    """Index permutation perm with b[perm[i]] matched to a[i], nearest pairs first."""
    dist = np.abs(a[:, None] - b[None, :])
    perm = np.full(len(a), -1)
    used_a, used_b = set(), set()
    for flat in np.argsort(dist, axis=None, kind="stable"):
        i, j = divmod(int(flat), len(b))
        if i in used_a or j in used_b:
            continue
        perm[i] = j
        used_a.add(i)
        used_b.add(j)
    return perm


def biorthogonal_decompose(
    m, cond_max: float = COND_MAX, cluster_tol: float = 1e-8
) -> BiorthogonalEigensystem:
    """Right and left eigenvectors of a dense non-symmetric matrix.

    The right problem ``m v = l v`` and the transpose problem ``m.T w = l w``
    are solved independently and paired greedily by eigenvalue proximity.
    Within a cluster of (numerically) equal eigenvalues the transpose solve
    does not give a bi-orthogonal set, so those covectors are replaced by the
    corresponding rows of ``inv(V)``.

    Raises
    ------
    NonDiagonalizable
        When the condition number of the unit-column right eigenvector matrix
        exceeds ``cond_max``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise ValueError("expected a square matrix of size >= 2")
    wr, vr = np.linalg.eig(m)
    order = np.lexsort((wr.imag, wr.real))
    wr, vr = wr[order], vr[:, order]
    vr = vr / np.linalg.norm(vr, axis=0)

    cond = float(np.linalg.cond(vr))
    if not np.isfinite(cond) or cond > cond_max:
        raise NonDiagonalizable(f"eigenvector condition estimate {cond:.3e}")

    wl, vl = np.linalg.eig(m.T)
    perm = _greedy_pairing(wr, wl)
    left = vl[:, perm].T.copy()

    scale = max(float(np.max(np.abs(wr))), 1.0)
    dual = None
    for k in range(len(wr)):
        close = np.abs(wr - wr[k]) <= cluster_tol * scale
        if close.sum() > 1:
            if dual is None:
                dual = np.linalg.inv(vr)
            left[k] = dual[k]
    left = left / np.linalg.norm(left, axis=1)[:, None]
    overlaps = np.einsum("ki,ik->k", left, vr)
    return BiorthogonalEigensystem(wr, vr, left, overlaps, cond)


def project_state(
    sys: BiorthogonalEigensystem,
    psi,
    psitilde=None,
    overlap_floor: float = OVERLAP_FLOOR,
) -> ProjectionCoefficients:
    """Expansion coefficients of ``psi`` (and optionally a covector) in the eigenbasis.

    ``alphas[i] = <left_i|psi> / <left_i|right_i>`` so that
    ``sys.right @ alphas`` reproduces ``psi``.
    """
    if np.any(np.abs(sys.overlaps) <= overlap_floor):
        raise NearDefective("eigensystem has a self-orthogonal mode")
    psi = np.asarray(psi, dtype=complex)
    alphas = (sys.left @ psi) / sys.overlaps
    betas = None
    if psitilde is not None:
        betas = (np.asarray(psitilde, dtype=complex) @ sys.right) / sys.overlaps
    return ProjectionCoefficients(alphas, betas)


@dataclass
class TrackedBranches:
    """Branch-continuous R, cos(theta/2), sin(theta/2) along a sampled closed path.

    Arrays have one more entry than the path has samples: the last entry is
    the first point again, reached by continuation.  ``closure_R`` and
    ``closure_c`` are the signs relating that continued value to the start.
    """

    R: np.ndarray
    c: np.ndarray
    s: np.ndarray
    closure_R: int
    closure_c: int
    closure_s: int
    sheet_flips: int = field(default=0)


def continue_sign(values):
    """Multiply each entry by +-1 so the sequence is continuous, first entry fixed.

    The sign needed at step k relative to step k-1 only depends on the two
    unmodified values, so the running sign is a cumulative product.
    """
    values = np.asarray(values, dtype=complex)
    a, b = values[:-1], values[1:]
    step = np.where(np.abs(b - a) <= np.abs(b + a), 1.0, -1.0)
    return values * np.concatenate([[1.0], np.cumprod(step)])


def track_branches(X, Y, Z, tol_ep: float = TOL_EP) -> TrackedBranches:
    """Continue R and the half-angle functions around a closed sampled path.

    ``X, Y, Z`` are arrays of the path samples *including* the repeated
    endpoint.  Raises :class:`DegenerateRadius` if any sample is degenerate.
    """
    X, Y, Z = (np.asarray(a, dtype=complex) for a in (X, Y, Z))
    R2 = X * X + Y * Y + Z * Z
    scale2 = np.abs(X) ** 2 + np.abs(Y) ** 2 + np.abs(Z) ** 2
    bad = is_degenerate(R2, scale2, tol_ep)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise DegenerateRadius(f"path sample {k} is degenerate (|R^2| = {abs(R2[k]):.3e})")
    Rp = csqrt(R2)
    R = continue_sign(Rp)
    flips = int(np.count_nonzero(np.abs(R - Rp) > np.abs(R + Rp)))
    c, s = _half_angles(R, Z)
    c = continue_sign(c)
    s = continue_sign(s)
    cl = lambda a: _nearest_sign(a[-1], a[0])
    return TrackedBranches(R, c, s, cl(R), cl(c), cl(s), flips)
