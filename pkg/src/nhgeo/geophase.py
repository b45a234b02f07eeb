"""Complex geometric phases: connections, closed forms, discrete contour integrals.

Gauge patches
-------------
For the ``-`` band the eigenvector convention

    north:  u- = (-e^{-i phi} sin(theta/2), cos(theta/2))   regular at theta = 0
    south:  u- = (-sin(theta/2), e^{i phi} cos(theta/2))    regular at theta = pi

gives A = q(1 - cos theta) dphi and A = -q(1 + cos theta) dphi respectively
(q = 1/2), differing by the pure gauge 2q dphi.  The ``+`` band carries the
opposite curvature; its north form is (cos(theta/2), e^{i phi} sin(theta/2)).

Discrete phase
--------------
``gp_contour`` evaluates

    gamma = (i/2) sum_k [ log <chit_k|chi_{k+1}> - log <chit_{k+1}|chi_k> ]

over bi-orthonormal frames sampled around the loop.  Each product of
overlaps is gauge invariant; the symmetric combination cancels the O(h)
metric term of the one-sided sum, is exactly real for Hermitian families and
exactly odd under orientation reversal.  The integer lift of the logarithms is
read off the branch-continuous canonical frame and reported in diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import (
    BandExchange,
    DegenerateRadius,
    DivergentRegion,
    GaugeSingular,
    NonConvergent,
    OnExceptionalLocus,
)
from .spectral import (
    FRAME_FORMS,
    TOL_EP,
    ComplexPoint3,
    TwoLevelHamiltonian,
    biorthogonal_decompose,
    csqrt,
    is_degenerate,
    solve_two_level,
    track_branches,
)


class Band(str, Enum):
    PLUS = "+"
    MINUS = "-"


class GaugePatch(str, Enum):
    NORTH = "north"
    SOUTH = "south"


class ThetaKind(str, Enum):
    SPHERICAL = "spherical"
    HYPERBOLIC_OUTER = "hyperbolic_outer"
    HYPERBOLIC_INNER = "hyperbolic_inner"


class Approach(str, Enum):
    FROM_ABOVE = "from_above"
    FROM_BELOW = "from_below"


class PhaseMethod(str, Enum):
    ANALYTIC = "analytic"
    CONTOUR = "contour"
    CLOSED_FORM = "closed_form"
    MULTIPOLE = "multipole"
    CYCLIC = "cyclic"


@dataclass
class PhaseResult:
    gamma: complex
    method: PhaseMethod
    dynamical_phase: Optional[complex] = None
    total_phase: Optional[complex] = None
    diagnostics: dict = field(default_factory=dict)

    def __complex__(self):
        return complex(self.gamma)


@dataclass(frozen=True)
class LoopSpec:
    """Closed curve t in [0, 1) -> parameter point.

    ``curve`` may return a :class:`ComplexPoint3` or a
    :class:`TwoLevelHamiltonian` (its trace part is ignored).  Curves that
    accept an array of t and return array-valued coordinates are evaluated in
    one call.
    """

    curve: Callable
    samples: int = 1024
    orientation: int = 1

    def reversed(self) -> "LoopSpec":
        return LoopSpec(self.curve, self.samples, -self.orientation)

    def parameters(self, n: int) -> np.ndarray:
        t = np.arange(n) / n
        return t if self.orientation > 0 else (-t) % 1.0

    def evaluate(self, t):
        """Return X, Y, Z arrays at the parameter values ``t``."""
        t = np.asarray(t, dtype=float)
        try:
            out = self.curve(t)
            X, Y, Z = _coords(out)
            X, Y, Z = (np.broadcast_to(np.asarray(a, dtype=complex), t.shape) for a in (X, Y, Z))
            return X.copy(), Y.copy(), Z.copy()
        except (TypeError, ValueError):
            pts = [_coords(self.curve(float(ti))) for ti in t]
            X, Y, Z = (np.array(a, dtype=complex) for a in zip(*pts))
            return X, Y, Z


def _coords(obj):
    if isinstance(obj, TwoLevelHamiltonian):
        obj = obj.point
    if isinstance(obj, ComplexPoint3):
        return obj.x, obj.y, obj.z
    x, y, z = obj
    return x, y, z


def as_loop(obj, samples: int = 1024) -> LoopSpec:
    return obj if isinstance(obj, LoopSpec) else LoopSpec(obj, samples)


# loop builders


def constant_theta_loop(theta: complex, radius: complex = 1.0, samples: int = 1024) -> LoopSpec:
    """Circle of constant complex polar angle, phi = 2 pi t."""
    st, ct = np.sin(theta), np.cos(theta)

    def curve(t):
        ph = 2 * np.pi * np.asarray(t)
        return ComplexPoint3(radius * st * np.cos(ph), radius * st * np.sin(ph), radius * ct + 0 * ph)

    return LoopSpec(curve, samples)


def circle_loop(rho: float, z: complex, samples: int = 1024) -> LoopSpec:
    """X + iY = rho e^{2 pi i t} at fixed complex Z."""

    def curve(t):
        ph = 2 * np.pi * np.asarray(t)
        return ComplexPoint3(rho * np.cos(ph), rho * np.sin(ph), z + 0 * ph)

    return LoopSpec(curve, samples)


def tilted_circle_loop(axis_theta: float, axis_phi: float, half_angle: float, samples: int = 1024) -> LoopSpec:
    """Circle on the real unit sphere around an arbitrary axis."""
    n = np.array([np.sin(axis_theta) * np.cos(axis_phi), np.sin(axis_theta) * np.sin(axis_phi), np.cos(axis_theta)])
    e1 = np.cross(n, [0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.cross(n, [1.0, 0.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    ca, sa = np.cos(half_angle), np.sin(half_angle)

    def curve(t):
        ph = 2 * np.pi * np.asarray(t)[..., None]
        p = ca * n + sa * (np.cos(ph) * e1 + np.sin(ph) * e2)
        return ComplexPoint3(p[..., 0], p[..., 1], p[..., 2])

    return LoopSpec(curve, samples)


def complex_dirac_loop(rho: float, z: float, epsilon: float, samples: int = 1024) -> LoopSpec:
    """Horizontal circle in the static complex-Dirac family, Z = z - i eps."""
    return circle_loop(rho, z - 1j * epsilon, samples)


def hyperbolic_loop(rho: float, z: float, samples: int = 1024) -> LoopSpec:
    """Horizontal circle in the hyperbolic family, Z = i z."""
    return circle_loop(rho, 1j * z, samples)


def drive_loop(V0: complex, Delta: float, delta: float, samples: int = 1024) -> LoopSpec:
    """Static two-level family of the driven damped atom, X + iY = V0 e^{2 pi i t}.

    Z = (Delta - i delta) / 2 with ``delta`` the decay-rate difference
    (gamma_a - gamma_b) / 2; band ``-`` around this loop gives the closed form
    of :func:`gp_garrison_wright`.
    """
    v = complex(V0)

    def curve(t):
        e = v * np.exp(2j * np.pi * np.asarray(t))
        return ComplexPoint3(e.real + 0j, e.imag + 0j, 0.5 * (Delta - 1j * delta) + 0 * e)

    return LoopSpec(curve, samples)


# frames and the discrete phase


def loop_frames(X, Y, Z, band=Band.MINUS, patch=GaugePatch.NORTH, tol_ep: float = TOL_EP):
    """Branch-continuous bi-orthonormal frames along a sampled closed path.

    Returns ``right`` and ``left`` arrays of shape (M, 2) for the M given
    samples plus the tracking record.
    """
    band, patch = Band(band), GaugePatch(patch)
    tr = track_branches(X, Y, Z, tol_ep)
    den = tr.c if patch is GaugePatch.NORTH else tr.s
    if np.any(np.abs(den) < 1e-12):
        raise GaugeSingular(f"loop crosses the pole where the {patch.value} patch is singular")
    form = FRAME_FORMS[(band.value, patch.value)]
    r0, r1, l0, l1 = form(X, Y, tr.R, tr.c, tr.s)
    right = np.stack(np.broadcast_arrays(r0, r1), axis=-1).astype(complex)
    left = np.stack(np.broadcast_arrays(l0, l1), axis=-1).astype(complex)
    return right, left, tr


def _log_sums(right, left):
    fwd = np.log(np.einsum("ki,ki->k", left[:-1], right[1:]))
    bwd = np.log(np.einsum("ki,ki->k", left[1:], right[:-1]))
    return fwd.sum(), bwd.sum()


def _contour_once(loop: LoopSpec, n: int, band, patch, rephase, tol_ep):
    t = loop.parameters(n)
    X, Y, Z = loop.evaluate(t)
    X, Y, Z = (np.append(a, a[0]) for a in (X, Y, Z))
    right, left, tr = loop_frames(X, Y, Z, band, patch, tol_ep)
    if tr.closure_R < 0:
        raise BandExchange("R changes sign around the loop: it encircles an exceptional point")

    kappa = complex(left[0] @ right[-1])
    log_kappa = 0j if abs(kappa - 1) < abs(kappa + 1) else 1j * np.pi * loop.orientation
    s_f, s_b = _log_sums(right, left)
    target_f = s_f - log_kappa
    target_b = s_b + log_kappa

    if rephase is not None:
        a = np.asarray(rephase(t), dtype=complex)
        r = right[:-1] * a[:, None]
        l = left[:-1] / a[:, None]
        r = np.vstack([r, r[:1]])
        l = np.vstack([l, l[:1]])
        l_f, l_b = _log_sums(r, l)
    else:
        l_f = 1j * np.angle(np.exp(target_f)) + np.real(target_f)
        l_b = 1j * np.angle(np.exp(target_b)) + np.real(target_b)
    n_f = int(np.round((target_f - l_f).imag / (2 * np.pi)))
    n_b = int(np.round((target_b - l_b).imag / (2 * np.pi)))
    lifted_f = l_f + 2j * np.pi * n_f
    lifted_b = l_b + 2j * np.pi * n_b
    gamma = 0.5j * (lifted_f - lifted_b)
    pf_angle = np.angle(np.exp(1j * l_f.imag))
    pb_angle = np.angle(np.exp(1j * l_b.imag))
    windings = (
        int(np.round((lifted_f.imag - pf_angle) / (2 * np.pi))),
        int(np.round((lifted_b.imag - pb_angle) / (2 * np.pi))),
    )
    return complex(gamma), windings, int(tr.sheet_flips)


def gp_contour(
    loop,
    band=Band.MINUS,
    patch=GaugePatch.NORTH,
    tol: float = 1e-8,
    max_samples: int = 2**20,
    rephase: Optional[Callable] = None,
    tol_ep: float = TOL_EP,
) -> PhaseResult:
    """Geometric phase of a two-level band around a closed loop.

    The sample count starts at ``loop.samples`` and doubles until the
    Richardson error estimate ``|g(2N) - g(N)| / 3`` drops below ``tol``; the
    returned value is the second-order extrapolation ``(4 g(2N) - g(N)) / 3``.

    ``rephase``, if given, maps the parameter array to per-sample complex
    factors a(t); frames are replaced by (a chi, chit / a) before the overlap
    products are formed.  The result does not change.

    Raises
    ------
    DegenerateRadius
        A sample lies on a degeneracy.
    BandExchange
        The loop encircles an EP so the band is not cyclic.
    NonConvergent
        The error estimate is above ``tol`` at ``max_samples``.
    """
    loop = as_loop(loop)
    n = max(int(loop.samples), 8)
    g1, w1, _ = _contour_once(loop, n, band, patch, rephase, tol_ep)
    while True:
        g2, w2, flips = _contour_once(loop, 2 * n, band, patch, rephase, tol_ep)
        est = abs(g2 - g1) / 3
        if est <= tol or 2 * n >= max_samples:
            break
        n *= 2
        g1 = g2
    diag = {
        "samples": 2 * n,
        "error_estimate": est,
        "branch_windings": w2,
        "sheet_flips": flips,
        "band": Band(band).value,
        "patch": GaugePatch(patch).value,
    }
    if est > tol:
        raise NonConvergent(f"error estimate {est:.3e} > tol {tol:.1e} at {2 * n} samples")
    return PhaseResult(complex((4 * g2 - g1) / 3), PhaseMethod.CONTOUR, diagnostics=diag)


def _point_of(h):
    if isinstance(h, TwoLevelHamiltonian):
        return h.point
    if isinstance(h, ComplexPoint3):
        return h
    return ComplexPoint3(*(complex(v) for v in h))


def connection_coefficient(
    h_family: Callable,
    t: float,
    band=Band.MINUS,
    patch=GaugePatch.NORTH,
    dt: float = 1e-6,
    tol_ep: float = TOL_EP,
) -> complex:
    """A(t) = i <chit| d chi / dt> in the chosen gauge patch, by central differences."""
    pts = [_point_of(h_family(tt)) for tt in (t - dt, t, t + dt)]
    X, Y, Z = (np.array(v, dtype=complex) for v in zip(*[(p.x, p.y, p.z) for p in pts]))
    try:
        right, left, _ = loop_frames(X, Y, Z, band, patch, tol_ep)
    except DegenerateRadius:
        raise
    dchi = (right[2] - right[0]) / (2 * dt)
    return complex(1j * left[1] @ dchi)


def gp_constant_theta(kind, theta: complex, band=Band.MINUS, q: complex = 0.5, patch=GaugePatch.NORTH) -> PhaseResult:
    """Full phi-loop phase at fixed (complex) polar or hyperbolic angle.

    Band ``-`` in the north patch:

    * spherical:        2 pi q (1 - cos theta)
    * hyperbolic outer: 2 pi q (1 + sinh theta)
    * hyperbolic inner: 2 pi q (1 + cosh theta)

    The south patch subtracts the pure-gauge holonomy 4 pi q, which gives
    the companion forms -2 pi q (1 + cos theta), -2 pi q (1 - sinh theta) and
    -2 pi q (1 - cosh theta).  Band ``+`` carries the opposite curvature and
    its phase is the negative of band ``-`` in the same patch.
    """
    kind, band, patch = ThetaKind(kind), Band(band), GaugePatch(patch)
    if kind is ThetaKind.SPHERICAL:
        f = np.cos(theta)
    elif kind is ThetaKind.HYPERBOLIC_OUTER:
        f = -np.sinh(theta)
    else:
        f = -np.cosh(theta)
    gamma = 2 * np.pi * q * (1 - f)
    if patch is GaugePatch.SOUTH:
        gamma -= 4 * np.pi * q
    if band is Band.PLUS:
        gamma = -gamma
    diag = {"kind": kind.value, "band": band.value, "patch": patch.value}
    return PhaseResult(complex(gamma), PhaseMethod.ANALYTIC, diagnostics=diag)


def gp_complex_dirac_loop(q: complex, epsilon: float, r: float, chi: float, tol_ep: float = TOL_EP) -> PhaseResult:
    """gamma = 2 pi q (1 - (r cos chi - i eps) / R), R = sqrt(r^2 - 2 i eps r cos chi - eps^2)."""
    R2 = r * r - 2j * epsilon * r * np.cos(chi) - epsilon**2
    if is_degenerate(R2, r * r + epsilon**2, tol_ep):
        raise OnExceptionalLocus(f"loop r={r}, chi={chi} lies on the EP circle of radius {epsilon}")
    R = csqrt(R2)
    gamma = 2 * np.pi * q * (1 - (r * np.cos(chi) - 1j * epsilon) / R)
    return PhaseResult(complex(gamma), PhaseMethod.CLOSED_FORM, diagnostics={"R": R})


def gp_multipole(q: complex, epsilon: float, r: float, chi: float, orders: int = 2) -> list:
    """Monopole, dipole and quadrupole terms of the complex Dirac loop phase."""
    if r <= epsilon:
        raise DivergentRegion(f"expansion needs r > epsilon (r={r}, epsilon={epsilon})")
    if not 0 <= orders <= 2:
        raise ValueError("orders must be 0, 1 or 2")
    p, Q = q * epsilon, q * epsilon**2
    c, s2 = np.cos(chi), np.sin(chi) ** 2
    terms = [
        ("monopole", complex(2 * np.pi * q * (1 - c))),
        ("dipole", complex(2j * np.pi * p * s2 / r)),
        ("quadrupole", complex(-2 * np.pi * 3 * Q * s2 * c / (2 * r * r))),
    ]
    return terms[: orders + 1]


def gp_garrison_wright(V0: complex, Delta: float, delta: float, approach=Approach.FROM_ABOVE, tol_ep: float = TOL_EP) -> PhaseResult:
    """gamma = pi (1 - (Delta - i delta) / sqrt(|2 V0|^2 + (Delta - i delta)^2)).

    The principal square root is used.  Exactly at resonance with
    |2 V0| < delta the radicand sits on the branch cut; ``approach`` then
    selects the one-sided limit Delta -> +0 or Delta -> -0.
    """
    w = Delta - 1j * delta
    r2 = abs(2 * V0) ** 2
    a = r2 + w * w
    if is_degenerate(a, r2 + abs(w) ** 2, tol_ep):
        raise OnExceptionalLocus(f"|2V0| = {np.sqrt(r2)} meets the EP at Delta={Delta}, delta={delta}")
    root = csqrt(a)
    on_cut = Delta == 0 and a.real < 0
    if on_cut:
        # Delta -> +0 puts the radicand just below the cut when delta > 0
        below = (Approach(approach) is Approach.FROM_ABOVE) == (delta > 0)
        root = -1j * np.sqrt(-a.real) if below else 1j * np.sqrt(-a.real)
    gamma = np.pi * (1 - w / root)
    return PhaseResult(complex(gamma), PhaseMethod.CLOSED_FORM, diagnostics={"root": complex(root), "on_cut": on_cut})


def re_gamma_resonance(r: float, delta: float, approach=Approach.FROM_ABOVE) -> float:
    """Re gamma at resonance, one-sided in the detuning.

    pi for r > delta; for r < delta the limits Delta -> +0 and Delta -> -0 of
    the principal-branch closed form are pi (1 - delta / sqrt(delta^2 - r^2))
    and pi (1 + delta / sqrt(delta^2 - r^2)).
    """
    if r < 0 or delta <= 0:
        raise ValueError("need r >= 0 and delta > 0")
    if r == delta:
        raise OnExceptionalLocus("r = delta is the exceptional point")
    if r > delta:
        return float(np.pi)
    sign = -1.0 if Approach(approach) is Approach.FROM_ABOVE else 1.0
    return float(np.pi * (1 + sign * delta / np.sqrt(delta * delta - r * r)))


def _matrix_of(h):
    if isinstance(h, TwoLevelHamiltonian):
        return h.matrix()
    return np.asarray(h, dtype=complex)


def adiabaticity_measure(h_family: Callable, t: float, n=Band.MINUS, dt: float = 1e-6, gap_tol: float = 1e-12) -> float:
    """sum_{m != n} |<chit_m| dH/dt |chi_n> / (E_m - E_n)^2| at time t.

    ``n`` is a band label for two-level families or an integer index into the
    eigenvalues sorted by (real, imag) for matrix families.  dH/dt is a central
    difference with step ``dt``.
    """
    h0 = h_family(t)
    if isinstance(h0, TwoLevelHamiltonian):
        sys = solve_two_level(h0)
        idx = 0 if Band(n) is Band.PLUS else 1
    else:
        sys = biorthogonal_decompose(_matrix_of(h0))
        idx = int(n)
    chi, chit = sys.normalized()
    hdot = (_matrix_of(h_family(t + dt)) - _matrix_of(h_family(t - dt))) / (2 * dt)
    total = 0.0
    for m in range(sys.n):
        if m == idx:
            continue
        gap = sys.eigenvalues[m] - sys.eigenvalues[idx]
        if abs(gap) <= gap_tol:
            raise DegenerateRadius(f"gap {abs(gap):.3e} between levels {m} and {idx}")
        total += abs(chit[m] @ hdot @ chi[:, idx] / gap**2)
    return float(total)


def sphere_family(theta: float, radius: float = 1.0):
    """t -> point on the real sphere circle of polar angle theta, phi = 2 pi t."""

    def h(t):
        ph = 2 * np.pi * t
        return ComplexPoint3(
            radius * np.sin(theta) * np.cos(ph), radius * np.sin(theta) * np.sin(ph), radius * np.cos(theta) + 0j
        )

    return h


def _a_phi(theta, band, patch, dt=1e-6):
    return connection_coefficient(sphere_family(theta), 0.0, band, patch, dt) / (2 * np.pi)


def curvature_flux(band=Band.MINUS, n_theta: int = 48, method: str = "surface", h: float = 1e-3) -> complex:
    """Flux of the curvature through the real unit sphere around the DP.

    Two patches cover the sphere: north on [0, pi/2], south on [pi/2, pi].

    ``method="surface"`` integrates F_{theta phi} = dA_phi/dtheta of each
    patch connection (fourth-order differences in theta, Gauss-Legendre
    in theta, exact in phi); ``method="boundary"`` uses Stokes on each patch,
    flux = oint_eq A^north - oint_eq A^south.
    """
    if method == "boundary":
        eq = np.pi / 2
        return complex(2 * np.pi * (_a_phi(eq, band, GaugePatch.NORTH) - _a_phi(eq, band, GaugePatch.SOUTH)))
    if method != "surface":
        raise ValueError(f"unknown method {method!r}")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    total = 0j
    for patch, (a, b) in ((GaugePatch.NORTH, (0.0, np.pi / 2)), (GaugePatch.SOUTH, (np.pi / 2, np.pi))):
        nodes = 0.5 * (b - a) * x + 0.5 * (b + a)
        for th, wk in zip(nodes, w):
            f = (
                -_a_phi(th + 2 * h, band, patch)
                + 8 * _a_phi(th + h, band, patch)
                - 8 * _a_phi(th - h, band, patch)
                + _a_phi(th - 2 * h, band, patch)
            ) / (12 * h)
            total += 0.5 * (b - a) * wk * f
    return complex(2 * np.pi * total)
