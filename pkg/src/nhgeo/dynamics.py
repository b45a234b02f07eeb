"""Schroedinger pair evolution, period propagators, cyclic states and phase decomposition.

The pair

    i d/dt |Psi>  =  H |Psi>,      -i d/dt <Psit|  =  <Psit| H

is advanced with an adaptive Magnus integrator.  Each step builds a
sixth-order exponent from three Gauss-Legendre samples of H and an embedded
fourth-order exponent from the same samples; the operator-norm difference
of the two step propagators controls the step size.  All states share the
step sequence (it does not depend on the initial state), so the monodromy
built from step propagators agrees with any single trajectory.  The adjoint
is advanced with the exact inverse step exp(-Omega), which conserves
<Psit|Psi> to round-off.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import GaugeMismatch, StepFailure
from .spectral import ComplexPoint3, TwoLevelHamiltonian, biorthogonal_decompose

DEFAULT_TOL = 1e-10
MAX_STEPS = 10_000_000

_C = math.sqrt(15) / 10
_NODES = (0.5 - _C, 0.5, 0.5 + _C)


@dataclass
class TimeDependentHamiltonian:
    """H(t) as a callable returning an N x N complex matrix, optionally periodic."""

    evaluate: Callable
    period: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluate(t), dtype=complex)

    @property
    def dim(self) -> int:
        return self(0.0).shape[0]

    def periodicity_residual(self) -> float:
        if self.period is None:
            raise ValueError("Hamiltonian is not periodic")
        return float(np.linalg.norm(self(0.0) - self(self.period)))


@dataclass(frozen=True)
class DrivenAtomParams:
    """Rotating-wave driven two-level atom with level decay rates.

    ``V`` is the complex drive envelope, a number or a callable of t.
    """

    gamma_a: float
    gamma_b: float
    Delta: float
    V: object
    drive_period: float = 2 * np.pi

    def __post_init__(self):
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ValueError("decay rates must be non-negative")
        if self.drive_period <= 0:
            raise ValueError("drive_period must be positive")

    @property
    def delta_decay(self) -> float:
        return 0.5 * (self.gamma_a - self.gamma_b)

    def drive(self, t: float) -> complex:
        return complex(self.V(t)) if callable(self.V) else complex(self.V)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    adjoint_states: np.ndarray
    pair_products: np.ndarray
    steps: int = 0

    def max_pair_drift(self) -> float:
        return float(np.max(np.abs(self.pair_products - self.pair_products[0])))


@dataclass
class CyclicState:
    """Eigenvector of U(T): U state = exp(i phi) state, with adjoint . state = 1."""

    state: np.ndarray
    adjoint: np.ndarray
    phi: complex
    gauge_function_delta: complex
    branch: int = 0


# 2 x 2 kernels on flat tuples (a, b, c, d) = [[a, b], [c, d]]


def _mul2(p, q):
    a, b, c, d = p
    e, f, g, h = q
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _comm2(p, q):
    a, b, c, d = p
    e, f, g, h = q
    return (b * g - f * c, a * f + b * h - e * b - f * d, c * e + d * g - g * a - h * c, c * f - g * b)


def _lin2(*terms):
    out = [0j, 0j, 0j, 0j]
    for coef, m in terms:
        for i in range(4):
            out[i] += coef * m[i]
    return tuple(out)


def _exp2(m):
    a, b, c, d = m
    mean = 0.5 * (a + d)
    p = 0.5 * (a - d)
    w2 = p * p + b * c
    if abs(w2) < 1e-6:
        ch = 1 + w2 / 2 + w2 * w2 / 24 + w2**3 / 720
        sh = 1 + w2 / 6 + w2 * w2 / 120 + w2**3 / 5040
    else:
        w = cmath.sqrt(w2)
        ch = cmath.cosh(w)
        sh = cmath.sinh(w) / w
    e = cmath.exp(mean)
    return (e * (ch + sh * p), e * sh * b, e * sh * c, e * (ch - sh * p))


def _norm2(m):
    return math.sqrt(sum(abs(v) ** 2 for v in m))


def _omegas_2(h, t, dt):
    A = [tuple((-1j * dt * v) for v in h(t + dt * c).ravel().tolist()) for c in _NODES]
    a1 = A[1]
    a2 = _lin2((math.sqrt(15) / 3, A[2]), (-math.sqrt(15) / 3, A[0]))
    a3 = _lin2((10 / 3, A[2]), (-20 / 3, A[1]), (10 / 3, A[0]))
    c1 = _comm2(a1, a2)
    base = _lin2((1, a1), (1 / 12, a3))
    om4 = _lin2((1, base), (-1 / 12, c1))
    c2 = _lin2((-1 / 60, _comm2(a1, _lin2((2, a3), (1, c1)))),)
    om6 = _lin2((1, base), (1 / 240, _comm2(_lin2((-20, a1), (-1, a3), (1, c1)), _lin2((1, a2), (1, c2)))))
    return om6, om4


def _omegas_n(h, t, dt):
    A = [-1j * dt * h(t + dt * c) for c in _NODES]
    a1 = A[1]
    a2 = math.sqrt(15) / 3 * (A[2] - A[0])
    a3 = 10 / 3 * (A[2] - 2 * A[1] + A[0])

    def com(x, y):
        return x @ y - y @ x

    c1 = com(a1, a2)
    base = a1 + a3 / 12
    om4 = base - c1 / 12
    c2 = -com(a1, 2 * a3 + c1) / 60
    om6 = base + com(-20 * a1 - a3 + c1, a2 + c2) / 240
    return om6, om4


def _step(h, t, dt, two_level):
    """Return (U, U^{-1}, error estimate) for one Magnus step."""
    if two_level:
        om6, om4 = _omegas_2(h, t, dt)
        u6, u4 = _exp2(om6), _exp2(om4)
        err = _norm2(_lin2((1, u6), (-1, u4)))
        uinv = _exp2(tuple(-v for v in om6))
        return np.array(u6).reshape(2, 2), np.array(uinv).reshape(2, 2), err
    om6, om4 = _omegas_n(h, t, dt)
    u6 = expm(om6)
    err = float(np.linalg.norm(u6 - expm(om4), 2))
    return u6, expm(-om6), err


@dataclass
class _StepRecord:
    times: np.ndarray
    props: list
    inverses: list


def _integrate(h: TimeDependentHamiltonian, t_end: float, tol: float, max_steps: int = MAX_STEPS) -> _StepRecord:
    key = (float(t_end), float(tol))
    if key in h._cache:
        return h._cache[key]
    if tol <= 0:
        raise ValueError("tol must be positive")
    two = h.dim == 2
    times = [0.0]
    props, invs = [], []
    if t_end == 0:
        rec = _StepRecord(np.array(times), props, invs)
        h._cache[key] = rec
        return rec
    scale = max(float(np.linalg.norm(h(0.0), 2)), 1e-12)
    dt = min(abs(t_end), 0.5 / scale)
    sign = 1.0 if t_end > 0 else -1.0
    t = 0.0
    min_dt = 1e-14 * max(abs(t_end), 1.0)
    while sign * (t_end - t) > 0:
        if len(props) >= max_steps:
            raise StepFailure(f"exceeded {max_steps} steps")
        dt = min(dt, abs(t_end - t))
        u, ui, err = _step(h, t, sign * dt, two)
        if not np.isfinite(err):
            err = np.inf
        if err <= tol:
            t = t_end if abs(t_end - t) <= dt * (1 + 1e-12) else t + sign * dt
            times.append(t)
            props.append(u)
            invs.append(ui)
        fac = 4.0 if err == 0 else min(4.0, max(0.2, 0.9 * (tol / err) ** 0.2))
        dt *= fac
        if dt < min_dt:
            raise StepFailure(f"step size underflow at t={t:.6g}")
    rec = _StepRecord(np.array(times), props, invs)
    h._cache[key] = rec
    return rec


def evolve_pair(
    h: TimeDependentHamiltonian,
    psi0,
    psitilde0,
    t_end: float,
    tol: float = DEFAULT_TOL,
    times: Optional[Sequence[float]] = None,
    max_steps: int = MAX_STEPS,
) -> Trajectory:
    """Integrate the Schroedinger pair from t = 0 to ``t_end``.

    With ``times`` omitted the trajectory is reported at the accepted step
    points; otherwise at the requested times (dense output re-steps from the
    closest earlier step point, within the same error control).
    """
    rec = _integrate(h, t_end, tol, max_steps)
    psi = np.asarray(psi0, dtype=complex)
    psit = np.asarray(psitilde0, dtype=complex)
    n = len(rec.props)
    states = np.empty((n + 1, psi.size), dtype=complex)
    adj = np.empty_like(states)
    states[0], adj[0] = psi, psit
    for k in range(n):
        states[k + 1] = rec.props[k] @ states[k]
        adj[k + 1] = adj[k] @ rec.inverses[k]
    if times is None:
        out_t, out_s, out_a = rec.times, states, adj
    else:
        out_t = np.asarray(times, dtype=float)
        out_s = np.empty((out_t.size, psi.size), dtype=complex)
        out_a = np.empty_like(out_s)
        two = psi.size == 2
        for j, tj in enumerate(out_t):
            k = int(np.clip(np.searchsorted(rec.times, tj, side="right") - 1, 0, n))
            if k < n and tj == rec.times[k + 1]:
                k += 1
            if tj == rec.times[k]:
                out_s[j], out_a[j] = states[k], adj[k]
                continue
            u, ui, _ = _step(h, rec.times[k], tj - rec.times[k], two)
            out_s[j] = u @ states[k]
            out_a[j] = adj[k] @ ui
    pairs = np.einsum("ki,ki->k", out_a, out_s)
    return Trajectory(np.asarray(out_t), out_s, out_a, pairs, steps=n)


def period_propagator(h: TimeDependentHamiltonian, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Monodromy U(T): columns are the evolved identity columns."""
    if h.period is None:
        raise ValueError("Hamiltonian is not periodic")
    rec = _integrate(h, h.period, tol)
    u = np.eye(h.dim, dtype=complex)
    for p in rec.props:
        u = p @ u
    return u


def cyclic_states(U) -> list:
    """Eigenpairs of the monodromy with principal phi = -i log(eigenvalue)."""
    sys = biorthogonal_decompose(np.asarray(U, dtype=complex))
    chi, chit = sys.normalized()
    out = []
    for k, lam in enumerate(sys.eigenvalues):
        phi = complex(-1j * cmath.log(lam))
        out.append(CyclicState(chi[:, k].copy(), chit[k].copy(), phi, phi, 0))
    return out


def _quadratic_integrals(g0, gm, g1, dt, s):
    """int_0^{s dt} of the quadratic through (0, g0), (dt/2, gm), (dt, g1)."""
    i0 = 2 * (s**3 / 3 - 0.75 * s**2 + 0.5 * s)
    im = -4 * (s**3 / 3 - 0.5 * s**2)
    i1 = 2 * (s**3 / 3 - 0.25 * s**2)
    return dt * (i0 * g0 + im * gm + i1 * g1)


def _overlap_phase(chi, chit):
    """Symmetric overlap-log sum over a closed chain (last point linked back to the first)."""
    chi = np.vstack([chi, chi[:1]])
    chit = np.vstack([chit, chit[:1]])
    fwd = np.log(np.einsum("ki,ki->k", chit[:-1], chi[1:]))
    bwd = np.log(np.einsum("ki,ki->k", chit[1:], chi[:-1]))
    return complex(0.5j * (fwd.sum() - bwd.sum()))


def phases_decompose(
    h: TimeDependentHamiltonian,
    c: CyclicState,
    tol: float = DEFAULT_TOL,
    reference: float = 0.0,
    strict: bool = True,
) -> "PhaseResult":
    """Split the total phase of a cyclic state into dynamical and geometric parts.

    Route one: delta = -int <Psit|H|Psi> / <Psit|Psi> dt by composite Simpson
    on the accepted steps (midpoints from dense output), gamma = phi - delta.
    Re gamma is reduced to the 2 pi branch nearest ``reference``.

    Route two: the symmetric overlap-log sum around the closed chain of
    chi = exp(-i f) Psi, f(t) = delta(t) + (t / T) gamma, sampled at
    1, 2 and 4 points per step and Romberg-combined.  It uses only the
    evolved states, so a wrong total phase or a non-cyclic state shows up
    as a mismatch.

    Raises GaugeMismatch if the routes differ by more than 100 tol (only
    reported in diagnostics when ``strict`` is false).
    """
    from .geophase import PhaseMethod, PhaseResult

    T = h.period
    rec = _integrate(h, T, tol)
    t = rec.times
    dts = np.diff(t)
    frac = np.array([0.0, 0.25, 0.5, 0.75])
    all_t = np.concatenate([(t[:-1, None] + dts[:, None] * frac[None, :]).ravel(), t[-1:]])
    traj = evolve_pair(h, c.state, c.adjoint, T, tol, times=all_t)
    norm = traj.pair_products[0]
    g = np.array([traj.adjoint_states[k] @ h(tk) @ traj.states[k] for k, tk in enumerate(all_t)]) / norm
    g0, gm, g1 = g[0:-1:4], g[2::4], g[4::4]
    run = np.concatenate([[0j], np.cumsum(_quadratic_integrals(g0, gm, g1, dts, 1.0))])
    delta_t = np.empty(all_t.size, dtype=complex)
    delta_t[-1] = -run[-1]
    for j, s in enumerate(frac):
        delta_t[j:-1:4] = -(run[:-1] + _quadratic_integrals(g0, gm, g1, dts, s))
    delta = complex(delta_t[-1])
    phi = complex(c.phi)

    gamma = phi - delta
    k = int(np.round((gamma.real - reference) / (2 * np.pi)))
    gamma -= 2 * np.pi * k

    # reduced gamma keeps f(T) = phi mod 2 pi without winding the chain
    f = delta_t + all_t / T * gamma
    rot = np.exp(-1j * f)
    chi = (traj.states * rot[:, None])[:-1]
    chit = (traj.adjoint_states / (rot[:, None] * norm))[:-1]
    g1_, g2_, g4_ = (_overlap_phase(chi[::m], chit[::m]) for m in (4, 2, 1))
    r12 = (4 * g2_ - g1_) / 3
    r24 = (4 * g4_ - g2_) / 3
    route_two = (16 * r24 - r12) / 15
    route_two -= 2 * np.pi * np.round((route_two.real - gamma.real) / (2 * np.pi))
    mismatch = abs(route_two - gamma)
    diag = {
        "route_two": complex(route_two),
        "route_mismatch": float(mismatch),
        "winding": k,
        "steps": len(rec.props),
        "pair_drift": traj.max_pair_drift(),
    }
    if strict and mismatch > 100 * tol:
        raise GaugeMismatch(f"geometric phase routes differ by {mismatch:.3e}")
    return PhaseResult(complex(gamma), PhaseMethod.CYCLIC, dynamical_phase=delta, total_phase=phi, diagnostics=diag)


def rwa_hamiltonian(p: DrivenAtomParams) -> TimeDependentHamiltonian:
    """H(t) = [[-i gamma_a/2, V* e^{i Delta t}], [V e^{-i Delta t}, -i gamma_b/2]]."""

    def evaluate(t):
        v = p.drive(t) * cmath.exp(-1j * p.Delta * t)
        return np.array([[-0.5j * p.gamma_a, v.conjugate()], [v, -0.5j * p.gamma_b]])

    return TimeDependentHamiltonian(evaluate, p.drive_period)


def rwa_to_static(p: DrivenAtomParams, t: float) -> TwoLevelHamiltonian:
    """Static two-level form after removing the e^{-+i Delta t} carrier.

    The frame change diag(e^{i Delta t/2}, e^{-i Delta t/2}) gives
    lambda0 = -i(gamma_a + gamma_b)/4, X + iY = V(t), Z = (Delta - i delta)/2
    with delta = delta_decay, so the gap is sqrt(|2V|^2 + (Delta - i delta)^2).
    """
    v = p.drive(t)
    z = 0.5 * (p.Delta - 1j * p.delta_decay)
    return TwoLevelHamiltonian(-0.25j * (p.gamma_a + p.gamma_b), ComplexPoint3(v.real + 0j, v.imag + 0j, z))


def static_parameters(p: DrivenAtomParams, t: float) -> dict:
    """(x, y, z, epsilon) of the complex-Dirac form Z = z - i epsilon, plus lambda0 and the gap.

    In this convention epsilon = delta_decay / 2 and z = Delta / 2.
    """
    h = rwa_to_static(p, t)
    gap = 2 * np.sqrt(complex(h.point.radius_sq()))
    return {
        "x": h.point.x.real,
        "y": h.point.y.real,
        "z": h.point.z.real,
        "epsilon": -h.point.z.imag,
        "lambda0": h.lambda0,
        "gap": complex(gap),
    }


def rotating_field(B: float, theta: float, period: float) -> TimeDependentHamiltonian:
    """H(t) = B n(t) . sigma with n on a cone of half-angle theta, one turn per period."""
    st, ct = math.sin(theta), math.cos(theta)
    w = 2 * math.pi / period

    def evaluate(t):
        e = B * st * cmath.exp(1j * w * t)
        return np.array([[B * ct, e.conjugate()], [e, -B * ct]])

    return TimeDependentHamiltonian(evaluate, period)
