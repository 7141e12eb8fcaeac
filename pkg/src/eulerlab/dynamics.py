"""Trajectory integration on the 3-torus and chaos diagnostics.

Integration uses an adaptive embedded Runge-Kutta pair of order 8 with
dense output (scipy's DOP853 stepper), driven step by step so that rejected
attempts can be counted and the dense interpolants scanned for section
crossings.  The field and its Jacobian are evaluated by exact trig
summation from the spectral coefficients.  Positive topological entropy is
proxied by the largest Lyapunov exponent (tangent flow with periodic
renormalization); reports label it as a proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .errors import NoCrossings, StepSizeUnderflow
from .spectral import TWO_PI, SpectralVectorField

# One-time calibrated chaos threshold for the showcase amplitudes
# (1, 0.5, 0.1): half the median of the positive long-run estimates over
# 20 separatrix seeds at T = 1e5 (scripts/calibrate_chaos_threshold.py,
# frozen output in scripts/chaos_threshold.json).
CHAOS_THRESHOLD = 0.023942274037632105


@dataclass(frozen=True)
class Trajectory:
    """Solution samples (t strictly increasing, x reported in [0, 2*pi))."""

    ts: np.ndarray
    xs: np.ndarray
    steps: int
    rejected: int
    nfev: int
    tol: float


@dataclass(frozen=True)
class PoincareSection:
    """Crossings of the plane x[axis] = level with the declared velocity sign."""

    axis: int
    level: float
    direction: int
    points: np.ndarray  # (m, 2): the two non-section coordinates, wrapped
    times: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest-exponent estimate with its running history (t, estimate)."""

    lambda_max: float
    history: np.ndarray
    renorm_interval: float

    def tail_spread(self, fraction=0.1):
        m = max(2, int(len(self.history) * fraction))
        tail = self.history[-m:, 1]
        return float(np.max(tail) - np.min(tail))


@dataclass(frozen=True)
class FirstIntegralReport:
    """Constancy gap of a candidate integral and sup |grad F . v| on a grid."""

    range_gap: float
    derivative_sup: float


class _CountingDOP853(DOP853):
    """DOP853 that counts error-norm evaluations, i.e. step attempts."""

    def __init__(self, *args, **kwargs):
        self.attempts = 0
        super().__init__(*args, **kwargs)

    def _estimate_error_norm(self, K, h, scale):
        self.attempts += 1
        return super()._estimate_error_norm(K, h, scale)


def _make_solver(rhs, t0, y0, t1, tol):
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(rhs(t0, y0))):
        raise StepSizeUnderflow("right-hand side not finite at the initial state")
    return _CountingDOP853(rhs, t0, y0, t1, rtol=tol, atol=tol)


def field_rhs(v: SpectralVectorField):
    """RHS closure dx/dt = v(x) by direct trig summation."""
    K, C = v.mode_arrays()

    def rhs(t, y):
        e = np.exp(1j * (K @ y))
        return (e @ C).real

    return rhs


def tangent_rhs(v: SpectralVectorField, ncols):
    """RHS for (x, W) with W a 3 x ncols tangent block, dW = J(x) W."""
    K, C = v.mode_arrays()
    iK = 1j * K

    def rhs(t, y):
        x = y[:3]
        W = y[3:].reshape(3, ncols)
        e = np.exp(1j * (K @ x))
        vx = (e @ C).real
        J = ((C * e[:, None]).T @ iK).real
        return np.concatenate([vx, (J @ W).ravel()])

    return rhs


def integrate(v: SpectralVectorField, x0, T: float, tol: float) -> Trajectory:
    """Integrate dx/dt = v(x) from x0 for time T at local tolerance tol."""
    if T <= 0:
        raise ValueError("T must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = field_rhs(v)
    ts = [0.0]
    ys = [np.asarray(x0, dtype=float)]
    solver = _make_solver(rhs, 0.0, ys[0], T, tol)
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"controller stalled at t = {solver.t:.6g}")
        ts.append(solver.t)
        ys.append(solver.y.copy())
    steps = len(ts) - 1
    return Trajectory(
        ts=np.array(ts),
        xs=np.mod(np.array(ys), TWO_PI),
        steps=steps,
        rejected=max(0, solver.attempts - steps),
        nfev=solver.nfev,
        tol=tol,
    )


def endpoint(v, x0, T, tol):
    """Unwrapped endpoint of the flow after time T (cover-space coordinates)."""
    rhs = field_rhs(v)
    solver = _make_solver(rhs, 0.0, x0, T, tol)
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"controller stalled at t = {solver.t:.6g}")
    return solver.y.copy()


def poincare(v: SpectralVectorField, plane, direction, x0, N: int,
             tol=1e-10, max_time=10000.0, subsamples=8) -> PoincareSection:
    """First N crossings of the plane x[axis] = level with the given velocity sign.

    Crossings are located on the dense output of each accepted step:
    sign-change bracketing on cover-space levels level + 2*pi*m, then
    root refinement to machine tolerance in the section coordinate.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    axis, level = int(plane[0]), float(plane[1])
    direction = int(np.sign(direction))
    if direction == 0:
        raise ValueError("direction must be +1 or -1")
    rhs = field_rhs(v)
    hits_t, hits_x, hits_r = [], [], []
    solver = _make_solver(rhs, 0.0, x0, max_time, tol)
    while solver.status == "running" and len(hits_t) < N:
        solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"controller stalled at t = {solver.t:.6g}")
        seg = solver.dense_output()
        tt = np.linspace(solver.t_old, solver.t, subsamples + 1)
        qq = seg(tt)[axis]
        for a in range(subsamples):
            lo, hi = tt[a], tt[a + 1]
            qa, qb = qq[a], qq[a + 1]
            if qa == qb:
                continue
            mlo = math.ceil((min(qa, qb) - level) / TWO_PI)
            mhi = math.floor((max(qa, qb) - level) / TWO_PI)
            for m in range(mlo, mhi + 1):
                target = level + TWO_PI * m
                if (qa - target) == 0.0 and a > 0:
                    continue  # counted by the previous bracket
                if (qa - target) * (qb - target) > 0:
                    continue
                tc = brentq(lambda s: seg(s)[axis] - target, lo, hi, xtol=1e-14)
                xc = seg(tc)
                if np.sign(rhs(tc, xc)[axis]) != direction:
                    continue
                hits_t.append(tc)
                others = [xc[i] % TWO_PI for i in range(3) if i != axis]
                hits_x.append(others)
                hits_r.append(abs(xc[axis] - target))
                if len(hits_t) >= N:
                    break
            if len(hits_t) >= N:
                break
    if len(hits_t) < N:
        raise NoCrossings(
            f"found {len(hits_t)} of {N} requested crossings within t <= {max_time}"
        )
    return PoincareSection(
        axis=axis,
        level=level,
        direction=direction,
        points=np.array(hits_x),
        times=np.array(hits_t),
        residuals=np.array(hits_r),
    )


def lyapunov_max(v: SpectralVectorField, x0, T: float, renorm: float,
                 tol=1e-9) -> LyapunovEstimate:
    """Largest Lyapunov exponent by tangent-flow renormalization.

    Integrates (x, w) with dw = J(x) w, rescaling w to unit length every
    `renorm` time units and averaging the accumulated log stretching.  The
    Jacobian comes from exact spectral differentiation of the field.
    """
    if not (T > renorm > 0):
        raise ValueError("need T >> renorm > 0")
    rhs = tangent_rhs(v, 1)
    x = np.asarray(x0, dtype=float)
    w = np.array([0.6, 0.64, 0.48])
    w /= np.linalg.norm(w)
    chunks = int(round(T / renorm))
    log_sum = 0.0
    history = []
    t = 0.0
    for _ in range(chunks):
        y0 = np.concatenate([x, w])
        solver = _make_solver(rhs, t, y0, t + renorm, tol)
        while solver.status == "running":
            solver.step()
            if solver.status == "failed":
                raise StepSizeUnderflow(f"controller stalled at t = {solver.t:.6g}")
        t = solver.t
        x = solver.y[:3]
        w = solver.y[3:]
        nrm = np.linalg.norm(w)
        log_sum += math.log(nrm)
        w /= nrm
        history.append((t, log_sum / t))
    return LyapunovEstimate(
        lambda_max=log_sum / t,
        history=np.array(history),
        renorm_interval=renorm,
    )


def tangent_map(v: SpectralVectorField, x0, T: float, tol: float):
    """Propagate the full 3x3 tangent map along the flow (no renormalization)."""
    rhs = tangent_rhs(v, 3)
    y0 = np.concatenate([np.asarray(x0, dtype=float), np.eye(3).ravel()])
    solver = _make_solver(rhs, 0.0, y0, T, tol)
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"controller stalled at t = {solver.t:.6g}")
    return solver.y[:3], solver.y[3:].reshape(3, 3)


def first_integral_report(v: SpectralVectorField, F, grid: int) -> FirstIntegralReport:
    """Range gap of F and sup |grad F . v| over the uniform grid."""
    from .spectral import evaluate_on_grid, evaluate_scalar_on_grid

    n = max(grid, 2 * max(v.truncation_radius, F.truncation_radius) + 1)
    fvals = evaluate_scalar_on_grid(F, n)
    gap = float(np.max(fvals) - np.min(fvals))
    gF = F.gradient()
    gvals = evaluate_on_grid(gF, n)
    vvals = evaluate_on_grid(v, n)
    dsup = float(np.max(np.abs(np.sum(gvals * vvals, axis=-1))))
    return FirstIntegralReport(range_gap=gap, derivative_sup=dsup)


def separatrix_seeds(b: float, count: int, jitter=0.02, base_key=7):
    """Deterministic seeds near the C = 0 integrable separatrix level.

    For the C = 0 field with A = 1 the quantity cos(x3) + b sin(x1) is
    conserved; its saddle level 1 - b carries the layer that turns chaotic
    once C > 0.  Seeds are placed on that level with a small jitter.
    """
    seeds = []
    for j in range(count):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([base_key, j], dtype=np.uint64))
        )
        x1 = gen.uniform(0.0, TWO_PI)
        x2 = gen.uniform(0.0, TWO_PI)
        target = 1.0 - b + gen.uniform(-jitter, jitter)
        c3 = np.clip(target - b * math.sin(x1), -1.0, 1.0)
        seeds.append(np.array([x1, x2, math.acos(c3)]))
    return seeds


def random_torus_seeds(count: int, base_key=11):
    """Deterministic uniform initial conditions on the torus."""
    seeds = []
    for j in range(count):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([base_key, j], dtype=np.uint64))
        )
        seeds.append(gen.uniform(0.0, TWO_PI, size=3))
    return seeds
