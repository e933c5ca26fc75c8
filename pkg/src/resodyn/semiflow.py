"""Time integration of the deformation family u' = -A u + H(s, u), bound
conformance checks, the kernel blow-up demonstration, and the s=0 product
flow identity."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import SplitIndexSet, mode_mask
from .errors import ConfigurationError, DivergenceSignal
from .fields import NonlinearField, galerkin_F
from .spectral import (GalerkinState, ProblemConfig, SpectralBasis,
                       fractional_weights, semigroup_apply)

__all__ = [
    "IntegratorSettings",
    "Trajectory",
    "AprioriBounds",
    "BoundReport",
    "BlowupReport",
    "HomotopyBox",
    "homotopy_field",
    "integrate",
    "blowup_demo",
    "apriori_bounds",
    "check_bounded_solution",
    "product_flow_check",
    "sample_states_in_box",
    "trajectory_norms",
]

NORM_NAMES = ("l2", "fractional", "P1_seminorm", "P2_seminorm",
              "Qminus_alpha", "Qplus_alpha")

SCHEMES = ("ETD1", "IMEX-Euler")


@dataclass(frozen=True)
class IntegratorSettings:
    """Step size, horizon, scheme, and the drift tolerance of the
    boundedness detector.

    ETD1 is exact on the diagonal linear part, so its step size is limited by
    accuracy only; the IMEX-Euler alternative must satisfy
    dt <= 0.25 / max|mu_J - lambda_k| (checked at integration time).
    """

    dt: float
    T: float
    scheme: str = "ETD1"
    tol_drift: float = 1e-3
    store_every: int = 1
    divergence_threshold: float = 1e8

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0:
            raise ConfigurationError("dt and T must be positive")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.tol_drift <= 0:
            raise ConfigurationError("tol_drift must be positive")
        if self.store_every < 1:
            raise ConfigurationError("store_every must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Recorded solution samples with per-sample norms.

    ``coeffs`` has shape (n, m, J); ``norms`` shape (n, 6) with columns
    NORM_NAMES.  ``diverged`` marks trajectories cut short by the divergence
    guard.
    """

    times: np.ndarray
    coeffs: np.ndarray
    norms: np.ndarray
    s: float
    diverged: bool = False

    def __post_init__(self):
        n = self.times.size
        if self.coeffs.shape[0] != n or self.norms.shape[0] != n:
            raise ConfigurationError("trajectory arrays must have equal lengths")

    def state(self, i: int) -> GalerkinState:
        return GalerkinState(self.coeffs[i])

    @property
    def final(self) -> GalerkinState:
        return GalerkinState(self.coeffs[-1])

    def norm_series(self, name: str) -> np.ndarray:
        return self.norms[:, NORM_NAMES.index(name)]

    def to_csv(self, include_coeffs: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        header = ["t", *NORM_NAMES]
        m, J = self.coeffs.shape[1:]
        if include_coeffs:
            header += [f"c_{k + 1}_{j + 1}" for k in range(m) for j in range(J)]
        writer.writerow(header)
        for i, t in enumerate(self.times):
            row = [f"{t:.17g}"] + [f"{v:.17g}" for v in self.norms[i]]
            if include_coeffs:
                row += [f"{v:.17g}" for v in self.coeffs[i].ravel()]
            writer.writerow(row)
        return buf.getvalue()


def trajectory_norms(basis: SpectralBasis, split: SplitIndexSet, config: ProblemConfig,
                     coeffs: np.ndarray) -> np.ndarray:
    """The six monitored norms of one coefficient matrix."""
    weights = fractional_weights(basis, config) ** config.alpha
    sq = coeffs ** 2
    l2 = np.sqrt(np.sum(sq))
    frac = np.sqrt(np.sum((weights * coeffs) ** 2))
    p1 = np.sqrt(np.sum(sq[mode_mask(split, "P1")]))
    p2 = np.sqrt(np.sum(sq[mode_mask(split, "P2")]))
    qm = np.sqrt(np.sum(((weights * coeffs) ** 2)[mode_mask(split, "Qminus")]))
    qp = np.sqrt(np.sum(((weights * coeffs) ** 2)[mode_mask(split, "Qplus")]))
    return np.array([l2, frac, p1, p2, qm, qp])


def homotopy_field(field: NonlinearField, basis: SpectralBasis, split: SplitIndexSet,
                   s: float, u: GalerkinState) -> GalerkinState:
    """Deformed reaction term
    H(s, u) = Q0 F(s Q- u + s Q+ u + Q0 u) + s Q- F(u) + s Q+ F(u).

    At s=1 the three projections telescope back to F(u); at s=0 only the
    kernel projection of the kernel-restricted field survives.
    """
    if not (0.0 <= s <= 1.0):
        raise ConfigurationError(f"s must lie in [0, 1], got {s}")
    if s == 1.0:
        return galerkin_F(field, basis, u)
    q0 = mode_mask(split, "Q0")
    out_mask = mode_mask(split, "Qminus") | mode_mask(split, "Qplus")
    inner = np.where(q0, u.coeffs, s * u.coeffs)
    f_inner = galerkin_F(field, basis, GalerkinState(inner)).coeffs
    H = np.where(q0, f_inner, 0.0)
    if s != 0.0:
        f_full = galerkin_F(field, basis, u).coeffs
        H = H + np.where(out_mask, s * f_full, 0.0)
    return GalerkinState(H)


def _etd_factors(basis: SpectralBasis, config: ProblemConfig, dt: float):
    z = dt * (basis.mu[None, :] - config.lam_array()[:, None])
    E = np.exp(-z)
    # phi1(z) = (1 - e^{-z})/z with the analytic limit 1 at z = 0; resonance
    # puts exact zeros on the diagonal, so the limit branch is load-bearing
    small = np.abs(z) < 1e-12
    P = np.where(small, 1.0, (1.0 - E) / np.where(small, 1.0, z))
    return E, P


def integrate(field: NonlinearField, basis: SpectralBasis, split: SplitIndexSet,
              config: ProblemConfig, s: float, u0: GalerkinState,
              settings: IntegratorSettings) -> Trajectory:
    """March u' = -A u + H(s, u) from u0 over [0, T].

    ETD1: u_{n+1} = e^{-dt A} u_n + dt phi1(dt A) H(s, u_n), exact on the
    linear part.  IMEX-Euler treats the linear part implicitly and H
    explicitly.  Raises DivergenceSignal when the L2 norm passes the
    divergence threshold; the partial trajectory rides on the signal.
    """
    if u0.coeffs.shape != (config.m, basis.J):
        raise ConfigurationError("initial state shape mismatch")
    dt, T = settings.dt, settings.T
    if settings.scheme == "IMEX-Euler":
        zmax = float(np.max(np.abs(basis.mu[None, :] - config.lam_array()[:, None])))
        if dt > 0.25 / zmax:
            raise ConfigurationError(
                f"IMEX-Euler requires dt <= {0.25 / zmax:.3e} for this spectrum, got {dt}"
            )
        z = dt * (basis.mu[None, :] - config.lam_array()[:, None])
        denom = 1.0 + z
    else:
        E, P = _etd_factors(basis, config, dt)
    nsteps = int(round(T / dt))
    c = u0.coeffs.copy()
    times = [0.0]
    coeffs = [c.copy()]
    for n in range(nsteps):
        H = homotopy_field(field, basis, split, s, GalerkinState(c)).coeffs
        if settings.scheme == "ETD1":
            c = E * c + dt * P * H
        else:
            c = (c + dt * H) / denom
        t = (n + 1) * dt
        if np.sqrt(np.sum(c ** 2)) > settings.divergence_threshold:
            times.append(t)
            coeffs.append(c.copy())
            partial = _assemble(basis, split, config, times, coeffs, s, diverged=True)
            raise DivergenceSignal(exit_time=t, trajectory=partial)
        if (n + 1) % settings.store_every == 0 or n + 1 == nsteps:
            times.append(t)
            coeffs.append(c.copy())
    return _assemble(basis, split, config, times, coeffs, s, diverged=False)


def _assemble(basis, split, config, times, coeffs, s, diverged):
    times = np.asarray(times)
    coeffs = np.asarray(coeffs)
    norms = np.array([trajectory_norms(basis, split, config, c) for c in coeffs])
    return Trajectory(times=times, coeffs=coeffs, norms=norms, s=float(s),
                      diverged=diverged)


@dataclass(frozen=True)
class BlowupReport:
    """Linear fit of the kernel coefficients under a constant kernel forcing."""

    slopes: dict
    expected: dict
    max_residual: float
    qplus_alpha_initial: float
    qplus_alpha_final: float

    def to_dict(self) -> dict:
        return {
            "slopes": {f"{k},{j}": v for (k, j), v in self.slopes.items()},
            "expected": {f"{k},{j}": v for (k, j), v in self.expected.items()},
            "max_residual": self.max_residual,
            "qplus_alpha_initial": self.qplus_alpha_initial,
            "qplus_alpha_final": self.qplus_alpha_final,
        }


def blowup_demo(basis: SpectralBasis, split: SplitIndexSet, config: ProblemConfig,
                v0: GalerkinState, T: float,
                settings: Optional[IntegratorSettings] = None,
                u0: Optional[GalerkinState] = None) -> tuple[Trajectory, BlowupReport]:
    """Integrate u' = -A u + v0 for a kernel-valued constant forcing.

    The kernel projection then drifts linearly, Q0 u(t) = Q0 u(0) + t v0, so
    no bounded full solution can exist; the report returns the fitted slope
    of every kernel coefficient (expected: the corresponding v0 coefficient).
    """
    kmask = mode_mask(split, "Q0")
    if np.any(v0.coeffs[~kmask] != 0.0):
        raise ConfigurationError("v0 must be supported on kernel modes only")
    if not np.any(v0.coeffs != 0.0):
        raise ConfigurationError("v0 must be nonzero")
    if settings is None:
        settings = IntegratorSettings(dt=1e-3, T=T)
    else:
        settings = IntegratorSettings(dt=settings.dt, T=T, scheme=settings.scheme,
                                      tol_drift=settings.tol_drift,
                                      store_every=settings.store_every,
                                      divergence_threshold=settings.divergence_threshold)
    vvals = basis.values(v0.coeffs)
    m = config.m

    def const_eval(x, U, dU):
        return vvals[:, : x.size] if x.size == vvals.shape[1] else np.repeat(
            vvals[:, :1], x.size, axis=1)

    const_field = NonlinearField(
        name="blowup-forcing", m=m, eval=const_eval, sigma=np.zeros(m),
        f_plus=lambda x: vvals[:, : x.size], f_minus=lambda x: vvals[:, : x.size],
        bound_C3=float(np.max(np.abs(vvals))),
    )
    start = u0 if u0 is not None else GalerkinState.zeros(m, basis.J)
    traj = integrate(const_field, basis, split, config, 1.0, start, settings)
    slopes, expected = {}, {}
    max_res = 0.0
    for (k, j) in sorted(split.kernel_modes()):
        series = traj.coeffs[:, k - 1, j - 1]
        fit = np.polyfit(traj.times, series, 1)
        res = float(np.max(np.abs(series - np.polyval(fit, traj.times))))
        slopes[(k, j)] = float(fit[0])
        expected[(k, j)] = float(v0.coeffs[k - 1, j - 1])
        max_res = max(max_res, res)
    return traj, BlowupReport(
        slopes=slopes, expected=expected, max_residual=max_res,
        qplus_alpha_initial=float(traj.norm_series("Qplus_alpha")[0]),
        qplus_alpha_final=float(traj.norm_series("Qplus_alpha")[-1]),
    )


@dataclass(frozen=True)
class AprioriBounds:
    """Computable constants of the trajectory bounds.

    R0_minus = C5 C6 C7 ||Q-|| / c and
    R0_plus = C5 C6 ||Q+|| (e^{-c}/c + 1/(1-alpha)), with C5 = 1 for the
    diagonal semigroup, C7 the finite-dimensional norm-equivalence constant
    on the negative block, and c the spectral gap.
    """

    c: float
    C5: float
    C6: float
    C7: float
    alpha: float
    norm_Qminus: float
    norm_Qplus: float
    R0_minus: float
    R0_plus: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("c", "C5", "C6", "C7", "alpha", "norm_Qminus", "norm_Qplus",
                 "R0_minus", "R0_plus")}


def apriori_bounds(basis: SpectralBasis, split: SplitIndexSet, config: ProblemConfig,
                   C6: float) -> AprioriBounds:
    """Plug-in evaluation of the bound constants from the spectral gap."""
    c = split.gap
    if not (c > 0):
        raise ConfigurationError("spectral gap must be positive; check the classification")
    weights = fractional_weights(basis, config) ** config.alpha
    minus = mode_mask(split, "Qminus")
    plus = mode_mask(split, "Qplus")
    C5 = 1.0
    C7 = float(np.max(weights[minus])) if minus.any() else 0.0
    nQm = 1.0 if minus.any() else 0.0
    nQp = 1.0 if plus.any() else 0.0
    R0_minus = C5 * C6 * C7 * nQm / c
    R0_plus = C5 * C6 * nQp * (np.exp(-c) / c + 1.0 / (1.0 - config.alpha))
    return AprioriBounds(c=c, C5=C5, C6=float(C6), C7=C7, alpha=config.alpha,
                         norm_Qminus=nQm, norm_Qplus=nQp,
                         R0_minus=float(R0_minus), R0_plus=float(R0_plus))


@dataclass(frozen=True)
class BoundReport:
    """Post-transient conformance of a trajectory against the a priori radii."""

    ratios: dict
    maxima: dict
    slope_P1: float
    unbounded: bool
    transient_fraction: float

    def to_dict(self) -> dict:
        return {"ratios": dict(self.ratios), "maxima": dict(self.maxima),
                "slope_P1": self.slope_P1, "unbounded": self.unbounded,
                "transient_fraction": self.transient_fraction}


def _ratio(value: float, bound: float) -> float:
    if bound == 0.0:
        return 0.0 if value <= 1e-12 else float("inf")
    return value / bound


def check_bounded_solution(trajectory: Trajectory, bounds: AprioriBounds,
                           R1: float, R2: float, transient_fraction: float = 0.2,
                           tol_drift: float = 1e-3) -> BoundReport:
    """Check the four componentwise norms against their radii after the
    transient, and flag kernel drift.

    Boundedness detection is window growth: the run is flagged unbounded if
    the linear-fit slope of the first-block kernel seminorm over the last
    half of the horizon exceeds tol_drift (or the integrator diverged).
    """
    n = trajectory.times.size
    start = int(np.floor(transient_fraction * n))
    start = min(start, n - 1)
    tail = slice(start, None)
    maxima = {
        "Qminus_alpha": float(np.max(trajectory.norm_series("Qminus_alpha")[tail])),
        "Qplus_alpha": float(np.max(trajectory.norm_series("Qplus_alpha")[tail])),
        "P1_seminorm": float(np.max(trajectory.norm_series("P1_seminorm")[tail])),
        "P2_seminorm": float(np.max(trajectory.norm_series("P2_seminorm")[tail])),
    }
    ratios = {
        "Qminus_alpha": _ratio(maxima["Qminus_alpha"], bounds.R0_minus),
        "Qplus_alpha": _ratio(maxima["Qplus_alpha"], bounds.R0_plus),
        "P1_seminorm": _ratio(maxima["P1_seminorm"], R1),
        "P2_seminorm": _ratio(maxima["P2_seminorm"], R2),
    }
    half = slice(n // 2, None)
    t = trajectory.times[half]
    p1 = trajectory.norm_series("P1_seminorm")[half]
    slope = float(np.polyfit(t, p1, 1)[0]) if t.size >= 2 else 0.0
    unbounded = trajectory.diverged or slope > tol_drift
    return BoundReport(ratios=ratios, maxima=maxima, slope_P1=slope,
                       unbounded=unbounded, transient_fraction=transient_fraction)


@dataclass(frozen=True)
class HomotopyBox:
    """Product box M: combined fractional radius R0+1 on the nonkernel block,
    kernel-block seminorm radii R1+1 and R2+1."""

    R0: float
    R1: float
    R2: float

    def membership(self, trajectory: Trajectory) -> np.ndarray:
        q = np.sqrt(trajectory.norm_series("Qminus_alpha") ** 2
                    + trajectory.norm_series("Qplus_alpha") ** 2)
        inside = (q <= self.R0 + 1.0)
        inside &= trajectory.norm_series("P1_seminorm") <= self.R1 + 1.0
        inside &= trajectory.norm_series("P2_seminorm") <= self.R2 + 1.0
        return inside

    def contains(self, trajectory: Trajectory) -> bool:
        return bool(np.all(self.membership(trajectory)))

    def to_dict(self) -> dict:
        return {"R0": self.R0, "R1": self.R1, "R2": self.R2}


def sample_states_in_box(basis: SpectralBasis, split: SplitIndexSet,
                         config: ProblemConfig, box: HomotopyBox, count: int,
                         seed: int = 0, fill: float = 0.9) -> list[GalerkinState]:
    """Random initial states strictly inside the box (fill < 1 keeps them off
    the boundary)."""
    rng = np.random.default_rng(seed)
    weights = fractional_weights(basis, config) ** config.alpha
    masks = {name: mode_mask(split, name) for name in ("P1", "P2")}
    out_mask = mode_mask(split, "Qminus") | mode_mask(split, "Qplus")
    states = []
    for _ in range(count):
        c = np.zeros((config.m, basis.J))
        for name, radius in (("P1", box.R1 + 1.0), ("P2", box.R2 + 1.0)):
            mask = masks[name]
            k = int(mask.sum())
            if k == 0:
                continue
            vec = rng.normal(size=k)
            nrm = np.linalg.norm(vec)
            if nrm > 0:
                vec *= fill * radius * rng.uniform() / nrm
            c[mask] = vec
        k = int(out_mask.sum())
        if k:
            vec = rng.normal(size=k)
            frac = np.linalg.norm(weights[out_mask] * vec)
            if frac > 0:
                vec *= fill * (box.R0 + 1.0) * rng.uniform() / frac
            c[out_mask] = vec
        states.append(GalerkinState(c))
    return states


def product_flow_check(field: NonlinearField, basis: SpectralBasis,
                       split: SplitIndexSet, config: ProblemConfig,
                       u0: GalerkinState, T: float,
                       settings: IntegratorSettings) -> float:
    """Max L2 discrepancy between the full s=0 integration and the split one.

    At s=0 the deformed system decouples into the kernel-only reduced flow
    and the linear semigroup on the complement; the full trajectory must
    agree with their superposition.
    """
    settings = IntegratorSettings(dt=settings.dt, T=T, scheme=settings.scheme,
                                  tol_drift=settings.tol_drift,
                                  store_every=settings.store_every,
                                  divergence_threshold=settings.divergence_threshold)
    full = integrate(field, basis, split, config, 0.0, u0, settings)
    kmask = mode_mask(split, "Q0")
    kc = np.where(kmask, u0.coeffs, 0.0)
    out0 = GalerkinState(np.where(kmask, 0.0, u0.coeffs))
    nsteps = int(round(T / settings.dt))
    kernel_track = {0: kc.copy()}
    c = kc.copy()
    for n in range(nsteps):
        fk = galerkin_F(field, basis, GalerkinState(c)).coeffs
        c = c + settings.dt * np.where(kmask, fk, 0.0)
        kernel_track[n + 1] = c.copy()
    worst = 0.0
    for i, t in enumerate(full.times):
        step = int(round(t / settings.dt))
        linear = semigroup_apply(basis, config, t, out0).coeffs
        combined = kernel_track[step] + linear
        worst = max(worst, float(np.sqrt(np.sum((full.coeffs[i] - combined) ** 2))))
    return worst
