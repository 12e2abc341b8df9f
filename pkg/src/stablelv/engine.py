"""Jump-adapted Euler simulation of the two-type system.

Per step: exact drift (including the compensator of the simulated big
jumps), Brownian diffusion, a variance-matched Gaussian stand-in for the
sub-cutoff jump activity (or nothing in ``drop`` mode), and a thinned
compound-Poisson draw of the super-cutoff jumps whose per-step mean is kept
at or below 0.1 by shrinking the step.  Extinction and explosion are
threshold proxies: first passage at-or-below ``eps_ext``, first passage
at-or-above ``n_max``.  After one component's extinction the survivor
evolves alone with the dead component pinned at exactly zero.

Every path owns a counter-based random stream keyed by
``(master_seed, path_seed)``, so results are bit-identical regardless of
scheduling or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .model import ModelParams, validate
from .stable_measure import StableMeasure

__all__ = [
    "ConfigError",
    "UnorderedInitial",
    "SimConfig",
    "PathRecord",
    "CouplingReport",
    "make_rng",
    "simulate_path",
    "simulate_coupled",
]


class ConfigError(ValueError):
    """Inconsistent simulation thresholds or settings."""


class UnorderedInitial(ValueError):
    """Coupled run started from initial conditions that are not ordered."""


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    jump_cutoff: float = 0.05
    small_jump_mode: str = "gaussian"
    eps_ext: float = 1e-8
    n_max: float = 1e6
    horizon: float = 50.0
    master_seed: int = 20250809

    def __post_init__(self):
        if self.dt <= 0.0 or self.jump_cutoff <= 0.0 or self.eps_ext <= 0.0:
            raise ConfigError("dt, jump_cutoff and eps_ext must be positive")
        if self.horizon <= 0.0:
            raise ConfigError("horizon must be positive")
        if self.small_jump_mode not in ("gaussian", "drop"):
            raise ConfigError(
                f"small_jump_mode must be 'gaussian' or 'drop', got {self.small_jump_mode!r}")

    def check_against(self, params: ModelParams) -> None:
        if self.eps_ext >= min(params.x0, params.y0):
            raise ConfigError(
                f"eps_ext={self.eps_ext} must lie below the initial state "
                f"min(x0, y0)={min(params.x0, params.y0)}")
        if self.n_max <= max(params.x0, params.y0):
            raise ConfigError(
                f"n_max={self.n_max} must lie above the initial state "
                f"max(x0, y0)={max(params.x0, params.y0)}")

    def replace(self, **kw) -> "SimConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {
            "dt": self.dt, "jump_cutoff": self.jump_cutoff,
            "small_jump_mode": self.small_jump_mode, "eps_ext": self.eps_ext,
            "n_max": self.n_max, "horizon": self.horizon,
            "master_seed": self.master_seed,
        }

    @classmethod
    def from_mapping(cls, mapping) -> "SimConfig":
        kw = {}
        for k in ("dt", "jump_cutoff", "eps_ext", "n_max", "horizon"):
            if k in mapping:
                kw[k] = float(mapping[k])
        if "small_jump_mode" in mapping:
            kw["small_jump_mode"] = str(mapping["small_jump_mode"])
        if "master_seed" in mapping:
            kw["master_seed"] = int(mapping["master_seed"])
        return cls(**kw)


EVENTS = ("ExtinctX", "ExtinctY", "ExtinctBoth", "Explode", "HorizonEnd")


@dataclass(frozen=True)
class PathRecord:
    path_seed: int
    event: str
    event_time: float
    term_x: float
    term_y: float
    sup_x: float
    sup_y: float
    clamp_count: int
    clamp_max: float
    ext_x_time: float  # nan when X never went extinct
    ext_y_time: float
    checkpoints: np.ndarray | None = None  # rows (t, x, y)

    @property
    def extinct_y(self) -> bool:
        return math.isfinite(self.ext_y_time)

    @property
    def extinct_x(self) -> bool:
        return math.isfinite(self.ext_x_time)


@dataclass(frozen=True)
class CouplingReport:
    n_paths: int
    n_checkpoints: int
    dt: float
    observed_pairs: int
    violation_count: int
    max_violation: float

    @property
    def violation_fraction(self) -> float:
        """Violations over all (path, checkpoint) pairs."""
        return self.violation_count / (self.n_paths * self.n_checkpoints)


def make_rng(master_seed: int, path_seed: int) -> np.random.Generator:
    """Counter-based stream for one unit of work; split-safe by construction."""
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF,
                    path_seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _component_consts(a1, p1, a2, p2, a3, p3, alpha, eta, theta, kappa,
                      cutoff: float):
    m = StableMeasure(alpha)
    lam = m.tail_mass(cutoff)
    drift_comp = m.truncated_moment(1, cutoff, math.inf)
    small_var = m.truncated_moment(2, 0.0, cutoff)
    return np.array([
        a1, p1 + 1.0,                    # 0, 1: self-drift
        math.sqrt(2.0 * a2), 0.5 * (p2 + 2.0),  # 2, 3: diffusion
        a3, p3 + alpha,                  # 4, 5: jump intensity factor
        eta, theta, kappa,               # 6, 7, 8: interaction
        1.0 / alpha,                     # 9: inverse stable index
        cutoff, lam, drift_comp, small_var,  # 10..13: jump scheme constants
    ])


def _consts(params: ModelParams, cfg: SimConfig):
    cx = _component_consts(params.a1, params.p1, params.a2, params.p2,
                           params.a3, params.p3, params.alpha1,
                           params.eta1, params.theta1, params.kappa1,
                           cfg.jump_cutoff)
    cy = _component_consts(params.b1, params.q1, params.b2, params.q2,
                           params.b3, params.q3, params.alpha2,
                           params.eta2, params.theta2, params.kappa2,
                           cfg.jump_cutoff)
    return cx, cy


@njit(cache=True, inline="always")
def _poisson_inv(u: float, mean: float) -> int:
    """Poisson count by inversion of one uniform; exact for small means."""
    p = math.exp(-mean)
    cum = p
    k = 0
    while u > cum and k < 200:
        k += 1
        p *= mean / k
        cum += p
    return k


@njit(cache=True, inline="always")
def _power_sum(coef, ex, ey, x: float, y: float) -> float:
    s = 0.0
    for i in range(coef.shape[0]):
        s += coef[i] * x ** ex[i] * y ** ey[i]
    return s


@njit(cache=True)
def _path_kernel(rng, x0, y0, T, dt, eps, nmax, gauss, cx, cy,
                 check_ts, out_checks,
                 lg_coef, lg_ex, lg_ey, g_coef, g_ex, g_ey, out_mart):
    """One path; returns terminal/event data and fills checkpoint buffers.

    out_checks rows: (t, x, y); out_mart rows: (t, g(X,Y), integral of Lg).
    """
    x = x0
    y = y0
    t = 0.0
    sup_x = x
    sup_y = y
    alive_x = True
    alive_y = True
    ext_x_t = np.nan
    ext_y_t = np.nan
    expl_t = np.nan
    clamp_count = 0
    clamp_max = 0.0
    ci = 0
    n_checks = check_ts.shape[0]
    accumulate = lg_coef.shape[0] > 0
    acc = 0.0

    while t < T:
        pow_jx = cx[4] * x ** cx[5] if alive_x and cx[4] > 0.0 else 0.0
        pow_jy = cy[4] * y ** cy[5] if alive_y and cy[4] > 0.0 else 0.0
        rate_x = pow_jx * cx[11]
        rate_y = pow_jy * cy[11]
        dt_eff = dt
        if rate_x > 0.0 and 0.1 / rate_x < dt_eff:
            dt_eff = 0.1 / rate_x
        if rate_y > 0.0 and 0.1 / rate_y < dt_eff:
            dt_eff = 0.1 / rate_y
        if T - t < dt_eff:
            dt_eff = T - t
        sq = math.sqrt(dt_eff)

        if accumulate:
            acc += _power_sum(lg_coef, lg_ex, lg_ey, x, y) * dt_eff

        dx = 0.0
        if alive_x:
            drift = -(cx[0] * x ** cx[1] + cx[6] * x ** cx[7] * y ** cx[8]
                      + pow_jx * cx[12])
            dx = drift * dt_eff
            if cx[2] > 0.0:
                dx += cx[2] * x ** cx[3] * sq * rng.normal(0.0, 1.0)
            if pow_jx > 0.0:
                if gauss:
                    dx += math.sqrt(pow_jx * cx[13] * dt_eff) * rng.normal(0.0, 1.0)
                kj = _poisson_inv(rng.random(), rate_x * dt_eff)
                for _ in range(kj):
                    u = rng.random()
                    if u < 1e-306:
                        u = 1e-306
                    dx += cx[10] * u ** (-cx[9])
        dy = 0.0
        if alive_y:
            drift = -(cy[0] * y ** cy[1] + cy[6] * y ** cy[7] * x ** cy[8]
                      + pow_jy * cy[12])
            dy = drift * dt_eff
            if cy[2] > 0.0:
                dy += cy[2] * y ** cy[3] * sq * rng.normal(0.0, 1.0)
            if pow_jy > 0.0:
                if gauss:
                    dy += math.sqrt(pow_jy * cy[13] * dt_eff) * rng.normal(0.0, 1.0)
                kj = _poisson_inv(rng.random(), rate_y * dt_eff)
                for _ in range(kj):
                    u = rng.random()
                    if u < 1e-306:
                        u = 1e-306
                    dy += cy[10] * u ** (-cy[9])

        t += dt_eff
        exploded = False
        if alive_x:
            x += dx
            if x < 0.0:
                clamp_count += 1
                if -x > clamp_max:
                    clamp_max = -x
                x = 0.0
            if x <= eps:
                x = 0.0
                alive_x = False
                ext_x_t = t
            elif x >= nmax:
                exploded = True
            if x > sup_x:
                sup_x = x
        if alive_y:
            y += dy
            if y < 0.0:
                clamp_count += 1
                if -y > clamp_max:
                    clamp_max = -y
                y = 0.0
            if y <= eps:
                y = 0.0
                alive_y = False
                ext_y_t = t
            elif y >= nmax:
                exploded = True
            if y > sup_y:
                sup_y = y

        while ci < n_checks and t >= check_ts[ci] - 1e-12:
            out_checks[ci, 0] = t
            out_checks[ci, 1] = x
            out_checks[ci, 2] = y
            if accumulate:
                out_mart[ci, 0] = t
                out_mart[ci, 1] = _power_sum(g_coef, g_ex, g_ey, x, y)
                out_mart[ci, 2] = acc
            ci += 1

        if exploded:
            expl_t = t
            break
        if not alive_x and not alive_y:
            break

    return x, y, t, sup_x, sup_y, clamp_count, clamp_max, ext_x_t, ext_y_t, expl_t, ci


_EMPTY = np.empty(0, dtype=np.float64)


def simulate_path(params: ModelParams, cfg: SimConfig, path_seed: int,
                  checkpoint_times=None, strict: bool = False,
                  generator_terms=None, value_terms=None):
    """Run one path; returns a PathRecord (plus a martingale array if asked).

    ``generator_terms``/``value_terms`` are optional power-sum forms
    (coef, x_exponents, y_exponents); when given, the kernel also
    accumulates the generator integral along the path and reports
    ``(t, g(X_t, Y_t), integral)`` rows at the checkpoint times.
    """
    validate(params, strict=strict)
    cfg.check_against(params)
    cx, cy = _consts(params, cfg)
    rng = make_rng(cfg.master_seed, path_seed)

    if checkpoint_times is None:
        check_ts = _EMPTY
    else:
        check_ts = np.asarray(checkpoint_times, dtype=np.float64)
    out_checks = np.full((check_ts.shape[0], 3), np.nan)

    if generator_terms is not None:
        lg_coef, lg_ex, lg_ey = (np.asarray(a, dtype=np.float64) for a in generator_terms)
        g_coef, g_ex, g_ey = (np.asarray(a, dtype=np.float64) for a in value_terms)
        out_mart = np.full((check_ts.shape[0], 3), np.nan)
    else:
        lg_coef = lg_ex = lg_ey = _EMPTY
        g_coef = g_ex = g_ey = _EMPTY
        out_mart = np.empty((0, 3))

    (x, y, t, sup_x, sup_y, clamp_count, clamp_max,
     ext_x_t, ext_y_t, expl_t, n_done) = _path_kernel(
        rng, params.x0, params.y0, cfg.horizon, cfg.dt, cfg.eps_ext,
        cfg.n_max, cfg.small_jump_mode == "gaussian", cx, cy,
        check_ts, out_checks, lg_coef, lg_ex, lg_ey, g_coef, g_ex, g_ey,
        out_mart)

    ext_x = math.isfinite(ext_x_t)
    ext_y = math.isfinite(ext_y_t)
    if ext_x and ext_y:
        event, event_time = "ExtinctBoth", max(ext_x_t, ext_y_t)
    elif ext_x:
        event, event_time = "ExtinctX", ext_x_t
    elif ext_y:
        event, event_time = "ExtinctY", ext_y_t
    elif math.isfinite(expl_t):
        event, event_time = "Explode", expl_t
    else:
        event, event_time = "HorizonEnd", t

    record = PathRecord(
        path_seed=path_seed, event=event, event_time=event_time,
        term_x=x, term_y=y, sup_x=sup_x, sup_y=sup_y,
        clamp_count=int(clamp_count), clamp_max=clamp_max,
        ext_x_time=ext_x_t, ext_y_time=ext_y_t,
        checkpoints=out_checks if check_ts.shape[0] else None)
    if generator_terms is not None:
        return record, out_mart, n_done
    return record


@njit(cache=True)
def _coupled_kernel(rng, x0, y0, xt0, yt0, T, dt, eps, nmax, gauss, cx, cy,
                    check_ts, out_flags, out_mag, out_states):
    """Two solutions sharing Brownian increments and one thinned jump field.

    Jump candidates are drawn at the pointwise dominating intensity of the
    pair and accepted per path with probability own/dominating, so the
    accepted streams are nested whenever the states are ordered.
    """
    x, y, xt, yt = x0, y0, xt0, yt0
    t = 0.0
    ci = 0
    n_checks = check_ts.shape[0]
    stopped = False

    while t < T and not stopped and ci < n_checks:
        pow_x = cx[4] * x ** cx[5] if cx[4] > 0.0 else 0.0
        pow_xt = cx[4] * xt ** cx[5] if cx[4] > 0.0 else 0.0
        pow_y = cy[4] * y ** cy[5] if cy[4] > 0.0 else 0.0
        pow_yt = cy[4] * yt ** cy[5] if cy[4] > 0.0 else 0.0
        dom_x = max(pow_x, pow_xt)
        dom_y = max(pow_y, pow_yt)
        rate_x = dom_x * cx[11]
        rate_y = dom_y * cy[11]
        dt_eff = dt
        if rate_x > 0.0 and 0.1 / rate_x < dt_eff:
            dt_eff = 0.1 / rate_x
        if rate_y > 0.0 and 0.1 / rate_y < dt_eff:
            dt_eff = 0.1 / rate_y
        if T - t < dt_eff:
            dt_eff = T - t
        sq = math.sqrt(dt_eff)

        # X pair
        dxa = -(cx[0] * x ** cx[1] + cx[6] * x ** cx[7] * y ** cx[8]
                + pow_x * cx[12]) * dt_eff
        dxb = -(cx[0] * xt ** cx[1] + cx[6] * xt ** cx[7] * yt ** cx[8]
                + pow_xt * cx[12]) * dt_eff
        if cx[2] > 0.0:
            n = rng.normal(0.0, 1.0)
            dxa += cx[2] * x ** cx[3] * sq * n
            dxb += cx[2] * xt ** cx[3] * sq * n
        if dom_x > 0.0:
            if gauss:
                ns = rng.normal(0.0, 1.0)
                dxa += math.sqrt(pow_x * cx[13] * dt_eff) * ns
                dxb += math.sqrt(pow_xt * cx[13] * dt_eff) * ns
            kj = _poisson_inv(rng.random(), rate_x * dt_eff)
            for _ in range(kj):
                u = rng.random()
                if u < 1e-306:
                    u = 1e-306
                z = cx[10] * u ** (-cx[9])
                ua = rng.random() * dom_x
                if ua <= pow_x:
                    dxa += z
                if ua <= pow_xt:
                    dxb += z

        # Y pair
        dya = -(cy[0] * y ** cy[1] + cy[6] * y ** cy[7] * x ** cy[8]
                + pow_y * cy[12]) * dt_eff
        dyb = -(cy[0] * yt ** cy[1] + cy[6] * yt ** cy[7] * xt ** cy[8]
                + pow_yt * cy[12]) * dt_eff
        if cy[2] > 0.0:
            n = rng.normal(0.0, 1.0)
            dya += cy[2] * y ** cy[3] * sq * n
            dyb += cy[2] * yt ** cy[3] * sq * n
        if dom_y > 0.0:
            if gauss:
                ns = rng.normal(0.0, 1.0)
                dya += math.sqrt(pow_y * cy[13] * dt_eff) * ns
                dyb += math.sqrt(pow_yt * cy[13] * dt_eff) * ns
            kj = _poisson_inv(rng.random(), rate_y * dt_eff)
            for _ in range(kj):
                u = rng.random()
                if u < 1e-306:
                    u = 1e-306
                z = cy[10] * u ** (-cy[9])
                ua = rng.random() * dom_y
                if ua <= pow_y:
                    dya += z
                if ua <= pow_yt:
                    dyb += z

        t += dt_eff
        x = max(x + dxa, 0.0)
        xt = max(xt + dxb, 0.0)
        y = max(y + dya, 0.0)
        yt = max(yt + dyb, 0.0)
        if (x <= eps or y <= eps or xt <= eps or yt <= eps
                or x >= nmax or y >= nmax or xt >= nmax or yt >= nmax):
            stopped = True

        if not stopped:
            while ci < n_checks and t >= check_ts[ci] - 1e-12:
                vx = x - xt if x > xt else 0.0
                vy = yt - y if yt > y else 0.0
                out_flags[ci] = 1 if (vx > 0.0 or vy > 0.0) else 0
                out_mag[ci] = max(vx, vy)
                out_states[ci, 0] = x
                out_states[ci, 1] = y
                out_states[ci, 2] = xt
                out_states[ci, 3] = yt
                ci += 1

    return ci


def simulate_coupled(params: ModelParams, cfg: SimConfig,
                     initial, tilde_initial, path_seed: int,
                     n_checkpoints: int = 100, strict: bool = False):
    """One coupled pair; returns (flags, magnitudes, states, n_observed).

    ``tilde_initial`` must dominate in the first component and be dominated
    in the second.
    """
    x0, y0 = initial
    xt0, yt0 = tilde_initial
    if not (xt0 >= x0 and yt0 <= y0):
        raise UnorderedInitial(
            f"need xt0 >= x0 and yt0 <= y0, got ({xt0}, {yt0}) vs ({x0}, {y0})")
    validate(params, strict=strict)
    cfg.check_against(params.replace(x0=min(x0, xt0), y0=min(y0, yt0)))
    cx, cy = _consts(params, cfg)
    rng = make_rng(cfg.master_seed, path_seed)
    check_ts = np.linspace(cfg.horizon / n_checkpoints, cfg.horizon, n_checkpoints)
    flags = np.zeros(n_checkpoints, dtype=np.int64)
    mags = np.zeros(n_checkpoints, dtype=np.float64)
    states = np.full((n_checkpoints, 4), np.nan)
    n_done = _coupled_kernel(
        rng, x0, y0, xt0, yt0, cfg.horizon, cfg.dt, cfg.eps_ext, cfg.n_max,
        cfg.small_jump_mode == "gaussian", cx, cy, check_ts, flags, mags, states)
    return flags, mags, states, n_done


def run_coupling_experiment(params: ModelParams, cfg: SimConfig,
                            initial, tilde_initial, n_paths: int,
                            n_checkpoints: int = 100,
                            strict: bool = False) -> CouplingReport:
    """Aggregate ordering-violation statistics over many coupled pairs."""
    violations = 0
    observed = 0
    worst = 0.0
    for seed in range(n_paths):
        flags, mags, _, n_done = simulate_coupled(
            params, cfg, initial, tilde_initial, seed,
            n_checkpoints=n_checkpoints, strict=strict)
        violations += int(flags[:n_done].sum())
        observed += n_done
        if n_done:
            worst = max(worst, float(mags[:n_done].max()))
    return CouplingReport(
        n_paths=n_paths, n_checkpoints=n_checkpoints, dt=cfg.dt,
        observed_pairs=observed, violation_count=violations,
        max_violation=worst)
