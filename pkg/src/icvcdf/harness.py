"""Monte Carlo experiments: K-sample and continuous-covariate comparisons,
subagging sweeps, and the empirical decay of the integrated-CDF error.

Replication ``r`` draws all of its randomness from the counter-based stream
``(seed, r)``, so results do not depend on how replications are scheduled
over workers.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from icvcdf.distributions import X_MAX, X_MIN, get_setting, sample_covariates
from icvcdf.ensembles import EnsembleConfig, ensemble_fit, stream
from icvcdf.estimators import GridSpec, fit, group_xy, integrated_estimate
from icvcdf.metrics import MetricsReport, evaluate_cdf, metric_names
from icvcdf.model import order_violation

BOUNDARY_MARGIN = 0.15
KSAMPLE_LEVELS = {
    2: [1.0, 4.0],
    4: [1.0, 2.0, 3.0, 4.0],
    7: [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
}
_AUDIT_EVERY = 100
_AUDIT_TOL = 1e-9


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Declarative simulation setup (see ``configs/`` for examples).

    ``design`` is ``"ksample"`` (uses ``levels`` and ``n_per_group``) or
    ``"continuous"`` (uses ``n`` and ``eval_points`` interior covariate
    values). ``method`` defaults to the order the setting satisfies and
    ``competitor`` to the stratified ECDF (K-sample) or the first order
    dominance estimator (continuous).
    """

    setting: str
    design: str = "ksample"
    levels: list = field(default_factory=lambda: [1.0, 4.0])
    n_per_group: int = 30
    n: int = 500
    eval_points: int = 25
    method: str | None = None
    competitor: str | None = None
    ensemble: dict | None = None
    replications: int = 1000
    seed: int = 0
    gammas: list = field(default_factory=lambda: [0.1, 0.5, 0.9])
    grid: str = "observed"
    n_jobs: int = 1

    def __post_init__(self):
        try:
            get_setting(self.setting)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.design not in ("ksample", "continuous"):
            raise ConfigError("design must be 'ksample' or 'continuous'")
        if self.method is None:
            self.method = get_setting(self.setting).order
        if self.competitor is None:
            self.competitor = "ecdf" if self.design == "ksample" else "fsd"
        for name in (self.method, self.competitor):
            if name not in ("icv", "icx", "fsd", "ecdf"):
                raise ConfigError(f"unknown estimator {name!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        if not self.gammas or any(not 0.0 < g < 1.0 for g in self.gammas):
            raise ConfigError("gamma levels must lie in (0, 1)")
        if self.grid not in ("observed", "integer"):
            raise ConfigError("grid must be 'observed' or 'integer'")
        if self.design == "ksample":
            lv = [float(v) for v in self.levels]
            if not lv or sorted(set(lv)) != lv or lv[0] < X_MIN or lv[-1] > X_MAX:
                raise ConfigError("levels must be strictly increasing values in [1, 4]")
            self.levels = lv
            if self.n_per_group < 1:
                raise ConfigError("n_per_group must be positive")
        else:
            if self.n < 2:
                raise ConfigError("n must be at least 2")
            if self.eval_points < 1:
                raise ConfigError("eval_points must be positive")
        if self.ensemble is not None:
            allowed = {"n_subsamples", "fraction", "subsample_size", "mode"}
            if not isinstance(self.ensemble, dict) or set(self.ensemble) - allowed:
                raise ConfigError(f"ensemble must be an object with keys among {sorted(allowed)}")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "setting" not in data:
            raise ConfigError("config needs a 'setting'")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def eval_x(self):
        if self.design == "ksample":
            return np.asarray(self.levels)
        return np.linspace(X_MIN + BOUNDARY_MARGIN, X_MAX - BOUNDARY_MARGIN, self.eval_points)

    @property
    def grid_spec(self):
        return GridSpec.integer() if self.grid == "integer" else GridSpec.observed()

    def estimator_names(self):
        names = [self.method, self.competitor]
        if self.ensemble is not None:
            names += [self.method + "_sbg", self.competitor + "_sbg"]
        return list(dict.fromkeys(names))

    def pairs(self):
        out = [(self.method, self.competitor)]
        if self.ensemble is not None:
            out.append((self.method + "_sbg", self.competitor + "_sbg"))
        return out


def _draw(cfg, setting, rng):
    if cfg.design == "ksample":
        x = np.repeat(cfg.levels, cfg.n_per_group)
    else:
        x = sample_covariates(cfg.n, rng)
    return x, setting.sample(x, rng)


def _replicate(cfg, r):
    """Error array ``(n_estimators, n_x, n_metrics)`` for replication ``r``."""
    setting = get_setting(cfg.setting)
    rng = stream(cfg.seed, r)
    x, y = _draw(cfg, setting, rng)
    sample = group_xy(x, y)
    models = {name: fit(sample, name, cfg.grid_spec) for name in (cfg.method, cfg.competitor)}
    if cfg.ensemble is not None:
        ens_seed = int(rng.integers(2**63))
        ens = EnsembleConfig(seed=ens_seed, **cfg.ensemble)
        for name in (cfg.method, cfg.competitor):
            models[name + "_sbg"] = ensemble_fit(x, y, name, cfg.grid_spec, ens)
    if r % _AUDIT_EVERY == 0:
        for name, model in models.items():
            v = order_violation(model)
            if v > _AUDIT_TOL:
                raise RuntimeError(f"replication {r}: {name} violates its order by {v:g}")
    out = np.empty((len(models), cfg.eval_x.size, len(cfg.gammas) + 1))
    for a, name in enumerate(cfg.estimator_names()):
        model = models[name]
        for i, xv in enumerate(cfg.eval_x):
            out[a, i] = evaluate_cdf(model.cdf_at(xv), setting, xv, cfg.gammas)
    return out


def _replicate_chunk(args):
    cfg, reps = args
    return [_replicate(cfg, r) for r in reps]


def _run(cfg, n_jobs=None):
    n_jobs = cfg.n_jobs if n_jobs is None else n_jobs
    reps = list(range(cfg.replications))
    if n_jobs <= 1:
        results = [_replicate(cfg, r) for r in reps]
    else:
        chunks = [reps[i::n_jobs] for i in range(n_jobs)]
        with ProcessPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(_replicate_chunk, [(cfg, c) for c in chunks]))
        results = [None] * len(reps)
        for chunk, part in zip(chunks, parts):
            for r, res in zip(chunk, part):
                results[r] = res
    stacked = np.stack(results)
    errors = {name: stacked[:, a] for a, name in enumerate(cfg.estimator_names())}
    design = {"type": cfg.design}
    if cfg.design == "ksample":
        design.update(K=len(cfg.levels), levels=cfg.levels, n_per_group=cfg.n_per_group)
    else:
        design.update(n=cfg.n, eval_points=cfg.eval_points, margin=BOUNDARY_MARGIN)
    if cfg.ensemble is not None:
        design["ensemble"] = cfg.ensemble
    report = MetricsReport.from_errors(cfg.setting, design, cfg.seed, cfg.eval_x,
                                       metric_names(cfg.gammas), errors, cfg.pairs())
    report.errors = errors
    return report


def run_ksample(cfg, n_jobs=None):
    """Constrained estimator versus the stratified ECDF at fixed levels."""
    if cfg.design != "ksample":
        raise ConfigError("run_ksample needs a ksample design")
    return _run(cfg, n_jobs)


def run_continuous(cfg, n_jobs=None):
    """Constrained estimator versus first order dominance, X ~ U[1, 4]."""
    if cfg.design != "continuous":
        raise ConfigError("run_continuous needs a continuous design")
    return _run(cfg, n_jobs)


def run_experiment(cfg, n_jobs=None):
    return run_ksample(cfg, n_jobs) if cfg.design == "ksample" else run_continuous(cfg, n_jobs)


def subagging_sweep(setting, n, reps, seed=0, order=None, counts=(50,), fractions=(0.5,),
                    eval_points=25):
    """Compare subagging variants against the plain fit on a continuous design.

    Returns a report whose improvements are ``(plain - variant) / plain``;
    variant names are ``<order>_b<count>_f<fraction>``.
    """
    st = get_setting(setting)
    order = order or st.order
    xs = np.linspace(X_MIN + BOUNDARY_MARGIN, X_MAX - BOUNDARY_MARGIN, eval_points)
    gammas = [0.1, 0.5, 0.9]
    variants = [(b, f) for b in counts for f in fractions]
    names = [order] + [f"{order}_b{b}_f{f:g}" for b, f in variants]
    res = np.empty((reps, len(names), xs.size, len(gammas) + 1))
    for r in range(reps):
        rng = stream(seed, r)
        x = sample_covariates(n, rng)
        y = st.sample(x, rng)
        ens_seed = int(rng.integers(2**63))
        models = [fit(group_xy(x, y), order)]
        models += [ensemble_fit(x, y, order, config=EnsembleConfig(b, fraction=f, seed=ens_seed))
                   for b, f in variants]
        for a, m in enumerate(models):
            for i, xv in enumerate(xs):
                res[r, a, i] = evaluate_cdf(m.cdf_at(xv), st, xv, gammas)
    errors = {name: res[:, a] for a, name in enumerate(names)}
    report = MetricsReport.from_errors(
        setting, {"type": "continuous", "n": n, "eval_points": eval_points}, seed, xs,
        metric_names(gammas), errors, [(name, order) for name in names[1:]])
    report.errors = errors
    return report


@dataclass
class RateTrend:
    n_list: list
    mean_error: list
    se: list
    ratio: float


def _integrated_on(sample, order, y_eval, x_eval):
    """Fitted integrated CDF (icv) or upper integral (icx), interpolated
    linearly in ``y`` and in ``x``; shape ``(len(x_eval), len(y_eval))``."""
    if order == "icx":
        refl = sample.reflected()
        vals = _integrated_on(refl, "icv", -y_eval, -x_eval)
        return vals
    t = sample.responses
    m = integrated_estimate(sample, t)
    if t.size == 1:
        rows = np.maximum(y_eval - t[0], 0.0)[None, :].repeat(m.shape[0], axis=0)
    else:
        rows = np.stack([np.interp(y_eval, t, mi) for mi in m])
        above = y_eval > t[-1]
        rows[:, above] = m[:, -1:] + (y_eval[above] - t[-1])
    xs = sample.design_points
    if xs.size == 1:
        return rows[[0] * x_eval.size]
    hi = np.clip(np.searchsorted(xs, x_eval, side="right"), 1, xs.size - 1)
    lo = hi - 1
    lam = np.clip((x_eval - xs[lo]) / (xs[hi] - xs[lo]), 0.0, 1.0)[:, None]
    return (1.0 - lam) * rows[lo] + lam * rows[hi]


def default_y_grid(setting, xs, size=201):
    lo = min(float(setting.quantile(x, 1e-3)) for x in xs)
    hi = max(float(setting.quantile(x, 1 - 1e-3)) for x in xs)
    return np.linspace(lo, hi, size)


def run_rate_trend(setting, order=None, n_list=(250, 2000), reps=200, seed=0, design="continuous",
                   levels=None, eval_points=25, y_grid=None):
    """Monte Carlo mean of ``sup_{x, y} |fitted - true|`` for the integrated
    CDF (icv) or upper integral (icx), for each sample size.

    For ``design="ksample"`` the sizes are per group at ``levels``.
    ``ratio`` is ``error(n_list[-1]) / error(n_list[0])``.
    """
    st = get_setting(setting)
    order = order or st.order
    if design == "ksample":
        levels = np.asarray(levels if levels is not None else KSAMPLE_LEVELS[4], dtype=np.float64)
        xs = levels
    else:
        xs = np.linspace(X_MIN + BOUNDARY_MARGIN, X_MAX - BOUNDARY_MARGIN, eval_points)
    ys = default_y_grid(st, xs) if y_grid is None else np.asarray(y_grid, dtype=np.float64)
    if order == "icx":
        truth = np.stack([st.upper_integral(x, ys) for x in xs])
    else:
        truth = np.stack([st.integrated_cdf(x, ys) for x in xs])
    means, ses = [], []
    for n in n_list:
        errs = np.empty(reps)
        for r in range(reps):
            rng = stream(seed, r)
            if design == "ksample":
                x = np.repeat(levels, n)
            else:
                x = sample_covariates(n, rng)
            y = st.sample(x, rng)
            fitted = _integrated_on(group_xy(x, y), order, ys, xs)
            errs[r] = np.max(np.abs(fitted - truth))
        means.append(float(errs.mean()))
        ses.append(float(errs.std(ddof=1) / math.sqrt(reps)) if reps > 1 else float("nan"))
    return RateTrend(list(n_list), means, ses, means[-1] / means[0])
