"""Error functionals between estimated step CDFs and ground truth."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate


def _l1_discrete(est, setting, x):
    pts = np.union1d(est.jumps, setting.support)
    diff = np.abs(est(pts[:-1]) - setting.cdf(x, pts[:-1]))
    return float(np.sum(diff * np.diff(pts)))


def _l1_continuous(est, setting, x):
    a, c = est.jumps, est.cum
    M = lambda y: setting.integrated_cdf(x, y)
    total = float(M(a[0])) + float(setting.upper_integral(x, a[-1]))
    if a.size > 1:
        lo, hi, level = a[:-1], a[1:], c[:-1]
        inner = (level > 0) & (level < 1)
        q = np.where(level >= 1, hi, lo)
        if np.any(inner):
            q[inner] = setting.approx_quantile(x, level[inner])
        q = np.clip(q, lo, hi)
        Mlo, Mhi, Mq = M(lo), M(hi), M(q)
        pieces = level * (q - lo) - (Mq - Mlo) + (Mhi - Mq) - level * (hi - q)
        total += float(np.sum(np.maximum(pieces, 0.0)))
    return total


def _l1_quad(est, setting, x, tol):
    lo = min(float(setting.quantile(x, tol)), est.jumps[0])
    hi = max(float(setting.quantile(x, 1.0 - tol)), est.jumps[-1])
    pts = np.concatenate(([lo, hi], est.jumps))
    if not setting.continuous:
        pts = np.concatenate((pts, setting.support))
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    eps = tol / max(pts.size, 1)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        level = float(est(a))
        val, _ = integrate.quad(lambda y: abs(level - float(setting.cdf(x, y))), a, b,
                                epsabs=eps, epsrel=0.0, limit=200)
        total += val
    return total


def l1_distance(est, setting, x, tol=1e-8, method="exact"):
    """``integral |F_est(y) - F_x(y)| dy`` over the real line.

    ``method="exact"`` integrates piecewise using the closed-form integrated
    CDF of the setting, splitting each plateau of the step function at the
    true quantile of its level; discrete settings use a finite sum.
    ``method="quad"`` uses adaptive quadrature on the same pieces with the
    tails truncated at the ``tol`` and ``1 - tol`` quantiles.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method == "quad":
        return _l1_quad(est, setting, x, tol)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    if setting.continuous:
        return _l1_continuous(est, setting, x)
    return _l1_discrete(est, setting, x)


def quantile_abs_error(est, setting, x, gamma):
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return float(abs(est.quantile(gamma) - setting.quantile(x, gamma)))


def metric_names(gammas):
    return ["L1"] + [f"dq_{g:g}" for g in gammas]


def evaluate_cdf(est, setting, x, gammas):
    """Vector ``[L1, dq_gamma...]`` for one estimated CDF."""
    out = [l1_distance(est, setting, x)]
    truth = setting.quantile(x, np.asarray(gammas))
    out.extend(np.abs(est.quantile(np.asarray(gammas)) - truth))
    return np.asarray(out, dtype=np.float64)


def relative_improvement(method_errors, competitor_errors):
    """``(competitor - method) / competitor`` of mean errors and its
    delta-method standard error from paired replications."""
    m = np.asarray(method_errors, dtype=np.float64)
    c = np.asarray(competitor_errors, dtype=np.float64)
    cbar = c.mean()
    if not cbar > 0:
        return None, None
    ratio = m.mean() / cbar
    se = None
    if m.size > 1:
        se = float(np.std(m - ratio * c, ddof=1) / (cbar * math.sqrt(m.size)))
    return float(1.0 - ratio), se


@dataclass
class MetricSummary:
    estimator: str
    x: float
    metric: str
    mean: float
    se: float | None
    reps: int


@dataclass
class Improvement:
    method: str
    competitor: str
    x: float
    metric: str
    value: float | None
    se: float | None


@dataclass
class MetricsReport:
    """Mean errors per estimator, covariate value and metric, with relative
    improvements ``(competitor - method) / competitor``."""

    setting: str
    design: dict
    replications: int
    seed: int
    metrics: list
    summaries: list = field(default_factory=list)
    improvements: list = field(default_factory=list)
    groups: list = field(default_factory=list)

    @classmethod
    def from_errors(cls, setting, design, seed, xs, metrics, errors, pairs, groups=None):
        """Build a report from per-replication error arrays.

        ``errors[name]`` has shape ``(reps, len(xs), len(metrics))``;
        ``pairs`` lists ``(method, competitor)`` names to compare.
        """
        reps = next(iter(errors.values())).shape[0]
        report = cls(setting, design, reps, seed, list(metrics), groups=list(groups or []))
        for name, arr in errors.items():
            for i, x in enumerate(xs):
                for j, metric in enumerate(metrics):
                    col = arr[:, i, j]
                    se = float(np.std(col, ddof=1) / math.sqrt(reps)) if reps > 1 else None
                    report.summaries.append(
                        MetricSummary(name, float(x), metric, float(col.mean()), se, reps))
        for method, competitor in pairs:
            for i, x in enumerate(xs):
                for j, metric in enumerate(metrics):
                    value, se = relative_improvement(errors[method][:, i, j],
                                                     errors[competitor][:, i, j])
                    report.improvements.append(
                        Improvement(method, competitor, float(x), metric, value, se))
        return report

    def improvement(self, method, x, metric):
        for imp in self.improvements:
            if imp.method == method and imp.metric == metric and math.isclose(imp.x, x):
                return imp
        raise KeyError((method, x, metric))

    def mean_error(self, estimator, x, metric):
        for s in self.summaries:
            if s.estimator == estimator and s.metric == metric and math.isclose(s.x, x):
                return s
        raise KeyError((estimator, x, metric))

    def to_dict(self):
        return {
            "setting": self.setting,
            "design": self.design,
            "replications": self.replications,
            "seed": self.seed,
            "metrics": self.metrics,
            "groups": self.groups,
            "summaries": [asdict(s) for s in self.summaries],
            "improvements": [asdict(i) for i in self.improvements],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self):
        """One row per estimator x covariate value x metric."""
        lookup = {(i.method, i.x, i.metric): i for i in self.improvements}
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["setting", "estimator", "x", "metric", "mean", "se", "reps",
                         "competitor", "rel_improvement", "rel_improvement_se"])
        fmt = lambda v: "" if v is None else repr(float(v))
        for s in self.summaries:
            imp = lookup.get((s.estimator, s.x, s.metric))
            writer.writerow([
                self.setting, s.estimator, repr(s.x), s.metric, fmt(s.mean), fmt(s.se), s.reps,
                imp.competitor if imp else "",
                fmt(imp.value) if imp else "",
                fmt(imp.se) if imp else "",
            ])
        return buf.getvalue()

    def table(self, method=None):
        """Relative improvements laid out as rows (group, X) and metric columns."""
        methods = [method] if method else list(dict.fromkeys(i.method for i in self.improvements))
        lines = []
        for name in methods:
            imps = [i for i in self.improvements if i.method == name]
            if not imps:
                continue
            lines.append(f"{name} vs {imps[0].competitor}  ({self.setting}, {self.replications} reps)")
            lines.append(f"{'K':>3} {'X':>6} " + " ".join(f"{m:>8}" for m in self.metrics))
            xs = list(dict.fromkeys(i.x for i in imps))
            k = self.design.get("K", "")
            for x in xs:
                vals = []
                for metric in self.metrics:
                    v = next(i.value for i in imps if i.x == x and i.metric == metric)
                    vals.append(f"{v:8.2f}" if v is not None else f"{'nan':>8}")
                lines.append(f"{k!s:>3} {x:6.2f} " + " ".join(vals))
        return "\n".join(lines)
