"""Ground-truth conditional laws of the three simulation settings.

All settings take a covariate ``x`` in ``[1, 4]``:

* ``student``: ``Y = sqrt(x) + s(x) * T`` with ``T ~ t(10)`` and
  ``s(x) = 1 + (x - 2) / sqrt(1 + (x - 2)**2)``; increasing in the icx order.
* ``gamma``: ``Y ~ Gamma(shape=x, rate=x**0.9)``; increasing in the icv order.
* ``betabinom``: ``Y ~ BetaBinomial(50, x**3, 1 + x**3)``; increasing in the
  icv order.

Besides CDFs and quantiles, every setting exposes the integrated CDF
``M_x(y) = E[(y - Y)_+]`` in closed form.
"""

import numpy as np
from scipy import special

X_MIN, X_MAX = 1.0, 4.0


def _check_x(x):
    x = float(x)
    if not X_MIN <= x <= X_MAX:
        raise ValueError(f"covariate {x} outside [{X_MIN}, {X_MAX}]")
    return x


def _check_gamma(gamma):
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(~(gamma > 0) | ~(gamma < 1)):
        raise ValueError("gamma must lie in (0, 1)")
    return gamma


def _nudge_up(cdf, q, gamma):
    """Smallest float ``v`` near ``q`` with ``cdf(v) >= gamma``.

    Special-function inverses land within a few ulps of the level; this
    brackets the exact crossing by doubling steps and then bisects on
    adjacent floats, so the result is the generalized inverse of ``cdf``
    as evaluated in floating point.
    """
    out = np.array(q, dtype=np.float64)
    flat_q, flat_g = out.reshape(-1), np.broadcast_to(gamma, out.shape).reshape(-1)
    for i, (v, g) in enumerate(zip(flat_q, flat_g)):
        step = max(abs(v), 1e-300) * 2.0 ** -52
        lo, hi = v, v
        if cdf(v) >= g:
            lo = v - step
            while cdf(lo) >= g:
                step *= 2.0
                lo = v - step
        else:
            hi = v + step
            while cdf(hi) < g:
                step *= 2.0
                hi = v + step
        # invariant: cdf(lo) < g <= cdf(hi)
        while True:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if cdf(mid) >= g:
                hi = mid
            else:
                lo = mid
        flat_q[i] = hi
    return out


def sample_covariates(n, rng):
    return rng.uniform(X_MIN, X_MAX, size=n)


class SimSetting:
    name = ""
    order = ""
    continuous = True

    def cdf(self, x, y):
        raise NotImplementedError

    def quantile(self, x, gamma):
        raise NotImplementedError

    def approx_quantile(self, x, gamma):
        """Quantile to within a few ulps; for uses that are continuous in it."""
        return self.quantile(x, gamma)

    def integrated_cdf(self, x, y):
        raise NotImplementedError

    def mean(self, x):
        raise NotImplementedError

    def sample(self, x, rng):
        """One draw per entry of ``x`` (array) from the conditional law."""
        raise NotImplementedError

    def upper_integral(self, x, y):
        """``E[(Y - y)_+]``."""
        y = np.asarray(y, dtype=np.float64)
        return self.integrated_cdf(x, y) - y + self.mean(x)

    def __repr__(self):
        return f"{type(self).__name__}()"


class StudentLocScale(SimSetting):
    name = "student"
    order = "icx"

    def __init__(self, df=10.0):
        if df <= 1:
            raise ValueError("df must exceed 1 for a finite mean")
        self.df = float(df)
        self._log_norm = (special.gammaln((df + 1) / 2) - special.gammaln(df / 2)
                          - 0.5 * np.log(df * np.pi))

    @staticmethod
    def location(x):
        return np.sqrt(x)

    @staticmethod
    def scale(x):
        u = x - 2.0
        return 1.0 + u / np.sqrt(1.0 + u * u)

    def _z(self, x, y):
        x = _check_x(x)
        return (np.asarray(y, dtype=np.float64) - self.location(x)) / self.scale(x)

    def cdf(self, x, y):
        z = self._z(x, y)
        # upper half through the lower tail keeps the values monotone
        return np.where(z > 0, 1.0 - special.stdtr(self.df, -np.abs(z)), special.stdtr(self.df, z))

    def approx_quantile(self, x, gamma):
        gamma = _check_gamma(gamma)
        x = _check_x(x)
        return self.location(x) + self.scale(x) * special.stdtrit(self.df, gamma)

    def quantile(self, x, gamma):
        q = self.approx_quantile(x, gamma)
        return _nudge_up(lambda v: self.cdf(x, v), q, gamma)

    def integrated_cdf(self, x, y):
        z = self._z(x, y)
        nu = self.df
        pdf = np.exp(self._log_norm - (nu + 1) / 2 * np.log1p(z * z / nu))
        return self.scale(x) * (z * special.stdtr(nu, z) + (nu + z * z) / (nu - 1) * pdf)

    def mean(self, x):
        return float(self.location(_check_x(x)))

    def sample(self, x, rng):
        x = np.asarray(x, dtype=np.float64)
        return self.location(x) + self.scale(x) * rng.standard_t(self.df, size=x.shape)


class GammaXY(SimSetting):
    name = "gamma"
    order = "icv"

    @staticmethod
    def rate(x):
        return x ** 0.9

    def cdf(self, x, y):
        x = _check_x(x)
        y = np.asarray(y, dtype=np.float64)
        return special.gammainc(x, self.rate(x) * np.maximum(y, 0.0))

    def approx_quantile(self, x, gamma):
        gamma = _check_gamma(gamma)
        x = _check_x(x)
        return special.gammaincinv(x, gamma) / self.rate(x)

    def quantile(self, x, gamma):
        q = self.approx_quantile(x, gamma)
        return _nudge_up(lambda v: self.cdf(x, v), q, gamma)

    def integrated_cdf(self, x, y):
        x = _check_x(x)
        y = np.maximum(np.asarray(y, dtype=np.float64), 0.0)
        r = self.rate(x)
        return y * special.gammainc(x, r * y) - x / r * special.gammainc(x + 1.0, r * y)

    def mean(self, x):
        x = _check_x(x)
        return x / self.rate(x)

    def sample(self, x, rng):
        # numpy's gamma sampler: Marsaglia-Tsang squeeze/rejection
        x = np.asarray(x, dtype=np.float64)
        return rng.gamma(x, 1.0 / self.rate(x))


class BetaBinomial(SimSetting):
    name = "betabinom"
    order = "icv"
    continuous = False

    def __init__(self, trials=50):
        if trials < 1:
            raise ValueError("trials must be positive")
        self.trials = int(trials)
        self.support = np.arange(self.trials + 1, dtype=np.float64)

    @staticmethod
    def shapes(x):
        a = x ** 3
        return a, 1.0 + a

    def pmf(self, x):
        x = _check_x(x)
        a, b = self.shapes(x)
        k, n = self.support, self.trials
        log_choose = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
        return np.exp(log_choose + special.betaln(k + a, n - k + b) - special.betaln(a, b))

    def cdf_table(self, x):
        table = np.minimum(np.cumsum(self.pmf(x)), 1.0)
        table[-1] = 1.0
        return table

    def cdf(self, x, y):
        y = np.asarray(y, dtype=np.float64)
        table = self.cdf_table(x)
        idx = np.floor(np.clip(y, -1.0, self.trials)).astype(int)
        return np.where(idx >= 0, table[np.maximum(idx, 0)], 0.0)

    def quantile(self, x, gamma):
        gamma = _check_gamma(gamma)
        table = self.cdf_table(x)
        return self.support[np.searchsorted(table, gamma, side="left")]

    def integrated_cdf(self, x, y):
        y = np.asarray(y, dtype=np.float64)
        p = self.pmf(x)
        k = self.support
        return np.sum(p * np.maximum(y[..., None] - k, 0.0), axis=-1)

    def mean(self, x):
        a, b = self.shapes(_check_x(x))
        return self.trials * a / (a + b)

    def sample(self, x, rng):
        x = np.asarray(x, dtype=np.float64)
        a, b = self.shapes(x)
        return rng.binomial(self.trials, rng.beta(a, b)).astype(np.float64)


SETTINGS = {
    "student": StudentLocScale,
    "gamma": GammaXY,
    "betabinom": BetaBinomial,
}


def get_setting(name):
    try:
        return SETTINGS[name]()
    except KeyError:
        raise ValueError(f"unknown setting {name!r}; choose from {sorted(SETTINGS)}") from None
