"""Location-only and scale-only association tests and the joint LRT baseline.

Each test has a vectorized kernel that scores one genotype vector ``x`` (complete
cases only) against a batch ``Y`` of phenotype vectors, one per row, so that
permutation replicates are scored in a single pass. The public ``*_test``
functions wrap a single (genotype, phenotype) pair into a ``TestOutcome``.
"""
import functools

import numpy as np

from locscale import numeric
from locscale.data import GenotypeVector, PhenotypeVector, GroupSummary, complete_cases
from locscale.numeric import DegreesOfFreedom
from locscale.types import params
from locscale.util import UsageError

OK = 'ok'
DEGENERATE = 'degenerate'

# relative size below which a sum of squares counts as zero
_TOL = 1e-12
# relative spread below which a vector counts as constant
_FLAT = 1e-10

CENTERS = ('mean', 'median')


class TestOutcome:
    __test__ = False

    def __init__(self, name, statistic, p, df, n_used, status):
        self.name = name
        self.statistic = statistic
        self.p = p
        self.df = df
        self.n_used = n_used
        self.status = status

    @property
    def ok(self):
        return self.status == OK

    def __repr__(self):
        return "TestOutcome({}, statistic={}, p={}, df={}, n_used={}, status={})".format(
            self.name, self.statistic, self.p, self.df, self.n_used, self.status)


class KernelResult:
    """Statistics and p-values for a batch of phenotype rows."""

    def __init__(self, statistic, p, ok, df, n_used):
        self.statistic = statistic
        self.p = p
        self.ok = ok
        self.df = df
        self.n_used = n_used

    def outcome(self, name, row=0):
        if not self.ok[row]:
            return TestOutcome(name, float('nan'), float('nan'), self.df, self.n_used, DEGENERATE)
        return TestOutcome(name, float(self.statistic[row]), float(self.p[row]), self.df, self.n_used, OK)


def _degenerate(rows, df, n_used):
    nan = np.full(rows, np.nan)
    return KernelResult(nan, nan.copy(), np.zeros(rows, dtype=bool), df, n_used)


def _finish(stat, ok, pfunc, df, n_used):
    stat = np.where(ok, stat, np.nan)
    p = np.full(stat.shape, np.nan)
    if np.any(ok):
        p[ok] = pfunc(stat[ok])
    return KernelResult(stat, p, ok, df, n_used)


def _flat(V):
    scale = np.max(np.abs(V), axis=1)
    spread = np.max(V, axis=1) - np.min(V, axis=1)
    return spread <= _FLAT * scale


def _oneway(x, V, codes):
    """Between- and within-group sums of squares of each row of V."""
    masks = [x == c for c in codes]
    counts = np.array([m.sum() for m in masks], dtype=float)
    means = np.stack([V[:, m].mean(axis=1) for m in masks], axis=1)
    grand = V.mean(axis=1)
    ssb = ((means - grand[:, None]) ** 2 * counts).sum(axis=1)
    ssw = np.zeros(V.shape[0])
    for j, m in enumerate(masks):
        d = V[:, m] - means[:, [j]]
        ssw += np.einsum('ij,ij->i', d, d)
    return ssb, ssw


# ── kernels ──────────────────────────────────────────────────────────────────

def ols_kernel(x, Y):
    """t test of the additive slope of Y on x, N - 2 degrees of freedom."""
    Y = np.atleast_2d(Y)
    n = x.shape[0]
    df = DegreesOfFreedom(n - 2)
    xc = x - x.mean()
    sxx = xc @ xc
    if n < 3 or sxx <= _TOL:
        return _degenerate(Y.shape[0], df, n)
    yc = Y - Y.mean(axis=1, keepdims=True)
    sxy = np.einsum('ij,j->i', yc, xc)
    syy = np.einsum('ij,ij->i', yc, yc)
    beta = sxy / sxx
    ss_res = np.maximum(syy - beta * sxy, 0.0)
    ok = ss_res > _TOL * syy
    with np.errstate(divide='ignore', invalid='ignore'):
        t = beta / np.sqrt(ss_res / (n - 2) / sxx)
    return _finish(t, ok, lambda s: 2.0 * numeric.student_t_sf(np.abs(s), n - 2), df, n)


def anova_kernel(x, Y):
    """Genotypic one-way ANOVA F test with (k - 1, N - k) degrees of freedom."""
    Y = np.atleast_2d(Y)
    codes = np.unique(x)
    n, k = x.shape[0], len(codes)
    df = DegreesOfFreedom(k - 1, n - k)
    if k < 2 or n <= k:
        return _degenerate(Y.shape[0], df, n)
    ssb, ssw = _oneway(x, Y, codes)
    sst = ssb + ssw
    ok = ~_flat(Y) & (ssw > _TOL * sst)
    with np.errstate(divide='ignore', invalid='ignore'):
        F = (ssb / (k - 1)) / (ssw / (n - k))
    return _finish(F, ok, lambda s: numeric.f_sf(s, k - 1, n - k), df, n)


def levene_kernel(x, Y, center='mean', min_group_size=2):
    """Levene (mean) or Brown-Forsythe (median) test on absolute deviations.

    Groups smaller than ``min_group_size`` leave the test; with fewer than two
    groups left the result is degenerate. When every absolute deviation is the
    same the groups cannot differ in scale and W = 0, p = 1.
    """
    if center not in CENTERS:
        raise UsageError("Unknown Levene center: {}".format(center))
    Y = np.atleast_2d(Y)
    codes, counts = np.unique(x, return_counts=True)
    keep = codes[counts >= min_group_size]
    sel = np.isin(x, keep)
    x, Y = x[sel], Y[:, sel]
    n, k = x.shape[0], len(keep)
    df = DegreesOfFreedom(k - 1, n - k)
    if k < 2 or n <= k:
        return _degenerate(Y.shape[0], df, n)
    Z = np.empty_like(Y)
    for c in keep:
        m = x == c
        Yc = Y[:, m]
        if center == 'mean':
            ctr = Yc.mean(axis=1, keepdims=True)
        else:
            ctr = np.median(Yc, axis=1, keepdims=True)
        Z[:, m] = np.abs(Yc - ctr)
    ssb, ssw = _oneway(x, Z, keep)
    sst = ssb + ssw
    flat = _flat(Z)
    ok = flat | (ssw > _TOL * sst)
    with np.errstate(divide='ignore', invalid='ignore'):
        W = np.where(flat, 0.0, (ssb / (k - 1)) / (ssw / (n - k)))
    return _finish(W, ok, lambda s: numeric.f_sf(s, k - 1, n - k), df, n)


def lrt_kernel(x, Y):
    """Likelihood ratio of group-specific normal means and variances vs a common normal.

    The statistic is N ln(s^2) - sum n_g ln(s_g^2) with maximum likelihood
    variances, referred to chi-square with 2(k - 1) degrees of freedom.
    """
    Y = np.atleast_2d(Y)
    codes = np.unique(x)
    n, k = x.shape[0], len(codes)
    df = DegreesOfFreedom(2 * (k - 1))
    if k < 2:
        return _degenerate(Y.shape[0], df, n)
    var_all = Y.var(axis=1)
    stat = n * np.log(np.where(var_all > 0, var_all, 1.0))
    ok = var_all > 0
    for c in codes:
        m = x == c
        var_g = Y[:, m].var(axis=1)
        ok &= var_g > _TOL * var_all
        stat -= m.sum() * np.log(np.where(var_g > 0, var_g, 1.0))
    stat = np.maximum(stat, 0.0)
    return _finish(stat, ok, lambda s: numeric.chi2_sf(s, 2 * (k - 1)), df, n)


LOCATION_TESTS = {
    'ols': ols_kernel,
    'anova': anova_kernel,
}


def scale_kernel(name, min_group_size=2):
    if name == 'levene-mean':
        return functools.partial(levene_kernel, center='mean', min_group_size=min_group_size)
    if name == 'levene-median':
        return functools.partial(levene_kernel, center='median', min_group_size=min_group_size)
    raise UsageError("Unknown scale test: {}".format(name))


def location_kernel(name):
    if name not in LOCATION_TESTS:
        raise UsageError("Unknown location test: {}".format(name))
    return LOCATION_TESTS[name]


SCALE_TESTS = ('levene-mean', 'levene-median')


# ── single variant tests ─────────────────────────────────────────────────────

@params(geno=GenotypeVector, pheno=PhenotypeVector)
def ols_location_test(geno, pheno):
    x, y = complete_cases(geno, pheno)
    return ols_kernel(x, y).outcome('ols')


@params(geno=GenotypeVector, pheno=PhenotypeVector)
def anova_location_test(geno, pheno):
    x, y = complete_cases(geno, pheno)
    return anova_kernel(x, y).outcome('anova')


@params(geno=GenotypeVector, pheno=PhenotypeVector)
def levene_scale_test(geno, pheno, center='mean', min_group_size=2):
    x, y = complete_cases(geno, pheno)
    return levene_kernel(x, y, center=center, min_group_size=min_group_size).outcome('levene-' + center)


@params(geno=GenotypeVector, pheno=PhenotypeVector)
def lrt_joint_test(geno, pheno):
    x, y = complete_cases(geno, pheno)
    return lrt_kernel(x, y).outcome('lrt')


@params(geno=GenotypeVector, pheno=PhenotypeVector)
def group_summary(geno, pheno, center='mean'):
    if center not in CENTERS:
        raise UsageError("Unknown center: {}".format(center))
    x, y = complete_cases(geno, pheno)
    codes = np.unique(x)
    counts, means, variances, mads = [], [], [], []
    for c in codes:
        yc = y[x == c]
        ctr = yc.mean() if center == 'mean' else np.median(yc)
        counts.append(len(yc))
        means.append(yc.mean())
        variances.append(yc.var(ddof=1) if len(yc) > 1 else float('nan'))
        mads.append(np.abs(yc - ctr).mean())
    return GroupSummary(codes.astype(int), counts, means, variances, mads, center)
