"""Joint location-scale (JLS) tests: Fisher and minP combination of a location
p-value and a scale p-value, with asymptotic or permutation p-values.
"""
import numpy as np

from locscale import numeric, stattests
from locscale.data import GenotypeVector, PhenotypeVector, check_aligned, complete_cases
from locscale.stattests import OK, DEGENERATE
from locscale.types import params, returns, is_array, is_probability, is_real
from locscale.util import UsageError, replicate_rng, blocks, parallel_map, require

FISHER_FLOOR = 1e-300
CONVENTIONS = ('add-one', 'strict')
# replicates degenerate in more than this share of permutations flag the result
UNSTABLE_FRACTION = 0.05
STATISTICS = ('location', 'scale', 'fisher', 'minp', 'lrt')

CLAMPED = 'clamped'
UNSTABLE = 'perm-unstable'


class JlsConfig:
    def __init__(self, location='ols', scale='levene-mean', lrt=True, min_group_size=2, p_floor=FISHER_FLOOR):
        stattests.location_kernel(location)
        stattests.scale_kernel(scale)
        require(min_group_size >= 1, "Minimum group size must be at least 1")
        require(0 < p_floor < 1, "Fisher p floor must be in (0, 1)")
        self.location = location
        self.scale = scale
        self.lrt = lrt
        self.min_group_size = min_group_size
        self.p_floor = p_floor

    def location_kernel(self):
        return stattests.location_kernel(self.location)

    def scale_kernel(self):
        return stattests.scale_kernel(self.scale, self.min_group_size)

    def __repr__(self):
        return "JlsConfig(location={}, scale={}, lrt={}, min_group_size={})".format(
            self.location, self.scale, self.lrt, self.min_group_size)


class Combination:
    """(statistic, p) pair that also remembers whether an input was clamped."""

    def __init__(self, statistic, p, clamped=False):
        self.statistic = statistic
        self.p = p
        self.clamped = clamped

    def __iter__(self):
        yield self.statistic
        yield self.p


def _check_p(p, name):
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise numeric.DomainError("{} must be a probability".format(name))
    return p


def fisher_arrays(p_location, p_scale, floor=FISHER_FLOOR):
    pl = _check_p(p_location, 'p_location')
    ps = _check_p(p_scale, 'p_scale')
    clamped = (pl < floor) | (ps < floor)
    with np.errstate(invalid='ignore'):
        w = -2.0 * np.log(np.maximum(pl, floor)) - 2.0 * np.log(np.maximum(ps, floor))
    return w, numeric.chi2_sf(w, 4), clamped


def minp_arrays(p_location, p_scale):
    w = np.fmin(_check_p(p_location, 'p_location'), _check_p(p_scale, 'p_scale'))
    # fmin ignores a single NaN; a missing component makes the minimum missing
    w = np.where(np.isnan(p_location) | np.isnan(p_scale), np.nan, w)
    return w, numeric.beta12_cdf(w)


def fisher_combine(p_location, p_scale, floor=FISHER_FLOOR):
    """W_F = -2 ln p_L - 2 ln p_S referred to chi-square with 4 degrees of freedom."""
    w, p, clamped = fisher_arrays(p_location, p_scale, floor)
    return Combination(float(w), float(p), bool(clamped))


def minp_combine(p_location, p_scale):
    """W_M = min(p_L, p_S) referred to Beta(1, 2): p = 1 - (1 - W_M)^2."""
    w, p = minp_arrays(p_location, p_scale)
    return Combination(float(w), float(p))


class JlsResult:
    def __init__(self, variant_id, chrom, n_used, location, scale, lrt=None, p_floor=FISHER_FLOOR):
        self.variant_id = variant_id
        self.chrom = chrom
        self.n_used = n_used
        self.location = location
        self.scale = scale
        self.lrt = lrt
        self.flags = []
        fisher = fisher_combine(location.p, scale.p, p_floor)
        minp = minp_combine(location.p, scale.p)
        self.w_fisher, self.p_fisher = fisher
        self.w_minp, self.p_minp = minp
        if fisher.clamped: self.flags.append(CLAMPED)

    @property
    def p_location(self):
        return self.location.p

    @property
    def p_scale(self):
        return self.scale.p

    @property
    def p_lrt(self):
        return float('nan') if self.lrt is None else self.lrt.p

    @property
    def ok(self):
        return self.location.ok and self.scale.ok

    @property
    def status(self):
        if not self.ok:
            return DEGENERATE
        return ','.join([OK] + self.flags)

    def __repr__(self):
        return "JlsResult({}, p_location={}, p_scale={}, w_fisher={}, p_fisher={}, p_minp={}, status={})".format(
            self.variant_id, self.p_location, self.p_scale, self.w_fisher, self.p_fisher, self.p_minp, self.status)


@params(geno=GenotypeVector, pheno=PhenotypeVector, config=JlsConfig)
def jls_single_variant(geno, pheno, config=None):
    config = config or JlsConfig()
    x, y = complete_cases(geno, pheno)
    location = config.location_kernel()(x, y).outcome(config.location)
    scale = config.scale_kernel()(x, y).outcome(config.scale)
    lrt = stattests.lrt_kernel(x, y).outcome('lrt') if config.lrt else None
    return JlsResult(geno.variant_id, geno.chrom, len(x), location, scale, lrt, config.p_floor)


# ── permutation ──────────────────────────────────────────────────────────────

class PermutationPlan:
    def __init__(self, replicates, seed=0, convention='add-one', block_size=256):
        require(int(replicates) >= 1, "Number of permutation replicates must be at least 1")
        if convention not in CONVENTIONS:
            raise UsageError("Unknown permutation p-value convention: {}".format(convention))
        self.replicates = int(replicates)
        self.seed = int(seed)
        self.convention = convention
        self.block_size = block_size

    def blocks(self):
        return blocks(self.replicates, self.block_size)

    def __repr__(self):
        return "PermutationPlan(K={}, seed={}, convention={})".format(self.replicates, self.seed, self.convention)


@params(observed=is_real)
@returns(is_probability)
def permutation_pvalue(observed, replicates, convention='add-one'):
    """Share of replicate statistics at least as extreme (larger) as observed.

    strict: #{W_k > W} / K; add-one: (#{W_k >= W} + 1) / (K + 1).
    Missing replicate statistics never count as extreme.
    """
    replicates = np.asarray(replicates, dtype=float)
    if replicates.size == 0:
        raise UsageError("Permutation p-value needs at least one replicate")
    if convention not in CONVENTIONS:
        raise UsageError("Unknown permutation p-value convention: {}".format(convention))
    if np.isnan(observed):
        return float('nan')
    K = replicates.size
    with np.errstate(invalid='ignore'):
        if convention == 'strict':
            return float(np.sum(replicates > observed)) / K
        return (float(np.sum(replicates >= observed)) + 1.0) / (K + 1)


def shuffle_order(seed, k, n):
    """Fisher-Yates shuffle of range(n) for replicate k."""
    return replicate_rng(seed, k).permutation(n)


def permuted_phenotypes(values, seed, start, stop):
    """Rows k = start..stop-1 of phenotype permutations; missing values stay put."""
    avail = np.flatnonzero(~np.isnan(values))
    out = np.tile(values, (stop - start, 1))
    for row, k in enumerate(range(start, stop)):
        out[row, avail] = values[avail[shuffle_order(seed, k, len(avail))]]
    return out


@params(x=is_array, Y=is_array, config=JlsConfig)
def score_batch(x, Y, config):
    """Evidence scores (larger = more extreme) for each row of Y.

    Returns a dict keyed by STATISTICS plus 'ok' (both components usable).
    """
    location = config.location_kernel()(x, Y)
    scale = config.scale_kernel()(x, Y)
    w_fisher, _, _ = fisher_arrays(location.p, scale.p, config.p_floor)
    w_minp, _ = minp_arrays(location.p, scale.p)
    with np.errstate(divide='ignore', invalid='ignore'):
        scores = {
            'location': -np.log(location.p),
            'scale': -np.log(scale.p),
            'fisher': w_fisher,
            'minp': -np.log(w_minp),
        }
        if config.lrt:
            scores['lrt'] = stattests.lrt_kernel(x, Y).statistic
    scores['ok'] = location.ok & scale.ok
    return scores


def _score_block(x, keep, values, seed, config, start, stop):
    Y = permuted_phenotypes(values, seed, start, stop)[:, keep]
    return score_batch(x, Y, config)


class PermutationResult:
    def __init__(self, observed, pvalues, replicates, degenerate_fraction):
        self.observed = observed
        self.pvalues = pvalues
        self.replicates = replicates
        self.degenerate_fraction = degenerate_fraction

    @property
    def unstable(self):
        return self.degenerate_fraction > UNSTABLE_FRACTION

    def __getattr__(self, name):
        if name.startswith('p_') and name[2:] in STATISTICS:
            return self.pvalues.get(name[2:], float('nan'))
        raise AttributeError(name)


@params(geno=GenotypeVector, pheno=PhenotypeVector, plan=PermutationPlan)
def permute_and_rescore(geno, pheno, plan, config=None, threads=1):
    """Permutation p-values of every JLS statistic for one variant."""
    config = config or JlsConfig()
    check_aligned(geno, pheno)
    observed = jls_single_variant(geno, pheno, config)
    if not observed.ok:
        return PermutationResult(observed, {s: float('nan') for s in STATISTICS}, plan.replicates, 1.0)
    keep = ~geno.missing & ~pheno.missing
    x = geno.codes[keep].astype(float)
    obs = score_batch(x, pheno.values[keep], config)
    parts = parallel_map(_score_block,
                         [(x, keep, pheno.values, plan.seed, config, start, stop) for start, stop in plan.blocks()],
                         threads)
    pvalues = {}
    for name in obs:
        if name == 'ok':
            continue
        reps = np.concatenate([part[name] for part in parts])
        pvalues[name] = permutation_pvalue(obs[name][0], reps, plan.convention)
    ok = np.concatenate([part['ok'] for part in parts])
    result = PermutationResult(observed, pvalues, plan.replicates, 1.0 - ok.mean())
    if result.unstable:
        observed.flags.append(UNSTABLE)
    return result
