"""Reading and writing the tab separated files of the command-line tool.

All files are UTF-8, tab separated, ``\\n`` terminated and use the literal
``NA`` for missing values.
"""
import os

import numpy as np
import pandas as pd
from scipy import stats

from locscale import numeric
from locscale.data import GenotypeVector, PhenotypeVector, MISSING, MALE, FEMALE
from locscale.geneset import GeneSet
from locscale.util import DataError, UsageError, require

NA = 'NA'
SEP = '\t'
BLOM_OFFSET = 3.0 / 8.0
UNKNOWN_SEX = 0

RESULT_COLUMNS = ['variant_id', 'chrom', 'n_used', 'p_loc', 'p_scale', 'w_fisher', 'p_fisher', 'w_minp', 'p_minp',
                  'p_lrt', 'status']
GENESET_COLUMNS = ['set_id', 'J_used', 'J_excluded', 'statistic', 'observed', 'K', 'p_perm', 'status']
_GENOTYPE_CODES = {'0': 0, '1': 1, '2': 2, NA: MISSING}
_SEX_CODES = {'1': MALE, '2': FEMALE, '0': UNKNOWN_SEX, NA: UNKNOWN_SEX, '': UNKNOWN_SEX}


def _fields_mismatch(found, expected):
    return "expected {} fields, found {}".format(expected, found)


def _check_field_counts(path, mismatch):
    with open(path, encoding='utf-8') as f:
        expected = None
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip('\n').rstrip('\r')
            if not line:
                continue
            found = line.count(SEP) + 1
            if expected is None:
                expected = found
            elif found != expected:
                raise DataError("{}:{}: {}".format(path, lineno, mismatch(found, expected)))


def _read_table(path, mismatch=_fields_mismatch):
    if not os.path.exists(path):
        raise UsageError("Input file does not exist: {}".format(path))
    try:
        _check_field_counts(path, mismatch)
        frame = pd.read_csv(path, sep=SEP, dtype=str, keep_default_na=False, skip_blank_lines=True,
                            index_col=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise DataError("{}: file is empty".format(path))
    except (pd.errors.ParserError, UnicodeDecodeError) as err:
        raise DataError("{}: {}".format(path, err))
    return frame


def _header(path):
    with open(path, encoding='utf-8') as f:
        return f.readline().rstrip('\n').rstrip('\r').split(SEP)


def _line(row):
    # header is line 1
    return row + 2


def _duplicates(ids, path, what):
    seen = {}
    for row, i in enumerate(ids):
        if i in seen:
            raise DataError("{}:{}: duplicate {} {} (first seen on line {})".format(
                path, _line(row), what, i, _line(seen[i])))
        seen[i] = row


# ── phenotypes ───────────────────────────────────────────────────────────────

class PhenotypeTable:
    def __init__(self, sample_ids, values, sexes=None, name='phenotype'):
        self.sample_ids = list(sample_ids)
        self.values = np.asarray(values, dtype=float)
        self.sexes = None if sexes is None else np.asarray(sexes, dtype=int)
        self.name = name

    def __len__(self):
        return len(self.sample_ids)

    @property
    def has_sex(self):
        return self.sexes is not None

    def sex_of(self):
        if self.sexes is None:
            return {}
        return dict(zip(self.sample_ids, self.sexes))

    def vector(self):
        return PhenotypeVector(self.values, self.sample_ids)

    def take(self, index):
        sexes = None if self.sexes is None else self.sexes[index]
        return PhenotypeTable([self.sample_ids[i] for i in index], self.values[index], sexes, self.name)


def _parse_value(text, path, row):
    if text == NA:
        return float('nan')
    try:
        value = float(text)
    except ValueError:
        raise DataError("{}:{}: cannot parse phenotype value {!r}".format(path, _line(row), text))
    if not np.isfinite(value):
        raise DataError("{}:{}: phenotype value must be finite: {!r}".format(path, _line(row), text))
    return value


def load_phenotypes(path):
    """``sample_id<TAB>phenotype[<TAB>sex]`` with sex 1 = male, 2 = female."""
    frame = _read_table(path)
    columns = list(frame.columns)
    if len(columns) not in (2, 3) or columns[0] != 'sample_id' or (len(columns) == 3 and columns[2] != 'sex'):
        raise DataError("{}:1: expected header 'sample_id<TAB>phenotype[<TAB>sex]', found {!r}".format(
            path, SEP.join(columns)))
    ids = frame['sample_id'].tolist()
    _duplicates(ids, path, 'sample id')
    values = [_parse_value(v, path, row) for row, v in enumerate(frame[columns[1]])]
    sexes = None
    if len(columns) == 3:
        sexes = []
        for row, s in enumerate(frame['sex']):
            if s not in _SEX_CODES:
                raise DataError("{}:{}: invalid sex code {!r} (use 1, 2 or NA)".format(path, _line(row), s))
            sexes.append(_SEX_CODES[s])
    return PhenotypeTable(ids, values, sexes, name=columns[1])


def write_phenotypes(table, path):
    frame = pd.DataFrame({'sample_id': table.sample_ids, table.name: [format_value(v) for v in table.values]})
    if table.sexes is not None:
        frame['sex'] = [NA if s == UNKNOWN_SEX else str(s) for s in table.sexes]
    _write_frame(frame, path)


# ── genotypes ────────────────────────────────────────────────────────────────

class GenotypeMatrix:
    """Variants x samples matrix of minor allele counts keyed by variant id."""

    def __init__(self, variant_ids, chroms, codes, sample_ids):
        self.variant_ids = list(variant_ids)
        self.chroms = [str(c) for c in chroms]
        self.codes = np.asarray(codes, dtype=np.int8).reshape(len(self.variant_ids), len(sample_ids))
        self.sample_ids = list(sample_ids)
        self.index = {v: i for i, v in enumerate(self.variant_ids)}

    def __len__(self):
        return len(self.variant_ids)

    def __contains__(self, variant_id):
        return variant_id in self.index

    def vector(self, row):
        return GenotypeVector(self.codes[row], self.variant_ids[row], self.chroms[row], self.sample_ids)

    def get(self, variant_id):
        return self.vector(self.index[variant_id])

    def __iter__(self):
        for row in range(len(self)):
            yield self.vector(row)

    def take(self, index):
        return GenotypeMatrix(self.variant_ids, self.chroms, self.codes[:, index], [self.sample_ids[i] for i in index])

    def validate_sex(self, sexes):
        """Check X-chromosome rows against a sample id -> sex mapping."""
        if not sexes:
            return
        sex = np.array([sexes.get(s, UNKNOWN_SEX) for s in self.sample_ids])
        for row in range(len(self)):
            geno = self.vector(row)
            if geno.is_x():
                geno.check_x_coding(sex, self.sample_ids)


def _genotype_mismatch(found, expected):
    return "{} genotypes for {} samples in the header".format(found - 2, expected - 2)


def load_genotypes(path, sexes=None):
    """``variant_id<TAB>chrom<TAB>g_1 ... g_n`` under a header naming the samples."""
    frame = _read_table(path, _genotype_mismatch)
    columns = _header(path)
    if len(columns) < 3 or columns[0] != 'variant_id' or columns[1] != 'chrom':
        raise DataError("{}:1: expected header 'variant_id<TAB>chrom<TAB>sample ids...'".format(path))
    samples = columns[2:]
    dups = [s for s in set(samples) if samples.count(s) > 1]
    if dups:
        raise DataError("{}:1: duplicate sample id(s) in header: {}".format(path, ', '.join(sorted(dups))))
    _duplicates(frame['variant_id'].tolist(), path, 'variant id')
    raw = frame[samples].to_numpy(dtype=str)
    bad = ~np.isin(raw, list(_GENOTYPE_CODES))
    if np.any(bad):
        row, col = [int(i) for i in np.argwhere(bad)[0]]
        raise DataError("{}:{}: invalid genotype code {!r} for variant {} sample {} (use 0, 1, 2 or NA)".format(
            path, _line(row), str(raw[row, col]), frame['variant_id'].iloc[row], samples[col]))
    codes = np.full(raw.shape, MISSING, dtype=np.int8)
    for text, code in _GENOTYPE_CODES.items():
        codes[raw == text] = code
    matrix = GenotypeMatrix(frame['variant_id'], frame['chrom'], codes, samples)
    matrix.validate_sex(sexes)
    return matrix


def write_genotypes(matrix, path):
    table = np.where(matrix.codes == MISSING, NA, matrix.codes.astype(str))
    frame = pd.DataFrame(table, columns=matrix.sample_ids)
    frame.insert(0, 'chrom', matrix.chroms)
    frame.insert(0, 'variant_id', matrix.variant_ids)
    _write_frame(frame, path)


# ── gene sets ────────────────────────────────────────────────────────────────

def load_genesets(path):
    """GMT style lines ``set_id<TAB>description<TAB>variant ids...``."""
    if not os.path.exists(path):
        raise UsageError("Gene-set file does not exist: {}".format(path))
    sets, seen = [], {}
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip('\n').rstrip('\r')
            if not line.strip():
                continue
            fields = line.split(SEP)
            if len(fields) < 2 or not fields[0]:
                raise DataError("{}:{}: expected 'set_id<TAB>description<TAB>variant ids'".format(path, lineno))
            set_id = fields[0]
            if set_id in seen:
                raise DataError("{}:{}: duplicate gene set {} (first seen on line {})".format(
                    path, lineno, set_id, seen[set_id]))
            seen[set_id] = lineno
            try:
                sets.append(GeneSet(set_id, fields[1], [v for v in fields[2:] if v]))
            except DataError as err:
                raise DataError("{}:{}: {}".format(path, lineno, err))
    if not sets:
        raise DataError("{}: no gene sets found".format(path))
    return sets


# ── phenotype transformation ─────────────────────────────────────────────────

def inverse_normal_transform(values, offset=BLOM_OFFSET):
    """Rank-based inverse normal transform of the non-missing values.

    z_i = quantile((r_i - c) / (m - 2c + 1)) with average ranks for ties;
    c = 3/8 is Blom's offset, c = 1/2 the rankit.
    """
    require(0 <= offset < 1, "INT offset must be in [0, 1)")
    values = np.asarray(values, dtype=float)
    present = ~np.isnan(values)
    m = int(present.sum())
    if m < 2:
        raise DataError("Inverse normal transform needs at least two non-missing values")
    v = values[present]
    if np.all(v == v[0]):
        raise DataError("Inverse normal transform of a constant phenotype is undefined")
    ranks = stats.rankdata(v, method='average')
    out = np.full(values.shape, np.nan)
    out[present] = numeric.normal_quantile((ranks - offset) / (m - 2.0 * offset + 1.0))
    return out


# ── results ──────────────────────────────────────────────────────────────────

def format_p(x):
    """Scientific notation with seven significant digits: 1.382300e-1."""
    if x is None or np.isnan(x):
        return NA
    mantissa, exponent = '{:.6e}'.format(x).split('e')
    return '{}e{}'.format(mantissa, int(exponent))


def format_value(x):
    if x is None or np.isnan(x):
        return NA
    return repr(float(x))


def _write_frame(frame, path):
    try:
        frame.to_csv(path, sep=SEP, index=False, na_rep=NA, lineterminator='\n', encoding='utf-8')
    except OSError as err:
        raise UsageError("Cannot write {}: {}".format(path, err))


def result_row(result, methods=('fisher', 'minp')):
    """One results row of a JlsResult, or of a PermutationResult (permutation p's for the joint tests)."""
    perm = None
    if hasattr(result, 'pvalues'):
        perm, result = result, result.observed
    p_fisher = perm.p_fisher if perm else result.p_fisher
    p_minp = perm.p_minp if perm else result.p_minp
    p_lrt = perm.p_lrt if perm else result.p_lrt
    joint = result.ok
    return {
        'variant_id': result.variant_id,
        'chrom': result.chrom,
        'n_used': str(result.n_used),
        'p_loc': format_p(result.p_location),
        'p_scale': format_p(result.p_scale),
        'w_fisher': format_p(result.w_fisher) if joint and 'fisher' in methods else NA,
        'p_fisher': format_p(p_fisher) if joint and 'fisher' in methods else NA,
        'w_minp': format_p(result.w_minp) if joint and 'minp' in methods else NA,
        'p_minp': format_p(p_minp) if joint and 'minp' in methods else NA,
        'p_lrt': format_p(p_lrt),
        'status': result.status,
    }


def write_results(results, path, methods=('fisher', 'minp')):
    rows = [result_row(r, methods) for r in results]
    _write_frame(pd.DataFrame(rows, columns=RESULT_COLUMNS), path)
    return len(rows)


def read_results(path):
    if not os.path.exists(path):
        raise UsageError("Results file does not exist: {}".format(path))
    frame = pd.read_csv(path, sep=SEP, dtype={'variant_id': str, 'chrom': str, 'status': str},
                        na_values=[NA], keep_default_na=False)
    if list(frame.columns) != RESULT_COLUMNS:
        raise DataError("{}:1: not a results file (header {!r})".format(path, SEP.join(frame.columns)))
    return frame


def write_geneset_results(results, path):
    rows = [{
        'set_id': r.set_id,
        'J_used': r.J_used,
        'J_excluded': r.excluded,
        'statistic': r.statistic,
        'observed': format_p(r.observed),
        'K': r.replicates,
        'p_perm': format_p(r.p),
        'status': r.status,
    } for r in results]
    _write_frame(pd.DataFrame(rows, columns=GENESET_COLUMNS), path)
    return len(rows)


def write_table(frame, path):
    _write_frame(frame, path)
