import os, six

import numpy as np
from joblib import Parallel, delayed


def to_bool(value):
    x = str(value).lower()
    if x in ("no", "n", "false", "f", "0", "0.0", "", "none", "[]", "{}"): return False
    return True


VERBOSE = to_bool(os.environ.get('LOCSCALE_VERBOSE', False))
OUT_DIR_ENV = 'LOCSCALE_OUT_DIR'


def is_string(obj):
    return isinstance(obj, six.string_types)


class LocScaleError(Exception):
    exit_code = 3

    def __init__(self, msg=None, data=None):
        super().__init__(msg)
        self.msg = msg
        self.data = data

    def __str__(self):
        return "Analysis failed" if self.msg is None else self.msg


class UsageError(LocScaleError, ValueError):
    exit_code = 1


class DataError(LocScaleError):
    exit_code = 2


def require(cond, msg, error=UsageError):
    if not cond:
        raise error(msg)


# ── random streams ───────────────────────────────────────────────────────────

MASK64 = (1 << 64) - 1


def splitmix64(x):
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master, *indices):
    """Mix a master seed with a path of indices into one 64-bit seed.

    The result only depends on the arguments, never on the order in which
    replicates are evaluated.
    """
    s = splitmix64(int(master) & MASK64)
    for i in indices:
        s = splitmix64(s ^ (int(i) & MASK64))
    return s


def replicate_rng(master, *indices):
    return np.random.default_rng(derive_seed(master, *indices))


# ── worker pool ──────────────────────────────────────────────────────────────

def blocks(total, size):
    """Split range(total) into consecutive (start, stop) pairs of a fixed size."""
    require(size >= 1, "Block size must be positive")
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def parallel_map(f, items, threads=1):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [f(*item) for item in items]
    return Parallel(n_jobs=threads)(delayed(f)(*item) for item in items)


# ── configuration files ──────────────────────────────────────────────────────

def normalize_key(key):
    return key.strip().lower().replace('-', '_')


def read_config(path):
    if not os.path.exists(path):
        raise UsageError("Config file does not exist: {}".format(path))
    result = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise UsageError("{}:{}: expected 'key = value'".format(path, lineno))
            key, value = line.split('=', 1)
            key = normalize_key(key)
            if not key:
                raise UsageError("{}:{}: missing key".format(path, lineno))
            result[key] = value.strip()
    return result


def output_path(path):
    out_dir = os.environ.get(OUT_DIR_ENV)
    if out_dir and not os.path.isabs(path):
        path = os.path.join(out_dir, path)
    mkdir(os.path.dirname(path) or '.')
    return path


def mkdir(p):
    if not os.path.exists(p): os.makedirs(p)
    return p


def as_list(x):
    if x is None:
        return []
    if is_string(x):
        return [x]
    return list(x)


def parse_floats(s, name='value'):
    """Parse a comma separated list of numbers such as '0.05,0.005'."""
    try:
        return [float(x) for x in as_list(s.split(',') if is_string(s) else s) if str(x).strip()]
    except ValueError:
        raise UsageError("Invalid {} list: {}".format(name, s))
