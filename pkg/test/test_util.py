import os

import pytest

import locscale.util as util


# ── to_bool ──────────────────────────────────────────────────────────────────

class TestToBool:
    @pytest.mark.parametrize("value", ["no", "n", "false", "f", "0", "0.0", "", "none", "[]", "{}"])
    def test_falsy_strings(self, value):
        assert util.to_bool(value) is False

    @pytest.mark.parametrize("value", ["NO", "False", "None", "FALSE", "N"])
    def test_falsy_case_insensitive(self, value):
        assert util.to_bool(value) is False

    @pytest.mark.parametrize("value", ["yes", "1", "true", "anything", "on"])
    def test_truthy_strings(self, value):
        assert util.to_bool(value) is True

    def test_bool(self):
        assert util.to_bool(True) is True
        assert util.to_bool(False) is False


# ── errors ───────────────────────────────────────────────────────────────────

class TestErrors:
    def test_exit_codes(self):
        assert util.UsageError.exit_code == 1
        assert util.DataError.exit_code == 2
        assert util.LocScaleError.exit_code == 3

    def test_usage_error_is_value_error(self):
        assert issubclass(util.UsageError, ValueError)
        assert issubclass(util.UsageError, util.LocScaleError)

    def test_message_and_data(self):
        err = util.DataError("bad row", data=[1, 2])
        assert str(err) == "bad row"
        assert err.data == [1, 2]

    def test_default_message(self):
        assert str(util.LocScaleError()) == "Analysis failed"

    def test_require_passes(self):
        util.require(True, "never raised")

    def test_require_raises_usage_error(self):
        with pytest.raises(util.UsageError, match="K must be positive"):
            util.require(False, "K must be positive")

    def test_require_custom_error(self):
        with pytest.raises(util.DataError):
            util.require(False, "bad", error=util.DataError)


# ── random streams ───────────────────────────────────────────────────────────

class TestSeeds:
    def test_splitmix64_reference_value(self):
        assert util.splitmix64(0) == 0xE220A8397B1DCDAF

    def test_splitmix64_stays_in_64_bits(self):
        assert 0 <= util.splitmix64(util.MASK64) <= util.MASK64

    def test_derive_seed_deterministic(self):
        assert util.derive_seed(42, 3, 7) == util.derive_seed(42, 3, 7)

    def test_derive_seed_depends_on_every_index(self):
        seeds = {util.derive_seed(42), util.derive_seed(42, 0), util.derive_seed(42, 1), util.derive_seed(42, 0, 1),
                 util.derive_seed(42, 1, 0), util.derive_seed(43, 0)}
        assert len(seeds) == 6

    def test_replicate_rng_reproducible(self):
        a = util.replicate_rng(7, 1, 2).random(5)
        b = util.replicate_rng(7, 1, 2).random(5)
        assert (a == b).all()

    def test_negative_master_seed(self):
        assert util.derive_seed(-1) == util.derive_seed(util.MASK64)


# ── worker pool ──────────────────────────────────────────────────────────────

class TestBlocks:
    def test_even_split(self):
        assert util.blocks(8, 4) == [(0, 4), (4, 8)]

    def test_remainder(self):
        assert util.blocks(10, 4) == [(0, 4), (4, 8), (8, 10)]

    def test_empty(self):
        assert util.blocks(0, 4) == []

    def test_block_larger_than_total(self):
        assert util.blocks(3, 100) == [(0, 3)]

    def test_invalid_size(self):
        with pytest.raises(util.UsageError):
            util.blocks(10, 0)


class TestParallelMap:
    def test_sequential(self):
        assert util.parallel_map(pow, [(2, 3), (3, 2)]) == [8, 9]

    def test_parallel_keeps_order(self):
        items = [(i, 2) for i in range(10)]
        assert util.parallel_map(pow, items, threads=2) == [i * i for i in range(10)]

    def test_empty(self):
        assert util.parallel_map(pow, [], threads=4) == []


# ── configuration files ──────────────────────────────────────────────────────

class TestReadConfig:
    def test_key_values(self, tmp_path):
        p = tmp_path / 'locscale.cfg'
        p.write_text("# scan defaults\nlocation = anova\n\nmin-group-size = 3  # inline comment\n")
        assert util.read_config(str(p)) == {'location': 'anova', 'min_group_size': '3'}

    def test_keys_normalized(self, tmp_path):
        p = tmp_path / 'locscale.cfg'
        p.write_text("Int-Offset = 0.5\n")
        assert util.read_config(str(p)) == {'int_offset': '0.5'}

    def test_bad_line_reports_line_number(self, tmp_path):
        p = tmp_path / 'locscale.cfg'
        p.write_text("seed = 1\nthreads 4\n")
        with pytest.raises(util.UsageError, match=":2:"):
            util.read_config(str(p))

    def test_missing_key(self, tmp_path):
        p = tmp_path / 'locscale.cfg'
        p.write_text(" = 4\n")
        with pytest.raises(util.UsageError, match="missing key"):
            util.read_config(str(p))

    def test_missing_file(self, tmp_path):
        with pytest.raises(util.UsageError, match="does not exist"):
            util.read_config(str(tmp_path / 'nope.cfg'))


# ── paths and parsing ────────────────────────────────────────────────────────

class TestOutputPath:
    def test_relative_path_under_env_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(util.OUT_DIR_ENV, str(tmp_path / 'out'))
        p = util.output_path('results.tsv')
        assert p == os.path.join(str(tmp_path / 'out'), 'results.tsv')
        assert os.path.isdir(str(tmp_path / 'out'))

    def test_absolute_path_untouched(self, tmp_path, monkeypatch):
        monkeypatch.setenv(util.OUT_DIR_ENV, str(tmp_path / 'out'))
        target = str(tmp_path / 'elsewhere' / 'r.tsv')
        assert util.output_path(target) == target
        assert os.path.isdir(str(tmp_path / 'elsewhere'))

    def test_no_env(self, tmp_path, monkeypatch):
        monkeypatch.delenv(util.OUT_DIR_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        assert util.output_path('r.tsv') == 'r.tsv'


class TestParseFloats:
    def test_comma_list(self):
        assert util.parse_floats("0.05,0.005, 5e-4") == [0.05, 0.005, 0.0005]

    def test_trailing_comma(self):
        assert util.parse_floats("0.05,") == [0.05]

    def test_sequence(self):
        assert util.parse_floats([1, '2']) == [1.0, 2.0]

    def test_invalid(self):
        with pytest.raises(util.UsageError, match="alpha"):
            util.parse_floats("0.05,abc", 'alpha')


class TestAsList:
    def test_none(self):
        assert util.as_list(None) == []

    def test_string(self):
        assert util.as_list("a") == ["a"]

    def test_tuple(self):
        assert util.as_list((1, 2)) == [1, 2]
