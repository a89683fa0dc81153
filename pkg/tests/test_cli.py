"""Tests for the command-line interface."""

import json

import pytest
from click.testing import CliRunner

from moment_realizer.cli import cli, main
from moment_realizer.version import __version__


@pytest.fixture
def runner():
    """Click test runner."""
    return CliRunner()


@pytest.fixture
def forced_document():
    """One site, at most two particles, moments forcing R = 4."""
    return {
        "sites": ["a"],
        "kspec": {"variant": "at_most", "Q": 2},
        "L": {"ell0": "1", "ell1": ["1"], "ell2": [["2"]]},
        "gamma": ["1"],
    }


def read(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestRealize:
    """Test cases for the realize command."""

    def test_measure(self, runner, tmp_path, instance_file, coin_document):
        """A realizable instance exits 0 and writes the measure."""
        out = tmp_path / "result.json"
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document)),
                                     "-o", str(out)])
        assert result.exit_code == 0
        data = read(out)
        assert data["verdict"] == "measure"
        assert data["support"] == [{"counts": [0], "weight": "1/2"}, {"counts": [1], "weight": "1/2"}]

    def test_certificate(self, runner, tmp_path, instance_file, bad_variance_document):
        """A non-realizable instance exits 1 with a certificate."""
        out = tmp_path / "result.json"
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(bad_variance_document)),
                                     "-o", str(out), "--verify"])
        assert result.exit_code == 1
        assert read(out)["verdict"] == "certificate"

    def test_stdout_json(self, runner, instance_file, coin_document):
        """Without -o the verdict is printed as JSON."""
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document))])
        assert result.exit_code == 0
        assert '"verdict": "measure"' in result.output

    def test_table_format(self, runner, instance_file, coin_document):
        """--format table prints the support."""
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document)),
                                     "--format", "table"])
        assert result.exit_code == 0
        assert "Representing measure" in result.output

    def test_ell0_override(self, runner, tmp_path, instance_file, coin_document):
        """--ell0 replaces the total mass."""
        out = tmp_path / "result.json"
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document)),
                                     "--ell0", "2", "-o", str(out)])
        assert result.exit_code == 0
        weights = {tuple(a["counts"]): a["weight"] for a in read(out)["support"]}
        assert weights == {(0,): "3/2", (1,): "1/2"}

    def test_float_is_usage_error(self, runner, instance_file, coin_document):
        """Malformed instances exit 2 and name the JSON path."""
        coin_document["L"]["ell1"] = [0.5]
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document))])
        assert result.exit_code == 2
        assert "$.L.ell1[0]" in result.output

    def test_invalid_json(self, runner, tmp_path):
        """Unparsable files exit 2."""
        path = tmp_path / "broken.json"
        path.write_text("{", encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "realize", str(path)])
        assert result.exit_code == 2

    def test_invalid_utf8(self, runner, tmp_path):
        """An instance file that is not UTF-8 exits 2."""
        path = tmp_path / "binary.json"
        path.write_bytes(b"\xff\xfe{\x00")
        result = runner.invoke(cli, ["--quiet", "realize", str(path)])
        assert result.exit_code == 2

    def test_cap_exceeded(self, runner, instance_file, coin_document):
        """Exceeding the enumeration cap exits 3."""
        coin_document["kspec"]["Q"] = 5
        result = runner.invoke(cli, ["--quiet", "realize", str(instance_file(coin_document))],
                               env={"MOMENT_REALIZER_ENUMERATION_CAP": "2"})
        assert result.exit_code == 3


class TestExtendCubic:
    """Test cases for the extend-cubic command."""

    def test_certificate(self, runner, tmp_path, instance_file, forced_document):
        """R_max below R* exits 1 with a restricted cubic."""
        out = tmp_path / "cubic.json"
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance_file(forced_document)),
                                     "--r-max", "1", "-o", str(out)])
        assert result.exit_code == 1
        data = read(out)
        assert data["r_max"] == "1"
        assert data["certificate"]["gamma"] == ["1"]

    def test_measure(self, runner, tmp_path, instance_file, forced_document):
        """R_max above R* exits 0."""
        out = tmp_path / "cubic.json"
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance_file(forced_document)),
                                     "--r-max", "4", "-o", str(out)])
        assert result.exit_code == 0
        assert read(out)["realized_R"] == "4"

    def test_minimize(self, runner, tmp_path, instance_file, forced_document):
        """--minimize reports R*."""
        out = tmp_path / "minimal.json"
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance_file(forced_document)),
                                     "--minimize", "-o", str(out)])
        assert result.exit_code == 0
        assert read(out)["minimal_R"] == "4"

    def test_missing_gamma(self, runner, instance_file, coin_document):
        """The cubic problem needs gamma."""
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance_file(coin_document)),
                                     "--r-max", "1"])
        assert result.exit_code == 2

    def test_gamma_option(self, runner, instance_file, coin_document):
        """--gamma supplies the site weights."""
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance_file(coin_document)),
                                     "--r-max", "1", "--gamma", "1"])
        assert result.exit_code == 0


class TestCertifyCheck:
    """Test cases for the certify-check command."""

    def test_valid_result(self, runner, tmp_path, instance_file, bad_variance_document):
        """A stored certificate verifies."""
        instance = instance_file(bad_variance_document)
        out = tmp_path / "result.json"
        runner.invoke(cli, ["--quiet", "realize", str(instance), "-o", str(out)])
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 0

    def test_tampered_measure(self, runner, tmp_path, instance_file, coin_document):
        """A tampered weight fails with exit code 4."""
        instance = instance_file(coin_document)
        out = tmp_path / "result.json"
        runner.invoke(cli, ["--quiet", "realize", str(instance), "-o", str(out)])
        data = read(out)
        data["support"][1]["weight"] = "1/4"
        out.write_text(json.dumps(data), encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 4
        assert "FAIL" in result.output

    def test_tampered_certificate(self, runner, tmp_path, instance_file, bad_variance_document):
        """A certificate with a negative constant fails."""
        instance = instance_file(bad_variance_document)
        out = tmp_path / "result.json"
        runner.invoke(cli, ["--quiet", "realize", str(instance), "-o", str(out)])
        data = read(out)
        data["certificate"]["f0"] = "-5"
        out.write_text(json.dumps(data), encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 4

    def test_extend_cubic_measure_round_trip(self, runner, tmp_path, instance_file, coin_document):
        """A measure from extend-cubic with --gamma re-verifies against the plain instance."""
        instance = instance_file(coin_document)
        out = tmp_path / "r.json"
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance), "--gamma", "1",
                                     "--r-max", "1", "-o", str(out)])
        assert result.exit_code == 0
        assert read(out)["gamma"] == ["1"]
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 0

    def test_extend_cubic_certificate_round_trip(self, runner, tmp_path, instance_file, forced_document):
        """A restricted cubic from extend-cubic re-verifies."""
        instance = instance_file(forced_document)
        out = tmp_path / "r.json"
        result = runner.invoke(cli, ["--quiet", "extend-cubic", str(instance), "--r-max", "1",
                                     "-o", str(out)])
        assert result.exit_code == 1
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 0

    def test_gamma_and_r_max_options(self, runner, tmp_path, instance_file, coin_document):
        """--gamma and --r-max supply the context when the result file lacks it."""
        instance = instance_file(coin_document)
        out = tmp_path / "r.json"
        runner.invoke(cli, ["--quiet", "extend-cubic", str(instance), "--gamma", "1",
                            "--r-max", "1", "-o", str(out)])
        data = read(out)
        del data["gamma"]
        del data["r_max"]
        out.write_text(json.dumps(data), encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out)])
        assert result.exit_code == 4
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out),
                                     "--gamma", "1", "--r-max", "1"])
        assert result.exit_code == 0
        result = runner.invoke(cli, ["--quiet", "certify-check", str(instance), str(out),
                                     "--gamma", "1", "--r-max", "1/4"])
        assert result.exit_code == 4


class TestEnumerate:
    """Test cases for the enumerate command."""

    def test_count(self, runner):
        """Three sites with at most two particles give ten configurations."""
        result = runner.invoke(cli, ["--quiet", "enumerate", "--sites", "3", "--q", "2", "--count"])
        assert result.exit_code == 0
        assert result.output.strip() == "10"

    def test_json_list(self, runner):
        """Configurations are listed in lexicographic order."""
        result = runner.invoke(cli, ["--quiet", "enumerate", "--sites", "a,b", "--spacing", "1",
                                     "--variant", "hard_core", "--d", "2", "--q", "2"])
        assert result.exit_code == 0
        assert json.loads(result.output) == [[0, 0], [0, 1], [1, 0]]

    def test_hard_core_needs_d(self, runner):
        """--d is required for hard_core."""
        result = runner.invoke(cli, ["--quiet", "enumerate", "--sites", "2", "--spacing", "1",
                                     "--variant", "hard_core", "--q", "2"])
        assert result.exit_code == 2


class TestGenerate:
    """Test cases for the generate command."""

    def test_bernoulli_round_trip(self, runner, tmp_path):
        """A generated instance is realizable."""
        instance = tmp_path / "bernoulli.json"
        result = runner.invoke(cli, ["--quiet", "generate", "bernoulli", "--sites", "a,b",
                                     "--probs", "1/2,1/3", "-o", str(instance)])
        assert result.exit_code == 0
        data = read(instance)
        assert data["kspec"] == {"variant": "simple", "Q": 2}
        assert data["L"]["ell2"][0][1] == "1/6"
        result = runner.invoke(cli, ["--quiet", "realize", str(instance), "-o", str(tmp_path / "r.json")])
        assert result.exit_code == 0

    def test_poisson_measure(self, runner, tmp_path):
        """--measure-only writes the support."""
        out = tmp_path / "poisson.json"
        result = runner.invoke(cli, ["--quiet", "generate", "poisson", "--sites", "1",
                                     "--intensities", "2", "--cap", "2", "--measure-only", "-o", str(out)])
        assert result.exit_code == 0
        weights = [a["weight"] for a in read(out)["support"]]
        assert weights == ["1/5", "2/5", "2/5"]

    def test_hardcore(self, runner, tmp_path):
        """Hard-core instances carry the hard-core K-spec."""
        out = tmp_path / "hardcore.json"
        result = runner.invoke(cli, ["--quiet", "generate", "hardcore", "--sites", "3", "--spacing", "1",
                                     "--d", "1", "--q", "2", "--z", "2", "-o", str(out)])
        assert result.exit_code == 0
        assert read(out)["kspec"] == {"variant": "hard_core", "Q": 2, "D": "1"}

    def test_random_is_reproducible(self, runner, tmp_path):
        """Equal seeds give equal instances."""
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            runner.invoke(cli, ["--quiet", "generate", "random", "--sites", "2", "--q", "2",
                                "--seed", "5", "-o", str(path)])
        assert read(paths[0]) == read(paths[1])

    def test_bad_probability(self, runner):
        """Probabilities above one exit 2."""
        result = runner.invoke(cli, ["--quiet", "generate", "bernoulli", "--sites", "1", "--probs", "2"])
        assert result.exit_code == 2


class TestMomentCommands:
    """Test cases for moments, convert and ratio-bound."""

    def test_moments(self, runner, tmp_path):
        """Power moments and correlations of a measure file."""
        measure = tmp_path / "mu.json"
        measure.write_text(json.dumps([{"counts": [2], "weight": "1"}]), encoding="utf-8")
        out = tmp_path / "moments.json"
        result = runner.invoke(cli, ["--quiet", "moments", str(measure), "-o", str(out)])
        assert result.exit_code == 0
        data = read(out)
        assert data["power"]["ell2"] == [["4"]]
        assert data["factorial"]["ell2"] == [["2"]]

    def test_convert(self, runner, tmp_path):
        """Correlation functions convert to moments."""
        tensors = tmp_path / "rho.json"
        tensors.write_text(json.dumps({"ell0": "1", "ell1": ["1/2"], "ell2": [["0"]]}), encoding="utf-8")
        out = tmp_path / "m.json"
        result = runner.invoke(cli, ["--quiet", "convert", str(tensors), "--to", "power", "-o", str(out)])
        assert result.exit_code == 0
        assert read(out)["ell2"] == [["1/2"]]

    def test_ratio_bound(self, runner, tmp_path):
        """lambda_b dominates the empirical ratio."""
        poly = tmp_path / "b.json"
        poly.write_text(json.dumps({"f0": "1", "f1": ["2", "0"], "f2": [["0", "-1/2"], ["-1/2", "0"]]}),
                        encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "ratio-bound", str(poly), "--q", "4"])
        assert result.exit_code == 0
        data = json.loads(result.output.strip().splitlines()[-1])
        assert data["lambda_b"] == "7/2"


class TestSweepAndBatch:
    """Test cases for sweep and batch."""

    def test_sweep(self, runner, instance_file, forced_document):
        """The sweep switches from certificate to measure."""
        result = runner.invoke(cli, ["--quiet", "sweep", str(instance_file(forced_document)),
                                     "--q-values", "1,2,3"])
        assert result.exit_code == 0
        assert "certificate" in result.output
        assert "measure" in result.output

    def test_batch(self, runner, tmp_path, coin_document, bad_variance_document):
        """Batch runs write one result per instance."""
        inputs = tmp_path / "in"
        inputs.mkdir()
        (inputs / "coin.json").write_text(json.dumps(coin_document), encoding="utf-8")
        (inputs / "variance.json").write_text(json.dumps(bad_variance_document), encoding="utf-8")
        out = tmp_path / "out"
        report = tmp_path / "report.txt"
        result = runner.invoke(cli, ["--quiet", "batch", str(inputs), "-o", str(out),
                                     "--verify", "--report", str(report)])
        assert result.exit_code == 0
        assert read(out / "coin.result.json")["verdict"] == "measure"
        assert read(out / "variance.result.json")["verdict"] == "certificate"
        assert "Verification passed: 2/2" in report.read_text(encoding="utf-8")

    def test_batch_with_failure(self, runner, tmp_path):
        """A malformed instance makes the batch exit 2."""
        inputs = tmp_path / "in"
        inputs.mkdir()
        (inputs / "broken.json").write_text("{", encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "batch", str(inputs), "-o", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_batch_factorial(self, runner, tmp_path, coin_document):
        """--factorial reads every instance as correlation functions."""
        inputs = tmp_path / "in"
        inputs.mkdir()
        coin_document["L"]["ell2"] = [["0"]]
        (inputs / "coin.json").write_text(json.dumps(coin_document), encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "batch", str(inputs), "-o", str(tmp_path / "out"),
                                     "--factorial"])
        assert result.exit_code == 0
        assert read(tmp_path / "out" / "coin.result.json")["verdict"] == "measure"
        result = runner.invoke(cli, ["--quiet", "batch", str(inputs), "-o", str(tmp_path / "plain"),
                                     "--verify"])
        assert read(tmp_path / "plain" / "coin.result.json")["verdict"] == "certificate"


class TestConfigCommand:
    """Test cases for the config command."""

    def test_init_and_set(self, runner, tmp_path):
        """--init writes a file that --set can update."""
        path = tmp_path / "config.yaml"
        result = runner.invoke(cli, ["--quiet", "config", "--init", str(path)])
        assert result.exit_code == 0
        assert path.exists()
        result = runner.invoke(cli, ["--quiet", "-c", str(path), "config", "--set", "limits.max_pivots=5"])
        assert result.exit_code == 0
        assert "max_pivots: 5" in path.read_text(encoding="utf-8")

    def test_show(self, runner):
        """--show prints the configuration."""
        result = runner.invoke(cli, ["--quiet", "config", "--show"])
        assert result.exit_code == 0
        assert "enumeration_cap" in result.output

    def test_config_caps_apply(self, runner, tmp_path, instance_file, coin_document):
        """Caps from a config file reach the solver."""
        path = tmp_path / "config.yaml"
        path.write_text("limits:\n  enumeration_cap: 1\n", encoding="utf-8")
        result = runner.invoke(cli, ["--quiet", "-c", str(path), "realize", str(instance_file(coin_document))])
        assert result.exit_code == 3


class TestMain:
    """Test cases for the main entry point."""

    def test_returns_exit_code(self, instance_file, bad_variance_document, capsys):
        """main() returns the documented exit codes."""
        assert main(["--quiet", "enumerate", "--sites", "3", "--q", "2", "--count"]) == 0
        assert capsys.readouterr().out.strip() == "10"
        assert main(["--quiet", "realize", str(instance_file(bad_variance_document))]) == 1

    def test_usage_error(self, capsys):
        """Unknown commands return 2."""
        assert main(["no-such-command"]) == 2

    def test_unreadable_instance(self, tmp_path, capsys):
        """Undecodable input returns 2 instead of raising."""
        path = tmp_path / "binary.json"
        path.write_bytes(b"\xff\xfe{\x00")
        assert main(["--quiet", "realize", str(path)]) == 2

    def test_version(self, runner):
        """--version prints the package version."""
        result = runner.invoke(cli, ["--version"])
        assert __version__ in result.output
