"""Tests for batch processing and result files."""

import json
from pathlib import Path

import pytest

from moment_realizer.batch_processor import BatchProcessor
from moment_realizer.exceptions import BatchProcessingError
from moment_realizer.realizer import Realizer
from moment_realizer.result import RealizabilityResult


@pytest.fixture
def instance_dir(tmp_path, coin_document, bad_variance_document):
    """A directory with a realizable, a non-realizable and a malformed instance."""
    directory = tmp_path / "instances"
    directory.mkdir()
    (directory / "coin.json").write_text(json.dumps(coin_document), encoding="utf-8")
    (directory / "variance.json").write_text(json.dumps(bad_variance_document), encoding="utf-8")
    (directory / "broken.json").write_text("{", encoding="utf-8")
    return directory


class TestRealizabilityResult:
    """Test cases for RealizabilityResult."""

    def test_exit_codes(self, coin_instance, bad_variance_instance):
        """Measures exit 0, certificates exit 1."""
        realizer = Realizer()
        good = RealizabilityResult(realizer.find_representing_measure(coin_instance), coin_instance)
        bad = RealizabilityResult(realizer.find_representing_measure(bad_variance_instance),
                                  bad_variance_instance)
        assert good.exit_code == 0
        assert bad.exit_code == 1

    def test_save_json(self, tmp_path, coin_instance):
        """JSON results are written with p/q weights."""
        result = RealizabilityResult(Realizer().find_representing_measure(coin_instance), coin_instance,
                                     enumeration_cap=10)
        path = result.save(tmp_path / "out.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["support"][0]["weight"] == "1/2"
        assert data["caps"]["enumeration"] == 10

    def test_save_table(self, tmp_path, bad_variance_instance):
        """Table output lists certificate coefficients."""
        result = RealizabilityResult(Realizer().find_representing_measure(bad_variance_instance),
                                     bad_variance_instance)
        path = result.save(tmp_path / "out.json", format="table")
        assert path.suffix == ".txt"
        assert "f2[a,a]" in path.read_text(encoding="utf-8")

    def test_unsupported_format(self, tmp_path, coin_instance):
        """Only json and table are supported."""
        result = RealizabilityResult(Realizer().find_representing_measure(coin_instance), coin_instance)
        with pytest.raises(ValueError):
            result.save(tmp_path / "out.csv", format="csv")

    def test_summary(self, coin_instance):
        """The summary names the verdict."""
        result = RealizabilityResult(Realizer().find_representing_measure(coin_instance), coin_instance)
        assert "realizable (2 atoms)" in result.get_summary()
        assert result.get_metadata()["verdict"] == "measure"


class TestBatchProcessor:
    """Test cases for BatchProcessor."""

    def test_invalid_mode(self):
        """Unknown modes are rejected."""
        with pytest.raises(BatchProcessingError):
            BatchProcessor(mode="guess")

    def test_invalid_workers(self):
        """At least one worker is needed."""
        with pytest.raises(BatchProcessingError):
            BatchProcessor(num_workers=0)

    def test_process_directory(self, instance_dir, tmp_path):
        """Every file gets a record; failures are kept."""
        processor = BatchProcessor(verify=True)
        results = processor.process_directory(instance_dir, tmp_path / "out")
        by_name = {Path(r["file"]).name: r for r in results}
        assert by_name["coin.json"]["verdict"] == "measure"
        assert by_name["coin.json"]["verified"] is True
        assert by_name["variance.json"]["verdict"] == "certificate"
        assert by_name["broken.json"]["success"] is False
        assert by_name["broken.json"]["error_type"] == "InstanceFormatError"
        assert (tmp_path / "out" / "coin.result.json").exists()

    def test_parallel_matches_serial(self, instance_dir, tmp_path):
        """Worker count does not change the verdicts."""
        serial = BatchProcessor().process_directory(instance_dir, tmp_path / "a")
        parallel = BatchProcessor(num_workers=2).process_directory(instance_dir, tmp_path / "b")
        assert [r.get("verdict") for r in serial] == [r.get("verdict") for r in parallel]

    def test_skip_existing(self, instance_dir, tmp_path):
        """Instances with a result file are skipped."""
        processor = BatchProcessor()
        processor.process_directory(instance_dir, tmp_path / "out")
        again = processor.process_directory(instance_dir, tmp_path / "out")
        assert [Path(r["file"]).name for r in again] == ["broken.json"]

    def test_result_files_ignored(self, instance_dir, tmp_path):
        """Result files in the input directory are not treated as instances."""
        processor = BatchProcessor()
        processor.process_directory(instance_dir, instance_dir)
        again = processor.process_directory(instance_dir, tmp_path / "fresh")
        assert len(again) == 3

    def test_progress_callback(self, instance_dir, tmp_path):
        """The callback sees every completion."""
        seen = []
        BatchProcessor().process_directory(instance_dir, tmp_path / "out",
                                           progress_callback=lambda done, total: seen.append((done, total)))
        assert seen == [(1, 3), (2, 3), (3, 3)]

    def test_minimize_mode(self, tmp_path, instance_file):
        """minimize mode writes R*."""
        path = instance_file({
            "sites": ["a"],
            "kspec": {"variant": "at_most", "Q": 2},
            "L": {"ell0": "1", "ell1": ["1"], "ell2": [["2"]]},
            "gamma": ["1"],
        }, "forced.json")
        results = BatchProcessor(mode="minimize").process_files([path], tmp_path / "out")
        data = json.loads((tmp_path / "out" / "forced.result.json").read_text(encoding="utf-8"))
        assert results[0]["success"]
        assert data["minimal_R"] == "4"

    def test_report(self, instance_dir, tmp_path):
        """The report counts verdicts and failures."""
        processor = BatchProcessor()
        report = processor.generate_report(processor.process_directory(instance_dir, tmp_path / "out"))
        assert "Realizable (measure): 1" in report
        assert "Not realizable (certificate): 1" in report
        assert "Failed: 1" in report

    def test_not_a_directory(self, tmp_path):
        """Input must be a directory."""
        with pytest.raises(BatchProcessingError):
            BatchProcessor().process_directory(tmp_path / "missing", tmp_path / "out")
