"""Batch processing functionality for many instance files."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from tqdm import tqdm

from .exceptions import BatchProcessingError, MomentRealizerError
from .realizer import Realizer
from .result import RealizabilityResult
from .schema import load_instance

logger = logging.getLogger(__name__)

MODES = ("realize", "extend-cubic", "minimize")


class BatchProcessor:
    """Decide many instance files, optionally in parallel."""

    def __init__(
        self,
        realizer: Optional[Realizer] = None,
        mode: str = "realize",
        output_format: str = "json",
        num_workers: int = 1,
        verify: bool = False,
        default_ell0: Optional[str] = "1",
        factorial: bool = False,
        indent: int = 2
    ):
        """
        Initialize batch processor.

        Args:
            realizer: Solver with its resource caps (defaults to Realizer())
            mode: realize, extend-cubic or minimize
            output_format: json or table
            num_workers: Number of parallel workers
            verify: Re-check every verdict with verify_verdict
            default_ell0: ell0 used when an instance omits it
            factorial: Read moment data as correlation functions
            indent: JSON indentation of result files
        """
        if mode not in MODES:
            raise BatchProcessingError(f"unknown mode {mode!r} (expected one of {', '.join(MODES)})")
        if num_workers < 1:
            raise BatchProcessingError(f"num_workers must be positive, got {num_workers}")
        self.realizer = realizer or Realizer()
        self.mode = mode
        self.output_format = output_format
        self.num_workers = num_workers
        self.verify = verify
        self.default_ell0 = default_ell0
        self.factorial = factorial
        self.indent = indent

    def _output_path(self, output_dir: Path, file_path: Path) -> Path:
        suffix = "json" if self.output_format == "json" else "txt"
        return output_dir / f"{file_path.stem}.result.{suffix}"

    def process_files(
        self,
        input_files: List[Union[str, Path]],
        output_dir: Union[str, Path],
        skip_existing: bool = True,
        progress_callback: Optional[Callable[[int, int], None]] = None,
        show_progress: bool = False
    ) -> List[Dict[str, Any]]:
        """
        Decide every instance file and write one result file per instance.

        Args:
            input_files: Instance JSON files
            output_dir: Directory for result files
            skip_existing: Skip instances that already have a result file
            progress_callback: Called with (completed, total)
            show_progress: Display a tqdm progress bar

        Returns:
            One result dictionary per processed file
        """
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        files_to_process = []
        for file_path in input_files:
            file_path = Path(file_path)
            if not file_path.exists():
                logger.warning(f"File not found: {file_path}")
                continue
            if skip_existing and self._output_path(output_dir, file_path).exists():
                logger.info(f"Skipping existing: {file_path.name}")
                continue
            files_to_process.append(file_path)

        if not files_to_process:
            logger.info("No files to process")
            return []

        logger.info(f"Processing {len(files_to_process)} instances with {self.num_workers} workers")

        results = []
        bar = tqdm(total=len(files_to_process), desc="Instances", disable=not show_progress)

        def finished(result: Dict[str, Any]):
            results.append(result)
            bar.update(1)
            if progress_callback:
                progress_callback(len(results), len(files_to_process))

        try:
            if self.num_workers == 1:
                for file_path in files_to_process:
                    finished(self._process_single_file(file_path, output_dir))
            else:
                with ThreadPoolExecutor(max_workers=self.num_workers) as executor:
                    future_to_file = {
                        executor.submit(self._process_single_file, file_path, output_dir): file_path
                        for file_path in files_to_process
                    }
                    for future in as_completed(future_to_file):
                        file_path = future_to_file[future]
                        try:
                            finished(future.result())
                        except Exception as e:
                            logger.error(f"Failed to process {file_path}: {str(e)}")
                            finished({'file': str(file_path), 'success': False, 'error': str(e)})
        finally:
            bar.close()

        results.sort(key=lambda r: r['file'])
        return results

    def _decide(self, instance):
        if self.mode == "extend-cubic":
            return self.realizer.extend_with_cubic(instance)
        if self.mode == "minimize":
            return self.realizer.minimal_third_moment(instance)
        return self.realizer.find_representing_measure(instance)

    def _process_single_file(self, file_path: Path, output_dir: Path) -> Dict[str, Any]:
        """Decide a single instance file."""
        start = time.perf_counter()
        try:
            instance = load_instance(file_path, self.default_ell0, self.factorial)
            verdict = self._decide(instance)
            report = self.realizer.verify_verdict(instance, verdict) if self.verify else None

            result = RealizabilityResult(
                verdict, instance, mode=self.mode,
                duration=time.perf_counter() - start,
                enumeration_cap=self.realizer.enumeration_cap,
                source=str(file_path), report=report,
            )
            output_path = result.save(self._output_path(output_dir, file_path),
                                      format=self.output_format, indent=self.indent)
            record = {
                'file': str(file_path),
                'success': True,
                'output': str(output_path),
                'verdict': 'measure' if result.is_measure else 'certificate',
                'sites': instance.space.size,
                'kspec': instance.kspec.describe(),
                'processing_time': result.duration,
            }
            if report is not None:
                record['verified'] = report.passed
                if not report.passed:
                    record['verification'] = report.summary()
            return record

        except MomentRealizerError as e:
            logger.error(f"Error processing {file_path}: {str(e)}")
            return {
                'file': str(file_path),
                'success': False,
                'error': str(e),
                'error_type': type(e).__name__,
            }

    def process_directory(
        self,
        input_dir: Union[str, Path],
        output_dir: Union[str, Path],
        pattern: str = "*.json",
        recursive: bool = False,
        **kwargs
    ) -> List[Dict[str, Any]]:
        """Decide all instance files in a directory (result files are ignored)."""
        input_dir = Path(input_dir)
        if not input_dir.is_dir():
            raise BatchProcessingError(f"Not a directory: {input_dir}")

        candidates = input_dir.rglob(pattern) if recursive else input_dir.glob(pattern)
        files = sorted(f for f in candidates if f.is_file() and ".result." not in f.name)
        if not files:
            logger.warning(f"No instance files found in {input_dir}")
            return []

        logger.info(f"Found {len(files)} instance files")
        return self.process_files(files, output_dir, **kwargs)

    def generate_report(self, results: List[Dict[str, Any]]) -> str:
        """Generate a summary report of batch results."""
        total_files = len(results)
        successful = [r for r in results if r['success']]
        failed = total_files - len(successful)

        if not successful:
            report = "No instances were successfully processed."
            if failed:
                report += "\n\nFailed Instances:\n" + "".join(
                    f"- {r['file']}: {r.get('error', 'Unknown error')}\n" for r in results)
            return report

        measures = sum(1 for r in successful if r['verdict'] == 'measure')
        certificates = len(successful) - measures
        total_time = sum(r.get('processing_time', 0) for r in successful)

        report = f"""
Batch Realizability Report
==========================
Total instances: {total_files}
Successful: {len(successful)}
Failed: {failed}

Verdicts:
- Realizable (measure): {measures}
- Not realizable (certificate): {certificates}

Processing Statistics:
- Total processing time: {total_time:.2f} seconds
- Average per instance: {total_time / len(successful):.3f} seconds
"""
        verified = [r for r in successful if 'verified' in r]
        if verified:
            passed = sum(1 for r in verified if r['verified'])
            report += f"- Verification passed: {passed}/{len(verified)}\n"
            for r in verified:
                if not r['verified']:
                    report += f"  ! {r['file']}: {r.get('verification', '')}\n"

        kspecs: Dict[str, int] = {}
        for r in successful:
            kspecs[r['kspec']] = kspecs.get(r['kspec'], 0) + 1
        report += "\nConfiguration Sets:\n"
        for kspec, count in sorted(kspecs.items(), key=lambda x: x[1], reverse=True):
            report += f"- {kspec}: {count} instances\n"

        if failed > 0:
            report += "\nFailed Instances:\n"
            for r in results:
                if not r['success']:
                    report += f"- {r['file']}: {r.get('error', 'Unknown error')}\n"

        return report
