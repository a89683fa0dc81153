"""Realizability result handling and formatting."""

from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from .polynomial import RestrictedCubic
from .realizer import (
    MinimalThirdMoment,
    PositivityCertificate,
    RealizabilityInstance,
    RepresentingMeasure,
    VerificationReport,
)
from .schema import verdict_to_dict, write_json
from .utils import ensure_dir, format_vector

EXIT_REALIZABLE = 0
EXIT_CERTIFICATE = 1


class RealizabilityResult:
    """Container for one solver verdict with json and table output."""

    SUPPORTED_FORMATS = ["json", "table"]

    def __init__(
        self,
        verdict: Any,
        instance: RealizabilityInstance,
        mode: str = "realize",
        duration: float = 0.0,
        enumeration_cap: Optional[int] = None,
        source: Optional[str] = None,
        report: Optional[VerificationReport] = None
    ):
        """
        Args:
            verdict: RepresentingMeasure, PositivityCertificate or MinimalThirdMoment
            instance: The instance that was decided
            mode: Operation that produced the verdict (realize, extend-cubic, minimize)
            duration: Wall time in seconds
            enumeration_cap: Cap in force while enumerating K
            source: Path of the instance file, if any
            report: Verification report when --verify was used
        """
        self.verdict = verdict
        self.instance = instance
        self.mode = mode
        self.duration = duration
        self.enumeration_cap = enumeration_cap
        self.source = source
        self.report = report
        self.created_at = datetime.now()

    @property
    def is_measure(self) -> bool:
        return not isinstance(self.verdict, PositivityCertificate)

    @property
    def exit_code(self) -> int:
        return EXIT_REALIZABLE if self.is_measure else EXIT_CERTIFICATE

    @property
    def measure_verdict(self) -> Optional[RepresentingMeasure]:
        if isinstance(self.verdict, MinimalThirdMoment):
            return self.verdict.witness
        if isinstance(self.verdict, RepresentingMeasure):
            return self.verdict
        return None

    def to_dict(self) -> Dict[str, Any]:
        return verdict_to_dict(self.verdict, self.instance, self.enumeration_cap)

    def save(self, output_path: Union[str, Path], format: str = "json", indent: int = 2) -> Path:
        """
        Save the verdict.

        Args:
            output_path: Output file path (extension adjusted to the format)
            format: json or table
            indent: JSON indentation

        Returns:
            Path of the written file
        """
        if format not in self.SUPPORTED_FORMATS:
            raise ValueError(f"Unsupported format: {format}")
        output_path = Path(output_path)
        ensure_dir(output_path.parent)

        suffix = ".json" if format == "json" else ".txt"
        if output_path.suffix != suffix:
            output_path = output_path.with_suffix(suffix)

        if format == "json":
            return write_json(self.to_dict(), output_path, indent)
        with open(output_path, "w", encoding="utf-8") as f:
            Console(file=f, width=120, no_color=True).print(self.to_table())
        return output_path

    def to_table(self) -> Table:
        """Rich table of the support or the certificate coefficients."""
        sites = self.instance.space.sites
        measure = self.measure_verdict
        if measure is not None:
            table = Table(title=f"Representing measure ({len(measure.measure)} atoms)")
            table.add_column(escape("configuration " + format_vector(sites)), style="cyan")
            table.add_column("weight", justify="right", style="green")
            table.add_column("total mass", justify="right")
            for config, weight in measure.measure.support:
                table.add_row(str(config), str(weight), str(config.total_mass))
            return table

        q = self.verdict.q
        table = Table(title="Positivity certificate")
        table.add_column("term", style="cyan")
        table.add_column("coefficient", justify="right", style="red")
        if isinstance(q, RestrictedCubic):
            table.add_row("f0", str(q.f0))
            for i, site in enumerate(sites):
                table.add_row(escape(f"f1[{site}]"), str(q.f1[i]))
            for i, a in enumerate(sites):
                for j in range(i, len(sites)):
                    table.add_row(escape(f"f2[{a},{sites[j]}]"), str(q.f2[i][j]))
            table.add_row("f3", str(q.f3))
            return table
        for j, level in enumerate(q.coefficients):
            if j == 0:
                table.add_row("f0", str(level[()]))
                continue
            for index, value in sorted(_upper_entries(level)):
                if value != 0:
                    table.add_row(escape(f"f{j}[" + ",".join(sites[i] for i in index) + "]"), str(value))
        return table

    def get_metadata(self) -> Dict[str, Any]:
        """Get metadata about the run."""
        meta = {
            "source": self.source,
            "mode": self.mode,
            "verdict": "measure" if self.is_measure else "certificate",
            "sites": len(self.instance.space.sites),
            "kspec": self.instance.kspec.describe(),
            "duration": self.duration,
            "created_at": self.created_at.isoformat(),
        }
        if self.report is not None:
            meta["verified"] = self.report.passed
        return meta

    def get_summary(self) -> str:
        """Get a short human-readable summary."""
        lines = [
            "Realizability Summary:",
            f"- Instance: {Path(self.source).name if self.source else '<memory>'}",
            f"- Sites: {self.instance.space.size}",
            f"- K: {self.instance.kspec.describe()}",
        ]
        measure = self.measure_verdict
        if measure is not None:
            lines.append(f"- Verdict: realizable ({len(measure.measure)} atoms)")
            if measure.realized_R is not None:
                lines.append(f"- Realized R: {measure.realized_R}")
            if isinstance(self.verdict, MinimalThirdMoment):
                lines.append(f"- Minimal R: {self.verdict.value}")
        else:
            kind = "restricted cubic" if self.verdict.is_cubic else "polynomial"
            lines.append(f"- Verdict: not realizable ({kind} certificate)")
        if self.report is not None:
            lines.append(f"- Verification: {'passed' if self.report.passed else 'FAILED'}")
        lines.append(f"- Processing time: {self.duration:.2f}s")
        return "\n".join(lines)

    def __repr__(self):
        return (
            f"RealizabilityResult(mode='{self.mode}', "
            f"verdict={'measure' if self.is_measure else 'certificate'})"
        )


def _upper_entries(level):
    """(index, value) pairs with nondecreasing index, one per symmetric orbit."""
    for index in np.ndindex(level.shape):
        if list(index) == sorted(index):
            yield index, level[index]
