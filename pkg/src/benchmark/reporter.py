"""
Report generation for detection runs and studies.
Supports JSON, CSV, Markdown and best-effort PNG plots.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

from ..config import Config
from ..detection import DetectionReport
from ..metrics import precision_recall
from .runner import StudyResult
from .utils import format_metric, get_machine_info, get_report_subdir_name

logger = logging.getLogger(__name__)


def _load_pyplot():
    """Import pyplot on the non-interactive backend, or None if unavailable."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception as e:
        logger.warning(f"Plotting unavailable, writing data only: {e}")
        return None
    return plt


class Reporter:
    """
    Write reports under a deterministic run directory.

    Reports are organized by label and config hash:
        reports/<label>_<hash12>/

    Nothing written carries a wall-clock timestamp, so identical configs
    produce identical files.

    Example:
        reporter = Reporter("set_size", cfg.config_hash())
        reporter.generate_json(result)
        reporter.generate_markdown(result)
    """

    def __init__(self, label: str, config_hash: str, output_dir: Optional[Path] = None):
        """
        Initialize reporter.

        Args:
            label: Run label (study name or command)
            config_hash: Hash embedded in every output
            output_dir: Base directory for output files (default: Config.REPORT_DIR)
        """
        base_dir = Path(output_dir) if output_dir else Config.REPORT_DIR
        self.config_hash = config_hash
        self.output_dir = base_dir / get_report_subdir_name(label, config_hash)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self._machine_info = get_machine_info()

    # ------------------------------------------------------------------
    # Studies
    # ------------------------------------------------------------------

    def generate_json(self, result: StudyResult, filename: Optional[str] = None) -> str:
        """
        Write the study table as JSON.

        Returns:
            Path to generated file
        """
        output_path = self.output_dir / (filename or f"{result.study}.json")
        data = {**result.to_dict(), "environment": self._machine_info}
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
        return str(output_path)

    def generate_csv(self, result: StudyResult, filename: Optional[str] = None) -> str:
        """Write one CSV row per (variant, seed, manipulator)."""
        output_path = self.output_dir / (filename or f"{result.study}.csv")
        result.to_frame().to_csv(output_path, index=False)
        return str(output_path)

    def generate_markdown(self, result: StudyResult, filename: Optional[str] = None) -> str:
        """
        Write a Markdown study report.

        Returns:
            Path to generated file
        """
        output_path = self.output_dir / (filename or f"{result.study}.md")

        lines = []
        lines.append(f"# Study: {result.study}")
        lines.append(f"\n**Config hash:** `{result.config_hash}`")
        lines.append(f"**Seeds:** {', '.join(str(s) for s in result.seeds)}")
        lines.append("\n---\n")

        lines.append("## Environment\n")
        lines.append("| Item | Value |")
        lines.append("|------|-------|")
        for key, value in self._machine_info.items():
            lines.append(f"| {key} | {value} |")

        lines.append("\n## Median over seeds\n")
        lines.append(self._markdown_table(result.summary().to_dict(orient="records")))

        lines.append("\n## All rows\n")
        lines.append(self._markdown_table([row.to_dict() for row in result.rows]))

        with open(output_path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        return str(output_path)

    def _markdown_table(self, records: List[Dict[str, Any]]) -> str:
        if not records:
            return "_no rows_"
        columns = list(records[0].keys())
        for record in records[1:]:
            columns += [key for key in record if key not in columns]

        lines = ["| " + " | ".join(columns) + " |", "|" + "|".join("---" for _ in columns) + "|"]
        for record in records:
            lines.append("| " + " | ".join(format_metric(record.get(c)) for c in columns) + " |")
        return "\n".join(lines)

    def plot_study(self, result: StudyResult) -> List[str]:
        """
        Plot sweeps (AP vs n, AP and PSNR vs m) or per-variant AP bars.

        Returns:
            Paths of written PNGs; empty when plotting is unavailable
        """
        plt = _load_pyplot()
        frame = result.to_frame()
        if plt is None or frame.empty:
            return []

        written = []
        try:
            if result.study in ("set_size", "strength"):
                x = "n" if result.study == "set_size" else "strength"
                columns = ["ap", "psnr"] if result.study == "strength" else ["ap", "pairwise_mean"]
                fig, axes = plt.subplots(1, len(columns), figsize=(5 * len(columns), 4))
                for ax, column in zip(axes, columns):
                    grouped = frame.groupby(["manipulator", x])[column].median().reset_index()
                    for name, part in grouped.groupby("manipulator"):
                        ax.plot(part[x], part[column], marker="o", label=name)
                    ax.set_xlabel(x)
                    ax.set_ylabel(column)
                    ax.grid(True, alpha=0.3)
                axes[0].legend()
            else:
                pivot = frame.pivot_table(index="variant", columns="manipulator", values="ap", aggfunc="median")
                fig, ax = plt.subplots(figsize=(max(6, len(pivot) * 0.9), 4))
                pivot.plot.bar(ax=ax)
                ax.set_ylabel("AP")
                ax.set_ylim(0.0, 1.05)
                ax.grid(True, axis="y", alpha=0.3)
            fig.suptitle(f"{result.study} ({result.config_hash[:12]})")
            fig.tight_layout()
            path = self.output_dir / f"{result.study}.png"
            fig.savefig(path, dpi=100, metadata={"Software": None})
            plt.close(fig)
            written.append(str(path))
        except Exception as e:
            logger.warning(f"Failed to plot study {result.study}: {e}")
        return written

    def print_summary(self, result: StudyResult, console: Console) -> None:
        """Print the median-over-seeds table to the console."""
        table = Table(title=f"Study: {result.study} ({result.config_hash[:12]})")
        table.add_column("Variant", style="cyan")
        table.add_column("Manipulator")
        table.add_column("Seen")
        table.add_column("AP", justify="right")
        table.add_column("TDR", justify="right")
        table.add_column("PSNR", justify="right")

        for record in result.summary().to_dict(orient="records"):
            table.add_row(
                str(record["variant"]),
                str(record["manipulator"]),
                "yes" if record["seen"] else "no",
                format_metric(record["ap"]),
                format_metric(record["tdr"]),
                format_metric(record["psnr"], digits=2),
            )
        console.print(table)

    # ------------------------------------------------------------------
    # Detection
    # ------------------------------------------------------------------

    def save_detection(self, report: DetectionReport, name: str = "detection", plots: bool = True) -> Dict[str, str]:
        """
        Write a detection report (JSON + CSV) and optional score plots.

        Returns:
            Mapping of output kind to path
        """
        paths = {kind: str(path) for kind, path in report.save(self.output_dir, name).items()}
        if plots:
            paths.update(self.plot_detection(report, name))
        return paths

    def plot_detection(self, report: DetectionReport, name: str = "detection") -> Dict[str, str]:
        """Score histogram and, for labelled two-class rows, the PR curve."""
        plt = _load_pyplot()
        if plt is None or not report.rows:
            return {}

        written = {}
        try:
            fig, ax = plt.subplots(figsize=(6, 4))
            reals, fakes = report.real_scores, report.fake_scores
            if reals or fakes:
                if reals:
                    ax.hist(reals, bins=30, alpha=0.6, label="encrypted real")
                if fakes:
                    ax.hist(fakes, bins=30, alpha=0.6, label="manipulated")
            else:
                ax.hist([row.score for row in report.rows], bins=30, alpha=0.6, label="unlabelled")
            if report.threshold is not None:
                ax.axvline(report.threshold, color="black", linestyle="--", label="threshold")
            ax.set_xlabel("max cosine score")
            ax.set_ylabel("images")
            ax.legend()
            fig.tight_layout()
            path = self.output_dir / f"{name}_scores.png"
            fig.savefig(path, dpi=100, metadata={"Software": None})
            plt.close(fig)
            written["scores_png"] = str(path)

            if reals and fakes:
                labelled = [row for row in report.rows if row.label is not None]
                precision, recall = precision_recall([r.score for r in labelled], [r.label for r in labelled])
                fig, ax = plt.subplots(figsize=(5, 5))
                ax.plot(recall, precision)
                ax.set_xlabel("recall")
                ax.set_ylabel("precision")
                ax.set_title(f"AP = {format_metric(report.ap)}")
                ax.grid(True, alpha=0.3)
                fig.tight_layout()
                path = self.output_dir / f"{name}_pr.png"
                fig.savefig(path, dpi=100, metadata={"Software": None})
                plt.close(fig)
                written["pr_png"] = str(path)
        except Exception as e:
            logger.warning(f"Failed to plot detection report {name}: {e}")
        return written

    def print_detection(self, report: DetectionReport, console: Console) -> None:
        """Print detection aggregates to the console."""
        table = Table(title="Detection")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", justify="right")
        table.add_row("Images", str(len(report.rows)))
        table.add_row("Real / manipulated", f"{len(report.real_scores)} / {len(report.fake_scores)}")
        table.add_row("Threshold", format_metric(report.threshold))
        table.add_row("Flagged", str(len(report.flagged())))
        table.add_row("AP", format_metric(report.ap))
        table.add_row(f"TDR @ FAR {report.far:g}", format_metric(report.tdr))
        table.add_row("Config hash", report.config_hash[:12] or "n/a")
        console.print(table)


def _json_default(value: Any) -> Any:
    if hasattr(value, "item"):
        return value.item()
    return str(value)
