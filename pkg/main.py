#!/usr/bin/env python3
"""
Template Forensics - CLI Entry Point

Usage:
    python main.py train configs/minimal.json
    python main.py encrypt output/run/templates.pimd photos/ -o encrypted/
    python main.py detect output/run/templates.pimd output/run/encoder.pimw eval_set/
    python main.py ablate set_size configs/desk.json --seeds 1,2,3
"""

import sys
import logging
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent))

import click
import pandas as pd
from rich.console import Console
from rich.table import Table
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from src import __version__
from src.config import Config
from src.core.errors import (
    ConfigurationError,
    DivergenceError,
    EmptyCorpusError,
    ForensicsError,
    TemplateFormatError,
    UnknownManipulatorError,
)
from src.core.rng import make_rng
from src.core.types import LOSS_NAMES, EncryptConfig
from src.data import create_corpus, load_images, load_or_generate, save_image
from src.detection import DetectionReport, measure_latency, score_dataset
from src.manipulators import MANIPULATORS, make_manipulator
from src.models import RecoveryEncoder, load_weights, save_weights
from src.templates import encrypt, load_template_set, save_template_set
from src.training import (
    AdversarialAttack,
    TrainConfig,
    Trainer,
    remove_loss_variant,
    train_adversarial_baseline,
    train_fixed_template,
    train_passive_classifier,
)
from src.benchmark import STUDIES, Reporter, StudyRunner, get_study
from src.benchmark.utils import get_report_subdir_name

logger = logging.getLogger(__name__)

console = Console()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

USAGE_ERRORS = (
    ConfigurationError,
    TemplateFormatError,
    EmptyCorpusError,
    UnknownManipulatorError,
    FileNotFoundError,
)

VARIANTS = ("full", "fixed_template", "passive_classifier", "remove_loss", "adversarial")


def setup_logging(verbose: bool = False, debug: bool = False):
    """Configure logging level."""
    if debug:
        level = logging.DEBUG
    elif verbose:
        level = logging.INFO
    else:
        level = logging.WARNING

    # Configure root logger
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True
    )

    # Also set level for our modules
    for module in ['src.training', 'src.detection', 'src.benchmark', 'src.data', 'src.templates', 'src.models']:
        logging.getLogger(module).setLevel(level)


class ForensicsGroup(click.Group):
    """
    Click group mapping failures to exit codes.

    0 success, 1 usage/config/input error, 2 runtime or divergence error.
    """

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.exceptions.Abort:
            console.print("[red]Aborted.[/red]")
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except DivergenceError as e:
            console.print(f"[red]Training diverged: {e}[/red]")
            sys.exit(EXIT_RUNTIME)
        except USAGE_ERRORS as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_USAGE)
        except ForensicsError as e:
            console.print(f"[red]Runtime error: {e}[/red]")
            sys.exit(EXIT_RUNTIME)


@click.group(cls=ForensicsGroup)
@click.version_option(version=__version__)
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose output (INFO level)')
@click.option('--debug', is_flag=True, help='Enable debug output (DEBUG level)')
@click.pass_context
def cli(ctx, verbose, debug):
    """
    Template Forensics

    Learn a small set of image templates and a recovery encoder so that
    images carrying a template can later be checked for manipulation.

    Use -v for verbose output, --debug for detailed logs.
    """
    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    ctx.obj['debug'] = debug
    setup_logging(verbose, debug)
    Config.apply_torch_threads()


def _load_config(path: str, seed):
    cfg = TrainConfig.from_json(path)
    if seed is not None:
        cfg = cfg.with_overrides(seed=seed)
    return cfg


@cli.command()
@click.argument('config', type=click.Path(dir_okay=False))
@click.option('--output', '-o', default=None, help='Output directory (default: <output root>/train_<hash>)')
@click.option('--seed', type=int, default=None, help='Override the config seed')
@click.option('--variant', type=click.Choice(VARIANTS), default='full', help='Training variant')
@click.option('--drop', type=click.Choice(LOSS_NAMES), default=None, help='Loss to drop (variant remove_loss)')
@click.option('--attack', type=click.Choice(['fgsm', 'pgd']), default='fgsm', help='Attack (variant adversarial)')
@click.option('--epsilon', type=float, default=0.03, help='L-inf budget (variant adversarial)')
@click.option('--steps', type=int, default=1, help='Attack steps per batch (variant adversarial)')
def train(config, output, seed, variant, drop, attack, epsilon, steps):
    """
    Train a template set and recovery encoder from a JSON config.

    Writes templates.pimd (+ templates.json sidecar), encoder.pimw and
    train_log.jsonl.

    Example:
        python main.py train configs/minimal.json -o output/minimal
    """
    cfg = _load_config(config, seed)
    if variant == 'remove_loss' and drop is None:
        raise ConfigurationError("Variant remove_loss needs --drop")
    if variant == 'adversarial':
        try:
            AdversarialAttack(method=attack, epsilon=epsilon, steps=steps)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    console.print(f"\n[bold blue]Template Training[/bold blue]")
    console.print(f"Config: [cyan]{config}[/cyan] (hash {cfg.short_hash()})")
    console.print(f"Variant: [cyan]{variant}[/cyan], n={cfg.n}, m={cfg.strength}, epochs={cfg.epochs}")
    console.print("")

    corpus = load_or_generate(
        cfg.corpus_seed, "train", cfg.corpus.train_size, folder=cfg.corpus.train_folder, side=cfg.image_side,
    )

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    ) as progress:
        if variant == 'full':
            trainer = Trainer(cfg, corpus)
            total = cfg.epochs * -(-len(corpus) // cfg.batch_size)
            task = progress.add_task("Training...", total=total)
            trainer.on_step(lambda record: progress.advance(task))
            result = trainer.run()
        else:
            task = progress.add_task(f"Training {variant}...", total=None)
            if variant == 'fixed_template':
                result = train_fixed_template(cfg, corpus)
            elif variant == 'passive_classifier':
                result = train_passive_classifier(cfg, corpus)
            elif variant == 'remove_loss':
                result = remove_loss_variant(cfg, corpus, drop)
            else:
                result = train_adversarial_baseline(cfg, corpus, attack=attack, epsilon=epsilon, steps=steps)
            progress.update(task, completed=1, total=1)

    out_dir = Path(output) if output else Config.OUTPUT_ROOT / get_report_subdir_name("train", result.config.config_hash())
    out_dir.mkdir(parents=True, exist_ok=True)

    template_path = save_template_set(result.templates, out_dir / "templates.pimd", sidecar=result.sidecar())
    console.print(f"🧩 Template set: [green]{template_path}[/green]")
    if result.encoder is not None:
        weights_path = save_weights(result.encoder, out_dir / "encoder.pimw")
        console.print(f"🧠 Encoder weights: [green]{weights_path}[/green]")
    if result.classifier is not None:
        weights_path = save_weights(result.classifier, out_dir / "classifier.pimw")
        console.print(f"🧠 Classifier weights: [green]{weights_path}[/green]")
    log_path = result.log.to_jsonl(out_dir / "train_log.jsonl")
    console.print(f"📈 Training log: [green]{log_path}[/green]")

    if result.log.epochs:
        table = Table(title="Epochs")
        table.add_column("Epoch", justify="right")
        table.add_column("Mean total", justify="right")
        table.add_column("Mean J_r", justify="right")
        table.add_column("Pairwise cos", justify="right")
        for record in result.log.epochs:
            table.add_row(
                str(record["epoch"] + 1),
                f"{record['mean_total']:.4f}",
                f"{record['mean_J_r']:.4f}" if "mean_J_r" in record else "-",
                f"{record['pairwise_mean']:.4f}" if "pairwise_mean" in record else "-",
            )
        console.print(table)
    console.print(f"⏱  Wall clock: {result.log.wall_clock_seconds:.1f}s")


@cli.command('encrypt')
@click.argument('template_file', type=click.Path(dir_okay=False))
@click.argument('images', type=click.Path())
@click.option('--output', '-o', required=True, help='Output folder for encrypted PNGs')
@click.option('--index', '-i', type=int, default=None, help='Template index (default: random per image)')
@click.option('--strength', '-m', type=float, default=None, help='Template strength (default: from sidecar, else 0.30)')
@click.option('--seed', type=int, default=0, help='Seed for random template selection')
def encrypt_cmd(template_file, images, output, index, strength, seed):
    """
    Add a template to an image or every image in a folder.

    Writes 8-bit PNGs (round-then-clamp) and manifest.csv recording the
    template index used per file.

    Example:
        python main.py encrypt templates.pimd photos/ -o encrypted/ -m 0.3
    """
    templates, sidecar = load_template_set(template_file)
    if strength is None:
        strength = float((sidecar or {}).get("config", {}).get("strength", 0.30))
    if index is not None and not 0 <= index < templates.n:
        raise ConfigurationError(f"Template index {index} out of range for set of size {templates.n}")
    try:
        cfg = EncryptConfig(strength=strength, clamp_on_export=True)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e

    corpus = load_images(images, side=templates.side)
    rng = make_rng(seed)
    out_dir = Path(output)
    source_root = Path(images) if Path(images).is_dir() else Path(images).parent

    rows = []
    for record in corpus:
        chosen = index if index is not None else rng.integers(0, templates.n)
        encrypted = encrypt(record.image, templates.planes[chosen], cfg)
        # Mirrors the real/ and fake/ layout of the input
        relative = Path(record.id).relative_to(source_root).with_suffix(".png")
        path = save_image(encrypted, out_dir / relative)
        rows.append({"source": record.id, "path": str(path), "template_index": chosen, "strength": strength})

    manifest = out_dir / "manifest.csv"
    pd.DataFrame(rows, columns=["source", "path", "template_index", "strength"]).to_csv(manifest, index=False)
    console.print(f"✅ Encrypted {len(rows)} images into [green]{out_dir}[/green]")
    console.print(f"📄 Manifest: [green]{manifest}[/green]")


@cli.command()
@click.argument('template_file', type=click.Path(dir_okay=False))
@click.argument('weights_file', type=click.Path(dir_okay=False))
@click.argument('folder', type=click.Path())
@click.option('--threshold', '-t', type=float, default=None, help='Fixed detection threshold')
@click.option('--calibrate-far', type=float, default=None, help='Calibrate the threshold on real/ images at this FAR')
@click.option('--output', '-o', default=None, help='Report directory (default: <report dir>/detect_<hash>)')
@click.option('--name', default='detection', help='Report file basename')
@click.option('--plots/--no-plots', default=True, help='Write PNG plots')
@click.option('--latency', is_flag=True, help='Also measure per-image latency (console only)')
def detect(template_file, weights_file, folder, threshold, calibrate_far, output, name, plots, latency):
    """
    Score a folder against a template set and encoder.

    A folder with real/ and fake/ subfolders is scored with labels (AP,
    TDR); a flat folder is scored unlabelled.

    Example:
        python main.py detect templates.pimd encoder.pimw eval_set/ --calibrate-far 0.005
    """
    if threshold is not None and calibrate_far is not None:
        raise ConfigurationError("Use either --threshold or --calibrate-far, not both")

    templates, sidecar = load_template_set(template_file)
    encoder = load_weights(RecoveryEncoder(image_side=templates.side), weights_file)
    encoder.eval()
    corpus = load_images(folder, side=templates.side)

    far = calibrate_far if calibrate_far is not None else Config.DEFAULT_FAR
    if calibrate_far is not None and 1 not in corpus.labels:
        raise ConfigurationError("--calibrate-far needs a folder with real/ images")

    config_hash = (sidecar or {}).get("config_hash", "")
    rows = score_dataset(encoder, templates, corpus, max_workers=Config.NUM_WORKERS)
    report = DetectionReport(rows=rows, far=far, config_hash=config_hash).recompute(threshold)
    report.metadata["template_file"] = str(template_file)
    report.metadata["weights_file"] = str(weights_file)

    reporter = Reporter("detect", config_hash or templates.checksum(), output_dir=Path(output) if output else None)
    paths = reporter.save_detection(report, name=name, plots=plots)
    for kind, path in paths.items():
        console.print(f"📄 {kind}: [green]{path}[/green]")
    reporter.print_detection(report, console)

    if latency:
        ms = measure_latency(encoder, templates, corpus)
        console.print(f"⏱  Latency: {ms:.2f} ms/image (n={templates.n})")


@cli.command()
@click.argument('study')
@click.argument('config', type=click.Path(dir_okay=False))
@click.option('--seeds', default=None, help='Comma-separated seeds (default: the config seed)')
@click.option('--output', '-o', default=None, help='Report base directory')
def ablate(study, config, seeds, output):
    """
    Run a seeded study grid and write JSON/CSV/Markdown tables and plots.

    Example:
        python main.py ablate strength configs/desk.json --seeds 1,2,3
    """
    get_study(study)
    cfg = TrainConfig.from_json(config)
    try:
        seed_list = [int(s) for s in seeds.split(',')] if seeds else None
    except ValueError as e:
        raise ConfigurationError(f"Invalid --seeds: {seeds}") from e

    console.print(f"\n[bold blue]Study: {study}[/bold blue]")
    console.print(f"{STUDIES[study]}")
    console.print(f"Config: [cyan]{config}[/cyan] (hash {cfg.short_hash()})")
    console.print("")

    runner = StudyRunner(cfg, seeds=seed_list)
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        console=console,
    ) as progress:
        task = progress.add_task("Running study...", total=None)
        runner.on_progress(
            lambda done, total, label: progress.update(task, completed=done, total=total, description=label)
        )
        result = runner.run(study)

    Config.ensure_directories()
    reporter = Reporter(study, result.config_hash, output_dir=Path(output) if output else None)
    console.print(f"📊 JSON: [green]{reporter.generate_json(result)}[/green]")
    console.print(f"📊 CSV: [green]{reporter.generate_csv(result)}[/green]")
    console.print(f"📄 Markdown: [green]{reporter.generate_markdown(result)}[/green]")
    for path in reporter.plot_study(result):
        console.print(f"🖼️  Plot: [green]{path}[/green]")
    reporter.print_summary(result, console)


@cli.command('make-corpus')
@click.argument('output')
@click.option('--seed', type=int, default=1, help='Corpus seed')
@click.option('--size', type=int, default=500, help='Number of images')
@click.option('--split', type=click.Choice(['train', 'test']), default='train', help='Split to draw from')
@click.option('--side', type=int, default=None, help='Image side (default: IMAGE_SIDE)')
def make_corpus(output, seed, size, split, side):
    """Write a procedural synthetic corpus as PNGs."""
    folder = create_corpus(output, seed=seed, size=size, split=split, side=side or Config.IMAGE_SIDE)
    console.print(f"[green]✅ Synthetic corpus written: {folder} ({size} images)[/green]")


@cli.command('list-manipulators')
def list_manipulators_cmd():
    """List available manipulators."""
    console.print("\n[bold]Available Manipulators:[/bold]\n")

    table = Table()
    table.add_column("Name", style="cyan")
    table.add_column("Description")
    table.add_column("Checksum (seed 0)")

    for name, manipulator_class in MANIPULATORS.items():
        description = (manipulator_class.__doc__ or "").strip().splitlines()[0] if manipulator_class.__doc__ else ""
        checksum = make_manipulator(name, seed=0).checksum()[:12]
        table.add_row(name, description, checksum)

    console.print(table)
    console.print("\nUse in a config: \"manipulator\": {\"kind\": \"<name>\", \"seed\": 1}")


@cli.command('list-studies')
def list_studies_cmd():
    """List available ablation studies."""
    table = Table(title="Studies")
    table.add_column("Name", style="cyan")
    table.add_column("Description")
    for name, description in STUDIES.items():
        table.add_row(name, description)
    console.print(table)


@cli.command('init')
def init():
    """Initialize output directories."""
    console.print("\n[bold blue]Initializing Template Forensics[/bold blue]\n")

    # Create directories
    Config.ensure_directories()
    console.print(f"✅ Created output directory: {Config.OUTPUT_ROOT}")
    console.print(f"✅ Created reports directory: {Config.REPORT_DIR}")

    # Check .env
    env_file = Path(".env")
    if not env_file.exists():
        console.print("\n[yellow]⚠️  No .env file found (defaults in use).[/yellow]")
        console.print("Copy .env.example to .env to change output locations or worker counts:")
        console.print("  cp .env.example .env")
    else:
        console.print("✅ .env file exists")

    console.print("\n[bold]Next steps:[/bold]")
    console.print("1. Run: python main.py train configs/minimal.json")
    console.print("2. Run: python main.py ablate set_size configs/desk.json")


if __name__ == "__main__":
    cli()
