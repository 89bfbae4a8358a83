import os
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

import typer
from dotenv import load_dotenv
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table
from rich.theme import Theme
from schema import SchemaError
from typing_extensions import Annotated

from syllobench import analysis, dataio
from syllobench.config import RunConfig, parse_run_config
from syllobench.domain import ResponseMatrix
from syllobench.errors import ConfigurationError, SyllobenchError
from syllobench.harness import accuracy_summary, run_loo
from syllobench.recommenders import ibcf_build
from syllobench.registry import build_factories, is_known_model, valid_model_names
from syllobench.synthetic import NoiseSpec, apply_noise, generate_population
from syllobench.util import parse_float_list, parse_name_list

custom_theme = Theme(
    {
        "input_prompt": "bold cyan",
        "announcement": "bold yellow",
        "success": "bold green",
        "warning": "bold orange1",
        "error": "bold red",
        "bold": "bold",
    }
)

console = Console(theme=custom_theme)
error_console = Console(theme=custom_theme, stderr=True)

SEED_ENV_VAR = "SYLLOBENCH_SEED"
DEFAULT_OUT = "./out"
DEFAULT_CURVE_MODELS = "random,mfa,ubcf,ibcf"

app = typer.Typer(
    name="syllobench",
    help="Benchmark predictive models of human syllogistic reasoning.",
    no_args_is_help=True,
)


@app.callback()
def main():
    # a .env in the working directory may provide SYLLOBENCH_SEED
    load_dotenv(dotenv_path=Path.cwd() / ".env")


def print_error(message: str):
    error_console.print(message, style="error", markup=False)


@contextmanager
def runtime_errors():
    """Report library and I/O failures and exit with code 1."""
    try:
        yield
    except (SyllobenchError, SchemaError, OSError) as e:
        print_error(f"ERROR: {e}")
        raise typer.Exit(code=1)


def require_seed(seed: Optional[int]) -> int:
    if seed is None:
        raise typer.BadParameter(
            f"a seed is required, pass --seed or set {SEED_ENV_VAR}", param_hint="--seed"
        )
    return seed


def check_model_names(names: List[str]) -> List[str]:
    if len(names) == 0:
        raise typer.BadParameter("no models given", param_hint="--models")
    unknown = [name for name in names if not is_known_model(name)]
    if unknown:
        raise typer.BadParameter(
            f"unknown models {unknown}, valid models are {valid_model_names()}",
            param_hint="--models",
        )
    return names


def check_grid(text: str) -> List[float]:
    try:
        grid = parse_float_list(text)
    except ValueError:
        raise typer.BadParameter(
            f"'{text}' is not a comma separated list of numbers", param_hint="--grid"
        )
    outside = [p for p in grid if not 0.0 <= p <= 1.0]
    if outside:
        raise typer.BadParameter(f"noise values {outside} lie outside [0, 1]", param_hint="--grid")
    return grid


def load_run_config(path: Optional[Path]) -> Optional[RunConfig]:
    if path is None:
        return None
    with runtime_errors():
        with open(path, "r") as config_file:
            return parse_run_config(config_file)


def fold_progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=console,
        transient=True,
    )


def print_accuracy_table(result, title: str):
    table = Table(title=title)
    table.add_column("model", style="bold")
    table.add_column("accuracy", justify="right")
    table.add_column("trials", justify="right")
    for summary in accuracy_summary(result):
        table.add_row(summary.model_id, f"{summary.accuracy:.4f}", str(summary.trials))
    console.print(table)


# fmt: off
@app.command(name="gen", help="Generate the 256 artificial reasoners, optionally with noise, as a dataset CSV")
def cmd_gen(
        noise: Annotated[float, typer.Option("--noise", help="Proportion of responses replaced at random, "
                                                              "in [0, 1]")] = 0.0,
        seed: Annotated[Optional[int], typer.Option("--seed", envvar=SEED_ENV_VAR,
                                                    help="Seed of the noise draws")] = None,
        out: Annotated[str, typer.Option("--out", help="Output directory")] = DEFAULT_OUT,
        file_name: Annotated[str, typer.Option("--name", help="File name of the dataset")] = "population.csv",
):
    # fmt: on
    if not 0.0 <= noise <= 1.0:
        raise typer.BadParameter(f"{noise} lies outside [0, 1]", param_hint="--noise")
    if noise > 0.0:
        seed = require_seed(seed)

    with runtime_errors():
        population = apply_noise(generate_population(), NoiseSpec(noise, seed or 0))
        path = dataio.save_dataset(population, Path(out) / file_name)

    console.print(
        f".. SUCCESS [gen]: Wrote {len(population)} reasoners to [italic]{path}[/]", style="success"
    )


def load_datasets(paths: List[str]):
    dataset = []
    for path in paths:
        profiles = dataio.load_dataset(path)
        console.print(f".... PROGRESS [data]: Loaded {len(profiles)} subjects from {path}")
        dataset.extend(profiles)

    subject_ids = [profile.subject_id for profile in dataset]
    if len(set(subject_ids)) != len(subject_ids):
        raise ConfigurationError("Subject ids repeat across the given datasets")
    return dataset


# fmt: off
@app.command(name="run", help="Benchmark models on a dataset with leave-one-out cross-validation")
def cmd_run(
        data: Annotated[Optional[List[str]], typer.Option("--data", help="Dataset CSV (repeatable)")] = None,
        models: Annotated[Optional[str], typer.Option("--models", help="Comma separated model names, "
                                                                       "e.g. mfa,ubcf,table:phm.json")] = None,
        seed: Annotated[Optional[int], typer.Option("--seed", envvar=SEED_ENV_VAR)] = None,
        out: Annotated[Optional[str], typer.Option("--out", help="Output directory")] = None,
        jobs: Annotated[Optional[int], typer.Option("--jobs", min=1, help="Worker processes "
                                                                          "[default: all processors]")] = None,
        config: Annotated[Optional[Path], typer.Option("--config", help="YAML run config; flags override "
                                                                        "its values")] = None,
        tie_break: Annotated[Optional[str], typer.Option("--tie-break", help="canonical or random")] = None,
        top_k: Annotated[Optional[int], typer.Option("--top-k", min=1, help="UBCF neighbourhood size")] = None,
        dump_matrix: Annotated[Optional[Path], typer.Option("--dump-matrix", help="Write the item x item "
                                                                                  "matrix of the full dataset "
                                                                                  "to this CSV")] = None,
):
    # fmt: on
    run_config = load_run_config(config)

    if tie_break is not None and tie_break not in ("canonical", "random"):
        raise typer.BadParameter(f"'{tie_break}' is not canonical or random", param_hint="--tie-break")

    model_names = parse_name_list(models) if models is not None else None
    if model_names is not None:
        check_model_names(model_names)

    if run_config is None:
        run_config = RunConfig(seed=require_seed(seed))
    run_config = run_config.merged(
        seed=seed,
        data=list(data) if data else None,
        models=model_names,
        out=out,
        tie_break=tie_break,
        top_k=top_k,
        jobs=jobs,
    )

    if len(run_config.data) == 0:
        raise typer.BadParameter("no dataset given", param_hint="--data")
    if len(run_config.models) == 0:
        raise typer.BadParameter("no models given", param_hint="--models")

    with runtime_errors():
        dataset = load_datasets(run_config.data)
        factories = build_factories(run_config.models, run_config.tie_break, run_config.top_k)
        console.print(f"INFO: Benchmarking {list(factories)} on {len(dataset)} subjects",
                      style="announcement")

        with fold_progress() as progress:
            task = progress.add_task("Leave-one-out folds", total=len(dataset))
            result = run_loo(
                dataset,
                factories,
                run_config.seed,
                jobs=run_config.jobs or os.cpu_count() or 1,
                on_fold=lambda _: progress.advance(task),
            )

        trials_path, summary_path = dataio.save_results(
            result, run_config.out, run_config.to_dict(), run_config.seed
        )

        if dump_matrix is not None:
            dataio.save_item_matrix(ibcf_build(ResponseMatrix.from_profiles(dataset)), dump_matrix)
            console.print(f".... PROGRESS [run]: Wrote item matrix to {dump_matrix}")

    print_accuracy_table(result, "Leave-one-out accuracy")
    console.print(f".. SUCCESS [run]: Wrote {trials_path} and {summary_path}", style="success")


# fmt: off
@app.command(name="entropy", help="Per-task response entropy, and accuracy against entropy for a results directory")
def cmd_entropy(
        data: Annotated[str, typer.Option("--data", help="Dataset CSV")],
        results: Annotated[Optional[Path], typer.Option("--results", help="Directory holding trials.csv "
                                                                          "from `run` on the same data")] = None,
        bins: Annotated[Optional[int], typer.Option("--bins", min=1, help="Number of equal-width entropy bins "
                                                                          f"[default: {analysis.DEFAULT_BINS}]")]
        = None,
        out: Annotated[str, typer.Option("--out", help="Output directory")] = DEFAULT_OUT,
        config: Annotated[Optional[Path], typer.Option("--config", help="YAML run config providing bins")] = None,
):
    # fmt: on
    run_config = load_run_config(config)
    if bins is None:
        bins = run_config.bins if run_config is not None else analysis.DEFAULT_BINS

    with runtime_errors():
        dataset = dataio.load_dataset(data)
        report = analysis.entropy_report(dataset)
        path = dataio.save_entropy_report(report, Path(out) / "entropy.csv")
        console.print(f".. SUCCESS [entropy]: Wrote task entropies to {path}", style="success")

        if results is not None:
            result = dataio.load_results(results)
            points, scatter = analysis.entropy_accuracy_curve(result, dataset, bins)
            curve_path = dataio.save_curve(points, Path(out) / "entropy_curve.csv")
            scatter_path = dataio.save_scatter(scatter, Path(out) / "entropy_scatter.csv")
            console.print(f".. SUCCESS [entropy]: Wrote {curve_path} and {scatter_path}", style="success")


# fmt: off
@app.command(name="curve", help="Sweep noise over the artificial population and record model accuracy")
def cmd_curve(
        grid: Annotated[Optional[str], typer.Option("--grid", help="Comma separated noise proportions "
                                                                   "[default: 0,0.1,...,1]")] = None,
        models: Annotated[Optional[str], typer.Option("--models", help="Comma separated model names "
                                                                       f"[default: {DEFAULT_CURVE_MODELS}]")] = None,
        seed: Annotated[Optional[int], typer.Option("--seed", envvar=SEED_ENV_VAR)] = None,
        out: Annotated[Optional[str], typer.Option("--out", help="Output directory")] = None,
        jobs: Annotated[Optional[int], typer.Option("--jobs", min=1, help="Worker processes "
                                                                          "[default: all processors]")] = None,
        config: Annotated[Optional[Path], typer.Option("--config", help="YAML run config; flags override "
                                                                        "its values")] = None,
        target_accuracy: Annotated[Optional[float], typer.Option("--target-accuracy", help="Also report the noise "
                                                                                  "at which each model falls "
                                                                                  "to this accuracy")] = None,
):
    # fmt: on
    noise_grid = check_grid(grid) if grid is not None else None
    if target_accuracy is not None and not 0.0 <= target_accuracy <= 1.0:
        raise typer.BadParameter(f"{target_accuracy} lies outside [0, 1]", param_hint="--target-accuracy")
    model_names = check_model_names(parse_name_list(models)) if models is not None else None

    run_config = load_run_config(config)
    if run_config is None:
        run_config = RunConfig(seed=require_seed(seed), models=parse_name_list(DEFAULT_CURVE_MODELS))
    elif len(run_config.models) == 0:
        run_config = run_config.merged(models=parse_name_list(DEFAULT_CURVE_MODELS))
    run_config = run_config.merged(seed=seed, models=model_names, noise_grid=noise_grid, out=out, jobs=jobs)

    with runtime_errors():
        factories = build_factories(run_config.models, run_config.tie_break, run_config.top_k)
        population = generate_population()

        with fold_progress() as progress:
            task = progress.add_task("Noise levels", total=len(run_config.noise_grid))
            curve = analysis.noise_accuracy_curve(
                population,
                run_config.noise_grid,
                factories,
                run_config.seed,
                jobs=run_config.jobs or os.cpu_count() or 1,
                on_point=lambda _: progress.advance(task),
            )

        curve_path = dataio.save_curve(curve.points, Path(run_config.out) / "noise_curve.csv")
        entropy_path = dataio.save_curve(curve.entropy_points, Path(run_config.out) / "noise_entropy_curve.csv")
        written = [curve_path, entropy_path]
        if target_accuracy is not None:
            equivalents = analysis.noise_equivalents(curve.points, target_accuracy)
            written.append(
                dataio.save_noise_equivalents(
                    equivalents, target_accuracy, Path(run_config.out) / "noise_equivalent.csv"
                )
            )

    if len(run_config.noise_grid) > 1:
        table = Table(title="Accuracy against noise (least-squares line)")
        table.add_column("model", style="bold")
        table.add_column("slope", justify="right")
        table.add_column("intercept", justify="right")
        table.add_column("R^2", justify="right")
        for model_id in factories:
            slope, intercept, r_squared = analysis.linear_fit(curve.points, model_id)
            table.add_row(model_id, f"{slope:.4f}", f"{intercept:.4f}", f"{r_squared:.4f}")
        console.print(table)

    if target_accuracy is not None:
        table = Table(title=f"Noise at which accuracy falls to {target_accuracy:.4f}")
        table.add_column("model", style="bold")
        table.add_column("noise", justify="right")
        for model_id, proportion in equivalents.items():
            table.add_row(model_id, f"{proportion:.4f}")
        console.print(table)

    console.print(f".. SUCCESS [curve]: Wrote {', '.join(map(str, written))}", style="success")


# fmt: off
@app.command(name="validate", help="Validate a dataset CSV or a prediction-table JSON")
def cmd_validate(
        path: Annotated[Path, typer.Argument(help="File to validate")],
        table: Annotated[bool, typer.Option("--table", help="Validate a prediction table instead of a "
                                                            "dataset")] = False,
):
    # fmt: on
    with runtime_errors():
        if table:
            dataio.load_prediction_table(path)
            console.print(f".. SUCCESS [validate]: {path} is a valid prediction table", style="success")
        else:
            profiles = dataio.load_dataset(path)
            complete = sum(1 for profile in profiles if profile.is_complete)
            console.print(
                f".. SUCCESS [validate]: {path} holds {len(profiles)} subjects ({complete} complete)",
                style="success",
            )


if __name__ == "__main__":
    app()
