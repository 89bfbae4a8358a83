"""
Reading and writing datasets, prediction tables, benchmark results and curves.

Dataset CSV: header `subject,seq,task,response`, one row per answered task. All CSV output uses "\n" line
endings and a fixed column order so that identical inputs produce byte-identical files.
"""
import json
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

import pandas as pd
from schema import And, Optional, Schema, SchemaError

import syllobench
from syllobench.analysis import CurvePoint, EntropyReport, ScatterPoint
from syllobench.domain import (
    RESPONSES,
    ReasonerProfile,
    TASKS,
    TrialRecord,
    parse_response,
    parse_task,
)
from syllobench.errors import DatasetError, ParseError, TableValidationError
from syllobench.harness import TRIAL_COLUMNS, BenchmarkResult, TrialOutcome, accuracy_summary
from syllobench.models import PredictionTable
from syllobench.recommenders import ItemMatrix

DATASET_COLUMNS = ["subject", "seq", "task", "response"]
CURVE_COLUMNS = ["x", "model", "accuracy", "n"]
TRIALS_FILE = "trials.csv"
SUMMARY_FILE = "summary.json"


def _is_task_code(code: str) -> bool:
    try:
        parse_task(code)
        return True
    except ParseError:
        return False


def _is_response_code(code: str) -> bool:
    try:
        parse_response(code)
        return True
    except ParseError:
        return False


prediction_table_schema = Schema(
    {
        Optional("_comment"): str,
        And(str, _is_task_code): And([And(str, _is_response_code)], len),
    }
)


def _write_csv(frame: pd.DataFrame, path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise OSError(e.errno, f"Failed to write '{path}': {e.strerror}") from e


##########
# Datasets
##########


def load_dataset(path: Path or str) -> List[ReasonerProfile]:
    """
    Load and validate a dataset CSV.

    Profiles are returned in order of each subject's first row, records sorted by `seq`.

    :param path: A UTF-8 CSV file with header `subject,seq,task,response`.
    :raises DatasetError: On a missing/wrong header, a malformed row, an invalid code, a duplicate
        (subject, task) or (subject, seq) pair. Errors name the 1-based file row (the header is row 1).
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"'{path}' is empty, expected header {','.join(DATASET_COLUMNS)}")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DatasetError(f"'{path}' is not a valid UTF-8 CSV file: {e}")

    if list(frame.columns) != DATASET_COLUMNS:
        raise DatasetError(
            f"Expected header {','.join(DATASET_COLUMNS)}, found {','.join(map(str, frame.columns))}",
            row=1,
        )

    records: Dict[str, List[TrialRecord]] = {}
    seen_tasks = set()
    seen_seqs = set()
    for row_number, row in enumerate(frame.itertuples(index=False), start=2):
        subject, seq, task_code, response_code = (str(value).strip() for value in row)

        if len(subject) == 0:
            raise DatasetError("Empty subject id", row=row_number)
        try:
            seq = int(seq)
        except ValueError:
            raise DatasetError(f"Sequence index {seq!r} is not an integer", row=row_number)
        try:
            task = parse_task(task_code)
            response = parse_response(response_code)
        except ParseError as e:
            raise DatasetError(str(e), row=row_number)

        if (subject, task) in seen_tasks:
            raise DatasetError(
                f"Subject \"{subject}\" answers task {task.code} twice", row=row_number
            )
        if (subject, seq) in seen_seqs:
            raise DatasetError(
                f"Subject \"{subject}\" repeats sequence index {seq}", row=row_number
            )
        seen_tasks.add((subject, task))
        seen_seqs.add((subject, seq))

        records.setdefault(subject, []).append(TrialRecord(seq, task, response))

    return [
        ReasonerProfile(subject, tuple(sorted(subject_records, key=lambda r: r.seq)))
        for subject, subject_records in records.items()
    ]


def dataset_frame(profiles: Sequence[ReasonerProfile]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            (profile.subject_id, record.seq, record.task.code, record.response.code)
            for profile in profiles
            for record in profile.records
        ],
        columns=DATASET_COLUMNS,
    )


def save_dataset(profiles: Sequence[ReasonerProfile], path: Path or str) -> Path:
    path = Path(path)
    _write_csv(dataset_frame(profiles), path)
    return path


###################
# Prediction tables
###################


def load_prediction_table(path: Path or str) -> PredictionTable:
    """
    Load a JSON prediction table: an object mapping each of the 64 task codes to a non-empty array of response
    codes in preference order. An optional "_comment" string is ignored.

    :raises TableValidationError: If the file is not such an object or a task is missing.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as table_file:
            loaded = json.load(table_file)
    except (OSError, ValueError) as e:
        raise TableValidationError(f"Could not read prediction table '{path}': {e}")

    try:
        prediction_table_schema.validate(loaded)
    except SchemaError as e:
        raise TableValidationError(f"Invalid prediction table '{path}': {e}")

    mapping = {
        parse_task(code): [parse_response(r) for r in responses]
        for code, responses in loaded.items()
        if code != "_comment"
    }
    return PredictionTable.from_mapping(path.stem, mapping)


#########
# Results
#########


def summary_document(result: BenchmarkResult, config: Mapping, seed: int) -> dict:
    return {
        "version": syllobench.__version__,
        "seed": seed,
        "config": dict(config),
        "models": [
            {
                "model": summary.model_id,
                "accuracy": summary.accuracy,
                "trials": summary.trials,
                "task_accuracies": summary.task_accuracies,
                "subject_accuracies": summary.subject_accuracies,
            }
            for summary in accuracy_summary(result)
        ],
    }


def save_results(
    result: BenchmarkResult, directory: Path or str, config: Mapping, seed: int
) -> Tuple[Path, Path]:
    """
    Write `trials.csv` (one row per trial outcome) and `summary.json` (accuracies, config echo, seed, version).

    :return: Paths of the two files.
    """
    directory = Path(directory)
    trials_path = directory / TRIALS_FILE
    summary_path = directory / SUMMARY_FILE

    _write_csv(result.to_frame(), trials_path)
    try:
        with open(summary_path, "w", encoding="utf-8", newline="\n") as summary_file:
            json.dump(summary_document(result, config, seed), summary_file, indent=2)
            summary_file.write("\n")
    except OSError as e:
        raise OSError(e.errno, f"Failed to write '{summary_path}': {e.strerror}") from e

    return trials_path, summary_path


def load_results(directory: Path or str) -> BenchmarkResult:
    """
    Read a `trials.csv` written by `save_results` back into a BenchmarkResult.

    :raises DatasetError: If the file has the wrong header or invalid codes.
    """
    path = Path(directory) / TRIALS_FILE
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    if list(frame.columns) != TRIAL_COLUMNS:
        raise DatasetError(f"Expected header {','.join(TRIAL_COLUMNS)} in '{path}'", row=1)

    outcomes = []
    for row_number, row in enumerate(frame.itertuples(index=False), start=2):
        try:
            outcomes.append(
                TrialOutcome(
                    model_id=row.model,
                    subject_id=row.subject,
                    seq=int(row.seq),
                    task=parse_task(row.task),
                    prediction=parse_response(row.prediction),
                    truth=parse_response(row.truth),
                )
            )
        except (ParseError, ValueError) as e:
            raise DatasetError(str(e), row=row_number)
    return BenchmarkResult(outcomes)


########
# Curves
########


def save_curve(points: Sequence[CurvePoint], path: Path or str) -> Path:
    path = Path(path)
    frame = pd.DataFrame(
        [(point.x, point.model, point.accuracy, point.n) for point in points],
        columns=CURVE_COLUMNS,
    )
    _write_csv(frame, path)
    return path


def save_noise_equivalents(equivalents: Mapping[str, float], accuracy: float, path: Path or str) -> Path:
    path = Path(path)
    frame = pd.DataFrame(
        [(model, accuracy, noise) for model, noise in equivalents.items()],
        columns=["model", "target_accuracy", "noise"],
    )
    _write_csv(frame, path)
    return path


def save_scatter(points: Sequence[ScatterPoint], path: Path or str) -> Path:
    path = Path(path)
    frame = pd.DataFrame(
        [(p.task, p.entropy, p.model, p.accuracy, p.n) for p in points],
        columns=["task", "entropy", "model", "accuracy", "n"],
    )
    _write_csv(frame, path)
    return path


def save_entropy_report(report: EntropyReport, path: Path or str) -> Path:
    path = Path(path)
    rows = [
        [task.code, report.entropies[task], report.counts[task]]
        + [report.distributions[task][response] for response in RESPONSES]
        for task in TASKS
        if task in report.entropies
    ]
    frame = pd.DataFrame(
        rows,
        columns=["task", "entropy", "n"] + [f"p_{response.code}" for response in RESPONSES],
    )
    _write_csv(frame, path)
    return path


def save_item_matrix(matrix: ItemMatrix, path: Path or str) -> Path:
    """Dump the item x item matrix as a labelled square CSV (items labelled "<task>:<response>")."""
    path = Path(path)
    labels = [f"{task.code}:{response.code}" for task in TASKS for response in RESPONSES]
    frame = pd.DataFrame(matrix.counts, index=labels, columns=labels)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index_label="item", lineterminator="\n")
    except OSError as e:
        raise OSError(e.errno, f"Failed to write '{path}': {e.strerror}") from e
    return path
