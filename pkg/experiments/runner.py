"""
Run experiments, map failures onto exit codes and write reports.

Exit codes: 0 ok, 1 unexpected failure, 2 usage or validation error,
3 cost-guard refusal. Every failure also writes a JSON error record to stderr.
"""

from typing import List, Optional, Sequence, TextIO, Tuple
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from pydantic import ValidationError
from experiments.pipeline import ExperimentPipeline
from experiments.reports import error_record, write_report
from shared.exceptions import ConfigValidationError, CostGuardError, DomainError
from shared.models import ExperimentConfig, ExperimentResult, ReportFormat
import sys
import logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_COST_GUARD = 3


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception raised while running an experiment."""
    if isinstance(error, CostGuardError):
        return EXIT_COST_GUARD
    if isinstance(error, (ConfigValidationError, DomainError, ValidationError)):
        return EXIT_USAGE
    return EXIT_FAILURE


def _report_failure(kind: Optional[str], error: BaseException, stderr: Optional[TextIO]) -> int:
    code = exit_code_for(error)
    if code == EXIT_FAILURE:
        logger.exception(f"Experiment {kind} failed")
    else:
        logger.error(f"Experiment {kind} rejected: {error}")
    print(error_record(kind, error, code), file=stderr or sys.stderr)
    return code


def execute(config: ExperimentConfig, pipeline: Optional[ExperimentPipeline] = None) -> ExperimentResult:
    """Run one config and return its rows (exceptions propagate)."""
    return (pipeline or ExperimentPipeline()).process(config)


def run(
    config: ExperimentConfig,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None
) -> int:
    """
    Run one experiment and write its report.

    Args:
        config: The experiment
        stdout: Stream used when ``config.output`` is unset
        stderr: Stream for the error record

    Returns:
        Exit code
    """
    try:
        result = execute(config)
        write_report([result], config.format, config.output, stream=stdout)
        return EXIT_OK
    except Exception as e:
        return _report_failure(config.kind.value, e, stderr)


def _check_outputs(configs: Sequence[ExperimentConfig], output: Optional[Path]):
    seen = set()
    targets = [c.output for c in configs if c.output is not None]
    if output is not None:
        targets.append(output)
    for target in targets:
        key = Path(target).resolve()
        if key in seen:
            raise ConfigValidationError(f"duplicate output path {target}")
        seen.add(key)


def sweep(
    configs: Sequence[ExperimentConfig],
    workers: int = 1,
    output: Optional[Path] = None,
    fmt: ReportFormat = ReportFormat.CSV,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None
) -> int:
    """
    Run independent configs concurrently and write one merged report.

    Results are ordered by (kind, p, params), so the report does not depend
    on scheduling. Failed configs write error records; successful rows are
    still written and the sweep exits with the largest failure code.

    Args:
        configs: Experiments to run
        workers: Thread count, >= 1
        output: Merged report path (stdout when omitted)
        fmt: Merged report format

    Returns:
        Exit code
    """
    try:
        if workers < 1:
            raise ConfigValidationError(f"workers must be positive, got {workers}")
        _check_outputs(configs, output)
    except ConfigValidationError as e:
        return _report_failure("sweep", e, stderr)

    pipeline = ExperimentPipeline()

    def attempt(config: ExperimentConfig) -> Tuple[ExperimentConfig, Optional[ExperimentResult], Optional[BaseException]]:
        try:
            return config, execute(config, pipeline), None
        except Exception as e:
            return config, None, e

    logger.info(f"Sweeping {len(configs)} configs with {workers} workers")
    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, configs))
    else:
        outcomes = [attempt(c) for c in configs]

    results: List[ExperimentResult] = []
    code = EXIT_OK
    for config, result, error in outcomes:
        if error is not None:
            code = max(code, _report_failure(config.kind.value, error, stderr))
        else:
            results.append(result)

    results.sort(key=lambda r: r.sort_key)
    try:
        write_report(results, fmt, output, stream=stdout)
    except OSError as e:
        code = max(code, _report_failure("sweep", e, stderr))
    return code
