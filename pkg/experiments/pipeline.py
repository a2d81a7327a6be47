"""
Experiment pipeline.

Validates an ExperimentConfig, dispatches to the engine and turns the engine's
reports into flat rows: config -> params -> engine call -> ExperimentResult.
"""

from typing import Any, Callable, Dict, List, Tuple
from pathlib import Path
from engine import bounds, chebyshev, horizontal, multilinear, statistics
from engine.core_arith import as_prime, primes_in
from engine.kloosterman import kloosterman_naive, table_moments, zero_bucket
from engine.table_cache import get_table
from experiments.config_loader import (
    int_list,
    interval_from,
    multisum_spec_from,
    param,
    partition_from,
    prime_range,
)
from shared.config import settings
from shared.exceptions import ConfigValidationError
from shared.models import ExperimentConfig, ExperimentKind, ExperimentResult, GMMomentSpec, TableMethod
import numpy as np
import logging

logger = logging.getLogger(__name__)

Row = Tuple[Any, ...]

HEADERS: Dict[ExperimentKind, Tuple[str, ...]] = {
    ExperimentKind.COMPUTE: ("kind", "a", "b", "p", "method", "value"),
    ExperimentKind.TABLE: ("kind", "p", "b", "method", "max_abs", "weil_ratio",
                           "first_moment", "second_moment", "zero_count"),
    ExperimentKind.VST: ("kind", "p", "k", "observed", "bound", "ratio"),
    ExperimentKind.INTERVAL: ("kind", "p", "h", "k", "M", "N", "observed", "bound_omega_r", "r_star", "ratio"),
    ExperimentKind.TWISTED: ("kind", "p", "h", "m", "k", "M", "N", "observed", "bound_omega_r", "r_star", "ratio"),
    ExperimentKind.MOMENTS: ("kind", "p", "h", "alpha", "signed", "M", "N", "observed", "main_term",
                             "ratio", "error", "error_scale", "error_ratio"),
    ExperimentKind.SIGNS: ("kind", "p", "h", "M", "N", "positive", "negative", "zero_bucket",
                           "positive_fraction", "negative_fraction", "lower_bound_ok"),
    ExperimentKind.EXTREMES: ("kind", "p", "h", "delta", "M", "N", "small", "large", "boundary",
                              "small_fraction", "small_main_fraction", "large_fraction", "large_main_fraction"),
    ExperimentKind.CDF: ("kind", "p", "h", "M", "N", "discrepancy", "exact_discrepancy", "reference_scale"),
    ExperimentKind.MULTISUM: ("kind", "p", "s", "h", "value_real", "value_imag", "observed", "excluded",
                              "lemma5_bound", "lemma5_ratio", "lemma6_bound", "lemma6_ratio",
                              "lemma5_applies", "lemma6_applies"),
    ExperimentKind.GM: ("kind", "p", "h", "r", "k", "m", "m_char", "gm", "gm_bound", "gm_ratio",
                        "gm_max", "gm_max_bound", "gm_max_ratio", "gm_character"),
    ExperimentKind.WK: ("kind", "p", "r", "k", "h", "intervals", "observed", "bound", "ratio", "constant", "sampled"),
    ExperimentKind.HORIZONTAL: ("kind", "x", "h", "k", "M", "N", "pairs", "sum", "ratio",
                                "positive", "negative", "positive_fraction"),
    ExperimentKind.BOUNDS: ("kind", "p", "N", "k", "r", "omega_r", "theorem1_bound", "best"),
    ExperimentKind.CHEBYSHEV: ("kind", "mode", "ell", "coefficient"),
}

# Parameters that must be present before anything runs
REQUIRED: Dict[ExperimentKind, Tuple[str, ...]] = {
    ExperimentKind.COMPUTE: ("a", "b", "p"),
    ExperimentKind.TABLE: (),
    ExperimentKind.VST: ("k",),
    ExperimentKind.INTERVAL: ("p", "k", "N"),
    ExperimentKind.TWISTED: ("p", "k", "m", "N"),
    ExperimentKind.MOMENTS: ("p", "alpha"),
    ExperimentKind.SIGNS: ("p",),
    ExperimentKind.EXTREMES: ("p", "delta"),
    ExperimentKind.CDF: (),
    ExperimentKind.MULTISUM: ("p", "polys", "orders"),
    ExperimentKind.GM: ("p", "h", "r", "k", "m"),
    ExperimentKind.WK: ("p", "r", "k", "h"),
    ExperimentKind.HORIZONTAL: ("x", "N"),
    ExperimentKind.BOUNDS: ("p", "N"),
    ExperimentKind.CHEBYSHEV: ("mode",),
}

# Kinds that accept p_lo/p_hi in place of p
RANGE_KINDS = (ExperimentKind.TABLE, ExperimentKind.VST, ExperimentKind.CDF)

CHEBYSHEV_MODES = ("power", "indicator", "sign", "extreme", "linearize")


class ExperimentPipeline:
    """Runs one ExperimentConfig and returns its rows."""

    def __init__(self):
        """Bind one handler per experiment kind."""
        self._handlers: Dict[ExperimentKind, Callable[[Dict[str, Any]], List[Row]]] = {
            kind: getattr(self, f"_run_{kind.value}") for kind in ExperimentKind
        }

    # ============================================
    # Validation
    # ============================================

    def validate(self, config: ExperimentConfig):
        """
        Check required parameters and their types before any computation.

        Raises:
            ConfigValidationError: missing, ill-typed or composite inputs
        """
        params = config.params
        for key in REQUIRED[config.kind]:
            if key not in params:
                raise ConfigValidationError(f"{config.kind.value}: missing required parameter '{key}'")

        if config.kind in RANGE_KINDS:
            lo, hi = prime_range(params)
            if lo is None:
                if "p" not in params:
                    raise ConfigValidationError(f"{config.kind.value}: give either p or p_lo/p_hi")
            elif lo > hi:
                raise ConfigValidationError(f"empty prime range [{lo}, {hi}]")

        for key in ("p", "h", "k", "m", "r", "N", "M", "a", "b", "x", "samples", "seed", "L", "m_char"):
            if key in params:
                param(params, key, int)
        for key in ("alpha", "delta", "c", "d"):
            if key in params:
                param(params, key, float)

        if "p" in params:
            try:
                as_prime(params["p"])
            except ValueError as e:
                raise ConfigValidationError(str(e)) from e

        if "method" in params:
            try:
                TableMethod(str(params["method"]))
            except ValueError as e:
                raise ConfigValidationError(f"unknown method {params['method']!r}") from e
        if config.kind is ExperimentKind.CHEBYSHEV and params["mode"] not in CHEBYSHEV_MODES:
            raise ConfigValidationError(f"chebyshev mode must be one of {CHEBYSHEV_MODES}")
        if config.kind is ExperimentKind.MULTISUM:
            multisum_spec_from(params)

    # ============================================
    # Entry point
    # ============================================

    def process(self, config: ExperimentConfig) -> ExperimentResult:
        """
        Validate and run one experiment.

        Args:
            config: The experiment

        Returns:
            ExperimentResult with the kind's fixed header
        """
        self.validate(config)
        logger.info(f"Running {config.kind.value} with {config.params}")
        params = dict(config.params)
        rows = self._handlers[config.kind](params)
        seed = params.get("_seed_used")
        logger.info(f"Finished {config.kind.value}: {len(rows)} rows")
        return ExperimentResult(
            kind=config.kind,
            header=HEADERS[config.kind],
            rows=rows,
            seed=seed,
            sort_key=self.sort_key(config),
        )

    @staticmethod
    def sort_key(config: ExperimentConfig) -> Tuple[Any, ...]:
        """(kind, p or x, remaining params) for deterministic merges."""
        params = config.params
        lead = params.get("p", params.get("p_lo", params.get("x", 0)))
        rest = tuple(sorted((k, str(v)) for k, v in params.items()))
        return (config.kind.value, int(lead) if isinstance(lead, int) else 0, rest)

    # ============================================
    # Helpers
    # ============================================

    @staticmethod
    def _primes(params: Dict[str, Any]) -> List[int]:
        lo, hi = prime_range(params)
        if lo is None:
            return [as_prime(params["p"])]
        return primes_in(lo - 1, hi)

    @staticmethod
    def _seed(params: Dict[str, Any]) -> int:
        seed = param(params, "seed", int, settings.seed)
        params["_seed_used"] = seed
        return seed

    # ============================================
    # Handlers
    # ============================================

    def _run_compute(self, params):
        a, b, p = param(params, "a", int), param(params, "b", int), param(params, "p", int)
        method = TableMethod(param(params, "method", str, TableMethod.NAIVE.value))
        if method is TableMethod.NAIVE:
            value = kloosterman_naive(a, b, p)
        else:
            value = get_table(p, b, method)[a]
        return [("compute", a, b, p, method.value, value)]

    def _run_table(self, params):
        b = param(params, "b", int, 1)
        method = TableMethod(param(params, "method", str, TableMethod.DFT.value))
        cache = params.get("cache")
        directory = Path(str(cache)).expanduser() if cache else None
        rows = []
        for p in self._primes(params):
            table = get_table(p, b, method, directory=directory)
            moments = table_moments(table)
            worst = table.max_abs()
            rows.append((
                "table", p, table.b, method.value, worst, worst / bounds.weil_bound(p),
                moments["first"], moments["second"], int(zero_bucket(table).size)
            ))
        return rows

    def _run_vst(self, params):
        k = param(params, "k", int)
        rows = []
        for p in self._primes(params):
            report = statistics.vst_full_sum(p, k)
            rows.append(("vst", p, k, report.observed, report.bound, report.ratio))
        return rows

    def _run_interval(self, params):
        p, k = param(params, "p", int), param(params, "k", int)
        r = params.get("r")
        samples = param(params, "samples", int, 0)
        if samples <= 0:
            h = param(params, "h", int, 1)
            cases = [(interval_from(params), h)]
        else:
            rng = np.random.default_rng(self._seed(params))
            base = interval_from(params)
            cases = [
                (base.shifted(int(rng.integers(0, p)) - base.M), int(rng.integers(1, p)))
                for _ in range(samples)
            ]
        rows = []
        for interval, h in cases:
            report = statistics.interval_report(interval, p, h, k, r)
            rows.append((
                "interval", p, h, k, interval.M, interval.N,
                report.observed, report.bound, report.params["r_star"], report.ratio
            ))
        return rows

    def _run_twisted(self, params):
        p, k, m = param(params, "p", int), param(params, "k", int), param(params, "m", int)
        h = param(params, "h", int, 1)
        interval = interval_from(params)
        report = statistics.twisted_report(interval, p, h, m, k)
        return [(
            "twisted", p, h, m, k, interval.M, interval.N,
            report.observed, report.bound, report.params["r_star"], report.ratio
        )]

    def _run_moments(self, params):
        p, alpha = param(params, "p", int), param(params, "alpha", float)
        h = param(params, "h", int, 1)
        signed = param(params, "signed", bool, False)
        interval = interval_from(params, p)
        if signed:
            report = statistics.moment_v(interval, p, h, alpha)
        else:
            report = statistics.moment_v_abs(interval, p, h, alpha)
        return [(
            "moments", p, h, alpha, signed, interval.M, interval.N,
            report.observed, report.main_term, report.ratio,
            report.error, report.error_scale, report.error_ratio
        )]

    def _run_signs(self, params):
        p, h = param(params, "p", int), param(params, "h", int, 1)
        interval = interval_from(params, p)
        report = statistics.sign_count(interval, p, h)
        check = statistics.sign_lower_bound_check(report)
        return [(
            "signs", p, h, interval.M, interval.N,
            report.positive.observed, report.negative.observed, report.zero_bucket,
            report.positive.fraction, report.negative.fraction,
            check["positive_ok"] and check["negative_ok"]
        )]

    def _run_extremes(self, params):
        p, h = param(params, "p", int), param(params, "h", int, 1)
        delta = param(params, "delta", float)
        interval = interval_from(params, p)
        small = statistics.small_value_count(interval, p, h, delta)
        large = statistics.large_value_count(interval, p, h, delta)
        small_mass, large_mass = statistics.sato_tate_main(delta)
        return [(
            "extremes", p, h, delta, interval.M, interval.N,
            small.observed, large.observed, statistics.boundary_count(interval, p, h, delta),
            small.fraction, small_mass, large.fraction, large_mass
        )]

    def _run_cdf(self, params):
        h = param(params, "h", int, 1)
        rows = []
        for p in self._primes(params):
            interval = interval_from(params, p)
            rows.append((
                "cdf", p, h, interval.M, interval.N,
                statistics.empirical_cdf_discrepancy(interval, p, h),
                statistics.exact_discrepancy(interval, p, h),
                10.0 * p ** -0.25
            ))
        return rows

    def _run_multisum(self, params):
        p = param(params, "p", int)
        spec = multisum_spec_from(params)
        interval = interval_from(params) if "M" in params or "N" in params else None
        report = multilinear.multi_sum(spec, p, interval)
        extra = report.params
        return [(
            "multisum", p, spec.s, spec.h, extra["value_real"], extra["value_imag"],
            report.observed, extra["excluded"], extra["lemma5_bound"], extra["lemma5_ratio"],
            report.bound, report.ratio, extra["lemma5_applies"], extra["lemma6_applies"]
        )]

    def _run_gm(self, params):
        p = param(params, "p", int)
        spec = GMMomentSpec(
            h=param(params, "h", int), r=param(params, "r", int),
            m=param(params, "m", int), k=param(params, "k", int)
        )
        m_char = param(params, "m_char", int, 0)
        plain, maximal = multilinear.gm_report(spec, p)
        character = (
            multilinear.gm_character_moment(spec, p, m_char) if m_char % p else plain.observed
        )
        return [(
            "gm", p, spec.h, spec.r, spec.k, spec.m, m_char,
            plain.observed, plain.bound, plain.ratio,
            maximal.observed, maximal.bound, maximal.ratio, character
        )]

    def _run_wk(self, params):
        p, r, k, h = (param(params, key, int) for key in ("p", "r", "k", "h"))
        partition = partition_from(params, p, h)
        seed = param(params, "seed", int, settings.seed)
        report = multilinear.w_k_sum(partition, p, r, k, h=h, seed=seed)
        if report.params["sampled"]:
            params["_seed_used"] = seed
        return [(
            "wk", p, r, k, h, len(partition), report.observed, report.bound,
            report.ratio, report.params["constant"], report.params["sampled"]
        )]

    def _run_horizontal(self, params):
        x = param(params, "x", int)
        h, k = param(params, "h", int, 1), param(params, "k", int, 1)
        interval = interval_from(params)
        report = horizontal.horizontal_report(interval, x, h, k)
        signs = horizontal.horizontal_sign_count(interval, x, h)
        return [(
            "horizontal", x, h, k, interval.M, interval.N, report.params["pairs"],
            report.params["value"], report.ratio,
            signs.positive.observed, signs.negative.observed, signs.positive.fraction
        )]

    def _run_bounds(self, params):
        p, N = param(params, "p", int), param(params, "N", int)
        k = param(params, "k", int, 1)
        best, _ = bounds.best_r(p, N)
        return [
            ("bounds", p, N, k, r, value, k * k * value, r == best)
            for r, value in bounds.omega_table(p, N).items()
        ]

    def _run_chebyshev(self, params):
        mode = param(params, "mode", str)
        L = params.get("L")
        if mode == "power":
            series = chebyshev.expand_power(
                param(params, "alpha", float), signed=param(params, "signed", bool, True), L=L
            )
        elif mode == "indicator":
            series = chebyshev.expand_indicator(param(params, "c", float), param(params, "d", float), L)
        elif mode == "sign":
            series = chebyshev.sign_indicator_coefficients(L)
        elif mode == "extreme":
            series = chebyshev.extreme_indicator_coefficients(param(params, "delta", float), L)
        else:
            series = chebyshev.linearize_product(int_list(params, "orders"))
        return [("chebyshev", mode, ell, c) for ell, c in series.to_csv_rows()]
