"""Experiment orchestration: configs, initial states, seeded suites, box-plot stats."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import statevec as sv
from .circuit import AnsatzSpec, DepthKind, Family, OracleSpec
from .statevec import StateVector
from .vqs import AdamConfig, Method, TerminationConfig, VqsRun, run_vqs

log = logging.getLogger(__name__)

SUITE_MAX_N = 14
RUN_MAX_N = 20
SUMMARY_HEADER = ("metric", "p0", "p25", "p50", "p75", "p100", "n_outliers")
RECORDS_FILE = "records.jsonl"
SUMMARY_FILE = "summary.csv"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 2
    ansatz: Family = Family.TYPE1
    layers: int = 3
    good_indices: tuple[int, ...] = ()
    good_count: int = 1
    ratio: tuple[float, ...] = ()
    runs: int = 100
    seed_base: int = 0
    adam: AdamConfig = field(default_factory=AdamConfig)
    termination: TerminationConfig = field(default_factory=TerminationConfig)
    method: Method = Method.DIRECT
    allow_large: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ansatz", Family(self.ansatz))
        object.__setattr__(self, "method", Method(self.method))
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.layers < 1:
            raise ConfigError(f"layers must be positive, got {self.layers}")
        if self.runs < 1:
            raise ConfigError(f"runs must be positive, got {self.runs}")
        if self.good_indices:
            # keep goods ascending (the order run records use); ratios follow their index
            pairs = sorted(zip(self.good_indices, self.ratio or [None] * len(self.good_indices)))
            object.__setattr__(self, "good_indices", tuple(int(g) for g, _ in pairs))
            if self.ratio and len(self.ratio) == len(pairs):
                object.__setattr__(self, "ratio", tuple(float(r) for _, r in pairs))
        size = 1 << self.n
        goods = self.goods
        if len(set(goods)) != len(goods):
            raise ConfigError(f"duplicate good indices {goods}")
        if not goods or min(goods) < 0 or max(goods) >= size or len(goods) >= size:
            raise ConfigError(f"good indices {goods} invalid for n={self.n}")
        if self.ratio:
            if len(self.ratio) != len(goods):
                raise ConfigError(f"{len(self.ratio)} ratios for {len(goods)} good elements")
            if any(r <= 0 for r in self.ratio) or abs(sum(self.ratio) - 1.0) > 1e-9:
                raise ConfigError(f"ratios must be positive and sum to 1, got {self.ratio}")

    @property
    def goods(self) -> tuple[int, ...]:
        """Good indices; the last ``good_count`` elements unless listed explicitly."""
        if self.good_indices:
            return tuple(self.good_indices)
        size = 1 << self.n
        return tuple(range(size - self.good_count, size))

    @property
    def oracle(self) -> OracleSpec:
        return OracleSpec(self.n, self.goods)

    @property
    def ansatz_spec(self) -> AnsatzSpec:
        return AnsatzSpec(self.ansatz, self.layers, self.n + 1)

    def check_size(self, suite: bool) -> None:
        limit = SUITE_MAX_N if suite else RUN_MAX_N
        if self.n > limit and not self.allow_large:
            raise ConfigError(
                f"n={self.n} exceeds the default limit {limit} "
                f"(~{memory_estimate(self.n) / 2**30:.1f} GiB); pass --allow-large to proceed"
            )


def memory_estimate(n: int) -> int:
    """Bytes for the working buffers of one run (psi1, psi2, adjoint vector, output)."""
    return 4 * (2 << n) * 8


# -- config file -----------------------------------------------------------------

_INT_KEYS = {"n", "layers", "runs", "seed", "seed_base", "good_count", "max_iterations", "patience"}
_FLOAT_KEYS = {"lr", "learning_rate", "beta1", "beta2", "epsilon", "small_change_threshold"}


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(" ", "").split(",") if t)


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(" ", "").split(",") if t)


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def config_from_mapping(values: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    kw = {}
    adam = {}
    term = {}
    try:
        for key, value in values.items():
            if value is None:
                continue
            if key in _INT_KEYS:
                value = int(value)
            elif key in _FLOAT_KEYS:
                value = float(value)
            if key == "n" or key == "layers" or key == "runs" or key == "good_count":
                kw[key] = value
            elif key in ("seed", "seed_base"):
                kw["seed_base"] = value
            elif key == "ansatz":
                kw["ansatz"] = Family(str(value).replace("-", "").lower())
            elif key in ("good", "good_indices"):
                kw["good_indices"] = _csv_ints(value) if isinstance(value, str) else tuple(value)
            elif key == "ratio":
                kw["ratio"] = _csv_floats(value) if isinstance(value, str) else tuple(value)
            elif key in ("lr", "learning_rate"):
                adam["learning_rate"] = value
            elif key in ("beta1", "beta2", "epsilon"):
                adam[key] = value
            elif key in ("max_iterations", "patience", "small_change_threshold"):
                term[key] = value
            elif key == "method":
                kw["method"] = Method(value)
            elif key == "allow_large":
                kw["allow_large"] = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
            else:
                raise ConfigError(f"unknown config key {key!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    current = {} if base is None else {f.name: getattr(base, f.name) for f in fields(base)}
    if "good_count" in kw:
        current["good_indices"] = ()
    current.update(kw)
    if "ratio" in kw and not current.get("good_indices") and "good_count" not in kw:
        current["good_count"] = len(kw["ratio"])
    try:
        if adam:
            current["adam"] = replace(current.get("adam", AdamConfig()), **adam)
        if term:
            current["termination"] = replace(current.get("termination", TerminationConfig()), **term)
        return ExperimentConfig(**current)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    return config_from_mapping(parse_config_text(Path(path).read_text()))


# -- initial state ---------------------------------------------------------------

def build_initial_state(config: ExperimentConfig) -> StateVector:
    """Uniform superposition, optionally with the good probabilities reshaped.

    With a ratio, good element i gets probability ratio[i] * k / N so the total
    good probability k / N is unchanged; bad elements keep 1 / N.
    """
    size = 1 << config.n
    amps = np.full(size, 1.0 / math.sqrt(size))
    if config.ratio:
        goods = np.asarray(config.goods, dtype=np.int64)
        if len(config.ratio) != goods.size:
            raise ConfigError("ratio/count mismatch")
        total = goods.size / size
        amps[goods] = np.sqrt(np.asarray(config.ratio) * total)
    return sv.from_amplitudes(amps)


# -- statistics ------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    p0: float
    p25: float
    p50: float
    p75: float
    p100: float
    outliers: tuple[float, ...] = ()

    @property
    def iqr(self) -> float:
        return self.p75 - self.p25


def percentiles(values: Iterable[float]) -> SummaryStats:
    """Box-plot percentiles (linear interpolation) and 1.5 IQR outliers."""
    data = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise ValueError("percentiles of an empty list")
    p0, p25, p50, p75, p100 = (float(x) for x in np.percentile(data, [0, 25, 50, 75, 100], method="linear"))
    spread = 1.5 * (p75 - p25)
    lo, hi = p25 - spread, p75 + spread
    outliers = tuple(float(x) for x in data if x < lo or x > hi)
    return SummaryStats(p0, p25, p50, p75, p100, outliers)


# -- suites ----------------------------------------------------------------------

@dataclass
class SuiteResult:
    config: ExperimentConfig
    records: list[VqsRun]
    stats: dict[str, SummaryStats]


def run_one(config: ExperimentConfig, seed: int, psi0: StateVector | None = None) -> VqsRun:
    psi0 = psi0 if psi0 is not None else build_initial_state(config)
    return run_vqs(psi0, config.oracle, config.ansatz_spec, config.adam, config.termination,
                   seed=seed, method=config.method)


def _task(args) -> VqsRun:
    config, seed = args
    return run_one(config, seed)


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("VQS_THREADS")
    workers = requested or os.cpu_count() or 1
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def metric_table(records: Sequence[VqsRun], goods: Sequence[int]) -> dict[str, list[float]]:
    table = {
        "final_good_probability": [r.final_good_probability for r in records],
        "iterations_used": [float(r.iterations_used) for r in records],
        "objective_gap": [r.objective_gap for r in records],
    }
    if len(goods) > 1:
        for j, g in enumerate(goods):
            table[f"good_probability_{g}"] = [float(r.per_good_probabilities[j]) for r in records]
    return table


def summarize(records: Sequence[VqsRun], goods: Sequence[int]) -> dict[str, SummaryStats]:
    return {k: percentiles(v) for k, v in metric_table(records, goods).items()}


def run_suite(config: ExperimentConfig, workers: int | None = None) -> SuiteResult:
    """Runs with seeds ``seed_base .. seed_base + runs - 1``; records sorted by seed."""
    config.check_size(suite=True)
    seeds = [config.seed_base + i for i in range(config.runs)]
    nworkers = min(worker_count(workers), len(seeds))
    log.info("suite n=%d %s x%d: %d runs on %d workers",
             config.n, config.ansatz.value, config.layers, config.runs, nworkers)
    if nworkers == 1:
        psi0 = build_initial_state(config)
        records = [run_one(config, s, psi0) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            records = list(pool.map(_task, [(config, s) for s in seeds]))
    records.sort(key=lambda r: r.seed)
    return SuiteResult(config, records, summarize(records, config.goods))


# -- persistence -----------------------------------------------------------------

def record_to_json(run: VqsRun) -> dict:
    return {
        "seed": run.seed,
        "iterations": run.iterations_used,
        "termination_reason": run.termination_reason.value,
        "objective_trace": [float(f) for f in run.objective_trace],
        "final_good_probability": run.final_good_probability,
        "per_good_probabilities": [float(p) for p in run.per_good_probabilities],
        "analytic_minimum": run.analytic_minimum,
    }


def record_from_json(obj: dict) -> VqsRun:
    from .vqs import TerminationReason

    return VqsRun(
        seed=obj["seed"],
        objective_trace=np.asarray(obj["objective_trace"], dtype=np.float64),
        final_theta=np.zeros(0),
        iterations_used=obj["iterations"],
        final_good_probability=obj["final_good_probability"],
        termination_reason=TerminationReason(obj["termination_reason"]),
        per_good_probabilities=np.asarray(obj["per_good_probabilities"], dtype=np.float64),
        analytic_minimum=obj["analytic_minimum"],
    )


def records_jsonl(records: Sequence[VqsRun]) -> str:
    return "".join(json.dumps(record_to_json(r), separators=(",", ":")) + "\n" for r in records)


def read_records(path: str | os.PathLike) -> list[VqsRun]:
    with open(path) as fh:
        return [record_from_json(json.loads(line)) for line in fh if line.strip()]


def summary_csv(stats: dict[str, SummaryStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for name, s in stats.items():
        w.writerow([name, repr(s.p0), repr(s.p25), repr(s.p50), repr(s.p75), repr(s.p100), len(s.outliers)])
    return buf.getvalue()


def write_suite(result: SuiteResult, out_dir: str | os.PathLike) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rec_path = out / RECORDS_FILE
    sum_path = out / SUMMARY_FILE
    rec_path.write_text(records_jsonl(result.records))
    sum_path.write_text(summary_csv(result.stats))
    return rec_path, sum_path


# -- verification ----------------------------------------------------------------

def _random_state(rng: np.random.Generator, n: int) -> StateVector:
    amps = rng.normal(size=1 << n)
    return sv.from_amplitudes(amps / np.linalg.norm(amps))


def _check_mcx(rng) -> str | None:
    from .circuit import decompose_mcx, simulate

    for n in range(2, 6):
        circ = decompose_mcx(n)
        for x in range(1 << (n + 1)):
            got = simulate(circ, sv.new_basis(circ.num_qubits, x))
            want = sv.new_basis(circ.num_qubits, x)
            sv.apply_mcx(want, range(n), n)
            if not np.array_equal(got.amplitudes, want.amplitudes):
                return f"n={n} basis {x}"
    return None


def _check_oracle(rng) -> str | None:
    from .circuit import apply_oracle_semantic, build_oracle, simulate

    for n in range(2, 5):
        goods = rng.choice(1 << n, size=rng.integers(1, 1 << n), replace=False)
        spec = OracleSpec(n, goods.tolist())
        for _ in range(5):
            psi0 = _random_state(rng, n)
            want = sv.StateVector(n + 1, np.concatenate([psi0.amplitudes, np.zeros(1 << n)]))
            got = simulate(build_oracle(spec), want.copy())
            apply_oracle_semantic(want, spec)
            if np.max(np.abs(got.amplitudes - want.amplitudes)) > 1e-12:
                return f"n={n} goods={spec.good_indices}"
    return None


def _random_problem(rng, n: int, family: Family = Family.TYPE1, layers: int = 2):
    from .vqs import prepare_psi1

    goods = rng.choice(1 << n, size=rng.integers(1, 1 << (n - 1)), replace=False)
    oracle = OracleSpec(n, goods.tolist())
    ansatz = AnsatzSpec(family, layers, n + 1)
    psi1 = prepare_psi1(_random_state(rng, n), oracle)
    theta = rng.uniform(0, 2 * math.pi, ansatz.num_params)
    return oracle, ansatz, psi1, theta


def _check_expectations(rng) -> str | None:
    from .vqs import expectation_z1, expectation_z2, objective

    for n in (2, 4):
        for _ in range(5):
            _, ansatz, psi1, theta = _random_problem(rng, n)
            z1 = expectation_z1(theta, psi1, ansatz)
            z2 = expectation_z2(theta, psi1, ansatz)
            h1 = expectation_z1(theta, psi1, ansatz, Method.HADAMARD_TEST)
            h2 = expectation_z2(theta, psi1, ansatz, Method.HADAMARD_TEST)
            f = objective(theta, psi1, ansatz)
            if max(abs(z1 - h1), abs(z2 - h2), abs(f + 0.5 * (z1 - z2))) > 1e-10:
                return f"n={n}: z1 {z1} vs {h1}, z2 {z2} vs {h2}"
    return None


def _check_gradient(rng) -> str | None:
    from .vqs import gradient, objective, value_and_grad

    h = 1e-5
    for n in (2, 4):
        for family in Family:
            _, ansatz, psi1, theta = _random_problem(rng, n, family)
            shift = gradient(theta, psi1, ansatz)
            _, adj = value_and_grad(theta, psi1, ansatz)
            fd = np.empty_like(theta)
            for j in range(theta.size):
                e = np.zeros_like(theta)
                e[j] = h
                fd[j] = (objective(theta + e, psi1, ansatz) - objective(theta - e, psi1, ansatz)) / (2 * h)
            if np.max(np.abs(shift - fd)) > 1e-6 or np.max(np.abs(adj - shift)) > 1e-10:
                return f"n={n} {family.value}: max |shift-fd| {np.max(np.abs(shift - fd)):.3g}"
    return None


def _check_bound(rng) -> str | None:
    from .vqs import analytic_minimum, objective, prepare_psi1

    for n in (2, 3, 5):
        oracle = OracleSpec(n, [(1 << n) - 1])
        psi0 = sv.uniform(n)
        f_min, _ = analytic_minimum(psi0, oracle)
        if abs(f_min + math.sqrt(1 / (1 << n))) > 1e-12:
            return f"n={n}: analytic minimum {f_min}"
        ansatz = AnsatzSpec(Family.TYPE1, 3, n + 1)
        psi1 = prepare_psi1(psi0, oracle)
        for _ in range(20):
            theta = rng.uniform(0, 2 * math.pi, ansatz.num_params)
            if objective(theta, psi1, ansatz) < f_min - 1e-10:
                return f"n={n}: objective below the analytic minimum"
    return None


def _check_grover(rng) -> str | None:
    from .grover import closed_form_probability, full_vector_recurrence, amplitude_trajectory, simulate_grover

    for n in (2, 4, 6):
        for k in (1, 2, 3):
            if k >= 1 << n:
                continue
            goods = list(range(k))
            for t in (0, 1, 3, 7):
                p = sv.probability_over(simulate_grover(n, goods, t), goods)
                if abs(p - closed_form_probability(n, k, t)) > 1e-10:
                    return f"closed form n={n} k={k} t={t}"
            full = full_vector_recurrence(n, goods, 10)
            good, bad = amplitude_trajectory(n, k, 10)[-1]
            if abs(full[0] - good) > 1e-12 or abs(full[-1] - bad) > 1e-12:
                return f"recurrence n={n} k={k}"
    return None


def _check_depths(rng) -> str | None:
    from .circuit import DepthKind, build_fig1c, decompose_mcx, formula_depth, structural_depth
    from .circuit import build_type1_ansatz

    for n in (2, 8, 14, 20, 26):
        want = {"fig1a": 8 * n + 3, "fig1b": 8 * n + 4, "fig1c": 5 * n + 2,
                "controlled_ansatz": 6 * n + 3}
        for kind, value in want.items():
            if formula_depth(kind, n) != value:
                return f"formula {kind} n={n}: {formula_depth(kind, n)} != {value}"
        if structural_depth(decompose_mcx(n)) != 2 * n - 1:
            return f"decompose_mcx n={n}"
        for layers in (1, 3):
            spec = AnsatzSpec(Family.TYPE1, layers, n + 1)
            if structural_depth(build_type1_ansatz(spec)) != layers * (n + 1):
                return f"type-I structural n={n} layers={layers}"
    c = build_fig1c(OracleSpec(26, [(1 << 26) - 1]), AnsatzSpec(Family.TYPE2, 1, 27), decomposed=True)
    if structural_depth(c) != 56 or formula_depth(DepthKind.FIG1C, 26, AnsatzSpec(Family.TYPE2, 1, 27)) != 56:
        return "oracle + one type-II layer at n=26"
    return None


VERIFY_CHECKS = (
    ("mcx decomposition", _check_mcx),
    ("oracle equivalence", _check_oracle),
    ("hadamard test expectations", _check_expectations),
    ("gradients", _check_gradient),
    ("analytic minimum bound", _check_bound),
    ("grover closed form", _check_grover),
    ("depth formulas", _check_depths),
)


def verification_suite(seed: int = 0) -> list[tuple[str, str | None]]:
    """Run the cross-check invariants; returns (name, failure detail or None)."""
    rng = np.random.default_rng(seed)
    results = []
    for name, check in VERIFY_CHECKS:
        try:
            results.append((name, check(rng)))
        except Exception as exc:  # a crash is a failure, not an abort
            results.append((name, f"{type(exc).__name__}: {exc}"))
    return results


# -- command line ----------------------------------------------------------------

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--n", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--ansatz", choices=[f.value for f in Family])
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="seed (run) or seed_base (suite)")
    p.add_argument("--good", help="comma-separated good indices")
    p.add_argument("--good-count", type=int, help="use the last K indices as goods")
    p.add_argument("--ratio", help="comma-separated probability ratio over the goods")
    p.add_argument("--lr", type=float)
    p.add_argument("--method", choices=[m.value for m in Method])
    p.add_argument("--allow-large", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqsearch", description="Variational quantum search on a statevector simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one training run; prints the objective trace")
    _experiment_flags(p)

    p = sub.add_parser("suite", help="seeded multi-run experiment; writes records and summary")
    _experiment_flags(p)
    p.add_argument("--out", default="vqs_out", help="output directory (default: vqs_out)")
    p.add_argument("--workers", type=int, help="worker processes (VQS_THREADS caps this)")

    p = sub.add_parser("grover-table", help="Grover vs VQS depth table as CSV")
    p.add_argument("--out", help="also write grover_table.csv into this directory")

    p = sub.add_parser("depth", help="formula and structural depth of a named circuit")
    p.add_argument("circuit", choices=[k.value for k in DepthKind])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--ansatz", choices=[f.value for f in Family], default=Family.TYPE1.value)
    p.add_argument("--decomposed", action="store_true", help="expand multi-controlled gates into Toffolis")
    p.add_argument("--dump", action="store_true", help="print the gate list")

    p = sub.add_parser("verify", help="run the cross-check invariants")
    p.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    base = load_config(args.config) if args.config else None
    flags = {
        "n": args.n, "layers": args.layers, "ansatz": args.ansatz, "runs": args.runs,
        "seed_base": args.seed, "good_indices": args.good, "good_count": args.good_count,
        "ratio": args.ratio, "lr": args.lr, "method": args.method, "allow_large": args.allow_large,
    }
    return config_from_mapping({k: v for k, v in flags.items() if v is not None}, base)


def _print_size(config: ExperimentConfig) -> None:
    if config.allow_large:
        print(f"# memory estimate for n={config.n}: {memory_estimate(config.n) / 2**30:.2f} GiB per run")


def _cmd_run(args) -> int:
    config = config_from_args(args)
    config.check_size(suite=False)
    _print_size(config)
    run = run_one(config, config.seed_base)
    print("iteration,objective")
    for i, f in enumerate(run.objective_trace, 1):
        print(f"{i},{float(f)!r}")
    print(f"# seed={run.seed} iterations={run.iterations_used} reason={run.termination_reason.value}")
    print(f"# final_good_probability={run.final_good_probability!r} "
          f"analytic_minimum={run.analytic_minimum!r} gap={run.objective_gap!r}")
    if len(config.goods) > 1:
        per = " ".join(f"{g}:{p!r}" for g, p in zip(config.goods, run.per_good_probabilities))
        print(f"# per_good {per}")
    return EXIT_OK


def _cmd_suite(args) -> int:
    config = config_from_args(args)
    config.check_size(suite=True)
    _print_size(config)
    result = run_suite(config, args.workers)
    rec, summ = write_suite(result, args.out)
    sys.stdout.write(summary_csv(result.stats))
    print(f"# wrote {rec} and {summ}")
    return EXIT_OK


def _cmd_grover_table(args) -> int:
    from .grover import table_s1_report

    text = table_s1_report()
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "grover_table.csv").write_text(text)
    return EXIT_OK


def named_circuit(name: str, n: int, spec: AnsatzSpec, decomposed: bool = False):
    """The circuit behind a depth kind, with its formula depth."""
    from .circuit import (build_ansatz, build_controlled_ansatz, build_fig1a, build_fig1b,
                          build_fig1c, build_oracle, formula_depth)
    from .grover import diffusion_circuit, iteration_depth

    kind = DepthKind(name)
    oracle = OracleSpec(n, [(1 << n) - 1])
    layer = lambda fam: AnsatzSpec(fam, 1, n + 1)  # noqa: E731
    builders = {
        DepthKind.TYPE1_LAYER: lambda: build_ansatz(layer(Family.TYPE1)),
        DepthKind.TYPE2_LAYER: lambda: build_ansatz(layer(Family.TYPE2)),
        DepthKind.CONTROLLED_TYPE1_LAYER: lambda: build_controlled_ansatz(layer(Family.TYPE1)),
        DepthKind.ANSATZ: lambda: build_ansatz(spec),
        DepthKind.CONTROLLED_ANSATZ: lambda: build_controlled_ansatz(spec),
        DepthKind.ORACLE: lambda: build_oracle(oracle, decomposed),
        DepthKind.FIG1A: lambda: build_fig1a(oracle, spec, decomposed),
        DepthKind.FIG1B: lambda: build_fig1b(oracle, spec, decomposed),
        DepthKind.FIG1C: lambda: build_fig1c(oracle, spec, decomposed),
        DepthKind.GROVER_ITERATION: lambda: diffusion_circuit(
            n, tuple(range(n, 2 * n - 2)) if decomposed else ()),
    }
    circuit = builders[kind]()
    if kind is DepthKind.GROVER_ITERATION:
        return circuit, iteration_depth(n)
    return circuit, formula_depth(kind, n, spec)


def _cmd_depth(args) -> int:
    from .circuit import dump, structural_depth

    try:
        spec = AnsatzSpec(Family(args.ansatz), args.layers, args.n + 1)
        circuit, formula = named_circuit(args.circuit, args.n, spec, args.decomposed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.dump:
        sys.stdout.write(dump(circuit, formula))
    else:
        print(f"circuit={args.circuit} n={args.n} qubits={circuit.num_qubits} "
              f"structural={structural_depth(circuit)} formula={formula}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    failed = 0
    for name, problem in verification_suite(args.seed):
        if problem is None:
            print(f"PASS {name}")
        else:
            failed += 1
            print(f"FAIL {name}: {problem}")
    return EXIT_VERIFY if failed else EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "suite": _cmd_suite,
    "grover-table": _cmd_grover_table,
    "depth": _cmd_depth,
    "verify": _cmd_verify,
}


def cli_main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
