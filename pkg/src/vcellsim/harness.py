"""Monte Carlo sweep driver: realizations x virtual-cell counts x
interference distances, aggregated into CSV rows.

Realizations are independent work units; with several workers each one is
computed in its own process and the results are placed into arrays indexed
by realization before reduction, so worker count never changes the output
bytes.
"""

from __future__ import annotations

import concurrent.futures
import configparser
import dataclasses
from dataclasses import dataclass

import numpy as np

from . import clustering, evaluator, freqalloc, intergraph, powalloc
from .scenario import ScenarioConfig, _parse_scenario_sections, generate_realization

CSV_COLUMNS = (
    "m", "gamma_d", "cgbr",
    "mean_unsatisfied", "stderr_unsatisfied",
    "mean_sum_rate", "stderr_sum_rate", "n",
)


class SweepError(RuntimeError):
    """A pipeline stage failed; carries (realization, m, gamma_d) context."""


@dataclass(frozen=True)
class SweepConfig:
    """Everything run_sweep needs; see configs/ for the file form."""

    scenario: ScenarioConfig
    m_values: tuple[int, ...]
    gamma_d_values: tuple[float, ...]
    cgbr_values: tuple[float, ...]
    num_realizations: int
    output_path: str
    workers: int = 1
    affiliation_rule: str = "max_abs"
    size_schedule: clustering.SizeSchedule | None = None
    literal_denominator: bool = False
    power_tol: float = powalloc.DEFAULT_TOL
    power_max_iters: int = powalloc.DEFAULT_MAX_ITERS

    def __post_init__(self):
        if not self.m_values or not self.gamma_d_values or not self.cgbr_values:
            raise ValueError("m, gamma_d and cgbr lists must be non-empty")
        for m in self.m_values:
            if not 1 <= m <= self.scenario.num_bs:
                raise ValueError(f"m={m} outside 1..{self.scenario.num_bs}")
        if self.num_realizations < 1:
            raise ValueError("num_realizations must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def schedule(self) -> clustering.SizeSchedule:
        if self.size_schedule is not None:
            return self.size_schedule
        return clustering.SizeSchedule.binary_tree(self.scenario.num_bs)


@dataclass(frozen=True)
class AggregateRow:
    """One sweep grid point, averaged over realizations."""

    m: int
    gamma_d: float
    cgbr: float
    mean_unsatisfied: float
    stderr_unsatisfied: float
    mean_sum_rate: float
    stderr_sum_rate: float
    num_realizations: int


def evaluate_realization(config: SweepConfig, realization_index: int):
    """Run the full pipeline for one realization.

    Returns (unsatisfied[m, gamma, cgbr], sum_rate[m, gamma]). The channel
    and the BS hierarchy are computed once; rates are computed once per
    (m, gamma_d) and re-thresholded for every cgbr value.
    """
    sc = config.scenario
    real = generate_realization(sc, realization_index)
    schedule = config.schedule()
    n_m, n_g, n_c = len(config.m_values), len(config.gamma_d_values), len(config.cgbr_values)
    unsat = np.zeros((n_m, n_g, n_c), dtype=np.int64)
    sum_rate = np.zeros((n_m, n_g))

    try:
        hierarchy = clustering.build_hierarchy(real.bs_positions, schedule)
    except Exception as exc:
        raise SweepError(f"realization={realization_index}: {exc}") from exc
    for im, m in enumerate(config.m_values):
        partition = clustering.affiliate_users(
            real, hierarchy, m, rule=config.affiliation_rule
        )
        counts = partition.user_counts(sc.num_bs)
        for ig, gamma_d in enumerate(config.gamma_d_values):
            try:
                graph = intergraph.build_interference_graph(
                    real.bs_positions, partition, counts, gamma_d
                )
                coloring = intergraph.color_graph(graph)
                plan = freqalloc.build_frequency_plan(
                    real, partition, coloring, counts, gamma_d,
                    literal_denominator=config.literal_denominator,
                )
                allocation = powalloc.solve_all_cells(
                    real, partition, plan,
                    user_budget=sc.budget_linear,
                    band_width=sc.band_width,
                    tol=config.power_tol,
                    max_iters=config.power_max_iters,
                )
                report = evaluator.evaluate_system(
                    real, partition, plan, allocation,
                    r_gbr=config.cgbr_values[0],
                    band_width=sc.band_width,
                )
            except Exception as exc:
                raise SweepError(
                    f"realization={realization_index} m={m} gamma_d={gamma_d}: {exc}"
                ) from exc
            sum_rate[im, ig] = report.sum_rate
            for ic, cgbr in enumerate(config.cgbr_values):
                unsat[im, ig, ic] = int((report.rate_per_user < cgbr).sum())
    return unsat, sum_rate


def _worker(args):
    config, index = args
    return index, evaluate_realization(config, index)


def run_sweep(config: SweepConfig) -> list[AggregateRow]:
    """Aggregate evaluate_realization over all realizations.

    Deterministic for a given config: per-realization results land in
    arrays indexed by realization and are reduced in that fixed order.
    """
    n_r = config.num_realizations
    n_m, n_g, n_c = len(config.m_values), len(config.gamma_d_values), len(config.cgbr_values)
    unsat = np.zeros((n_r, n_m, n_g, n_c))
    sum_rate = np.zeros((n_r, n_m, n_g))

    if config.workers == 1:
        for r in range(n_r):
            unsat[r], sum_rate[r] = evaluate_realization(config, r)
    else:
        jobs = [(config, r) for r in range(n_r)]
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            for index, (u, s) in pool.map(_worker, jobs):
                unsat[index] = u
                sum_rate[index] = s

    rows = []
    for im, m in enumerate(config.m_values):
        for ig, gamma_d in enumerate(config.gamma_d_values):
            sr = sum_rate[:, im, ig]
            for ic, cgbr in enumerate(config.cgbr_values):
                us = unsat[:, im, ig, ic]
                rows.append(AggregateRow(
                    m=int(m),
                    gamma_d=float(gamma_d),
                    cgbr=float(cgbr),
                    mean_unsatisfied=float(us.mean()),
                    stderr_unsatisfied=_stderr(us),
                    mean_sum_rate=float(sr.mean()),
                    stderr_sum_rate=_stderr(sr),
                    num_realizations=n_r,
                ))
    return rows


def _stderr(values: np.ndarray) -> float:
    # Unbiased sample variance; a single sample has stderr 0 by convention.
    n = values.shape[0]
    if n < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(n))


def emit_csv(rows, path, seed=None) -> None:
    """Write aggregate rows: a seed comment, a header, one line per row.

    Numbers use repr (shortest round-trip decimal), so re-reading the file
    recovers the in-memory values exactly.
    """
    try:
        with open(path, "w") as fh:
            if seed is not None:
                fh.write(f"# seed={seed}\n")
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in rows:
                fh.write(
                    f"{r.m},{r.gamma_d!r},{r.cgbr!r},"
                    f"{r.mean_unsatisfied!r},{r.stderr_unsatisfied!r},"
                    f"{r.mean_sum_rate!r},{r.stderr_sum_rate!r},{r.num_realizations}\n"
                )
    except OSError as exc:
        raise SweepError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path):
    """Inverse of emit_csv. Returns (rows, seed or None)."""
    rows = []
    seed = None
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            if "seed=" in ln:
                seed = int(ln.split("seed=")[1])
            continue
        if ln:
            body.append(ln)
    if not body or body[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"unrecognized CSV header in {path}")
    for ln in body[1:]:
        f = ln.split(",")
        rows.append(AggregateRow(
            m=int(f[0]), gamma_d=float(f[1]), cgbr=float(f[2]),
            mean_unsatisfied=float(f[3]), stderr_unsatisfied=float(f[4]),
            mean_sum_rate=float(f[5]), stderr_sum_rate=float(f[6]),
            num_realizations=int(f[7]),
        ))
    return rows, seed


def _parse_list(text, cast):
    return tuple(cast(tok.strip()) for tok in str(text).split(",") if tok.strip())


def load_sweep_config(path) -> SweepConfig:
    """Read scenario + sweep sections from one INI file (see configs/)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise ValueError(f"cannot read config file: {path}")
    scenario = _parse_scenario_sections(parser)
    if "sweep" not in parser:
        raise ValueError("config file needs a [sweep] section")
    sw = parser["sweep"]
    schedule = None
    if sw.get("size_schedule"):
        schedule = clustering.SizeSchedule(
            max_size=_parse_list(sw.get("size_schedule"), int)
        )
    return SweepConfig(
        scenario=scenario,
        m_values=_parse_list(sw.get("m_values"), int),
        gamma_d_values=_parse_list(sw.get("gamma_d_values"), float),
        cgbr_values=_parse_list(sw.get("cgbr_values"), float),
        num_realizations=sw.getint("num_realizations"),
        output_path=sw.get("output_path", "sweep.csv"),
        workers=sw.getint("workers", 1),
        affiliation_rule=sw.get("affiliation_rule", "max_abs"),
        size_schedule=schedule,
        literal_denominator=sw.getboolean("paper_literal_denominator", False),
        power_tol=sw.getfloat("power_tol", powalloc.DEFAULT_TOL),
        power_max_iters=sw.getint("power_max_iters", powalloc.DEFAULT_MAX_ITERS),
    )


def override(config: SweepConfig, **kwargs) -> SweepConfig:
    """Return a copy with selected fields replaced (CLI overrides)."""
    scenario_kwargs = {}
    if "seed" in kwargs:
        scenario_kwargs["seed"] = kwargs.pop("seed")
    if scenario_kwargs:
        kwargs["scenario"] = dataclasses.replace(config.scenario, **scenario_kwargs)
    return dataclasses.replace(config, **kwargs)
