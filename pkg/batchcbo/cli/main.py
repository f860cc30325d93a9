import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from batchcbo.core.batching import estimate_p_m0, require_connectivity, search_m0
from batchcbo.core.dynamics import RecordOptions, best_particle, run, save_series, step_params
from batchcbo.core.ensemble import RngStream
from batchcbo.diagnostics.ergodicity import matrix_property_suite, verify_trajectory
from batchcbo.diagnostics.rates import theoretical_rates
from batchcbo.harness.benchmark import benchmark, default_jobs
from batchcbo.harness.decay import estimate_decay
from batchcbo.utils import (
    CBOError,
    Color,
    ConfigurationError,
    DecayMode,
    DivergenceError,
    EstimationError,
    ResourceLimitError,
    ensure_dir,
    get_log,
    write_csv,
    write_json,
)
from batchcbo.utils.config import ExperimentConfig, load_config

LOG = get_log("CLI")

DEFAULT_OUT = "out"
PROPERTY_SUITE_STREAM = 1 << 32  # 随机矩阵性质检查使用的命名空间, 与运行流不重叠


def _document(config: ExperimentConfig, **payload) -> Dict[str, Any]:
    """每个 JSON 输出都带完整配置与种子"""
    return {**config.metadata(), "config": config.resolved(), **payload}


def _write_timing(out: Path, **timing):
    # 墙钟时间单独存放, 数据文件只依赖 (配置, 种子)
    write_json(out / "timing.json", timing)


def cmd_optimize(config: ExperimentConfig, out: Path, args) -> int:
    run_config = config.run_config()
    objective = run_config.objective
    started = time.perf_counter()
    status = 0
    try:
        result = run(run_config)
    except DivergenceError as e:
        LOG.error(str(e))
        result = e.partial
        status = 1
    elapsed = time.perf_counter() - started

    meta = config.metadata()
    result.final.save_csv(out / "final_ensemble.csv", meta)
    save_series(result, out / "series.csv", meta)
    if result.schedule is not None:
        result.schedule.save(out / "schedule.txt", meta)
    for snapshot in result.snapshots:
        snapshot.save_csv(out / "snapshots" / f"step_{snapshot.step}.csv", meta)
    index, point, value = best_particle(result.final, objective)
    summary = {
        "termination": result.reason,
        "steps": result.steps,
        "best_index": index,
        "best_point": point,
        "best_value": value,
        "initial_best_value": float(objective.evaluate_many(result.initial.states).min()),
        "evaluations": result.evaluations,
        "gamma": result.gamma,
        "noise": result.noise.describe(),
        "rule": run_config.rule.describe(),
        "objective": objective.describe(),
    }
    write_json(out / "summary.json", _document(config, **summary))
    _write_timing(out, wall_time=elapsed)
    print(
        f"终止原因: {result.reason.value} | 步数: {result.steps} | "
        f"最优值: {value:.6g} | 最优粒子: {index}"
    )
    return status


def _table_rows(table, matrix: np.ndarray) -> List[list]:
    return [[d, *row] for d, row in zip(table.dimensions, matrix.tolist())]


def cmd_benchmark(config: ExperimentConfig, out: Path, args) -> int:
    bench = config.benchmark_config()
    jobs = args.jobs or default_jobs()
    started = time.perf_counter()
    table = benchmark(bench, jobs=jobs, progress=not args.quiet)
    elapsed = time.perf_counter() - started

    meta = config.metadata()
    header = ["dimension", *(f"P={P}" for P in table.batch_sizes)]
    write_csv(out / "success_rates.csv", header, _table_rows(table, table.rate_matrix()), meta)
    write_csv(out / "mean_steps.csv", header, _table_rows(table, table.steps_matrix()), meta)
    write_json(out / "benchmark.json", _document(config, **table.to_dict()))
    _write_timing(out, wall_time=elapsed, jobs=jobs, **table.timing())

    print(Color.paint("成功率", Color.BOLD))
    print("\t".join(header))
    for row in _table_rows(table, table.rate_matrix()):
        print("\t".join([str(row[0])] + [f"{v:.3f}" for v in row[1:]]))
    if not table.complete:
        LOG.error("部分运行出错, 详见 benchmark.json 中各单元的 errors")
        return 1
    return 0


def cmd_diagnostics(config: ExperimentConfig, out: Path, args) -> int:
    diag = config["diagnostics"]
    try:
        decay_mode = DecayMode(diag["decay_mode"])
    except ValueError:
        raise ConfigurationError(f"未知衰减模式: {diag['decay_mode']}", line=config.lines.get("diagnostics.decay_mode"))
    record = RecordOptions(
        diameters=True, best_objective=True, displacement=True, transitions=True, schedule=True
    )
    try:
        base = config.run_config(record=record)
    except ResourceLimitError as e:
        raise ConfigurationError(str(e), key="record.transitions")

    N, P = base.n_particles, base.batch_size
    search = search_m0(N, P)
    m = diag["window"] or search.m0
    started = time.perf_counter()

    results, summaries, failures = [], [], []
    for r in range(diag["replicates"]):
        try:
            result = run(base.replace(stream_id=r))
        except DivergenceError as e:
            failures.append(f"replicate {r}: {e}")
            continue
        results.append(result)
        summaries.append(verify_trajectory(result, m, diag["tolerance"]))
    if results and results[0].schedule is not None:
        results[0].schedule.save(out / "schedule.txt", config.metadata())

    decay = []
    for l in range(base.dimension if results else 0):
        try:
            decay.append(estimate_decay(results, l, decay_mode, m0=search.m0).to_dict())
        except EstimationError as e:
            decay.append({"coordinate": l, "error": str(e)})

    properties = None
    if diag["property_cases"] > 0:
        rng = RngStream(config.seed, 0, (PROPERTY_SUITE_STREAM,)).generator()
        properties = matrix_property_suite(rng, diag["property_cases"], diag["property_max_size"], diag["tolerance"])
    elapsed = time.perf_counter() - started

    total = sum(s.total for s in summaries)
    passed = sum(s.passed for s in summaries)
    h_low = min((s.h_range[0] for s in summaries), default=0.0)
    h_high = max((s.h_range[1] for s in summaries), default=0.0)
    write_json(
        out / "bounds.json",
        _document(
            config,
            window_length=m,
            m0=search.m0,
            m0_minimal=search.minimal,
            total=total,
            passed=passed,
            h_range=[h_low, h_high],
            failures=failures,
            replicates=[s.to_dict() for s in summaries],
        ),
    )
    write_json(out / "decay.json", _document(config, reports=decay))
    if properties is not None:
        write_json(out / "properties.json", _document(config, **properties.to_dict()))
    _write_timing(out, wall_time=elapsed)

    ok = not failures and passed == total and (properties is None or properties.all_passed)
    print(f"窗口检查: {passed}/{total} 通过 | ℋ ∈ [{h_low:.3g}, {h_high:.3g}] | {Color.verdict(ok)}")
    if properties is not None:
        bad = sum(properties.violations.values())
        print(f"矩阵性质: {properties.cases} 组, {bad} 次违反")
    return 0 if ok else 1


def cmd_partition_stats(config: ExperimentConfig, out: Path, args) -> int:
    stats = config["partition_stats"]
    N, P = config["run"]["n_particles"], config.batch_size
    require_connectivity(N, P)
    if stats["m0"] is None:
        search = search_m0(N, P)
        m0, minimal = search.m0, search.minimal
    else:
        m0, minimal = stats["m0"], None
    rng = RngStream(config.seed).generator()
    estimate = estimate_p_m0(N, P, m0, stats["replicates"], rng, exact=stats["exact"], progress=not args.quiet)
    gamma, noise = step_params(config.scheme())
    rates = theoretical_rates(gamma, N, m0, noise.effective_zeta, estimate.value)

    write_json(
        out / "partition_stats.json",
        _document(config, m0=m0, m0_minimal=minimal, p_m0=estimate, rates=rates),
    )
    print(
        f"N={N}, P={P}: m0={m0} | p_m0={estimate.value:.6g}"
        + ("" if estimate.exact else f" ± {estimate.stderr:.2g}")
        + f" | Λ={rates.lambda2_sup:.6g} | 小噪声条件 {Color.verdict(rates.condition_holds)}"
        + f" | 临界 ζ={rates.critical_zeta:.6g}"
    )
    return 0


COMMANDS = {
    "optimize": cmd_optimize,
    "benchmark": cmd_benchmark,
    "diagnostics": cmd_diagnostics,
    "partition-stats": cmd_partition_stats,
}

_REPLICATE_KEYS = {
    "benchmark": ("benchmark", "replicates"),
    "diagnostics": ("diagnostics", "replicates"),
    "partition-stats": ("partition_stats", "replicates"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="batchcbo", description="batchcbo 实验 CLI 参数表")
    parser.add_argument("command", choices=sorted(COMMANDS), help="子命令")
    parser.add_argument("--config", type=str, default=None, help="YAML 配置文件, 缺省使用全部默认值")
    parser.add_argument("--out", type=str, default=DEFAULT_OUT, help="输出目录")
    parser.add_argument("--seed", type=int, default=None, help="覆盖配置中的基础种子")
    parser.add_argument("--jobs", type=int, default=None, help="并行进程数, 缺省为物理核数")
    parser.add_argument("--replicates", type=int, default=None, help="覆盖配置中的重复次数")
    parser.add_argument("--quiet", action="store_true", help="不显示进度条")
    parser.add_argument("--no-color", action="store_true", help="关闭终端颜色")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.no_color:
        Color.disable()
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            config.set("run", "seed", args.seed)
        if args.replicates is not None and args.command in _REPLICATE_KEYS:
            config.set(*_REPLICATE_KEYS[args.command], args.replicates)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigurationError(f"--jobs 必须 ≥ 1, 收到 {args.jobs}")
        out = ensure_dir(args.out)
        LOG.info(f"{args.command}: {config} -> {out.resolve()}")
        return COMMANDS[args.command](config, out, args)
    except ConfigurationError as e:
        LOG.error(str(e))
        return 2
    except CBOError as e:
        LOG.error(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
