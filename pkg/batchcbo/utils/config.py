# 配置文件
#
# 一个 YAML 文件描述一次实验. 解析时保留每个键所在的行号,
# 报错信息可以直接定位到出错的那一行.

import copy
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from batchcbo.utils.assets import (
    BOUND_TOLERANCE,
    DEFAULT_BASE_SEED,
    DEFAULT_BATCH_SIZES,
    DEFAULT_BETA,
    DEFAULT_BOX,
    DEFAULT_DIMENSIONS,
    DEFAULT_GAMMA,
    DEFAULT_MAX_STEPS,
    DEFAULT_N_PARTICLES,
    DEFAULT_RASTRIGIN_OFFSET,
    DEFAULT_RASTRIGIN_SHIFT,
    DEFAULT_REPLICATES,
    DEFAULT_SUCCESS_THRESHOLD,
    DEFAULT_TOLERANCE,
    DEFAULT_ZETA,
    NOISE_ASSUMPTION,
    ConfigurationError,
    DecayMode,
)
from batchcbo.utils.logger import get_log

_log = get_log("Config")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _as_float(value, where: str) -> float:
    # PyYAML 按 YAML 1.1 把 1e-3 (没有小数点) 解析成字符串
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    if _is_int(value) or isinstance(value, float):
        return float(value)
    raise ConfigurationError(f"需要实数, 收到 {value!r}", key=where)


def _coerce(kind: str, value, where: str):
    """按类型标记校验并转换一个配置值; 以 ? 结尾的类型允许 null"""
    if kind.endswith("?"):
        if value is None:
            return None
        kind = kind[:-1]
    if kind == "int":
        if not _is_int(value):
            raise ConfigurationError(f"需要整数, 收到 {value!r}", key=where)
        return value
    if kind == "float":
        return _as_float(value, where)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigurationError(f"需要 true/false, 收到 {value!r}", key=where)
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigurationError(f"需要字符串, 收到 {value!r}", key=where)
        return value
    if kind == "ints":
        if not isinstance(value, list) or not value or not all(_is_int(v) for v in value):
            raise ConfigurationError(f"需要非空整数列表, 收到 {value!r}", key=where)
        return list(value)
    if kind == "pair":
        if not isinstance(value, list) or len(value) != 2:
            raise ConfigurationError(f"需要 [下界, 上界], 收到 {value!r}", key=where)
        low, high = (_as_float(v, where) for v in value)
        if not low < high:
            raise ConfigurationError(f"下界必须小于上界, 收到 {value!r}", key=where)
        return [low, high]
    if kind == "shift":
        if isinstance(value, list):
            return [_as_float(v, where) for v in value]
        return _as_float(value, where)
    raise ValueError(kind)


class ExperimentConfig:
    """
    实验配置

    defaults 给出所有段和键的类型与默认值 (取自数值实验的参数);
    load_config 读入 YAML 覆盖默认值, 之后由 builder 方法生成各模块的配置对象.
    """

    defaults: Dict[str, Dict[str, Tuple[str, Any]]] = {
        "run": {
            "n_particles": ("int", DEFAULT_N_PARTICLES),
            "dimension": ("int", 2),
            "batch_size": ("int?", None),  # null 表示全批
            "max_steps": ("int", DEFAULT_MAX_STEPS),
            "tolerance": ("float", DEFAULT_TOLERANCE),
            "seed": ("int", DEFAULT_BASE_SEED),
            "box": ("pair", list(DEFAULT_BOX)),
            "initial": ("str?", None),  # 初始粒子 CSV, 覆盖 box 采样
        },
        "objective": {
            "name": ("str", "rastrigin"),
            "shift": ("shift?", None),
            "offset": ("float?", None),
        },
        "rule": {
            "name": ("str", "argmin"),
            "beta": ("float", DEFAULT_BETA),
        },
        "scheme": {
            "kind": ("str", "generalized"),
            "gamma": ("float", DEFAULT_GAMMA),
            "noise": ("str", "gaussian"),
            "zeta": ("float", DEFAULT_ZETA),
            "heterogeneous": ("bool", True),
            "lam": ("float", 0.0),
            "sigma": ("float", 0.0),
            "h": ("float", 0.0),
        },
        "record": {
            "diameters": ("bool", True),
            "best_objective": ("bool", True),
            "displacement": ("bool", True),
            "snapshots": ("bool", False),
            "snapshot_every": ("int", 1),
            "transitions": ("bool", False),
            "schedule": ("bool", False),
        },
        "benchmark": {
            "dimensions": ("ints", list(DEFAULT_DIMENSIONS)),
            "batch_sizes": ("ints", list(DEFAULT_BATCH_SIZES)),
            "replicates": ("int", DEFAULT_REPLICATES),
            "delta": ("float", DEFAULT_SUCCESS_THRESHOLD),
        },
        "diagnostics": {
            "window": ("int?", None),  # null 表示 m0
            "tolerance": ("float", BOUND_TOLERANCE),
            "replicates": ("int", 1),
            "decay_mode": ("str", DecayMode.PATHWISE.value),
            "property_cases": ("int", 10_000),
            "property_max_size": ("int", 8),
        },
        "partition_stats": {
            "m0": ("int?", None),
            "exact": ("bool?", None),  # null 表示能精确枚举时精确枚举
            "replicates": ("int", 10_000),
        },
    }

    def __init__(self):
        self.values: Dict[str, Dict[str, Any]] = {
            section: {key: copy.deepcopy(default) for key, (_, default) in keys.items()}
            for section, keys in self.defaults.items()
        }
        self.lines: Dict[str, int] = {}  # "section.key" -> 行号
        self.path: Optional[Path] = None

    def __str__(self):
        run = self.values["run"]
        return (
            f"[N]: {run['n_particles']} | [d]: {run['dimension']} | [P]: {self.batch_size} | "
            f"[RULE]: {self.values['rule']['name']} | [SEED]: {run['seed']}"
        )

    def __getitem__(self, section: str) -> Dict[str, Any]:
        return self.values[section]

    def _raise(self, e: ConfigurationError):
        """给没有行号的错误补上所在行"""
        if e.line is None and e.key is not None:
            key = e.key
            while key and key not in self.lines:
                key = key.rpartition(".")[0]
            if key:
                raise ConfigurationError(e.reason, line=self.lines[key], key=e.key) from e
        raise e

    def set(self, section: str, key: str, value, line: Optional[int] = None):
        if section not in self.defaults:
            raise ConfigurationError(f"未知配置段: {section}", line=line, key=section)
        if key not in self.defaults[section]:
            raise ConfigurationError(f"未知配置项: {key}", line=line, key=f"{section}.{key}")
        kind = self.defaults[section][key][0]
        try:
            self.values[section][key] = _coerce(kind, value, f"{section}.{key}")
        except ConfigurationError as e:
            raise ConfigurationError(e.reason, line=line, key=e.key) from e
        if line is not None:
            self.lines[f"{section}.{key}"] = line

    def load_config(self, path: Union[str, Path]) -> "ExperimentConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"配置文件不存在: {path}")
        text = path.read_text(encoding="utf-8")
        loader = yaml.SafeLoader(text)
        try:
            root = loader.get_single_node()
            if root is None:
                _log.warning(f"{path} 是空文件, 全部使用默认值")
                self.path = path
                return self
            if not isinstance(root, yaml.MappingNode):
                raise ConfigurationError("顶层必须是按段组织的映射", line=root.start_mark.line + 1)
            for section_node, body in root.value:
                section = loader.construct_object(section_node)
                line = section_node.start_mark.line + 1
                if section not in self.defaults:
                    raise ConfigurationError(f"未知配置段: {section}", line=line, key=str(section))
                self.lines[section] = line
                if isinstance(body, yaml.ScalarNode) and body.tag == "tag:yaml.org,2002:null":
                    continue
                if not isinstance(body, yaml.MappingNode):
                    raise ConfigurationError("配置段必须是映射", line=line, key=section)
                for key_node, value_node in body.value:
                    key = loader.construct_object(key_node)
                    value = loader.construct_object(value_node, deep=True)
                    self.set(section, key, value, line=key_node.start_mark.line + 1)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark or e.context_mark
            raise ConfigurationError(
                f"YAML 格式错误: {e.problem}", line=mark.line + 1 if mark else None
            ) from e
        finally:
            loader.dispose()
        self.path = path
        _log.debug(f"读入配置 {path}: {self}")
        return self

    @property
    def batch_size(self) -> int:
        value = self.values["run"]["batch_size"]
        return self.values["run"]["n_particles"] if value is None else value

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]

    def objective_params(self) -> Dict[str, Any]:
        section = self.values["objective"]
        params = {}
        if section["name"] == "rastrigin":
            params["shift"] = DEFAULT_RASTRIGIN_SHIFT if section["shift"] is None else section["shift"]
            params["offset"] = DEFAULT_RASTRIGIN_OFFSET if section["offset"] is None else section["offset"]
        else:
            params["shift"] = 0.0 if section["shift"] is None else section["shift"]
            if section["offset"] is not None:
                params["offset"] = section["offset"]
        return params

    def resolved(self) -> Dict[str, Any]:
        """补全所有默认值后的完整配置, 写入每个输出文件"""
        out = copy.deepcopy(self.values)
        out["run"]["batch_size"] = self.batch_size
        out["objective"] = {"name": out["objective"]["name"], **self.objective_params()}
        return out

    def config_hash(self) -> str:
        canonical = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def metadata(self) -> Dict[str, Any]:
        """写进每个输出文件的种子、配置哈希与噪声分布假设"""
        return {"seed": self.seed, "config_hash": self.config_hash(), "noise_assumption": NOISE_ASSUMPTION}

    # builders. 延迟导入: utils 不能在导入期依赖 core

    def objective(self, dimension: Optional[int] = None):
        from batchcbo.core.objectives import build_objective

        d = self.values["run"]["dimension"] if dimension is None else dimension
        try:
            return build_objective(self.values["objective"]["name"], d, self.objective_params())
        except ConfigurationError as e:
            self._raise(e)

    def rule(self):
        from batchcbo.core.consensus import build_rule

        try:
            return build_rule(self.values["rule"]["name"], self.values["rule"]["beta"])
        except ConfigurationError as e:
            self._raise(e)

    def scheme(self):
        from batchcbo.core.dynamics import NoiseModel, SchemeConfig
        from batchcbo.utils.assets import NoiseKind, SchemeKind

        s = self.values["scheme"]
        try:
            kind = SchemeKind(s["kind"])
        except ValueError:
            self._raise(ConfigurationError(f"未知格式: {s['kind']}", key="scheme.kind"))
        try:
            if kind is SchemeKind.GENERALIZED:
                try:
                    noise_kind = NoiseKind(s["noise"])
                except ValueError:
                    raise ConfigurationError(f"未知噪声类型: {s['noise']}", key="scheme.noise")
                if noise_kind is NoiseKind.NONE:
                    noise = NoiseModel.none()
                elif noise_kind is NoiseKind.GAUSSIAN:
                    noise = NoiseModel.gaussian(s["zeta"], s["heterogeneous"])
                else:
                    # 格式噪声配任意 γ, 参数取 lam / sigma / h
                    noise = NoiseModel(noise_kind, lam=s["lam"], sigma=s["sigma"], h=s["h"], heterogeneous=s["heterogeneous"])
                return SchemeConfig.generalized(s["gamma"], noise)
            return SchemeConfig.model(kind, s["lam"], s["sigma"], s["h"], s["heterogeneous"])
        except ConfigurationError as e:
            self._raise(e)

    def record_options(self):
        from batchcbo.core.dynamics import RecordOptions

        try:
            return RecordOptions(**self.values["record"])
        except ConfigurationError as e:
            self._raise(e)

    def initial_states(self):
        from batchcbo.core.ensemble import ParticleEnsemble

        path = self.values["run"]["initial"]
        if path is None:
            return None
        if self.path is not None and not Path(path).is_absolute():
            path = self.path.parent / path
        return ParticleEnsemble.load_csv(path).states

    def run_config(self, **changes):
        from batchcbo.core.dynamics import RunConfig

        run = self.values["run"]
        try:
            config = RunConfig(
                n_particles=run["n_particles"],
                dimension=run["dimension"],
                objective=self.objective(),
                rule=self.rule(),
                scheme=self.scheme(),
                batch_size=self.batch_size,
                max_steps=run["max_steps"],
                tolerance=run["tolerance"],
                seed=run["seed"],
                record=self.record_options(),
                box=tuple(run["box"]),
                initial=self.initial_states(),
            )
            return config.replace(**changes) if changes else config
        except ConfigurationError as e:
            self._raise(e)

    def benchmark_config(self):
        from batchcbo.harness.benchmark import BenchmarkConfig

        run, bench = self.values["run"], self.values["benchmark"]
        try:
            return BenchmarkConfig(
                rule=self.rule(),
                scheme=self.scheme(),
                n_particles=run["n_particles"],
                dimensions=tuple(bench["dimensions"]),
                batch_sizes=tuple(bench["batch_sizes"]),
                replicates=bench["replicates"],
                delta=bench["delta"],
                max_steps=run["max_steps"],
                tolerance=run["tolerance"],
                box=tuple(run["box"]),
                seed=run["seed"],
                objective_name=self.values["objective"]["name"],
                objective_params=self.objective_params(),
            )
        except ConfigurationError as e:
            self._raise(e)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return ExperimentConfig().load_config(path)


__all__ = ["ExperimentConfig", "load_config"]
