# 常用的文件读写操作
#
# 数据文件 (CSV / JSON / 批划分日志) 的写出与读回.
# 所有数据文件只依赖 (配置, 种子), 不写入时间戳, 保证逐字节可复现.

import csv
import dataclasses
import json
import math
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from batchcbo.utils.assets import FLOAT_FORMAT, ConfigurationError
from batchcbo.utils.logger import get_log

_log = get_log("FileIO")

PathLike = Union[str, Path]


def ensure_dir(path: PathLike) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def format_float(value) -> str:
    """按 17 位有效数字输出浮点数, 双精度可以无损读回"""
    return FLOAT_FORMAT % float(value)


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def write_csv(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    写出 CSV 文件

    参数:
        path: 输出路径
        header: 列名
        rows: 行数据, 浮点数统一按 17 位有效数字格式化
        metadata: 以 `# key=value` 形式写在表头之前的元数据
    """
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}={_format_cell(value)}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    _log.debug(f"写出 {path}")
    return path


def read_csv(path: PathLike) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    """读回 write_csv 写出的数值表, 返回 (元数据, 列名, 数值矩阵)"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"文件不存在: {path}")
    metadata: Dict[str, str] = {}
    header: List[str] = []
    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                metadata[key.strip()] = value.strip()
            elif not header:
                header = next(csv.reader([line]))
            else:
                try:
                    rows.append([float(v) for v in next(csv.reader([line]))])
                except ValueError as e:
                    raise ConfigurationError(f"{path}: 无法解析数值 ({e})", line=line_no)
    return metadata, header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def to_builtin(obj: Any) -> Any:
    """递归地把 numpy 类型、枚举、数据类转换为 JSON 可序列化的内置类型"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_builtin(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        # 严格 JSON 不支持 inf / nan
        if not math.isfinite(value):
            return str(value)
        return value
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_builtin(payload), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    _log.debug(f"写出 {path}")
    return path


def read_json(path: PathLike) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_lines(path: PathLike, lines: Iterable[str], metadata: Optional[Dict[str, Any]] = None) -> Path:
    """写出按行组织的文本 (批划分日志)"""
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}={_format_cell(value)}\n")
        for line in lines:
            f.write(line + "\n")
    return path


def read_lines(path: PathLike) -> List[str]:
    """读取文本行, 跳过空行和 `#` 元数据行"""
    if not os.path.isfile(path):
        raise ConfigurationError(f"文件不存在: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return [ln.rstrip("\n") for ln in f if ln.strip() and not ln.startswith("#")]
