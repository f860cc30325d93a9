# 自定义异常
#
# 所有异常都在 __init__ 中自行拼装提示信息, 调用方只需传入上下文字段.


class CBOError(Exception):
    pass


class ConfigurationError(CBOError):
    def __init__(self, reason, line=None, key=None):
        self.reason = reason
        self.line = line
        self.key = key
        where = ""
        if key is not None:
            where += f"[{key}] "
        if line is not None:
            where = f"第 {line} 行: " + where
        super().__init__(f"配置错误: {where}{reason}")


class UsageError(CBOError):
    def __init__(self, reason):
        super().__init__(f"用法错误: {reason}")


class PreconditionError(CBOError):
    def __init__(self, reason):
        super().__init__(f"前置条件不满足: {reason}")


class DivergenceError(CBOError):
    def __init__(self, step, partial=None):
        self.step = step
        self.partial = partial  # 发散前已完成部分的 RunResult
        super().__init__(f"第 {step} 步出现非有限状态, 运行发散")


class NoConnectivityError(CBOError):
    def __init__(self, n_particles, batch_size):
        self.n_particles = n_particles
        self.batch_size = batch_size
        super().__init__(
            f"N={n_particles}, P={batch_size}: 批大小为 1 时任意两粒子永不同批, 一致性假设无法满足"
        )


class ResourceLimitError(CBOError):
    def __init__(self, what, required, cap, cap_name):
        self.required = required
        self.cap = cap
        self.cap_name = cap_name
        super().__init__(
            f"{what} 需要 {required}, 超过上限 {cap_name}={cap}"
        )


class EstimationError(CBOError):
    def __init__(self, reason):
        super().__init__(f"无法估计: {reason}")


class InapplicableError(CBOError):
    def __init__(self, check, reason):
        super().__init__(f"{check} 不适用: {reason}")


__all__ = [
    "CBOError",
    "ConfigurationError",
    "UsageError",
    "PreconditionError",
    "DivergenceError",
    "NoConnectivityError",
    "ResourceLimitError",
    "EstimationError",
    "InapplicableError",
]
