# 转移矩阵记录
#
# 运行时按步记录 (W_n, η_n, γ), 诊断时再展开成 A_n 与 B_n^l.

from dataclasses import dataclass

import numpy as np

from batchcbo.utils.assets import ConfigurationError


@dataclass(frozen=True, eq=False)
class TransitionRecord:
    """
    第 n 步的转移数据

    x_{n+1}^l = (A_n + B_n^l) x_n^l, 其中
    A_n = (1−γ)I + γW_n, B_n^l = −H_n^l(I − W_n), H_n^l = diag(η_n^{·,l})
    """

    step: int
    W: np.ndarray
    eta: np.ndarray
    gamma: float

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        eta = np.array(self.eta, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ConfigurationError(f"W 必须是方阵, 收到形状 {W.shape}")
        if eta.ndim != 2 or eta.shape[0] != W.shape[0]:
            raise ConfigurationError(f"η 必须是 N×d, 收到形状 {eta.shape}")
        W.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "eta", eta)

    @property
    def n_particles(self) -> int:
        return self.W.shape[0]

    def A(self) -> np.ndarray:
        return (1.0 - self.gamma) * np.eye(self.n_particles) + self.gamma * self.W

    def H(self, l: int) -> np.ndarray:
        return np.diag(self.eta[:, l])

    def B(self, l: int) -> np.ndarray:
        # 对角阵左乘等价于逐行缩放
        return -self.eta[:, l][:, None] * (np.eye(self.n_particles) - self.W)

    def perturbed(self, l: int) -> np.ndarray:
        return self.A() + self.B(l)


__all__ = ["TransitionRecord"]
