# 终端颜色配置


class Color:
    """
    终端 ANSI 颜色与样式。

    - 前景: 设置颜色
    - 背景: 设置背景颜色
    - 样式: 加粗等
    - RESET: 重置所有颜色和样式
    - disable: 关闭颜色输出（重定向到文件或 `--no-color` 时使用）
    """

    _COLOR = True

    # 前景颜色
    RED = "\033[31m"
    """前景-红"""
    GREEN = "\033[32m"
    """前景-绿"""
    YELLOW = "\033[33m"
    """前景-黄"""
    BLUE = "\033[34m"
    """前景-蓝"""
    MAGENTA = "\033[35m"
    """前景-品红"""
    CYAN = "\033[36m"
    """前景-青"""
    WHITE = "\033[37m"
    """前景-白"""
    GRAY = "\033[90m"
    """前景-灰"""

    # 背景颜色
    BG_RED = "\033[41m"
    """背景-红"""

    # 样式
    RESET = "\033[0m"
    """重置所有颜色和样式"""
    BOLD = "\033[1m"
    """加粗"""

    _NAMES = (
        "RED",
        "GREEN",
        "YELLOW",
        "BLUE",
        "MAGENTA",
        "CYAN",
        "WHITE",
        "GRAY",
        "BG_RED",
        "RESET",
        "BOLD",
    )

    @classmethod
    def disable(cls):
        """把所有颜色码替换为空串, 之后格式化的文本不再带转义序列"""
        cls._COLOR = False
        for name in cls._NAMES:
            setattr(cls, name, "")

    @classmethod
    def paint(cls, text, color: str) -> str:
        """给一段文本上色, 颜色关闭时原样返回"""
        if not cls._COLOR:
            return str(text)
        return f"{color}{text}{cls.RESET}"

    @classmethod
    def verdict(cls, passed: bool) -> str:
        """检查结果的彩色标记"""
        return cls.paint("PASS", cls.GREEN) if passed else cls.paint("FAIL", cls.RED)
