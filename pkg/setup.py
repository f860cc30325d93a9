import os

from setuptools import find_packages, setup

init_path = os.path.join(os.path.dirname(__file__), "batchcbo/__init__.py")

with open(init_path, "r") as f:
    exec(f.read())

version = __version__


setup(
    name="batchcbo",
    version=version,
    description="随机分批与异质噪声下的离散一致性优化 (CBO) 算法库, 附理论诊断与基准测试 CLI",
    long_description=open("README.md", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=("tests", "tests.*")),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy~=2.2.3",
        "scipy~=1.15.2",
        "psutil~=6.1.1",
        "tqdm~=4.67.1",
        "pyyaml~=6.0.2",
    ],
    extras_require={"test": ["pytest~=8.3.4"]},
    entry_points={"console_scripts": ["batchcbo=batchcbo.cli.main:main"]},
)
