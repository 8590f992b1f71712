"""
probe-forge package setup
Registers the `probe-forge` console command
"""

from pathlib import Path

from setuptools import find_packages, setup

RUNTIME = ("numpy", "python-dotenv", "pyyaml", "prometheus-client")


def _requirements():
    lines = Path(__file__).with_name("requirements.txt").read_text(encoding="utf-8").splitlines()
    return [line for line in lines if line and not line.startswith("#") and line.startswith(RUNTIME)]


setup(
    name="probe-forge",
    version="0.1.0",
    description="Profiling toolchain and simulator for HLS designs",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=_requirements(),
    extras_require={"dev": ["pytest>=6.2.5", "black>=21.9b0", "flake8>=3.9.0"]},
    entry_points={"console_scripts": ["probe-forge=src.main:main"]},
)
