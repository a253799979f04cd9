"""Setup configuration for twinfalsify"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README for long description
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

setup(
    name="twinfalsify",
    version="0.1.0",
    description="Falsification of digital twins with causal bounds from confounded observational data",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="twinfalsify contributors",
    author_email="",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    package_data={"twinfalsify.worlds": ["fixtures/*.json"]},
    include_package_data=True,
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "hypothesis>=6.0",
            "statsmodels>=0.13",
        ],
    },
    entry_points={
        "console_scripts": [
            "twinfalsify=twinfalsify.__main__:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    keywords="digital twin causal inference partial identification hypothesis testing simulation",
)
