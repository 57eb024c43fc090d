from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="skewshadow",
    version="0.1.0",
    description=(
        "Shadowing of pseudotrajectories in a random linear skew product: "
        "statistic, oracle and phase-transition experiments"
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["skewshadow", "skewshadow.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.8",
    install_requires=[
        # Numerics
        "numpy>=1.22.0",
        "scipy>=1.9.0",
        # Reports and configuration
        "pydantic>=2.0.0",
        "pyyaml>=6.0",
        "python-dotenv>=1.0.0",
        # CLI
        "rich>=13.0.0",
        "typer>=0.9.0",
    ],
    extras_require={
        "monitoring": [
            "prometheus-client>=0.19.0",
        ],
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "black>=23.0.0",
            "isort>=5.0.0",
            "mypy>=1.0.0",
            "pre-commit>=3.0.0",
            "coverage>=7.0.0",
            "ruff>=0.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "skewshadow=skewshadow.cli:main",
        ],
    },
)
