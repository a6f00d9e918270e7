from pathlib import Path
from setuptools import setup


here = Path(__file__).parent
readme_path = here / "README.md"
long_description = ""
if readme_path.exists():
    long_description = readme_path.read_text(encoding="utf-8")


setup(
    name="minoramp",
    version="0.1.0",
    description="Certified density amplification for graphs without large clique minors",
    long_description=long_description or "Certified density amplification for graphs without large clique minors.",
    long_description_content_type="text/markdown",
    author="Sai",
    url="",
    packages=["minoramp"],
    python_requires=">=3.10",
    install_requires=[
        "networkx>=3.0",
        "numpy>=1.22",
    ],
    extras_require={
        "test": [
            "pytest>=7",
            "hypothesis>=6.70",
        ],
    },
    entry_points={
        "console_scripts": [
            "minoramp=minoramp.cli:main",
        ]
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3 :: Only",
        "Operating System :: OS Independent",
        "Environment :: Console",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    license="MIT",
)
