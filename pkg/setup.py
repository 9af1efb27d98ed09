import sys

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


if sys.version_info < (3, 10, 0):
    raise RuntimeError("fairtune requires Python 3.10.0+")


setup(
    name="fairtune",
    version="0.1",
    description=("selective fine-tuning on synthetic data for fairer classifiers"),
    long_description="selective fine-tuning on synthetic data for fairer classifiers",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering",
    ],
    packages=[
        "fairtune",
        "fairtune.actors",
        "fairtune.actors.custom",
        "fairtune.actors.custom.routers",
        "fairtune.data",
        "fairtune.harness",
        "fairtune.masks",
        "fairtune.metrics",
        "fairtune.net",
        "fairtune.training",
    ],
    package_data={"fairtune.data": ["templates/*.txt"]},
    install_requires=["numpy", "pandas>=1.5"],
    entry_points={"console_scripts": ["fairtune=fairtune.harness.cli:main"]},
)
