"""Build script for the native extension.

The C++ core is compiled directly into the `dissipnet._core` extension so the
package builds with plain setuptools (`pip install -e . --no-build-isolation`).
The CMake build remains the primary entry point for the CLI and test suites.
"""

import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

sources = sorted(glob.glob("src/*.cpp")) + ["python/bindings.cpp"]

ext = Pybind11Extension(
    "dissipnet._core",
    sources,
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
