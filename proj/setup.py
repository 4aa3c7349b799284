"""Builds the _core extension through the project's CMake tree.

setuptools drives CMake directly: configure with tests and the CLI off,
build the pybind11 target, and copy the resulting shared object into the
package. Plain `pip install --no-build-isolation .` works anywhere CMake
and a C++20 compiler are available.
"""

import pathlib
import shutil
import subprocess
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.extension import Extension


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = pathlib.Path(__file__).resolve().parent
        build_dir = pathlib.Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S",
                str(source_dir),
                "-B",
                str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DSPARSECF_BUILD_TESTS=OFF",
                "-DSPARSECF_BUILD_CLI=OFF",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "sparsecf_ext"],
            check=True,
        )
        built = next((build_dir / "python" / "sparsecf").glob("_core.*"))
        target = pathlib.Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, target)


setup(
    ext_modules=[CMakeExtension("sparsecf._core")],
    cmdclass={"build_ext": CMakeBuild},
)
