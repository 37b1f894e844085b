import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "medner._core",
    sorted(glob.glob("src/*.cpp")) + ["bindings/medner_py.cpp"],
    include_dirs=["include", "vendor"],
    libraries=["ssl", "crypto"],
    cxx_std=20,
)

setup(
    name="medner",
    version="0.1.0",
    description="Prompt-based medical entity recognition over clinical text",
    packages=["medner"],
    package_dir={"": "python"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    python_requires=">=3.8",
    zip_safe=False,
)
