"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time), so a missing compiler or Cython must not fail the install.
"""

from setuptools import setup

ext_modules = []
cmdclass = {}

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension
    from setuptools.command.build_ext import build_ext

    class optional_build_ext(build_ext):
        def run(self):
            try:
                super().run()
            except Exception as exc:  # compiler missing, etc.
                print(f"warning: building sl2cayley._kernels._core failed ({exc}); "
                      "falling back to the pure-python kernels")

        def build_extension(self, ext):
            try:
                super().build_extension(ext)
            except Exception as exc:
                print(f"warning: {ext.name} skipped ({exc})")

    ext_modules = cythonize(
        [
            Extension(
                "sl2cayley._kernels._core",
                ["src/sl2cayley/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    cmdclass["build_ext"] = optional_build_ext
except ImportError as exc:
    print(f"warning: Cython/numpy unavailable at build time ({exc}); "
          "installing pure-python kernels only")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
