# Builds the optional compiled kernel extension.  The package works without
# it (pure-Python kernels are selected at import when the extension is
# missing), so a failed Cython build should not block installation.
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "qsdc3._core_cy",
                ["src/qsdc3/_core_cy.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-identical
                # to the pure-Python ones (no fused multiply-add).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
