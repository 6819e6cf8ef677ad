"""Build script: compiles the optional enumeration kernel.

The package is fully functional without the extension; confcompat.solver
falls back to the pure-Python kernel when the import fails.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Build the Cython kernel if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            print(f"confcompat: skipping compiled kernel ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(
                f"confcompat: could not build {ext.name}, using pure-Python "
                f"kernel ({exc})",
                file=sys.stderr,
            )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "confcompat._enumcore",
                ["src/confcompat/_enumcore.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": _OptionalBuildExt},
)
