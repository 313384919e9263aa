"""varxpert mines git history of C code bases for variability expertise.

The pipeline classifies every changed line as variable (guarded by
conditional-compilation directives) or mandatory, folds the change
stream into per-file contribution ledgers, scores developers with
degree-of-authorship and commit-ownership metrics, and evaluates how
well those metrics point at the people who actually change variable
code.
"""

__version__ = "0.1.0"

from varxpert.errors import VarxpertError

__all__ = ["VarxpertError", "__version__"]
