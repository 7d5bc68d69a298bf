"""Sphinx configuration for annulus_restriction."""
import os
import sys

sys.path.insert(0, os.path.abspath(".."))

import annulus_restriction  # noqa: E402

extensions = ["sphinx.ext.autodoc", "sphinx.ext.viewcode"]
autodoc_member_order = "bysource"

source_suffix = ".rst"
master_doc = "index"

project = "annulus_restriction"
copyright = "2022, Trevor Bernard"
author = "Trevor Bernard"
version = annulus_restriction.__version__
release = annulus_restriction.__version__

exclude_patterns = ["_build"]
pygments_style = "sphinx"
html_theme = "alabaster"
