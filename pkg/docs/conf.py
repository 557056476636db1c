# -*- coding: utf-8 -*-
#
# locscale documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from locscale import __version__

extensions = []

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'locscale'
copyright = u'2026, locscale developers'
author = u'locscale developers'

version = __version__
release = __version__

language = 'en'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

todo_include_todos = False

html_theme = 'alabaster'

html_static_path = ['_static']

htmlhelp_basename = 'locscaledoc'

latex_documents = [
    (master_doc, 'locscale.tex', u'locscale Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'locscale', u'locscale Documentation',
     [author], 1)
]

texinfo_documents = [
    (master_doc, 'locscale', u'locscale Documentation',
     author, 'locscale', 'Joint location-scale association tests for quantitative traits.',
     'Miscellaneous'),
]
