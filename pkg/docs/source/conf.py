# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

# -- Path setup --------------------------------------------------------------
import os
import sys
sys.path.insert(0, os.path.abspath('../..'))

# -- Project information -----------------------------------------------------
CURRENT_DIR = os.path.dirname(__file__)
VERSION_FILE = os.path.join(CURRENT_DIR,'..','..','scenerag','version_info.py')
with open(VERSION_FILE,'r') as f:
    raw = f.read()

version_info = {}
exec(raw,{},version_info)

project = "SceneRAG"
copyright = version_info['__copyright__'].replace("Copyright (c)","")
author = version_info['__author__']

# The short X.Y version
version = '.'.join(version_info["__version__"].split('.',2)[:2])
# The full version, including alpha/beta/rc tags
release = version_info["__version__"]


# -- General configuration ---------------------------------------------------
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',   # google style docstrings
    'sphinx.ext.doctest',
    'sphinx_automodapi.automodapi', # separate doc pages for every object
    ]

doctest_global_setup = '''
import scenerag as sr
import doctest
doctest.ELLIPSIS_MARKER = "[...]"
'''

master_doc = 'index'
automodsumm_inherited_members = True
source_suffix = ['.rst',]
language = None
exclude_patterns = []
pygments_style = 'colorful'
napoleon_include_special_with_doc = True

# -- Options for HTML output -------------------------------------------------
html_theme = 'alabaster'
htmlhelp_basename = 'sceneragdoc'

# -- Options for LaTeX output ------------------------------------------------
latex_documents = [
    (master_doc, 'scenerag.tex', 'SceneRAG Documentation',
     version_info['__author__'], 'manual'),
]

man_pages = [
    (master_doc, 'scenerag', 'SceneRAG Documentation',
     [author], 1)
]
