from os import chdir, getcwd
from shutil import rmtree
from tempfile import mkdtemp
import doctest

from sybil import Sybil
from sybil.parsers.codeblock import PythonCodeBlockParser
from sybil.parsers.doctest import DocTestParser

doctest.ELLIPSIS_MARKER = '[...]'


def setup(namespace):
    # tutorials write their artifacts into a scratch directory
    namespace['_cwd'] = getcwd()
    namespace['_scratch'] = mkdtemp()
    chdir(namespace['_scratch'])


def teardown(namespace):
    chdir(namespace['_cwd'])
    rmtree(namespace['_scratch'], ignore_errors=True)


# run every code sample of the tutorials
pytest_collect_file = Sybil(
    parsers=[
        DocTestParser(optionflags=doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE),
        PythonCodeBlockParser(),
    ],
    pattern='*.rst',
    setup=setup,
    teardown=teardown,
).pytest()
