# @License: MIT
#
# Copyright (c) 2025-2026 the SceneRAG developers
__all__ = [
            '__name__',
            '__version__',
            '__description__',
            '__author__',
            '__license__',
            '__keywords__',
            '__python_requires__',
            '__platforms__',
            '__classifiers__',
            '__status__',
            '__copyright__',
            ]


__name__ = 'scenerag'
__version__ = '0.1.0-alpha'
__description__ = 'retrieval-augmented question answering over 3D scene knowledge, with a two-tower retriever, an edge query service and an evaluation harness'

__author__ = 'the SceneRAG developers'
__license__ = "MIT"
__keywords__ = 'retrieval-augmented-generation dense-retrieval two-tower virtual-reality question-answering'
__python_requires__ = '>=3.8'
__platforms__ = ["Windows", "Linux", "Mac OS-X", "Unix"]
__classifiers__ = [
    'Development Status :: 3 - Alpha',
    'Intended Audience :: Science/Research',
    'Topic :: Scientific/Engineering',
    'Topic :: Scientific/Engineering :: Artificial Intelligence',
    'Topic :: Scientific/Engineering :: Information Analysis',
    'License :: OSI Approved :: MIT License',
    'Programming Language :: Python',
    'Programming Language :: Python :: 3',
    'Programming Language :: Python :: 3.8',
    'Programming Language :: Python :: 3.9',
    'Programming Language :: Python :: 3.10',
    'Programming Language :: Python :: 3.11',
    'Programming Language :: Python :: Implementation :: CPython',
    'Operating System :: MacOS :: MacOS X',
    'Operating System :: Microsoft :: Windows',
    'Operating System :: POSIX',
    'Natural Language :: English',
    ]

__status__ = "Experimental"

__copyright__ = "Copyright (c) 2025-2026 " + __author__
