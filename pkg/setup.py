# -*- coding: utf-8 -*-
"""
    wholegrid
    ~~~~~~~~~

    Setup script for packaging and installing wholegrid
"""
import pathlib
from setuptools import setup, find_packages

this_directory = pathlib.Path(__file__).parent.resolve()
long_description = (this_directory / 'README.md').read_text(encoding='utf-8')

setup(
    name="wholegrid",
    version="0.1.0",
    description='Impedance-based whole-system small-signal modeling of power grids',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='wholegrid developers',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3 :: Only',
    ],
    keywords='power systems, small-signal stability, impedance, eigenvalues, converters',
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    package_data={"wholegrid": ["fixtures/*.json"]},
    include_package_data=True,
    python_requires=">=3.9, <4",
    install_requires=[
        "numpy>=1.21",
        "scipy>=1.8",
        "networkx>=2.6",
        "pandas>=1.5"
    ],
    extras_require={
        'test': ["pytest>=7"]
    },
    entry_points={
        'console_scripts': [
            'wholegrid=wholegrid.cli:main'
        ],
    },
)
