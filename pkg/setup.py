# -*- coding: utf-8 -*-

import setuptools

requirements = ['numpy>=1.20', 'scipy>=1.7']

setuptools.setup(
    name='bigjump',
    version='0.1.0',
    description='Monte Carlo laboratory for suprema of heavy-tailed modulated random walks.',
    package_dir={'': 'src'},
    packages=setuptools.find_packages(where='src'),
    python_requires=">=3.8",
    entry_points={
        'console_scripts': ['bigjump=bigjump.__main__:main'],
    },
    install_requires=requirements,
    extras_require={
        'test': ['pytest'],
    },
)
