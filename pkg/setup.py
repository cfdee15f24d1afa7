from setuptools import setup

setup(
    name='pc-lab',
    version='0.1',
    packages=['pclab'],
    license='all rights reserved',
    description='Parallel-correctness and transfer analysis for conjunctive queries',
    long_description='Decides whether conjunctive queries are computed correctly in one round under '
                     'distribution policies, whether that property transfers between queries, and '
                     'generates test vectors from hardness reductions.',
    install_requires=[
        'pandas',
        'pypika',
        'sqlalchemy',
        'ply',
        'networkx'
    ],
    extras_require={
        'Test': ['pytest']
    },
    entry_points={
        'console_scripts': ['pc-lab=pclab.cli:main']
    }
)
