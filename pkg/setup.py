from setuptools import setup

setup(
    name = 'mcbatch',
    version = '1.0.0',
    description = 'Batched Monte Carlo integration of parameterized integrands',
    license = 'AGPL 3',
    packages = ['mcbatch'],
    install_requires=open('requirements.txt').readlines(),
    extras_require={'test': ['scipy==1.5.2']},
    entry_points = {'console_scripts': ['mcbatch = mcbatch.cli:main']},
)
