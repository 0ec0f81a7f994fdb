#!/usr/bin/env python
"""
mcqdiff predicts the difficulty of multiple-choice questions from the answers of
simulated learner personas.

Learner classes are discovered from student response logs, each class is
described as a persona, a language model answers every question as each
persona, and ridge regression maps the persona answers to IRT difficulty.
"""

from setuptools import find_packages, setup

version = '0.1dev1'

dev_reqs = [
    # mcqdiff
    "click>=7.0",
    "numpy>=1.17",
    "pandas>=1.0",
    "plotly>=4.0",
    "pyyaml>=5.1",
    "requests>=2.20",
    "scikit-learn>=0.22",
    "scipy>=1.3",
    "tenacity>=6.0",

    # Testing
    "pytest>=4.6",
    "factory-boy>=2.12",
]
install_requires = dev_reqs


print("""-----------------------------------
 Installing mcqdiff version {}
-----------------------------------

""".format(version))

setup(
    name = 'mcqdiff',
    version = version,
    description = "MCQ difficulty prediction from persona-conditioned simulations",
    long_description = __doc__,
    keywords = ['education', 'item response theory', 'latent class analysis', 'difficulty estimation',
                'large language models'],
    license = 'GPLv3',
    packages = find_packages(exclude=['tests']),
    package_data = {
        'mcqdiff': ['utils/config_defaults.yaml', 'profiling/personas_bundled.json', 'llm/prompts/*.yaml'],
    },
    include_package_data = True,
    zip_safe = False,
    scripts = ['scripts/mcqdiff'],
    install_requires = install_requires,
    python_requires = '>=3.7',
    classifiers = [
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Education',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Natural Language :: English',
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: POSIX',
        'Operating System :: Unix',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
)

print("""
--------------------------------
 mcqdiff installation complete!
--------------------------------
Run `mcqdiff --help` to list the pipeline stages.
""")
