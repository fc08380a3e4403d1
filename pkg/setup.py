from os import path
from setuptools import setup, find_packages


here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()


setup(name='afloat',
      version='0.1.0',
      description=('Floquet effective Hamiltonians of step protocols and'
                   ' adiabatic transport of the driven spin'),
      long_description=long_description,
      long_description_content_type='text/markdown',
      author='afloat developers',
      classifiers=[
          'Development Status :: 4 - Beta',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
          'Programming Language :: Python :: 3.11'
      ],
      packages=find_packages(),
      install_requires=['numpy', 'scipy>=1.6', 'matplotlib'],
      extras_require={'test': ['pytest', 'coverage']},
      entry_points={'console_scripts': ['afloat = afloat.cli:main']},
      keywords=['floquet', 'physics', 'berry phase', 'quantum'],
      include_package_data=True)
