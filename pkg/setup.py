from setuptools import find_packages, setup

PYTHON_VERSION = '>=3.8'

REQUIREMENTS = [
    "numpy>=1.20",
    "scipy>=1.9",
    "ply>=3.11",
    "matplotlib>=3.4",
]

setup(name="ltlstep",
      version="0.1",
      description='Footstep planning with linear temporal logic specifications',
      python_requires=PYTHON_VERSION,
      install_requires=REQUIREMENTS,
      packages=find_packages(exclude=["examples", "examples.*"]),
      entry_points={
          "console_scripts": [
              "plan=ltlstep.cli:main",
          ],
      })
