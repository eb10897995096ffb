from setuptools import setup, find_packages
from os.path import dirname, abspath, join

directory_name = dirname(abspath(__file__))
with open(join(directory_name, "README.md"), "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open(join(directory_name, "requirements.txt")) as requirements:
    setup(
        name='gcsim',
        version='0.0.1',
        description="Gyrator-capacitor transient simulator of a continuously variable series reactor",
        long_description=long_description,
        long_description_content_type="text/markdown",
        packages=find_packages(exclude=["tests", "demos"]),
        install_requires=[line.strip() for line in requirements if line.strip()],
        extras_require={"test": ["pytest", "hypothesis"]},
        entry_points={"console_scripts": ["simulate=gcsim.cli:main"]},
        python_requires=">=3.8",
    )
