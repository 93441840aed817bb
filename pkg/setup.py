from setuptools import setup, find_namespace_packages


def fetch_requirements(filename):
    with open(filename, "r", encoding="utf-8") as fp:
        return [ln.strip() for ln in fp.read().split("\n") if ln.strip()]


def fetch_readme(filename):
    with open(filename, "r", encoding="utf-8") as fp:
        return fp.read()


setup(
    name="rbcsched",
    version="0.10",
    description="TDMA scheduling simulator for multi-user adaptive resonant beam charging",
    long_description=fetch_readme("README.md"),
    long_description_content_type="text/markdown",
    keywords="Wireless Power Transfer, TDMA, Scheduling, Simulation, Li-ion Charging",
    license="MIT License",
    packages=find_namespace_packages(include=["rbcsched", "rbcsched.*"]),
    py_modules=["simulate"],
    install_requires=fetch_requirements("requirements.txt"),
    extras_require={"test": ["pytest>=7"]},
    python_requires=">=3.8.0",
    include_package_data=True,
    zip_safe=False,
)
