from setuptools import setup, find_packages

setup(
    name="fearconnect",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.10",
    install_requires=[
        "numpy",
        "pandas",
        "scipy",
        "PyYAML",
        "joblib",
        "tqdm",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    entry_points={
        "console_scripts": [
            "fearconnect=fearconnect.main:main",
        ],
    },
)
