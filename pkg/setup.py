from setuptools import setup, find_packages

setup(
    name="elasticfm",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    entry_points={
        "console_scripts": [
            "elasticfm = elasticfm.main:app",
        ],
    },
    install_requires=[
        "click<8.2",
        "click-didyoumean",
        "pandas",
        "rich",
        "rich_click",
        "shellingham",
        "typer<0.6",
        "numpy",
        "scipy",
    ],
    extras_require={
        "test": ["pytest"],
    },
)
