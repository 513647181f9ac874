#!/usr/bin/env python
from setuptools import setup

setup(
    name="udrfs",
    version="0.2.0",
    description="Detected/undetected random finite set filters with "
                "brute-force verification",
    classifiers=["Programming Language :: Python :: 3 :: Only"],
    py_modules=["udrfs"],
    install_requires=[
        "singer-python>=5.13.0,<6.0.0",
        "numpy>=1.22",
        "scipy>=1.8"
    ],
    entry_points="""
    [console_scripts]
    udrfs=udrfs:main
    """,
    packages=["udrfs"],
    package_data={
        'udrfs': [
            'schemas/*.json',
            'schemas/shared/*.json',
            'verification_manifest.json'
        ]
    },
    include_package_data=True,
)
