import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="covkit",
    version="0.1.0",
    description="Gap reductions MaxLin -> MLD -> k-MLD -> NCP over prime fields, with cover families and brute-force oracles",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
    install_requires =[
        "numpy>=1.16.1",
        "pandas>=0.25.2",
        "jsonschema>=3.2",
        "tqdm>=4.0"
    ],
    extras_require={
        "test": ["pytest>=6.0", "hypothesis>=6.0"]
    },
    entry_points='''
        [console_scripts]
        covkit=covkit.cli:cli
    '''
)
