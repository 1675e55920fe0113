from setuptools import setup, find_packages

setup(
    name="banc-augmentation-images",
    version="0.1.0",
    description="Banc d'augmentation d'images médicales par DDPM et PGGAN, avec FID, sélection Greedy-K et classifieurs",
    author="Aya Zid",
    author_email="azid28278@gmail.com",
    license="MIT",
    packages=find_packages(exclude=["tests"]),
    py_modules=["exceptions", "main"],
    include_package_data=True,
    install_requires=[
        "numpy>=2.2,<3.0.0",
        "scipy>=1.14.0,<2.0.0",
        "pandas>=2.3.3,<3.0.0",
        "openpyxl>=3.1.5,<4.0.0",
        "tqdm>=4.67.1,<5.0.0",
    ],
)
