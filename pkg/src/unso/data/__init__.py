"""Bundled default parameter files.

* ``default_coeffs.txt``   order-14 coefficients trained with the stock
                           configuration and seed 0; regenerating with the
                           same flags reproduces the file byte for byte.
* ``cesista_default.txt``  5-step (gamma, r, l) schedule from the same
                           trainer, seed 0.
* ``external_demo.txt``    example external schedule (the fixed quintic
                           coefficients repeated 5 times) demonstrating
                           the file format for externally published
                           per-step schedules.
"""

from importlib.resources import files

from ..coeff_train import read_step_triples
from ..scalarpoly import CoefficientSet, read_coefficients


def resource_path(name: str):
    return files(__package__).joinpath(name)


def default_coefficients() -> CoefficientSet:
    return read_coefficients(resource_path("default_coeffs.txt"))


def default_cesista_triples():
    return read_step_triples(resource_path("cesista_default.txt"))


def external_demo_schedule():
    return read_step_triples(resource_path("external_demo.txt"))
