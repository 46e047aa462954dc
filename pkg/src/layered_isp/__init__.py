"""Forward and inverse source problem for the attenuated 1D Helmholtz equation in a two-layer medium."""

from .greens import SIGMA, BoundaryDataset, boundary_data, forward_field, frequency_grid, green
from .inversion import add_noise, assemble, invert, tikhonov_solve
from .medium import ComplexWavenumber, MediumConfig, kappa_of, layer_wavenumbers
from .sources import SourceGrid, SourcePair, constant_M, demo_pair, make_bump_pair, sobolev_norm, split

__version__ = "0.1.0"

__all__ = [
    "SIGMA",
    "BoundaryDataset",
    "ComplexWavenumber",
    "MediumConfig",
    "SourceGrid",
    "SourcePair",
    "add_noise",
    "assemble",
    "boundary_data",
    "constant_M",
    "demo_pair",
    "forward_field",
    "frequency_grid",
    "green",
    "invert",
    "kappa_of",
    "layer_wavenumbers",
    "make_bump_pair",
    "sobolev_norm",
    "split",
    "tikhonov_solve",
]
