"""TV and second-order TGV on staggered pixel grids, with primal-dual solvers."""

__version__ = "0.1.0"
