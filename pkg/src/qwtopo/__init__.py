"""Split-step quantum walks: lattice engine, band topology and cavity phase-space simulation."""

__version__ = "0.1.0"

from .bands import (  # noqa: E402
    berry_phase,
    chiral_axis,
    closed_form_energy,
    dynamical_phase,
    effective_hamiltonian,
    kspace_unitary,
    refocus_step_search,
    topology_summary,
    winding_number,
)
from .errors import PhysicsInvariantError  # noqa: E402
from .lattice import BlochMode, WalkConfig, WalkerState, run_walk, walk_step  # noqa: E402

__all__ = [
    "BlochMode",
    "PhysicsInvariantError",
    "WalkConfig",
    "WalkerState",
    "berry_phase",
    "chiral_axis",
    "closed_form_energy",
    "dynamical_phase",
    "effective_hamiltonian",
    "kspace_unitary",
    "refocus_step_search",
    "run_walk",
    "topology_summary",
    "walk_step",
    "winding_number",
]
