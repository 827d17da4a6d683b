"""Soliton and pilot-wave numerical laboratory.

Submodules
----------
numerics
    Integration, root finding, radial quadrature and physical constants.
dirac_soliton
    Self-field Dirac-Poisson soliton by inward shooting.
photon_soliton
    Nonlinear Klein-Gordon photon profiles and Uehling potentials.
pilot_wave
    Guidance-law velocities and trajectory ensembles.
two_level
    Optical Bloch dynamics with the quantum-force decomposition.
cli_io
    Scenario configs, CSV/SVG emitters and the command-line entry point.
"""

__version__ = "0.1.0"
