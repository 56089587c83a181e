"""Amplitude-state representation of discrete stochastic systems.

Submodules:

* ``distributions``: pmf, characteristic and generating functions, moments
* ``hilbert``: amplitude states, entropy, Fisher information, convergence checks
* ``modproj``: folding onto residues mod M and uniformity bounds
* ``fock``: truncated oscillator operators, eigensolver, dynamics
* ``turng``: sampled digit streams and their certification
* ``cli``: the ``stochfock`` command
"""

__version__ = "0.1.0"
