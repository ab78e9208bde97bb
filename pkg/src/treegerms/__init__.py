"""Finite-truncation computations with groups acting on rooted trees.

Submodules:

* ``permgroup``: permutation groups of small degree (orbits, blocks,
  normalizers, permutation equivalence).
* ``portrait``: tree automorphisms as labelled portraits, wreath towers.
* ``burger_mozes``: finite ball models of universal groups U(F).
* ``treepair``: Higman-Thompson elements as tree pair diagrams.
* ``germ``: finitely supported germs, the F.A factorization and the sign
  character.
* ``catalog`` and ``cli``: JSON group catalogs and the ``treegerms`` command.
"""

__version__ = "0.1.0"
