"""Exact invariants of expanding edge substitutions on rose graphs.

Modules:
    abelian             exact integer linear algebra, f.g. abelian groups,
                        stationary colimits
    graph_substitution  rose graphs, substitutions, matrices, entropy
    germ_quotient       the non-Hausdorff quotient model and its germs
    dynamics            induced dynamics, periodic points, zeta data,
                        expansiveness and axiom witnesses
    ktheory             quotient K-groups, wrong-way maps, stable and
                        Ruelle-algebra K-theory
    cli                 command line front end
"""

__version__ = "0.1.0"
