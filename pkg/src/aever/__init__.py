"""aever: a deductive verifier for forall/exists relational properties.

The pipeline parses a relational verification problem, instantiates one
variable namespace per program copy, generates a single weakest-precondition
verification condition, and discharges it with an SMT solver.  Bounded
enumeration oracles for the contract semantics live alongside and can
cross-check any verdict at desk scale.
"""

__version__ = "0.1.0"
