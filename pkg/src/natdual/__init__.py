"""natdual: a finite-level natural duality workbench.

Finite algebras and alter egos, the hom-functors D and E, duality,
fullness and injectivity verdicts, entailment with certificates, and
endoprimality, all decided exactly on finite objects.
"""
__version__ = "0.1.0"

from .algebra import (FiniteAlgebra, OperationTable, Relation, free_algebra, generate_subpower,
                      hom_enumerate, in_quasivariety, is_hom, is_retract_of, power, product,
                      subalgebra, subuniverse_generate, term_clone)
from .config import DEFAULT, Bounds
from .duality import (check_duality_on, check_fullness_on, dual_of_algebra, dual_of_structure,
                      search_injectivity_failure, verify_injectivity_witness)
from .endo import endo_ego, endomorphisms, is_k_endoprimal
from .entailment import (clone_entails, entails, pp_certificate, retraction_decomposition,
                         verify_retraction)
from .errors import (CertificateMismatch, DualityError, ElaborationError, EmptyHomset, NotAlgebraic,
                     SelfValidationFailed, SignatureMismatch, SizeBoundExceeded)
from .kernel import BACKEND
from .structures import (AlterEgo, FiniteStructure, PartialOperation, enumerate_substructures,
                         is_algebraic_over, struct_morphisms)

__all__ = [n for n in dir() if not n.startswith("_")]
