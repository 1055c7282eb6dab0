"""Exact and SDP-based checks that the hashing index Q^PA and the decoding
index Q^EC = Q^DC coincide on states with quantum side information, together
with the hashing lemmas and coding bounds built on that identity.

Modules:

* :mod:`.gf2`: GF(2) linear maps, dual pairs, hash families and their exact
  universality certificates.
* :mod:`.quantum`: register-labelled operators, partial traces, purification
  and basis changes.
* :mod:`.sdp`: a small log-barrier interior-point solver for complex LMIs.
* :mod:`.entropies`: conditional min/max entropies, guessing probability and
  collision quantities.
* :mod:`.algorithms`: the PA/EC/DC indices on standard-form instances.
* :mod:`.lhl`: the verification harness producing pass/fail reports.
"""

from .algorithms import (
    AlgorithmInstance,
    EqualityReport,
    InstanceConfig,
    d1,
    d1_prime,
    decode_pgm,
    expect_over_family,
    q_ec_dc,
    q_pa,
    random_instance,
    verify_theorem1,
)
from .entropies import EntropyResult, hmax, hmin, pguess
from .gf2 import (
    BitMatrix,
    FamilyCertificate,
    HashFamily,
    LinearHash,
    certify_family,
    dual_family,
    family_all_linear,
    family_toeplitz,
)
from .lhl import VerificationReport
from .quantum import PureState, QOperator, RegisterLayout

__version__ = "0.1.0"
