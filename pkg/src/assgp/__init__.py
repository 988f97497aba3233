"""Certified construction of a Hausdorff ASSGP group topology on a free group.

The package is layered: :mod:`assgp.words` (free-group arithmetic),
:mod:`assgp.systems` (finite neighbourhood systems, certificates, membership),
:mod:`assgp.canonical` (factor sequences, enumeration, sampling),
:mod:`assgp.lemmas` (reduction lemmas and the ASSGP extension),
:mod:`assgp.chain` (dense-set chain and the topology oracle) and
:mod:`assgp.cli`.
"""
from .chain import (
    AlphabetTask,
    AssgpTask,
    ChainConfig,
    ChainState,
    DepthTask,
    Schedule,
    SepTask,
    TopologyOracle,
    build_chain,
    default_schedule,
    run_suites,
)
from .lemmas import AssgpWitness, assgp_extend, eta_equality, sandwich_reduce, verify_assgp
from .report import Report
from .systems import (
    ExclusionProof,
    InWithCert,
    NbhdSystem,
    NotInProven,
    SearchBudget,
    Unknown,
    check_certificate,
    check_exclusion,
    closure_seed,
    cyclic_enrich,
    enrich,
    is_extension,
    member_decide,
    pad_extend,
    seed_system,
    verify_system,
)
from .trees import CertificateError, flatten
from .words import E, AlphabetRegistry, Word, WordError, cyclic_member, inv, lett, mul, reduce_word

__version__ = "0.1.0"

__all__ = [
    "AlphabetRegistry",
    "AlphabetTask",
    "AssgpTask",
    "AssgpWitness",
    "CertificateError",
    "ChainConfig",
    "ChainState",
    "DepthTask",
    "E",
    "ExclusionProof",
    "InWithCert",
    "NbhdSystem",
    "NotInProven",
    "Report",
    "Schedule",
    "SearchBudget",
    "SepTask",
    "TopologyOracle",
    "Unknown",
    "Word",
    "WordError",
    "assgp_extend",
    "build_chain",
    "check_certificate",
    "check_exclusion",
    "closure_seed",
    "cyclic_enrich",
    "cyclic_member",
    "default_schedule",
    "enrich",
    "eta_equality",
    "flatten",
    "inv",
    "is_extension",
    "lett",
    "member_decide",
    "mul",
    "pad_extend",
    "reduce_word",
    "run_suites",
    "sandwich_reduce",
    "seed_system",
    "verify_assgp",
    "verify_system",
]
