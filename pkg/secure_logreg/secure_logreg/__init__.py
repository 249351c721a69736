"""
Secure Logistic Regression - multi-institution ridge logistic regression
Shamir secret sharing + fixed-point field encoding + Newton-Raphson (IRLS)
"""
__version__ = "1.0.0"

from secure_logreg.audit import AuditReport, privacy_audit
from secure_logreg.data import SyntheticSpec, TabularSource, generate_synthetic, load_csv, partition_horizontal
from secure_logreg.field import FieldModulus, decode_fixed, encode_fixed
from secure_logreg.protocol import ProtocolConfig, SecureFitCoordinator, SharePolicy, run_protocol
from secure_logreg.regression import centralized_fit, newton_step
from secure_logreg.sharing import SharedTensor, SharingParams, reconstruct_secret, share_secret
from secure_logreg.transcript import Transcript
from secure_logreg.types import FitResult, LocalDataset, ModelState

__all__ = [
    "AuditReport",
    "FieldModulus",
    "FitResult",
    "LocalDataset",
    "ModelState",
    "ProtocolConfig",
    "SecureFitCoordinator",
    "SharePolicy",
    "SharedTensor",
    "SharingParams",
    "SyntheticSpec",
    "TabularSource",
    "Transcript",
    "centralized_fit",
    "decode_fixed",
    "encode_fixed",
    "generate_synthetic",
    "load_csv",
    "newton_step",
    "partition_horizontal",
    "privacy_audit",
    "reconstruct_secret",
    "run_protocol",
    "share_secret",
]
