"""Group-fairness auditing from binary agree/disagree feedback."""

__version__ = "0.1.0"

from .definite import (NotionValue, accuracy_equality, calibration, definite_notion,
                       statistical_parity)
from .domain import (AuditRecord, CriticFeedback, DomainError, GroupPartition, LabelSpace,
                     Notion, derive_disagreement, validate_records)
from .indefinite import (BoundedNotion, CellBounds, aux_terms, bounded_notion, eo_lower_bound,
                         gf_bounds, gf_estimate, omr_lower_bound, pe_lower_bound)
from .oracle import JointTable, build_joint, estimation_error, true_notion
from .rates import RateKind, RateTable, build_rate_table, rate_at

__all__ = [
    "AuditRecord", "BoundedNotion", "CellBounds", "CriticFeedback", "DomainError",
    "GroupPartition", "JointTable", "LabelSpace", "Notion", "NotionValue", "RateKind",
    "RateTable", "accuracy_equality", "aux_terms", "bounded_notion", "build_joint",
    "build_rate_table", "calibration", "definite_notion", "derive_disagreement",
    "eo_lower_bound", "estimation_error", "gf_bounds", "gf_estimate", "omr_lower_bound",
    "pe_lower_bound", "rate_at", "statistical_parity", "true_notion", "validate_records",
]
