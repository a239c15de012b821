from .session import (
    ConsensusReport,
    RaterAnswer,
    ReviewItem,
    ReviewSession,
    build_session,
    consensus,
    duplicate_consistency,
    render_consensus_table,
)
from .store import SessionStore

__all__ = [
    "ConsensusReport",
    "RaterAnswer",
    "ReviewItem",
    "ReviewSession",
    "SessionStore",
    "build_session",
    "consensus",
    "duplicate_consistency",
    "render_consensus_table",
]
