"""Secret-key reversibility analysis for finite tripartite distributions."""

from .dist import Channel, JointTable, load_table, table_from_dict
from .errors import InternalConsistencyError, InvalidTableError, PreconditionError, SeclabError, SizeCapError

__all__ = [
    "Channel",
    "JointTable",
    "load_table",
    "table_from_dict",
    "SeclabError",
    "InvalidTableError",
    "PreconditionError",
    "SizeCapError",
    "InternalConsistencyError",
]
