"""
Exception hierarchy shared by every HeteroLab app.

Errors that point at a location carry it as attributes (node id, epoch,
row/column) so callers can report without parsing messages.
"""


class HeteroLabError(Exception):
    """Base class for all HeteroLab errors"""


class ShapeError(HeteroLabError):
    """Operand shapes are incompatible for an operation"""

    def __init__(self, message, node_id=None):
        super().__init__(message)
        self.node_id = node_id


class NonFiniteError(HeteroLabError):
    """A forward pass produced NaN or Inf"""

    def __init__(self, node_id, op):
        super().__init__(f'non-finite value produced by node {node_id} ({op})')
        self.node_id = node_id
        self.op = op


class DomainError(HeteroLabError):
    """An argument lies outside the domain of a function"""

    def __init__(self, message, node_id=None):
        super().__init__(message)
        self.node_id = node_id


class GraphError(HeteroLabError):
    """Misuse of a compute graph (stale values, non-scalar loss, unbound input)"""


class WiringError(GraphError):
    """A loss was wired so that stop-gradient shielding is violated"""


class ArchitectureError(HeteroLabError):
    """Invalid architecture specification"""


class CheckpointError(HeteroLabError):
    """A model checkpoint could not be written or read back"""


class DatasetError(HeteroLabError):
    """Dataset ingestion or construction failed"""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class TrainingDivergedError(HeteroLabError):
    """Training produced a non-finite loss"""

    def __init__(self, epoch, detail):
        super().__init__(f'training diverged at epoch {epoch}: {detail}')
        self.epoch = epoch
        self.detail = detail


class ConfigurationError(HeteroLabError):
    """Experiment configuration is invalid"""


class VerificationError(HeteroLabError):
    """Faithfulness verification failed"""

    def __init__(self, certificate):
        super().__init__(f"faithfulness verification failed: {certificate.get('divergence')}")
        self.certificate = certificate


class ReportError(HeteroLabError):
    """Report files could not be written"""
