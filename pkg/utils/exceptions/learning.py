from utils.exceptions.base import BaseAMGException


class GraphException(BaseAMGException):
    """Exception raised for invalid graph queries"""
    def __init__(self, message, **kwargs):
        kwargs.setdefault('error_code', 'GRAPH_ERROR')
        kwargs.setdefault('exit_code', 1)
        super().__init__(message, **kwargs)

class EmbeddingException(BaseAMGException):
    """Exception raised for embedding training or lookup failures"""
    def __init__(self, message, node=None, **kwargs):
        details = kwargs.get('details', {})
        if node is not None:
            details['node'] = int(node)
        kwargs['details'] = details
        kwargs.setdefault('error_code', 'EMBEDDING_ERROR')
        kwargs.setdefault('exit_code', 1)
        super().__init__(message, **kwargs)

class ClusteringException(BaseAMGException):
    """Exception raised for invalid clustering requests"""
    def __init__(self, message, **kwargs):
        kwargs.setdefault('error_code', 'CLUSTERING_ERROR')
        kwargs.setdefault('exit_code', 1)
        super().__init__(message, **kwargs)

class CoarseningException(BaseAMGException):
    """Exception raised when a coarsener cannot build a prolongation"""
    def __init__(self, message, stage=None, **kwargs):
        details = kwargs.get('details', {})
        if stage:
            details['stage'] = stage
        kwargs['details'] = details
        self.stage = stage
        kwargs.setdefault('error_code', 'COARSENING_ERROR')
        kwargs.setdefault('exit_code', 1)
        super().__init__(message, **kwargs)
