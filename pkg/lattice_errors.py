# Error hierarchy shared by all modules.
# Everything derives from ValueError so the CLI can keep a single `except ValueError` branch.


class LatticeToolError(ValueError):
    '''
    Base class for all domain errors. `kind` is the machine-readable name
    written into JSON error output.
    '''
    kind = 'error'

    def to_dict(self):
        return {'error': self.kind, 'message': str(self)}


class ParameterError(LatticeToolError):
    kind = 'parameter'


class UnassignedGeneratorError(LatticeToolError):
    kind = 'unassigned-generator'

    def __init__(self, index):
        self.index = index
        super().__init__(f"Generator {index} has no assigned value.")


class DimensionError(LatticeToolError):
    kind = 'dimension'


class DomainError(LatticeToolError):
    kind = 'domain'


class DivergenceError(LatticeToolError):
    kind = 'divergence'


class SingularityError(LatticeToolError):
    kind = 'singularity'

    def __init__(self, message, point):
        self.point = point
        super().__init__(message)

    def to_dict(self):
        return {'error': self.kind, 'message': str(self), 'point': float(self.point)}


class ResolutionError(LatticeToolError):
    kind = 'resolution'


class ExpressionSyntaxError(LatticeToolError):
    kind = 'syntax'

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ContractError(LatticeToolError):
    kind = 'contract'


class PropertyCheckError(LatticeToolError):
    '''
    A checked property failed. `witness` must be JSON-serialisable
    (lists of floats, numbers, strings).
    '''
    kind = 'property-check'

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)

    def to_dict(self):
        return {'error': self.kind, 'message': str(self), 'witness': self.witness}


class CertificateRejectedError(PropertyCheckError):
    kind = 'certificate-rejected'
