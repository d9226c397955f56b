import os
import sys
import pytest
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from lattice_errors import (CertificateRejectedError, DivergenceError, ExpressionSyntaxError,
                            LatticeToolError, PropertyCheckError, SingularityError, UnassignedGeneratorError)


def test_all_errors_are_value_errors():
    with pytest.raises(ValueError):
        raise DivergenceError("p must be < q")


def test_error_dicts():
    assert DivergenceError("boom").to_dict() == {'error': 'divergence', 'message': 'boom'}
    assert SingularityError("pole", 0.5).to_dict()['point'] == 0.5
    error = CertificateRejectedError("rejected", witness=[1.0, -1.0])
    assert isinstance(error, PropertyCheckError)
    assert error.to_dict() == {'error': 'certificate-rejected', 'message': 'rejected', 'witness': [1.0, -1.0]}


def test_syntax_error_reports_position():
    error = ExpressionSyntaxError("Unknown operator 'foo'", 1)
    assert str(error) == "Unknown operator 'foo' (at position 1)"
    assert error.position == 1


def test_unassigned_generator_message():
    error = UnassignedGeneratorError(3)
    assert isinstance(error, LatticeToolError)
    assert error.index == 3
    assert "Generator 3" in str(error)
