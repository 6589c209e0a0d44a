"""
錯誤類型與結束碼
"""
import pytest

from thomson_lab.errors import (
    DomainError,
    InvalidArcError,
    LabValidationError,
    NotApplicableError,
    NumericalError,
    PreconditionError,
    RationalParseError,
    ResolutionLimitError,
    ThomsonLabError,
    UnsupportedRuleError,
)


@pytest.mark.parametrize(
    "error_type, code",
    [
        (LabValidationError, 2),
        (PreconditionError, 2),
        (UnsupportedRuleError, 2),
        (NotApplicableError, 2),
        (InvalidArcError, 2),
        (RationalParseError, 2),
        (DomainError, 2),
        (NumericalError, 3),
        (ResolutionLimitError, 4),
    ],
)
def test_exit_codes(error_type, code):
    error = error_type("x")
    assert isinstance(error, ThomsonLabError)
    assert error.exit_code == code


def test_validation_errors_are_value_errors():
    assert issubclass(LabValidationError, ValueError)
    assert issubclass(NumericalError, ArithmeticError)


def test_to_dict():
    error = PreconditionError("目標集合不在 E 內", {"degree": 3})
    assert error.to_dict() == {
        "error": "PreconditionError",
        "message": "目標集合不在 E 內",
        "exit_code": 2,
        "details": {"degree": 3},
    }
