from app.domain.exceptions import DomainException


class CliError(Exception):
    """Raised by the command line layer; carries the process exit code."""

    def __init__(self, detail: str, exit_code: int = 1):
        self.detail = detail
        self.exit_code = exit_code
        super().__init__(detail)


class InvalidScenarioError(CliError):
    """Raised when a scenario file cannot be read or validated."""

    def __init__(self, detail: str):
        super().__init__(detail=f"Invalid scenario: {detail}", exit_code=1)


class CommandFailedError(CliError):
    """Raised when a domain error escapes a subcommand."""

    def __init__(self, error: DomainException):
        super().__init__(detail=f"[{error.code}] {error.message}", exit_code=1)
        self.code = error.code
