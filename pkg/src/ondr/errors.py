"""Exception hierarchy.

Every domain error carries a stable ``code`` string; the wire service and the
CLI report that code instead of the Python class name.
"""


class OndrError(Exception):
    code = "error"


class MalformedEpc(OndrError, ValueError):
    code = "malformed_epc"


class DuplicateEpc(OndrError):
    code = "duplicate_epc"


class InvalidModeForKind(OndrError):
    code = "invalid_mode_for_kind"


class UnknownEpc(OndrError, KeyError):
    code = "unknown_epc"

    def __str__(self):
        return Exception.__str__(self)


class KindMismatch(OndrError):
    code = "kind_mismatch"


class AlreadyConnected(OndrError):
    code = "already_connected"


class ZeroArea(OndrError, ValueError):
    code = "zero_area"


class InvalidLayout(OndrError, ValueError):
    code = "invalid_layout"


# radio link
class NonPositiveDistance(OndrError, ValueError):
    code = "non_positive_distance"


class InfeasibleCalibration(OndrError, ValueError):
    code = "infeasible_calibration"


class InvalidProfile(OndrError, ValueError):
    code = "invalid_profile"


# inventory
class InvalidProtocolConfig(OndrError, ValueError):
    code = "invalid_protocol_config"


# pairing / navigation
class NotMaster(OndrError):
    code = "not_master"


class NotInDatabase(OndrError):
    code = "not_in_database"


class OutOfRange(OndrError):
    code = "out_of_range"


class WrongKind(OndrError):
    code = "wrong_kind"


class TargetNotFound(OndrError):
    code = "target_not_found"


class SessionStateError(OndrError):
    code = "bad_session_state"


# antenna
class MalformedOptionLine(OndrError, ValueError):
    code = "malformed_option_line"


class MalformedRow(OndrError, ValueError):
    code = "malformed_row"


class NonMonotoneFrequency(OndrError, ValueError):
    code = "non_monotone_frequency"


class EmptyTrace(OndrError, ValueError):
    code = "empty_trace"


class UnsupportedVersion(OndrError, ValueError):
    code = "unsupported_version"


# store
class CorruptStore(OndrError):
    code = "corrupt_store"

    def __init__(self, message, line=None, epc=None):
        super().__init__(message)
        self.line = line
        self.epc = epc


class MissingFile(OndrError, FileNotFoundError):
    code = "missing_file"


class IoFailure(OndrError):
    code = "io_failure"


class BadRequest(OndrError):
    code = "bad_request"


# harness
class InvalidScenario(OndrError, ValueError):
    code = "invalid_scenario"

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
