#pragma once

#include <stdexcept>
#include <string>

namespace modalkit
{

enum class ErrorCode
{
    InvalidArgument,
    InvalidModel,
    SingularPencil,
    InsufficientData,
    Domain,
    UndefinedSnr,
    NoModel,
    Parse,
    Io,
};

/// Exception type thrown by every modalkit routine. The code lets callers
/// (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, const char* what,
                    ErrorCode code = ErrorCode::InvalidArgument)
{
    if (!cond)
        throw Error(code, what);
}

} // namespace modalkit
