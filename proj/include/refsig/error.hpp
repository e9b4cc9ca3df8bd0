#pragma once

#include <stdexcept>
#include <string>

namespace refsig
{
/// Base class of all errors raised by the toolkit.
class error : public std::runtime_error
{
public:
        using std::runtime_error::runtime_error;
};

/// Malformed files, inconsistent frames, bad CSV, mismatched series.
class data_error : public error
{
public:
        using error::error;
};

/// Domain violations and infeasible numeric requests (filter too long,
/// singular fits, overflow in fixed-point emulation).
class numeric_error : public error
{
public:
        using error::error;
};

namespace detail
{
[[noreturn]] inline void throw_data(const std::string& msg)
{
        throw data_error(msg);
}

[[noreturn]] inline void throw_numeric(const std::string& msg)
{
        throw numeric_error(msg);
}

[[noreturn]] inline void throw_argument(const std::string& msg)
{
        throw std::invalid_argument(msg);
}
}
}
