#ifndef SCGAN_COMMON_HPP
#define SCGAN_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <sstream>
#include <string>

namespace scgan {

// ---------------------------------------------------------------------------
// Error types. Every failure surfaces as one of these; the CLI maps
// ConfigError/ArgumentError to exit code 2 and the rest to exit code 1.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct ArgumentError : Error {
    explicit ArgumentError(const std::string& msg) : Error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

struct UnsupportedOracleError : Error {
    explicit UnsupportedOracleError(const std::string& msg) : Error(msg) {}
};

namespace detail {

inline void cat_stream(std::ostringstream&) {}

template <typename Head, typename... Tail>
void cat_stream(std::ostringstream& os, Head&& head, Tail&&... tail) {
    os << std::forward<Head>(head);
    cat_stream(os, std::forward<Tail>(tail)...);
}

} // namespace detail

// Small string builder used by error messages throughout the library.
template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream os;
    detail::cat_stream(os, std::forward<Args>(args)...);
    return os.str();
}

template <typename Err = Error, typename... Args>
[[noreturn]] void fail(Args&&... args) {
    throw Err(cat(std::forward<Args>(args)...));
}

#define SCGAN_CHECK(cond, err_type, ...)                                       \
    do {                                                                       \
        if (!(cond)) ::scgan::fail<err_type>(__VA_ARGS__);                     \
    } while (0)

} // namespace scgan

#endif
