#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ionpa {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double e_charge = 1.602176634e-19;
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double amu = 1.66053906660e-27;

inline double hz_to_rad(double hz) { return two_pi * hz; }
inline double rad_to_hz(double w) { return w / two_pi; }
inline double deg_to_rad(double d) { return d * pi / 180.0; }

// Exit code of the CLI is derived from the category.
enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error(ErrorKind::Validation, msg) {}
};

struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error(ErrorKind::Numerical, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorKind::Io, msg) {}
};

inline void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw PreconditionError(msg);
}

} // namespace ionpa
