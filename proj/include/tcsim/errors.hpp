#pragma once

#include <cstddef>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tcsim
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class CutoffTooSmall : public Error
{
public:
    CutoffTooSmall(std::size_t cutoff, std::size_t required, double tail_mass)
        : Error(message(cutoff, required, tail_mass)),
          cutoff_(cutoff),
          required_(required),
          tail_mass_(tail_mass)
    {
    }

    std::size_t cutoff() const noexcept { return cutoff_; }
    std::size_t required_cutoff() const noexcept { return required_; }
    double tail_mass() const noexcept { return tail_mass_; }

private:
    std::size_t cutoff_;
    std::size_t required_;
    double tail_mass_;

    static std::string message(std::size_t cutoff, std::size_t required, double tail_mass)
    {
        std::ostringstream os;
        os << "Fock cutoff " << cutoff << " too small (tail mass " << std::scientific << std::setprecision(3)
           << tail_mass << "), required cutoff " << required;
        return os.str();
    }
};

class SpaceMismatch : public Error
{
public:
    using Error::Error;
};

class DiagonalizationFailure : public Error
{
public:
    DiagonalizationFailure(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual)
    {
    }
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class NotCommuting : public Error
{
public:
    using Error::Error;
};

class OrderNegative : public Error
{
public:
    using Error::Error;
};

class CutoffMismatch : public Error
{
public:
    using Error::Error;
};

class ThresholdExceeded : public Error
{
public:
    using Error::Error;
};

class OffResonance : public Error
{
public:
    using Error::Error;
};

class TruncationInsufficient : public Error
{
public:
    using Error::Error;
};

class DegenerateLevel : public Error
{
public:
    using Error::Error;
};

}  // namespace tcsim
