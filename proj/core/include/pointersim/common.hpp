#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pointersim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

// Largest M*N for which a dense total Hamiltonian is assembled and diagonalized.
inline constexpr std::size_t kDefaultDimensionCap = 4096;

/// Invalid input to a core operation (shape mismatch, zero vector, non-Hermitian matrix, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested dense problem exceeds the configured dimension cap.
class CapError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A numerical kernel failed (e.g. a non-convergent eigendecomposition).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Library version string baked in at build time.
std::string version();

}  // namespace pointersim
