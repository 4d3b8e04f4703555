// Error hierarchy shared by all modules.
//
// Every failure derives from weyl::Error and carries a Category that the
// command-line front end maps onto its exit codes (2 config, 3 math, 4 io).

#pragma once

#include <stdexcept>
#include <string>

namespace weyl {

enum class Category { Config, Math, Io, Usage };

class Error : public std::runtime_error {
 public:
  Error(Category cat, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cat_(cat), kind_(std::move(kind)) {}

  Category category() const noexcept { return cat_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  Category cat_;
  std::string kind_;
};

#define WEYL_DEFINE_ERROR(Name, Cat)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(Cat, #Name, what) {} \
  };

// expression layer
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, std::string expected)
      : Error(Category::Config, "SyntaxError",
              std::to_string(line) + ":" + std::to_string(column) + ": expected " + expected),
        line_(line), column_(column), expected_(std::move(expected)) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

WEYL_DEFINE_ERROR(UnknownIdentifier, Category::Config)
WEYL_DEFINE_ERROR(DomainError, Category::Math)
WEYL_DEFINE_ERROR(DimensionMismatch, Category::Math)

// operator declaration
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& reason)
      : Error(Category::Config, "ValidationError", field + ": " + reason),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

WEYL_DEFINE_ERROR(EllipticityError, Category::Math)
WEYL_DEFINE_ERROR(MultiplicityError, Category::Math)
WEYL_DEFINE_ERROR(ZeroCovector, Category::Math)
WEYL_DEFINE_ERROR(HermiticityDrift, Category::Math)
WEYL_DEFINE_ERROR(NotUnitary, Category::Math)

// eigen-decomposition and derived objects
WEYL_DEFINE_ERROR(DegenerateEigenvalue, Category::Math)
WEYL_DEFINE_ERROR(ZeroEigenvalue, Category::Math)
WEYL_DEFINE_ERROR(NonrealResult, Category::Math)
WEYL_DEFINE_ERROR(NonpositiveHamiltonian, Category::Math)

// flow
WEYL_DEFINE_ERROR(StepUnderflow, Category::Math)
WEYL_DEFINE_ERROR(DegenerateEigenvalueOnPath, Category::Math)
WEYL_DEFINE_ERROR(OutOfRange, Category::Usage)

// torus verifier
WEYL_DEFINE_ERROR(CutoffTooSmall, Category::Config)
WEYL_DEFINE_ERROR(BeyondTrust, Category::Math)
WEYL_DEFINE_ERROR(SupportExceedsT, Category::Config)
WEYL_DEFINE_ERROR(InsufficientRange, Category::Config)

WEYL_DEFINE_ERROR(IoError, Category::Io)

#undef WEYL_DEFINE_ERROR

}  // namespace weyl
