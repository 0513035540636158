#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace balg {

/// Base of every error raised by the library. `kind()` is the stable error name.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define BALG_ERROR(Name)                                              \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  };

BALG_ERROR(DomainError)
BALG_ERROR(ParseError)
BALG_ERROR(EmptyDomain)
BALG_ERROR(InvalidSpec)
BALG_ERROR(ChartMismatch)
BALG_ERROR(DegreeOverflow)
BALG_ERROR(NotBK)
BALG_ERROR(NotB1)
BALG_ERROR(NotInFlag)
BALG_ERROR(RankMismatch)
BALG_ERROR(Degenerate)
BALG_ERROR(NonConstantSpan)
BALG_ERROR(UnsupportedRank)
BALG_ERROR(NotContact)
BALG_ERROR(NonTransverse)
BALG_ERROR(DuplicateCoordinate)
BALG_ERROR(NoTransversality)
BALG_ERROR(NotSymplectic)
BALG_ERROR(Blowup)
BALG_ERROR(DomainExit)
BALG_ERROR(NoReturn)
BALG_ERROR(ConstantProjection)
BALG_ERROR(SingularLevel)
BALG_ERROR(NotJacobi)
BALG_ERROR(NotPoisson)
BALG_ERROR(UnknownCoordinate)
BALG_ERROR(UnknownKind)
BALG_ERROR(IOError)

#undef BALG_ERROR

/// Shooting failure; carries the classification of the seed orbit.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::string classification = "generic")
      : Error("NoConvergence", what), classification_(std::move(classification)) {}
  const std::string& classification() const noexcept { return classification_; }

 private:
  std::string classification_;
};

}  // namespace balg
