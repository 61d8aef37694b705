#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rnnid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  InvalidArgument = 1,
  UnsupportedPotential,
  RankDeficient,
  Infeasible,
  Numeric,
  Config,
  Io,
};

// Every failure raised by the library carries one of the codes above; the C
// API maps them 1:1 onto rnnid_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, double lambda_min)
      : Error(ErrorCode::RankDeficient, what), lambda_min_(lambda_min) {}
  double lambda_min() const noexcept { return lambda_min_; }

 private:
  double lambda_min_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace rnnid
