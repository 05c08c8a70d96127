#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace smlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// A function Omega x Omega' -> C: one row per point x, one column per omega'.
using VectorField = Eigen::MatrixXcd;

/// Nonnegative fields produced by maximal-type operators.
using RealField = Eigen::MatrixXd;

enum class ErrCode {
  invalid_argument,
  parse,
  io,
  numeric,
  task_failed,
};

class Error : public std::runtime_error {
public:
  Error(ErrCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrCode code() const noexcept { return code_; }

private:
  ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, ErrCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace smlab
