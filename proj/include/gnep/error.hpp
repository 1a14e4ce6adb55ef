#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace gnep {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bundle, block or matrix does not have the shape the game expects.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, int player = -1)
      : Error(what), player_(player) {}
  int player() const noexcept { return player_; }

 private:
  int player_;
};

/// Some player's feasible section is empty, i.e. the point lies outside the
/// domain of the constraint map.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int player)
      : Error(what), player_(player) {}
  int player() const noexcept { return player_; }

 private:
  int player_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class GradientUnavailable : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine ran out of iterations. Carries its last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last, double residual)
      : Error(what), last_(std::move(last)), residual_(residual) {}
  const Eigen::VectorXd& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd last_;
  double residual_;
};

}  // namespace gnep
