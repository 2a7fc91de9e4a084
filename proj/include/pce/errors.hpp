#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pce {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A function returned a non-finite value at a quadrature / sample node.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Eigen::VectorXd node)
      : Error(what), node_(std::move(node)) {}
  const Eigen::VectorXd& node() const { return node_; }

 private:
  Eigen::VectorXd node_;
};

// A linear system failed the condition-number guard.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class NotPositiveSemidefinite : public Error {
 public:
  NotPositiveSemidefinite(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Singular covariance factor while regularization is disabled. The deficient
// directions are the columns of directions().
class SingularFactor : public Error {
 public:
  SingularFactor(const std::string& what, Eigen::MatrixXd directions)
      : Error(what), directions_(std::move(directions)) {}
  const Eigen::MatrixXd& directions() const { return directions_; }

 private:
  Eigen::MatrixXd directions_;
};

class InfeasibleU : public Error {
 public:
  InfeasibleU(const std::string& what, double defect) : Error(what), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

// A Runge-Kutta stage produced a non-finite value. stage() is 1-based.
class NonFiniteStage : public Error {
 public:
  NonFiniteStage(const std::string& what, int stage) : Error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

}  // namespace pce
