#pragma once

#include <stdexcept>
#include <string>

namespace isoflow {

inline constexpr const char* kToolVersion = "0.1.0";

// Seed used by every randomized sampling routine unless the caller overrides it;
// reports record the seed so runs can be reproduced.
inline constexpr unsigned long long kDefaultSeed = 1729;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the regular quotient interval; message names the violated endpoint.
struct DomainError : Error {
  using Error::Error;
};

/// Closed-form solution queried at or past the singular time.
struct SingularTimeError : Error {
  double singular_time;
  SingularTimeError(const std::string& msg, double T) : Error(msg), singular_time(T) {}
};

/// No (delta, c) pair with positive decay constant exists at the requested tube radius.
struct CertificateInfeasibleError : Error {
  double max_feasible_epsilon;
  CertificateInfeasibleError(const std::string& msg, double eps)
      : Error(msg), max_feasible_epsilon(eps) {}
};

struct InsufficientDataError : Error {
  using Error::Error;
};

struct SingularPointError : Error {
  using Error::Error;
};

struct NotApplicableError : Error {
  using Error::Error;
};

/// Two independent computation routes disagreed beyond their stated tolerance.
struct ConsistencyError : Error {
  using Error::Error;
};

struct StepUnderflowError : Error {
  double t_last;
  double theta_last;
  StepUnderflowError(const std::string& msg, double t, double theta)
      : Error(msg), t_last(t), theta_last(theta) {}
};

}  // namespace isoflow
