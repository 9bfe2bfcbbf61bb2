#pragma once

#include <stdexcept>
#include <string>

namespace advneg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Retryable transport-level failure (connect, timeout, 5xx).
class TransportError : public Error {
 public:
  using Error::Error;
};

// Terminal client-side failure (bad credentials, 4xx).
class AuthError : public Error {
 public:
  using Error::Error;
};

}  // namespace advneg
