#pragma once

#include <stdexcept>
#include <string>

namespace taskdfa {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: unknown symbol, bad file, out-of-range index.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Mismatched alphabets in a binary automaton operation.
class AlphabetMismatch : public Error {
 public:
  AlphabetMismatch() : Error("alphabet mismatch") {}
};

/// A word is labeled both positive and negative.
class ContradictionError : public Error {
 public:
  using Error::Error;
};

/// No consistent DFA exists within the state bound.
class BoundExceeded : public Error {
 public:
  using Error::Error;
};

/// The oracle refused to answer because its query allowance is spent.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("oracle query budget exhausted") {}
  using Error::Error;
};

/// The language-model endpoint could not be reached after retries.
class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

/// One failed request to a chat-completion endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Response text does not follow the FINAL_ANSWER grammar.
class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace taskdfa
