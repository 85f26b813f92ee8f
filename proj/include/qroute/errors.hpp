#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qroute {

// Two buckets the CLI maps to exit codes: InputError -> 2, EmptyResultError -> 3.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedLine : InputError {
  std::size_t line_no;
  MalformedLine(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_no(line) {}
};

struct DuplicateAsked : InputError {
  std::string question;
  explicit DuplicateAsked(std::string q)
      : InputError("question asked twice: " + q), question(std::move(q)) {}
};

struct DegenerateSplit : EmptyResultError {
  using EmptyResultError::EmptyResultError;
};

struct EmptyWeights : InputError {
  EmptyWeights() : InputError("alias table needs at least one weight") {}
};

struct NonPositiveWeight : InputError {
  std::size_t index;
  explicit NonPositiveWeight(std::size_t i)
      : InputError("weight at index " + std::to_string(i) + " is not positive and finite"),
        index(i) {}
};

struct NoValidStartNodes : InputError {
  using InputError::InputError;
};

struct DimensionMismatch : InputError {
  using InputError::InputError;
};

struct EmptyCorpus : EmptyResultError {
  EmptyCorpus() : EmptyResultError("walk corpus is empty") {}
};

struct NoPositives : EmptyResultError {
  NoPositives() : EmptyResultError("no positive training pairs") {}
};

struct SingleClassInput : InputError {
  SingleClassInput() : InputError("scorer training needs both labels") {}
};

struct NoCandidates : EmptyResultError {
  NoCandidates() : EmptyResultError("candidate set is empty") {}
};

struct EmptyTest : EmptyResultError {
  EmptyTest() : EmptyResultError("no test cases to evaluate") {}
};

struct EmptyRelevant : InputError {
  EmptyRelevant() : InputError("relevant set is empty") {}
};

}  // namespace qroute
