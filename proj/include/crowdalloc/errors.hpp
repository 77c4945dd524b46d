#pragma once

#include <stdexcept>
#include <string>

namespace crowdalloc {

// Base class for all engine errors. The CLI catches this and prefixes the
// pipeline stage that raised it.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInput : Error {
  using Error::Error;
};

// Duplicate coordinates in a point set handed to the graph builder.
struct DuplicatePoints : Error {
  using Error::Error;
};

// Insertion of a point that already is a graph vertex.
struct DuplicatePoint : Error {
  using Error::Error;
};

struct PointInsideHull : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

struct UnknownVertex : Error {
  using Error::Error;
};

struct KTooLarge : Error {
  using Error::Error;
};

struct WOutOfRange : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct EmptyAfterFilter : Error {
  using Error::Error;
};

struct ZeroBaseline : Error {
  using Error::Error;
};

struct InconsistentIds : Error {
  using Error::Error;
};

}  // namespace crowdalloc
