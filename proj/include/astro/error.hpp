#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace astro {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

#define ASTRO_DEFINE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

ASTRO_DEFINE_ERROR(AlphabetError);
ASTRO_DEFINE_ERROR(AlphabetMismatch);
ASTRO_DEFINE_ERROR(EmptyGraph);
ASTRO_DEFINE_ERROR(NonFiniteLoss);
ASTRO_DEFINE_ERROR(DimensionError);
ASTRO_DEFINE_ERROR(MissingEmbedding);
ASTRO_DEFINE_ERROR(MissingComponent);
ASTRO_DEFINE_ERROR(DimMismatch);
ASTRO_DEFINE_ERROR(DegenerateLabels);
ASTRO_DEFINE_ERROR(IoError);
ASTRO_DEFINE_ERROR(ConfigError);

#undef ASTRO_DEFINE_ERROR

// Malformed input file; carries the 1-based line number when known (0 otherwise).
class FormatError : public Error {
 public:
  FormatError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Wraps a component error with the pipeline stage it came from.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(stage) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace astro
