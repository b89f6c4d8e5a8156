#ifndef GPCC__ERROR_HPP_
#define GPCC__ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpcc
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public Error
{
public:
  ParseError(const std::string & what, std::size_t line)
  : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
  {
  }

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class EmptySceneError : public Error
{
public:
  using Error::Error;
};

class ShapeError : public Error
{
public:
  using Error::Error;
};

/// A configuration field is invalid. `field()` holds the dotted path of the field.
class ConfigError : public Error
{
public:
  ConfigError(std::string field, const std::string & what)
  : Error(field + ": " + what), field_(std::move(field))
  {
  }

  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

class NotFoundError : public Error
{
public:
  using Error::Error;
};

/// An intervention edit contradicts the group kernel for its declared role.
class KernelViolation : public Error
{
public:
  using Error::Error;
};

class NumericError : public Error
{
public:
  using Error::Error;
};

class CheckpointError : public Error
{
public:
  using Error::Error;
};

}  // namespace gpcc

#endif  // GPCC__ERROR_HPP_
