#pragma once

#include <stdexcept>
#include <string>

namespace circmode {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A parameter is non-finite or outside its admissible range.
class InvalidParameter : public Error
{
public:
  using Error::Error;
};

//! An integration range [a, b] with a > b or outside [0, 2pi].
class InvalidRange : public Error
{
public:
  using Error::Error;
};

//! Too few observations for the requested operation (e.g. leave-one-out with n = 1).
class InsufficientSample : public Error
{
public:
  using Error::Error;
};

//! The sample contains repeated observations.
class TieError : public Error
{
public:
  using Error::Error;
};

//! The density has a plateau, so its modes are not isolated.
class DegenerateDensity : public Error
{
public:
  using Error::Error;
};

//! No bandwidth in [h_floor, h_ceil] gives k or fewer modes.
class NoBracket : public Error
{
public:
  using Error::Error;
};

//! A ratio would divide by a vanishing density value.
class DivisionHazard : public Error
{
public:
  using Error::Error;
};

//! File could not be opened, or its content could not be used.
class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace circmode
