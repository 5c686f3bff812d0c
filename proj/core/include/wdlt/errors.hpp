#pragma once

#include <stdexcept>
#include <string>

namespace wdlt {

// Base class for every failure this library raises on purpose. Callers that
// want blanket handling catch this; the subtypes exist where the distinction
// changes control flow (e.g. adaptation skips frames on DegenerateSystem but
// lets NoOverlapError propagate).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer usable correspondences than the solver needs (DLT wants N > 6,
// LM wants >= 6 inliers, RANSAC wants a consensus of >= 7).
class InsufficientCorrespondencesError : public Error {
 public:
  using Error::Error;
};

// The 12x12 normal matrix has no well-separated smallest eigenvalue, so the
// pose (or its derivative) is not defined by the data.
class DegenerateSystemError : public Error {
 public:
  using Error::Error;
};

// Scale/cheirality disambiguation failed: the reference point sits exactly on
// the principal plane, or ends up behind the camera after correction.
class CheiralityError : public Error {
 public:
  using Error::Error;
};

// Fewer than 1% of warped pixels land inside the target image.
class NoOverlapError : public Error {
 public:
  using Error::Error;
};

// An optimization loop exceeded its divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input file. Message names the file and the
// offending field or position.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace wdlt
