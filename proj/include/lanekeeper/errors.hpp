// Copyright 2026 The Lanekeeper Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lanekeeper {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates an operation's preconditions (non-finite input,
/// shape mismatch, out-of-range argument).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration file or option set is malformed or inconsistent.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A synthetic scene description is unusable (x outside [0,1], bad span,
/// more lanes than the model has slots).
class InvalidScene : public Error {
 public:
  using Error::Error;
};

/// Line fitting got fewer than two distinct points.
class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

/// A mailbox put carried a sequence number that is not strictly increasing.
class OrderingError : public Error {
 public:
  using Error::Error;
};

/// A frame source could not be opened (missing path, malformed header,
/// unsupported format).
class SourceOpenError : public Error {
 public:
  using Error::Error;
};

/// Malformed stream content. Carries the byte offset of the first
/// unreadable byte.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Filesystem-level failure (unreadable file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

/// An inference backend failed or is unavailable in this build.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// The simulated robot left the corridor; terminates closed-loop runs.
class OutOfCorridor : public Error {
 public:
  using Error::Error;
};

/// A ground-truth frame labels neither lane.
class InvalidGroundTruth : public Error {
 public:
  using Error::Error;
};

/// A tally was requested over zero verdicts.
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

}  // namespace lanekeeper
