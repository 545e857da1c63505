// Copyright 2026 The tfgb Authors.
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

#include <stdexcept>
#include <string>

namespace tfgb {

// Root of every error thrown by the library. Callers that only care about
// "the benchmark failed" catch this; tests match the concrete subclasses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Workload / configuration.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Wire format.
class EncodingError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// body_length disagrees with the buffers actually parsed out of the body.
class TruncationError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// A declared length runs past the end of the body (or the input).
class MalformedFrameError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Transport / RPC.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ConnectError : public TransportError {
 public:
  using TransportError::TransportError;
};

// Peer closed the stream cleanly between frames.
class EndOfStream : public TransportError {
 public:
  using TransportError::TransportError;
};

class StartupError : public Error {
 public:
  using Error::Error;
};

// Benchmarks.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace tfgb
