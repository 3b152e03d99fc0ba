/*
 * Copyright 2026 The Renewal Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace renewal {

// Error hierarchy. Every failure the library raises derives from Error so
// callers can catch at whichever granularity they need.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroNorm : public Error {
 public:
  using Error::Error;
};

class UnknownWord : public Error {
 public:
  using Error::Error;
};

class UndefinedBaseline : public Error {
 public:
  using Error::Error;
};

// Retryable failure talking to a remote backend.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The remote side answered, but not in the agreed protocol. Not retryable.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

class VocabularyExhausted : public Error {
 public:
  using Error::Error;
};

/// The three perception dimensions scored for every image.
enum class Metric { safe, beauty, lively };

inline constexpr std::array<Metric, 3> kAllMetrics{Metric::safe, Metric::beauty, Metric::lively};

inline constexpr std::size_t index_of(Metric m) { return static_cast<std::size_t>(m); }

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

/// ASCII case folding; bytes >= 0x80 pass through untouched.
std::string fold_case(std::string_view s);

}  // namespace renewal
