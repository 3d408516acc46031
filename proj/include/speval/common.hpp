// speval/common.hpp
//
// Copyright 2026 The speval authors
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

#ifndef SPEVAL_COMMON_HPP_
#define SPEVAL_COMMON_HPP_

#include <atomic>
#include <iostream>
#include <stdexcept>
#include <string>

namespace speval {

inline constexpr const char kVersion[] = "0.1.0";

/// Error raised for all data, validation and usage failures in the library.
/// Messages carry file/line context where the failing input is a file.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void Fail(const std::string& msg) { throw Error(msg); }

inline void Require(bool cond, const std::string& msg) {
  if (!cond) Fail(msg);
}

namespace log {

inline std::atomic<long>& WarnCounter() {
  static std::atomic<long> count{0};
  return count;
}

inline bool& Quiet() {
  static bool quiet = false;
  return quiet;
}

inline long WarnCount() { return WarnCounter().load(); }

inline void Warn(const std::string& msg) {
  WarnCounter().fetch_add(1);
  if (!Quiet()) std::cerr << "speval: warning: " << msg << "\n";
}

inline void Info(const std::string& msg) {
  if (!Quiet()) std::cerr << "speval: " << msg << "\n";
}

}  // namespace log
}  // namespace speval

#endif  // SPEVAL_COMMON_HPP_
