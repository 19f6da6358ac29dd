/*
 * Copyright 2026 The rdtarget Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RDTARGET_COMMON_ERROR_HPP_
#define RDTARGET_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rdtarget {

// Error categories. They map one-to-one onto the C API status codes.
enum class ErrorKind {
  kInvalidArgument,
  kConfig,
  kData,
  kIo,
  kIncompatible,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& message) {
  return Error(ErrorKind::kInvalidArgument, message);
}
inline Error config_error(const std::string& message) {
  return Error(ErrorKind::kConfig, message);
}
inline Error data_error(const std::string& message) {
  return Error(ErrorKind::kData, message);
}
inline Error io_error(const std::string& message) {
  return Error(ErrorKind::kIo, message);
}
inline Error incompatible(const std::string& message) {
  return Error(ErrorKind::kIncompatible, message);
}

}  // namespace rdtarget

#endif  // RDTARGET_COMMON_ERROR_HPP_
