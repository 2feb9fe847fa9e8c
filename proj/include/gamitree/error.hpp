// Copyright 2026 The gamitree Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GAMITREE_ERROR_HPP
#define GAMITREE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gamitree {

// Error classes line up with the CLI exit codes (1 usage, 2 validation,
// 3 data, 4 internal).
enum class ErrorKind { Usage = 1, Validation = 2, Data = 3, Internal = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& what) {
  throw Error(ErrorKind::Validation, what);
}
[[noreturn]] inline void throw_data(const std::string& what) { throw Error(ErrorKind::Data, what); }

}  // namespace gamitree

#endif  // GAMITREE_ERROR_HPP
