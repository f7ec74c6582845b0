/* Copyright 2026 The DeFT Scheduler Authors
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

#ifndef DEFT_ERROR_HPP_
#define DEFT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace deft {

// Numeric values are shared with the C API status codes.
enum class ErrorCode : int {
  kValidation = 2,
  kInfeasible = 3,
  kIo = 4,
  kReconstruction = 5,
  kMalformedTrace = 6,
  kNonSteadyState = 7,
  kMismatch = 8,
  kInvariant = 9,
  kArgument = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Profile or config failed validation. `kind` names the violated rule
/// (e.g. "missing_field", "non_contiguous_ids") so callers can branch on it.
class ValidationError : public Error {
 public:
  ValidationError(std::string kind, const std::string& what)
      : Error(ErrorCode::kValidation, what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(int bucket_id, const std::string& what)
      : Error(ErrorCode::kInfeasible, what), bucket_id_(bucket_id) {}
  int bucket_id() const noexcept { return bucket_id_; }

 private:
  int bucket_id_;
};

}  // namespace deft

#endif  // DEFT_ERROR_HPP_
