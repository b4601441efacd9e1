// Copyright 2026 The maskfuse Authors
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
#include <string_view>

namespace maskfuse
{

enum class ErrorCode {
  kCorruptRle,
  kInvalidMask,
  kDimensionMismatch,
  kInvalidTaxonomy,
  kInvalidLabel,
  kTaxonomyMismatch,
  kAllVoid,
  kEmptyCaption,
  kMissingRegionEmbedding,
  kMissingTextEmbedding,
  kZeroVector,
  kEmptyMatrix,
  kSchemaError,
  kDanglingReference,
  kSpecError,
  kInvalidArgument,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine on bad input. Internal faults surface as
/// other std::exception types; the CLI maps the two families to exit codes 1
/// and 2.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string & message);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Rethrows `e` with `context` prepended to its message, keeping the code.
[[noreturn]] void rethrow_with_context(const Error & e, std::string_view context);

}  // namespace maskfuse
