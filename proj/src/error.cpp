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

#include "maskfuse/error.hpp"

namespace maskfuse
{

std::string_view to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::kCorruptRle: return "CorruptRle";
    case ErrorCode::kInvalidMask: return "InvalidMask";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidTaxonomy: return "InvalidTaxonomy";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kTaxonomyMismatch: return "TaxonomyMismatch";
    case ErrorCode::kAllVoid: return "AllVoid";
    case ErrorCode::kEmptyCaption: return "EmptyCaption";
    case ErrorCode::kMissingRegionEmbedding: return "MissingRegionEmbedding";
    case ErrorCode::kMissingTextEmbedding: return "MissingTextEmbedding";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kSpecError: return "SpecError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string & message)
: std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

void rethrow_with_context(const Error & e, std::string_view context)
{
  std::string what = e.what();
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (what.rfind(prefix, 0) == 0) {
    what.erase(0, prefix.size());
  }
  throw Error(e.code(), std::string(context) + ": " + what);
}

}  // namespace maskfuse
