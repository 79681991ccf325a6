#pragma once

#include <stdexcept>
#include <string>

namespace actsql {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string with_context(const std::string& what, const std::string& ctx) {
  return ctx.empty() ? what : what + " (" + ctx + ")";
}
}  // namespace detail

// Input documents and schema catalogs.
struct MissingFileError final : Error { using Error::Error; };
struct MalformedDocumentError final : Error { using Error::Error; };
struct DanglingKeyReferenceError final : Error { using Error::Error; };
struct UnknownDbIdError final : Error { using Error::Error; };

// Database content access.
struct MissingDatabaseError final : Error { using Error::Error; };
struct MissingTableError final : Error { using Error::Error; };
struct UnknownTableInRowsError final : Error { using Error::Error; };
struct ValueRenderFailureError final : Error { using Error::Error; };

// SQL parsing and binding.
struct SqlSyntaxError final : Error {
  SqlSyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)), pos(position) {}
  std::size_t pos;
};
struct UnknownTableError final : Error { using Error::Error; };
struct UnresolvableColumnError final : Error { using Error::Error; };
struct AmbiguousColumnError final : Error { using Error::Error; };

// Question handling and exemplar selection.
struct EmptyQuestionError final : Error { using Error::Error; };
struct PoolTooSmallError final : Error { using Error::Error; };
struct ConfigInvariantError final : Error { using Error::Error; };

// Model gateway.
struct ProviderError final : Error { using Error::Error; };
struct CacheMissError final : Error { using Error::Error; };

// Execution-based evaluation.
struct SqlExecutionError final : Error { using Error::Error; };
struct ExecutionTimeoutError final : Error { using Error::Error; };
struct GoldExecutionFailureError final : Error { using Error::Error; };
struct AlignmentError final : Error { using Error::Error; };

}  // namespace actsql
