#pragma once

#include <string>
#include <vector>

#include "actsql/dataset.hpp"
#include "actsql/schema.hpp"
#include "actsql/similarity.hpp"
#include "actsql/sql/summary.hpp"

namespace actsql {

// Contiguous token run of a question; start/end are inclusive indices.
struct Slice {
  int start = 0;
  int end = 0;
  std::string text;  // tokens joined with single spaces
};

// One schema item matched to its best question slice.
struct LinkedItem {
  enum class Kind { column, table };
  Kind kind = Kind::column;
  int table = -1;
  int column = -1;       // -1 for table links
  std::string target;    // readable name handed to the similarity provider
  Slice slice;
  double score = 0.0;
};

struct LinkOptions {
  int max_len = 8;  // longest slice, in tokens
};

// All contiguous slices up to max_len tokens, ordered by (start, end).
std::vector<Slice> enumerate_slices(const std::vector<std::string>& tokens, int max_len);

// Matches every linked column and FROM-only table of the summary against the
// question slices, keeping the best-scoring slice per item. Ties prefer the
// shortest slice, then the earliest start. The result is ordered by slice
// start, then slice end, columns before tables, original item order last.
std::vector<LinkedItem> link_schema_items(const sql::SqlSummary& summary,
                                          const DatabaseSchema& schema,
                                          const std::vector<std::string>& question_tokens,
                                          const SimilarityProvider& sim,
                                          const LinkOptions& options = {});

struct CotAnnotation {
  std::string text;  // full reasoning text, ends with the final SQL
  std::vector<LinkedItem> links;
  std::vector<std::string> values;
  std::string final_sql;
};

// Renders the reasoning text: an opening line, one line per distinct column
// slice ("According to ..., columns [...] may be used."), one line per table
// link, an optional values line, the closing marker and the SQL.
std::string render_cot(const std::vector<LinkedItem>& links,
                       const std::vector<std::string>& values, const std::string& final_sql,
                       const DatabaseSchema& schema);

// Full annotation of one example: parse the gold SQL, summarize, link, and
// render. The gold SQL is embedded with whitespace runs collapsed.
CotAnnotation annotate(const Example& example, const DatabaseSchema& schema,
                       const SimilarityProvider& sim, const LinkOptions& options = {});

}  // namespace actsql
