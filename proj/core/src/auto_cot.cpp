#include "actsql/auto_cot.hpp"

#include <algorithm>

#include "actsql/errors.hpp"
#include "actsql/sql/parser.hpp"
#include "actsql/text.hpp"

namespace actsql {

std::vector<Slice> enumerate_slices(const std::vector<std::string>& tokens, int max_len) {
  if (tokens.empty()) throw EmptyQuestionError("cannot enumerate slices of an empty question");
  if (max_len < 1) throw ConfigInvariantError("slice max_len must be >= 1");
  std::vector<Slice> out;
  const int n = static_cast<int>(tokens.size());
  for (int start = 0; start < n; ++start) {
    std::string acc;
    for (int end = start; end < n && end - start < max_len; ++end) {
      if (end > start) acc += ' ';
      acc += tokens[end];
      out.push_back(Slice{start, end, acc});
    }
  }
  return out;
}

namespace {

LinkedItem best_slice_for(const std::string& target, const std::vector<Slice>& slices,
                          const SimilarityProvider& sim) {
  LinkedItem item;
  item.target = target;
  bool first = true;
  for (const auto& s : slices) {
    double score = sim.similarity(target, s.text);
    int len = s.end - s.start;
    int best_len = item.slice.end - item.slice.start;
    bool better = first || score > item.score ||
                  (score == item.score &&
                   (len < best_len || (len == best_len && s.start < item.slice.start)));
    if (better) {
      item.slice = s;
      item.score = score;
      first = false;
    }
  }
  return item;
}

}  // namespace

std::vector<LinkedItem> link_schema_items(const sql::SqlSummary& summary,
                                          const DatabaseSchema& schema,
                                          const std::vector<std::string>& question_tokens,
                                          const SimilarityProvider& sim,
                                          const LinkOptions& options) {
  std::vector<Slice> slices = enumerate_slices(question_tokens, options.max_len);

  std::vector<LinkedItem> links;
  for (const auto& [ti, ci] : summary.linked_columns) {
    std::string target = text::readable(schema.tables[ti].name) + " " +
                         text::readable(schema.tables[ti].columns[ci].name);
    LinkedItem item = best_slice_for(target, slices, sim);
    item.kind = LinkedItem::Kind::column;
    item.table = ti;
    item.column = ci;
    links.push_back(std::move(item));
  }
  for (int ti : summary.from_only_tables) {
    LinkedItem item = best_slice_for(text::readable(schema.tables[ti].name), slices, sim);
    item.kind = LinkedItem::Kind::table;
    item.table = ti;
    links.push_back(std::move(item));
  }

  std::stable_sort(links.begin(), links.end(), [](const LinkedItem& a, const LinkedItem& b) {
    if (a.slice.start != b.slice.start) return a.slice.start < b.slice.start;
    if (a.slice.end != b.slice.end) return a.slice.end < b.slice.end;
    return a.kind == LinkedItem::Kind::column && b.kind == LinkedItem::Kind::table;
  });
  return links;
}

std::string render_cot(const std::vector<LinkedItem>& links,
                       const std::vector<std::string>& values, const std::string& final_sql,
                       const DatabaseSchema& schema) {
  std::string out = "Let's think step by step.";

  std::size_t i = 0;
  while (i < links.size()) {
    const LinkedItem& item = links[i];
    if (item.kind == LinkedItem::Kind::table) {
      out += "\nAccording to \"" + item.slice.text + "\", tables [" +
             schema.tables[item.table].name + "] may be used.";
      ++i;
      continue;
    }
    // Group consecutive column links sharing one slice into a single line.
    std::size_t j = i;
    std::string cols;
    while (j < links.size() && links[j].kind == LinkedItem::Kind::column &&
           links[j].slice.start == item.slice.start && links[j].slice.end == item.slice.end) {
      if (j > i) cols += " and ";
      cols += "[" + schema.tables[links[j].table].name + "." +
              schema.tables[links[j].table].columns[links[j].column].name + "]";
      ++j;
    }
    out += "\nAccording to \"" + item.slice.text + "\", columns " + cols + " may be used.";
    i = j;
  }

  if (!values.empty()) out += "\nValues [" + text::join(values, ", ") + "] may be used.";
  out += "\nSo the final answer is:\n" + final_sql;
  return out;
}

CotAnnotation annotate(const Example& example, const DatabaseSchema& schema,
                       const SimilarityProvider& sim, const LinkOptions& options) {
  sql::SqlAst ast = sql::parse_sql(example.gold_sql, schema);
  sql::SqlSummary summary = sql::summarize(ast);

  CotAnnotation out;
  std::vector<std::string> cased = tokenize_question_cased(example.question);
  out.links = link_schema_items(summary, schema, cased, sim, options);
  out.values = summary.values;
  out.final_sql = text::collapse_whitespace(example.gold_sql);
  out.text = render_cot(out.links, out.values, out.final_sql, schema);
  return out;
}

}  // namespace actsql
