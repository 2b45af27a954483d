#pragma once

#include <string>
#include <vector>

#include "rfidtrace/store/table_set.hpp"

namespace rfidtrace::store {

enum class ReportFormat { Csv, Html };

std::string_view to_string(ReportFormat f);
ReportFormat parse_report_format(std::string_view name);

enum class CompareOp { Less, LessEqual, Equal, GreaterEqual, Greater, NotEqual, Contains };

struct Condition {
  std::size_t column = 0;
  CompareOp op = CompareOp::Equal;
  Value literal;
};

/// Filter grammar (conjunction only):
///
///   filter    := "" | condition ("AND" condition)*
///   condition := column op literal
///   op        := "<" | "<=" | "=" | ">=" | ">" | "!=" | "contains"
///                (also "≤", "≥", "≠")
///   literal   := integer | real | 'quoted text' | "quoted text" | bare word | null
///
/// Literals are converted to the column type. `null` only works with = and !=.
/// `contains` only works on TEXT columns.
std::vector<Condition> parse_filter(const TableSchema& schema, std::string_view filter);
bool matches(const std::vector<Condition>& conditions, const Row& row);

struct ReportPattern {
  std::string name;
  std::string source;
  std::string filter;
  /// Empty means every column in schema order.
  std::vector<std::string> columns;
  /// Empty means primary key order. Prefix "-" sorts descending.
  std::string sort;
  ReportFormat format = ReportFormat::Csv;
};

/// Throws UnknownTable, UnknownColumn or BadFilter.
void validate(const ReportPattern& pattern, const TableSet& tables);

/// Filter, stable sort (ties by primary key ascending; NULL first), project.
/// CSV: header line then one line per row, "\n" endings, fields quoted only
/// when they contain a comma, quote, CR or LF.
/// HTML: one <table> with a <thead> row and one <tr> per row, text escaped.
std::string render_report(const ReportPattern& pattern, const TableSet& tables);

/// report_patterns table row conversion (columns as a comma-separated list).
Row pattern_to_row(const ReportPattern& pattern);
ReportPattern pattern_from_row(const Row& row);

}  // namespace rfidtrace::store
