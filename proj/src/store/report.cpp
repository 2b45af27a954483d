#include "rfidtrace/store/report.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "rfidtrace/common/hex.hpp"

namespace rfidtrace::store {

std::string_view to_string(ReportFormat f) { return f == ReportFormat::Csv ? "CSV" : "HTML"; }

ReportFormat parse_report_format(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "CSV") return ReportFormat::Csv;
  if (upper == "HTML") return ReportFormat::Html;
  throw Error(Errc::BadPattern, "unknown report format '" + std::string(name) + "'");
}

namespace {

struct Token {
  enum Kind { Word, Quoted, Op } kind;
  std::string text;
};

[[noreturn]] void bad_filter(const std::string& what) { throw Error(Errc::BadFilter, what); }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '\'' || c == '"') {
      std::string text;
      ++i;
      while (true) {
        if (i >= s.size()) bad_filter("unterminated quoted literal");
        if (s[i] == c) {
          if (i + 1 < s.size() && s[i + 1] == c) {  // doubled quote
            text.push_back(c);
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text.push_back(s[i++]);
      }
      out.push_back({Token::Quoted, text});
    } else if (starts("<=") || starts(">=") || starts("!=") || starts("<>")) {
      out.push_back({Token::Op, std::string(s.substr(i, 2) == "<>" ? "!=" : s.substr(i, 2))});
      i += 2;
    } else if (starts("≤")) {
      out.push_back({Token::Op, "<="});
      i += 3;
    } else if (starts("≥")) {
      out.push_back({Token::Op, ">="});
      i += 3;
    } else if (starts("≠")) {
      out.push_back({Token::Op, "!="});
      i += 3;
    } else if (c == '<' || c == '>' || c == '=') {
      out.push_back({Token::Op, std::string(1, c)});
      ++i;
    } else {
      const auto start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '<' && s[i] != '>' &&
             s[i] != '=' && s[i] != '!' && s[i] != '\'' && s[i] != '"' &&
             static_cast<unsigned char>(s[i]) != 0xE2) {
        ++i;
      }
      if (i == start) bad_filter("unexpected character '" + std::string(1, s[i]) + "'");
      out.push_back({Token::Word, std::string(s.substr(start, i - start))});
    }
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

CompareOp parse_op(const Token& t) {
  if (t.kind == Token::Op) {
    if (t.text == "<") return CompareOp::Less;
    if (t.text == "<=") return CompareOp::LessEqual;
    if (t.text == "=") return CompareOp::Equal;
    if (t.text == ">=") return CompareOp::GreaterEqual;
    if (t.text == ">") return CompareOp::Greater;
    if (t.text == "!=") return CompareOp::NotEqual;
  }
  if (t.kind == Token::Word && lower(t.text) == "contains") return CompareOp::Contains;
  bad_filter("expected an operator, got '" + t.text + "'");
}

Value literal_for(const Token& t, const Column& col) {
  if (t.kind == Token::Word && lower(t.text) == "null") return std::monostate{};
  const auto& s = t.text;
  switch (col.type) {
    case ColumnType::Integer: {
      std::int64_t v = 0;
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (t.kind == Token::Quoted || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        bad_filter("'" + s + "' is not an integer for column " + col.name);
      }
      return v;
    }
    case ColumnType::Real: {
      double v = 0;
      auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (t.kind == Token::Quoted || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        bad_filter("'" + s + "' is not a number for column " + col.name);
      }
      return v;
    }
    case ColumnType::Text: return s;
    case ColumnType::Blob:
      try {
        return from_hex(s);
      } catch (const std::invalid_argument&) {
        bad_filter("'" + s + "' is not hex for column " + col.name);
      }
  }
  bad_filter("bad literal");
}

}  // namespace

std::vector<Condition> parse_filter(const TableSchema& schema, std::string_view filter) {
  const auto tokens = tokenize(filter);
  std::vector<Condition> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 3 > tokens.size()) bad_filter("incomplete condition");
    if (tokens[i].kind != Token::Word) bad_filter("expected a column name, got '" + tokens[i].text + "'");
    Condition c;
    c.column = schema.index_of(tokens[i].text);
    c.op = parse_op(tokens[i + 1]);
    const auto& col = schema.columns[c.column];
    c.literal = literal_for(tokens[i + 2], col);
    if (is_null(c.literal) && c.op != CompareOp::Equal && c.op != CompareOp::NotEqual) {
      bad_filter("null only compares with = or !=");
    }
    if (c.op == CompareOp::Contains && col.type != ColumnType::Text) {
      bad_filter("contains needs a TEXT column, " + col.name + " is " + std::string(to_string(col.type)));
    }
    out.push_back(std::move(c));
    i += 3;
    if (i < tokens.size()) {
      if (tokens[i].kind != Token::Word || lower(tokens[i].text) != "and") {
        bad_filter("expected AND, got '" + tokens[i].text + "'");
      }
      ++i;
      if (i == tokens.size()) bad_filter("dangling AND");
    }
  }
  return out;
}

bool matches(const std::vector<Condition>& conditions, const Row& row) {
  for (const auto& c : conditions) {
    const auto& cell = row.at(c.column);
    if (is_null(c.literal)) {
      if ((c.op == CompareOp::Equal) != is_null(cell)) return false;
      continue;
    }
    if (is_null(cell)) return false;
    if (c.op == CompareOp::Contains) {
      if (std::get<std::string>(cell).find(std::get<std::string>(c.literal)) == std::string::npos) return false;
      continue;
    }
    const int cmp = compare(cell, c.literal);
    bool ok = false;
    switch (c.op) {
      case CompareOp::Less: ok = cmp < 0; break;
      case CompareOp::LessEqual: ok = cmp <= 0; break;
      case CompareOp::Equal: ok = cmp == 0; break;
      case CompareOp::GreaterEqual: ok = cmp >= 0; break;
      case CompareOp::Greater: ok = cmp > 0; break;
      case CompareOp::NotEqual: ok = cmp != 0; break;
      case CompareOp::Contains: break;
    }
    if (!ok) return false;
  }
  return true;
}

namespace {

struct Plan {
  const Table* table;
  std::vector<Condition> conditions;
  std::vector<std::size_t> columns;
  std::optional<std::size_t> sort;
  bool descending = false;
};

Plan plan(const ReportPattern& p, const TableSet& tables) {
  if (p.name.empty()) throw Error(Errc::BadPattern, "pattern without a name");
  Plan out;
  out.table = &tables.table(p.source);
  const auto& schema = out.table->schema;
  out.conditions = parse_filter(schema, p.filter);
  if (p.columns.empty()) {
    for (std::size_t i = 0; i < schema.columns.size(); ++i) out.columns.push_back(i);
  } else {
    for (const auto& c : p.columns) out.columns.push_back(schema.index_of(c));
  }
  if (!p.sort.empty()) {
    std::string_view key = p.sort;
    if (key.front() == '-') {
      out.descending = true;
      key.remove_prefix(1);
    } else if (key.front() == '+') {
      key.remove_prefix(1);
    }
    out.sort = schema.index_of(key);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void validate(const ReportPattern& pattern, const TableSet& tables) { plan(pattern, tables); }

std::string render_report(const ReportPattern& pattern, const TableSet& tables) {
  const auto pl = plan(pattern, tables);
  const auto& schema = pl.table->schema;

  // Rows come out of the table in primary-key order; the stable sort keeps
  // that order among equal sort keys.
  std::vector<const Row*> rows;
  for (const auto& [_, r] : pl.table->rows) {
    if (matches(pl.conditions, r)) rows.push_back(&r);
  }
  if (pl.sort) {
    const auto col = *pl.sort;
    std::stable_sort(rows.begin(), rows.end(), [&](const Row* a, const Row* b) {
      const int c = compare((*a)[col], (*b)[col]);
      return pl.descending ? c > 0 : c < 0;
    });
  }

  std::string out;
  if (pattern.format == ReportFormat::Csv) {
    for (std::size_t i = 0; i < pl.columns.size(); ++i) {
      if (i) out.push_back(',');
      out += csv_field(schema.columns[pl.columns[i]].name);
    }
    out.push_back('\n');
    for (const auto* r : rows) {
      for (std::size_t i = 0; i < pl.columns.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_field(display((*r)[pl.columns[i]]));
      }
      out.push_back('\n');
    }
    return out;
  }

  out += "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>" + html_escape(pattern.name) +
         "</title></head>\n<body>\n<table>\n<thead><tr>";
  for (auto c : pl.columns) out += "<th>" + html_escape(schema.columns[c].name) + "</th>";
  out += "</tr></thead>\n<tbody>\n";
  for (const auto* r : rows) {
    out += "<tr>";
    for (auto c : pl.columns) out += "<td>" + html_escape(display((*r)[c])) + "</td>";
    out += "</tr>\n";
  }
  out += "</tbody>\n</table>\n</body>\n</html>\n";
  return out;
}

Row pattern_to_row(const ReportPattern& p) {
  std::string columns;
  for (std::size_t i = 0; i < p.columns.size(); ++i) {
    if (i) columns.push_back(',');
    columns += p.columns[i];
  }
  return Row{p.name, p.source, p.filter, columns, p.sort, std::string(to_string(p.format))};
}

ReportPattern pattern_from_row(const Row& row) {
  ReportPattern p;
  p.name = std::get<std::string>(row.at(0));
  p.source = std::get<std::string>(row.at(1));
  p.filter = std::get<std::string>(row.at(2));
  const auto& columns = std::get<std::string>(row.at(3));
  std::size_t start = 0;
  while (start < columns.size()) {
    auto comma = columns.find(',', start);
    if (comma == std::string::npos) comma = columns.size();
    if (comma > start) p.columns.push_back(columns.substr(start, comma - start));
    start = comma + 1;
  }
  p.sort = std::get<std::string>(row.at(4));
  p.format = parse_report_format(std::get<std::string>(row.at(5)));
  return p;
}

}  // namespace rfidtrace::store
