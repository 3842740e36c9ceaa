#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "p2f/evaluation.hpp"

namespace p2f {
namespace {

std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return number(std::get<double>(c));
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string markdown_escape(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

double parse_number(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("CSV: '" + std::string(s) + "' is neither quoted nor a number");
  }
  return x;
}

}  // namespace

Table to_table(const ForgetfulnessReport& report) {
  Table t;
  t.columns = {"scheme", "question", "attacks", "errors", "jaccard_ff", "cosine_ff", "exact_ff"};
  for (const auto& q : report.questions) {
    t.rows.push_back({report.scheme, q.id, static_cast<double>(q.attacks),
                      static_cast<double>(q.errors), q.jaccard_ff, q.cosine_ff, q.exact_ff});
  }
  std::size_t attacks = 0, errors = 0;
  for (const auto& q : report.questions) {
    attacks += q.attacks;
    errors += q.errors;
  }
  t.rows.push_back({report.scheme, std::string("mean"), static_cast<double>(attacks),
                    static_cast<double>(errors), report.jaccard_ff, report.cosine_ff,
                    report.exact_ff});
  return t;
}

Table type_table(const ForgetfulnessReport& report) {
  Table t;
  t.columns = {"scheme", "attack", "attacks", "jaccard_ff", "cosine_ff", "exact_ff"};
  for (const auto& s : report.by_type) {
    t.rows.push_back({report.scheme, std::string(to_string(s.type)), static_cast<double>(s.attacks),
                      s.jaccard_ff, s.cosine_ff, s.exact_ff});
  }
  return t;
}

Table to_table(const AblationResult& result) {
  Table t;
  t.columns = {"config", "questions", "jaccard_ff", "cosine_ff", "exact_ff"};
  for (const auto& r : result.reports) {
    t.rows.push_back({r.scheme, static_cast<double>(r.questions.size()), r.jaccard_ff, r.cosine_ff,
                      r.exact_ff});
  }
  return t;
}

Table to_table(const SweepResult& result) {
  Table t;
  t.columns = {"r",         "hints",      "exact_ff",  "exact_se",
               "jaccard_ff", "jaccard_se", "cosine_ff", "cosine_se"};
  auto add = [&](const SweepCell& c, bool baseline) {
    t.rows.push_back({baseline ? Cell(std::string("none")) : Cell(static_cast<double>(c.r)),
                      static_cast<double>(c.hints), c.exact.mean, c.exact.std_error,
                      c.jaccard.mean, c.jaccard.std_error, c.cosine.mean, c.cosine.std_error});
  };
  for (const auto& c : result.baseline) add(c, true);
  for (const auto& c : result.cells) add(c, false);
  return t;
}

std::string render_table(const Table& table, std::string_view format) {
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw InvalidArgument("table row has " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(table.columns.size()));
    }
  }
  std::string out;
  if (format == "csv") {
    std::vector<std::string> header;
    for (const auto& c : table.columns) header.push_back(csv_quote(c));
    out += join(header, ",") + "\n";
    for (const auto& row : table.rows) {
      std::vector<std::string> cells;
      for (const auto& c : row) {
        cells.push_back(std::holds_alternative<std::string>(c) ? csv_quote(std::get<std::string>(c))
                                                               : number(std::get<double>(c)));
      }
      out += join(cells, ",") + "\n";
    }
    return out;
  }
  if (format == "markdown") {
    std::vector<std::vector<std::string>> text;
    text.push_back({});
    for (const auto& c : table.columns) text.back().push_back(markdown_escape(c));
    for (const auto& row : table.rows) {
      text.push_back({});
      for (const auto& c : row) text.back().push_back(markdown_escape(cell_text(c)));
    }
    std::vector<std::size_t> width(table.columns.size(), 3);
    for (const auto& r : text) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
      std::string s = "|";
      for (std::size_t i = 0; i < r.size(); ++i) {
        s += " " + r[i] + std::string(width[i] - r[i].size(), ' ') + " |";
      }
      return s + "\n";
    };
    out += line(text[0]);
    out += "|";
    for (std::size_t w : width) out += std::string(w + 2, '-') + "|";
    out += "\n";
    for (std::size_t i = 1; i < text.size(); ++i) out += line(text[i]);
    return out;
  }
  throw InvalidArgument("unknown report format '" + std::string(format) +
                        "' (expected markdown or csv)");
}

std::string render_report(const ForgetfulnessReport& report, std::string_view format) {
  if (format == "markdown") {
    std::string out = "## " + report.scheme + "\n\n";
    out += "queries: " + std::to_string(report.query_count) +
           ", attack queries: " + std::to_string(report.attack_query_count) + "\n\n";
    out += render_table(to_table(report), format);
    if (!report.by_type.empty()) out += "\n" + render_table(type_table(report), format);
    return out;
  }
  return render_table(to_table(report), format);
}

Table parse_csv(std::string_view csv) {
  Table t;
  std::size_t i = 0;
  bool header = true;
  while (i < csv.size()) {
    std::vector<Cell> row;
    while (true) {
      if (i < csv.size() && csv[i] == '"') {
        std::string s;
        ++i;
        while (true) {
          if (i >= csv.size()) throw ValidationError("CSV: unterminated quoted field");
          if (csv[i] == '"') {
            if (i + 1 < csv.size() && csv[i + 1] == '"') {
              s += '"';
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          s += csv[i++];
        }
        row.emplace_back(std::move(s));
      } else {
        const std::size_t start = i;
        while (i < csv.size() && csv[i] != ',' && csv[i] != '\n' && csv[i] != '\r') ++i;
        const auto field = csv.substr(start, i - start);
        if (field.empty()) {
          row.emplace_back(std::string());
        } else {
          row.emplace_back(parse_number(field));
        }
      }
      if (i < csv.size() && csv[i] == ',') {
        ++i;
        continue;
      }
      if (i < csv.size() && csv[i] == '\r') ++i;
      if (i < csv.size() && csv[i] == '\n') ++i;
      break;
    }
    if (header) {
      for (const auto& c : row) {
        if (!std::holds_alternative<std::string>(c)) {
          throw ValidationError("CSV: header cells must be quoted");
        }
        t.columns.push_back(std::get<std::string>(c));
      }
      header = false;
    } else {
      if (row.size() != t.columns.size()) {
        throw ValidationError("CSV: row " + std::to_string(t.rows.size() + 1) + " has " +
                              std::to_string(row.size()) + " cells, expected " +
                              std::to_string(t.columns.size()));
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

}  // namespace p2f
