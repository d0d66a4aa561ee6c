#include "anisofrac/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "anisofrac/expression.hpp"

namespace anisofrac {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string s;
  for (const auto& i : issues) {
    if (!s.empty()) s += '\n';
    s += i.line > 0 ? fmt::format("line {}: {}", i.line, i.message) : i.message;
  }
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (!quoted && line[i] == '#') return line.substr(0, i);
  }
  return line;
}

struct Value {
  enum Kind { number, string, list, boolean } kind;
  double num = 0.0;
  std::string str;
  std::vector<double> items;
  bool flag = false;
  std::string raw;
};

std::optional<double> to_number(const std::string& t) {
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<Value> parse_value(const std::string& raw, std::string& why) {
  Value v;
  v.raw = raw;
  if (raw.empty()) {
    why = "missing value";
    return std::nullopt;
  }
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      why = "unterminated string";
      return std::nullopt;
    }
    v.kind = Value::string;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') {
      why = "unterminated list";
      return std::nullopt;
    }
    v.kind = Value::list;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = trim(item);
      if (t.empty() && ss.eof() && v.items.empty()) break;
      const auto num = to_number(t);
      if (!num) {
        why = fmt::format("list item '{}' is not a number", t);
        return std::nullopt;
      }
      v.items.push_back(*num);
    }
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::boolean;
    v.flag = raw == "true";
    return v;
  }
  if (const auto num = to_number(raw)) {
    v.kind = Value::number;
    v.num = *num;
    return v;
  }
  // bare word
  v.kind = Value::string;
  v.str = raw;
  return v;
}

class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void number(const Value& v, int line, const std::string& key, double& out) {
    if (v.kind != Value::number) return type_error(line, key, "a number");
    out = v.num;
  }
  void integer(const Value& v, int line, const std::string& key, int& out) {
    if (v.kind != Value::number || v.num != std::floor(v.num) || std::abs(v.num) > 2e9)
      return type_error(line, key, "an integer");
    out = static_cast<int>(v.num);
  }
  void unsigned64(const Value& v, int line, const std::string& key, std::uint64_t& out) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.raw.data(), v.raw.data() + v.raw.size(), x);
    if (res.ec != std::errc() || res.ptr != v.raw.data() + v.raw.size()) return type_error(line, key, "an unsigned integer");
    out = x;
  }
  void string(const Value& v, int line, const std::string& key, std::string& out) {
    if (v.kind != Value::string) return type_error(line, key, "a string");
    out = v.str;
  }
  void list(const Value& v, int line, const std::string& key, std::vector<double>& out) {
    if (v.kind != Value::list) return type_error(line, key, "a list of numbers");
    out = v.items;
  }
  void boolean(const Value& v, int line, const std::string& key, bool& out) {
    if (v.kind != Value::boolean) return type_error(line, key, "true or false");
    out = v.flag;
  }

 private:
  void type_error(int line, const std::string& key, const char* expected) {
    issues_.push_back({line, fmt::format("key '{}' expects {}", key, expected)});
  }
  std::vector<ConfigIssue>& issues_;
};

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> lines;  // "section.key" -> line, for validation messages and duplicates
  Reader rd(issues);
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw_line;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({lineno, "malformed section header"});
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "kernel" && section != "grid" && section != "params" && section != "output") {
        issues.push_back({lineno, fmt::format("unknown section [{}]", section)});
        section = "?";
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({lineno, "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string why;
    const auto value = parse_value(trim(std::string_view(line).substr(eq + 1)), why);
    if (section.empty()) {
      issues.push_back({lineno, fmt::format("key '{}' appears before any section", key)});
      continue;
    }
    if (section == "?") continue;
    if (!value) {
      issues.push_back({lineno, fmt::format("key '{}': {}", key, why)});
      continue;
    }
    const std::string full = section + "." + key;
    if (lines.count(full)) {
      issues.push_back({lineno, fmt::format("duplicate key '{}' (first set on line {})", full, lines[full])});
      continue;
    }
    lines[full] = lineno;
    const Value& v = *value;

    if (section == "kernel") {
      if (key == "name") rd.string(v, lineno, key, c.kernel_name);
      else if (key == "table") rd.string(v, lineno, key, c.kernel_table);
      else if (key.rfind("params.", 0) == 0 && key.size() > 7) {
        const std::string pk = key.substr(7);
        if (v.kind == Value::number) c.kernel_params[pk] = v.num;
        else if (v.kind == Value::string) c.kernel_params[pk] = v.str;
        else issues.push_back({lineno, fmt::format("key '{}' expects a number or a string", key)});
      } else issues.push_back({lineno, fmt::format("unknown key '{}' in [kernel]", key)});
    } else if (section == "grid") {
      if (key == "n") rd.integer(v, lineno, key, c.n);
      else if (key == "box") rd.list(v, lineno, key, c.box);
      else if (key == "N") rd.integer(v, lineno, key, c.N);
      else issues.push_back({lineno, fmt::format("unknown key '{}' in [grid]", key)});
    } else if (section == "params") {
      if (key == "s") rd.number(v, lineno, key, c.s);
      else if (key == "p") rd.number(v, lineno, key, c.p);
      else if (key == "s_list") rd.list(v, lineno, key, c.s_list);
      else if (key == "eps_list") rd.list(v, lineno, key, c.eps_list);
      else if (key == "u") rd.string(v, lineno, key, c.u);
      else if (key == "f") rd.string(v, lineno, key, c.f);
      else if (key == "tol") rd.number(v, lineno, key, c.tol);
      else if (key == "max_iter") rd.integer(v, lineno, key, c.max_iter);
      else if (key == "sample_budget") rd.integer(v, lineno, key, c.sample_budget);
      else if (key == "seed") rd.unsigned64(v, lineno, key, c.seed);
      else if (key == "cell_N") rd.integer(v, lineno, key, c.cell_N);
      else if (key == "method") rd.string(v, lineno, key, c.method);
      else if (key == "angles") rd.integer(v, lineno, key, c.angles);
      else issues.push_back({lineno, fmt::format("unknown key '{}' in [params]", key)});
    } else if (section == "output") {
      if (key == "path") rd.string(v, lineno, key, c.output_path);
      else if (key == "breakdown") rd.boolean(v, lineno, key, c.breakdown);
      else issues.push_back({lineno, fmt::format("unknown key '{}' in [output]", key)});
    }
  }

  auto at = [&](const std::string& full) {
    auto it = lines.find(full);
    return it == lines.end() ? 0 : it->second;
  };
  for (auto issue : validate(c)) {
    // attach the line of the offending key where the message names it
    for (const auto& [full, line] : lines) {
      const std::string key = full.substr(full.find('.') + 1);
      if (issue.line == 0 && issue.message.rfind(key + " ", 0) == 0) issue.line = line;
    }
    if (issue.line == 0 && issue.message.rfind("unknown kernel", 0) == 0) issue.line = at("kernel.name");
    issues.push_back(issue);
  }
  std::stable_sort(issues.begin(), issues.end(), [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

std::vector<ConfigIssue> validate(const ExperimentConfig& c) {
  std::vector<ConfigIssue> out;
  auto add = [&](std::string m) { out.push_back({0, std::move(m)}); };
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), c.kernel_name) == names.end())
    add(fmt::format("unknown kernel '{}'", c.kernel_name));
  if (c.kernel_name == "tabulated" && c.kernel_table.empty()) add("table must be set for the tabulated kernel");
  if (c.n != 1 && c.n != 2) add("n must be 1 or 2");
  if (!c.box.empty()) {
    if (c.box.size() != static_cast<std::size_t>(2 * c.n)) add(fmt::format("box must have {} entries", 2 * c.n));
    else
      for (std::size_t k = 0; k + 1 < c.box.size(); k += 2)
        if (!(c.box[k + 1] > c.box[k])) add("box must satisfy lower < upper on every axis");
  }
  if (c.N < 3) add("N must be at least 3");
  if (!(c.s > 0.0 && c.s < 1.0)) add("s must lie in (0,1)");
  if (!(c.p >= 1.0) || !std::isfinite(c.p)) add("p must be >= 1");
  for (double s : c.s_list)
    if (!(s > 0.0 && s < 1.0)) add(fmt::format("s_list entries must lie in (0,1), got {}", s));
  for (double e : c.eps_list)
    if (!(e > 0.0)) add(fmt::format("eps_list entries must be positive, got {}", e));
  if (!(c.tol >= 0.0)) add("tol must be >= 0");
  if (c.max_iter < 1) add("max_iter must be >= 1");
  if (c.sample_budget < 1) add("sample_budget must be >= 1");
  if (c.cell_N < 2) add("cell_N must be >= 2");
  if (c.angles < 4 || c.angles % 2 != 0) add("angles must be even and >= 4");
  if (c.method != "automatic" && c.method != "direct" && c.method != "newton" && c.method != "cg")
    add("method must be automatic, direct, newton or cg");
  for (const auto* expr : {&c.u, &c.f}) {
    try {
      (void)Expression::parse(*expr);
    } catch (const ExpressionError& e) {
      add(fmt::format("{} {}", expr == &c.u ? "u" : "f", e.what()));
    }
  }
  return out;
}

}  // namespace anisofrac
