#include "commoncv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "commoncv/error.hpp"

namespace commoncv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

struct Line {
  std::size_t number;  // 1-based
  std::string text;
};

// Non-blank lines with any trailing '\r' removed.
std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (trim(text).empty()) continue;
    lines.push_back({number, text});
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read error");
  return lines;
}

void expect_header(const std::vector<Line>& lines, std::string_view expected) {
  if (lines.empty()) {
    throw Error(ErrorCode::MalformedHeader, "empty input; expected header `" + std::string(expected) + "`");
  }
  if (lines.front().text != expected) {
    throw Error(ErrorCode::MalformedHeader, "expected header `" + std::string(expected) + "`, got `" +
                                                lines.front().text + "`");
  }
}

std::string at_line(const Line& line) { return "line " + std::to_string(line.number) + ": "; }

bool parse_integer(std::string_view field, std::int64_t& value) {
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

bool parse_decimal(std::string_view field, double& value) noexcept {
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value, std::chars_format::general);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

Study read_raw_csv(std::istream& in) {
  const auto lines = read_lines(in);
  expect_header(lines, "group,value");

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>, std::less<>> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i].text);
    if (fields.size() != 2) {
      throw Error(ErrorCode::MalformedHeader, at_line(lines[i]) + "expected 2 fields");
    }
    if (fields[0].empty()) {
      throw Error(ErrorCode::InvalidArgument, at_line(lines[i]) + "empty group label");
    }
    double x = 0.0;
    if (!parse_decimal(fields[1], x)) {
      throw Error(ErrorCode::NonNumericValue,
                  at_line(lines[i]) + "value `" + std::string(fields[1]) + "` is not a finite number");
    }
    auto it = values.find(fields[0]);
    if (it == values.end()) {
      order.emplace_back(fields[0]);
      it = values.emplace(std::string(fields[0]), std::vector<double>{}).first;
    }
    it->second.push_back(x);
  }

  std::vector<SampleSummary> groups;
  for (std::size_t i = 0; i < order.size(); ++i) {
    try {
      groups.push_back(summarize(values.at(order[i])));
    } catch (const Error& e) {
      throw Error(e.code(), "group " + order[i] + ": " + e.what(), i);
    }
  }
  return validate_study(std::move(groups), std::move(order));
}

Study read_raw_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_raw_csv(in);
}

Study read_summary_csv(std::istream& in) {
  const auto lines = read_lines(in);
  expect_header(lines, "group,n,mean,sd");

  std::vector<GroupMoments> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i].text);
    if (fields.size() != 4) {
      throw Error(ErrorCode::MalformedHeader, at_line(lines[i]) + "expected 4 fields");
    }
    GroupMoments g;
    g.label = std::string(fields[0]);
    if (g.label.empty()) throw Error(ErrorCode::InvalidArgument, at_line(lines[i]) + "empty group label");
    for (const auto& other : groups) {
      if (other.label == g.label) {
        throw Error(ErrorCode::InvalidArgument, at_line(lines[i]) + "duplicate group `" + g.label + "`");
      }
    }
    if (!parse_integer(fields[1], g.n) || g.n < 2) {
      throw Error(ErrorCode::InvalidCount,
                  at_line(lines[i]) + "n `" + std::string(fields[1]) + "` is not an integer >= 2");
    }
    if (!parse_decimal(fields[2], g.mean) || !parse_decimal(fields[3], g.sd)) {
      throw Error(ErrorCode::NonNumericValue, at_line(lines[i]) + "mean and sd must be finite numbers");
    }
    groups.push_back(std::move(g));
  }
  return validate_study(groups);
}

Study read_summary_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_summary_csv(in);
}

void write_summary_csv(std::ostream& out, const Study& study) {
  out << "group,n,mean,sd\n";
  for (std::size_t i = 0; i < study.k(); ++i) {
    const auto& g = study.group(i);
    out << study.label(i) << ',' << g.n() << ',' << format_number(g.mean()) << ','
        << format_number(g.sd()) << '\n';
  }
}

std::string grid_csv_header(std::size_t k) {
  std::string h = "phi";
  for (std::size_t i = 1; i <= k; ++i) h += ",mu" + std::to_string(i);
  for (std::size_t i = 1; i <= k; ++i) h += ",n" + std::to_string(i);
  return h;
}

std::vector<SimConfig> read_grid_csv(std::istream& in, const SimConfig& defaults) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw Error(ErrorCode::MalformedHeader, "empty grid file");
  const auto header = split(lines.front().text);
  if (header.size() < 5 || header.size() % 2 == 0) {
    throw Error(ErrorCode::MalformedHeader, "grid header must be phi,mu1..muk,n1..nk with k >= 2");
  }
  const std::size_t k = (header.size() - 1) / 2;
  expect_header(lines, grid_csv_header(k));

  std::vector<SimConfig> configs;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    const auto fields = split(lines[row].text);
    if (fields.size() != 2 * k + 1) {
      throw Error(ErrorCode::MalformedHeader,
                  at_line(lines[row]) + "expected " + std::to_string(2 * k + 1) + " fields");
    }
    SimConfig c = defaults;
    c.mus.assign(k, 0.0);
    c.ns.assign(k, 0);
    bool ok = parse_decimal(fields[0], c.phi);
    for (std::size_t i = 0; i < k && ok; ++i) ok = parse_decimal(fields[1 + i], c.mus[i]);
    if (!ok) throw Error(ErrorCode::NonNumericValue, at_line(lines[row]) + "phi and mu must be numbers");
    for (std::size_t i = 0; i < k; ++i) {
      if (!parse_integer(fields[1 + k + i], c.ns[i]) || c.ns[i] < 2) {
        throw Error(ErrorCode::InvalidCount, at_line(lines[row]) + "sample sizes must be integers >= 2");
      }
    }
    c.cell_index = row - 1;
    validate_config(c);
    configs.push_back(std::move(c));
  }
  return configs;
}

std::vector<SimConfig> read_grid_csv(const std::filesystem::path& path, const SimConfig& defaults) {
  auto in = open_input(path);
  return read_grid_csv(in, defaults);
}

void write_sim_results_csv(std::ostream& out, const std::vector<SimResult>& rows) {
  if (rows.empty()) return;
  const std::size_t k = rows.front().config.mus.size();
  const auto& methods = rows.front().config.methods;
  for (const auto& r : rows) {
    if (r.config.mus.size() != k || r.config.methods != methods) {
      throw Error(ErrorCode::InvalidArgument, "all result rows must share group count and methods");
    }
  }

  out << "cell," << grid_csv_header(k) << ",reps,draws,level,seed";
  for (Method m : methods) {
    const auto name = std::string(to_string(m));
    out << ',' << name << "_coverage," << name << "_length," << name << "_failures";
  }
  out << '\n';
  for (const auto& r : rows) {
    const auto& c = r.config;
    out << c.cell_index << ',' << format_number(c.phi);
    for (double mu : c.mus) out << ',' << format_number(mu);
    for (auto n : c.ns) out << ',' << n;
    out << ',' << c.reps << ',' << c.m << ',' << format_number(c.level) << ',' << c.master_seed;
    for (const auto& mc : r.methods) {
      out << ',' << format_number(mc.coverage) << ',' << format_number(mc.avg_length) << ','
          << mc.failures;
    }
    out << '\n';
  }
}

}  // namespace commoncv
