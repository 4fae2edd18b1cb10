#include "carp/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>

namespace carp {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t end = line.find(sep, begin);
    out.push_back(trim(line.substr(begin, end - begin)));
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }
  return out;
}

bool parse_year_month(std::string_view label, int& year, int& month) {
  static const std::regex pattern(R"(^(\d{4})-(\d{2})$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(label.begin(), label.end(), m, pattern)) return false;
  year = std::stoi(m[1].str());
  month = std::stoi(m[2].str());
  return month >= 1 && month <= 12;
}

}  // namespace

RiskNetwork parse_network_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("network file is not valid JSON: ") + e.what());
  }

  try {
    std::vector<Risk> risks;
    for (const auto& item : doc.at("risks")) {
      Risk r;
      r.id = item.at("id").get<int>();
      r.name = item.value("name", "risk-" + std::to_string(r.id));
      r.category = parse_category(item.at("category").get<std::string>());
      r.likelihood = item.at("likelihood").get<double>();
      r.raw_likelihood = item.value("raw_likelihood", r.likelihood);
      risks.push_back(std::move(r));
    }
    std::stable_sort(risks.begin(), risks.end(),
                     [](const Risk& a, const Risk& b) { return a.id < b.id; });

    if (doc.contains("normalization")) {
      const auto& block = doc.at("normalization");
      const auto scheme = parse_normalization_scheme(block.value("scheme", std::string("minmax")));
      const double epsilon = block.value("epsilon", kDefaultNormalizationEpsilon);
      std::vector<double> raw;
      for (auto& r : risks) {
        r.raw_likelihood = r.likelihood;
        raw.push_back(r.likelihood);
      }
      const auto normalized = normalize_likelihoods(raw, scheme, epsilon);
      for (std::size_t k = 0; k < risks.size(); ++k) risks[k].likelihood = normalized[k];
    }

    std::vector<RiskNetwork::Edge> edges;
    for (const auto& e : doc.value("edges", json::array())) {
      if (!e.is_array() || e.size() != 2) throw DomainError("each edge must be a pair [i, j]");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return RiskNetwork(std::move(risks), std::move(edges));
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed network file: ") + e.what());
  }
}

RiskNetwork load_network(const std::filesystem::path& path, NetworkFormat format) {
  switch (format) {
    case NetworkFormat::Json: return parse_network_json(read_file(path));
  }
  throw DomainError("unsupported network format");
}

std::string network_to_json(const RiskNetwork& network) {
  json doc;
  doc["risks"] = json::array();
  for (const Risk& r : network.risks()) {
    doc["risks"].push_back({{"id", r.id},
                            {"name", r.name},
                            {"category", std::string(to_string(r.category))},
                            {"likelihood", r.likelihood},
                            {"raw_likelihood", r.raw_likelihood}});
  }
  doc["edges"] = json::array();
  for (auto [a, b] : network.edges()) doc["edges"].push_back({a, b});
  return doc.dump(2) + "\n";
}

void save_network(const RiskNetwork& network, const std::filesystem::path& path) {
  write_file_atomic(path, network_to_json(network));
}

std::vector<std::string> month_labels(const std::optional<std::string>& start_label, int months) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(months));
  int year = 0;
  int month = 0;
  if (start_label && parse_year_month(*start_label, year, month)) {
    for (int t = 0; t < months; ++t) {
      const int index = (year * 12 + month - 1) + t;
      std::ostringstream os;
      os << std::setw(4) << std::setfill('0') << index / 12 << '-' << std::setw(2)
         << index % 12 + 1;
      labels.push_back(os.str());
    }
  } else {
    for (int t = 0; t < months; ++t) labels.push_back("t" + std::to_string(t));
  }
  return labels;
}

EventPanel parse_panel_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DomainError("event panel file is empty");

  const auto header = split(lines.front(), ',');
  EventPanel panel;
  int year = 0;
  int month = 0;
  if (parse_year_month(header.front(), year, month)) panel.start_label = std::string(header.front());

  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  const auto cols = static_cast<Eigen::Index>(header.size());
  panel.states.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto cells = split(lines[static_cast<std::size_t>(r + 1)], ',');
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw DomainError("event panel row " + std::to_string(r) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto cell = cells[static_cast<std::size_t>(c)];
      if (cell == "0") {
        panel.states(r, c) = 0;
      } else if (cell == "1") {
        panel.states(r, c) = 1;
      } else {
        throw DomainError("event panel cell (" + std::to_string(r) + "," + std::to_string(c) +
                          ") is not 0 or 1");
      }
    }
  }
  return panel;
}

EventPanel load_panel(const std::filesystem::path& path) { return parse_panel_csv(read_file(path)); }

std::string panel_to_csv(const EventPanel& panel) {
  std::string out;
  const auto labels = month_labels(panel.start_label, panel.months());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (t) out += ',';
    out += labels[t];
  }
  out += '\n';
  for (Eigen::Index r = 0; r < panel.states.rows(); ++r) {
    for (Eigen::Index c = 0; c < panel.states.cols(); ++c) {
      if (c) out += ',';
      out += panel.states(r, c) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

void save_panel(const EventPanel& panel, const std::filesystem::path& path) {
  write_file_atomic(path, panel_to_csv(panel));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DomainError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DomainError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

std::string fingerprint(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace carp
