#pragma once

#include "carp/normalize.hpp"
#include "carp/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace carp {

enum class NetworkFormat { Json };

/// Network file layout:
///   { "risks": [ {"id", "name", "category", "likelihood"}, ... ],
///     "edges": [ [i, j], ... ],
///     "normalization": { "scheme": "minmax", "epsilon": 0.01 } }   (optional)
/// Without a normalization block, "likelihood" is the normalized L_i and must
/// lie in (0,1). With one, it is the raw expert score, normalized on load.
/// An optional per-risk "raw_likelihood" is kept as metadata.
RiskNetwork load_network(const std::filesystem::path& path, NetworkFormat format = NetworkFormat::Json);
RiskNetwork parse_network_json(std::string_view text);
std::string network_to_json(const RiskNetwork& network);
void save_network(const RiskNetwork& network, const std::filesystem::path& path);

/// Panel CSV: a header of month labels, then one row of 0/1 cells per risk in
/// id order. A header starting with a YYYY-MM tag sets `start_label` and
/// labels count forward by month; otherwise labels are t0, t1, ...
EventPanel load_panel(const std::filesystem::path& path);
EventPanel parse_panel_csv(std::string_view text);
std::string panel_to_csv(const EventPanel& panel);
void save_panel(const EventPanel& panel, const std::filesystem::path& path);

/// Month labels for a panel of the given length.
std::vector<std::string> month_labels(const std::optional<std::string>& start_label, int months);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fingerprint(std::string_view bytes);

}  // namespace carp
