#include "artifacts.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wsisel::tools {

namespace fs = std::filesystem;
using json = nlohmann::json;

void require_exists(const std::string& path) {
  if (!fs::exists(path)) {
    throw MissingInputError("input file not found: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  require_exists(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IngestError("failed writing '" + path + "'");
}

void write_assignments(const FeatureTable& table, const Assignment& assignment,
                       const std::string& path) {
  if (assignment.labels.size() != table.size()) {
    throw ConfigError("write_assignments: assignment/table size mismatch");
  }
  std::ostringstream out;
  out << "patch_id,wsi_id,cluster\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.record(i).patch_id << ',' << table.record(i).group_id << ','
        << assignment.labels[i] << "\n";
  }
  write_text_file(path, out.str());
}

AssignmentRows read_assignments(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  AssignmentRows rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line != "patch_id,wsi_id,cluster") {
        throw IngestError(path + ": header must be patch_id,wsi_id,cluster");
      }
      have_header = true;
      continue;
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                   : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw IngestError(path + ":" + std::to_string(line_no) + ": expected 3 fields");
    }
    const std::string cluster_text = line.substr(c2 + 1);
    int cluster = 0;
    const auto [ptr, ec] = std::from_chars(
        cluster_text.data(), cluster_text.data() + cluster_text.size(), cluster);
    if (ec != std::errc() || ptr != cluster_text.data() + cluster_text.size()) {
      throw IngestError(path + ":" + std::to_string(line_no) +
                        ": bad cluster index '" + cluster_text + "'");
    }
    rows.patch_ids.push_back(line.substr(0, c1));
    rows.group_cluster.emplace_back(line.substr(c1 + 1, c2 - c1 - 1), cluster);
  }
  if (!have_header) throw IngestError(path + ": missing header row");
  return rows;
}

void write_plot_data(const FeatureTable& reduced, const AssignmentRows& rows,
                     const std::vector<GroupEntropy>& entropies,
                     const std::string& group_id, const std::string& out_dir) {
  if (reduced.dim() < 2) {
    throw DimensionError("export-plot-data: need at least 2 reduced dimensions");
  }
  if (rows.group_cluster.size() != reduced.size()) {
    throw ConfigError("export-plot-data: assignments do not match the reduced table");
  }
  reduced.group_rows(group_id);  // LookupError for unknown groups

  std::ostringstream scatter;
  scatter << "patch_id,pc1,pc2,cluster,label,in_group\n";
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const PatchRecord& r = reduced.record(i);
    scatter << r.patch_id << ',' << format_double(r.features[0]) << ','
            << format_double(r.features[1]) << ',' << rows.group_cluster[i].second
            << ',';
    if (r.label) scatter << *r.label;
    scatter << ',' << (r.group_id == group_id ? 1 : 0) << "\n";
  }
  write_text_file((fs::path(out_dir) / (group_id + "_scatter.csv")).string(),
                  scatter.str());

  const GroupEntropy* entry = nullptr;
  for (const GroupEntropy& ge : entropies) {
    if (ge.group_id == group_id) {
      entry = &ge;
      break;
    }
  }
  if (!entry) throw LookupError("export-plot-data: group '" + group_id +
                                "' missing from the entropy list");
  std::ostringstream hist;
  hist << "cluster,count,proportion\n";
  for (std::size_t k = 0; k < entry->counts.size(); ++k) {
    const double proportion =
        entry->n_patches > 0
            ? static_cast<double>(entry->counts[k]) /
                  static_cast<double>(entry->n_patches)
            : 0.0;
    hist << k << ',' << entry->counts[k] << ',' << format_double(proportion) << "\n";
  }
  write_text_file((fs::path(out_dir) / (group_id + "_histogram.csv")).string(),
                  hist.str());
}

std::string selection_json(const RankedSelection& ranking) {
  json j;
  j["group_id"] = select_wsi(ranking);
  j["entropy"] = ranking.ordered.front().entropy;
  return j.dump(2) + "\n";
}

}  // namespace wsisel::tools
