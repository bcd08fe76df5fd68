#pragma once

// Artifact readers/writers shared by the pipeline subcommand and the
// individual stage subcommands, so composing stages by hand produces
// byte-identical files to the fused pipeline.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsisel/cluster.hpp"
#include "wsisel/dataset.hpp"
#include "wsisel/entropy.hpp"

namespace wsisel::tools {

/// Raised when a named input path does not exist; mapped to exit code 2.
struct MissingInputError : Error {
  using Error::Error;
};

void require_exists(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// assignments.csv: header patch_id,wsi_id,cluster; one row per record.
void write_assignments(const FeatureTable& table, const Assignment& assignment,
                       const std::string& path);
struct AssignmentRows {
  std::vector<std::string> patch_ids;
  std::vector<std::pair<std::string, int>> group_cluster;  // record order
};
AssignmentRows read_assignments(const std::string& path);

/// <gid>_scatter.csv over all patches of the reduced table
/// (patch_id,pc1,pc2,cluster,label,in_group) plus <gid>_histogram.csv
/// (cluster,count,proportion).
void write_plot_data(const FeatureTable& reduced, const AssignmentRows& rows,
                     const std::vector<GroupEntropy>& entropies,
                     const std::string& group_id, const std::string& out_dir);

std::string selection_json(const RankedSelection& ranking);

}  // namespace wsisel::tools
